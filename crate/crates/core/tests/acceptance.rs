//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Full-scale policies come from `scenarios/policies/*` when their fingerprints match the
//! shipped designs, otherwise they are solved once and cached under the cargo target tmp
//! dir. Tuned baseline gains are cached the same way.
//!
//! The process exits 0 whatever the outcome so the report never blocks `cargo test`;
//! set `SATCTL_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3, Vector4};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use satctl::alloc::{allocate, build_feasible, pulse_modulate, LEVELS, PERIOD_MS, WINDOW_MS};
use satctl::baseline::tuning::{tune_baseline, TuneOptions, TuneReport};
use satctl::dp::grid::{inverse_spacing, locate};
use satctl::dp::{value_iterate, DpGrid, DpProblem, DynamicsKind, ErrorKind, Spacing};
use satctl::dynamics::{
    body_to_rsw, no_failures, rk4_step, single_failure, BodyWrench, Channel, FailureMask, OrbitElements, OrbitModel,
    Quaternion, SatelliteParams, SatelliteState, THRUSTER_COUNT,
};
use satctl::sim::{compare, default_radii, run, run_fingerprint, sweep, DpDesign, PolicySet, Scenario};

use common::{enumerate_on_times, nonlinear_relative, oracle_cost, D, U_MAX, U_ON};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

// fully actuated: max settling 238.5 s ± 20 %, impulse 2.03 N·s ± 30 %
const SETTLING_NOMINAL_S: f64 = 238.5;
const SETTLING_TOL: f64 = 0.20;
const IMPULSE_NOMINAL_NS: f64 = 2.03;
const IMPULSE_TOL: f64 = 0.30;
const POS_SSE_MAX_M: f64 = 0.20;
const ATT_SSE_MAX_DEG: f64 = 1.0;
// fuel comparison
const TUNED_SETTLING_TOL: f64 = 0.10;
const IMPULSE_RATIO_MIN: f64 = 1.3;
// sweep: DP settling spread must exceed this fraction of its r = 10 value
const DP_SPREAD_MIN: f64 = 0.05;
const BASELINE_SWEEP_TOL: f64 = 0.10;
// fault cases
const W_MF_STABLE: f64 = 0.93;
const RATE_LIMIT: f64 = 2.6;
// numerics
const QUAT_DRIFT_MAX: f64 = 1e-9;
const ORTHO_MAX: f64 = 1e-12;
const RK4_EXACT_MAX: f64 = 1e-12;
const LINEARIZATION_REL_MAX: f64 = 0.01;
const PULSE_REL_MAX: f64 = 4.0 * f64::EPSILON;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cache")
}

fn scenario(file: &str) -> Result<Scenario, Box<dyn std::error::Error>> {
    Ok(Scenario::load(&scenarios().join(file))?)
}

/// Policies for a DP scenario, from its shipped directory if current, else solved and cached.
fn policies(s: &Scenario) -> Result<PolicySet, Box<dyn std::error::Error>> {
    let src = s.policies.as_ref().ok_or("scenario has no policy source")?;
    let design = DpDesign::load(src.design.as_deref().ok_or("policy source has no design")?)?;
    let (t, r) = design.problems(&s.satellite, s.fault.as_ref())?;
    if let Ok(p) = PolicySet::load_dir(&src.dir) {
        if p.check_matches(&t, &r).is_ok() {
            return Ok(p);
        }
    }
    eprintln!("solving policies for {} (cached in {})", s.name, cache_dir().display());
    Ok(PolicySet::solve(&t, &r, Some(&cache_dir()))?)
}

/// Baseline gains tuned against the DP run, cached by the inputs' fingerprint.
fn tuned(s: &Scenario, p: &PolicySet, opts: &TuneOptions) -> Result<TuneReport, Box<dyn std::error::Error>> {
    let key = satctl::fingerprint(&(s.fingerprint(), run_fingerprint(s, Some(p)), opts));
    let path = cache_dir().join(format!("baseline-{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(report) = serde_json::from_str(&text) {
            return Ok(report);
        }
    }
    eprintln!("tuning baseline gains (cached in {})", path.display());
    let dp = run(s, Some(p))?;
    let report = tune_baseline(s, &dp.trajectory, dp.metrics.max_settling_time_s, opts)?;
    std::fs::create_dir_all(cache_dir())?;
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

fn within(value: f64, nominal: f64, tol: f64) -> bool {
    (value - nominal).abs() <= tol * nominal
}

fn fully_actuated() -> Outcome {
    let s = scenario("fully_actuated.json")?;
    let m = run(&s, Some(&policies(&s)?))?.metrics;
    let settling = within(m.max_settling_time_s, SETTLING_NOMINAL_S, SETTLING_TOL);
    let impulse = within(m.total_impulse_ns, IMPULSE_NOMINAL_NS, IMPULSE_TOL);
    let pos = m.pos_max_sse_m <= POS_SSE_MAX_M;
    let att = m.att_max_sse_deg <= ATT_SSE_MAX_DEG;
    let mark = |ok: bool| if ok { "ok" } else { "out of band" };
    Ok((
        m.settled && settling && impulse && pos && att,
        format!(
            "settled {}; max settling {:.1} s ({}, band {:.1}..{:.1}); impulse {:.3} N·s ({}); \
             pos SSE {:.3} m ({}); att SSE {:.3} deg ({})",
            m.settled,
            m.max_settling_time_s,
            mark(settling),
            SETTLING_NOMINAL_S * (1.0 - SETTLING_TOL),
            SETTLING_NOMINAL_S * (1.0 + SETTLING_TOL),
            m.total_impulse_ns,
            mark(impulse),
            m.pos_max_sse_m,
            mark(pos),
            m.att_max_sse_deg,
            mark(att),
        ),
    ))
}

fn tuned_scenario() -> Result<(Scenario, PolicySet, TuneReport), Box<dyn std::error::Error>> {
    let s = scenario("fully_actuated.json")?;
    let p = policies(&s)?;
    let report = tuned(&s, &p, &TuneOptions::default())?;
    let mut t = s.clone();
    t.baseline.gains = report.gains;
    Ok((t, p, report))
}

fn fuel_comparison() -> Outcome {
    let (s, p, report) = tuned_scenario()?;
    let c = compare(&s, &p)?;
    let rel = (c.baseline.max_settling_time_s - c.dp.max_settling_time_s).abs() / c.dp.max_settling_time_s;
    Ok((
        rel <= TUNED_SETTLING_TOL && c.impulse_ratio > IMPULSE_RATIO_MIN,
        format!(
            "settling dp {:.1} s, baseline {:.1} s (diff {:.1} %, {} evals); impulse dp {:.3}, baseline {:.3} N·s, ratio {:.2} (surrogate baseline)",
            c.dp.max_settling_time_s,
            c.baseline.max_settling_time_s,
            100.0 * rel,
            report.evaluations,
            c.dp.total_impulse_ns,
            c.baseline.total_impulse_ns,
            c.impulse_ratio
        ),
    ))
}

fn sweep_property() -> Outcome {
    let (s, p, _) = tuned_scenario()?;
    let rows = sweep(&s, &p, &default_radii());
    if let Some(r) = rows.iter().find(|r| r.error.is_some()) {
        return Ok((false, format!("r = {} failed: {}", r.r_m, r.error.as_deref().unwrap_or(""))));
    }
    let dp: Vec<f64> = rows.iter().map(|r| r.dp_settling_s.unwrap_or(f64::NAN)).collect();
    let bl: Vec<f64> = rows.iter().map(|r| r.baseline_settling_s.unwrap_or(f64::NAN)).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| r.impulse_ratio.unwrap_or(f64::NAN)).collect();
    let at10 = rows.iter().position(|r| r.r_m == 10.0).ok_or("sweep has no r = 10 row")?;
    let spread = dp.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - dp.iter().cloned().fold(f64::INFINITY, f64::min);
    let dp_varies = spread >= DP_SPREAD_MIN * dp[at10];
    let worst_bl = rows
        .iter()
        .zip(&bl)
        .filter(|(r, _)| r.r_m >= 10.0)
        .map(|(_, b)| (b - bl[at10]).abs() / bl[at10])
        .fold(0.0, f64::max);
    let min_ratio = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    let list = |v: &[f64], prec: usize| v.iter().map(|x| format!("{x:.prec$}")).collect::<Vec<_>>().join(" ");
    Ok((
        dp_varies && worst_bl <= BASELINE_SWEEP_TOL && min_ratio > 1.0,
        format!(
            "dp settling spread {:.1} s; baseline r >= 10 worst deviation {:.1} %; min impulse ratio {:.2}\n      \
             dp [{}]\n      baseline [{}]\n      ratio [{}]",
            spread,
            100.0 * worst_bl,
            min_ratio,
            list(&dp, 1),
            list(&bl, 1),
            list(&ratio, 2)
        ),
    ))
}

fn fault_case_1() -> Outcome {
    let s = scenario("fault_case1.json")?;
    let out = run(&s, Some(&policies(&s)?))?;
    let m = &out.metrics;
    let constant = out.trajectory.samples.iter().all(|x| x.w_mf == W_MF_STABLE);
    Ok((
        m.settled && constant,
        format!(
            "settled {} (unsettled: {:?}); settling [{}] s; W_mf constant {W_MF_STABLE}: {}",
            m.settled,
            m.unsettled_channels,
            m.settling_time_s.iter().map(|t| format!("{t:.1}")).collect::<Vec<_>>().join(" "),
            constant
        ),
    ))
}

fn fault_case_2() -> Outcome {
    let s = scenario("fault_case2.json")?;
    let out = run(&s, Some(&policies(&s)?))?;
    let samples = &out.trajectory.samples;
    let y0 = s.initial.rho_m[1];
    let crossed = samples.iter().any(|x| x.rho[1] * y0 < 0.0);
    let position_converged = !out.metrics.unsettled_channels.iter().any(|c| ["x", "y", "z"].contains(&c.as_str()));
    let switches = samples.windows(2).filter(|w| (w[0].w_mf == W_MF_STABLE) != (w[1].w_mf == W_MF_STABLE)).count();
    let max_rate = samples
        .iter()
        .map(|x| x.omega.iter().fold(0.0f64, |a, w| a.max(w.abs())))
        .fold(0.0, f64::max);
    Ok((
        crossed && position_converged && switches >= 1 && max_rate <= RATE_LIMIT,
        format!(
            "y crosses target {crossed}; position converged {position_converged}; W_mf switches {switches}; \
             max |omega| {max_rate:.3} rad/s (limit {RATE_LIMIT})"
        ),
    ))
}

/// Exhaustive recursion over action sequences. Each node expands the four grid corners its
/// successor blends, so every sequence is costed independently of any stored value table.
fn tree_value(pr: &DpProblem, g: &DpGrid, inv: (&[f64], &[f64]), n: usize, i: usize, j: usize) -> (f64, usize) {
    if n == 0 {
        return (pr.terminal_cost(g.s1[i], g.s2[j]), 0);
    }
    let mut order: Vec<usize> = (0..g.u.len()).collect();
    order.sort_by(|&a, &b| g.u[a].abs().total_cmp(&g.u[b].abs()).then(a.cmp(&b)));
    let mut best = (f64::INFINITY, usize::MAX);
    for k in order {
        let (x1, x2) = pr.successor(g.s1[i], g.s2[j], g.u[k]);
        let (c1, w1) = locate(&g.s1, inv.0, x1);
        let (c2, w2) = locate(&g.s2, inv.1, x2);
        let v = |a: usize, b: usize| tree_value(pr, g, inv, n - 1, a, b).0;
        let a = (1.0 - w2) * v(c1, c2) + w2 * v(c1, c2 + 1);
        let b = (1.0 - w2) * v(c1 + 1, c2) + w2 * v(c1 + 1, c2 + 1);
        let c = pr.stage(g.s1[i], g.s2[j], g.u[k]) + ((1.0 - w1) * a + w1 * b);
        if c < best.0 {
            best = (c, k);
        }
    }
    best
}

fn oracle_problem(rng: &mut StdRng) -> DpProblem {
    let rotation = rng.random_bool(0.5);
    DpProblem {
        dynamics: if rotation { DynamicsKind::Rotation } else { DynamicsKind::Translation },
        inertia: if rotation { 0.023 } else { 4.16 },
        s1_range: rng.random_range(0.01..1.0),
        s2_range: rng.random_range(0.005..0.5),
        n1: [3, 5, 7][rng.random_range(0..3)],
        n2: [3, 5, 7][rng.random_range(0..3)],
        spacing: if rng.random_bool(0.5) { Spacing::Log } else { Spacing::Linear },
        action_bound: rng.random_range(0.005..0.05),
        n_actions: [3, 5][rng.random_range(0..2)],
        action_scale: [1.0, 1.0],
        q: [[rng.random_range(0.0..5.0), 0.0], [0.0, rng.random_range(0.0..5.0)]],
        r: rng.random_range(0.1..5.0),
        terminal: [[rng.random_range(0.0..3.0), 0.0], [0.0, rng.random_range(0.0..3.0)]],
        stages: rng.random_range(1..=4),
        dt: 1.0,
        error: if rotation { ErrorKind::SineWrapped } else { ErrorKind::Plain },
        reference: 0.0,
    }
}

fn dp_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut solve_time = 0.0f64;
    let mut cells = 0usize;
    let cases = 40;
    for case in 0..cases {
        let pr = oracle_problem(&mut rng);
        let start = Instant::now();
        let pol = value_iterate(&pr)?;
        solve_time = solve_time.max(start.elapsed().as_secs_f64());
        let g = pr.grid()?;
        let (inv1, inv2) = (inverse_spacing(&g.s1), inverse_spacing(&g.s2));
        for i in 0..g.s1.len() {
            for j in 0..g.s2.len() {
                let (v, k) = tree_value(&pr, &g, (&inv1, &inv2), pr.stages, i, j);
                if pol.j_star[[i, j]].to_bits() != v.to_bits() || pol.i_star[[i, j]] as usize != k {
                    return Ok((
                        false,
                        format!("case {case} cell ({i},{j}): value {} vs {v}, action {} vs {k}", pol.j_star[[i, j]], pol.i_star[[i, j]]),
                    ));
                }
                cells += 1;
            }
        }
    }
    Ok((
        solve_time < 1.0,
        format!("{cases} problems, {cells} cells bit-identical; slowest solve {:.2} ms", 1e3 * solve_time),
    ))
}

fn allocator_optimality() -> Outcome {
    let masks: Vec<FailureMask> = (1..=12).map(|n| single_failure(n)).collect::<Result<_, _>>()?;
    let mut tables = Vec::new();
    let mut sizes_ok = true;
    for (m, failed) in masks.iter().enumerate() {
        for channel in Channel::ALL {
            let table = enumerate_on_times(channel, failed);
            let set = build_feasible(channel, failed, U_ON, D);
            let expected = if Channel::of_thruster(m) == channel { 861 } else { 1681 };
            sizes_ok &= table.len() == expected && set.candidates.len() == expected;
            tables.push((table, set));
        }
    }
    let nominal = Channel::ALL.map(|c| build_feasible(c, &no_failures(), U_ON, D).candidates.len());
    sizes_ok &= nominal == [1681; 3];
    let mut rng = StdRng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (table, set) = &tables[rng.random_range(0..12) * 3 + rng.random_range(0..3)];
        let force = rng.random_range(-1.5..1.5) * 2.0 * U_MAX;
        let torque = rng.random_range(-1.5..1.5) * 2.0 * U_MAX * D;
        let w = rng.random_range(0.05..20.0);
        let got = allocate(force, torque, w, set)?;
        let best = oracle_cost(table, force, torque, w);
        worst = worst.max((got.cost - best) / best.max(1e-9));
    }
    Ok((
        sizes_ok && worst <= 1e-12,
        format!("set sizes 1681/861: {sizes_ok}; 10000 requests, worst relative excess cost {worst:.1e}"),
    ))
}

fn orthonormality_error(c: &Matrix3<f64>) -> f64 {
    (c * c.transpose() - Matrix3::identity()).amax()
}

fn numerical_suite() -> Outcome {
    let params = SatelliteParams::spheres();
    let free = OrbitModel::free_space();
    let orbit = OrbitModel::new(OrbitElements::iss_like())?;

    let mut s = SatelliteState {
        omega: Vector3::new(0.3, -0.2, 0.5),
        q: Quaternion::from_axis_angle(&Vector3::new(1.0, 2.0, -0.5), 0.7),
        ..Default::default()
    };
    let spin = BodyWrench {
        force: Vector3::zeros(),
        torque: Vector3::new(1e-4, -2e-4, 5e-5),
    };
    let mut drift = 0.0f64;
    for n in 0..100_000 {
        s = rk4_step(&s, &spin, &free, &params, n as f64 * 0.01, 0.01)?;
        drift = drift.max((s.q.norm() - 1.0).abs());
    }

    let mut rng = StdRng::seed_from_u64(5);
    let mut ortho = 0.0f64;
    for _ in 0..1000 {
        let raw = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if raw.norm() < 1e-3 {
            continue;
        }
        let q = Quaternion::from_vector(&raw).normalized();
        let frame = orbit.frame_at(rng.random_range(0.0..6000.0))?;
        ortho = ortho
            .max(orthonormality_error(&q.dcm_inertial_to_body()))
            .max(orthonormality_error(&frame.inertial_to_rsw))
            .max(orthonormality_error(&body_to_rsw(&q, &frame)));
    }

    let (rho0, v0, force) = (Vector3::new(-10.0, 10.0, 3.0), Vector3::new(0.05, -0.02, 0.01), Vector3::new(0.024, -0.048, 0.012));
    let mut s = SatelliteState {
        rho: rho0,
        rho_dot: v0,
        ..Default::default()
    };
    let push = BodyWrench {
        force,
        torque: Vector3::zeros(),
    };
    for n in 0..1000 {
        s = rk4_step(&s, &push, &free, &params, n as f64 * 0.01, 0.01)?;
    }
    let a = force / params.mass();
    let rk4_err = (s.rho - (rho0 + v0 * 10.0 + 0.5 * a * 100.0))
        .amax()
        .max((s.rho_dot - (v0 + a * 10.0)).amax());

    let mut lin = 0.0f64;
    for rho0 in [
        Vector3::new(10.0, 0.0, 0.0),
        Vector3::new(0.0, 10.0, 0.0),
        Vector3::new(0.0, 0.0, 10.0),
        Vector3::new(-10.0, 10.0, 10.0),
    ] {
        let reference = nonlinear_relative(&orbit, rho0, 100);
        let mut s = SatelliteState {
            rho: rho0,
            ..Default::default()
        };
        for (k, expected) in reference.iter().enumerate().skip(1) {
            for n in 0..100 {
                s = rk4_step(&s, &BodyWrench::default(), &orbit, &params, (k - 1) as f64 + n as f64 * 0.01, 0.01)?;
            }
            lin = lin.max((s.rho - expected).norm() / expected.norm());
        }
    }

    let mut pulse = 0.0f64;
    for _ in 0..2000 {
        let u: [f64; THRUSTER_COUNT] =
            std::array::from_fn(|_| rng.random_range(0..=LEVELS) as f64 * U_MAX / LEVELS as f64);
        let sched = pulse_modulate(&u, U_MAX)?;
        for j in 0..THRUSTER_COUNT {
            if sched.t_on_ms[j] > WINDOW_MS {
                return Ok((false, format!("pulse of {} ms exceeds the window", sched.t_on_ms[j])));
            }
            let delivered = U_ON * sched.t_on_ms[j] as f64 / 1000.0;
            let requested = u[j] * PERIOD_MS as f64 / 1000.0;
            if requested > 0.0 {
                pulse = pulse.max((delivered - requested).abs() / requested);
            } else if delivered != 0.0 {
                pulse = f64::INFINITY;
            }
        }
    }

    Ok((
        drift < QUAT_DRIFT_MAX
            && ortho < ORTHO_MAX
            && rk4_err < RK4_EXACT_MAX
            && lin <= LINEARIZATION_REL_MAX
            && pulse <= PULSE_REL_MAX,
        format!(
            "quat drift {drift:.1e}; orthonormality {ortho:.1e}; rk4 {rk4_err:.1e}; \
             linearization {lin:.1e} relative; pulse impulse {pulse:.1e}"
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("fully-actuated maneuver", fully_actuated),
        ("fuel comparison", fuel_comparison),
        ("range sweep", sweep_property),
        ("fault case 1 (u5)", fault_case_1),
        ("fault case 2 (u10)", fault_case_2),
        ("dp oracle equivalence", dp_oracle),
        ("allocator optimality", allocator_optimality),
        ("numerical suite", numerical_suite),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    let strict = std::env::var("SATCTL_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}

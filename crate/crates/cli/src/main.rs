use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use satctl::alloc::build_feasible;
use satctl::baseline::tuning::{tune_baseline, TuneOptions};
use satctl::dynamics::{no_failures, single_failure, Channel};
use satctl::fault::tuning::{tune_distance_table, FaultTuneOptions};
use satctl::fault::FaultConfig;
use satctl::sim::config::write_json;
use satctl::sim::io::{write_trajectory_csv, MetricsReport};
use satctl::sim::{compare, default_radii, run, sweep, ControllerKind, DpDesign, PolicySet, Scenario};

#[derive(Parser)]
#[command(name = "satctl", version, about = "DP policies, allocation and closed-loop simulation for on-off thruster spacecraft")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Dp,
    Baseline,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Dp => ControllerKind::Dp,
            ControllerArg::Baseline => ControllerKind::Baseline,
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    controller: Option<ControllerArg>,
    /// Failed thruster, 1..12.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
    fail: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon in whole seconds.
    #[arg(long)]
    horizon: Option<f64>,
    /// Policy directory, overriding the scenario's.
    #[arg(long)]
    policies: Option<PathBuf>,
    /// Solve missing policies from the scenario's design file, caching them here.
    #[arg(long)]
    solve_cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the six channel policies of a design file.
    SolvePolicy {
        /// Design file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the policy files.
        #[arg(long)]
        out: PathBuf,
        /// Failed thruster, 1..12, for reconfigured bounds and faulty-channel weights.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
        fail: Option<u8>,
        /// Reuse solutions stored here, keyed by problem fingerprint.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Run one scenario; writes trajectory.csv and metrics.json.
    Simulate(ScenarioArgs),
    /// Paired DP and baseline runs over r = 5..15 m; writes sweep.json and sweep.csv.
    Sweep {
        #[command(flatten)]
        s: ScenarioArgs,
        #[arg(long, default_value_t = 5.0)]
        r_min: f64,
        #[arg(long, default_value_t = 15.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1.0)]
        r_step: f64,
        /// Baseline gains file from tune-baseline.
        #[arg(long)]
        gains: Option<PathBuf>,
    },
    /// Paired DP and baseline runs on one scenario; writes compare.json.
    Compare {
        #[command(flatten)]
        s: ScenarioArgs,
        #[arg(long)]
        gains: Option<PathBuf>,
    },
    /// Pattern-search the baseline gains against the DP run; writes baseline_gains.json.
    TuneBaseline {
        #[command(flatten)]
        s: ScenarioArgs,
        #[arg(long, default_value_t = 600)]
        max_evals: usize,
        /// Weight of the squared relative settling-time difference in the objective.
        #[arg(long)]
        settling_weight: Option<f64>,
    },
    /// Tune the stable-side weight over approach distance; writes wmf_table.json.
    TuneFaultTable {
        #[command(flatten)]
        s: ScenarioArgs,
    },
    /// Write the per-channel feasible sets; writes feasible.json.
    ExportFeasible {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
        fail: Option<u8>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 is reserved for numerical failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<satctl::Error>())
                .is_some_and(|se| !se.is_input_error());
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::SolvePolicy { config, out, fail, cache } => {
            let design = DpDesign::load(&config)?;
            let fault = fail.map(|n| FaultConfig::new(n as usize));
            let set = solve(&design, &satctl::dynamics::SatelliteParams::spheres(), fault.as_ref(), cache.as_deref())?;
            for p in set.save_dir(&out)? {
                println!("{}", p.display());
            }
            let prints = set.fingerprints();
            write_json(
                &out.join("manifest.json"),
                &json!({"format": "policy-set-v1", "design": config, "failed_thruster": fail, "fingerprints": prints}),
            )?;
            Ok(())
        }
        Command::Simulate(a) => {
            let scenario = load_scenario(&a)?;
            let policies = policies_for(&scenario, &a)?;
            let out = run(&scenario, policies.as_ref())?;
            std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
            write_trajectory_csv(&a.out.join("trajectory.csv"), &out.trajectory)?;
            let report = MetricsReport::new(&scenario.name, scenario.controller, out.fingerprint, out.metrics);
            write_json(&a.out.join("metrics.json"), &report)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Sweep {
            s,
            r_min,
            r_max,
            r_step,
            gains,
        } => {
            let mut scenario = load_scenario(&s)?;
            apply_gains(&mut scenario, gains.as_deref())?;
            let policies = dp_policies(&scenario, &s)?;
            if !(r_step > 0.0) || r_max < r_min {
                bail!("invalid radius range");
            }
            let radii: Vec<f64> = if (r_min, r_max, r_step) == (5.0, 15.0, 1.0) {
                default_radii()
            } else {
                let n = ((r_max - r_min) / r_step + 1e-9).floor() as usize;
                (0..=n).map(|k| r_min + k as f64 * r_step).collect()
            };
            let rows = sweep(&scenario, &policies, &radii);
            std::fs::create_dir_all(&s.out)?;
            let fingerprint = satctl::fingerprint(&(&scenario, policies.fingerprints(), &radii));
            write_json(
                &s.out.join("sweep.json"),
                &json!({"format": "sweep-v1", "scenario": scenario.name, "fingerprint": fingerprint, "surrogate_baseline": true, "rows": rows}),
            )?;
            let mut w = csv::Writer::from_path(s.out.join("sweep.csv"))?;
            w.write_record(["r_m", "dp_settling_s", "baseline_settling_s", "dp_impulse_ns", "baseline_impulse_ns", "impulse_ratio", "error"])?;
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            for r in &rows {
                w.write_record([
                    r.r_m.to_string(),
                    opt(r.dp_settling_s),
                    opt(r.baseline_settling_s),
                    opt(r.dp_impulse_ns),
                    opt(r.baseline_impulse_ns),
                    opt(r.impulse_ratio),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            for r in &rows {
                println!("{}", serde_json::to_string(r)?);
            }
            Ok(())
        }
        Command::Compare { s, gains } => {
            let mut scenario = load_scenario(&s)?;
            apply_gains(&mut scenario, gains.as_deref())?;
            let policies = dp_policies(&scenario, &s)?;
            let report = compare(&scenario, &policies)?;
            write_json(&s.out.join("compare.json"), &report)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::TuneBaseline {
            s,
            max_evals,
            settling_weight,
        } => {
            let scenario = load_scenario(&s)?;
            let policies = dp_policies(&scenario, &s)?;
            let mut dp_scenario = scenario.clone();
            dp_scenario.controller = ControllerKind::Dp;
            let dp = run(&dp_scenario, Some(&policies))?;
            let defaults = TuneOptions::default();
            let opts = TuneOptions {
                max_evals,
                settling_weight: settling_weight.unwrap_or(defaults.settling_weight),
                ..defaults
            };
            let report = tune_baseline(&scenario, &dp.trajectory, dp.metrics.max_settling_time_s, &opts)?;
            let fingerprint = satctl::fingerprint(&(&scenario, policies.fingerprints(), &opts));
            write_json(
                &s.out.join("baseline_gains.json"),
                &json!({"format": "baseline-gains-v1", "fingerprint": fingerprint, "gains": report.gains, "report": report}),
            )?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::TuneFaultTable { s } => {
            let scenario = load_scenario(&s)?;
            let policies = dp_policies(&scenario, &s)?;
            let opts = FaultTuneOptions::default();
            let (table, reports) = tune_distance_table(&scenario, &policies, &opts)?;
            let fingerprint = satctl::fingerprint(&(&scenario, policies.fingerprints(), &opts));
            write_json(
                &s.out.join("wmf_table.json"),
                &json!({"format": "wmf-table-v1", "fingerprint": fingerprint, "distance_table": table, "knots": reports}),
            )?;
            for r in &reports {
                println!("{}", serde_json::to_string(r)?);
            }
            Ok(())
        }
        Command::ExportFeasible { out, fail, seed: _ } => {
            let mask = match fail {
                Some(n) => single_failure(n as usize)?,
                None => no_failures(),
            };
            let p = satctl::dynamics::SatelliteParams::spheres();
            let sets: Vec<_> = Channel::ALL
                .iter()
                .map(|&c| {
                    let set = build_feasible(c, &mask, p.u_on(), p.lever_arm());
                    json!({
                        "channel": c.index(),
                        "size": set.candidates.len(),
                        "candidates": set.candidates.iter().map(|k| json!({
                            "level_a": k.level_a, "level_b": k.level_b, "force_n": k.force, "torque_per_arm_n": k.torque_per_arm,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({"format": "feasible-v1", "failed_thruster": fail, "channels": sets});
            let fingerprint = satctl::fingerprint(&doc);
            let mut doc = doc;
            doc["fingerprint"] = json!(fingerprint);
            write_json(&out.join("feasible.json"), &doc)?;
            for c in doc["channels"].as_array().expect("built above") {
                println!("channel {} size {}", c["channel"], c["size"]);
            }
            Ok(())
        }
    }
}

fn load_scenario(a: &ScenarioArgs) -> anyhow::Result<Scenario> {
    let mut s = Scenario::load(&a.config)?;
    if let Some(c) = a.controller {
        s.controller = c.into();
    }
    if let Some(n) = a.fail {
        let mut f = s.fault.take().unwrap_or_else(|| FaultConfig::new(n as usize));
        f.failed_thruster = n as usize;
        s.fault = Some(f);
    }
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    if let Some(h) = a.horizon {
        s.horizon_s = h;
    }
    if let Some(p) = &a.policies {
        let src = s.policies.get_or_insert(satctl::sim::PolicySource {
            dir: p.clone(),
            design: None,
        });
        src.dir = p.clone();
    }
    s.validate()?;
    Ok(s)
}

fn apply_gains(s: &mut Scenario, path: Option<&Path>) -> anyhow::Result<()> {
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let doc: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        s.baseline.gains = serde_json::from_value(doc["gains"].clone()).with_context(|| format!("{}: gains", p.display()))?;
        s.baseline.validate()?;
    }
    Ok(())
}

fn solve(
    design: &DpDesign,
    params: &satctl::dynamics::SatelliteParams,
    fault: Option<&FaultConfig>,
    cache: Option<&Path>,
) -> anyhow::Result<PolicySet> {
    let (t, r) = design.problems(params, fault)?;
    Ok(PolicySet::solve(&t, &r, cache)?)
}

fn policies_for(s: &Scenario, a: &ScenarioArgs) -> anyhow::Result<Option<PolicySet>> {
    match s.controller {
        ControllerKind::Baseline => Ok(None),
        ControllerKind::Dp => dp_policies(s, a).map(Some),
    }
}

/// Loads the scenario's policy directory; with `--solve-cache`, solves from the design instead.
fn dp_policies(s: &Scenario, a: &ScenarioArgs) -> anyhow::Result<PolicySet> {
    let src = s
        .policies
        .as_ref()
        .context("scenario has no policies entry; pass --policies")?;
    if let Some(cache) = &a.solve_cache {
        let design_path = src.design.as_ref().context("--solve-cache needs policies.design in the scenario")?;
        let design = DpDesign::load(design_path)?;
        let set = solve(&design, &s.satellite, s.fault.as_ref(), Some(cache))?;
        set.save_dir(&src.dir)?;
        return Ok(set);
    }
    let set = PolicySet::load_dir(&src.dir)?;
    if let Some(design_path) = &src.design {
        let (t, r) = DpDesign::load(design_path)?.problems(&s.satellite, s.fault.as_ref())?;
        set.check_matches(&t, &r)?;
    }
    Ok(set)
}

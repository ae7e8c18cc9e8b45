use std::path::PathBuf;
use std::sync::OnceLock;

use satctl::alloc::WINDOW_MS;
use satctl::fault::FaultConfig;
use satctl::sim::io::{read_trajectory_csv, write_trajectory_csv};
use satctl::sim::{run, sweep, ControllerKind, DpDesign, PolicySet, Scenario, Trajectory};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Coarse policies from a shipped design: same weights and bounds, smaller grids.
fn coarse(design_file: &str, fault: Option<&FaultConfig>) -> PolicySet {
    let mut d = DpDesign::load(&scenarios().join(design_file)).unwrap();
    d.translation.grid_points = 101;
    d.translation.stages = 80;
    d.rotation.grid_points = 101;
    d.rotation.stages = 40;
    let base = Scenario::load(&scenarios().join("fully_actuated.json")).unwrap();
    let (t, r) = d.problems(&base.satellite, fault).unwrap();
    PolicySet::solve(&t, &r, None).unwrap()
}

fn nominal_policies() -> &'static PolicySet {
    static P: OnceLock<PolicySet> = OnceLock::new();
    P.get_or_init(|| coarse("design_fully_actuated.json", None))
}

fn scenario(file: &str, horizon_s: f64) -> Scenario {
    let mut s = Scenario::load(&scenarios().join(file)).unwrap();
    s.horizon_s = horizon_s;
    s
}

fn on_count(t: &Trajectory) -> usize {
    t.samples.iter().map(|s| s.thrusters.iter().filter(|&&b| b).count()).sum()
}

fn assert_window_only(t: &Trajectory) {
    for (n, s) in t.samples.iter().enumerate() {
        let offset_ms = (n % 100) as u32 * 10;
        if offset_ms >= WINDOW_MS {
            assert!(s.thrusters.iter().all(|&b| !b), "firing at t = {}", s.t);
        }
    }
}

#[test]
fn dp_fires_only_in_the_window_and_impulse_resums() {
    let out = run(&scenario("fully_actuated.json", 60.0), Some(nominal_policies())).unwrap();
    let t = &out.trajectory;
    assert_eq!(t.samples.len(), 6000);
    assert_window_only(t);
    assert!(on_count(t) > 0);
    let impulse = on_count(t) as f64 * t.u_on * 0.01;
    assert!((out.metrics.total_impulse_full_ns - impulse).abs() <= 1e-12 * impulse);
    let per_thruster: f64 = (0..12).map(|j| t.on_time_ms(j) as f64 * 1e-3 * t.u_on).sum();
    assert!((per_thruster - impulse).abs() <= 1e-12 * impulse);
    assert!(t.samples.iter().all(|s| s.w_mf == 1.0));
}

#[test]
fn dp_runs_are_deterministic() {
    let s = scenario("fully_actuated.json", 30.0);
    let a = run(&s, Some(nominal_policies())).unwrap();
    let b = run(&s, Some(nominal_policies())).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.fingerprint, b.fingerprint);
    let mut other = s.clone();
    other.initial.rho_m[0] = -9.0;
    assert_ne!(run(&other, Some(nominal_policies())).unwrap().fingerprint, a.fingerprint);
}

#[test]
fn failed_thruster_stays_off() {
    for (file, thruster) in [("fault_case1.json", 5), ("fault_case2.json", 10)] {
        let s = scenario(file, 60.0);
        let f = s.fault.clone().unwrap();
        assert_eq!(f.failed_thruster, thruster);
        let p = coarse("design_fault.json", Some(&f));
        let out = run(&s, Some(&p)).unwrap();
        assert_window_only(&out.trajectory);
        assert_eq!(out.trajectory.on_time_ms(thruster - 1), 0);
        for smp in &out.trajectory.samples {
            assert!(smp.w_mf == f.w_mf_stable || smp.w_mf == f.w_mf_attitude_priority, "{}", smp.w_mf);
        }
    }
}

#[test]
fn baseline_fires_only_in_the_window() {
    let mut s = scenario("fully_actuated.json", 30.0);
    s.controller = ControllerKind::Baseline;
    let out = run(&s, None).unwrap();
    assert_window_only(&out.trajectory);
    assert!(on_count(&out.trajectory) > 0);
}

#[test]
fn trajectory_csv_round_trips_a_real_run() {
    let out = run(&scenario("fully_actuated.json", 5.0), Some(nominal_policies())).unwrap();
    let dir = std::env::temp_dir().join(format!("satctl-sim-{}", std::process::id()));
    let path = dir.join("trajectory.csv");
    write_trajectory_csv(&path, &out.trajectory).unwrap();
    let back = read_trajectory_csv(&path, out.trajectory.u_on).unwrap();
    assert_eq!(back, out.trajectory);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_keeps_radius_order_and_sign_pattern() {
    let s = scenario("fully_actuated.json", 20.0);
    let rows = sweep(&s, nominal_policies(), &[5.0, 12.0]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].r_m, 5.0);
    assert_eq!(rows[1].r_m, 12.0);
    assert!(rows.iter().all(|r| r.error.is_none()));
    assert_eq!(s.with_range(5.0).initial.rho_m, [-5.0, 5.0, 5.0]);
}

use fogsplit::experiments::*;
use fogsplit::slm::{slm_run, SlmOptions};
use fogsplit::{grid_oracle, OracleOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn single_point(snr_if_db: f64, bits: f64, n: usize, seed: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(SweepAxis::Workload {
        snr_if_db,
        bits: vec![bits],
    });
    config.n_realizations = n;
    config.seed = seed;
    config
}

#[test]
fn gain_moments() {
    let n = 1_000_000;
    let gains: Vec<f64> = (0..n).map(|r| sample_gain(&mut realization_rng(42, 0, r))).collect();
    let mean = gains.iter().sum::<f64>() / n as f64;
    let tail = gains.iter().filter(|&&g| g > 1.0).count() as f64 / n as f64;
    assert!((0.995..=1.005).contains(&mean), "mean {mean}");
    assert!((tail - (-1.0f64).exp()).abs() <= 0.002, "tail {tail}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mean = (0..n).map(|_| sample_gain(&mut rng)).sum::<f64>() / n as f64;
    assert!((0.995..=1.005).contains(&mean));
}

#[test]
fn one_realization_is_one_solver_call() {
    let config = single_point(5.0, 1e6, 1, 9);
    let point = average_latency(&config, 0).unwrap();
    let gain = sample_gain(&mut realization_rng(9, 0, 0));
    let inst = config.scenario.instance(1e6, 5.0, gain).unwrap();
    let (sol, _) = slm_run(&inst, &SlmOptions::default()).unwrap();
    let entry = &point.entries[0];
    assert_eq!(entry.mean_latency_s, sol.latency);
    assert_eq!((entry.n_valid, entry.n_unbounded, entry.stderr_s), (1, 0, 0.0));
}

#[test]
fn seeds_agree_within_three_standard_errors() {
    let a = average_latency(&single_point(5.0, 1e6, 400, 1), 0).unwrap().entries[0].clone();
    let b = average_latency(&single_point(5.0, 1e6, 400, 2), 0).unwrap().entries[0].clone();
    let se = (a.stderr_s.powi(2) + b.stderr_s.powi(2)).sqrt();
    assert!((a.mean_latency_s - b.mean_latency_s).abs() <= 3.0 * se);
    assert!(!a.unreliable && !b.unreliable);
}

#[test]
fn sweep_is_deterministic_and_matches_points() {
    let mut config = fig4_config();
    config.n_realizations = 20;
    config.axis = SweepAxis::SnrIf {
        workload_bits: 1e6,
        snr_db: vec![4.0, 12.0],
    };
    let csv = |c: &ExperimentConfig| {
        let mut buf = Vec::new();
        run_sweep(c).unwrap().write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let first = csv(&config);
    assert_eq!(first, csv(&config));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("4,three-layer,slm,"));
    assert!(lines[2].starts_with("4,fog-only,fixed,"));
    assert!(lines[3].starts_with("4,cloud-only,fixed,"));

    let sweep = run_sweep(&config).unwrap();
    assert_eq!(sweep.points[1], average_latency(&config, 1).unwrap());
}

#[test]
fn both_solvers_report_gap() {
    let mut config = single_point(5.0, 1e6, 8, 3);
    config.solver = SolverChoice::Both;
    let point = average_latency(&config, 0).unwrap();
    assert_eq!(point.entries.len(), 2);
    let gap = point.gap.unwrap();
    assert_eq!(gap.n, 8);
    assert!(gap.max_abs_rel_gap <= 0.01);
}

#[test]
fn three_layer_dominates_baselines() {
    let scenario = Scenario::default();
    for r in 0..200 {
        let gain = sample_gain(&mut realization_rng(5, 0, r));
        for snr in [0.0, 8.0, 16.0] {
            let inst = scenario.instance(1e6, snr, gain).unwrap();
            let (sol, _) = slm_run(&inst, &SlmOptions::default()).unwrap();
            let fog = fog_only(&inst).unwrap().finite().unwrap();
            let cloud = cloud_only(&inst).unwrap().finite().unwrap();
            assert!(sol.latency <= fog.min(cloud) * (1.0 + 1e-3), "g = {gain}, snr = {snr}");
        }
    }
}

#[test]
fn optimizing_baseline_power_cannot_beat_full_transmit() {
    let inst = Scenario::default().instance(1e6, 10.0, 0.7).unwrap();
    for (arch, fixed) in [
        (Architecture::FogOnly, fog_only(&inst).unwrap()),
        (Architecture::CloudOnly, cloud_only(&inst).unwrap()),
    ] {
        let grid = baseline_grid_optimized(&inst, arch, 0.01).unwrap();
        assert!(grid >= fixed, "{arch}");
        let (g, f) = (grid.finite().unwrap(), fixed.finite().unwrap());
        assert!(g <= f * 1.05, "{arch}: {g} vs {f}");
    }
    assert!(baseline_grid_optimized(&inst, Architecture::ThreeLayer, 0.01).is_err());
}

#[test]
fn rounding_integral_solution_costs_nothing() {
    let inst = Scenario::default().instance(1e6, 5.0, 1.0).unwrap();
    let (mut sol, _) = slm_run(&inst, &SlmOptions::default()).unwrap();
    sol.allocation.m = sol.allocation.m.round();
    sol.allocation.k = sol.allocation.k.round();
    let loss = rounding_loss(&inst, &sol).unwrap();
    assert_eq!(loss.loss, 0.0);
    assert_eq!(loss.rounded, sol.allocation);
}

#[test]
fn rounding_loss_is_negligible_at_megabit_scale() {
    let inst = Scenario::default().instance(1e6, 5.0, 1.0).unwrap();
    let (sol, _) = slm_run(&inst, &SlmOptions::default()).unwrap();
    let loss = rounding_loss(&inst, &sol).unwrap();
    assert!(loss.loss < 1e-4);
    assert!(loss.raw_loss >= -1e-9 || loss.clipped);
    let oracle = grid_oracle(&inst, &OracleOptions::default()).unwrap();
    assert!(rounding_loss(&inst, &oracle).unwrap().loss < 1e-4);
}

#[test]
fn rounding_tiny_workload_runs() {
    let inst = Scenario::default().instance(10.0, 5.0, 1.0).unwrap();
    let (sol, _) = slm_run(&inst, &SlmOptions::default()).unwrap();
    let loss = rounding_loss(&inst, &sol).unwrap();
    assert!(loss.loss >= 0.0);
    assert_eq!(loss.rounded.m.fract(), 0.0);
    assert_eq!(loss.rounded.k.fract(), 0.0);
}

#[test]
fn standard_error() {
    let (mean, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(mean, 2.5);
    assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    assert_eq!(mean_and_stderr(&[]), (0.0, 0.0));
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{allocation, lattice_gap, monotonicity_violations, random_instance};
use fogsplit::experiments::*;
use fogsplit::oracle::{brute_minmax, default_inner_tol, grid_oracle, inner_minmax, OracleOptions};
use fogsplit::slm::{slm_run, SlmOptions, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const MB: f64 = 1e6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn in_range(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Workload sweeps at the three IoT SNRs, means in (Mb, ms).
fn fig3_curves() -> Vec<(f64, Vec<(f64, f64)>)> {
    FIG3_SNRS_DB
        .iter()
        .map(|&snr| {
            let mut config = fig3_config(snr);
            config.seed = SEED;
            let sweep = run_sweep(&config).expect("workload sweep");
            let curve = sweep
                .curve(Architecture::ThreeLayer, Method::Slm)
                .into_iter()
                .map(|(b, t)| (b / MB, t * 1e3))
                .collect();
            (snr, curve)
        })
        .collect()
}

fn solver_oracle_coincidence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let gaps: Vec<f64> = (0..50)
        .map(|_| {
            let inst = random_instance(&mut rng);
            let (slm, _) = slm_run(&inst, &SlmOptions::default()).expect("slm");
            let oracle = grid_oracle(&inst, &OracleOptions::default()).expect("oracle");
            (slm.latency - oracle.latency).abs() / oracle.latency
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let within = gaps.iter().filter(|&&g| g <= 0.01).count();
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    outcome(
        within >= 48 && worst <= 0.05 && secs < 60.0,
        format!("{within}/50 within 1%, max gap {:.4}%, {secs:.1} s", worst * 100.0),
    )
}

fn per_megabit_slope(curves: &[(f64, Vec<(f64, f64)>)]) -> Outcome {
    let (_, curve) = curves.iter().find(|(snr, _)| *snr == 5.0).expect("5 dB curve");
    let fit = least_squares(curve);
    outcome(
        in_range(fit.slope, 2.9, 0.15 * 2.9),
        format!(
            "slope {:.3} ms/Mb (target 2.9 +/- 15%), R^2 {:.5}",
            fit.slope, fit.r_squared
        ),
    )
}

fn workload_thresholds(curves: &[(f64, Vec<(f64, f64)>)]) -> Outcome {
    let targets = [0.45, 0.75, 1.35];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((snr, curve), target) in curves.iter().zip(targets) {
        let x = crossing(curve, 2.0);
        let ok = x.is_some_and(|x| in_range(x, target, 0.15));
        pass &= ok;
        parts.push(match x {
            Some(x) => format!("{snr} dB: {x:.3} Mb (target {target})"),
            None => format!("{snr} dB: no crossing (target {target})"),
        });
    }
    outcome(pass, parts.join("; "))
}

fn snr_thresholds(sweep: &SweepResult) -> Outcome {
    let ms = |arch, method| -> Vec<(f64, f64)> {
        sweep
            .curve(arch, method)
            .into_iter()
            .map(|(s, t)| (s, t * 1e3))
            .collect()
    };
    let three = crossing(&ms(Architecture::ThreeLayer, Method::Slm), 1.0);
    let cloud = crossing(&ms(Architecture::CloudOnly, Method::FixedPower), 1.0);
    let fog = ms(Architecture::FogOnly, Method::FixedPower);
    let fog_min = fog.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

    let three_ok = three.is_some_and(|x| in_range(x, 8.0, 1.5));
    let cloud_ok = cloud.is_some_and(|x| in_range(x, 11.0, 1.5));
    let fog_ok = fog.iter().all(|p| p.1 > 1.0);
    let show = |x: Option<f64>| x.map_or("none".to_string(), |x| format!("{x:.2} dB"));
    outcome(
        three_ok && cloud_ok && fog_ok,
        format!(
            "three-layer 1 ms at {} (target 8 +/- 1.5) [{}]; cloud-only at {} (target 11 +/- 1.5) [{}]; \
             fog-only min {fog_min:.3} ms over 0-20 dB [{}]",
            show(three),
            if three_ok { "ok" } else { "off" },
            show(cloud),
            if cloud_ok { "ok" } else { "off" },
            if fog_ok { "ok" } else { "off" },
        ),
    )
}

fn gaps_at_16_db(sweep: &SweepResult) -> Outcome {
    let point = sweep
        .points
        .iter()
        .find(|p| p.sweep_value == 16.0)
        .expect("16 dB point");
    let mean = |arch, method| point.entry(arch, method).expect("series").mean_latency_s;
    let three = mean(Architecture::ThreeLayer, Method::Slm);
    let fog = mean(Architecture::FogOnly, Method::FixedPower) / three - 1.0;
    let cloud = mean(Architecture::CloudOnly, Method::FixedPower) / three - 1.0;
    outcome(
        in_range(fog, 0.79, 0.15) && in_range(cloud, 0.21, 0.10),
        format!(
            "fog-only +{:.1}% (target 79 +/- 15), cloud-only +{:.1}% (target 21 +/- 10)",
            fog * 100.0,
            cloud * 100.0
        ),
    )
}

fn convergence_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let (mut lemma2, mut t_up, mut s_down, mut stalled, mut unfinished) = (0, 0, 0, 0, 0);
    let mut worst_s_drop = 0.0f64;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng);
        let (_, trace) = slm_run(&inst, &SlmOptions::default()).expect("slm");
        let r = &trace.records;
        lemma2 += r.iter().filter(|x| x.t < x.s - 1e-12).count();
        t_up += r.windows(2).filter(|w| w[1].t > w[0].t).count();
        for w in r.windows(2) {
            // Only rounding noise is tolerated.
            if w[1].s < w[0].s * (1.0 - 1e-12) {
                s_down += 1;
                worst_s_drop = worst_s_drop.max((w[0].s - w[1].s) / w[0].s);
            }
        }
        let last = trace.last();
        match trace.termination {
            Termination::Converged if (last.t - last.s).abs() <= 1e-6 * trace.first_t() => {}
            Termination::GridStalled => stalled += 1,
            _ => unfinished += 1,
        }
    }
    outcome(
        lemma2 == 0 && t_up == 0 && s_down == 0 && unfinished == 0 && stalled <= 10,
        format!(
            "t < s: {lemma2}; t increases: {t_up}; s decreases: {s_down} (worst {worst_s_drop:.2e} relative); \
             grid-stalled: {stalled}/1000; not converged: {unfinished}"
        ),
    )
}

fn inner_solver_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let alpha = rng.random_range(0.01..0.99) * inst.alpha_max();
        let gamma = rng.random_range(0.01..0.99) * inst.gamma_max();
        let upper = inst.unit_costs(alpha, gamma).unwrap().iot_proc * inst.workload_bits;
        let tol = default_inner_tol(upper);
        let inner = inner_minmax(&inst, alpha, gamma, tol).unwrap().latency.finite().unwrap();
        let brute = brute_minmax(&inst, alpha, gamma, 400).unwrap().latency.finite().unwrap();
        let allowed = tol + lattice_gap(&inst, alpha, gamma, 400);
        if brute < inner - tol || brute - inner > allowed {
            failures += 1;
        }
        worst = worst.max((brute - inner) / allowed);
    }
    outcome(
        failures == 0,
        format!("{failures}/100 outside tolerance, worst gap {worst:.3} of allowance"),
    )
}

fn power_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut violations = Vec::new();
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let alloc = allocation(&inst, rng.random(), rng.random(), rng.random(), rng.random());
        violations.extend(monotonicity_violations(&inst, &alloc, 1e-6));
    }
    let first = violations.first().cloned().unwrap_or_default();
    outcome(
        violations.is_empty(),
        format!("{} violations over 100 points x 5 powers {first}", violations.len()),
    )
}

fn rounding_negligibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for i in 0..100 {
        let inst = random_instance(&mut rng);
        let (slm, _) = slm_run(&inst, &SlmOptions::default()).expect("slm");
        let mut solutions = vec![slm];
        if i % 5 == 0 {
            solutions.push(grid_oracle(&inst, &OracleOptions::default()).expect("oracle"));
        }
        for sol in solutions {
            worst = worst.max(rounding_loss(&inst, &sol).expect("rounding").loss);
            checked += 1;
        }
    }
    outcome(
        worst < 1e-4,
        format!("worst loss {worst:.2e} over {checked} solutions (limit 1e-4)"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    };

    report(1, "solver-oracle coincidence", solver_oracle_coincidence());
    let curves = fig3_curves();
    report(2, "per-megabit slope at 5 dB", per_megabit_slope(&curves));
    report(3, "2 ms workload thresholds", workload_thresholds(&curves));
    let mut fig4 = fig4_config();
    fig4.seed = SEED;
    let fig4 = run_sweep(&fig4).expect("snr sweep");
    report(4, "1 ms SNR thresholds", snr_thresholds(&fig4));
    report(5, "baseline overheads at 16 dB", gaps_at_16_db(&fig4));
    report(6, "convergence properties", convergence_properties());
    report(7, "inner solver vs brute force", inner_solver_equivalence());
    report(8, "power monotonicity", power_monotonicity());
    report(9, "rounding negligibility", rounding_negligibility());

    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        9 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

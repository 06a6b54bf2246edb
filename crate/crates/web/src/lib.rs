//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string; the page draws
//! the results on canvases. The `*_report` functions hold the logic so it can
//! be tested natively.

use fogsplit::experiments::{cloud_only, fog_only, Scenario};
use fogsplit::oracle::{grid_dump, OracleOptions};
use fogsplit::{evaluate, grid_oracle, slm_run, LatencyBreakdown, SlmOptions, Solution, SystemInstance};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MB: f64 = 1e6;

fn instance(workload_mb: f64, snr_if_db: f64, gain_if: f64) -> Result<SystemInstance, String> {
    Scenario::default()
        .instance(workload_mb * MB, snr_if_db, gain_if)
        .map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct SolvedSplit {
    pub latency_ms: f64,
    pub m_bits: f64,
    pub k_bits: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub breakdown: Option<LatencyBreakdown>,
}

impl SolvedSplit {
    fn new(inst: &SystemInstance, sol: &Solution) -> Result<Self, String> {
        let a = sol.allocation;
        let ev = evaluate(inst, &a).map_err(|e| e.to_string())?;
        Ok(SolvedSplit {
            latency_ms: sol.latency * 1e3,
            m_bits: a.m,
            k_bits: a.k,
            alpha: a.alpha,
            gamma: a.gamma,
            breakdown: ev.breakdown().copied(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub workload_bits: f64,
    pub slm: SolvedSplit,
    pub iterations: usize,
    pub oracle: SolvedSplit,
    pub gap_percent: f64,
    pub fog_only_ms: Option<f64>,
    pub cloud_only_ms: Option<f64>,
}

pub fn solve_report(workload_mb: f64, snr_if_db: f64, gain_if: f64) -> Result<SolveReport, String> {
    let inst = instance(workload_mb, snr_if_db, gain_if)?;
    let (slm, trace) = slm_run(&inst, &SlmOptions::default()).map_err(|e| e.to_string())?;
    let oracle = grid_oracle(&inst, &OracleOptions::default()).map_err(|e| e.to_string())?;
    let ms = |l: Result<fogsplit::Latency, _>| l.ok().and_then(|l: fogsplit::Latency| l.finite()).map(|t| t * 1e3);
    Ok(SolveReport {
        workload_bits: inst.workload_bits,
        gap_percent: if oracle.latency > 0.0 {
            (slm.latency - oracle.latency) / oracle.latency * 100.0
        } else {
            0.0
        },
        slm: SolvedSplit::new(&inst, &slm)?,
        iterations: trace.records.len(),
        oracle: SolvedSplit::new(&inst, &oracle)?,
        fog_only_ms: ms(fog_only(&inst)),
        cloud_only_ms: ms(cloud_only(&inst)),
    })
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub snr_db: Vec<f64>,
    /// `None` where the latency is unbounded.
    pub three_layer_ms: Vec<Option<f64>>,
    pub fog_only_ms: Vec<Option<f64>>,
    pub cloud_only_ms: Vec<Option<f64>>,
}

/// Latency of the three architectures over `points` IoT SNRs evenly spaced
/// in `[snr_from, snr_to]`, at a fixed channel gain.
pub fn curve_report(
    workload_mb: f64,
    gain_if: f64,
    snr_from: f64,
    snr_to: f64,
    points: usize,
) -> Result<Curve, String> {
    if !(2..=200).contains(&points) || !(snr_to > snr_from) {
        return Err("need 2..=200 points over a non-empty SNR range".into());
    }
    let mut curve = Curve {
        snr_db: Vec::with_capacity(points),
        three_layer_ms: Vec::with_capacity(points),
        fog_only_ms: Vec::with_capacity(points),
        cloud_only_ms: Vec::with_capacity(points),
    };
    for i in 0..points {
        let snr = snr_from + (snr_to - snr_from) * i as f64 / (points - 1) as f64;
        let inst = instance(workload_mb, snr, gain_if)?;
        let (sol, _) = slm_run(&inst, &SlmOptions::default()).map_err(|e| e.to_string())?;
        let ms = |l: fogsplit::Latency| l.finite().map(|t| t * 1e3);
        curve.snr_db.push(snr);
        curve.three_layer_ms.push(Some(sol.latency * 1e3));
        curve.fog_only_ms.push(fog_only(&inst).map_err(|e| e.to_string()).map(ms)?);
        curve.cloud_only_ms.push(cloud_only(&inst).map_err(|e| e.to_string()).map(ms)?);
    }
    Ok(curve)
}

#[derive(Debug, Serialize)]
pub struct Heatmap {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Row-major by alpha; `None` where the latency is unbounded.
    pub latency_ms: Vec<Vec<Option<f64>>>,
    pub best: (f64, f64, f64),
}

/// Oracle latency over the `(alpha, gamma)` grid.
pub fn heatmap_report(workload_mb: f64, snr_if_db: f64, gain_if: f64, grid_step: f64) -> Result<Heatmap, String> {
    if !(grid_step >= 0.01) {
        return Err("grid step must be at least 0.01".into());
    }
    let inst = instance(workload_mb, snr_if_db, gain_if)?;
    let options = OracleOptions {
        grid_step,
        ..OracleOptions::default()
    };
    let cells = grid_dump(&inst, &options).map_err(|e| e.to_string())?;
    let mut alphas: Vec<f64> = Vec::new();
    let mut gammas: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for c in &cells {
        if alphas.last() != Some(&c.alpha) {
            alphas.push(c.alpha);
            rows.push(Vec::new());
        }
        if alphas.len() == 1 {
            gammas.push(c.gamma);
        }
        rows.last_mut()
            .expect("row pushed above")
            .push(c.latency.finite().map(|t| t * 1e3));
    }
    let best = grid_oracle(&inst, &options).map_err(|e| e.to_string())?;
    Ok(Heatmap {
        alphas,
        gammas,
        latency_ms: rows,
        best: (best.allocation.alpha, best.allocation.gamma, best.latency * 1e3),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Optimal split of one instance by SLM and the grid oracle.
#[wasm_bindgen]
pub fn solve(workload_mb: f64, snr_if_db: f64, gain_if: f64) -> Result<String, JsError> {
    to_json(solve_report(workload_mb, snr_if_db, gain_if))
}

/// Latency vs IoT SNR for the three architectures.
#[wasm_bindgen]
pub fn latency_curve(
    workload_mb: f64,
    gain_if: f64,
    snr_from: f64,
    snr_to: f64,
    points: usize,
) -> Result<String, JsError> {
    to_json(curve_report(workload_mb, gain_if, snr_from, snr_to, points))
}

/// Oracle latency over the power-split grid.
#[wasm_bindgen]
pub fn power_heatmap(workload_mb: f64, snr_if_db: f64, gain_if: f64, grid_step: f64) -> Result<String, JsError> {
    to_json(heatmap_report(workload_mb, snr_if_db, gain_if, grid_step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_agrees_between_solvers() {
        let r = solve_report(1.0, 5.0, 1.0).unwrap();
        assert!(r.gap_percent.abs() < 1.0);
        assert!(r.slm.latency_ms <= r.fog_only_ms.unwrap());
        let bd = r.slm.breakdown.unwrap();
        assert_eq!(bd.total, bd.t_iot.max(bd.t_fog).max(bd.t_cloud));
    }

    #[test]
    fn curve_decreases_with_snr() {
        let c = curve_report(1.0, 1.0, 0.0, 20.0, 5).unwrap();
        assert_eq!(c.snr_db, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        let t: Vec<f64> = c.three_layer_ms.iter().map(|t| t.unwrap()).collect();
        assert!(t.windows(2).all(|w| w[1] <= w[0]));
        assert!(curve_report(1.0, 1.0, 5.0, 5.0, 5).is_err());
    }

    #[test]
    fn heatmap_is_rectangular_and_contains_best() {
        let h = heatmap_report(1.0, 5.0, 1.0, 0.1).unwrap();
        assert_eq!(h.latency_ms.len(), h.alphas.len());
        assert!(h.latency_ms.iter().all(|row| row.len() == h.gammas.len()));
        let min = h.latency_ms.iter().flatten().flatten().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, h.best.2);
        assert!(heatmap_report(1.0, 5.0, 1.0, 0.001).is_err());
    }

    #[test]
    fn bad_parameters_are_reported() {
        assert!(solve_report(1.0, -30.0, 1.0).is_err());
        assert!(solve_report(-1.0, 5.0, 1.0).is_err());
    }
}

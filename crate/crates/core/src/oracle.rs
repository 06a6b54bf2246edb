//! Ground truth for the relaxed problem.
//!
//! At a fixed power split every layer latency is affine in `(m, k)`, so the
//! inner problem `min max(T_I, T_F, T_C)` is solved exactly by bisection on
//! the epigraph level `t`: each latency constraint bounds `m` (and `k`) by an
//! affine function, and feasibility reduces to checking that an interval of
//! `m` is non-empty. An exhaustive grid over `(alpha, gamma)` wraps this.
//! [`brute_minmax`] evaluates the model on an `(m, k)` grid instead and is the
//! independent cross-check for the bisection.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    evaluate, Allocation, Latency, ModelError, Solution, SystemInstance, UnitCosts, POWER_MARGIN,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid oracle option `{name}` = {value}")]
    InvalidOption { name: &'static str, value: f64 },
    #[error("no allocation yields a finite latency")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub m: f64,
    pub k: f64,
}

/// Result of asking whether every layer can finish by `t_candidate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpigraphProbe {
    pub t_candidate: f64,
    /// An allocation meeting the level, present iff feasible.
    pub witness: Option<Witness>,
}

impl EpigraphProbe {
    pub fn feasible(&self) -> bool {
        self.witness.is_some()
    }
}

/// Optimum of the inner `(m, k)` problem at a fixed power split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerOptimum {
    pub latency: Latency,
    pub m: f64,
    pub k: f64,
}

fn feasibility_with(costs: &UnitCosts, total: f64, t: f64) -> Option<Witness> {
    if !(t >= 0.0) {
        return None;
    }
    // T_I <= t  <=>  m >= B - t / p_I.
    let m_lo = (total - t / costs.iot_proc).max(0.0);

    // For a given m, T_F <= t gives k >= m - (t - m r) / p_F and T_C <= t
    // gives k <= (t - m r) / c_C. Both k-bounds admit a k in [0, m] iff
    // m <= t w / (1 + r w) with w = 1 / p_F + 1 / c_C.
    let m_hi = match costs.if_comm {
        Latency::Unbounded => 0.0,
        Latency::Finite(r) => {
            let w = 1.0 / costs.fog_proc
                + match costs.cloud_path() {
                    Latency::Finite(cc) => 1.0 / cc,
                    Latency::Unbounded => 0.0,
                };
            (t * w / (1.0 + r * w)).min(total)
        }
    };
    if m_lo > m_hi {
        return None;
    }

    let m = m_lo;
    let slack = t - costs.if_comm.times(m).finite().unwrap_or(0.0);
    let k_hi = match costs.cloud_path() {
        Latency::Finite(cc) => (slack / cc).min(m),
        Latency::Unbounded => 0.0,
    };
    let k_lo = (m - slack / costs.fog_proc).max(0.0);
    Some(Witness {
        m,
        k: k_lo.min(k_hi.max(0.0)),
    })
}

/// Checks whether some `0 <= k <= m <= B` keeps all three layer latencies at
/// or below `t_candidate`. Closed form, no search.
pub fn feasibility(
    inst: &SystemInstance,
    alpha: f64,
    gamma: f64,
    t_candidate: f64,
) -> Result<EpigraphProbe, OracleError> {
    let costs = inst.unit_costs(alpha, gamma)?;
    Ok(EpigraphProbe {
        t_candidate,
        witness: feasibility_with(&costs, inst.workload_bits, t_candidate),
    })
}

/// Default bisection tolerance: 1e-9 s or 1e-9 of the bracket, whichever is
/// larger.
pub fn default_inner_tol(upper: f64) -> f64 {
    1e-9f64.max(1e-9 * upper)
}

/// Everything at the IoT layer. Always finite: [`SystemInstance::unit_costs`]
/// only succeeds with processing headroom left.
fn upper_bracket(costs: &UnitCosts, total: f64) -> f64 {
    costs.iot_proc * total
}

fn inner_with(costs: &UnitCosts, total: f64, tol: Option<f64>) -> Result<InnerOptimum, OracleError> {
    if total == 0.0 {
        return Ok(InnerOptimum {
            latency: Latency::ZERO,
            m: 0.0,
            k: 0.0,
        });
    }
    let mut hi = upper_bracket(costs, total);
    let tol = tol.unwrap_or_else(|| default_inner_tol(hi));
    let mut witness = Witness { m: 0.0, k: 0.0 };
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match feasibility_with(costs, total, mid) {
            Some(w) => {
                hi = mid;
                witness = w;
            }
            None => lo = mid,
        }
    }
    Ok(InnerOptimum {
        latency: Latency::Finite(hi),
        m: witness.m,
        k: witness.k,
    })
}

/// Exact inner optimum at `(alpha, gamma)` to within `tol` seconds.
pub fn inner_minmax(
    inst: &SystemInstance,
    alpha: f64,
    gamma: f64,
    tol: f64,
) -> Result<InnerOptimum, OracleError> {
    if !(tol > 0.0) {
        return Err(OracleError::InvalidOption {
            name: "tol",
            value: tol,
        });
    }
    inner_with(&inst.unit_costs(alpha, gamma)?, inst.workload_bits, Some(tol))
}

/// Grid argmin over the brute-force search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteOptimum {
    pub latency: Latency,
    pub m: f64,
    pub k: f64,
    /// Number of `(m, k)` points evaluated.
    pub evaluated: usize,
}

/// Evaluates the model on `{0, B/n, ..., B}^2` restricted to `k <= m`.
/// Ties go to the lexicographically smallest `(m, k)`.
pub fn brute_minmax(
    inst: &SystemInstance,
    alpha: f64,
    gamma: f64,
    n_steps: usize,
) -> Result<BruteOptimum, OracleError> {
    if n_steps < 2 {
        return Err(OracleError::InvalidOption {
            name: "n_steps",
            value: n_steps as f64,
        });
    }
    let total = inst.workload_bits;
    let point = |i: usize| total * i as f64 / n_steps as f64;
    let mut best = BruteOptimum {
        latency: Latency::Unbounded,
        m: 0.0,
        k: 0.0,
        evaluated: 0,
    };
    let mut first = true;
    for i in 0..=n_steps {
        for j in 0..=i {
            let (m, k) = (point(i), point(j));
            let t = evaluate(inst, &Allocation { m, k, alpha, gamma })?.latency();
            best.evaluated += 1;
            if first || t < best.latency {
                first = false;
                best.latency = t;
                best.m = m;
                best.k = k;
            }
        }
    }
    Ok(best)
}

/// Exhaustive search over every integer `(m, k)` at a fixed power split.
/// Only meant for tiny integral workloads.
pub fn integer_minmax(inst: &SystemInstance, alpha: f64, gamma: f64) -> Result<BruteOptimum, OracleError> {
    let total = inst.workload_bits;
    if total.fract() != 0.0 || total > 1e5 {
        return Err(OracleError::InvalidOption {
            name: "workload_bits",
            value: total,
        });
    }
    let n = total as usize;
    let mut best = BruteOptimum {
        latency: Latency::Unbounded,
        m: 0.0,
        k: 0.0,
        evaluated: 0,
    };
    let mut first = true;
    for m in 0..=n {
        for k in 0..=m {
            let alloc = Allocation {
                m: m as f64,
                k: k as f64,
                alpha,
                gamma,
            };
            let t = evaluate(inst, &alloc)?.latency();
            best.evaluated += 1;
            if first || t < best.latency {
                first = false;
                best = BruteOptimum {
                    latency: t,
                    m: alloc.m,
                    k: alloc.k,
                    evaluated: best.evaluated,
                };
            }
        }
    }
    Ok(best)
}

/// How the inner `(m, k)` problem is solved at each grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerMode {
    /// Bisection, exact to the tolerance.
    Exact,
    /// `(m/B, k/B)` on the same grid as the power fractions.
    FractionGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Absolute spacing of the `alpha` and `gamma` grids.
    pub grid_step: f64,
    /// Bisection tolerance in seconds; `None` uses [`default_inner_tol`].
    pub inner_tol: Option<f64>,
    pub mode: InnerMode,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            grid_step: 1e-2,
            inner_tol: None,
            mode: InnerMode::Exact,
        }
    }
}

impl OracleOptions {
    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return Err(OracleError::InvalidOption {
                name: "grid_step",
                value: self.grid_step,
            });
        }
        if let Some(tol) = self.inner_tol {
            if !(tol > 0.0) {
                return Err(OracleError::InvalidOption {
                    name: "inner_tol",
                    value: tol,
                });
            }
        }
        Ok(())
    }
}

/// Multiples of `step` strictly below `sup` that still leave processing
/// headroom on a layer with budget `p_total` and idle draw `idle`.
fn fraction_points(sup: f64, step: f64, p_total: f64, idle: f64) -> Vec<f64> {
    (0..)
        .map(|j| j as f64 * step)
        .take_while(|&x| x < sup)
        .filter(|&x| (1.0 - x) * p_total - idle >= POWER_MARGIN)
        .collect()
}

/// One `(alpha, gamma)` cell of the oracle grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub alpha: f64,
    pub gamma: f64,
    pub latency: Latency,
    pub m: f64,
    pub k: f64,
}

fn cell_optimum(
    inst: &SystemInstance,
    alpha: f64,
    gamma: f64,
    options: &OracleOptions,
) -> Result<InnerOptimum, OracleError> {
    match options.mode {
        InnerMode::Exact => match inner_with(&inst.unit_costs(alpha, gamma)?, inst.workload_bits, options.inner_tol) {
            Err(OracleError::Unbounded) => Ok(InnerOptimum {
                latency: Latency::Unbounded,
                m: 0.0,
                k: 0.0,
            }),
            other => other,
        },
        InnerMode::FractionGrid => {
            let n = (1.0 / options.grid_step).round().max(2.0) as usize;
            let b = brute_minmax(inst, alpha, gamma, n)?;
            Ok(InnerOptimum {
                latency: b.latency,
                m: b.m,
                k: b.k,
            })
        }
    }
}

/// Every cell of the `(alpha, gamma)` grid, `alpha`-major.
pub fn grid_dump(inst: &SystemInstance, options: &OracleOptions) -> Result<Vec<GridCell>, OracleError> {
    options.validate()?;
    inst.validate()?;
    let alphas = fraction_points(inst.alpha_max(), options.grid_step, inst.iot.p_total, inst.iot.b);
    let gammas = fraction_points(inst.gamma_max(), options.grid_step, inst.fog.p_total, inst.fog.b);
    let mut cells = Vec::with_capacity(alphas.len() * gammas.len());
    for &alpha in &alphas {
        for &gamma in &gammas {
            let opt = cell_optimum(inst, alpha, gamma, options)?;
            cells.push(GridCell {
                alpha,
                gamma,
                latency: opt.latency,
                m: opt.m,
                k: opt.k,
            });
        }
    }
    Ok(cells)
}

/// Cell with the smallest latency; ties go to the smallest `(alpha, gamma)`.
pub fn best_cell(cells: &[GridCell]) -> Option<&GridCell> {
    cells.iter().fold(None, |best: Option<&GridCell>, c| match best {
        Some(b) if c.latency >= b.latency => Some(b),
        _ => Some(c),
    })
}

/// Exhaustive search over the `(alpha, gamma)` grid with the inner problem
/// solved per [`OracleOptions::mode`].
pub fn grid_oracle(inst: &SystemInstance, options: &OracleOptions) -> Result<Solution, OracleError> {
    let cells = grid_dump(inst, options)?;
    let best = best_cell(&cells).ok_or(OracleError::Unbounded)?;
    let Latency::Finite(latency) = best.latency else {
        return Err(OracleError::Unbounded);
    };
    Ok(Solution {
        latency,
        allocation: Allocation {
            m: best.m,
            k: best.k,
            alpha: best.alpha,
            gamma: best.gamma,
        },
    })
}

pub fn write_grid_csv<W: Write>(cells: &[GridCell], mut out: W) -> io::Result<()> {
    writeln!(out, "alpha,gamma,t,m,k")?;
    for c in cells {
        let t = match c.latency {
            Latency::Finite(t) => format!("{t:e}"),
            Latency::Unbounded => "inf".to_string(),
        };
        writeln!(out, "{},{},{},{:e},{:e}", c.alpha, c.gamma, t, c.m, c.k)?;
    }
    Ok(())
}

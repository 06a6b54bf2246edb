//! Sequential latency minimization.
//!
//! Alternates between two one-dimensional subproblems until their optimal
//! values meet:
//!
//! * stage 1 moves more bits (and more IoT power) from local processing to
//!   the IoT -> fog link, balancing `T_I` against `T_F`;
//! * stage 2 moves bits already at the fog on to the cloud (and more fog
//!   power to the fog -> cloud link), balancing `T_F` against `T_C`.
//!
//! At a fixed power fraction each stage is a min-max of two lines in the
//! number of moved bits, solved at their intersection; the fraction itself is
//! found by a scalar grid search. Bits and fractions only ever accumulate, so
//! every increment is non-negative.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Allocation, Latency, ModelError, Solution, SystemInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlmError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("power fraction increment {increment} exceeds the remaining range {remaining}")]
    FractionOutOfRange { increment: f64, remaining: f64 },
    #[error("invalid solver option `{name}` = {value}")]
    InvalidOption { name: &'static str, value: f64 },
    #[error("no allocation yields a finite latency")]
    Unbounded,
}

/// Accumulated decisions after some number of stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlmState {
    pub instance: SystemInstance,
    pub cum_m: f64,
    pub cum_k: f64,
    pub cum_alpha: f64,
    pub cum_gamma: f64,
    pub iteration: usize,
}

impl SlmState {
    pub fn new(instance: SystemInstance) -> Self {
        SlmState {
            instance,
            cum_m: 0.0,
            cum_k: 0.0,
            cum_alpha: 0.0,
            cum_gamma: 0.0,
            iteration: 1,
        }
    }

    /// Bits still processed at the IoT layer.
    pub fn iot_bits(&self) -> f64 {
        (self.instance.workload_bits - self.cum_m).max(0.0)
    }

    /// Bits at the fog that have not been forwarded.
    pub fn fog_bits(&self) -> f64 {
        (self.cum_m - self.cum_k).max(0.0)
    }

    pub fn apply_stage1(&mut self, step: &StageStep) {
        self.cum_m = (self.cum_m + step.bits).min(self.instance.workload_bits);
        self.cum_alpha += step.fraction;
    }

    pub fn apply_stage2(&mut self, step: &StageStep) {
        self.cum_k = (self.cum_k + step.bits).min(self.cum_m);
        self.cum_gamma += step.fraction;
    }

    pub fn allocation(&self) -> Allocation {
        Allocation {
            m: self.cum_m,
            k: self.cum_k,
            alpha: self.cum_alpha,
            gamma: self.cum_gamma,
        }
    }
}

/// The two lines of a stage subproblem, `offset + a - b x` (the layer giving
/// bits away) and `offset + d + c x` (the layer receiving them), where `x`
/// is the number of bits moved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageCoeffs {
    pub a_coef: f64,
    pub b_coef: f64,
    pub c_coef: Latency,
    pub d_coef: Latency,
    pub offset: Latency,
}

/// Optimal value, moved bits and power-fraction increment of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageStep {
    pub value: Latency,
    pub bits: f64,
    pub fraction: f64,
}

fn check_increment(increment: f64, remaining: f64) -> Result<(), SlmError> {
    // A zero increment keeps the current state and is always admissible.
    if increment == 0.0 || (increment > 0.0 && increment < remaining) {
        Ok(())
    } else {
        Err(SlmError::FractionOutOfRange {
            increment,
            remaining,
        })
    }
}

/// Slope of the giving line. With nothing left to give the line is the
/// constant zero.
fn giving_slope(a_coef: f64, remaining: f64) -> f64 {
    if remaining > 0.0 {
        a_coef / remaining
    } else {
        0.0
    }
}

/// Stage-1 lines at IoT transmit-fraction increment `alpha_inc`.
pub fn stage1_coeffs(state: &SlmState, alpha_inc: f64) -> Result<StageCoeffs, SlmError> {
    let inst = &state.instance;
    check_increment(alpha_inc, inst.alpha_max() - state.cum_alpha)?;
    let alpha = state.cum_alpha + alpha_inc;
    let gamma = state.cum_gamma;

    let iot_proc = inst.iot.seconds_per_bit((1.0 - alpha) * inst.iot.p_total)?;
    let if_comm = inst.link_if.seconds_per_bit(alpha * inst.iot.p_total);
    let fog_proc = inst.fog.seconds_per_bit((1.0 - gamma) * inst.fog.p_total)?;

    let remaining = state.iot_bits();
    let a_coef = iot_proc * remaining;
    Ok(StageCoeffs {
        a_coef,
        b_coef: giving_slope(a_coef, remaining),
        c_coef: if_comm + Latency::Finite(fog_proc),
        d_coef: if_comm.times(state.cum_m) + Latency::Finite(fog_proc * state.fog_bits()),
        offset: Latency::ZERO,
    })
}

/// Stage-2 lines at fog transmit-fraction increment `gamma_inc`. Expects the
/// current iteration's stage 1 to be folded into `state` already.
pub fn stage2_coeffs(state: &SlmState, gamma_inc: f64) -> Result<StageCoeffs, SlmError> {
    let inst = &state.instance;
    check_increment(gamma_inc, inst.gamma_max() - state.cum_gamma)?;
    let gamma = state.cum_gamma + gamma_inc;

    let fog_proc = inst.fog.seconds_per_bit((1.0 - gamma) * inst.fog.p_total)?;
    let cloud_path = inst.link_fc.seconds_per_bit(gamma * inst.fog.p_total)
        + Latency::Finite(inst.cloud.seconds_per_bit(inst.cloud.p_total)?);
    let if_comm = inst
        .link_if
        .seconds_per_bit(state.cum_alpha * inst.iot.p_total);

    let remaining = state.fog_bits();
    let a_coef = fog_proc * remaining;
    Ok(StageCoeffs {
        a_coef,
        b_coef: giving_slope(a_coef, remaining),
        c_coef: cloud_path,
        d_coef: cloud_path.times(state.cum_k),
        offset: if_comm.times(state.cum_m),
    })
}

/// Minimizes `offset + max(a - b x, d + c x)` over `0 <= x <= upper`.
///
/// Returns the optimal value and `x`. The unconstrained optimum is the
/// intersection of the two lines; it is clamped into the interval.
pub fn stage_inner(coeffs: &StageCoeffs, upper: f64) -> (Latency, f64) {
    let upper = upper.max(0.0);
    let a = coeffs.a_coef;
    let b = coeffs.b_coef;
    let (c, d) = match (coeffs.c_coef, coeffs.d_coef) {
        (Latency::Finite(c), Latency::Finite(d)) => (c, d),
        // The receiving side cannot take a single bit.
        (Latency::Unbounded, d) => return (coeffs.offset + Latency::Finite(a).max(d), 0.0),
        (_, Latency::Unbounded) => return (Latency::Unbounded, 0.0),
    };
    let slope = b + c;
    if !(slope > 0.0) {
        return (coeffs.offset + Latency::Finite(a.max(d)), 0.0);
    }
    let x = ((a - d) / slope).clamp(0.0, upper);
    let value = (a - b * x).max(d + c * x);
    (coeffs.offset + Latency::Finite(value), x)
}

/// Grid of fraction increments `{0, h, 2h, ...} * remaining`, strictly below
/// `remaining`.
fn fraction_grid(remaining: f64, relative_step: f64) -> impl Iterator<Item = f64> {
    let count = if remaining > 0.0 {
        ((1.0 / relative_step) - 1e-9).ceil().max(1.0) as usize
    } else {
        1
    };
    (0..count).map(move |j| j as f64 * relative_step * remaining)
}

fn grid_search<F>(remaining: f64, relative_step: f64, mut eval: F) -> Result<StageStep, SlmError>
where
    F: FnMut(f64) -> Result<(Latency, f64), SlmError>,
{
    let mut best: Option<StageStep> = None;
    for fraction in fraction_grid(remaining, relative_step) {
        let (value, bits) = match eval(fraction) {
            Ok(r) => r,
            // Points too close to the supremum leave no processing power.
            Err(SlmError::Model(ModelError::NoProcessingHeadroom { .. })) => continue,
            Err(e) => return Err(e),
        };
        // Strict comparison: ties go to the smaller fraction.
        if best.is_none_or(|b| value < b.value) {
            best = Some(StageStep {
                value,
                bits,
                fraction,
            });
        }
    }
    best.ok_or(SlmError::Unbounded)
}

fn check_step(grid_step: f64) -> Result<(), SlmError> {
    if grid_step > 0.0 && grid_step <= 1.0 {
        Ok(())
    } else {
        Err(SlmError::InvalidOption {
            name: "grid_step",
            value: grid_step,
        })
    }
}

/// Solves stage 1 of the current iteration. `grid_step` is relative to the
/// remaining range `alpha_max - cum_alpha`.
pub fn stage1_solve(state: &SlmState, grid_step: f64) -> Result<StageStep, SlmError> {
    check_step(grid_step)?;
    let remaining = state.instance.alpha_max() - state.cum_alpha;
    let upper = state.iot_bits();
    grid_search(remaining, grid_step, |alpha_inc| {
        Ok(stage_inner(&stage1_coeffs(state, alpha_inc)?, upper))
    })
}

/// Solves stage 2 of the current iteration. `grid_step` is relative to the
/// remaining range `gamma_max - cum_gamma`.
pub fn stage2_solve(state: &SlmState, grid_step: f64) -> Result<StageStep, SlmError> {
    check_step(grid_step)?;
    let remaining = state.instance.gamma_max() - state.cum_gamma;
    let upper = state.fog_bits();
    grid_search(remaining, grid_step, |gamma_inc| {
        Ok(stage_inner(&stage2_coeffs(state, gamma_inc)?, upper))
    })
}

/// Stopping accuracy for `|t - s|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Epsilon {
    /// Seconds.
    Absolute(f64),
    /// Fraction of the first iteration's stage-1 latency.
    RelativeToFirst(f64),
}

impl Epsilon {
    fn resolve(self, first_t: f64) -> f64 {
        match self {
            Epsilon::Absolute(e) => e,
            Epsilon::RelativeToFirst(r) => r * first_t,
        }
    }

    fn value(self) -> f64 {
        match self {
            Epsilon::Absolute(e) | Epsilon::RelativeToFirst(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlmOptions {
    pub epsilon: Epsilon,
    /// Scalar search step as a fraction of the remaining alpha / gamma range.
    pub grid_step: f64,
    pub max_iterations: usize,
}

impl Default for SlmOptions {
    fn default() -> Self {
        SlmOptions {
            epsilon: Epsilon::RelativeToFirst(1e-6),
            grid_step: 1e-3,
            max_iterations: 500,
        }
    }
}

impl SlmOptions {
    pub fn validate(&self) -> Result<(), SlmError> {
        let eps = self.epsilon.value();
        if !(eps > 0.0) {
            return Err(SlmError::InvalidOption {
                name: "epsilon",
                value: eps,
            });
        }
        check_step(self.grid_step)?;
        if self.max_iterations == 0 {
            return Err(SlmError::InvalidOption {
                name: "max_iterations",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// `|t - s| <= epsilon`.
    Converged,
    /// `t` stopped improving at grid resolution before reaching epsilon.
    GridStalled,
    /// Hit `max_iterations`.
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Stage-1 optimum.
    pub t: f64,
    /// Stage-2 optimum.
    pub s: f64,
    pub m_inc: f64,
    pub k_inc: f64,
    pub alpha_inc: f64,
    pub gamma_inc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlmTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// The resolved stopping accuracy in seconds.
    pub epsilon: f64,
}

impl SlmTrace {
    pub fn first_t(&self) -> f64 {
        self.records[0].t
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace is never empty")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "i,t,s,m_inc,k_inc,alpha_inc,gamma_inc")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.iteration, r.t, r.s, r.m_inc, r.k_inc, r.alpha_inc, r.gamma_inc
            )?;
        }
        Ok(())
    }
}

/// Runs alternating stage-1 / stage-2 optimization until `|t - s| <= epsilon`.
///
/// Also stops, flagged [`Termination::GridStalled`], when `t` improves by no
/// more than `epsilon / 10` over two consecutive iterations.
pub fn slm_run(instance: &SystemInstance, options: &SlmOptions) -> Result<(Solution, SlmTrace), SlmError> {
    options.validate()?;
    instance.validate()?;

    let mut state = SlmState::new(*instance);
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut epsilon = options.epsilon.value();
    let mut termination = Termination::IterationLimit;

    for iteration in 1..=options.max_iterations {
        state.iteration = iteration;
        let first = stage1_solve(&state, options.grid_step)?;
        state.apply_stage1(&first);
        let second = stage2_solve(&state, options.grid_step)?;
        state.apply_stage2(&second);

        let (Latency::Finite(t), Latency::Finite(s)) = (first.value, second.value) else {
            return Err(SlmError::Unbounded);
        };
        if iteration == 1 {
            epsilon = options.epsilon.resolve(t);
        }
        records.push(IterationRecord {
            iteration,
            t,
            s,
            m_inc: first.bits,
            k_inc: second.bits,
            alpha_inc: first.fraction,
            gamma_inc: second.fraction,
        });

        if (t - s).abs() <= epsilon {
            termination = Termination::Converged;
            break;
        }
        if iteration >= 3 && records[iteration - 3].t - t <= epsilon / 10.0 {
            termination = Termination::GridStalled;
            break;
        }
    }

    let last = records.last().expect("at least one iteration runs");
    let solution = Solution {
        latency: last.t,
        allocation: state.allocation(),
    };
    Ok((
        solution,
        SlmTrace {
            records,
            termination,
            epsilon,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a: f64, b: f64, c: f64, d: f64) -> StageCoeffs {
        StageCoeffs {
            a_coef: a,
            b_coef: b,
            c_coef: Latency::Finite(c),
            d_coef: Latency::Finite(d),
            offset: Latency::ZERO,
        }
    }

    #[test]
    fn inner_intersection() {
        assert_eq!(stage_inner(&coeffs(10.0, 1.0, 1.0, 0.0), 100.0), (Latency::Finite(5.0), 5.0));
    }

    #[test]
    fn inner_clamps_left() {
        assert_eq!(stage_inner(&coeffs(10.0, 1.0, 1.0, 20.0), 100.0), (Latency::Finite(20.0), 0.0));
    }

    #[test]
    fn inner_clamps_right() {
        let (t, m) = stage_inner(&coeffs(10.0, 1.0, 1.0, 0.0), 3.0);
        assert_eq!((t, m), (Latency::Finite(7.0), 3.0));
        // Independent scan of max(a - b m, d + c m) over [0, 3].
        let scan = (0..=10_000)
            .map(|j| 3.0 * j as f64 / 1e4)
            .map(|m| (10.0 - m).max(m))
            .fold(f64::INFINITY, f64::min);
        assert!((scan - 7.0).abs() < 1e-12);
    }

    #[test]
    fn inner_degenerate() {
        assert_eq!(stage_inner(&coeffs(4.0, 0.0, 0.0, 2.0), 10.0), (Latency::Finite(4.0), 0.0));
        let dead = StageCoeffs {
            c_coef: Latency::Unbounded,
            ..coeffs(4.0, 1.0, 0.0, 2.0)
        };
        assert_eq!(stage_inner(&dead, 10.0), (Latency::Finite(4.0), 0.0));
    }

    #[test]
    fn grid_excludes_right_end() {
        let pts: Vec<f64> = fraction_grid(1.0, 0.3).collect();
        assert_eq!(pts.len(), 4);
        assert!((pts[3] - 0.9).abs() < 1e-12);
        assert_eq!(fraction_grid(0.5, 1e-3).count(), 1000);
        assert_eq!(fraction_grid(0.5, 0.5).collect::<Vec<_>>(), vec![0.0, 0.25]);
    }

    #[test]
    fn rejects_bad_options() {
        let bad = [
            SlmOptions {
                grid_step: 0.0,
                ..Default::default()
            },
            SlmOptions {
                epsilon: Epsilon::Absolute(0.0),
                ..Default::default()
            },
            SlmOptions {
                max_iterations: 0,
                ..Default::default()
            },
        ];
        for o in bad {
            assert!(matches!(o.validate(), Err(SlmError::InvalidOption { .. })));
        }
    }
}

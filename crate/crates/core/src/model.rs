//! Physical model of a single IoT -> fog -> cloud chain.
//!
//! A processor drawing `P` watts runs at `f = ((P - b) / a)^(1/beta)` cycles
//! per second, so `n` bits of an algorithm costing `c` cycles per bit take
//! `c * n / f` seconds. Links are Shannon-rate channels,
//! `R = W * log2(1 + g * P / (N0 * W))`. Each layer's latency is the time
//! until its share of the workload is done:
//!
//! ```text
//! T_I = t_p,I
//! T_F = t_c,IF + t_p,F
//! T_C = t_c,IF + t_c,FC + t_p,C
//! T   = max(T_I, T_F, T_C)
//! ```
//!
//! With every power budget spent (more power never hurts any latency), the
//! IoT and fog splits collapse to the fractions `alpha` and `gamma` of their
//! budgets devoted to transmission.

use std::cmp::Ordering;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest admissible gap between a processing power and the idle offset.
pub const POWER_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("processing power {power} W leaves no headroom over the idle draw {idle} W")]
    NoProcessingHeadroom { power: f64, idle: f64 },
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
}

pub(crate) fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// A latency (or a per-bit time) that may be unbounded because a link
/// carrying traffic has zero rate.
///
/// `Finite` always orders below `Unbounded`, so argmin over candidates works
/// without ever touching a floating-point infinity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum Latency {
    Finite(f64),
    Unbounded,
}

impl Latency {
    pub const ZERO: Latency = Latency::Finite(0.0);

    pub fn finite(self) -> Option<f64> {
        match self {
            Latency::Finite(v) => Some(v),
            Latency::Unbounded => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Latency::Finite(_))
    }

    pub fn max(self, other: Latency) -> Latency {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Per-bit cost times a bit count. Zero bits cost nothing, even over a
    /// dead link.
    pub fn times(self, bits: f64) -> Latency {
        if bits == 0.0 {
            return Latency::ZERO;
        }
        match self {
            Latency::Finite(v) => Latency::Finite(v * bits),
            Latency::Unbounded => Latency::Unbounded,
        }
    }

    /// Total order used by argmin searches.
    pub fn total_cmp(&self, other: &Latency) -> Ordering {
        match (self, other) {
            (Latency::Finite(a), Latency::Finite(b)) => a.total_cmp(b),
            (Latency::Finite(_), Latency::Unbounded) => Ordering::Less,
            (Latency::Unbounded, Latency::Finite(_)) => Ordering::Greater,
            (Latency::Unbounded, Latency::Unbounded) => Ordering::Equal,
        }
    }
}

impl Add for Latency {
    type Output = Latency;

    fn add(self, rhs: Latency) -> Latency {
        match (self, rhs) {
            (Latency::Finite(a), Latency::Finite(b)) => Latency::Finite(a + b),
            _ => Latency::Unbounded,
        }
    }
}

/// Computational characteristics and power budget of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Power-law coefficient, W / (cycles/s)^beta.
    pub a: f64,
    /// Idle power offset, W.
    pub b: f64,
    /// Algorithm complexity, cycles per bit.
    pub c: f64,
    pub beta: f64,
    /// Total power budget, W.
    pub p_total: f64,
}

impl LayerParams {
    pub fn new(a: f64, b: f64, c: f64, beta: f64, p_total: f64) -> Result<Self, ModelError> {
        let layer = LayerParams {
            a,
            b,
            c,
            beta,
            p_total,
        };
        layer.validate()?;
        Ok(layer)
    }

    /// Layer whose `a` is chosen so that `max_power` drives it at exactly
    /// `max_frequency`.
    pub fn calibrated(
        max_power: f64,
        max_frequency: f64,
        b: f64,
        c: f64,
        beta: f64,
        p_total: f64,
    ) -> Result<Self, ModelError> {
        let a = calibrate_a(max_power, max_frequency, b, beta)?;
        LayerParams::new(a, b, c, beta, p_total)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("a", self.a, self.a > 0.0, "must be positive")?;
        check("b", self.b, self.b >= 0.0, "must be non-negative")?;
        check("c", self.c, self.c > 0.0, "must be positive")?;
        check("beta", self.beta, self.beta >= 1.0, "must be at least 1")?;
        check(
            "p_total",
            self.p_total,
            self.p_total - self.b >= POWER_MARGIN,
            "must exceed the idle offset b",
        )
    }

    /// Processing time of a single bit at `power`.
    pub fn seconds_per_bit(&self, power: f64) -> Result<f64, ModelError> {
        Ok(self.c / frequency_at(power, self)?)
    }
}

/// One communication hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Hz.
    pub bandwidth: f64,
    /// N0, W/Hz.
    pub noise_density: f64,
    /// Channel power gain |h|^2.
    pub gain: f64,
}

impl LinkParams {
    pub fn new(bandwidth: f64, noise_density: f64, gain: f64) -> Result<Self, ModelError> {
        let link = LinkParams {
            bandwidth,
            noise_density,
            gain,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("bandwidth", self.bandwidth, self.bandwidth > 0.0, "must be positive")?;
        check(
            "noise_density",
            self.noise_density,
            self.noise_density > 0.0,
            "must be positive",
        )?;
        check("gain", self.gain, self.gain >= 0.0, "must be non-negative")
    }

    /// Noise power over the whole band, N0 * W.
    pub fn noise_power(&self) -> f64 {
        self.noise_density * self.bandwidth
    }

    /// Gain normalized by the noise power, g / (N0 W).
    pub fn normalized_gain(&self) -> f64 {
        self.gain / self.noise_power()
    }

    /// Transmission time of a single bit at `comm_power`.
    pub fn seconds_per_bit(&self, comm_power: f64) -> Latency {
        let rate = link_rate(comm_power, self);
        if rate > 0.0 {
            Latency::Finite(1.0 / rate)
        } else {
            Latency::Unbounded
        }
    }
}

/// A complete problem instance: workload plus the three layers and two links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemInstance {
    pub workload_bits: f64,
    pub iot: LayerParams,
    pub fog: LayerParams,
    pub cloud: LayerParams,
    pub link_if: LinkParams,
    pub link_fc: LinkParams,
}

impl SystemInstance {
    pub fn new(
        workload_bits: f64,
        iot: LayerParams,
        fog: LayerParams,
        cloud: LayerParams,
        link_if: LinkParams,
        link_fc: LinkParams,
    ) -> Result<Self, ModelError> {
        let inst = SystemInstance {
            workload_bits,
            iot,
            fog,
            cloud,
            link_if,
            link_fc,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check(
            "workload_bits",
            self.workload_bits,
            self.workload_bits >= 0.0,
            "must be non-negative",
        )?;
        self.iot.validate()?;
        self.fog.validate()?;
        self.cloud.validate()?;
        self.link_if.validate()?;
        self.link_fc.validate()
    }

    pub fn with_workload(mut self, workload_bits: f64) -> Result<Self, ModelError> {
        self.workload_bits = workload_bits;
        self.validate()?;
        Ok(self)
    }

    /// Supremum of the IoT transmit fraction, 1 - b_I / P_tI (exclusive).
    pub fn alpha_max(&self) -> f64 {
        1.0 - self.iot.b / self.iot.p_total
    }

    /// Supremum of the fog transmit fraction, 1 - b_F / P_tF (exclusive).
    pub fn gamma_max(&self) -> f64 {
        1.0 - self.fog.b / self.fog.p_total
    }

    /// Per-bit costs of every stage of the chain at the power split
    /// `(alpha, gamma)`.
    pub fn unit_costs(&self, alpha: f64, gamma: f64) -> Result<UnitCosts, ModelError> {
        check_fraction("alpha", alpha)?;
        check_fraction("gamma", gamma)?;
        Ok(UnitCosts {
            iot_proc: self.iot.seconds_per_bit((1.0 - alpha) * self.iot.p_total)?,
            if_comm: self.link_if.seconds_per_bit(alpha * self.iot.p_total),
            fog_proc: self.fog.seconds_per_bit((1.0 - gamma) * self.fog.p_total)?,
            fc_comm: self.link_fc.seconds_per_bit(gamma * self.fog.p_total),
            cloud_proc: self.cloud.seconds_per_bit(self.cloud.p_total)?,
        })
    }
}

fn check_fraction(name: &'static str, value: f64) -> Result<(), ModelError> {
    check(name, value, (0.0..=1.0).contains(&value), "must lie in [0, 1]")
}

/// Seconds per bit of each processing and transmission stage at a fixed
/// power split. Every latency of the chain is affine in `(m, k)` with these
/// as slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCosts {
    pub iot_proc: f64,
    pub if_comm: Latency,
    pub fog_proc: f64,
    pub fc_comm: Latency,
    pub cloud_proc: f64,
}

impl UnitCosts {
    /// Per-bit cost of forwarding a bit to the cloud and processing it there.
    pub fn cloud_path(&self) -> Latency {
        self.fc_comm + Latency::Finite(self.cloud_proc)
    }
}

/// Decision variables: the workload split `(m, k)` and the transmit
/// fractions `(alpha, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Bits offloaded IoT -> fog.
    pub m: f64,
    /// Bits forwarded fog -> cloud.
    pub k: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Allocation {
    /// Individual powers with every budget fully spent.
    pub fn powers(&self, inst: &SystemInstance) -> PowerSplit {
        PowerSplit {
            iot_comm: self.alpha * inst.iot.p_total,
            iot_proc: (1.0 - self.alpha) * inst.iot.p_total,
            fog_comm: self.gamma * inst.fog.p_total,
            fog_proc: (1.0 - self.gamma) * inst.fog.p_total,
            cloud_proc: inst.cloud.p_total,
        }
    }
}

/// Final decision of a solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Reported latency, seconds.
    pub latency: f64,
    pub allocation: Allocation,
}

/// The five power levels of the chain, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub iot_comm: f64,
    pub iot_proc: f64,
    pub fog_comm: f64,
    pub fog_proc: f64,
    pub cloud_proc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub t_proc_iot: f64,
    pub t_proc_fog: f64,
    pub t_proc_cloud: f64,
    pub t_comm_if: f64,
    pub t_comm_fc: f64,
    pub t_iot: f64,
    pub t_fog: f64,
    pub t_cloud: f64,
    /// max(t_iot, t_fog, t_cloud).
    pub total: f64,
}

/// Outcome of evaluating an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Evaluation {
    Finite(LatencyBreakdown),
    /// Traffic was routed over a zero-rate link.
    Unbounded,
}

impl Evaluation {
    pub fn latency(&self) -> Latency {
        match self {
            Evaluation::Finite(b) => Latency::Finite(b.total),
            Evaluation::Unbounded => Latency::Unbounded,
        }
    }

    pub fn breakdown(&self) -> Option<&LatencyBreakdown> {
        match self {
            Evaluation::Finite(b) => Some(b),
            Evaluation::Unbounded => None,
        }
    }
}

/// Power-law coefficient that makes `max_power` drive the processor at
/// `max_frequency`: a = (max_power - b) / max_frequency^beta.
pub fn calibrate_a(max_power: f64, max_frequency: f64, b: f64, beta: f64) -> Result<f64, ModelError> {
    check("max_frequency", max_frequency, max_frequency > 0.0, "must be positive")?;
    check("beta", beta, beta >= 1.0, "must be at least 1")?;
    check("b", b, b >= 0.0, "must be non-negative")?;
    if !(max_power - b > 0.0) {
        return Err(ModelError::NoProcessingHeadroom {
            power: max_power,
            idle: b,
        });
    }
    Ok((max_power - b) / max_frequency.powf(beta))
}

/// Processing frequency (cycles/s) sustained by `power`.
pub fn frequency_at(power: f64, layer: &LayerParams) -> Result<f64, ModelError> {
    let headroom = power - layer.b;
    if !(headroom >= POWER_MARGIN) || !power.is_finite() {
        return Err(ModelError::NoProcessingHeadroom {
            power,
            idle: layer.b,
        });
    }
    Ok((headroom / layer.a).powf(1.0 / layer.beta))
}

/// Time to process `bits` at `power`. No work needs no power, so zero bits
/// cost zero seconds whatever the power.
pub fn proc_time(bits: f64, power: f64, layer: &LayerParams) -> Result<f64, ModelError> {
    if bits < 0.0 || !bits.is_finite() {
        return Err(ModelError::InvalidParameter {
            name: "bits",
            value: bits,
            reason: "must be non-negative",
        });
    }
    if bits == 0.0 {
        return Ok(0.0);
    }
    Ok(layer.c * bits / frequency_at(power, layer)?)
}

/// Shannon throughput in bits/s of `link` at transmit power `comm_power`.
pub fn link_rate(comm_power: f64, link: &LinkParams) -> f64 {
    let snr = link.gain * comm_power / link.noise_power();
    link.bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

/// Transmit power whose SNR P / (N0 W) equals `snr_db`.
pub fn snr_to_power(snr_db: f64, link: &LinkParams) -> f64 {
    10f64.powf(snr_db / 10.0) * link.noise_power()
}

/// Inverse of [`snr_to_power`].
pub fn power_to_snr_db(power: f64, link: &LinkParams) -> f64 {
    10.0 * (power / link.noise_power()).log10()
}

/// Latencies of `alloc` with the power budgets fully spent.
pub fn evaluate(inst: &SystemInstance, alloc: &Allocation) -> Result<Evaluation, ModelError> {
    evaluate_powers(inst, alloc.m, alloc.k, &alloc.powers(inst))
}

/// Latencies for an arbitrary power assignment, budgets not necessarily
/// saturated.
pub fn evaluate_powers(
    inst: &SystemInstance,
    m: f64,
    k: f64,
    powers: &PowerSplit,
) -> Result<Evaluation, ModelError> {
    let total = inst.workload_bits;
    // Solvers accumulate m and k as sums of increments; allow rounding noise.
    let slack = 1e-12 * total.max(1.0);
    if !(m >= -slack && k >= -slack && k <= m + slack && m <= total + slack) {
        return Err(ModelError::InvalidAllocation(format!(
            "need 0 <= k <= m <= B, got m = {m}, k = {k}, B = {total}"
        )));
    }
    let m = m.clamp(0.0, total);
    let k = k.clamp(0.0, m);

    let rate_if = link_rate(powers.iot_comm, &inst.link_if);
    let rate_fc = link_rate(powers.fog_comm, &inst.link_fc);
    if (m > 0.0 && !(rate_if > 0.0)) || (k > 0.0 && !(rate_fc > 0.0)) {
        return Ok(Evaluation::Unbounded);
    }

    let t_proc_iot = proc_time((total - m).max(0.0), powers.iot_proc, &inst.iot)?;
    let t_proc_fog = proc_time((m - k).max(0.0), powers.fog_proc, &inst.fog)?;
    let t_proc_cloud = proc_time(k, powers.cloud_proc, &inst.cloud)?;
    let t_comm_if = if m > 0.0 { m / rate_if } else { 0.0 };
    let t_comm_fc = if k > 0.0 { k / rate_fc } else { 0.0 };

    let t_iot = t_proc_iot;
    let t_fog = t_comm_if + t_proc_fog;
    let t_cloud = t_comm_if + t_comm_fc + t_proc_cloud;
    Ok(Evaluation::Finite(LatencyBreakdown {
        t_proc_iot,
        t_proc_fog,
        t_proc_cloud,
        t_comm_if,
        t_comm_fc,
        t_iot,
        t_fog,
        t_cloud,
        total: t_iot.max(t_fog).max(t_cloud),
    }))
}

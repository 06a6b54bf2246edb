//! Monte-Carlo latency experiments.
//!
//! Every realization draws an exponential (Rayleigh-fading power) gain for the
//! IoT -> fog link, solves the instance, and contributes one latency to the
//! mean at its sweep point. Each realization owns a ChaCha substream fixed by
//! `(seed, point, realization)`, so results do not depend on thread count or
//! scheduling.

use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    check, evaluate, evaluate_powers, snr_to_power, Allocation, LayerParams, Latency, LinkParams,
    ModelError, PowerSplit, Solution, SystemInstance, POWER_MARGIN,
};
use crate::oracle::{grid_oracle, OracleError, OracleOptions};
use crate::slm::{slm_run, SlmError, SlmOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Slm(#[from] SlmError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

/// Physical parameters shared by every instance of an experiment. Defaults
/// model a Quark X1000 IoT node, a Xeon E7450 fog node and a Xeon Platinum
/// 8156 cloud node over 500 MHz links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    /// Cycles per bit at each layer.
    pub c_i: f64,
    pub c_f: f64,
    pub c_c: f64,
    pub beta: f64,
    /// Idle power offsets, W.
    pub b_i: f64,
    pub b_f: f64,
    pub b_c: f64,
    /// Link bandwidths, Hz.
    pub w_if: f64,
    pub w_fc: f64,
    /// Noise spectral density, W/Hz.
    pub n0: f64,
    /// Fog transmit SNR P_tF / (N0 W_FC); fixes the fog power budget.
    pub snr_fc_db: f64,
    /// Calibration points: each processor runs at `max_freq_*` when drawing
    /// `max_power_*`.
    pub max_power_i: f64,
    pub max_freq_i: f64,
    pub max_power_f: f64,
    pub max_freq_f: f64,
    pub max_power_c: f64,
    pub max_freq_c: f64,
    /// Cloud power budget, W. Set to the cloud processor's rated maximum.
    pub p_total_c: f64,
    /// Fog -> cloud channel gain (not faded).
    pub gain_fc: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            c_i: 5.0,
            c_f: 2.0,
            c_c: 1.0,
            beta: 3.0,
            b_i: 1e-3,
            b_f: 1e-3,
            b_c: 1e-3,
            w_if: 5e8,
            w_fc: 5e8,
            n0: 1e-10,
            snr_fc_db: 32.0,
            max_power_i: 2.2,
            max_freq_i: 4e8,
            max_power_f: 90.0,
            max_freq_f: 2.4e9,
            max_power_c: 105.0,
            max_freq_c: 3.6e9,
            p_total_c: 105.0,
            gain_fc: 1.0,
        }
    }
}

impl Scenario {
    /// Checks every field, naming it on failure.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("c_i", self.c_i), ("c_f", self.c_f), ("c_c", self.c_c)] {
            check(name, v, v > 0.0, "must be positive")?;
        }
        check("beta", self.beta, self.beta >= 1.0, "must be at least 1")?;
        for (name, v) in [("b_i", self.b_i), ("b_f", self.b_f), ("b_c", self.b_c)] {
            check(name, v, v >= 0.0, "must be non-negative")?;
        }
        for (name, v) in [("w_if", self.w_if), ("w_fc", self.w_fc), ("n0", self.n0)] {
            check(name, v, v > 0.0, "must be positive")?;
        }
        for (name, v) in [("max_freq_i", self.max_freq_i), ("max_freq_f", self.max_freq_f), ("max_freq_c", self.max_freq_c)] {
            check(name, v, v > 0.0, "must be positive")?;
        }
        for (name, p, b) in [
            ("max_power_i", self.max_power_i, self.b_i),
            ("max_power_f", self.max_power_f, self.b_f),
            ("max_power_c", self.max_power_c, self.b_c),
        ] {
            check(name, p, p - b >= POWER_MARGIN, "must exceed the idle offset")?;
        }
        check("snr_fc_db", self.snr_fc_db, true, "must be finite")?;
        check("p_total_c", self.p_total_c, true, "must be finite")?;
        check("gain_fc", self.gain_fc, self.gain_fc >= 0.0, "must be non-negative")
    }

    /// Instance with IoT transmit SNR `snr_if_db` and IoT -> fog gain `gain_if`.
    ///
    /// A budget at or below its layer's idle draw (e.g. a very low SNR) is
    /// reported as [`ModelError::NoProcessingHeadroom`].
    pub fn instance(&self, workload_bits: f64, snr_if_db: f64, gain_if: f64) -> Result<SystemInstance, ModelError> {
        self.validate()?;
        check("snr_if_db", snr_if_db, true, "must be finite")?;
        check("gain_if", gain_if, gain_if >= 0.0, "must be non-negative")?;
        check("workload_bits", workload_bits, workload_bits >= 0.0, "must be non-negative")?;
        let link_if = LinkParams::new(self.w_if, self.n0, gain_if)?;
        let link_fc = LinkParams::new(self.w_fc, self.n0, self.gain_fc)?;
        let p_total_i = snr_to_power(snr_if_db, &link_if);
        let p_total_f = snr_to_power(self.snr_fc_db, &link_fc);
        for (power, idle) in [(p_total_i, self.b_i), (p_total_f, self.b_f), (self.p_total_c, self.b_c)] {
            if power - idle < POWER_MARGIN {
                return Err(ModelError::NoProcessingHeadroom { power, idle });
            }
        }
        let iot = LayerParams::calibrated(self.max_power_i, self.max_freq_i, self.b_i, self.c_i, self.beta, p_total_i)?;
        let fog = LayerParams::calibrated(self.max_power_f, self.max_freq_f, self.b_f, self.c_f, self.beta, p_total_f)?;
        let cloud = LayerParams::calibrated(
            self.max_power_c,
            self.max_freq_c,
            self.b_c,
            self.c_c,
            self.beta,
            self.p_total_c,
        )?;
        SystemInstance::new(workload_bits, iot, fog, cloud, link_if, link_fc)
    }
}

/// Exponential(1) channel power gain, i.e. Rayleigh fading.
pub fn sample_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Random stream of one realization at one sweep point.
pub fn realization_rng(seed: u64, point: usize, realization: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point as u64);
    // 2^20 words per realization; one gain needs a handful.
    rng.set_word_pos((realization as u128) << 20);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    ThreeLayer,
    FogOnly,
    CloudOnly,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::ThreeLayer, Architecture::FogOnly, Architecture::CloudOnly];
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::ThreeLayer => "three-layer",
            Architecture::FogOnly => "fog-only",
            Architecture::CloudOnly => "cloud-only",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverChoice {
    Slm,
    Oracle,
    Both,
}

/// How the single-layer baselines split IoT and fog power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselinePower {
    /// Whole budgets to transmission at the forwarding layers.
    Fixed,
    /// Best transmit fractions on the oracle grid.
    GridOptimized,
}

/// How a series' latencies are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Slm,
    Oracle,
    FixedPower,
    GridPower,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Slm => "slm",
            Method::Oracle => "oracle",
            Method::FixedPower => "fixed",
            Method::GridPower => "grid",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Workload sweep in bits at a fixed IoT SNR.
    Workload { snr_if_db: f64, bits: Vec<f64> },
    /// IoT SNR sweep in dB at a fixed workload.
    SnrIf { workload_bits: f64, snr_db: Vec<f64> },
}

impl SweepAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Workload { bits, .. } => bits,
            SweepAxis::SnrIf { snr_db, .. } => snr_db,
        }
    }

    /// `(workload_bits, snr_if_db)` at a point.
    pub fn operating_point(&self, index: usize) -> (f64, f64) {
        match self {
            SweepAxis::Workload { snr_if_db, bits } => (bits[index], *snr_if_db),
            SweepAxis::SnrIf { workload_bits, snr_db } => (*workload_bits, snr_db[index]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub axis: SweepAxis,
    pub n_realizations: usize,
    pub seed: u64,
    pub solver: SolverChoice,
    pub architectures: Vec<Architecture>,
    pub baseline_power: BaselinePower,
    pub slm: SlmOptions,
    pub oracle: OracleOptions,
}

impl ExperimentConfig {
    pub fn new(axis: SweepAxis) -> Self {
        ExperimentConfig {
            scenario: Scenario::default(),
            axis,
            n_realizations: 4000,
            seed: 42,
            solver: SolverChoice::Slm,
            architectures: vec![Architecture::ThreeLayer],
            baseline_power: BaselinePower::Fixed,
            slm: SlmOptions::default(),
            oracle: OracleOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        let values = self.axis.values();
        if values.is_empty() {
            return bad("sweep list is empty".into());
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sweep list must be strictly increasing".into());
        }
        if self.architectures.is_empty() {
            return bad("no architecture selected".into());
        }
        self.slm.validate()?;
        self.oracle.validate()?;
        Ok(())
    }

    /// The `(architecture, method)` series produced at every sweep point.
    pub fn series(&self) -> Vec<(Architecture, Method)> {
        let mut out = Vec::new();
        for &arch in &self.architectures {
            match arch {
                Architecture::ThreeLayer => {
                    if matches!(self.solver, SolverChoice::Slm | SolverChoice::Both) {
                        out.push((arch, Method::Slm));
                    }
                    if matches!(self.solver, SolverChoice::Oracle | SolverChoice::Both) {
                        out.push((arch, Method::Oracle));
                    }
                }
                _ => out.push((
                    arch,
                    match self.baseline_power {
                        BaselinePower::Fixed => Method::FixedPower,
                        BaselinePower::GridOptimized => Method::GridPower,
                    },
                )),
            }
        }
        out
    }
}

/// Fog-only baseline: every bit goes to the fog, which keeps them all. The
/// IoT node spends its whole budget transmitting, the fog its whole budget
/// processing.
pub fn fog_only(inst: &SystemInstance) -> Result<Latency, ModelError> {
    let powers = PowerSplit {
        iot_comm: inst.iot.p_total,
        iot_proc: 0.0,
        fog_comm: 0.0,
        fog_proc: inst.fog.p_total,
        cloud_proc: inst.cloud.p_total,
    };
    let b = inst.workload_bits;
    Ok(evaluate_powers(inst, b, 0.0, &powers)?.latency())
}

/// Cloud-only baseline: every bit is relayed through the fog to the cloud,
/// both forwarding layers spending their whole budget transmitting.
pub fn cloud_only(inst: &SystemInstance) -> Result<Latency, ModelError> {
    let powers = PowerSplit {
        iot_comm: inst.iot.p_total,
        iot_proc: 0.0,
        fog_comm: inst.fog.p_total,
        fog_proc: 0.0,
        cloud_proc: inst.cloud.p_total,
    };
    let b = inst.workload_bits;
    Ok(evaluate_powers(inst, b, b, &powers)?.latency())
}

/// Baseline with the transmit fractions searched on the oracle grid instead
/// of fixed. The workload split stays that of the baseline.
pub fn baseline_grid_optimized(
    inst: &SystemInstance,
    arch: Architecture,
    grid_step: f64,
) -> Result<Latency, ExperimentError> {
    let b = inst.workload_bits;
    let k = match arch {
        Architecture::FogOnly => 0.0,
        Architecture::CloudOnly => b,
        Architecture::ThreeLayer => {
            return Err(ExperimentError::InvalidConfig("three-layer is not a baseline".into()))
        }
    };
    let fractions = |sup: f64| {
        (0..)
            .map(move |j| j as f64 * grid_step)
            .take_while(move |&x| x < sup)
    };
    let mut best = Latency::Unbounded;
    for alpha in fractions(inst.alpha_max()) {
        let gammas: Vec<f64> = if k > 0.0 {
            fractions(inst.gamma_max()).collect()
        } else {
            vec![0.0]
        };
        for gamma in gammas {
            match evaluate(inst, &Allocation { m: b, k, alpha, gamma }) {
                Ok(e) if e.latency() < best => best = e.latency(),
                Ok(_) => {}
                Err(ModelError::NoProcessingHeadroom { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(best)
}

/// Latency cost of integrality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingLoss {
    /// `(T_rounded - T_relaxed) / T_relaxed`, clipped at zero.
    pub loss: f64,
    /// Unclipped value.
    pub raw_loss: f64,
    /// The raw loss was negative: the relaxed point was not optimal for its
    /// power split.
    pub clipped: bool,
    pub rounded: Allocation,
}

/// Best of the floor/ceil roundings of `(m, k)` that stay feasible, relative
/// to the relaxed allocation's own latency.
pub fn rounding_loss(inst: &SystemInstance, solution: &Solution) -> Result<RoundingLoss, ExperimentError> {
    let relaxed_alloc = solution.allocation;
    let relaxed = evaluate(inst, &relaxed_alloc)?
        .latency()
        .finite()
        .ok_or(ExperimentError::Slm(SlmError::Unbounded))?;
    let b = inst.workload_bits;
    let mut best: Option<(f64, Allocation)> = None;
    for m in [relaxed_alloc.m.floor(), relaxed_alloc.m.ceil()] {
        for k in [relaxed_alloc.k.floor(), relaxed_alloc.k.ceil()] {
            if !(0.0 <= k && k <= m && m <= b) {
                continue;
            }
            let alloc = Allocation { m, k, ..relaxed_alloc };
            if let Some(t) = evaluate(inst, &alloc)?.latency().finite() {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, alloc));
                }
            }
        }
    }
    let (rounded_t, rounded) =
        best.ok_or_else(|| ExperimentError::InvalidConfig("no feasible integer rounding".into()))?;
    let raw_loss = if relaxed > 0.0 {
        (rounded_t - relaxed) / relaxed
    } else {
        0.0
    };
    Ok(RoundingLoss {
        loss: raw_loss.max(0.0),
        raw_loss,
        clipped: raw_loss < 0.0,
        rounded,
    })
}

/// Mean latency of one series at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub sweep_value: f64,
    pub architecture: Architecture,
    pub method: Method,
    pub mean_latency_s: f64,
    pub stderr_s: f64,
    pub n_valid: usize,
    pub n_unbounded: usize,
    /// More than 1% of realizations were unbounded.
    pub unreliable: bool,
}

/// SLM vs oracle relative gap statistics over the realizations of a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub mean_rel_gap: f64,
    pub max_abs_rel_gap: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub entries: Vec<SweepEntry>,
    pub gap: Option<GapStats>,
}

impl SweepPoint {
    pub fn entry(&self, arch: Architecture, method: Method) -> Option<&SweepEntry> {
        self.entries
            .iter()
            .find(|e| e.architecture == arch && e.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

pub const CSV_HEADER: &str = "sweep_value,architecture,solver,mean_latency_s,stderr_s,n_valid,n_unbounded";

impl SweepResult {
    /// `(sweep_value, mean)` pairs of one series.
    pub fn curve(&self, arch: Architecture, method: Method) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.entry(arch, method).map(|e| (p.sweep_value, e.mean_latency_s)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for p in &self.points {
            for e in &p.entries {
                writeln!(
                    out,
                    "{},{},{},{:e},{:e},{},{}",
                    e.sweep_value, e.architecture, e.method, e.mean_latency_s, e.stderr_s, e.n_valid, e.n_unbounded
                )?;
            }
        }
        Ok(())
    }
}

fn solve_series(
    inst: &SystemInstance,
    arch: Architecture,
    method: Method,
    config: &ExperimentConfig,
) -> Result<Latency, ExperimentError> {
    match (arch, method) {
        (Architecture::ThreeLayer, Method::Slm) => match slm_run(inst, &config.slm) {
            Ok((sol, _)) => Ok(Latency::Finite(sol.latency)),
            Err(SlmError::Unbounded) => Ok(Latency::Unbounded),
            Err(e) => Err(e.into()),
        },
        (Architecture::ThreeLayer, Method::Oracle) => match grid_oracle(inst, &config.oracle) {
            Ok(sol) => Ok(Latency::Finite(sol.latency)),
            Err(OracleError::Unbounded) => Ok(Latency::Unbounded),
            Err(e) => Err(e.into()),
        },
        (Architecture::FogOnly, Method::FixedPower) => Ok(fog_only(inst)?),
        (Architecture::CloudOnly, Method::FixedPower) => Ok(cloud_only(inst)?),
        (_, Method::GridPower) => baseline_grid_optimized(inst, arch, config.oracle.grid_step),
        _ => Err(ExperimentError::InvalidConfig(format!("no method {method} for {arch}"))),
    }
}

fn realization(
    config: &ExperimentConfig,
    series: &[(Architecture, Method)],
    point: usize,
    index: usize,
) -> Result<Vec<Latency>, ExperimentError> {
    let (bits, snr) = config.axis.operating_point(point);
    let gain = sample_gain(&mut realization_rng(config.seed, point, index));
    let inst = config.scenario.instance(bits, snr, gain)?;
    series
        .iter()
        .map(|&(arch, method)| solve_series(&inst, arch, method, config))
        .collect()
}

#[cfg(feature = "parallel")]
fn all_realizations(
    config: &ExperimentConfig,
    series: &[(Architecture, Method)],
    point: usize,
) -> Result<Vec<Vec<Latency>>, ExperimentError> {
    use rayon::prelude::*;
    (0..config.n_realizations)
        .into_par_iter()
        .map(|r| realization(config, series, point, r))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn all_realizations(
    config: &ExperimentConfig,
    series: &[(Architecture, Method)],
    point: usize,
) -> Result<Vec<Vec<Latency>>, ExperimentError> {
    (0..config.n_realizations)
        .map(|r| realization(config, series, point, r))
        .collect()
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Monte-Carlo average of every configured series at sweep point `point`.
pub fn average_latency(config: &ExperimentConfig, point: usize) -> Result<SweepPoint, ExperimentError> {
    config.validate()?;
    let values = config.axis.values();
    if point >= values.len() {
        return Err(ExperimentError::InvalidConfig(format!("no sweep point {point}")));
    }
    let series = config.series();
    let samples = all_realizations(config, &series, point)?;

    let entries = series
        .iter()
        .enumerate()
        .map(|(col, &(architecture, method))| {
            let finite: Vec<f64> = samples.iter().filter_map(|row| row[col].finite()).collect();
            let n_unbounded = samples.len() - finite.len();
            let (mean, stderr) = mean_and_stderr(&finite);
            SweepEntry {
                sweep_value: values[point],
                architecture,
                method,
                mean_latency_s: mean,
                stderr_s: stderr,
                n_valid: finite.len(),
                n_unbounded,
                unreliable: n_unbounded as f64 > 0.01 * samples.len() as f64,
            }
        })
        .collect();

    let col = |m: Method| series.iter().position(|&s| s == (Architecture::ThreeLayer, m));
    let gap = match (col(Method::Slm), col(Method::Oracle)) {
        (Some(s), Some(o)) => {
            let gaps: Vec<f64> = samples
                .iter()
                .filter_map(|row| match (row[s], row[o]) {
                    (Latency::Finite(ts), Latency::Finite(to)) if to > 0.0 => Some((ts - to) / to),
                    _ => None,
                })
                .collect();
            Some(GapStats {
                mean_rel_gap: mean_and_stderr(&gaps).0,
                max_abs_rel_gap: gaps.iter().fold(0.0, |a: f64, g| a.max(g.abs())),
                n: gaps.len(),
            })
        }
        _ => None,
    };

    Ok(SweepPoint {
        sweep_value: values[point],
        entries,
        gap,
    })
}

/// Runs every sweep point in order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let points = (0..config.axis.values().len())
        .map(|p| average_latency(config, p))
        .collect::<Result<_, _>>()?;
    Ok(SweepResult { points })
}

/// IoT SNRs of the workload-sweep figure, dB.
pub const FIG3_SNRS_DB: [f64; 3] = [2.0, 5.0, 10.0];

/// Workload sweep at one IoT SNR: 0.25 to 1.5 Mb in steps of 0.25 Mb,
/// three-layer latency via SLM.
pub fn fig3_config(snr_if_db: f64) -> ExperimentConfig {
    let bits = (1..=6).map(|j| j as f64 * 0.25e6).collect();
    ExperimentConfig::new(SweepAxis::Workload { snr_if_db, bits })
}

/// IoT SNR sweep 0..=20 dB at 1 Mb comparing all three architectures.
pub fn fig4_config() -> ExperimentConfig {
    let snr_db = (0..=20).map(f64::from).collect();
    let mut config = ExperimentConfig::new(SweepAxis::SnrIf {
        workload_bits: 1e6,
        snr_db,
    });
    config.architectures = Architecture::ALL.to_vec();
    config
}

/// First crossing of `level` by the piecewise-linear curve through `points`.
pub fn crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if (y0 - level) * (y1 - level) > 0.0 || y0 == y1 {
            return None;
        }
        Some(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares fit of `y` on `x`.
pub fn least_squares(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

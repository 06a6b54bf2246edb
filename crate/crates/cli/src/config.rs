//! Run configuration: one flat TOML document. Keys are the scenario
//! parameters (`c_i`, `w_if`, `snr_fc_db`, ...) plus the solver and sweep
//! settings below; every key is optional and defaults to the reference setup.
//! A `[manifest]` table, as written next to every output, is ignored so a
//! manifest can be fed straight back in.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use fogsplit::experiments::{
    fig3_config, fig4_config, Architecture, BaselinePower, ExperimentConfig, Scenario, SolverChoice, SweepAxis,
    FIG3_SNRS_DB,
};
use fogsplit::oracle::{InnerMode, OracleOptions};
use fogsplit::slm::{Epsilon, SlmOptions};
use fogsplit::{ModelError, SystemInstance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverArg {
    Slm,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// `sweep_values` are workloads in bits, at `snr_if_db`.
    Workload,
    /// `sweep_values` are IoT SNRs in dB, at `workload_bits`.
    Snr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchArg {
    ThreeLayer,
    FogOnly,
    CloudOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineArg {
    Fixed,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerArg {
    Exact,
    FractionGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub scenario: Scenario,

    /// Single-instance operating point.
    pub workload_bits: f64,
    pub snr_if_db: f64,
    pub gain_if: f64,

    pub seed: u64,
    pub n_realizations: usize,

    /// Absolute SLM stopping accuracy in seconds. Unset: `epsilon_rel` times
    /// the first iteration's latency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub epsilon_rel: f64,
    /// SLM scalar search step, relative to the remaining fraction range.
    pub slm_grid_step: f64,
    pub max_iterations: usize,

    /// Oracle `(alpha, gamma)` grid spacing.
    pub oracle_grid_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
    pub oracle_inner: InnerArg,

    pub solver: SolverArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<Figure>,
    pub sweep_axis: Axis,
    pub sweep_values: Vec<f64>,
    pub architectures: Vec<ArchArg>,
    pub baseline_power: BaselineArg,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::default(),
            workload_bits: 1e6,
            snr_if_db: 5.0,
            gain_if: 1.0,
            seed: 42,
            n_realizations: 4000,
            epsilon: None,
            epsilon_rel: 1e-6,
            slm_grid_step: 1e-3,
            max_iterations: 500,
            oracle_grid_step: 1e-2,
            inner_tol: None,
            oracle_inner: InnerArg::Exact,
            solver: SolverArg::Slm,
            figure: None,
            sweep_axis: Axis::Workload,
            sweep_values: (1..=6).map(|j| j as f64 * 0.25e6).collect(),
            architectures: vec![ArchArg::ThreeLayer],
            baseline_power: BaselineArg::Fixed,
        }
    }
}

/// Keys accepted at the top level of a config file.
fn known_keys() -> Vec<String> {
    let full = RunConfig {
        epsilon: Some(1.0),
        inner_tol: Some(1.0),
        figure: Some(Figure::Fig3),
        ..RunConfig::default()
    };
    let table = toml::Table::try_from(full).expect("config serializes");
    table.keys().cloned().collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse()?;
        table.remove("manifest");
        let known = known_keys();
        if let Some(bad) = table.keys().find(|k| !known.contains(k)) {
            anyhow::bail!("unknown field `{bad}`");
        }
        Ok(table.try_into()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn instance(&self) -> Result<SystemInstance, ModelError> {
        self.scenario.instance(self.workload_bits, self.snr_if_db, self.gain_if)
    }

    pub fn slm_options(&self) -> SlmOptions {
        SlmOptions {
            epsilon: match self.epsilon {
                Some(e) => Epsilon::Absolute(e),
                None => Epsilon::RelativeToFirst(self.epsilon_rel),
            },
            grid_step: self.slm_grid_step,
            max_iterations: self.max_iterations,
        }
    }

    pub fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            grid_step: self.oracle_grid_step,
            inner_tol: self.inner_tol,
            mode: match self.oracle_inner {
                InnerArg::Exact => InnerMode::Exact,
                InnerArg::FractionGrid => InnerMode::FractionGrid,
            },
        }
    }

    fn apply_run_settings(&self, mut config: ExperimentConfig) -> ExperimentConfig {
        config.scenario = self.scenario;
        config.n_realizations = self.n_realizations;
        config.seed = self.seed;
        config.solver = match self.solver {
            SolverArg::Slm => SolverChoice::Slm,
            SolverArg::Oracle => SolverChoice::Oracle,
            SolverArg::Both => SolverChoice::Both,
        };
        config.baseline_power = match self.baseline_power {
            BaselineArg::Fixed => BaselinePower::Fixed,
            BaselineArg::Grid => BaselinePower::GridOptimized,
        };
        config.slm = self.slm_options();
        config.oracle = self.oracle_options();
        config
    }

    /// Sweeps to run, each with the file stem of its CSV.
    pub fn sweeps(&self) -> Vec<(String, ExperimentConfig)> {
        match self.figure {
            Some(Figure::Fig3) => FIG3_SNRS_DB
                .iter()
                .map(|&snr| (format!("fig3_{snr}dB"), self.apply_run_settings(fig3_config(snr))))
                .collect(),
            Some(Figure::Fig4) => vec![("fig4".into(), self.apply_run_settings(fig4_config()))],
            None => {
                let axis = match self.sweep_axis {
                    Axis::Workload => SweepAxis::Workload {
                        snr_if_db: self.snr_if_db,
                        bits: self.sweep_values.clone(),
                    },
                    Axis::Snr => SweepAxis::SnrIf {
                        workload_bits: self.workload_bits,
                        snr_db: self.sweep_values.clone(),
                    },
                };
                let mut config = self.apply_run_settings(ExperimentConfig::new(axis));
                config.architectures = self
                    .architectures
                    .iter()
                    .map(|a| match a {
                        ArchArg::ThreeLayer => Architecture::ThreeLayer,
                        ArchArg::FogOnly => Architecture::FogOnly,
                        ArchArg::CloudOnly => Architecture::CloudOnly,
                    })
                    .collect();
                vec![("sweep".into(), config)]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_setup() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let config = RunConfig {
            epsilon: Some(1e-9),
            figure: Some(Figure::Fig4),
            snr_if_db: 7.5,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&toml::to_string(&config).unwrap()).unwrap(), config);
    }

    #[test]
    fn integers_are_accepted_for_reals() {
        let config = RunConfig::parse("c_i = 4\nworkload_bits = 2000000").unwrap();
        assert_eq!(config.scenario.c_i, 4.0);
        assert_eq!(config.workload_bits, 2e6);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("c_x = 1.0").unwrap_err();
        assert!(err.to_string().contains("c_x"));
    }

    #[test]
    fn manifest_table_is_ignored() {
        let text = "seed = 7\n[manifest]\ncommand = \"sweep\"\n";
        assert_eq!(RunConfig::parse(text).unwrap().seed, 7);
    }
}

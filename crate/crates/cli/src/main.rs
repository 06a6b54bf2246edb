mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use fogsplit::experiments::{run_sweep, ExperimentError, SweepResult};
use fogsplit::oracle::{grid_dump, write_grid_csv};
use fogsplit::{evaluate, grid_oracle, slm_run, ModelError, OracleError, SlmError, Solution, SystemInstance, Termination};
use serde::Serialize;

use config::{Figure, RunConfig, SolverArg};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;
const EXIT_GRID_STALLED: u8 = 5;

/// Min-max latency workload and power split for an IoT -> fog -> cloud chain.
///
/// Exit codes: 0 success, 2 configuration error, 3 infeasible instance,
/// 4 SLM hit its iteration limit, 5 SLM stalled at grid resolution.
#[derive(Parser)]
#[command(name = "fogsplit", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Absolute SLM stopping accuracy in seconds.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Oracle (alpha, gamma) grid spacing.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// SLM scalar search step, relative to the remaining range.
    #[arg(long, global = true)]
    slm_grid_step: Option<f64>,
    /// Channel realizations per sweep point.
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Directory for CSV outputs and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the allocation and latency breakdown.
    Solve {
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        /// Also run the other solver and print the relative gap.
        #[arg(long)]
        compare: bool,
    },
    /// Solve one instance with both SLM and the grid oracle.
    Compare,
    /// Monte-Carlo sweep over workload or IoT SNR, written as CSV.
    Sweep {
        #[arg(long, value_enum)]
        figure: Option<Figure>,
    },
    /// Oracle latency at every (alpha, gamma) grid cell, written as CSV.
    GridDump,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Compare => "compare",
            Command::Sweep { .. } => "sweep",
            Command::GridDump => "grid-dump",
        }
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            error: error.into(),
        }
    }

    fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NoProcessingHeadroom { .. } => Failure {
                code: EXIT_INFEASIBLE,
                error: anyhow!("infeasible instance: {e}"),
            },
            other => Failure::config(other),
        }
    }
}

impl From<SlmError> for Failure {
    fn from(e: SlmError) -> Self {
        match e {
            SlmError::Unbounded => Failure {
                code: EXIT_INFEASIBLE,
                error: anyhow!("infeasible instance: {e}"),
            },
            SlmError::Model(e) => e.into(),
            other => Failure::config(other),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Unbounded => Failure {
                code: EXIT_INFEASIBLE,
                error: anyhow!("infeasible instance: {e}"),
            },
            OracleError::Model(e) => e.into(),
            other => Failure::config(other),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(e) => e.into(),
            ExperimentError::Slm(e) => e.into(),
            ExperimentError::Oracle(e) => e.into(),
            other => Failure::config(other),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn resolve_config(common: &Common) -> CliResult<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path).map_err(Failure::config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(eps) = common.epsilon {
        config.epsilon = Some(eps);
    }
    if let Some(step) = common.grid_step {
        config.oracle_grid_step = step;
    }
    if let Some(step) = common.slm_grid_step {
        config.slm_grid_step = step;
    }
    if let Some(n) = common.realizations {
        config.n_realizations = n;
    }
    Ok(config)
}

#[derive(Serialize)]
struct ManifestInfo {
    tool: &'static str,
    version: &'static str,
    command: String,
    created_unix_s: u64,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    #[serde(flatten)]
    config: &'a RunConfig,
    manifest: ManifestInfo,
}

/// Writes `manifest.toml`: the fully resolved config plus run metadata.
/// Passing it back with `--config` reproduces the outputs.
fn write_manifest(dir: &Path, command: &str, config: &RunConfig, outputs: &[PathBuf]) -> CliResult {
    let manifest = Manifest {
        config,
        manifest: ManifestInfo {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            outputs: outputs
                .iter()
                .filter_map(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .collect(),
        },
    };
    let text = toml::to_string(&manifest).map_err(Failure::io)?;
    fs::write(dir.join("manifest.toml"), text).map_err(Failure::io)
}

fn create_out_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::io)
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::io)
}

fn print_solution(label: &str, inst: &SystemInstance, sol: &Solution) -> CliResult {
    let a = sol.allocation;
    println!("solver      {label}");
    println!("latency_s   {:e}", sol.latency);
    println!("m_bits      {}", a.m);
    println!("k_bits      {}", a.k);
    println!("alpha       {}", a.alpha);
    println!("gamma       {}", a.gamma);
    let ev = evaluate(inst, &a)?;
    if let Some(bd) = ev.breakdown() {
        println!("T_I         {:e}", bd.t_iot);
        println!("T_F         {:e}", bd.t_fog);
        println!("T_C         {:e}", bd.t_cloud);
        println!("T           {:e}", bd.total);
        println!("t_proc_iot  {:e}", bd.t_proc_iot);
        println!("t_proc_fog  {:e}", bd.t_proc_fog);
        println!("t_proc_cld  {:e}", bd.t_proc_cloud);
        println!("t_comm_if   {:e}", bd.t_comm_if);
        println!("t_comm_fc   {:e}", bd.t_comm_fc);
    }
    Ok(())
}

fn cmd_solve(common: &Common, mut config: RunConfig, solver: SolverArg, compare: bool, command: &str) -> CliResult {
    config.solver = solver;
    let inst = config.instance()?;
    let run_slm = solver != SolverArg::Oracle || compare;
    let run_oracle = solver != SolverArg::Slm || compare;

    let mut code = 0;
    let mut outputs = Vec::new();
    let mut slm_latency = None;
    if run_slm {
        let (sol, trace) = slm_run(&inst, &config.slm_options())?;
        print_solution("slm", &inst, &sol)?;
        println!("iterations  {} ({:?})", trace.records.len(), trace.termination);
        code = match trace.termination {
            Termination::Converged => 0,
            Termination::GridStalled => EXIT_GRID_STALLED,
            Termination::IterationLimit => EXIT_NOT_CONVERGED,
        };
        if let Some(dir) = &common.out_dir {
            create_out_dir(dir)?;
            let path = dir.join("trace.csv");
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).map_err(Failure::io)?;
            write_file(&path, &buf)?;
            outputs.push(path);
        }
        slm_latency = Some(sol.latency);
    }
    if run_oracle {
        if run_slm {
            println!();
        }
        let sol = grid_oracle(&inst, &config.oracle_options())?;
        print_solution("oracle", &inst, &sol)?;
        if let Some(t_slm) = slm_latency {
            let gap = (t_slm - sol.latency) / sol.latency;
            println!("\nrelative_gap {:.6}%", gap * 100.0);
        }
    }
    if let Some(dir) = &common.out_dir {
        create_out_dir(dir)?;
        write_manifest(dir, command, &config, &outputs)?;
    }
    match code {
        0 => Ok(()),
        EXIT_GRID_STALLED => Err(Failure {
            code,
            error: anyhow!("SLM stalled at grid resolution before reaching epsilon"),
        }),
        _ => Err(Failure {
            code,
            error: anyhow!("SLM did not converge within {} iterations", config.max_iterations),
        }),
    }
}

fn print_sweep_summary(name: &str, sweep: &SweepResult) {
    println!("{name}:");
    for p in &sweep.points {
        let series: Vec<String> = p
            .entries
            .iter()
            .map(|e| format!("{}/{} {:.4} ms", e.architecture, e.method, e.mean_latency_s * 1e3))
            .collect();
        println!("  {:>10}  {}", p.sweep_value, series.join("  "));
        for e in p.entries.iter().filter(|e| e.unreliable) {
            eprintln!(
                "warning: {name} at {}: {}/{} unreliable, {} of {} realizations unbounded",
                p.sweep_value,
                e.architecture,
                e.method,
                e.n_unbounded,
                e.n_valid + e.n_unbounded
            );
        }
    }
}

fn cmd_sweep(common: &Common, mut config: RunConfig, figure: Option<Figure>) -> CliResult {
    if figure.is_some() {
        config.figure = figure;
    }
    let dir = common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    create_out_dir(&dir)?;
    let mut outputs = Vec::new();
    for (name, experiment) in config.sweeps() {
        let sweep = run_sweep(&experiment)?;
        let path = dir.join(format!("{name}.csv"));
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf).map_err(Failure::io)?;
        write_file(&path, &buf)?;
        print_sweep_summary(&name, &sweep);
        outputs.push(path);
    }
    write_manifest(&dir, "sweep", &config, &outputs)
}

fn cmd_grid_dump(common: &Common, config: RunConfig) -> CliResult {
    let inst = config.instance()?;
    let cells = grid_dump(&inst, &config.oracle_options())?;
    let mut buf = Vec::new();
    write_grid_csv(&cells, &mut buf).map_err(Failure::io)?;
    match &common.out_dir {
        Some(dir) => {
            create_out_dir(dir)?;
            let path = dir.join("grid.csv");
            write_file(&path, &buf)?;
            write_manifest(dir, "grid-dump", &config, &[path])
        }
        None => io::stdout().write_all(&buf).map_err(Failure::io),
    }
}

fn run(cli: Cli) -> CliResult {
    if cli.common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.threads)
            .build_global()
            .map_err(Failure::config)?;
    }
    let config = resolve_config(&cli.common)?;
    let command = cli.command.name();
    match cli.command {
        Command::Solve { solver, compare } => {
            let solver = solver.unwrap_or(config.solver);
            cmd_solve(&cli.common, config, solver, compare, command)
        }
        Command::Compare => cmd_solve(&cli.common, config, SolverArg::Both, true, command),
        Command::Sweep { figure } => cmd_sweep(&cli.common, config, figure),
        Command::GridDump => cmd_grid_dump(&cli.common, config),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fdpower_core::model::load_config;
use fdpower_core::sim::DEFAULT_WARMUP_SLOTS;
use fdpower_core::sweep::{read_csv_file, write_csv};
use fdpower_core::{
    compare, run_sweep, validate, Comparison, DuplexMode, PowerProfile, Source, SweepRow, SweepSpec, WlanConfig,
};

const EXIT_USAGE: u8 = 1;
const EXIT_FAIL: u8 = 2;

#[derive(Parser)]
#[command(
    name = "fdpower",
    version,
    about = "Per-node power and energy efficiency of half-duplex and full-duplex 802.11 WLANs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form model over a grid
    Analytic(GridArgs),
    /// Run the slot-level simulator over a grid
    Simulate(SimArgs),
    /// Run both and compare them
    Sweep(SweepArgs),
    /// Compare two CSV files, or the analytic and sim rows of one file
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hd,
    Ibfd,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<DuplexMode> {
        match self {
            ModeArg::Hd => vec![DuplexMode::HalfDuplex],
            ModeArg::Ibfd => vec![DuplexMode::InBandFullDuplex],
            ModeArg::Both => DuplexMode::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Args)]
struct GridArgs {
    /// Node counts, AP included (comma separated) [default: 2,5,10,20, or n_nodes from --config]
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    /// Uplink/downlink symmetry ratios (comma separated) [default: 0.1,0.9,1, or symmetry from --config]
    #[arg(long, value_delimiter = ',')]
    symmetry: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// key = value parameter file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SimFlags {
    /// Simulation seeds (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seed: Vec<u64>,
    /// Measured renewal slots per run
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    /// Renewal slots discarded before measuring
    #[arg(long, default_value_t = DEFAULT_WARMUP_SLOTS)]
    warmup: u64,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sim: SimFlags,
    /// Relative tolerance for the analytic/sim comparison
    #[arg(long, default_value_t = 0.03)]
    tolerance: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference CSV (or a sweep CSV holding both sources)
    reference: PathBuf,
    /// Candidate CSV
    candidate: Option<PathBuf>,
    /// Relative tolerance
    #[arg(long, default_value_t = 0.03)]
    tolerance: f64,
}

/// Problems with the invocation itself, reported with exit code 1.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Analytic(grid) => {
            let spec = build_spec(&grid, None, Source::Analytic)?;
            emit(&grid, &run_sweep(&spec)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let spec = build_spec(&args.grid, Some(&args.sim), Source::Sim)?;
            emit(&args.grid, &run_sweep(&spec)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            check_tolerance(args.tolerance)?;
            let mut spec = build_spec(&args.grid, Some(&args.sim), Source::Sim)?;
            spec.sources = vec![Source::Analytic, Source::Sim];
            let rows = run_sweep(&spec)?;
            emit(&args.grid, &rows)?;
            let cmp = compare_sources(&rows, args.tolerance)?;
            eprint!("{cmp}");
            Ok(verdict(&cmp))
        }
        Command::Compare(args) => {
            check_tolerance(args.tolerance)?;
            let reference = read(&args.reference)?;
            let cmp = match &args.candidate {
                Some(path) => compare(&reference, &read(path)?, args.tolerance)?,
                None => compare_sources(&reference, args.tolerance)?,
            };
            print!("{cmp}");
            Ok(verdict(&cmp))
        }
    }
}

fn verdict(cmp: &Comparison) -> ExitCode {
    if cmp.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn check_tolerance(tolerance: f64) -> anyhow::Result<()> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(usage(format!(
            "tolerance must be a non-negative number, got {tolerance}"
        )));
    }
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<Vec<SweepRow>> {
    read_csv_file(path).with_context(|| format!("reading {}", path.display()))
}

fn compare_sources(rows: &[SweepRow], tolerance: f64) -> anyhow::Result<Comparison> {
    let (analytic, sim): (Vec<SweepRow>, Vec<SweepRow>) =
        rows.iter().cloned().partition(|r| r.source == Source::Analytic);
    if analytic.is_empty() || sim.is_empty() {
        bail!("need both analytic and sim rows to compare a single file");
    }
    Ok(compare(&analytic, &sim, tolerance)?)
}

fn build_spec(grid: &GridArgs, sim: Option<&SimFlags>, source: Source) -> anyhow::Result<SweepSpec> {
    let (config, profile, file_n, file_rho) = match &grid.config {
        Some(path) => {
            let (config, profile, traffic) =
                load_config(path).with_context(|| format!("loading {}", path.display()))?;
            validate(config, profile, traffic).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            (config, profile, Some(config.n_nodes), Some(traffic.symmetry))
        }
        None => (WlanConfig::default(), PowerProfile::default(), None, None),
    };
    let defaults = SweepSpec::default();
    let mut spec = SweepSpec {
        n_values: grid
            .nodes
            .clone()
            .or(file_n.map(|n| vec![n]))
            .unwrap_or(defaults.n_values),
        rho_values: grid
            .symmetry
            .clone()
            .or(file_rho.map(|r| vec![r]))
            .unwrap_or(defaults.rho_values),
        modes: grid.mode.modes(),
        sources: vec![source],
        config,
        profile,
        ..defaults
    };
    if let Some(sim) = sim {
        spec.seeds = sim.seed.clone();
        spec.horizon_slots = sim.slots;
        spec.warmup_slots = sim.warmup;
    }
    spec.check().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

fn emit(grid: &GridArgs, rows: &[SweepRow]) -> anyhow::Result<()> {
    let mut body = Vec::new();
    match grid.format {
        Format::Csv => write_csv(rows, &mut body)?,
        Format::Svg => body.extend_from_slice(plot::render(rows).as_bytes()),
    }
    match &grid.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&body)?,
    }
    Ok(())
}

//! `tomocheck`: build states, compute tomograms, check uncertainty relations,
//! and simulate homodyne data.
//!
//! Exit status: 0 success, 1 inequality violated, 2 input error, 3 numerical
//! failure.

mod config;

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tomocheck_core::homodyne::{empirical_trifonov, estimate_moments, sample, sample_from_grid};
use tomocheck_core::inequalities::{heisenberg_lhs_with, trifonov_lhs_with, trifonov_sweep_with, DEFAULT_TOLERANCE};
use tomocheck_core::purity::{purity_classify, purity_overlap, TomogramSource, DEFAULT_TOLERANCE as PURITY_TOLERANCE};
use tomocheck_core::tomography::{canonical_phase, default_x_grid, uniform_phases, DEFAULT_PHASES};
use tomocheck_core::{Error, HomodyneDataset, InequalityReport, Result, StateSpec, TomogramGrid, XGrid};

use config::Config;

const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "tomocheck",
    version,
    about = "Optical tomograms and tomographic uncertainty checks"
)]
struct Cli {
    /// JSON file with default values for numeric flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operations on state files.
    #[command(subcommand)]
    State(StateCommand),
    /// Compute a tomogram grid and write it as CSV.
    Tomogram(TomogramArgs),
    /// Evaluate one inequality or the purity functional.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Scan an inequality over phases.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Sample homodyne data from a state or tomogram.
    Simulate(SimulateArgs),
    /// Estimate moments or the Trifonov combination from homodyne data.
    Estimate(EstimateArgs),
    /// Write two-column CSV for plotting.
    #[command(subcommand)]
    Plotdata(PlotCommand),
}

#[derive(Debug, Subcommand)]
enum StateCommand {
    /// Parse and normalize a state file; print it with its moments.
    Validate {
        /// State JSON file.
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// State JSON file.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Tomogram CSV file.
    #[arg(long)]
    tomogram: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source1 {
    /// First state JSON file.
    #[arg(long)]
    state1: Option<PathBuf>,
    /// First tomogram CSV file.
    #[arg(long)]
    tomogram1: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source2 {
    /// Second state JSON file.
    #[arg(long)]
    state2: Option<PathBuf>,
    /// Second tomogram CSV file.
    #[arg(long)]
    tomogram2: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct OptionalSource2 {
    /// Second state JSON file.
    #[arg(long)]
    state2: Option<PathBuf>,
    /// Second tomogram CSV file.
    #[arg(long)]
    tomogram2: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Number of uniform phases in [0, π).
    #[arg(long)]
    phases: Option<usize>,
    /// Number of x points (default: chosen from the state).
    #[arg(long)]
    nx: Option<usize>,
    /// Half-width of the symmetric x window (default: chosen from the state).
    #[arg(long)]
    x_max: Option<f64>,
}

#[derive(Debug, Args)]
struct TomogramArgs {
    /// State JSON file.
    #[arg(long)]
    state: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum CheckCommand {
    /// Var(0)·Var(π/2) ≥ 1/4.
    Heisenberg {
        #[command(flatten)]
        source: Source,
        /// Absolute slack on the bound (purity: on Tr ρ² = 1).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Two-state Trifonov combination at one phase.
    Trifonov {
        #[command(flatten)]
        first: Source1,
        #[command(flatten)]
        second: Source2,
        /// Phase in radians.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        /// Absolute slack on the bound (purity: on Tr ρ² = 1).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Self-overlap and pure/mixed label; with a second source, the overlap.
    Purity {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        other: OptionalSource2,
        /// Absolute slack on the bound (purity: on Tr ρ² = 1).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum SweepCommand {
    /// Minimum of the Trifonov combination over phases.
    Trifonov {
        #[command(flatten)]
        first: Source1,
        #[command(flatten)]
        second: Source2,
        /// Phase count for state inputs; tomogram inputs use their own phases.
        #[arg(long)]
        phases: Option<usize>,
        /// Absolute slack on the bound (purity: on Tr ρ² = 1).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Phases to sample (comma separated); default 0 and π/2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Samples per phase.
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Homodyne CSV dataset.
    #[arg(long)]
    data: PathBuf,
    /// Second dataset; switches to the empirical Trifonov check.
    #[arg(long, requires = "theta")]
    data2: Option<PathBuf>,
    /// Phases to report (comma separated); default all phases in the data.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum PlotCommand {
    /// Columns x,w of one tomogram row.
    Row {
        #[command(flatten)]
        source: Source,
        /// Phase in radians.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Columns theta,lhs of the Trifonov combination.
    Sweep {
        #[command(flatten)]
        first: Source1,
        #[command(flatten)]
        second: Source2,
        /// Phase count for state inputs; tomogram inputs use their own phases.
        #[arg(long)]
        phases: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    Violated,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let config = Config::load(cli.config.as_deref())?;
    configure_threads(&config)?;
    match cli.command {
        Command::State(StateCommand::Validate { state }) => validate_state(&state),
        Command::Tomogram(args) => {
            let state = load_state(&args.state)?;
            let phases = uniform_phases(args.grid.phases.or(config.phases).unwrap_or(DEFAULT_PHASES));
            let x = x_grid(&state, &args.grid, &config)?;
            TomogramGrid::from_state_with(&state, &phases, x)?.write_csv(&args.out)?;
            Ok(Outcome::Ok)
        }
        Command::Check(CheckCommand::Heisenberg { source, tolerance }) => {
            let w = match (&source.state, &source.tomogram) {
                (Some(p), _) => {
                    let s = load_state(p)?;
                    TomogramGrid::from_state_with(&s, &[0.0, FRAC_PI_2], default_x_grid(&s))?
                }
                (_, Some(p)) => TomogramGrid::read_csv(p)?,
                _ => unreachable!("clap enforces one source"),
            };
            let tol = tolerance.or(config.tolerance).unwrap_or(DEFAULT_TOLERANCE);
            emit_report(&heisenberg_lhs_with(&w, tol)?)
        }
        Command::Check(CheckCommand::Trifonov {
            first,
            second,
            theta,
            tolerance,
        }) => {
            let phases = quadrature_pair(theta);
            let w1 = pair_grid(first.state1.as_deref(), first.tomogram1.as_deref(), &phases)?;
            let w2 = pair_grid(second.state2.as_deref(), second.tomogram2.as_deref(), &phases)?;
            let tol = tolerance.or(config.tolerance).unwrap_or(DEFAULT_TOLERANCE);
            emit_report(&trifonov_lhs_with(&w1, &w2, theta, tol)?)
        }
        Command::Check(CheckCommand::Purity {
            source,
            other,
            tolerance,
        }) => check_purity(&source, &other, tolerance, &config),
        Command::Sweep(SweepCommand::Trifonov {
            first,
            second,
            phases,
            tolerance,
        }) => {
            let (w1, w2, phases) = sweep_grids(&first, &second, phases.or(config.phases))?;
            let tol = tolerance.or(config.tolerance).unwrap_or(DEFAULT_TOLERANCE);
            emit_report(&trifonov_sweep_with(&w1, &w2, &phases, tol)?)
        }
        Command::Simulate(args) => simulate(&args, &config),
        Command::Estimate(args) => estimate(&args),
        Command::Plotdata(PlotCommand::Row {
            source,
            theta,
            grid,
            out,
        }) => {
            let w = match (&source.state, &source.tomogram) {
                (Some(p), _) => {
                    let s = load_state(p)?;
                    let x = x_grid(&s, &grid, &config)?;
                    TomogramGrid::from_state_with(&s, &[canonical_phase(theta).0], x)?
                }
                (_, Some(p)) => TomogramGrid::read_csv(p)?,
                _ => unreachable!("clap enforces one source"),
            };
            let row = w.row_at(theta)?;
            let mut csv = String::from("x,w\n");
            for (x, v) in w.x_grid().points().iter().zip(&row) {
                let _ = writeln!(csv, "{x:.16e},{v:.16e}");
            }
            std::fs::write(out, csv)?;
            Ok(Outcome::Ok)
        }
        Command::Plotdata(PlotCommand::Sweep {
            first,
            second,
            phases,
            out,
        }) => {
            let (w1, w2, phases) = sweep_grids(&first, &second, phases.or(config.phases))?;
            let mut csv = String::from("theta,lhs\n");
            for &th in &phases {
                let r = trifonov_lhs_with(&w1, &w2, th, DEFAULT_TOLERANCE)?;
                let _ = writeln!(csv, "{th:.16e},{:.16e}", r.lhs);
            }
            std::fs::write(out, csv)?;
            Ok(Outcome::Ok)
        }
    }
}

fn configure_threads(config: &Config) -> Result<()> {
    let from_env = match std::env::var("TOMO_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("TOMO_THREADS must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = from_env.or(config.threads) {
        if n == 0 {
            return Err(Error::InvalidInput("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot configure threads: {e}")))?;
    }
    Ok(())
}

fn load_state(path: &Path) -> Result<StateSpec> {
    StateSpec::from_json(&std::fs::read_to_string(path)?)
}

fn validate_state(path: &Path) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Summary {
        valid: bool,
        pure: bool,
        state: serde_json::Value,
        moments: Vec<tomocheck_core::MomentSet>,
    }
    let state = load_state(path)?;
    let summary = Summary {
        valid: true,
        pure: state.is_pure(),
        state: serde_json::from_str(&state.to_json())?,
        moments: vec![state.analytic_moments(0.0), state.analytic_moments(FRAC_PI_2)],
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(Outcome::Ok)
}

fn x_grid(state: &StateSpec, args: &GridArgs, config: &Config) -> Result<XGrid> {
    let auto = default_x_grid(state);
    let half = args.x_max.or(config.x_max).unwrap_or(auto.x_max);
    let n_x = args.nx.or(config.nx).unwrap_or(auto.n_x);
    XGrid::symmetric(half, n_x)
}

/// θ and θ + π/2 reduced to [0, π), sorted.
fn quadrature_pair(theta: f64) -> Vec<f64> {
    let mut phases = vec![canonical_phase(theta).0, canonical_phase(theta + FRAC_PI_2).0];
    phases.sort_by(f64::total_cmp);
    phases
}

fn pair_grid(state: Option<&Path>, tomogram: Option<&Path>, phases: &[f64]) -> Result<TomogramGrid> {
    match (state, tomogram) {
        (Some(p), _) => {
            let s = load_state(p)?;
            TomogramGrid::from_state_with(&s, phases, default_x_grid(&s))
        }
        (_, Some(p)) => TomogramGrid::read_csv(p),
        _ => unreachable!("clap enforces one source"),
    }
}

/// Grids and sweep phases: uniform phases for states, the tomogram's own
/// phases when a file is given.
fn sweep_grids(
    first: &Source1,
    second: &Source2,
    count: Option<usize>,
) -> Result<(TomogramGrid, TomogramGrid, Vec<f64>)> {
    let files = [first.tomogram1.as_deref(), second.tomogram2.as_deref()];
    let from_file = files.iter().flatten().next().map(TomogramGrid::read_csv).transpose()?;
    let phases = match (&from_file, count) {
        (Some(w), _) => w.phases().to_vec(),
        (None, n) => uniform_phases(n.unwrap_or(DEFAULT_PHASES)),
    };
    let w1 = pair_grid(first.state1.as_deref(), first.tomogram1.as_deref(), &phases)?;
    let w2 = pair_grid(second.state2.as_deref(), second.tomogram2.as_deref(), &phases)?;
    Ok((w1, w2, phases))
}

enum Loaded {
    State(StateSpec),
    Grid(TomogramGrid),
}

impl Loaded {
    fn from_paths(state: Option<&Path>, tomogram: Option<&Path>) -> Result<Option<Self>> {
        Ok(match (state, tomogram) {
            (Some(p), _) => Some(Self::State(load_state(p)?)),
            (_, Some(p)) => Some(Self::Grid(TomogramGrid::read_csv(p)?)),
            _ => None,
        })
    }

    fn source(&self) -> TomogramSource<'_> {
        match self {
            Self::State(s) => TomogramSource::State(s),
            Self::Grid(w) => TomogramSource::Grid(w),
        }
    }
}

fn check_purity(source: &Source, other: &OptionalSource2, tolerance: Option<f64>, config: &Config) -> Result<Outcome> {
    let a = Loaded::from_paths(source.state.as_deref(), source.tomogram.as_deref())?.expect("clap enforces one source");
    match Loaded::from_paths(other.state2.as_deref(), other.tomogram2.as_deref())? {
        None => {
            let tol = tolerance.or(config.purity_tolerance).unwrap_or(PURITY_TOLERANCE);
            println!("{}", purity_classify(a.source(), tol)?.to_json());
        }
        Some(b) => {
            let overlap = purity_overlap(a.source(), b.source())?;
            println!("{}", serde_json::json!({ "overlap": overlap }));
        }
    }
    Ok(Outcome::Ok)
}

fn simulate(args: &SimulateArgs, config: &Config) -> Result<Outcome> {
    let count = args.samples.or(config.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let thetas = if args.theta.is_empty() {
        vec![0.0, FRAC_PI_2]
    } else {
        args.theta.clone()
    };
    let schedule: Vec<(f64, usize)> = thetas.iter().map(|&th| (th, count)).collect();
    let ds = match (&args.source.state, &args.source.tomogram) {
        (Some(p), _) => sample(&load_state(p)?, &schedule, seed)?,
        (_, Some(p)) => {
            let label = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            sample_from_grid(&TomogramGrid::read_csv(p)?, &schedule, seed, &label)?
        }
        _ => unreachable!("clap enforces one source"),
    };
    ds.write(&args.out)?;
    Ok(Outcome::Ok)
}

fn estimate(args: &EstimateArgs) -> Result<Outcome> {
    let ds = HomodyneDataset::read(&args.data)?;
    if let Some(path) = &args.data2 {
        if args.theta.len() != 1 {
            return Err(Error::InvalidInput(
                "the Trifonov estimate takes exactly one --theta".into(),
            ));
        }
        let other = HomodyneDataset::read(path)?;
        return emit_report(&empirical_trifonov(&ds, &other, args.theta[0])?);
    }
    let phases = if args.theta.is_empty() {
        ds.phases()
    } else {
        args.theta.clone()
    };
    let estimates = phases
        .iter()
        .map(|&th| estimate_moments(&ds, th))
        .collect::<Result<Vec<_>>>()?;
    println!("{}", serde_json::to_string(&estimates)?);
    Ok(Outcome::Ok)
}

fn emit_report(report: &InequalityReport) -> Result<Outcome> {
    println!("{}", report.to_json());
    Ok(if report.satisfied {
        Outcome::Ok
    } else {
        Outcome::Violated
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadrature_pair_wraps_past_pi() {
        let p = quadrature_pair(3.0 * PI / 4.0);
        assert!((p[0] - PI / 4.0).abs() < 1e-12 && (p[1] - 3.0 * PI / 4.0).abs() < 1e-12);
        assert_eq!(quadrature_pair(0.0), vec![0.0, FRAC_PI_2]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

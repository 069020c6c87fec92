use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mbqc_core::experiment::{
    load_state_file, run_gate_checks, run_sweep, write_report, OutputFormat, StateSource, SweepConfig, SweepMode,
};
use mbqc_core::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mbqc-sim",
    version,
    about = "Deviated-measurement fidelity sweeps and gate-pattern checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate mean fidelity against the entanglement bound over a grid.
    Sweep(SweepArgs),
    /// Check the noiseless gate patterns against their circuit unitaries.
    GateCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Debug, clap::Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Register size for random and zero states (2-8).
    #[arg(long, default_value_t = 2)]
    qubits: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Comma-separated deviation angles in [0, pi]; accepts `pi`, `pi/2`, `3pi/4`.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    u: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    /// `bell`, `zero`, or a state file (qubit count, then one `re im` line per amplitude).
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// A decimal, or `[k]pi[/d]` with optional sign.
fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| format!("bad denominator in {s:?}"))?),
        None => (t, 1.0),
    };
    let k = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(k) => k
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| format!("bad multiplier in {s:?}"))?,
        None => return Err(format!("not an angle: {s:?}")),
    };
    Ok(sign * k * std::f64::consts::PI / den)
}

fn run_sweep_command(args: SweepArgs) -> Result<ExitCode, Error> {
    let state = match args.state.as_deref() {
        None => StateSource::Random,
        Some("bell") => StateSource::Bell,
        Some("zero") => StateSource::Zero,
        Some(path) => StateSource::Custom(load_state_file(path.as_ref())?),
    };
    let config = SweepConfig {
        seed: args.seed,
        n_qubits: args.qubits,
        trials: args.trials,
        epsilon_grid: args.epsilon,
        delta_grid: args.delta,
        u_grid: args.u,
        mode: match args.mode {
            Mode::Analytic => SweepMode::Analytic,
            Mode::Exhaustive => SweepMode::Exhaustive,
            Mode::Sampled => SweepMode::Sampled,
        },
        shots: args.shots,
        state,
    };
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let rows = run_sweep(&config)?;
    write_report(&rows, format, &args.out)?;
    let violations = rows.iter().filter(|r| r.bound_violated).count();
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    eprintln!(
        "{} rows written to {}; min slack {min_slack:.3e}; {violations} bound violations",
        rows.len(),
        args.out.display()
    );
    Ok(if violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => run_sweep_command(args),
        Command::GateCheck { seed, trials } => run_gate_checks(seed, trials).map(|summary| {
            print!("{summary}");
            if summary.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_check_failure() {
                EXIT_CHECK_FAILED
            } else {
                EXIT_USAGE
            })
        }
    }
}

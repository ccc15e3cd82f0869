use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nvconf_cli::{neumark, plot, sweep, validate, CliError, SweepConfig};

/// Overrides the worker thread count.
const THREADS_ENV: &str = "NVCONF_THREADS";

#[derive(Parser)]
#[command(name = "nvconf", version, about = "Maximum-confidence detection of magnetic fields with NV centers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a parameter grid and write one CSV row per point.
    Sweep { config: PathBuf },
    /// Print the POVM, its Neumark unitary and two-level factors at `point`.
    Neumark { config: PathBuf },
    /// Compare Monte Carlo estimates with the closed forms (|z| <= 3).
    Validate { config: PathBuf },
    /// Render the confidence columns of a sweep CSV as SVG.
    Plot {
        csv: PathBuf,
        /// Output file; defaults to the CSV path with an .svg extension.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<SweepConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    SweepConfig::parse(&text)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid { key: THREADS_ENV, value: raw.clone(), reason: "expected a positive integer".into() })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Conflict { message: format!("cannot size the thread pool: {e}") })
}

/// Ok(true) when every check passed.
fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Sweep { config } => {
            sweep::write_sweep(&load(&config)?, &mut stdout)?;
        }
        Command::Neumark { config } => {
            let text = neumark::run_neumark(&load(&config)?)?;
            stdout.write_all(text.as_bytes()).map_err(CliError::io("<stdout>"))?;
        }
        Command::Validate { config } => {
            let report = validate::run_validate(&load(&config)?)?;
            write!(stdout, "{report}").map_err(CliError::io("<stdout>"))?;
            return Ok(report.pass());
        }
        Command::Plot { csv, out } => {
            let table = plot::read_csv(&csv)?;
            let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let svg = plot::render_svg(&table, &title)?;
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&out, svg).map_err(CliError::io(&out))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

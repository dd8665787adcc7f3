use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use regmhd::harness::sweep::{format_sweep_table, write_sweep_table};
use regmhd::harness::{self, format_report, load_config, parse_axis, run_identity_suite, RunOutcome};
use regmhd::Error;

const THREADS_VAR: &str = "REGMHD_THREADS";
const SWEEP_TABLE: &str = "sweep.csv";

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(name = "regmhd", version, about = "Pseudo-spectral runs of 2D regularized MHD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration to stepper.t_end.
    Run { config: PathBuf },
    /// Run the Cartesian product of the given axes in parallel.
    Sweep {
        config: PathBuf,
        /// e.g. beta=0.6:1.0:0.1 or gamma=0.2,0.5
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// Where to write the sweep table. Defaults to sweep.csv in the
        /// configured output directory.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Run the identity suite for the configured system.
    Check { config: PathBuf },
    /// Continue from a checkpoint.
    Resume {
        checkpoint: PathBuf,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        dt: Option<f64>,
        /// Needed for tabulated g and to keep monitor settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize every time series under a directory.
    Report { dir: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::GridMismatch { .. }
        | Error::Precondition(_)
        | Error::Checkpoint { .. }
        | Error::Io(_)
        | Error::Csv(_) => EXIT_CONFIG,
        Error::BlowUp { .. } => EXIT_BLOWUP,
        _ => EXIT_FAILURE,
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR}={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn finish_run(outcome: &RunOutcome) -> u8 {
    let r = &outcome.report;
    println!(
        "t = {} after {} steps ({:.2} s), peak omega_inf = {:.6e}",
        r.final_time, r.steps, r.wall_seconds, r.peak_omega_linf
    );
    match &r.blowup {
        Some(b) => {
            eprintln!("blow-up at t = {}: {}", b.t, b.reason);
            EXIT_BLOWUP
        }
        None => 0,
    }
}

fn execute(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Run { config } => {
            let spec = load_config(&config)?;
            if !spec.system.covered_regime() {
                warn!("{} is outside the covered regime", spec.system.regime_condition());
            }
            let outcome = harness::run_spec(&spec)?;
            if let Some(dir) = &spec.output_dir {
                info!("outputs in {}", dir.display());
            }
            Ok(finish_run(&outcome))
        }
        Command::Sweep { config, axes, table } => {
            let spec = load_config(&config)?;
            let axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>, _>>()?;
            let cells = harness::sweep(&spec, &axes)?;
            print!("{}", format_sweep_table(&cells));
            let path = table.or_else(|| spec.output_dir.as_ref().map(|d| d.join(SWEEP_TABLE)));
            if let Some(path) = path {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)?;
                }
                write_sweep_table(&cells, &path)?;
                info!("sweep table in {}", path.display());
            }
            let failed = cells.iter().any(|c| c.outcome.is_err());
            let blown = cells.iter().any(|c| c.outcome.as_ref().is_ok_and(|o| o.blowup.is_some()));
            Ok(if failed {
                EXIT_CONFIG
            } else if blown {
                EXIT_BLOWUP
            } else {
                0
            })
        }
        Command::Check { config } => {
            let spec = load_config(&config)?;
            let report = run_identity_suite(&spec)?;
            print!("{report}");
            Ok(if report.passed() { 0 } else { EXIT_CHECK })
        }
        Command::Resume {
            checkpoint,
            t_end,
            dt,
            config,
            out,
        } => {
            let base = config.as_deref().map(load_config).transpose()?;
            let outcome = harness::resume(&checkpoint, t_end, dt, base, out)?;
            Ok(finish_run(&outcome))
        }
        Command::Report { dir } => {
            print!("{}", format_report(&harness::report(&dir)?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

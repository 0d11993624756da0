use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delta_engine::backtest::{
    emit_reports, emit_scaling_study, emit_tick_csv, load_config, load_series, run_backtest,
    scaling_study, BacktestError, RunConfig,
};
use delta_engine::intrinsic::{dissect, write_events_csv, Threshold};
use delta_engine::tick::{generate_gbm, parse_tick_csv, GbmParams};

#[derive(Parser)]
#[command(name = "delta-engine", version, about = "Intrinsic-time backtester")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full backtest and write all reports to the config's output_dir.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Dissect a tick CSV at one threshold; writes to stdout unless --out is given.
    Dissect {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling-law study only.
    Laws {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a seeded GBM tick series.
    GenGbm {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 100.0)]
        s0: f64,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_config(path: &Path) -> Result<RunConfig, BacktestError> {
    let text = std::fs::read_to_string(path).map_err(|e| BacktestError::io(path, e))?;
    Ok(load_config(&text)?)
}

fn execute(command: Command) -> Result<(), BacktestError> {
    match command {
        Command::Run { config } => {
            let config = read_config(&config)?;
            let report = run_backtest(&config)?;
            for path in emit_reports(&report, &config.output_dir)? {
                log::info!("wrote {}", path.display());
            }
        }
        Command::Laws { config } => {
            let config = read_config(&config)?;
            let series = load_series(&config)?;
            let study = scaling_study(&config, &series)?;
            for path in emit_scaling_study(&study, &config.output_dir)? {
                log::info!("wrote {}", path.display());
            }
        }
        Command::Dissect { data, delta, out } => {
            let threshold = Threshold::new(delta).map_err(|e| BacktestError::Engine(e.into()))?;
            let file = File::open(&data).map_err(|e| BacktestError::io(&data, e))?;
            let instrument = data
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let series = parse_tick_csv(BufReader::new(file), &instrument)?;
            let events =
                dissect(&series, threshold).map_err(|e| BacktestError::Engine(e.into()))?;
            log::info!("{} events at delta {}", events.len(), threshold);
            match out {
                Some(path) if path.as_os_str() != "-" => {
                    let file = File::create(&path).map_err(|e| BacktestError::io(&path, e))?;
                    write_events_csv(&events, BufWriter::new(file))
                        .map_err(|e| BacktestError::io(&path, e))?;
                }
                _ => {
                    let stdout = io::stdout();
                    let mut lock = BufWriter::new(stdout.lock());
                    write_events_csv(&events, &mut lock)
                        .and_then(|_| lock.flush())
                        .map_err(|e| BacktestError::io("<stdout>", e))?;
                }
            }
        }
        Command::GenGbm {
            seed,
            n,
            sigma,
            mu,
            s0,
            dt,
            out,
        } => {
            let series = generate_gbm(&GbmParams {
                s0,
                mu,
                sigma,
                dt,
                n,
                seed,
            })?;
            emit_tick_csv(&series, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DELTA_ENGINE_LOG", "error"))
        .target(env_logger::Target::Stderr)
        .init();

    // Usage errors are validation errors (exit 1); 2 is reserved for I/O.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

//! Experiment CLI: seeded Monte Carlo sweeps, regressor training, and
//! resource accounting, driven by a JSON config file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doa_ofdm::harness::{
    self, parse_config, ExperimentConfig, ExperimentKind, InitMethod,
};

#[derive(Parser)]
#[command(
    name = "doa-ofdm",
    about = "DoA-aided SIMO-OFDM receiver experiments",
    version
)]
struct Cli {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path override (CSV for sweeps, text for accounting).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Doppler regressor path override (input for sweeps, output for train-fnn).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Emit per-window tracker diagnostics next to the CSV.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER vs SNR at fixed maximum speed.
    BerSnr,
    /// BER vs maximum speed at fixed SNR.
    BerSpeed,
    /// Weighted Doppler RMSE vs SNR with the MCRLB overlay.
    RmseSnr,
    /// Train the Doppler regressor on synthetic pilots.
    TrainFnn,
    /// Pilot overhead, complexity, and decoding latency figures.
    Accounting,
}

fn kind_of(command: &Command) -> ExperimentKind {
    match command {
        Command::BerSnr => ExperimentKind::BerVsSnr,
        Command::BerSpeed => ExperimentKind::BerVsSpeed,
        Command::RmseSnr => ExperimentKind::RmseVsSnr,
        Command::TrainFnn => ExperimentKind::TrainFnn,
        Command::Accounting => ExperimentKind::Accounting,
    }
}

fn load_config(cli: &Cli) -> doa_ofdm::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_path = Some(out.display().to_string());
    }
    if let Some(model) = &cli.model {
        cfg.model_path = Some(model.display().to_string());
    }
    let kind = kind_of(&cli.command);
    if let Some(file_kind) = cfg.kind {
        if file_kind != kind {
            return Err(doa_ofdm::Error::Config(format!(
                "config file says kind {file_kind:?} but the subcommand asks for {kind:?}"
            )));
        }
    }
    cfg.kind = Some(kind);
    Ok(cfg)
}

fn run(cli: &Cli) -> doa_ofdm::Result<()> {
    if let Ok(threads) = std::env::var("DOA_OFDM_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| doa_ofdm::Error::Config("DOA_OFDM_THREADS must be an integer".into()))?;
        // Ignore the error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load_config(cli)?;
    let kind = kind_of(&cli.command);
    match kind {
        ExperimentKind::Accounting => {
            let report = harness::accounting(&cfg)?;
            print!("{report}");
            if let Some(path) = &cfg.out_path {
                std::fs::write(path, report.to_string())?;
                eprintln!("wrote {path}");
            }
        }
        ExperimentKind::TrainFnn => {
            if cfg.model_path.is_none() {
                return Err(doa_ofdm::Error::Config(
                    "train-fnn needs --model (or model_path) for the trained regressor".into(),
                ));
            }
            let (_, report) = harness::train_fnn_experiment(&cfg)?;
            println!(
                "trained: initial val MSE {:.4e}, best val MSE {:.4e} over {} epochs",
                report.initial_val_mse,
                report.best_val_mse,
                report.val_mse_history.len()
            );
            println!("model written to {}", cfg.model_path.as_deref().unwrap_or("?"));
        }
        _ => {
            if cfg.init == InitMethod::Dl && cfg.model_path.is_none() {
                return Err(doa_ofdm::Error::Config(
                    "dl init needs --model pointing at a trained regressor".into(),
                ));
            }
            let result = harness::run_kind(&cfg, kind, cli.verbose)?;
            let csv = harness::render_csv(&result.points);
            match &cfg.out_path {
                Some(path) => {
                    std::fs::write(path, &csv)?;
                    eprintln!(
                        "wrote {path} ({} points, {:.1} s)",
                        result.points.len(),
                        result.wall_clock.as_secs_f64()
                    );
                    if cli.verbose {
                        let diag_path = format!("{path}.diag.csv");
                        std::fs::write(&diag_path, harness::render_diag_csv(&result.diagnostics))?;
                        eprintln!("wrote {diag_path} ({} rows)", result.diagnostics.len());
                    }
                }
                None => {
                    print!("{csv}");
                    if cli.verbose {
                        eprint!("{}", harness::render_diag_csv(&result.diagnostics));
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

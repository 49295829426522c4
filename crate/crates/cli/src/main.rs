use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nvfield_cli::{commands, CliError, OutputDir, RunConfig};

#[derive(Parser)]
#[command(name = "nvfield", version, about = "NV-centre electrometry of electrolyte field distributions")]
struct Cli {
    /// JSON run configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Field statistics over the concentration grid and the sqrt(c) fit.
    FieldStats,
    /// Run a sequence over the tau sweep.
    Fid,
    /// Ensemble-averaged Hahn echo and its T2 fit.
    Hahn,
    /// Magnitude spectrum and peak table of a sequence trace.
    Spectrum,
    /// Recover the field from the three-sequence protocol.
    Reconstruct,
    /// Fit T2_E = alpha E_m / sigma_E^2 over the (E_m, sigma_E) grid.
    FitAlpha,
    /// Echo T2 as a function of the field resampling step.
    DtSweep,
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let mut out = OutputDir::create(&cli.out)?;
    let cmd = match cli.command {
        Command::FieldStats => commands::field_stats,
        Command::Fid => commands::fid,
        Command::Hahn => commands::hahn,
        Command::Spectrum => commands::spectrum,
        Command::Reconstruct => commands::reconstruct,
        Command::FitAlpha => commands::fit_alpha_cmd,
        Command::DtSweep => commands::dt_sweep,
    };
    let result = pool.install(|| cmd(&cfg, &mut out));
    for p in out.written() {
        log::info!("wrote {}", p.display());
    }
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nvfield: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hempss::{run, write_report, CliError, Command, Options, RunConfig};

/// Heterodyne multiphoton squeezed states: parameter checks, photon
/// statistics, oracle cross-checks and pump planning.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `out` from the config, else `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Command tolerance (validation, oracle agreement, frequency balance).
    #[arg(long)]
    tol: Option<f64>,
    /// JSON instead of text on stdout (validate).
    #[arg(long)]
    json: bool,
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::load(&cli.config)?;
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let opts = Options { tol: cli.tol, json: cli.json };
    let report = pool.install(|| run(cli.command, &cfg, &opts))?;
    let dir = cli.out.or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    write_report(&report, &dir)?;
    print!("{}", report.stdout);
    Ok(report.success)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hempss: {e}");
            e.into()
        }
    }
}

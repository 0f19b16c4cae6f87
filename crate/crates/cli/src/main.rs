use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lightcone_cli::{
    parse_config, run_scenario, RunError, RunSummary, Scenario, DEFAULT_CONFIG, DEFAULT_OUTPUT_DIR, THREADS_ENV,
};

/// Light-cone experiments for Lindblad dynamics on a 1-D lattice.
#[derive(Parser)]
#[command(name = "lindblad-lightcone", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for CSV, JSON and SVG outputs; overrides the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads (0 = all cores); LINDBLAD_LIGHTCONE_THREADS wins if set.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in the configuration.
    Run { config: PathBuf },
    /// Run only the assumption audit for the configured model.
    Audit { config: PathBuf },
    /// Print a documented configuration with every default.
    PrintDefaults,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();

    let (path, audit_only) = match &cli.command {
        Command::PrintDefaults => {
            print!("{DEFAULT_CONFIG}");
            return ExitCode::SUCCESS;
        }
        Command::Run { config } => (config, false),
        Command::Audit { config } => (config, true),
    };
    match run(path, audit_only, &cli) {
        Ok(summary) => {
            report(&summary);
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(path: &Path, audit_only: bool, cli: &Cli) -> Result<RunSummary, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(RunError::Config)?;
    if audit_only {
        cfg.scenario = Scenario::Audit;
    }
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            RunError::Config(lightcone_cli::ConfigErrors(vec![format!(
                "{THREADS_ENV} = \"{v}\" is not a nonnegative integer"
            )]))
        })?,
        Err(_) => cli.threads.unwrap_or(cfg.threads),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| RunError::Io(format!("thread pool: {e}")))?;
    let out_dir = cli
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    run_scenario(&cfg, &out_dir)
}

fn report(summary: &RunSummary) {
    println!("scenario {}: κ = {:.6}", summary.scenario, summary.kappa);
    for check in &summary.checks {
        let value = check.value.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
        let bound = check
            .threshold
            .map(|t| format!(" {} {t:.4e}", check.relation))
            .unwrap_or_default();
        println!(
            "  [{}] {}: {value}{bound}",
            if check.passed { "pass" } else { "FAIL" },
            check.name
        );
    }
    println!(
        "wrote {} in {:.1} s",
        summary.artifacts.join(", "),
        summary.wall_clock_seconds
    );
}

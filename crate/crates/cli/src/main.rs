use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cli::{config, commands, selftest, CliError};

#[derive(Parser)]
#[command(name = "azchess", about = "Chess-network interpretability pipeline")]
struct Cli {
    /// Run configuration file (key = value with [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides paths.out from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Recompute cached artifacts even when they exist.
    #[arg(long, global = true)]
    force: bool,
    /// Replace the corpus seed from the config.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate concepts over every unique position in the PGN corpus.
    ExtractConcepts {
        /// Comma-separated concept names; defaults to concepts.names.
        #[arg(long, value_delimiter = ',')]
        concepts: Vec<String>,
    },
    /// Write activation caches for every (checkpoint, layer).
    Activations,
    /// Fit the what-when-where probe score grid.
    Probe,
    /// Per-position probe residual report.
    Residuals,
    /// Piece-value regression across checkpoints.
    ValueReg,
    /// Non-negative factorization of per-square activations.
    Nmf,
    /// Activation-input covariance map.
    Cov,
    /// Opening distributions of the corpus and the policy priors.
    Openings,
    /// Run the invariant suite; needs no config.
    Selftest,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    if matches!(cli.cmd, Command::Selftest) {
        return selftest::run_selftest();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --config".into()))?;
    let mut cfg = config::load_config(config_path)?;
    if let Some(seed) = cli.seed_override {
        cfg.corpus_seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let lines = match cli.cmd {
        Command::ExtractConcepts { concepts } => {
            commands::cmd_extract_concepts(&cfg, &out, &concepts)?
        }
        Command::Activations => commands::cmd_activations(&cfg, &out, cli.force)?,
        Command::Probe => commands::cmd_probe(&cfg, &out, cli.force)?,
        Command::Residuals => commands::cmd_residuals(&cfg, &out, cli.force)?,
        Command::ValueReg => commands::cmd_value_reg(&cfg, &out)?,
        Command::Nmf => commands::cmd_nmf(&cfg, &out)?,
        Command::Cov => commands::cmd_cov(&cfg, &out)?,
        Command::Openings => commands::cmd_openings(&cfg, &out)?,
        Command::Selftest => unreachable!(),
    };
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits; real parse
            // errors are usage errors.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

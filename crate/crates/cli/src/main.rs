use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tailcop::data::{load_csv, transform, Transform};
use tailcop::diagnostics::{diagnose, DEFAULT_LAGS};
use tailcop::marginal::PitMode;
use tailcop::pipeline::{
    run_pipeline, run_simulation, write_artifacts, write_simulation, RunConfig, RunStatus, SimConfig,
};

/// Overrides the output directory of `fit` and `simulate`.
const OUTPUT_ENV: &str = "TAILCOP_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "tailcop",
    version,
    about = "EGARCH-GED marginals and static/dynamic copulas with tail-dependence paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a TOML config.
    Fit {
        config: PathBuf,
        #[arg(long, env = OUTPUT_ENV)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pit_mode: Option<PitMode>,
        /// Do not print the comparison summary.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Draw a synthetic data set from a TOML simulation config.
    Simulate {
        config: PathBuf,
        #[arg(long, env = OUTPUT_ENV)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Print the diagnostic battery for one CSV column as JSON.
    Diagnose {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value = "log-return")]
        transform: Transform,
        #[arg(long, default_value_t = DEFAULT_LAGS)]
        lags: usize,
    },
}

fn fit(
    config: PathBuf,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    pit_mode: Option<PitMode>,
    quiet: bool,
) -> tailcop::Result<RunStatus> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(d) = output_dir {
        cfg.output_dir = d;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = pit_mode {
        cfg.pit_mode = m;
    }
    let art = run_pipeline(&cfg)?;
    let files = write_artifacts(&art, &cfg.output_dir)?;
    if !quiet {
        for s in &art.series {
            for e in &s.errors {
                eprintln!("warning: {}: {e}", s.name);
            }
        }
        for p in &art.pairs {
            println!("{} ~ {} (n = {})", p.first, p.second, p.n);
            for c in &p.cells {
                let mark = if p.best.is_some_and(|b| b.family == c.family && b.mode == c.mode) {
                    "*"
                } else {
                    " "
                };
                match &c.report {
                    Some(r) => println!(
                        "{mark} {:<10} {:<8} ll {:>12.3}  k {}  aic {:>12.3}",
                        c.family.to_string(),
                        c.mode.to_string(),
                        r.loglik,
                        r.k,
                        r.aic
                    ),
                    None => println!(
                        "  {:<10} {:<8} failed: {}",
                        c.family.to_string(),
                        c.mode.to_string(),
                        c.error.as_deref().unwrap_or("")
                    ),
                }
            }
        }
        println!("wrote {} files to {}", files.len(), cfg.output_dir.display());
    }
    Ok(art.status)
}

fn simulate(config: PathBuf, output_dir: Option<PathBuf>, seed: Option<u64>, n: Option<usize>) -> tailcop::Result<()> {
    let mut cfg = SimConfig::load(&config)?;
    if let Some(d) = output_dir {
        cfg.output_dir = d;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    let sim = run_simulation(&cfg)?;
    for f in write_simulation(&sim, &cfg.output_dir)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> tailcop::Result<RunStatus> {
    match cli.command {
        Command::Fit {
            config,
            output_dir,
            seed,
            pit_mode,
            quiet,
        } => fit(config, output_dir, seed, pit_mode, quiet),
        Command::Simulate {
            config,
            output_dir,
            seed,
            n,
        } => simulate(config, output_dir, seed, n).map(|_| RunStatus::Complete),
        Command::Diagnose {
            csv,
            column,
            transform: how,
            lags,
        } => {
            let series = transform(&load_csv(&csv, &column)?, how)?;
            let report = diagnose(&series.returns, lags)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(RunStatus::Complete)
        }
    }
}

fn main() -> ExitCode {
    // usage errors are hard failures; 2 is reserved for partial runs
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(RunStatus::Complete) => ExitCode::SUCCESS,
        Ok(RunStatus::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

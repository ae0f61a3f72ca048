use clap::{Parser, Subcommand};
use fraceig::experiments::Verdict;
use fraceig_cli::config::{parse_config, OutputFormat};
use fraceig_cli::{dispatch, emit_config, export_operator, Experiment};
use std::path::PathBuf;
use std::process::ExitCode;

/// Batch front end for the eigenvalue/Monte Carlo experiment runners.
#[derive(Parser)]
#[command(name = "fraceig", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output directory for reports and plot data.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (falls back to FRACEIG_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report format: json|csv|both (overrides the configuration).
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a JSON configuration file.
    Run { config: PathBuf },
    /// Parse, validate, and echo the normalized configuration.
    Validate { config: PathBuf },
    /// List the available experiment tags.
    ListExperiments,
    /// Assemble the configured operator and dump it as matrix-market text.
    ExportOperator { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    configure_threads(cli.threads);
    match &cli.cmd {
        Cmd::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<14} {}", e.tag(), e.describe());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Validate { config } => {
            let text = std::fs::read_to_string(config)?;
            let cfg = load(&text, &cli)?;
            println!("{}", emit_config(&cfg));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(config)?;
            let cfg = load(&text, &cli)?;
            match dispatch(&cfg, &cli.out) {
                Ok(outcome) => {
                    for f in &outcome.files {
                        println!("wrote {}", f.display());
                    }
                    println!("verdict: {}", outcome.verdict);
                    Ok(match outcome.verdict {
                        Verdict::Violated => ExitCode::from(1),
                        _ => ExitCode::SUCCESS,
                    })
                }
                Err(err) => {
                    eprintln!("runner error (see report.json): {err}");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Cmd::ExportOperator { config } => {
            let text = std::fs::read_to_string(config)?;
            let cfg = load(&text, &cli)?;
            let path = export_operator(&cfg, &cli.out)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(text: &str, cli: &Cli) -> Result<fraceig_cli::RunConfig, Box<dyn std::error::Error>> {
    let mut cfg = parse_config(text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(fmt) = &cli.format {
        cfg.format = OutputFormat::parse(fmt)?;
    }
    Ok(cfg)
}

#[cfg(feature = "parallel")]
fn configure_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("FRACEIG_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // A second invocation in-process would fail; that is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(flag: Option<usize>) {
    if flag.is_some() || std::env::var("FRACEIG_THREADS").is_ok() {
        eprintln!("note: built without the parallel feature; --threads ignored");
    }
}

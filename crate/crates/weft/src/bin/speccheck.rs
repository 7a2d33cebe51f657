use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use weft::speccheck::Harness;

#[derive(Parser)]
#[command(
    name = "speccheck",
    version,
    about = "Check Hoare-triple specifications against the engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every .triple file in a suite directory.
    Run {
        /// Directory of .triple files.
        #[arg(long, value_name = "DIR")]
        suite: PathBuf,

        /// Site root for triples that run the request pipeline.
        #[arg(long, value_name = "DIR")]
        root: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { suite, root } => {
            let mut harness = Harness::new();
            if let Some(root) = root {
                harness = harness.with_root(root);
            }
            let report = match harness.run_suite(&suite) {
                Ok(report) => report,
                Err(err) => {
                    eprintln!("speccheck: {err}");
                    return ExitCode::FAILURE;
                }
            };
            for triple in &report.reports {
                if triple.passed {
                    println!("PASS {}", triple.name);
                } else {
                    println!(
                        "FAIL {}: {}",
                        triple.name,
                        triple.detail.as_deref().unwrap_or("unspecified")
                    );
                }
            }
            let failed = report.failures().count();
            if failed > 0 {
                eprintln!("speccheck: {failed} of {} triples failed", report.reports.len());
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}

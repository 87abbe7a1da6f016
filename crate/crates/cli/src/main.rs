use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use reprotest_cli::{commands, RunConfig};
use tracing::level_filters::LevelFilter;

#[derive(Parser)]
#[command(
    name = "reprotest",
    version,
    about = "Generate and rank bug-reproducing tests from bug reports"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, default_value = "reprotest.toml")]
    config: PathBuf,
    /// More log output; repeat for trace level.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, run and rank candidate tests for one bug report.
    Reproduce {
        #[arg(long)]
        report: PathBuf,
        /// Buggy project tree.
        #[arg(long)]
        buggy: PathBuf,
        /// Fixed project tree.
        #[arg(long)]
        fixed: PathBuf,
        #[arg(long)]
        buggy_ref: Option<String>,
        #[arg(long)]
        fixed_ref: Option<String>,
        /// Output directory; overrides the configured one.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Agreement threshold; overrides the configured one.
        #[arg(long)]
        thr: Option<usize>,
    },
    /// Reproduce every bug of a dataset manifest and compute ranking metrics.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add random-ranking baseline columns.
        #[arg(long)]
        random: bool,
        /// Cutoffs, e.g. `1,3,5`; overrides the configured ones.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Measure issue-linked test additions in commit history exports.
    Mine {
        /// Repository export directories, or parents of them.
        #[arg(required = true)]
        repos: Vec<PathBuf>,
        /// Also write mining.json and mining.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fill the replay store for one report.
    Record {
        #[arg(long)]
        report: PathBuf,
        /// JSON array of completion texts to store instead of querying the endpoint.
        #[arg(long)]
        import: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8> {
    if let Command::Mine { repos, out } = &cli.command {
        let (_, table) = commands::mine(repos, out.as_deref())?;
        print!("{table}");
        return Ok(0);
    }
    let config = RunConfig::load(&cli.config)?;
    match cli.command {
        Command::Reproduce {
            report,
            buggy,
            fixed,
            buggy_ref,
            fixed_ref,
            out,
            thr,
        } => {
            let outcome = commands::reproduce(
                config,
                commands::ReproduceArgs {
                    report,
                    buggy,
                    fixed,
                    buggy_ref,
                    fixed_ref,
                    out,
                    thr,
                },
            )?;
            let s = &outcome.run.suggestions;
            println!(
                "{}: fib={} clusters={} selected={} ranked={}",
                outcome.run.report_id,
                outcome.run.outcome.n_fib,
                s.clusters.len(),
                s.selected,
                s.ranking.len()
            );
            for (i, e) in s.ranking.iter().enumerate() {
                println!("{:>3}. {}", i + 1, e.id);
            }
            println!("output: {}", outcome.bug_dir.display());
            Ok(outcome.exit_code())
        }
        Command::Evaluate {
            manifest,
            out,
            random,
            ns,
        } => {
            let outcome = commands::evaluate(
                config,
                commands::EvaluateArgs {
                    manifest,
                    out,
                    random,
                    ns,
                },
            )?;
            print!("{}", outcome.table);
            println!("output: {}", outcome.out_dir.display());
            Ok(0)
        }
        Command::Record { report, import } => {
            let n = commands::record(config, commands::RecordArgs { report, import })?;
            println!("recorded {n} completions");
            Ok(0)
        }
        Command::Mine { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::WARN,
        1 => LevelFilter::INFO,
        2 => LevelFilter::DEBUG,
        _ => LevelFilter::TRACE,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

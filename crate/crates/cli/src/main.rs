use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use transversal_cli::hilbert::{self, DEFAULT_DELTA};
use transversal_cli::report::{write_atomic, Report, REPORT_FORMAT};
use transversal_cli::{exit, run_corpus, CliError, Overrides, Scenario};
use transversal_core::transversality::Budget;

#[derive(Debug, Parser)]
#[command(name = "transversal", version, about = "Run transversality scenarios and write JSON/CSV reports")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "TRANSVERSAL_OUT", default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the sample budget.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Override solver tolerances.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for corpus runs.
    #[arg(long, global = true, default_value_t = 4)]
    workers: usize,
    /// Report schema version.
    #[arg(long, global = true, default_value_t = REPORT_FORMAT)]
    format: u32,
    /// Also write `<id>.timings.json` with wall-clock times.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { scenario: PathBuf },
    /// Run every `*.toml` scenario in a directory.
    Corpus { dir: PathBuf },
    /// Subtransversality ratio of the truncated cube against a ray, dimensions 1..=nmax.
    Hilbert {
        nmax: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::CONFIG as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    if cli.format != REPORT_FORMAT {
        return Err(CliError::Config(format!("unsupported report format {} (supported: {REPORT_FORMAT})", cli.format)));
    }
    if cli.workers == 0 {
        return Err(CliError::Config("--workers must be positive".into()));
    }
    let overrides = Overrides { seed: cli.seed, samples: cli.budget, tol: cli.tol };
    match &cli.command {
        Command::Run { scenario } => {
            let mut sc = Scenario::load(scenario)?;
            sc.apply(overrides)?;
            let output = Report::run(&sc);
            let path = output.write(&cli.out, cli.timings)?;
            let r = &output.report;
            println!(
                "{}: {} analyses, {} failed, {} discrepancies -> {}",
                r.scenario,
                r.analyses.len(),
                r.errors(),
                r.discrepancies,
                path.display()
            );
            for a in &r.analyses {
                match &a.error {
                    Some(e) => println!("  {:<26} error: {e}", a.name),
                    None => {
                        let v: Vec<String> = a.verdicts.iter().map(|(k, v)| format!("{k}={v}")).collect();
                        let flag = if a.discrepancy { "  DISCREPANCY" } else { "" };
                        println!("  {:<26} {}{flag}", a.name, v.join(" "));
                    }
                }
            }
            Ok(if r.discrepancies > 0 { exit::DISCREPANCY } else { exit::CLEAN })
        }
        Command::Corpus { dir } => {
            let summary = run_corpus(dir, &cli.out, overrides, cli.workers, cli.timings)?;
            print!("{}", summary.to_table());
            println!(
                "{} scenarios, {} configuration errors, {} discrepancies",
                summary.rows.len(),
                summary.config_errors(),
                summary.discrepancies()
            );
            Ok(summary.exit_code())
        }
        Command::Hilbert { nmax, delta } => {
            let budget = Budget::new(cli.budget.unwrap_or(Budget::default().samples), cli.seed.unwrap_or(0));
            let rows = hilbert::hilbert_cube_scaling(*nmax, *delta, budget)?;
            let csv = hilbert::to_csv(&rows)?;
            std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io { path: cli.out.clone(), source: e })?;
            write_atomic(&cli.out.join("hilbert.csv"), &csv)?;
            print!("{csv}");
            Ok(exit::CLEAN)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vielbein::job::{run, JobConfig, JobError};
use vielbein::solutions::CATALOGUE;

#[derive(Parser)]
#[command(name = "vielbein", version, about = "Checks vielbein field equations on exact and random configurations")]
struct Cli {
    /// Print the named solutions and their parameters.
    #[arg(long)]
    list_solutions: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON job description.
    Run {
        config: PathBuf,
        /// Write report.json (and report.csv) here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit the per-point CSV dump.
        #[arg(long)]
        csv: bool,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn execute(config: PathBuf, out: Option<PathBuf>, csv: bool, seed: Option<u64>) -> Result<bool, JobError> {
    let text = std::fs::read_to_string(&config).map_err(|e| JobError::Config(format!("{}: {e}", config.display())))?;
    let mut cfg = JobConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run(&cfg)?;
    let csv = csv || cfg.output.csv;
    match out.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)) {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("report.json"), report.to_json())?;
            if csv {
                std::fs::write(dir.join("report.csv"), report.to_csv())?;
            }
        }
        None => {
            print!("{}", report.to_json());
            if csv {
                print!("{}", report.to_csv());
            }
        }
    }
    for c in &report.checks {
        eprintln!(
            "{:<18} max {:.3e}  tol {:.1e}  {}",
            c.check.id(),
            c.max,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_solutions {
        for (name, params) in CATALOGUE {
            println!("{name:<20} {params}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(Command::Run { config, out, csv, seed }) = cli.command else {
        eprintln!("nothing to do; try `vielbein run <config.json>` or `--list-solutions`");
        return ExitCode::from(2);
    };
    match execute(config, out, csv, seed) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

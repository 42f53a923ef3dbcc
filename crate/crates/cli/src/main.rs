use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use updown::exec::Execution;
use updown::harness::{self, parse_config, registry, RunConfig, RunOptions};

/// Simulate reflected storage processes with up/down regimes and check the
/// workload decomposition against the simulated paths.
#[derive(Parser)]
#[command(name = "updown", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write skeleton and boundary CSVs.
    Simulate(Source),
    /// Simulate, estimate and check every applicable criterion.
    Run {
        #[command(flatten)]
        source: Source,
        /// Also write per-replica path CSVs under OUT/paths.
        #[arg(long)]
        emit_paths: bool,
    },
    /// Re-evaluate a stored report without simulating.
    Verify {
        /// Report directory written by `run`.
        report: PathBuf,
    },
    /// Built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
    /// Print a scenario's full run configuration as JSON.
    Show { name: String },
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name (see `scenarios list`).
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Output directory; overrides the configuration's `output_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed_override: Option<u64>,
    /// Override the replica count.
    #[arg(long, value_name = "N")]
    replicas: Option<u64>,
    /// Override the horizon.
    #[arg(long, value_name = "T")]
    horizon: Option<f64>,
    /// Run replicas on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Source {
    fn load(&self) -> Result<RunConfig, String> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                parse_config(&text).map_err(|e| e.to_string())?
            }
            (None, Some(name)) => {
                harness::lookup(name).ok_or_else(|| format!("unknown scenario {name:?} (try `scenarios list`)"))?
            }
            (None, None) => unreachable!("clap requires one source"),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed_override {
            cfg.scenario.seed = seed;
        }
        if let Some(n) = self.replicas {
            cfg.replicas = n;
        }
        if let Some(h) = self.horizon {
            cfg.scenario.horizon = h;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(source) => {
            let cfg = match source.load() {
                Ok(c) => c,
                Err(e) => return usage_error(e),
            };
            match harness::simulate_paths(&cfg, &cfg.output_dir, source.execution()) {
                Ok(files) => {
                    println!("wrote {} path file(s) to {}", files.len(), cfg.output_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(e),
            }
        }
        Command::Run { source, emit_paths } => {
            let cfg = match source.load() {
                Ok(c) => c,
                Err(e) => return usage_error(e),
            };
            let options = RunOptions {
                emit_paths,
                execution: source.execution(),
            };
            match harness::run(&cfg, options) {
                Ok(outcome) => {
                    for c in &outcome.summary.criteria {
                        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.describe());
                    }
                    for note in &outcome.summary.notes {
                        println!("note: {note}");
                    }
                    println!("report written to {}", outcome.output_dir.display());
                    ExitCode::from(outcome.summary.exit_code() as u8)
                }
                Err(e) => usage_error(e),
            }
        }
        Command::Verify { report } => match harness::verify(&report) {
            Ok(v) => {
                for c in &v.failures {
                    println!("FAIL {}", c.describe());
                }
                for c in &v.altered_flags {
                    println!("stored flag disagrees: {}", c.label());
                }
                println!(
                    "{} of {} criteria pass",
                    v.summary.criteria.len() - v.failures.len(),
                    v.summary.criteria.len()
                );
                ExitCode::from(v.exit_code() as u8)
            }
            Err(e) => usage_error(e),
        },
        Command::Scenarios { action } => match action {
            ScenarioAction::List => {
                for s in registry() {
                    println!("{}  {}", s.name, s.summary);
                }
                ExitCode::SUCCESS
            }
            ScenarioAction::Show { name } => match harness::lookup(&name) {
                Some(cfg) => {
                    println!("{}", cfg.to_json_pretty());
                    ExitCode::SUCCESS
                }
                None => usage_error(format!("unknown scenario {name:?}")),
            },
        },
    }
}

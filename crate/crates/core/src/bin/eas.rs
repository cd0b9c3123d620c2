use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eas_sphere::config::{validate_config_with, ExperimentConfig};
use eas_sphere::experiment::{self, read_points, write_points};
use eas_sphere::{eas, Density, Error};

/// Expand-and-sparsify density and mode estimation on the unit sphere.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model on the configured training sample and save it.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Model file to write [default: <output_dir>/model.json].
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Evaluate a saved model on points from a CSV, or score it against the
    /// configured mixture.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// CSV of query points with an x0..x{d-1} header.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Where to write densities [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the mode, or all modes, of the configured mixture.
    Modes {
        #[command(flatten)]
        common: Common,
        /// Only the sample maximizer of the estimate.
        #[arg(long)]
        single: bool,
    },
    /// Monte Carlo geometry of the regions of a random bank.
    Diagnostics {
        #[command(flatten)]
        common: Common,
    },
    /// Expansion-factor sweep against kNN and KDE baselines.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// Error against sample size with m = n.
    Rate {
        #[command(flatten)]
        common: Common,
    },
}

/// Flags shared by every subcommand; each overrides the config key of the
/// same name.
#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Arbitrary override, e.g. `--set modes.alpha=2.0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_val: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

impl Common {
    fn resolve(&self, task: Option<&str>) -> Result<ExperimentConfig, Error> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)?,
            None => String::new(),
        };
        let mut overrides = Vec::new();
        if let Some(task) = task {
            overrides.push(format!("task = \"{task}\""));
        }
        let numeric = [
            ("seed", self.seed.map(|v| v as usize)),
            ("d", self.d),
            ("n_train", self.n_train),
            ("n_val", self.n_val),
            ("n_test", self.n_test),
            ("trials", self.trials),
            ("m", self.m),
            ("k", self.k),
        ];
        overrides.extend(numeric.iter().filter_map(|(key, v)| v.map(|v| format!("{key}={v}"))));
        if let Some(dir) = &self.output_dir {
            overrides.push(format!("output_dir={}", toml_string(dir)));
        }
        overrides.extend(self.set.iter().cloned());
        validate_config_with(&text, &overrides).map_err(Error::Config)
    }
}

fn toml_string(path: &Path) -> String {
    format!("{:?}", path.display().to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(errors)) => {
            eprintln!("error: invalid configuration\n{errors}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(cli: Cli) -> Result<(), Error> {
    let workers = experiment::init_threads()?;
    match cli.command {
        Command::Fit { common, model } => {
            let config = common.resolve(None)?;
            let path = model.unwrap_or_else(|| config.output_dir.join("model.json"));
            let fitted = experiment::fit_model(&config, &path)?;
            println!(
                "fitted d={} m={} k={} n={} -> {}",
                fitted.dim(),
                fitted.m(),
                fitted.k(),
                fitted.n(),
                path.display()
            );
        }
        Command::Eval {
            common,
            model,
            points,
            out,
        } => {
            let fitted = eas::persist::load(&model)?;
            match points {
                Some(points) => {
                    let queries = read_points(&points)?;
                    let values = fitted.density_batch(&queries)?;
                    let table = Some(("fhat", values.as_slice()));
                    match out {
                        Some(path) => write_points(&queries, table, std::fs::File::create(path)?)?,
                        None => write_points(&queries, table, std::io::stdout().lock())?,
                    }
                }
                None => {
                    let config = common.resolve(None)?;
                    let report = experiment::evaluate_model(&config, &fitted)?;
                    println!("{}", serde_json::to_string_pretty(&report)?);
                }
            }
        }
        Command::Modes { common, single } => {
            let config = common.resolve(Some(if single { "mode-single" } else { "mode-multi" }))?;
            finish(experiment::run(&config)?, workers);
        }
        Command::Diagnostics { common } => {
            finish(experiment::run(&common.resolve(Some("diagnostics"))?)?, workers);
        }
        Command::Experiment { common } => {
            finish(experiment::run(&common.resolve(Some("density-experiment"))?)?, workers);
        }
        Command::Rate { common } => {
            finish(experiment::run(&common.resolve(Some("rate"))?)?, workers);
        }
    }
    Ok(())
}

fn finish(report: experiment::RunReport, workers: usize) {
    for file in &report.files {
        println!("wrote {}", file.display());
    }
    eprintln!("{workers} worker(s), {:.0} ms", report.manifest["wall_ms"].as_f64().unwrap_or(0.0));
}

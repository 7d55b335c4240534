// Copyright 2026 The heavyqmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heavyqmc::bounds::pareto_complexity_table;
use heavyqmc::casestudy::{
    run_estimate, run_lowerbound, run_pareto_table, run_qae_verify, verify_record,
    ExperimentConfig, LowerBoundConfig, ParetoTableParams, QaeVerifyConfig, RunMode, Thresholds,
};
use heavyqmc::qae::{qae_distribution, AmplitudeQuery};
use heavyqmc::Error;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_THRESHOLD: u8 = 3;

#[derive(Parser)]
#[command(
    name = "heavyqmc",
    version,
    about = "Heavy-tailed quantum Monte Carlo experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the trial count from the config.
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Parent directory for run output (output file for qae-law).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simulated,
    Ideal,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Simulated => RunMode::Simulated,
            ModeArg::Ideal => RunMode::Ideal,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Batch run of one estimator on one distribution (needs --config).
    Estimate,
    /// Predicted and fitted Pareto complexity exponents.
    ParetoTable {
        #[arg(long, default_value_t = 1.8)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.02, 0.01])]
        epsilons: Vec<f64>,
        /// Print the predicted table only.
        #[arg(long)]
        predicted_only: bool,
    },
    /// Classical and quantum query-cost scaling on hidden-function instances.
    Lowerbound {
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<u64>>,
        #[arg(long = "quantum-n-list", value_delimiter = ',')]
        quantum_n_list: Option<Vec<u64>>,
    },
    /// Analytic amplitude-estimation law against the statevector reference.
    QaeVerify,
    /// Recomputes the aggregates of a persisted run.
    VerifyRecord {
        dir: PathBuf,
        #[arg(long)]
        min_success: Option<f64>,
        #[arg(long)]
        max_mae: Option<f64>,
    },
    /// Prints the outcome law of one amplitude-estimation run as CSV.
    QaeLaw {
        /// Amplitude in [0, 1].
        #[arg(long)]
        a: f64,
        /// Register size M, a power of two.
        #[arg(long = "grid")]
        m: u64,
    },
}

enum Failure {
    Lib(Error),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(Error::Json(e))
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Lib(Error::Config {
            field: "config".into(),
            reason: format!("{}: {e}", path.display()),
        })
    })
}

fn out_dir(g: &Global, fallback: Option<&Path>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| fallback.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Estimate => {
            let path = g.config.as_ref().ok_or_else(|| Error::Config {
                field: "config".into(),
                reason: "estimate needs --config".into(),
            })?;
            let mut cfg = ExperimentConfig::from_json(&fs::read_to_string(path)?)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(t) = g.trials {
                cfg.trials = t;
            }
            if let Some(m) = g.mode {
                cfg.mode = m.into();
            }
            let rec = run_estimate(&cfg)?;
            let dir = rec.persist(&out_dir(g, cfg.output.as_deref()))?;
            eprintln!("wrote {}", dir.display());
            print_json(&rec.summary)
        }
        Command::ParetoTable {
            alpha,
            delta,
            epsilons,
            predicted_only,
        } => {
            if predicted_only {
                let t = pareto_complexity_table(alpha, delta)?;
                t.write_csv(std::io::stdout().lock())?;
                return Ok(());
            }
            let mut p = match &g.config {
                Some(path) => read_config::<ParetoTableParams>(path)?,
                None => ParetoTableParams {
                    alpha,
                    delta,
                    epsilons,
                    trials: 100,
                    seed: 0,
                    mode: RunMode::Ideal,
                    discretization: Default::default(),
                    parallelism: 1,
                },
            };
            if let Some(s) = g.seed {
                p.seed = s;
            }
            if let Some(t) = g.trials {
                p.trials = t;
            }
            if let Some(m) = g.mode {
                p.mode = m.into();
            }
            let r = run_pareto_table(&p)?;
            let dir = out_dir(g, None).join("pareto-table");
            r.persist(&dir)?;
            eprintln!("wrote {}", dir.display());
            print_json(&serde_json::json!({
                "fitted": r.fitted,
                "ordering_holds": r.ordering_holds,
            }))
        }
        Command::Lowerbound {
            n_list,
            quantum_n_list,
        } => {
            let mut cfg = match &g.config {
                Some(path) => read_config::<LowerBoundConfig>(path)?,
                None => LowerBoundConfig::default(),
            };
            if let Some(n) = n_list {
                cfg.n_list = n;
                cfg.quantum_n_list = None;
            }
            if let Some(q) = quantum_n_list {
                cfg.quantum_n_list = Some(q);
            }
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(t) = g.trials {
                cfg.trials = t;
            }
            let rec = run_lowerbound(&cfg)?;
            let dir = rec.persist(&out_dir(g, None))?;
            eprintln!("wrote {}", dir.display());
            print_json(&serde_json::json!({
                "classical": rec.classical.fit,
                "quantum": rec.quantum.fit,
                "slope_gap": rec.slope_gap,
            }))
        }
        Command::QaeVerify => {
            let cfg = match &g.config {
                Some(path) => read_config::<QaeVerifyConfig>(path)?,
                None => QaeVerifyConfig::default(),
            };
            let rec = run_qae_verify(&cfg)?;
            let dir = rec.persist(&out_dir(g, None))?;
            eprintln!("wrote {}", dir.display());
            print_json(&serde_json::json!({ "max_tv": rec.max_tv, "decay": rec.decay }))
        }
        Command::VerifyRecord {
            dir,
            min_success,
            max_mae,
        } => {
            let report = verify_record(
                &dir,
                &Thresholds {
                    min_success_rate: min_success,
                    max_mae,
                },
            )?;
            print_json(&report)?;
            if report.ok() {
                Ok(())
            } else {
                Err(Failure::Threshold(format!(
                    "{} mismatches, {} threshold violations",
                    report.mismatches.len(),
                    report.threshold_violations.len()
                )))
            }
        }
        Command::QaeLaw { a, m } => {
            let law = qae_distribution(&AmplitudeQuery::new(a, m)?);
            match &g.out {
                Some(path) => law.write_csv(fs::File::create(path)?)?,
                None => law.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Threshold(msg)) => {
            eprintln!("threshold violation: {msg}");
            ExitCode::from(EXIT_THRESHOLD)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_CONFIG,
            })
        }
    }
}

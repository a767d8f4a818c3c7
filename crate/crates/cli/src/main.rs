use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use qipa::encoding::{EncodingScheme, LevelOperator};
use qipa::experiment::{
    dump_encoding, run_experiment, status_name, sweep, ExperimentConfig, Problem, SweepVariable,
};
use qipa::mclachlan::{estimate_resources, OracleSpec};
use qipa::solver::{Method, Status};
use qipa::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "qipa", version, about = "Variational QITE/QIPA ground-state experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a config over a grid of δτ, flux or problem files.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        variable: SweepVariable,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the Pauli encoding of a d-level operator.
    DumpEncoding {
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(short, long, default_value_t = 16)]
        d: usize,
        #[arg(long, value_enum, default_value_t = SchemeArg::Gray)]
        scheme: SchemeArg,
    },
    /// Hadamard-test counts and gate bounds per time step.
    EstimateResources {
        /// Take Nθ and N_H from this experiment config.
        #[arg(short, long, conflicts_with_all = ["n_theta", "n_h"])]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        n_theta: Option<usize>,
        #[arg(long, required_unless_present = "config")]
        n_h: Option<usize>,
        /// Taylor order of the expansion; 0 is QITE.
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Write the Pauli text of a config's problem.
    BuildHamiltonian {
        #[arg(short, long)]
        config: PathBuf,
        /// Defaults to stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Number,
    Cos,
    Sin,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Binary,
    Gray,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Qite,
    Qipa,
    QipaExact,
    General,
}

/// Command-line values that replace the config file's.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Oracle constants `a_1,…,a_n` for `--method general`.
    #[arg(long, value_delimiter = ',')]
    oracle: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tau_total: Option<f64>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> qipa::Result<()> {
        if let Some(m) = self.method {
            cfg.method = match m {
                MethodArg::Qite => Method::Qite,
                MethodArg::Qipa => Method::Qipa,
                MethodArg::QipaExact => Method::QipaExact,
                MethodArg::General => {
                    let a = self.oracle.clone().unwrap_or_else(|| vec![1.0, 1.0]);
                    Method::General { oracle: OracleSpec::new(a)? }
                }
            };
        } else if self.oracle.is_some() {
            return Err(Error::Config("--oracle needs --method general".into()));
        }
        if let Some(v) = self.dt {
            cfg.solver.dt = v;
        }
        if let Some(v) = self.tau_total {
            cfg.solver.tau_total = v;
        }
        if let Some(v) = self.layers {
            cfg.ansatz.layers = v;
        }
        if let Some(v) = self.shots {
            cfg.shots = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.top_k {
            cfg.output.top_k = v;
        }
        if let Some(v) = &self.out {
            cfg.output.dir = v.clone();
        }
        Ok(())
    }
}

fn load(path: &PathBuf, overrides: &Overrides) -> qipa::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let outcome = run_experiment(&cfg)?;
            let s = &outcome.summary;
            println!("status {}", status_name(s.status));
            println!("steps {}", s.steps);
            println!("energy {:.12}", s.energy);
            match s.exact_ground_energy {
                Some(e) => println!("exact {e:.12}"),
                None => println!("exact {}", s.oracle),
            }
            for sol in &s.solutions {
                let labels: Vec<String> = sol.labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("|{}> {:.6} {}", sol.ket, sol.amplitude, labels.join(" "));
            }
            println!("artifacts {}", outcome.dir.display());
            Ok(if s.status == Status::Diverged { EXIT_DIVERGED } else { 0 })
        }
        Command::Sweep { config, variable, values, workers, overrides } => {
            let cfg = load(&config, &overrides)?;
            if workers == 0 {
                return Err(Error::Config("workers must be at least 1".into()));
            }
            let out = cfg.output.dir.clone();
            let rows = sweep(&cfg, variable, &values, workers, &out)?;
            for r in &rows {
                println!("{} {} {}", r.value, r.status, r.steps.map(|s| s.to_string()).unwrap_or_default());
            }
            println!("table {}", out.join("sweep.csv").display());
            Ok(0)
        }
        Command::DumpEncoding { op, d, scheme } => {
            let op = match op {
                OpArg::Number => LevelOperator::Number,
                OpArg::Cos => LevelOperator::Cos,
                OpArg::Sin => LevelOperator::Sin,
            };
            let scheme = match scheme {
                SchemeArg::Binary => EncodingScheme::StandardBinary,
                SchemeArg::Gray => EncodingScheme::Gray,
            };
            print!("{}", dump_encoding(op, d, scheme)?);
            Ok(0)
        }
        Command::EstimateResources { config, n_theta, n_h, order } => {
            let (n_theta, n_h) = match config {
                Some(path) => {
                    let cfg = ExperimentConfig::load(&path)?;
                    let h = cfg.problem.hamiltonian()?;
                    let circuit = cfg.ansatz.build(h.n_qubits())?;
                    let n_h = h.terms().iter().filter(|(_, w)| !w.is_identity()).count();
                    (circuit.n_params(), n_h)
                }
                None => (n_theta.unwrap_or(0), n_h.unwrap_or(0)),
            };
            let report = estimate_resources(n_theta, n_h, order)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?);
            Ok(0)
        }
        Command::BuildHamiltonian { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let h = cfg.problem.hamiltonian()?;
            let mut text = h.to_pauli_text()?;
            if let Problem::Biprime { n } = cfg.problem {
                text.insert_str(0, &format!("# biprime N = {n}\n"));
            }
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

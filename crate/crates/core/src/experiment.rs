//! Config-driven runs: build a Hamiltonian, evolve, write artifacts.
//!
//! A run directory holds `trace.csv`, `theta_history.json`, `summary.json`
//! and `resolved_config.toml`. The resolved config has every default,
//! normalization and path filled in, so re-running it reproduces the trace.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_ansatz_with, AnsatzCircuit, AnsatzFamily, Entangler, GateKind};
use crate::encoding::{
    build_biprime, build_transmon, encode_level_operator, jordan_wigner, parse_integrals, BiprimeSpec,
    EncodingScheme, LevelEncoding, LevelOperator, TransmonSpec,
};
use crate::error::{Error, Result};
use crate::linalg::Spectrum;
use crate::mclachlan::EvalMode;
use crate::pauli::{Observable, DEFAULT_DENSE_LIMIT};
use crate::solver::{evolve, extract_solutions, Decoder, EvolutionTrace, Method, Solution, SolverConfig, Status};

/// Largest level count accepted by [`dump_encoding`].
pub const MAX_ENCODED_LEVELS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Problem {
    Biprime {
        n: u64,
    },
    Transmon {
        #[serde(default = "one")]
        ec: f64,
        #[serde(default = "one")]
        ej: f64,
        #[serde(default)]
        flux: f64,
        #[serde(default = "sixteen")]
        d: usize,
        #[serde(default = "gray")]
        encoding: EncodingScheme,
    },
    /// Pauli text, one `coeff word` per line.
    PauliFile {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
    /// `c`/`h`/`V` integral file mapped with Jordan–Wigner.
    FermionFile {
        path: PathBuf,
        n_orbitals: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn sixteen() -> usize {
    16
}

fn gray() -> EncodingScheme {
    EncodingScheme::Gray
}

impl Problem {
    pub fn hamiltonian(&self) -> Result<Observable> {
        match self {
            Problem::Biprime { n } => build_biprime(&BiprimeSpec::new(*n)?),
            Problem::Transmon { ec, ej, flux, d, encoding } => {
                let spec = TransmonSpec { ec: *ec, ej: *ej, flux: *flux, d: *d };
                build_transmon(&spec, LevelEncoding::new(*encoding, *d)?)
            }
            Problem::PauliFile { path, n_qubits } => Observable::from_pauli_text(&read(path)?, *n_qubits),
            Problem::FermionFile { path, n_orbitals } => jordan_wigner(&parse_integrals(&read(path)?)?, *n_orbitals),
        }
    }

    pub fn decoder(&self) -> Result<Decoder> {
        Ok(match self {
            Problem::Biprime { n } => Decoder::Biprime(BiprimeSpec::new(*n)?),
            Problem::Transmon { d, encoding, .. } => Decoder::Levels(LevelEncoding::new(*encoding, *d)?),
            _ => Decoder::Plain,
        })
    }

    /// Energy scale used for tolerance reporting: `max(EC, EJ)` for a
    /// transmon, 1 otherwise.
    pub fn energy_unit(&self) -> f64 {
        match self {
            Problem::Transmon { ec, ej, .. } => ec.abs().max(ej.abs()),
            _ => 1.0,
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        match self {
            Problem::PauliFile { path, .. } | Problem::FermionFile { path, .. } => {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            _ => {}
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitPolicy {
    Constant {
        value: f64,
    },
    /// `π/2` on the first RY of every qubit, 0 elsewhere: `|+⟩^n`.
    UniformSuperposition,
    /// Uniform in `[−scale, scale]`, drawn from the experiment seed.
    Random {
        scale: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

impl Default for InitPolicy {
    fn default() -> Self {
        InitPolicy::Constant { value: 1e-2 }
    }
}

impl InitPolicy {
    pub fn theta0(&self, circuit: &AnsatzCircuit, seed: u64) -> Result<Vec<f64>> {
        let n = circuit.n_params();
        match self {
            InitPolicy::Constant { value } => Ok(vec![*value; n]),
            InitPolicy::UniformSuperposition => {
                let mut seen = vec![false; circuit.n_qubits()];
                let mut theta = vec![0.0; n];
                for (k, t) in theta.iter_mut().enumerate() {
                    let gate = &circuit.gates()[circuit.gate_of_param(k)];
                    if gate.kind == GateKind::RY && !seen[gate.targets[0]] {
                        seen[gate.targets[0]] = true;
                        *t = FRAC_PI_2;
                    }
                }
                Ok(theta)
            }
            InitPolicy::Random { scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..n).map(|_| rng.random_range(-scale.abs()..=scale.abs())).collect())
            }
            InitPolicy::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::ParameterCount { expected: n, got: values.len() });
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnsatzConfig {
    pub family: AnsatzFamily,
    pub layers: usize,
    pub entangler: Entangler,
    pub init: InitPolicy,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { family: AnsatzFamily::Y, layers: 1, entangler: Entangler::Chain, init: InitPolicy::default() }
    }
}

impl AnsatzConfig {
    pub fn build(&self, n_qubits: usize) -> Result<AnsatzCircuit> {
        build_ansatz_with(self.family, n_qubits, self.layers, self.entangler)
    }
}

/// How `H` is rescaled before the flow is integrated.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Normalization {
    None,
    /// `(H − c)/‖H − c‖₁` with `c` the identity coefficient: the spectrum
    /// lands in `[−1, 1]` without diagonalizing.
    #[default]
    Centered,
    Explicit {
        shift: f64,
        scale: f64,
    },
}

impl Normalization {
    /// `(shift, scale)` for `h`.
    pub fn resolve(&self, h: &Observable) -> Result<(f64, f64)> {
        match *self {
            Normalization::None => Ok((0.0, 1.0)),
            Normalization::Centered => {
                let c = h.constant().re;
                let norm = h.shifted(c).simplify().one_norm();
                Ok((c, if norm > 0.0 { norm } else { 1.0 }))
            }
            Normalization::Explicit { shift, scale } => {
                if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
                    return Err(Error::Config(format!("normalization scale must be positive, got {scale}")));
                }
                Ok((shift, scale))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub top_k: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs/latest"), top_k: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Seeds random initial parameters and shot sampling.
    #[serde(default)]
    pub seed: u64,
    /// Sample every Hadamard test with this many shots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub problem: Problem,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_method() -> Method {
    Method::Qipa
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; problem paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&read(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.problem.resolve_paths(&base);
        Ok(cfg)
    }

    /// Fills in normalization and evaluation mode so that the config alone
    /// determines the run.
    pub fn resolve(&self, h: &Observable) -> Result<Self> {
        let mut cfg = self.clone();
        let (shift, scale) = self.normalization.resolve(h)?;
        cfg.normalization = Normalization::Explicit { shift, scale };
        cfg.solver.energy_shift = shift;
        cfg.solver.energy_scale = scale;
        if let Some(shots) = self.shots {
            if shots == 0 {
                return Err(Error::Config("shots must be positive".into()));
            }
            cfg.solver.mode = EvalMode::HadamardShots { shots, seed: self.seed };
        }
        cfg.solver.validate()?;
        if cfg.output.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub status: Status,
    pub steps: usize,
    pub final_tau: f64,
    /// Ground-energy estimate `E₁` at the last step.
    pub energy: f64,
    /// Dense-diagonalization ground energy, computed for this run.
    pub exact_ground_energy: Option<f64>,
    pub abs_error: Option<f64>,
    /// `dense` or a `no oracle` marker.
    pub oracle: String,
    pub n_qubits: usize,
    pub n_params: usize,
    pub n_terms: usize,
    pub solutions: Vec<Solution>,
}

#[derive(Debug, Serialize)]
struct ThetaHistory<'a> {
    method: &'a str,
    status: Status,
    config: &'a ExperimentConfig,
    tau: Vec<f64>,
    theta: Vec<&'a [f64]>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub trace: EvolutionTrace,
    pub summary: Summary,
    pub dir: PathBuf,
}

/// Runs one experiment into `config.output.dir`. Artifacts are written even
/// when the evolution diverges.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let h = config.problem.hamiltonian()?;
    let cfg = config.resolve(&h)?;
    let circuit = cfg.ansatz.build(h.n_qubits())?;
    let theta0 = cfg.ansatz.init.theta0(&circuit, cfg.seed)?;
    info!(
        "{} qubits, {} terms, {} parameters, method {}",
        h.n_qubits(),
        h.len(),
        circuit.n_params(),
        cfg.method.name()
    );
    let trace = evolve(&h, &circuit, &theta0, &cfg.solver, &cfg.method)?;
    let state = circuit.apply(trace.final_theta())?;
    let solutions = extract_solutions(&state, cfg.output.top_k, cfg.problem.decoder()?);

    let (exact, oracle) = if h.n_qubits() <= DEFAULT_DENSE_LIMIT {
        (Some(Spectrum::new(&h.to_dense()?).ground_energy()), "dense".to_string())
    } else {
        (None, format!("no oracle ({} qubits > {DEFAULT_DENSE_LIMIT})", h.n_qubits()))
    };
    let energy = trace.final_energy();
    let summary = Summary {
        method: trace.method.clone(),
        status: trace.status,
        steps: trace.steps(),
        final_tau: trace.last().tau,
        energy,
        exact_ground_energy: exact,
        abs_error: exact.map(|e| (energy - e).abs()),
        oracle,
        n_qubits: h.n_qubits(),
        n_params: circuit.n_params(),
        n_terms: h.len(),
        solutions,
    };
    match summary.status {
        Status::Converged => info!("converged after {} steps, E = {energy:.10}", summary.steps),
        Status::MaxSteps => warn!("reached τ_total without meeting the convergence criterion (E = {energy:.10})"),
        Status::Diverged => warn!("evolution diverged after {} steps", summary.steps),
    }

    let dir = cfg.output.dir.clone();
    write_artifacts(&dir, &cfg, &trace, &summary)?;
    Ok(RunOutcome { config: cfg, trace, summary, dir })
}

fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, trace: &EvolutionTrace, summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trace.csv"), trace.to_csv())?;
    let history = ThetaHistory {
        method: &trace.method,
        status: trace.status,
        config: cfg,
        tau: trace.records.iter().map(|r| r.tau).collect(),
        theta: trace.records.iter().map(|r| r.theta.as_slice()).collect(),
    };
    fs::write(dir.join("theta_history.json"), to_json(&history)?)?;
    fs::write(dir.join("summary.json"), to_json(summary)?)?;
    fs::write(dir.join("resolved_config.toml"), cfg.to_toml()?)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Dt,
    Flux,
    /// Replaces the problem file (Pauli or integral file).
    File,
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dt" | "tau" => Ok(Self::Dt),
            "flux" | "f" => Ok(Self::Flux),
            "file" | "bond" => Ok(Self::File),
            other => Err(Error::Config(format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    /// `converged`, `max_steps`, `diverged` or `error: …`.
    pub status: String,
    pub steps: Option<usize>,
    pub energy: Option<f64>,
    pub exact_ground_energy: Option<f64>,
    pub abs_error: Option<f64>,
    pub dir: PathBuf,
}

/// Applies one sweep value to a copy of the template.
pub fn sweep_point(template: &ExperimentConfig, variable: SweepVariable, value: &str) -> Result<ExperimentConfig> {
    let mut cfg = template.clone();
    let number = || value.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{value}` is not a number")));
    match variable {
        SweepVariable::Dt => cfg.solver.dt = number()?,
        SweepVariable::Flux => match &mut cfg.problem {
            Problem::Transmon { flux, .. } => *flux = number()?,
            _ => return Err(Error::Config("a flux sweep needs a transmon problem".into())),
        },
        SweepVariable::File => match &mut cfg.problem {
            Problem::PauliFile { path, .. } | Problem::FermionFile { path, .. } => *path = PathBuf::from(value),
            _ => return Err(Error::Config("a file sweep needs a pauli_file or fermion_file problem".into())),
        },
    }
    Ok(cfg)
}

/// Runs every value on a pool of `workers` threads, each point in
/// `out/point_NNN`, and writes `out/sweep.csv`. Failed points are recorded
/// and the sweep carries on.
pub fn sweep(
    template: &ExperimentConfig,
    variable: SweepVariable,
    values: &[String],
    workers: usize,
    out: &Path,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("a sweep needs at least one value".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, value)| {
                let dir = out.join(format!("point_{i:03}"));
                let outcome = sweep_point(template, variable, value).and_then(|mut cfg| {
                    cfg.output.dir = dir.clone();
                    run_experiment(&cfg)
                });
                match outcome {
                    Ok(o) => SweepRow {
                        value: value.clone(),
                        status: status_name(o.summary.status).into(),
                        steps: Some(o.summary.steps),
                        energy: Some(o.summary.energy),
                        exact_ground_energy: o.summary.exact_ground_energy,
                        abs_error: o.summary.abs_error,
                        dir,
                    },
                    Err(e) => {
                        warn!("sweep point {value}: {e}");
                        SweepRow {
                            value: value.clone(),
                            status: format!("error: {e}"),
                            steps: None,
                            energy: None,
                            exact_ground_energy: None,
                            abs_error: None,
                            dir,
                        }
                    }
                }
            })
            .collect()
    });
    fs::create_dir_all(out)?;
    fs::write(out.join("sweep.csv"), sweep_csv(&rows))?;
    Ok(rows)
}

pub fn status_name(status: Status) -> &'static str {
    match status {
        Status::Converged => "converged",
        Status::MaxSteps => "max_steps",
        Status::Diverged => "diverged",
    }
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut out = String::from("value,status,steps,energy,exact_ground_energy,abs_error,dir\n");
    for r in rows {
        let status = r.status.replace([',', '\n'], ";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.value,
            status,
            r.steps.map(|s| s.to_string()).unwrap_or_default(),
            opt(r.energy),
            opt(r.exact_ground_energy),
            opt(r.abs_error),
            r.dir.display()
        ));
    }
    out
}

/// Pauli text of a level operator. Identity first, then by decreasing
/// magnitude, then lexicographically by word.
pub fn dump_encoding(op: LevelOperator, d: usize, scheme: EncodingScheme) -> Result<String> {
    if d > MAX_ENCODED_LEVELS {
        return Err(Error::Config(format!("d = {d} exceeds the limit of {MAX_ENCODED_LEVELS} levels")));
    }
    let enc = LevelEncoding::new(scheme, d)?;
    encode_level_operator(&op.matrix(d), enc)?.to_pauli_text()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h15_config() -> ExperimentConfig {
        ExperimentConfig::from_toml("[problem]\nkind = \"biprime\"\nn = 15\n").unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = h15_config();
        assert_eq!(cfg.method, Method::Qipa);
        assert_eq!(cfg.ansatz.layers, 1);
        assert_eq!(cfg.normalization, Normalization::Centered);
        assert_eq!(cfg.solver, SolverConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
seed = 7
shots = 1000

[problem]
kind = "transmon"
flux = 0.25
d = 4

[ansatz]
family = "yz"
layers = 2
entangler = "brick"
init = { kind = "random", scale = 0.5 }

[method]
kind = "general"
oracle = { a = [1.0, 0.5] }

[solver]
dt = 0.005
convergence = { kind = "energy_threshold", level = -1.0 }

[normalization]
kind = "explicit"
shift = 1.5
scale = 3.0
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.ansatz.family, AnsatzFamily::YZ);
        assert_eq!(cfg.ansatz.entangler, Entangler::Brick);
        assert_eq!(cfg.shots, Some(1000));
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_problem_kind_is_a_config_error() {
        let err = ExperimentConfig::from_toml("[problem]\nkind = \"helium\"\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn centered_normalization_bounds_the_spectrum() {
        let h = h15_config().problem.hamiltonian().unwrap();
        let (shift, scale) = Normalization::Centered.resolve(&h).unwrap();
        assert_eq!(shift, 186.0);
        let spectrum = Spectrum::new(&h.shifted(shift).scale_real(1.0 / scale).to_dense().unwrap());
        assert!(spectrum.values.iter().all(|e| e.abs() <= 1.0 + 1e-12));
        assert!(spectrum.ground_energy() < 0.0);
    }

    #[test]
    fn uniform_superposition_prepares_plus_states() {
        let cfg = AnsatzConfig { family: AnsatzFamily::YZ, layers: 2, ..Default::default() };
        let circuit = cfg.build(3).unwrap();
        let theta = InitPolicy::UniformSuperposition.theta0(&circuit, 0).unwrap();
        let state = circuit.apply(&theta).unwrap();
        for a in state.amplitudes() {
            assert!((a.norm() - 1.0 / 8f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn random_init_is_seeded() {
        let circuit = AnsatzConfig::default().build(2).unwrap();
        let policy = InitPolicy::Random { scale: 0.3 };
        assert_eq!(policy.theta0(&circuit, 5).unwrap(), policy.theta0(&circuit, 5).unwrap());
        assert_ne!(policy.theta0(&circuit, 5).unwrap(), policy.theta0(&circuit, 6).unwrap());
        assert!(policy.theta0(&circuit, 5).unwrap().iter().all(|t| t.abs() <= 0.3));
    }

    #[test]
    fn explicit_init_checks_length() {
        let circuit = AnsatzConfig::default().build(2).unwrap();
        let err = InitPolicy::Explicit { values: vec![0.0; 3] }.theta0(&circuit, 0).unwrap_err();
        assert!(matches!(err, Error::ParameterCount { expected: 4, got: 3 }));
    }

    #[test]
    fn sweep_point_rejects_mismatched_variable() {
        assert!(sweep_point(&h15_config(), SweepVariable::Flux, "0.1").is_err());
        assert_eq!(sweep_point(&h15_config(), SweepVariable::Dt, "0.05").unwrap().solver.dt, 0.05);
    }

    #[test]
    fn dump_encoding_small_cases() {
        assert_eq!(dump_encoding(LevelOperator::Cos, 2, EncodingScheme::Gray).unwrap(), "0.5 X0\n");
        assert!(dump_encoding(LevelOperator::Number, 128, EncodingScheme::Gray).is_err());
        assert!(dump_encoding(LevelOperator::Number, 12, EncodingScheme::Gray).is_err());
    }
}

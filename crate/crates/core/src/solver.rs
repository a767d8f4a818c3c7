//! Conjugate-gradient solution of `A·θ̇ = C`, Euler stepping and the
//! evolution driver.

use std::collections::BTreeMap;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{AnsatzCircuit, StateVector};
use crate::encoding::{BiprimeSpec, LevelEncoding};
use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum};
use crate::mclachlan::{
    assemble_a, assemble_c_operator, exact_propagate_spectral, generator_action, EvalMode, OracleSpec, TaylorOperator,
};
use crate::pauli::{Observable, DEFAULT_DENSE_LIMIT};

/// Regularization used when plain CG stagnates on a singular `A`.
pub const FALLBACK_REGULARIZATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: DVector<f64>,
    /// `‖(A + λI)x − C‖`, recomputed from the returned iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub regularization: f64,
}

fn check_finite(values: impl IntoIterator<Item = f64>, what: &'static str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Solves `(A + λI)x = C` by conjugate gradients from `x = 0`, stopping at
/// `‖r‖ ≤ tol·max(1, ‖C‖)`. Returns the best iterate seen; gives up early
/// when the residual has not improved for `n` consecutive iterations.
pub fn cg_solve(a: &DMatrix<f64>, c: &DVector<f64>, tol: f64, max_iter: usize, lambda: f64) -> Result<CgResult> {
    let n = c.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
    }
    check_finite(a.iter().cloned(), "A")?;
    check_finite(c.iter().cloned(), "C")?;
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Config(format!("regularization must be non-negative, got {lambda}")));
    }
    let asym = (a - a.transpose()).amax();
    if asym > 1e-10 * a.amax().max(1.0) {
        return Err(Error::NonSymmetric(asym));
    }
    let op = |v: &DVector<f64>| a * v + v * lambda;
    let target = tol * c.norm().max(1.0);

    let mut x = DVector::zeros(n);
    let mut r = c.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut best = (rr.sqrt(), x.clone());
    let mut since_best = 0;
    let mut iterations = 0;
    let mut stagnated = false;
    while best.0 > target && iterations < max_iter {
        let ap = op(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 || !pap.is_finite() {
            stagnated = true;
            break;
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        iterations += 1;
        let rr_new = r.dot(&r);
        let true_res = (op(&x) - c).norm();
        if true_res < best.0 {
            best = (true_res, x.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= n.max(1) {
                stagnated = true;
                break;
            }
        }
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    let x = best.1;
    let residual = (op(&x) - c).norm();
    Ok(CgResult { converged: residual <= target, x, residual, iterations, stagnated, regularization: lambda })
}

/// `θ' = θ + ξ·δτ`.
pub fn euler_step(theta: &[f64], xi: &[f64], dt: f64) -> Result<Vec<f64>> {
    if theta.len() != xi.len() {
        return Err(Error::DimensionMismatch { expected: theta.len(), got: xi.len() });
    }
    Ok(theta.iter().zip(xi).map(|(t, x)| t + x * dt).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Convergence {
    /// Stop once `E₁ ≤ level`.
    EnergyThreshold { level: f64 },
    /// Stop once each of the last `window` changes of `E₁` is below `eps`.
    EnergyChange { eps: f64, window: usize },
    /// Run to `τ_total`.
    MaxSteps,
}

impl Default for Convergence {
    fn default() -> Self {
        Convergence::EnergyChange { eps: 1e-6, window: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Qite,
    /// Double exponential with `e^{−Hτ}` expanded to `taylor_order`.
    Qipa,
    /// Double exponential with the exact generator.
    QipaExact,
    /// Any oracle of the family, exact generator.
    General { oracle: OracleSpec },
}

impl Method {
    /// The oracle whose exact propagation this method approximates.
    pub fn oracle(&self) -> OracleSpec {
        match self {
            Method::Qite => OracleSpec::qite(),
            Method::Qipa | Method::QipaExact => OracleSpec::double(),
            Method::General { oracle } => oracle.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Qite => "qite",
            Method::Qipa => "qipa",
            Method::QipaExact => "qipa_exact",
            Method::General { .. } => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub cg_tol: f64,
    /// Defaults to `10·Nθ`.
    pub cg_max_iter: Option<usize>,
    pub regularization: f64,
    pub dt: f64,
    pub tau_total: f64,
    pub convergence: Convergence,
    pub taylor_order: usize,
    pub mode: EvalMode,
    /// The flow runs on `(H − energy_shift)/energy_scale`; energies in the
    /// trace stay in the units of `H`.
    pub energy_shift: f64,
    pub energy_scale: f64,
    /// Record the overlap with the exact oracle propagation at every step.
    pub track_fidelity: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cg_tol: 1e-6,
            cg_max_iter: None,
            regularization: 0.0,
            dt: 0.01,
            tau_total: 10.0,
            convergence: Convergence::default(),
            taylor_order: 2,
            mode: EvalMode::Direct,
            energy_shift: 0.0,
            energy_scale: 1.0,
            track_fidelity: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tau_total >= self.dt) {
            return Err(Error::Config(format!("tau_total {} must be at least dt {}", self.tau_total, self.dt)));
        }
        if !(self.cg_tol > 0.0) {
            return Err(Error::Config("cg_tol must be positive".into()));
        }
        if !(self.energy_scale > 0.0) || !self.energy_shift.is_finite() {
            return Err(Error::Config("energy_scale must be positive and energy_shift finite".into()));
        }
        if let Convergence::EnergyChange { window, eps } = self.convergence {
            if window == 0 || !(eps > 0.0) {
                return Err(Error::Config("energy-change convergence needs window ≥ 1 and eps > 0".into()));
            }
        }
        Ok(())
    }

    /// `N_T = ⌈τ_total/δτ⌉`.
    pub fn n_steps(&self) -> usize {
        (self.tau_total / self.dt - 1e-9).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxSteps,
    Diverged,
}

/// State at `τ = step·δτ` and the solve that advances it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub tau: f64,
    pub theta: Vec<f64>,
    pub e1: f64,
    pub e2: f64,
    pub c_norm: f64,
    pub cg_iters: usize,
    pub cg_residual: f64,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub method: String,
    pub records: Vec<StepRecord>,
    pub status: Status,
}

impl EvolutionTrace {
    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("a trace has at least one record")
    }

    /// Euler updates applied to reach the last record.
    pub fn steps(&self) -> usize {
        self.last().step
    }

    pub fn final_theta(&self) -> &[f64] {
        &self.last().theta
    }

    pub fn final_energy(&self) -> f64 {
        self.last().e1
    }

    /// First step at which `E₁ ≤ level`.
    pub fn steps_to_energy(&self, level: f64) -> Option<usize> {
        self.records.iter().find(|r| r.e1 <= level).map(|r| r.step)
    }

    /// CSV with columns `step,tau,E1,E2,C_norm,cg_iters,cg_residual,fidelity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,tau,E1,E2,C_norm,cg_iters,cg_residual,fidelity\n");
        for r in &self.records {
            let fid = r.fidelity.map(|f| format!("{f:e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{},{:e},{}\n",
                r.step, r.tau, r.e1, r.e2, r.c_norm, r.cg_iters, r.cg_residual, fid
            ));
        }
        out
    }
}

/// How `C` is produced for a method.
enum Generator {
    Pauli(Observable),
    Taylor(TaylorOperator),
    Exact(OracleSpec),
}

fn converged(conv: &Convergence, records: &[StepRecord]) -> bool {
    let last = records.last().expect("nonempty");
    match *conv {
        Convergence::EnergyThreshold { level } => last.e1 <= level,
        Convergence::EnergyChange { eps, window } => {
            records.len() > window
                && records[records.len() - window - 1..].windows(2).all(|w| (w[1].e1 - w[0].e1).abs() < eps)
        }
        Convergence::MaxSteps => false,
    }
}

/// Runs the variational flow from `θ0` until the convergence criterion
/// holds or `τ_total` is reached.
pub fn evolve(
    h: &Observable,
    circuit: &AnsatzCircuit,
    theta0: &[f64],
    config: &SolverConfig,
    method: &Method,
) -> Result<EvolutionTrace> {
    config.validate()?;
    h.ensure_hermitian()?;
    if h.n_qubits() != circuit.n_qubits() {
        return Err(Error::QubitMismatch { left: h.n_qubits(), right: circuit.n_qubits() });
    }
    if theta0.len() != circuit.n_params() {
        return Err(Error::ParameterCount { expected: circuit.n_params(), got: theta0.len() });
    }
    let h_eff = h.shifted(config.energy_shift).scale_real(1.0 / config.energy_scale).simplify();
    let dense_ok = h.n_qubits() <= DEFAULT_DENSE_LIMIT;
    let needs_spectrum = config.track_fidelity || matches!(method, Method::QipaExact | Method::General { .. });
    if needs_spectrum && !dense_ok {
        return Err(Error::DenseLimit { n_qubits: h.n_qubits(), limit: DEFAULT_DENSE_LIMIT });
    }
    let spectrum = if needs_spectrum { Some(Spectrum::new(&h_eff.to_dense()?)) } else { None };
    let generator = match method {
        Method::Qite => Generator::Pauli(h_eff.clone()),
        Method::Qipa => Generator::Taylor(TaylorOperator::new(&h_eff, config.taylor_order)?),
        Method::QipaExact | Method::General { .. } => Generator::Exact(method.oracle()),
    };
    if let Generator::Taylor(_) = generator {
        let reach = crate::mclachlan::spectral_norm_estimate(&h_eff) * config.tau_total;
        if reach >= 2.0 {
            warn!("‖H‖·τ_total = {reach:.2}: the truncated expansion leaves its reliable range during the run");
        }
    }
    let oracle = method.oracle();
    let psi0 = circuit.apply(theta0)?;
    let max_iter = config.cg_max_iter.unwrap_or(10 * circuit.n_params()).max(1);
    let n_steps = config.n_steps();

    let mut theta = theta0.to_vec();
    let mut records: Vec<StepRecord> = Vec::new();
    for step in 0..=n_steps {
        let tau = step as f64 * config.dt;
        let phi = circuit.apply(&theta)?;
        let (a, c, e2) = match &generator {
            Generator::Pauli(m) => system(circuit, &theta, &phi, m, config.mode)?,
            Generator::Taylor(t) => system(circuit, &theta, &phi, &t.at(tau)?, config.mode)?,
            Generator::Exact(o) => {
                let spec = spectrum.as_ref().expect("spectrum for exact generators");
                let m_phi = generator_action(spec, phi.amplitudes(), tau, o);
                let a = assemble_a(circuit, &theta, config.mode)?;
                let c = c_from_states(&circuit.inserted_states(&theta)?, &m_phi);
                (a, c, linalg::inner(phi.amplitudes(), &m_phi).re)
            }
        };
        let e1 = h.expectation(phi.amplitudes())?.re;
        let fidelity = spectrum
            .as_ref()
            .filter(|_| config.track_fidelity)
            .map(|s| exact_propagate_spectral(s, &psi0, tau, &oracle).fidelity(&phi));

        let finite = a.iter().chain(c.iter()).all(|x| x.is_finite()) && e1.is_finite() && e2.is_finite();
        let solve = if finite { Some(solve_with_fallback(&a, &c, config, max_iter)?) } else { None };
        // The norm of finite entries can still overflow, leaving CG with an
        // infinite residual.
        let Some(solve) = solve.filter(|s| s.residual.is_finite() && s.x.iter().all(|x| x.is_finite())) else {
            warn!("non-finite system at step {step}; stopping with the last good state");
            if records.is_empty() {
                return Err(Error::NonFinite("initial McLachlan system"));
            }
            return Ok(EvolutionTrace { method: method.name().into(), records, status: Status::Diverged });
        };
        records.push(StepRecord {
            step,
            tau,
            theta: theta.clone(),
            e1,
            e2: e2 * config.energy_scale,
            c_norm: c.norm(),
            cg_iters: solve.iterations,
            cg_residual: solve.residual,
            fidelity,
        });
        if converged(&config.convergence, &records) {
            return Ok(EvolutionTrace { method: method.name().into(), records, status: Status::Converged });
        }
        if step == n_steps {
            break;
        }
        let next = euler_step(&theta, solve.x.as_slice(), config.dt)?;
        if next.iter().any(|x| !x.is_finite()) {
            warn!("non-finite parameters after step {step}");
            return Ok(EvolutionTrace { method: method.name().into(), records, status: Status::Diverged });
        }
        theta = next;
    }
    Ok(EvolutionTrace { method: method.name().into(), records, status: Status::MaxSteps })
}

fn c_from_states(states: &[StateVector], m_phi: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(states.len(), states.iter().map(|s| 0.5 * linalg::inner(s.amplitudes(), m_phi).im))
}

/// `A`, `C` and `⟨φ|M|φ⟩` for a Pauli-sum generator.
fn system(
    circuit: &AnsatzCircuit,
    theta: &[f64],
    phi: &StateVector,
    m: &Observable,
    mode: EvalMode,
) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let m_phi = m.apply(phi.amplitudes())?;
    let e2 = linalg::inner(phi.amplitudes(), &m_phi).re;
    match mode {
        EvalMode::Direct => {
            let states = circuit.inserted_states(theta)?;
            let n = states.len();
            let mut a = DMatrix::zeros(n, n);
            for k in 0..n {
                for j in k..n {
                    let v = 0.25 * states[k].inner(&states[j]).re;
                    a[(k, j)] = v;
                    a[(j, k)] = v;
                }
            }
            Ok((a, c_from_states(&states, &m_phi), e2))
        }
        _ => Ok((assemble_a(circuit, theta, mode)?, assemble_c_operator(circuit, theta, m, mode)?, e2)),
    }
}

fn solve_with_fallback(a: &DMatrix<f64>, c: &DVector<f64>, config: &SolverConfig, max_iter: usize) -> Result<CgResult> {
    let first = cg_solve(a, c, config.cg_tol, max_iter, config.regularization)?;
    if first.converged || config.regularization > 0.0 {
        return Ok(first);
    }
    debug!("CG residual {:e} after {} iterations; retrying with λ = {FALLBACK_REGULARIZATION:e}", first.residual, first.iterations);
    let second = cg_solve(a, c, config.cg_tol, max_iter, FALLBACK_REGULARIZATION)?;
    Ok(if second.converged || second.residual < first.residual { second } else { first })
}

/// How basis indices are labelled in solution summaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decoder {
    Plain,
    Biprime(BiprimeSpec),
    Levels(LevelEncoding),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub index: usize,
    pub amplitude: f64,
    /// Basis label with qubit 0 rightmost.
    pub ket: String,
    /// Binary variables `x = (1 + z)/2`, qubit 0 first.
    pub x_bits: String,
    pub labels: BTreeMap<String, i64>,
}

/// The `top_k` basis states by amplitude magnitude, ties broken by index.
pub fn extract_solutions(state: &StateVector, top_k: usize, decoder: Decoder) -> Vec<Solution> {
    let n = state.n_qubits();
    let mut order: Vec<usize> = (0..state.amplitudes().len()).collect();
    let mags: Vec<f64> = state.amplitudes().iter().map(|a| a.norm()).collect();
    order.sort_by(|&i, &j| mags[j].total_cmp(&mags[i]).then(i.cmp(&j)));
    order
        .into_iter()
        .take(top_k.max(1))
        .map(|index| {
            let mut labels = BTreeMap::new();
            match decoder {
                Decoder::Plain => {}
                Decoder::Biprime(spec) => {
                    let (q, p) = spec.decode(index);
                    labels.insert("q".to_string(), q as i64);
                    labels.insert("p".to_string(), p as i64);
                }
                Decoder::Levels(enc) => {
                    let level = enc.level(index);
                    labels.insert("level".to_string(), level as i64);
                    labels.insert("charge".to_string(), level as i64 - (enc.d() / 2) as i64);
                }
            }
            Solution {
                index,
                amplitude: mags[index],
                ket: (0..n).rev().map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' }).collect(),
                x_bits: crate::encoding::binary_variables(index, n),
                labels,
            }
        })
        .collect()
}

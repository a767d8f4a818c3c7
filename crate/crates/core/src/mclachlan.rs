//! The linear system `A·θ̇ = C` of McLachlan's variational principle for
//! imaginary-time (α₁) and iterative-power (α_n, n ≥ 2) flows.
//!
//! With `∂_kφ = (−i/2)·Ū_k|0̄⟩`:
//!
//! * `A_km = Re⟨∂_kφ|∂_mφ⟩ = ¼·Re⟨Ū_k 0̄|Ū_m 0̄⟩`
//! * `C_k = −Re⟨∂_kφ|M|φ⟩ = ½·Im⟨Ū_k 0̄|M|φ⟩`
//!
//! where `M` generates the flow: `H` for QITE, `(∏a)·H·exp(S_{n−1}(−Hτ))`
//! for the general oracle.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_hadamard_test_a, build_hadamard_test_c, AnsatzCircuit, StateVector, TestVariant};
use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum};
use crate::pauli::{Observable, DEFAULT_DENSE_LIMIT};

/// `α_0(y) = y`, `α_k(y) = exp(a_k·α_{k−1}(y))`, evaluated at `y = −Hτ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub a: Vec<f64>,
}

impl OracleSpec {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Config("an oracle needs at least one exponential".into()));
        }
        if a.iter().any(|x| *x == 0.0 || !x.is_finite()) {
            return Err(Error::Config("oracle constants must be finite and nonzero".into()));
        }
        Ok(Self { a })
    }

    /// `e^{−Hτ}`.
    pub fn qite() -> Self {
        Self { a: vec![1.0] }
    }

    /// `exp(e^{−Hτ})`.
    pub fn double() -> Self {
        Self { a: vec![1.0, 1.0] }
    }

    pub fn depth(&self) -> usize {
        self.a.len()
    }

    /// `α_k(y)` for `k ≤ n`.
    pub fn alpha_k(&self, k: usize, y: f64) -> f64 {
        self.a[..k].iter().fold(y, |acc, &ak| (ak * acc).exp())
    }

    pub fn alpha(&self, y: f64) -> f64 {
        self.alpha_k(self.depth(), y)
    }

    /// `ln α_n(y) = a_n·α_{n−1}(y)`.
    pub fn log_alpha(&self, y: f64) -> f64 {
        let n = self.depth();
        self.a[n - 1] * self.alpha_k(n - 1, y)
    }

    /// `S_{n−1}(y) = Σ_{k=1}^{n−1} a_k·α_{k−1}(y)`.
    pub fn s(&self, y: f64) -> f64 {
        (1..self.depth()).map(|k| self.a[k - 1] * self.alpha_k(k - 1, y)).sum()
    }

    /// Eigenvalue of the flow generator `M` on an eigenvector of `H` with
    /// energy `e`: `(∏a)·e·exp(S_{n−1}(−eτ))`.
    pub fn generator_eigenvalue(&self, e: f64, tau: f64) -> f64 {
        let prod: f64 = self.a.iter().product();
        prod * e * self.s(-e * tau).exp()
    }
}

/// How overlaps are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EvalMode {
    /// Inner products of simulated statevectors.
    Direct,
    /// Exact ancilla probabilities of the Hadamard-test circuits.
    HadamardExact,
    /// Binomially sampled ancilla probabilities.
    HadamardShots { shots: u64, seed: u64 },
}

/// One time step's linear system and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct McLachlanSystem {
    pub a: DMatrix<f64>,
    pub c: DVector<f64>,
    pub e1: f64,
    pub e2: f64,
    pub tau: f64,
}

/// Serializable view of a [`McLachlanSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub e1: f64,
    pub e2: f64,
    pub tau: f64,
    pub condition: f64,
}

impl McLachlanSystem {
    /// Ratio of the largest to the smallest eigenvalue magnitude of `A`.
    pub fn condition_estimate(&self) -> f64 {
        let eig = SymmetricEigen::new(self.a.clone());
        let abs: Vec<f64> = eig.eigenvalues.iter().map(|x| x.abs()).collect();
        let max = abs.iter().cloned().fold(0.0, f64::max);
        let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 { f64::INFINITY } else { max / min }
    }

    pub fn record(&self) -> SystemRecord {
        SystemRecord {
            a: self.a.row_iter().map(|r| r.iter().cloned().collect()).collect(),
            c: self.c.iter().cloned().collect(),
            e1: self.e1,
            e2: self.e2,
            tau: self.tau,
            condition: self.condition_estimate(),
        }
    }
}

/// SplitMix64 finalizer, used to give every Hadamard-test circuit its own
/// reproducible seed.
fn mix_seed(seed: u64, tag: u64, i: usize, j: usize) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((i as u64) << 32) ^ (j as u64);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shots_of(mode: EvalMode) -> (Option<u64>, u64) {
    match mode {
        EvalMode::HadamardShots { shots, seed } => (Some(shots), seed),
        _ => (None, 0),
    }
}

fn check_qubits(circuit: &AnsatzCircuit, h: &Observable) -> Result<()> {
    if circuit.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch { left: circuit.n_qubits(), right: h.n_qubits() });
    }
    Ok(())
}

/// `A_km = ¼·Re⟨Ū_k 0̄|Ū_m 0̄⟩`. In Hadamard modes only `k < m` is measured;
/// the diagonal is ¼ because every generator squares to the identity.
pub fn assemble_a(circuit: &AnsatzCircuit, theta: &[f64], mode: EvalMode) -> Result<DMatrix<f64>> {
    let n = circuit.n_params();
    let mut a = DMatrix::zeros(n, n);
    match mode {
        EvalMode::Direct => {
            let states = circuit.inserted_states(theta)?;
            for k in 0..n {
                for m in k..n {
                    let v = 0.25 * states[k].inner(&states[m]).re;
                    a[(k, m)] = v;
                    a[(m, k)] = v;
                }
            }
        }
        EvalMode::HadamardExact | EvalMode::HadamardShots { .. } => {
            let (shots, seed) = shots_of(mode);
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k + 1..n).map(move |m| (k, m))).collect();
            let values: Vec<f64> = pairs
                .par_iter()
                .map(|&(k, m)| build_hadamard_test_a(circuit, k, m)?.estimate(theta, shots, mix_seed(seed, 1, k, m)))
                .collect::<Result<_>>()?;
            for (&(k, m), v) in pairs.iter().zip(values) {
                a[(k, m)] = 0.25 * v;
                a[(m, k)] = 0.25 * v;
            }
            for k in 0..n {
                a[(k, k)] = 0.25;
            }
        }
    }
    Ok(a)
}

/// `C_k = ½·Im⟨Ū_k 0̄|M|φ⟩` for an arbitrary operator `M`.
pub fn assemble_c_operator(circuit: &AnsatzCircuit, theta: &[f64], m: &Observable, mode: EvalMode) -> Result<DVector<f64>> {
    check_qubits(circuit, m)?;
    let n = circuit.n_params();
    match mode {
        EvalMode::Direct => {
            let phi = circuit.apply(theta)?;
            let m_phi = m.apply(phi.amplitudes())?;
            let states = circuit.inserted_states(theta)?;
            Ok(DVector::from_iterator(n, states.iter().map(|s| 0.5 * linalg::inner(s.amplitudes(), &m_phi).im)))
        }
        EvalMode::HadamardExact | EvalMode::HadamardShots { .. } => {
            let (shots, seed) = shots_of(mode);
            let values: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|k| {
                    let mut total = 0.0;
                    for (t, (mu, word)) in m.terms().iter().enumerate() {
                        // Im(μ·z) = Re μ·Im z + Im μ·Re z.
                        let word = word.without_phase();
                        let mu = mu * m.terms()[t].1.phase().to_complex();
                        if mu.re != 0.0 {
                            let htc = build_hadamard_test_c(circuit, k, &word, TestVariant::Imaginary)?;
                            total += mu.re * htc.estimate(theta, shots, mix_seed(seed, 2, k, t))?;
                        }
                        if mu.im != 0.0 {
                            let htc = build_hadamard_test_c(circuit, k, &word, TestVariant::Real)?;
                            total += mu.im * htc.estimate(theta, shots, mix_seed(seed, 3, k, t))?;
                        }
                    }
                    Ok(0.5 * total)
                })
                .collect::<Result<_>>()?;
            Ok(DVector::from_vec(values))
        }
    }
}

/// QITE: `M = H`.
pub fn assemble_c_qite(circuit: &AnsatzCircuit, theta: &[f64], h: &Observable, mode: EvalMode) -> Result<DVector<f64>> {
    h.ensure_hermitian()?;
    assemble_c_operator(circuit, theta, h, mode)
}

/// Powers `H, H², …` for the truncated expansion of `H·e^{−Hτ}`.
#[derive(Debug, Clone)]
pub struct TaylorOperator {
    order: usize,
    powers: Vec<Observable>,
}

impl TaylorOperator {
    /// Precomputes `H^1 … H^{order+1}`; `order ∈ {1, 2, 3}`.
    pub fn new(h: &Observable, order: usize) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidTaylorOrder(order));
        }
        h.ensure_hermitian()?;
        let mut powers = vec![h.simplify()];
        for _ in 0..order {
            let next = powers.last().expect("nonempty").multiply(h)?;
            powers.push(next);
        }
        Ok(Self { order, powers })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `H·Σ_{j=0}^{order} (−Hτ)^j / j!`.
    pub fn at(&self, tau: f64) -> Result<Observable> {
        let n = self.powers[0].n_qubits();
        let mut total = Observable::zero(n);
        let mut coeff = 1.0;
        for (j, p) in self.powers.iter().enumerate() {
            if j > 0 {
                coeff *= -tau / j as f64;
            }
            if coeff != 0.0 {
                total = total.add(&p.scale_real(coeff))?;
            }
        }
        Ok(total.simplify())
    }
}

/// Spectral norm from the dense matrix when small enough, else the
/// one-norm bound.
pub fn spectral_norm_estimate(h: &Observable) -> f64 {
    if h.n_qubits() <= 10 {
        if let Ok(d) = h.to_dense() {
            let (vals, _) = linalg::hermitian_eigen(&d);
            return vals[0].abs().max(vals[vals.len() - 1].abs());
        }
    }
    h.one_norm()
}

/// QIPA with a truncated Taylor expansion of `e^{−Hτ}`.
pub fn assemble_c_qipa(
    circuit: &AnsatzCircuit,
    theta: &[f64],
    h: &Observable,
    tau: f64,
    taylor_order: usize,
    mode: EvalMode,
) -> Result<DVector<f64>> {
    if tau < 0.0 {
        return Err(Error::Config("τ must be non-negative".into()));
    }
    let op = TaylorOperator::new(h, taylor_order)?;
    let norm_tau = spectral_norm_estimate(h) * tau;
    if norm_tau >= 2.0 {
        warn!("‖H‖·τ = {norm_tau:.3}: the truncated expansion of e^(-Hτ) is unreliable; consider the exact generator");
    }
    assemble_c_operator(circuit, theta, &op.at(tau)?, mode)
}

/// Dense eigendecomposition of `H`, checked against the dense limit.
pub fn spectrum_of(h: &Observable) -> Result<Spectrum> {
    h.ensure_hermitian()?;
    Ok(Spectrum::new(&h.to_dense_limited(DEFAULT_DENSE_LIMIT)?))
}

/// `M|φ⟩` for the exact flow generator.
pub fn generator_action(spectrum: &Spectrum, phi: &[Complex64], tau: f64, oracle: &OracleSpec) -> Vec<Complex64> {
    spectrum.apply_fn(phi, |e| oracle.generator_eigenvalue(e, tau))
}

/// Exact-generator `C` from a precomputed spectrum.
pub fn assemble_c_spectral(
    circuit: &AnsatzCircuit,
    theta: &[f64],
    spectrum: &Spectrum,
    tau: f64,
    oracle: &OracleSpec,
) -> Result<DVector<f64>> {
    let phi = circuit.apply(theta)?;
    let m_phi = generator_action(spectrum, phi.amplitudes(), tau, oracle);
    let states = circuit.inserted_states(theta)?;
    Ok(DVector::from_iterator(
        circuit.n_params(),
        states.iter().map(|s| 0.5 * linalg::inner(s.amplitudes(), &m_phi).im),
    ))
}

/// `C_k = −(∏a)·Re⟨∂_kφ|H·exp(S_{n−1}(−Hτ))|φ⟩` by eigendecomposition.
pub fn assemble_c_exact(
    circuit: &AnsatzCircuit,
    theta: &[f64],
    h: &Observable,
    tau: f64,
    oracle: &OracleSpec,
) -> Result<DVector<f64>> {
    check_qubits(circuit, h)?;
    assemble_c_spectral(circuit, theta, &spectrum_of(h)?, tau, oracle)
}

/// `α_n(−Hτ)|ψ0⟩`, normalized, from a precomputed spectrum. Weights are
/// formed in log space; if they overflow, the state collapses onto the
/// eigenvectors with infinite weight.
pub fn exact_propagate_spectral(spectrum: &Spectrum, psi0: &StateVector, tau: f64, oracle: &OracleSpec) -> StateVector {
    let mut coords = spectrum.project(psi0.amplitudes());
    let ground = spectrum.ground_energy();
    let ground_weight: f64 = coords
        .iter()
        .zip(&spectrum.values)
        .filter(|(_, e)| (*e - ground).abs() <= 1e-9 * spectrum.range().max(1.0))
        .map(|(c, _)| c.norm_sqr())
        .sum();
    if ground_weight < 1e-12 {
        warn!("initial state has no overlap with the ground space");
    }
    let logs: Vec<f64> = spectrum.values.iter().map(|&e| oracle.log_alpha(-e * tau)).collect();
    let finite_max = logs
        .iter()
        .zip(coords.iter())
        .filter(|(l, c)| l.is_finite() && c.norm_sqr() > 0.0)
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let overflow = logs.iter().zip(coords.iter()).any(|(l, c)| *l == f64::INFINITY && c.norm_sqr() > 0.0);
    for (c, &l) in coords.iter_mut().zip(&logs) {
        let w = if overflow {
            if l == f64::INFINITY { 1.0 } else { 0.0 }
        } else {
            (l - finite_max).exp()
        };
        *c *= w;
    }
    let mut out = StateVector::from_amplitudes(spectrum.lift(&coords)).expect("power-of-two dimension");
    out.normalize();
    out
}

pub fn exact_propagate(h: &Observable, psi0: &StateVector, tau: f64, oracle: &OracleSpec) -> Result<StateVector> {
    if psi0.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch { left: psi0.n_qubits(), right: h.n_qubits() });
    }
    Ok(exact_propagate_spectral(&spectrum_of(h)?, psi0, tau, oracle))
}

/// `E₁ = ⟨φ|H|φ⟩`.
pub fn energy(circuit: &AnsatzCircuit, theta: &[f64], h: &Observable) -> Result<f64> {
    check_qubits(circuit, h)?;
    Ok(h.expectation(circuit.apply(theta)?.amplitudes())?.re)
}

/// `E₂ = ⟨φ|H e^{−Hτ}|φ⟩`.
pub fn oracle_energy(circuit: &AnsatzCircuit, theta: &[f64], h: &Observable, tau: f64) -> Result<f64> {
    check_qubits(circuit, h)?;
    let spectrum = spectrum_of(h)?;
    let phi = circuit.apply(theta)?;
    let m_phi = spectrum.apply_fn(phi.amplitudes(), |e| e * (-e * tau).exp());
    Ok(linalg::inner(phi.amplitudes(), &m_phi).re)
}

/// Assembles the full system for one step with the exact generator.
pub fn assemble_exact_system(
    circuit: &AnsatzCircuit,
    theta: &[f64],
    spectrum: &Spectrum,
    tau: f64,
    oracle: &OracleSpec,
    mode: EvalMode,
) -> Result<McLachlanSystem> {
    let a = assemble_a(circuit, theta, mode)?;
    let c = assemble_c_spectral(circuit, theta, spectrum, tau, oracle)?;
    let phi = circuit.apply(theta)?;
    let h_phi = spectrum.apply_fn(phi.amplitudes(), |e| e);
    let m_phi = generator_action(spectrum, phi.amplitudes(), tau, oracle);
    Ok(McLachlanSystem {
        a,
        c,
        e1: linalg::inner(phi.amplitudes(), &h_phi).re,
        e2: linalg::inner(phi.amplitudes(), &m_phi).re,
        tau,
    })
}

/// Measurement and gate counts for one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub n_theta: usize,
    pub n_h: usize,
    pub taylor_order: usize,
    pub n_a_measurements: usize,
    pub n_c_measurements: usize,
    pub g_na_lower_bound: usize,
    pub g_nc_lower_bound: usize,
    pub n_a_scaling: String,
    pub n_c_scaling: String,
}

/// `N_A = Nθ(Nθ−1)/2`, `N_C = Nθ`, `G_{N_A} ≥ Nθ` and
/// `G_{N_C} ≥ Σ_{j=1}^{order+1} N_H^j + Nθ`. Order 0 is QITE (`N_H + Nθ`).
pub fn estimate_resources(n_theta: usize, n_h: usize, taylor_order: usize) -> Result<ResourceReport> {
    if n_theta == 0 || n_h == 0 {
        return Err(Error::Config("Nθ and N_H must be positive".into()));
    }
    let powers: usize = (1..=taylor_order as u32 + 1).map(|j| n_h.pow(j)).sum();
    let max_power = taylor_order + 1;
    Ok(ResourceReport {
        n_theta,
        n_h,
        taylor_order,
        n_a_measurements: n_theta * (n_theta - 1) / 2,
        n_c_measurements: n_theta,
        g_na_lower_bound: n_theta,
        g_nc_lower_bound: powers + n_theta,
        n_a_scaling: "O(N^d)".into(),
        n_c_scaling: if max_power == 1 { "O(N^max(h,d))".into() } else { format!("O(N^max({max_power}h,d))") },
    })
}

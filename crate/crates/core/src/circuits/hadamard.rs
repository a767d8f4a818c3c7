//! Ancilla interference circuits whose ancilla-zero probability encodes the
//! real (or imaginary) part of an overlap between two branches.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::state::pauli_matrix;
use super::{AnsatzCircuit, Gate, StateVector};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliWord, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestVariant {
    /// `P₀ = (1 + Re⟨a|b⟩)/2`.
    Real,
    /// `P₀ = (1 + Im⟨a|b⟩)/2`, via `S†` on the ancilla.
    Imaginary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HtOp {
    /// An ansatz gate on the system register.
    Gate(Gate),
    AncH,
    AncX,
    AncSdg,
    /// Pauli on a system qubit, controlled by the ancilla being 1.
    CPauli(Pauli, usize),
    /// Phase on the ancilla-1 branch.
    CPhase(Phase),
}

/// System register on qubits `0..n`, ancilla on qubit `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardTestCircuit {
    n_system: usize,
    n_params: usize,
    ops: Vec<HtOp>,
    variant: TestVariant,
}

fn controlled_word(ops: &mut Vec<HtOp>, word: &PauliWord) {
    for (&q, &p) in word.ops() {
        ops.push(HtOp::CPauli(p, q));
    }
    if word.phase() != Phase::ONE {
        ops.push(HtOp::CPhase(word.phase()));
    }
}

/// Branch `ancilla = 0` receives `g_k`; the ancilla is flipped around the
/// controlled insertion.
fn anti_controlled_word(ops: &mut Vec<HtOp>, word: &PauliWord) {
    ops.push(HtOp::AncX);
    controlled_word(ops, word);
    ops.push(HtOp::AncX);
}

fn check_param(circuit: &AnsatzCircuit, k: usize) -> Result<()> {
    if k >= circuit.n_params() {
        return Err(Error::IndexOutOfRange { index: k, limit: circuit.n_params() });
    }
    Ok(())
}

/// Circuit for `Re⟨0̄|Ū_k† Ū_m|0̄⟩`. The overlap is symmetric in its real
/// part, so `k > m` is reordered. The circuit stops after gate `m`; the
/// remaining gates act on both branches alike.
pub fn build_hadamard_test_a(circuit: &AnsatzCircuit, k: usize, m: usize) -> Result<HadamardTestCircuit> {
    check_param(circuit, k)?;
    check_param(circuit, m)?;
    let (k, m) = if k <= m { (k, m) } else { (m, k) };
    let (pk, pm) = (circuit.gate_of_param(k), circuit.gate_of_param(m));
    let mut ops = vec![HtOp::AncH];
    for (i, g) in circuit.gates().iter().enumerate().take(pm + 1) {
        ops.push(HtOp::Gate(g.clone()));
        if i == pk {
            anti_controlled_word(&mut ops, &circuit.generator(k));
        }
        if i == pm {
            controlled_word(&mut ops, &circuit.generator(m));
        }
    }
    ops.push(HtOp::AncH);
    Ok(HadamardTestCircuit { n_system: circuit.n_qubits(), n_params: circuit.n_params(), ops, variant: TestVariant::Real })
}

/// Circuit for `⟨0̄|Ū_k† h U|0̄⟩` (real or imaginary part).
pub fn build_hadamard_test_c(
    circuit: &AnsatzCircuit,
    k: usize,
    word: &PauliWord,
    variant: TestVariant,
) -> Result<HadamardTestCircuit> {
    check_param(circuit, k)?;
    if let Some(q) = word.max_qubit() {
        if q >= circuit.n_qubits() {
            return Err(Error::IndexOutOfRange { index: q, limit: circuit.n_qubits() });
        }
    }
    let pk = circuit.gate_of_param(k);
    let mut ops = vec![HtOp::AncH];
    for (i, g) in circuit.gates().iter().enumerate() {
        ops.push(HtOp::Gate(g.clone()));
        if i == pk {
            anti_controlled_word(&mut ops, &circuit.generator(k));
        }
    }
    controlled_word(&mut ops, word);
    if variant == TestVariant::Imaginary {
        ops.push(HtOp::AncSdg);
    }
    ops.push(HtOp::AncH);
    Ok(HadamardTestCircuit { n_system: circuit.n_qubits(), n_params: circuit.n_params(), ops, variant })
}

impl HadamardTestCircuit {
    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn ops(&self) -> &[HtOp] {
        &self.ops
    }

    pub fn variant(&self) -> TestVariant {
        self.variant
    }

    fn ancilla(&self) -> usize {
        self.n_system
    }

    /// Final `(N+1)`-qubit state.
    pub fn final_state(&self, theta: &[f64]) -> Result<StateVector> {
        if theta.len() != self.n_params {
            return Err(Error::ParameterCount { expected: self.n_params, got: theta.len() });
        }
        let anc = self.ancilla();
        let mut s = StateVector::zero(self.n_system + 1);
        let on = Some((anc, true));
        for op in &self.ops {
            match op {
                HtOp::Gate(g) => g.apply(&mut s, theta),
                HtOp::AncH => Gate::h(anc).apply(&mut s, theta),
                HtOp::AncX => Gate::x(anc).apply(&mut s, theta),
                HtOp::AncSdg => s.apply_phase(Complex64::new(0.0, -1.0), on),
                HtOp::CPauli(p, q) => s.apply_1q(*q, &pauli_matrix(*p), on),
                HtOp::CPhase(ph) => s.apply_phase(ph.to_complex(), on),
            }
        }
        Ok(s)
    }

    /// Probability of reading the ancilla as 0: exact when `shots` is
    /// `None`, otherwise a binomial sample from a ChaCha stream seeded by
    /// `seed`.
    pub fn simulate(&self, theta: &[f64], shots: Option<u64>, seed: u64) -> Result<f64> {
        let s = self.final_state(theta)?;
        let anc = 1usize << self.ancilla();
        let p0: f64 = s
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & anc == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .clamp(0.0, 1.0);
        match shots {
            None => Ok(p0),
            Some(0) => Err(Error::Config("shot count must be positive".into())),
            Some(n) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dist = Binomial::new(n, p0).map_err(|e| Error::Config(e.to_string()))?;
                Ok(dist.sample(&mut rng) as f64 / n as f64)
            }
        }
    }

    /// `2·P₀ − 1`: the real or imaginary part of the branch overlap.
    pub fn estimate(&self, theta: &[f64], shots: Option<u64>, seed: u64) -> Result<f64> {
        Ok(2.0 * self.simulate(theta, shots, seed)? - 1.0)
    }

    /// Text form: `qubits N`, `ancilla 1`, then one operation per line.
    pub fn emit(&self) -> String {
        let mut out = format!("qubits {}\nancilla 1\n", self.n_system);
        for op in &self.ops {
            let line = match op {
                HtOp::Gate(g) => g.to_string(),
                HtOp::AncH => "H anc".into(),
                HtOp::AncX => "X anc".into(),
                HtOp::AncSdg => "SDG anc".into(),
                HtOp::CPauli(p, q) => format!("C-{} anc q{q}", p.letter()),
                HtOp::CPhase(ph) => format!("C-PHASE anc i^{}", ph.power()),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("MEASURE anc\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_ansatz, factoring_circuit_3q, AnsatzFamily};
    use rand::Rng;

    fn theta(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
    }

    #[test]
    fn diagonal_a_test_is_certain() {
        let c = build_ansatz(AnsatzFamily::Y, 2, 1).unwrap();
        let t = theta(c.n_params(), 1);
        for k in 0..c.n_params() {
            let htc = build_hadamard_test_a(&c, k, k).unwrap();
            assert!((htc.simulate(&t, None, 0).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn a_test_matches_direct_overlap() {
        let c = factoring_circuit_3q();
        let t = theta(10, 2);
        for (k, m) in [(4, 9), (0, 3), (7, 2)] {
            let htc = build_hadamard_test_a(&c, k, m).unwrap();
            let a = c.inserted_state(&t, k).unwrap();
            let b = c.inserted_state(&t, m).unwrap();
            assert!((htc.estimate(&t, None, 0).unwrap() - a.inner(&b).re).abs() < 1e-12);
            // Re⟨∂_k|∂_m⟩ = ¼ Re⟨Ū_k|Ū_m⟩.
            let dk = c.derivative_state(&t, k).unwrap();
            let dm = c.derivative_state(&t, m).unwrap();
            assert!((htc.estimate(&t, None, 0).unwrap() / 4.0 - dk.inner(&dm).re).abs() < 1e-12);
        }
        assert!(build_hadamard_test_a(&c, 0, 10).is_err());
    }

    #[test]
    fn c_test_single_qubit_analytic() {
        let c = build_ansatz(AnsatzFamily::Y, 1, 1).unwrap();
        // Two RY on one qubit: the state depends on θ₀ + θ₁.
        let t = [std::f64::consts::FRAC_PI_2, 0.0];
        let htc = build_hadamard_test_c(&c, 0, &PauliWord::z(0), TestVariant::Imaginary).unwrap();
        let im = htc.estimate(&t, None, 0).unwrap();
        // C₀ = ½ Im⟨Ū₀|Z|φ⟩ = ½ sin θ.
        assert!((0.5 * im - 0.5).abs() < 1e-14);
    }

    #[test]
    fn c_test_with_identity_word_matches_a_overlap_beyond_last_gate() {
        let c = build_ansatz(AnsatzFamily::YZ, 2, 1).unwrap();
        let t = theta(c.n_params(), 3);
        for k in 0..c.n_params() {
            let htc = build_hadamard_test_c(&c, k, &PauliWord::identity(), TestVariant::Real).unwrap();
            let direct = c.inserted_state(&t, k).unwrap().inner(&c.apply(&t).unwrap());
            assert!((htc.estimate(&t, None, 0).unwrap() - direct.re).abs() < 1e-12);
        }
    }

    #[test]
    fn c_test_matches_direct_overlap() {
        let c = build_ansatz(AnsatzFamily::YZ, 2, 1).unwrap();
        let t = theta(c.n_params(), 4);
        let phi = c.apply(&t).unwrap();
        let words = [PauliWord::x(0).multiply(&PauliWord::y(1)), PauliWord::z(1), PauliWord::y(0)];
        for w in &words {
            let mut hphi = phi.clone();
            hphi.apply_word(w, None);
            for k in 0..c.n_params() {
                let direct = c.inserted_state(&t, k).unwrap().inner(&hphi);
                let re = build_hadamard_test_c(&c, k, w, TestVariant::Real).unwrap().estimate(&t, None, 0).unwrap();
                let im = build_hadamard_test_c(&c, k, w, TestVariant::Imaginary).unwrap().estimate(&t, None, 0).unwrap();
                assert!((re - direct.re).abs() < 1e-12);
                assert!((im - direct.im).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shots_are_reproducible_and_unbiased() {
        let c = build_ansatz(AnsatzFamily::Y, 2, 1).unwrap();
        let t = theta(c.n_params(), 5);
        let htc = build_hadamard_test_a(&c, 0, 3).unwrap();
        let exact = htc.simulate(&t, None, 0).unwrap();
        let shots = 1_000_000u64;
        let a = htc.simulate(&t, Some(shots), 42).unwrap();
        let b = htc.simulate(&t, Some(shots), 42).unwrap();
        assert_eq!(a, b);
        let se = (exact * (1.0 - exact) / shots as f64).sqrt();
        assert!((a - exact).abs() < 5.0 * se.max(1e-9));
        assert!(htc.simulate(&t, Some(0), 1).is_err());
    }

    #[test]
    fn emission_lists_controlled_generators() {
        let c = build_ansatz(AnsatzFamily::Y, 1, 1).unwrap();
        let htc = build_hadamard_test_a(&c, 0, 1).unwrap();
        assert_eq!(
            htc.emit(),
            "qubits 1\nancilla 1\nH anc\nRY q0 theta[0]\nX anc\nC-Y anc q0\nX anc\nRY q0 theta[1]\nC-Y anc q0\nH anc\nMEASURE anc\n"
        );
    }
}

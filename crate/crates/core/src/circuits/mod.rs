//! Parameterized ansatz circuits on an exact statevector simulator.
//!
//! Every rotation is `exp(−iθ·g/2)` for a Pauli generator `g`, so
//! `∂U/∂θ = (−i/2)·g·U`.

mod hadamard;
mod state;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliWord};

pub use hadamard::{build_hadamard_test_a, build_hadamard_test_c, HadamardTestCircuit, HtOp, TestVariant};
pub use state::StateVector;

use state::{pauli_matrix, Mat2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    CNOT,
    CZ,
    H,
    X,
    /// `exp(−iθP/2)` over a multi-qubit word; targets are the word's qubits.
    PauliRotation(PauliWord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub param: Option<usize>,
    /// Global phase `e^{iφ}` multiplying the gate. Physically irrelevant.
    #[serde(default)]
    pub global_phase: f64,
}

impl Gate {
    pub fn rx(q: usize, param: usize) -> Self {
        Self::rotation(GateKind::RX, q, param)
    }

    pub fn ry(q: usize, param: usize) -> Self {
        Self::rotation(GateKind::RY, q, param)
    }

    pub fn rz(q: usize, param: usize) -> Self {
        Self::rotation(GateKind::RZ, q, param)
    }

    fn rotation(kind: GateKind, q: usize, param: usize) -> Self {
        Self { kind, targets: vec![q], param: Some(param), global_phase: 0.0 }
    }

    pub fn pauli_rotation(word: PauliWord, param: usize) -> Self {
        let targets = word.ops().keys().copied().collect();
        Self { kind: GateKind::PauliRotation(word.without_phase()), targets, param: Some(param), global_phase: 0.0 }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::CNOT, targets: vec![control, target], param: None, global_phase: 0.0 }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self { kind: GateKind::CZ, targets: vec![a, b], param: None, global_phase: 0.0 }
    }

    pub fn h(q: usize) -> Self {
        Self { kind: GateKind::H, targets: vec![q], param: None, global_phase: 0.0 }
    }

    pub fn x(q: usize) -> Self {
        Self { kind: GateKind::X, targets: vec![q], param: None, global_phase: 0.0 }
    }

    pub fn with_global_phase(mut self, phi: f64) -> Self {
        self.global_phase = phi;
        self
    }

    pub fn is_parameterized(&self) -> bool {
        self.param.is_some()
    }

    /// Pauli generator `g` of a rotation.
    pub fn generator(&self) -> Option<PauliWord> {
        match &self.kind {
            GateKind::RX => Some(PauliWord::x(self.targets[0])),
            GateKind::RY => Some(PauliWord::y(self.targets[0])),
            GateKind::RZ => Some(PauliWord::z(self.targets[0])),
            GateKind::PauliRotation(w) => Some(w.clone()),
            _ => None,
        }
    }

    fn rotation_matrix(&self, theta: f64) -> Option<Mat2> {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let re = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        match self.kind {
            GateKind::RX => Some([[re(c), im(-s)], [im(-s), re(c)]]),
            GateKind::RY => Some([[re(c), re(-s)], [re(s), re(c)]]),
            GateKind::RZ => Some([[Complex64::from_polar(1.0, -theta / 2.0), re(0.0)], [re(0.0), Complex64::from_polar(1.0, theta / 2.0)]]),
            GateKind::H => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                Some([[re(r), re(r)], [re(r), re(-r)]])
            }
            GateKind::X => Some(pauli_matrix(Pauli::X)),
            _ => None,
        }
    }

    /// Applies the gate with its parameter read from `theta`.
    pub fn apply(&self, state: &mut StateVector, theta: &[f64]) {
        let angle = self.param.map(|p| theta[p]).unwrap_or(0.0);
        match &self.kind {
            GateKind::CNOT => state.apply_cnot(self.targets[0], self.targets[1]),
            GateKind::CZ => state.apply_cz(self.targets[0], self.targets[1]),
            GateKind::PauliRotation(w) => state.apply_pauli_rotation(w, angle),
            _ => {
                let m = self.rotation_matrix(angle).expect("single-qubit gate");
                state.apply_1q(self.targets[0], &m, None);
            }
        }
        if self.global_phase != 0.0 {
            state.apply_phase(Complex64::from_polar(1.0, self.global_phase), None);
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.kind {
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CNOT => "CNOT",
            GateKind::CZ => "CZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::PauliRotation(_) => "RP",
        };
        write!(f, "{name}")?;
        match &self.kind {
            GateKind::PauliRotation(w) => write!(f, " {w}")?,
            _ => {
                for q in &self.targets {
                    write!(f, " q{q}")?;
                }
            }
        }
        if let Some(p) = self.param {
            write!(f, " theta[{p}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzFamily {
    Y,
    YZ,
    Custom,
}

impl std::str::FromStr for AnsatzFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "Y" => Ok(Self::Y),
            "YZ" => Ok(Self::YZ),
            "CUSTOM" => Ok(Self::Custom),
            other => Err(Error::Config(format!("unknown ansatz family `{other}`"))),
        }
    }
}

/// `U(θ) = U_{Nθ}(θ_{Nθ})···U_1(θ_1)` interleaved with fixed gates.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
    family: AnsatzFamily,
    /// Position in `gates` of the gate carrying each parameter.
    slots: Vec<usize>,
}

impl AnsatzCircuit {
    /// Validates that every parameter slot `0..n_params` is used by exactly
    /// one rotation and every target is in range.
    pub fn new(n_qubits: usize, gates: Vec<Gate>, family: AnsatzFamily) -> Result<Self> {
        let n_params = gates.iter().filter(|g| g.is_parameterized()).count();
        let mut slots = vec![usize::MAX; n_params];
        for (i, g) in gates.iter().enumerate() {
            for &q in &g.targets {
                if q >= n_qubits {
                    return Err(Error::IndexOutOfRange { index: q, limit: n_qubits });
                }
            }
            let generator = g.generator();
            match (g.param, generator) {
                (Some(p), Some(_)) => {
                    if p >= n_params || slots[p] != usize::MAX {
                        return Err(Error::Config(format!("parameter slot {p} is out of range or reused")));
                    }
                    slots[p] = i;
                }
                (None, None) => {}
                (None, Some(_)) => return Err(Error::Config(format!("rotation at position {i} has no parameter"))),
                (Some(_), None) => return Err(Error::Config(format!("fixed gate at position {i} has a parameter"))),
            }
        }
        Ok(Self { n_qubits, gates, n_params, family, slots })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn family(&self) -> AnsatzFamily {
        self.family
    }

    /// Index into `gates` of the rotation carrying parameter `k`.
    pub fn gate_of_param(&self, k: usize) -> usize {
        self.slots[k]
    }

    pub fn generator(&self, k: usize) -> PauliWord {
        self.gates[self.slots[k]].generator().expect("parameterized gate")
    }

    /// Returns a copy with the given global phase on every gate.
    pub fn with_gate_phases(&self, phases: &[f64]) -> Self {
        let mut c = self.clone();
        for (g, &phi) in c.gates.iter_mut().zip(phases) {
            g.global_phase = phi;
        }
        c
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::ParameterCount { expected: self.n_params, got: theta.len() });
        }
        Ok(())
    }

    /// `U(θ)|0̄⟩`.
    pub fn apply(&self, theta: &[f64]) -> Result<StateVector> {
        self.check(theta)?;
        let mut s = StateVector::zero(self.n_qubits);
        for g in &self.gates {
            g.apply(&mut s, theta);
        }
        Ok(s)
    }

    /// `Ū_k|0̄⟩`: the circuit with `g_k` inserted right after gate `k`.
    pub fn inserted_state(&self, theta: &[f64], k: usize) -> Result<StateVector> {
        self.check(theta)?;
        if k >= self.n_params {
            return Err(Error::IndexOutOfRange { index: k, limit: self.n_params });
        }
        let pos = self.slots[k];
        let mut s = StateVector::zero(self.n_qubits);
        for (i, g) in self.gates.iter().enumerate() {
            g.apply(&mut s, theta);
            if i == pos {
                s.apply_word(&self.generator(k), None);
            }
        }
        Ok(s)
    }

    /// All `Ū_k|0̄⟩`, sharing the prefix work.
    pub fn inserted_states(&self, theta: &[f64]) -> Result<Vec<StateVector>> {
        self.check(theta)?;
        let mut prefix = StateVector::zero(self.n_qubits);
        let mut open: Vec<StateVector> = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            g.apply(&mut prefix, theta);
            for s in &mut open {
                g.apply(s, theta);
            }
            if let Some(k) = g.param {
                debug_assert_eq!(self.slots[k], i);
                let mut s = prefix.clone();
                s.apply_word(&g.generator().expect("rotation"), None);
                open.push(s);
            }
        }
        // `open` is in gate order; map back to parameter order.
        let mut by_param = vec![StateVector::zero(0); self.n_params];
        let order: Vec<usize> = self.gates.iter().filter_map(|g| g.param).collect();
        for (s, k) in open.into_iter().zip(order) {
            by_param[k] = s;
        }
        Ok(by_param)
    }

    /// `∂|φ⟩/∂θ_k = (−i/2)·Ū_k|0̄⟩`.
    pub fn derivative_state(&self, theta: &[f64], k: usize) -> Result<StateVector> {
        let mut s = self.inserted_state(theta, k)?;
        s.scale(Complex64::new(0.0, -0.5));
        Ok(s)
    }

    /// One gate per line, `qubits N` header.
    pub fn emit(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

/// Two-qubit gate pattern placed between rotation blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// CNOT `i → i+1` for `i = 0..n-1`.
    #[default]
    Chain,
    /// Periodic nearest-neighbour CNOTs `i → (i+1) mod n`, even `i` first,
    /// then odd `i`. For even `n` the pattern commutes with the qubit
    /// permutation `q → q + n/2`, so register-swap symmetric states stay
    /// symmetric.
    Brick,
}

impl Entangler {
    pub fn bonds(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Self::Chain => (0..n_qubits.saturating_sub(1)).map(|q| (q, q + 1)).collect(),
            Self::Brick => {
                if n_qubits < 2 {
                    return Vec::new();
                }
                if n_qubits == 2 {
                    return vec![(0, 1)];
                }
                let ring = |q: usize| (q, (q + 1) % n_qubits);
                (0..n_qubits).step_by(2).map(ring).chain((1..n_qubits).step_by(2).map(ring)).collect()
            }
        }
    }
}

impl std::str::FromStr for Entangler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chain" | "linear" => Ok(Self::Chain),
            "brick" | "ring" => Ok(Self::Brick),
            other => Err(Error::Config(format!("unknown entangler `{other}`"))),
        }
    }
}

/// Layered ansatz with a CNOT chain between rotation blocks.
pub fn build_ansatz(family: AnsatzFamily, n_qubits: usize, layers: usize) -> Result<AnsatzCircuit> {
    build_ansatz_with(family, n_qubits, layers, Entangler::Chain)
}

/// Layered ansatz: each layer is a rotation block (RY, or RY then RZ, on
/// every qubit) followed by the entangler; a final rotation block closes the
/// circuit. `Nθ = (layers + 1)·n` for Y, twice that for YZ.
pub fn build_ansatz_with(
    family: AnsatzFamily,
    n_qubits: usize,
    layers: usize,
    entangler: Entangler,
) -> Result<AnsatzCircuit> {
    if layers == 0 {
        return Err(Error::Config("an ansatz needs at least one layer".into()));
    }
    if n_qubits == 0 {
        return Err(Error::Config("an ansatz needs at least one qubit".into()));
    }
    let mut gates = Vec::new();
    let mut p = 0;
    let mut block = |gates: &mut Vec<Gate>| {
        for q in 0..n_qubits {
            gates.push(Gate::ry(q, p));
            p += 1;
            if family == AnsatzFamily::YZ {
                gates.push(Gate::rz(q, p));
                p += 1;
            }
        }
    };
    match family {
        AnsatzFamily::Y | AnsatzFamily::YZ => {}
        AnsatzFamily::Custom => return Err(Error::Config("custom circuits are built with AnsatzCircuit::new".into())),
    }
    let bonds = entangler.bonds(n_qubits);
    for _ in 0..layers {
        block(&mut gates);
        gates.extend(bonds.iter().map(|&(c, t)| Gate::cnot(c, t)));
    }
    block(&mut gates);
    AnsatzCircuit::new(n_qubits, gates, family)
}

/// Ten-parameter, three-qubit circuit used for the reduced factoring
/// Hamiltonian: three RY blocks separated by CNOT chains, and a final RY on
/// qubit 0.
pub fn factoring_circuit_3q() -> AnsatzCircuit {
    let mut gates = Vec::new();
    let mut p = 0;
    for block in 0..3 {
        for q in 0..3 {
            gates.push(Gate::ry(q, p));
            p += 1;
        }
        if block < 2 {
            gates.push(Gate::cnot(0, 1));
            gates.push(Gate::cnot(1, 2));
        }
    }
    gates.push(Gate::cnot(2, 0));
    gates.push(Gate::ry(0, p));
    AnsatzCircuit::new(3, gates, AnsatzFamily::Custom).expect("static circuit")
}

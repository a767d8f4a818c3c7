use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{Pauli, PauliWord};

pub(crate) type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn pauli_matrix(p: Pauli) -> Mat2 {
    match p {
        Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
        Pauli::Y => [[ZERO, Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), ZERO]],
        Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// Amplitudes over `2^n` basis states; qubit 0 is the least-significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Self { n_qubits, amplitudes }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut s = Self { n_qubits, amplitudes: vec![ZERO; 1 << n_qubits] };
        s.amplitudes[index] = ONE;
        s
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(amplitudes.len()));
        }
        Ok(Self { n_qubits: amplitudes.len().trailing_zeros() as usize, amplitudes })
    }

    /// Uniform superposition `|+…+⟩`.
    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self { n_qubits, amplitudes: vec![a; dim] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn apply_1q(&mut self, target: usize, m: &Mat2, control: Option<(usize, bool)>) {
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            if let Some((c, value)) = control {
                if ((i >> c) & 1 == 1) != value {
                    continue;
                }
            }
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amplitudes.swap(i, i | tb);
            }
        }
    }

    pub(crate) fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Multiplies the amplitudes selected by `control` (all if `None`) by
    /// `factor`.
    pub(crate) fn apply_phase(&mut self, factor: Complex64, control: Option<(usize, bool)>) {
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if control.is_none_or(|(c, v)| ((i >> c) & 1 == 1) == v) {
                *amp *= factor;
            }
        }
    }

    /// Applies a Pauli word, phase included, optionally controlled.
    pub fn apply_word(&mut self, word: &PauliWord, control: Option<(usize, bool)>) {
        for (&q, &p) in word.ops() {
            self.apply_1q(q, &pauli_matrix(p), control);
        }
        let phase = word.phase().to_complex();
        if phase != ONE {
            self.apply_phase(phase, control);
        }
    }

    /// `exp(−iθP/2)` for a phase-free Pauli word `P`.
    pub(crate) fn apply_pauli_rotation(&mut self, word: &PauliWord, theta: f64) {
        let mut flipped = self.clone();
        flipped.apply_word(word, None);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let ms = Complex64::new(0.0, -s);
        for (a, b) in self.amplitudes.iter_mut().zip(&flipped.amplitudes) {
            *a = *a * c + ms * b;
        }
    }
}

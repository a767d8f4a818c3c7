//! Encodings of d-level operators onto `k = log2(d)` qubits, and the
//! truncated charge-basis transmon Hamiltonian built from them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    StandardBinary,
    Gray,
}

impl std::str::FromStr for EncodingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "standard" | "standard_binary" | "std" => Ok(Self::StandardBinary),
            "gray" => Ok(Self::Gray),
            other => Err(Error::Config(format!("unknown encoding scheme `{other}`"))),
        }
    }
}

/// A bijection between levels `0..d` and `k`-bit codewords, `d = 2^k`.
/// Bit `j` of a codeword lives on qubit `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEncoding {
    scheme: EncodingScheme,
    k: u32,
}

impl LevelEncoding {
    pub fn new(scheme: EncodingScheme, d: usize) -> Result<Self> {
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(d));
        }
        Ok(Self { scheme, k: d.trailing_zeros() })
    }

    pub fn scheme(&self) -> EncodingScheme {
        self.scheme
    }

    pub fn d(&self) -> usize {
        1 << self.k
    }

    pub fn n_qubits(&self) -> usize {
        self.k as usize
    }

    pub fn codeword(&self, level: usize) -> usize {
        match self.scheme {
            EncodingScheme::StandardBinary => level,
            EncodingScheme::Gray => level ^ (level >> 1),
        }
    }

    pub fn level(&self, codeword: usize) -> usize {
        match self.scheme {
            EncodingScheme::StandardBinary => codeword,
            EncodingScheme::Gray => {
                let mut level = codeword;
                let mut shift = codeword >> 1;
                while shift != 0 {
                    level ^= shift;
                    shift >>= 1;
                }
                level
            }
        }
    }
}

/// `|a⟩⟨b|` on one qubit as Pauli terms.
fn transition(qubit: usize, a: usize, b: usize) -> [(Complex64, PauliWord); 2] {
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    match (a, b) {
        (0, 0) => [(h, PauliWord::identity()), (h, PauliWord::z(qubit))],
        (1, 1) => [(h, PauliWord::identity()), (-h, PauliWord::z(qubit))],
        (0, 1) => [(h, PauliWord::x(qubit)), (ih, PauliWord::y(qubit))],
        _ => [(h, PauliWord::x(qubit)), (-ih, PauliWord::y(qubit))],
    }
}

/// `|m⟩⟨n|` between codewords as a sum of `2^k` Pauli words.
fn outer_product(m: usize, n: usize, k: usize) -> Vec<(Complex64, PauliWord)> {
    let mut terms = vec![(Complex64::new(1.0, 0.0), PauliWord::identity())];
    for q in 0..k {
        let factors = transition(q, (m >> q) & 1, (n >> q) & 1);
        terms = terms
            .iter()
            .flat_map(|(c, w)| factors.iter().map(move |(fc, fw)| (c * fc, w.multiply(fw))))
            .collect();
    }
    terms
}

/// Expands a dense `d × d` operator into Pauli words on `k` qubits by
/// mapping each `|m⟩⟨n|` through the encoding.
pub fn encode_level_operator(op: &DMatrix<Complex64>, enc: LevelEncoding) -> Result<Observable> {
    let d = enc.d();
    if op.nrows() != op.ncols() || !op.nrows().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(op.nrows()));
    }
    if op.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
    }
    let k = enc.n_qubits();
    let mut terms = Vec::new();
    for m in 0..d {
        for n in 0..d {
            let v = op[(m, n)];
            if v.norm() == 0.0 {
                continue;
            }
            let (cm, cn) = (enc.codeword(m), enc.codeword(n));
            terms.extend(outer_product(cm, cn, k).into_iter().map(|(c, w)| (c * v, w)));
        }
    }
    Ok(Observable::from_terms(k, terms)?.simplify())
}

/// Charge operator `N = Σ (n − d/2)|n⟩⟨n|`.
pub fn number_operator(d: usize) -> DMatrix<Complex64> {
    let half = (d / 2) as f64;
    DMatrix::from_fn(d, d, |r, c| {
        if r == c { Complex64::new(r as f64 - half, 0.0) } else { Complex64::new(0.0, 0.0) }
    })
}

/// `cos φ = ½ Σ (|n⟩⟨n+1| + |n+1⟩⟨n|)`.
pub fn cos_phi(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |r, c| {
        if r + 1 == c || c + 1 == r { Complex64::new(0.5, 0.0) } else { Complex64::new(0.0, 0.0) }
    })
}

/// `sin φ = (i/2) Σ (|n⟩⟨n+1| − |n+1⟩⟨n|)`.
pub fn sin_phi(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |r, c| {
        if r + 1 == c {
            Complex64::new(0.0, 0.5)
        } else if c + 1 == r {
            Complex64::new(0.0, -0.5)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Elementary transmon operators available for encoding dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelOperator {
    Number,
    Cos,
    Sin,
}

impl LevelOperator {
    pub fn matrix(self, d: usize) -> DMatrix<Complex64> {
        match self {
            LevelOperator::Number => number_operator(d),
            LevelOperator::Cos => cos_phi(d),
            LevelOperator::Sin => sin_phi(d),
        }
    }
}

impl std::str::FromStr for LevelOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "number" => Ok(Self::Number),
            "cos" | "cos_phi" => Ok(Self::Cos),
            "sin" | "sin_phi" => Ok(Self::Sin),
            other => Err(Error::Config(format!("unknown operator `{other}`"))),
        }
    }
}

/// Truncated flux-tunable transmon, `EC·N² − 2·EJ·|cos(2πf)|·cos φ`.
/// `ec` is the full coefficient of `N²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    pub ec: f64,
    pub ej: f64,
    pub flux: f64,
    pub d: usize,
}

impl Default for TransmonSpec {
    fn default() -> Self {
        Self { ec: 1.0, ej: 1.0, flux: 0.0, d: 16 }
    }
}

impl TransmonSpec {
    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        if self.d < 2 || !self.d.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.d));
        }
        let n = number_operator(self.d);
        let josephson = 2.0 * self.ej * (2.0 * std::f64::consts::PI * self.flux).cos().abs();
        Ok(&n * &n * Complex64::new(self.ec, 0.0) - cos_phi(self.d) * Complex64::new(josephson, 0.0))
    }
}

pub fn build_transmon(spec: &TransmonSpec, enc: LevelEncoding) -> Result<Observable> {
    if enc.d() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: enc.d() });
    }
    encode_level_operator(&spec.dense()?, enc)
}

//! Diagonal spin Hamiltonians whose zero-energy states encode the factors
//! of an odd biprime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliWord};

/// `N = q·p` with odd `q, p`, both written with `L` free bits above a fixed
/// low bit of 1. Spin `s_l` (1-based) lives on qubit `l − 1`; the first `L`
/// spins encode `q`, the remaining `L` encode `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiprimeSpec {
    pub n: u64,
}

impl BiprimeSpec {
    pub fn new(n: u64) -> Result<Self> {
        if n < 9 || n % 2 == 0 {
            return Err(Error::InvalidModulus(n));
        }
        Ok(Self { n })
    }

    /// Free bits per factor, `⌊log₂(N/2)⌋`. Gives `L = 2` for `N = 15`.
    pub fn l(&self) -> usize {
        (self.n >> 1).ilog2() as usize
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l()
    }

    /// Decodes a basis index into `(q, p)`. A qubit in `|0⟩` has `Z = +1`,
    /// i.e. spin `+1` and bit `x = 1`.
    pub fn decode(&self, index: usize) -> (u64, u64) {
        let l = self.l();
        let factor = |offset: usize| {
            (1..=l).fold(1u64, |acc, j| {
                let x = 1 - ((index >> (offset + j - 1)) & 1) as u64;
                acc + (x << j)
            })
        };
        (factor(0), factor(l))
    }

    /// Inverse of [`decode`](Self::decode); `None` if either factor is even
    /// or too large for `L` bits.
    pub fn encode(&self, q: u64, p: u64) -> Option<usize> {
        let l = self.l();
        let max = (1u64 << (l + 1)) - 1;
        if q % 2 == 0 || p % 2 == 0 || q > max || p > max {
            return None;
        }
        let mut index = 0usize;
        for j in 1..=l {
            if (q >> j) & 1 == 0 {
                index |= 1 << (j - 1);
            }
            if (p >> j) & 1 == 0 {
                index |= 1 << (l + j - 1);
            }
        }
        Some(index)
    }
}

/// `d(N; s) = N − (2^L + Σ_j s_j 2^{j−1})(2^L + Σ_k s_{L+k} 2^{k−1})`.
pub fn residual_observable(spec: &BiprimeSpec) -> Result<Observable> {
    let l = spec.l();
    let n_qubits = 2 * l;
    let half = 1u64 << l;
    let factor = |offset: usize| {
        let terms = std::iter::once((half as f64, PauliWord::identity()))
            .chain((1..=l).map(|j| ((1u64 << (j - 1)) as f64, PauliWord::z(offset + j - 1))));
        Observable::from_real_terms(n_qubits, terms)
    };
    let product = factor(0)?.multiply(&factor(l)?)?;
    Ok(Observable::identity(n_qubits, spec.n as f64).add(&product.scale_real(-1.0))?.simplify())
}

/// `H_N = d(N; s)²` with `s_l → Z_{l−1}`.
pub fn build_biprime(spec: &BiprimeSpec) -> Result<Observable> {
    let d = residual_observable(spec)?;
    d.multiply(&d)
}

/// The reduced three-qubit Hamiltonian for `N = 15`.
pub fn load_test_hamiltonian_15() -> Observable {
    Observable::from_pauli_text(
        "196\n-52 Z2\n-52 Z0\n-56 Z2 Z0\n-96 Z1\n-48 Z2 Z1\n16 Z0 Z1\n128 Z0 Z1 Z2\n",
        Some(3),
    )
    .expect("static Hamiltonian text")
}

/// Binary variables `x_l = (1 + z_l)/2` of a basis index, qubit 0 first.
/// Index 1 on three qubits reads `"011"`.
pub fn binary_variables(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|q| if (index >> q) & 1 == 0 { '1' } else { '0' }).collect()
}

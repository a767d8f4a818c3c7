//! Second-quantized operators and the Jordan–Wigner mapping.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliWord};

/// One ladder operator: `a_j` (`dagger = false`) or `a†_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub orbital: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(orbital: usize) -> Self {
        Self { orbital, dagger: true }
    }

    pub fn annihilate(orbital: usize) -> Self {
        Self { orbital, dagger: false }
    }
}

/// A sum of products of ladder operators. Each product is applied as
/// written, left to right.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    terms: Vec<(Complex64, Vec<Ladder>)>,
}

impl FermionOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(coeff: Complex64, ladders: Vec<Ladder>) -> Self {
        Self { terms: vec![(coeff, ladders)] }
    }

    pub fn push(&mut self, coeff: Complex64, ladders: Vec<Ladder>) {
        self.terms.push((coeff, ladders));
    }

    pub fn terms(&self) -> &[(Complex64, Vec<Ladder>)] {
        &self.terms
    }

    pub fn extend(&mut self, other: &FermionOperator) {
        self.terms.extend(other.terms.iter().cloned());
    }

    /// The Hermitian conjugate: coefficients conjugated, ladder order reversed
    /// and each ladder daggered.
    pub fn adjoint(&self) -> FermionOperator {
        FermionOperator {
            terms: self
                .terms
                .iter()
                .map(|(c, ls)| {
                    let rev = ls
                        .iter()
                        .rev()
                        .map(|l| Ladder { orbital: l.orbital, dagger: !l.dagger })
                        .collect();
                    (c.conj(), rev)
                })
                .collect(),
        }
    }

    /// `Σ h_ij a†_i a_j + Σ V_ijkl a†_i a†_k a_l a_j + constant`.
    pub fn molecular(one_body: &[(usize, usize, f64)], two_body: &[(usize, usize, usize, usize, f64)], constant: f64) -> Self {
        let mut op = FermionOperator::new();
        if constant != 0.0 {
            op.push(Complex64::new(constant, 0.0), Vec::new());
        }
        for &(i, j, h) in one_body {
            op.push(Complex64::new(h, 0.0), vec![Ladder::create(i), Ladder::annihilate(j)]);
        }
        for &(i, j, k, l, v) in two_body {
            op.push(
                Complex64::new(v, 0.0),
                vec![Ladder::create(i), Ladder::create(k), Ladder::annihilate(l), Ladder::annihilate(j)],
            );
        }
        op
    }
}

/// Qubit image of a single ladder operator:
/// `a_j → (∏_{l<j} −Z_l)(X_j + iY_j)/2`, `a†_j → (∏_{l<j} −Z_l)(X_j − iY_j)/2`.
pub fn ladder_to_qubits(ladder: Ladder, n_orbitals: usize) -> Result<Observable> {
    let j = ladder.orbital;
    if j >= n_orbitals {
        return Err(Error::OrbitalOutOfRange { index: j, n_orbitals });
    }
    let mut string = PauliWord::identity();
    for l in 0..j {
        string = string.multiply(&PauliWord::z(l));
    }
    let sign = if j % 2 == 1 { -0.5 } else { 0.5 };
    let y_sign = if ladder.dagger { -1.0 } else { 1.0 };
    let x = string.multiply(&PauliWord::x(j));
    let y = string.multiply(&PauliWord::y(j));
    Observable::from_terms(
        n_orbitals,
        vec![(Complex64::new(sign, 0.0), x), (Complex64::new(0.0, sign * y_sign), y)],
    )
}

/// Jordan–Wigner image of a fermionic operator on `n_orbitals` qubits.
pub fn jordan_wigner(op: &FermionOperator, n_orbitals: usize) -> Result<Observable> {
    let mut total = Observable::zero(n_orbitals);
    for (coeff, ladders) in op.terms() {
        let mut product = Observable::identity(n_orbitals, 1.0);
        for &l in ladders {
            product = product.multiply(&ladder_to_qubits(l, n_orbitals)?)?;
        }
        total = total.add(&product.scale(*coeff))?;
    }
    Ok(total.simplify())
}

/// Parses the integral file format:
///
/// ```text
/// # comment
/// c <constant>
/// h <i> <j> <value>
/// V <i> <j> <k> <l> <value>
/// ```
///
/// where `V_ijkl` multiplies `a†_i a†_k a_l a_j`.
pub fn parse_integrals(text: &str) -> Result<FermionOperator> {
    let mut one = Vec::new();
    let mut two = Vec::new();
    let mut constant = 0.0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.to_string() };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let idx = |s: &str| s.parse::<usize>().map_err(|_| err("bad orbital index"));
        let val = |s: &str| s.parse::<f64>().map_err(|_| err("bad value"));
        match (toks[0], toks.len()) {
            ("c" | "C", 2) => constant += val(toks[1])?,
            ("h", 4) => one.push((idx(toks[1])?, idx(toks[2])?, val(toks[3])?)),
            ("V" | "v", 6) => two.push((idx(toks[1])?, idx(toks[2])?, idx(toks[3])?, idx(toks[4])?, val(toks[5])?)),
            _ => return Err(err("expected `c <v>`, `h i j <v>` or `V i j k l <v>`")),
        }
    }
    Ok(FermionOperator::molecular(&one, &two, constant))
}

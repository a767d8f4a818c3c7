//! Pauli words and weighted sums of Pauli words.
//!
//! Qubit 0 is the least-significant bit of a basis-state label: the basis
//! state `|b⟩` has qubit `j` in state `(b >> j) & 1`. Every dense expansion
//! in this crate uses that convention, so `Z0` on two qubits is
//! `diag(1, -1, 1, -1)`.
//!
//! Text format, one term per line:
//!
//! ```text
//! # comment
//! 196.0
//! -52.0 Z2
//! 128.0 Z0 Z1 Z2
//! ```

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default magnitude below which simplification drops a coefficient.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-12;

/// Default largest qubit count for which dense matrices are built.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A single-qubit Pauli operator. Identity is represented by absence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn rank(op: Option<Pauli>) -> u8 {
        match op {
            None => 0,
            Some(Pauli::X) => 1,
            Some(Pauli::Y) => 2,
            Some(Pauli::Z) => 3,
        }
    }

    /// Product of two single-qubit Paulis as `(operator, power of i)`.
    fn product(a: Pauli, b: Pauli) -> (Option<Pauli>, u8) {
        use Pauli::*;
        match (a, b) {
            (X, X) | (Y, Y) | (Z, Z) => (None, 0),
            (X, Y) => (Some(Z), 1),
            (Y, X) => (Some(Z), 3),
            (Y, Z) => (Some(X), 1),
            (Z, Y) => (Some(X), 3),
            (Z, X) => (Some(Y), 1),
            (X, Z) => (Some(Y), 3),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// One of the four unit phases `+1, +i, -1, -i`, stored as a power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: u8) -> Self {
        Phase(power % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self.0 + rhs.0)
    }
}

/// A tensor product of single-qubit Paulis with an exact unit phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliWord {
    ops: BTreeMap<usize, Pauli>,
    phase: Phase,
}

impl PauliWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a word with phase `+1`. A repeated qubit index multiplies the
    /// operators in the order given.
    pub fn from_ops(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        ops.into_iter()
            .fold(Self::identity(), |acc, (q, p)| acc.multiply(&Self::single(q, p)))
    }

    pub fn single(qubit: usize, op: Pauli) -> Self {
        let mut ops = BTreeMap::new();
        ops.insert(qubit, op);
        Self { ops, phase: Phase::ONE }
    }

    pub fn x(qubit: usize) -> Self {
        Self::single(qubit, Pauli::X)
    }

    pub fn y(qubit: usize) -> Self {
        Self::single(qubit, Pauli::Y)
    }

    pub fn z(qubit: usize) -> Self {
        Self::single(qubit, Pauli::Z)
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ops(&self) -> &BTreeMap<usize, Pauli> {
        &self.ops
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        self.ops.get(&qubit).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.keys().next_back().copied()
    }

    /// The same operators with phase `+1`.
    pub fn without_phase(&self) -> Self {
        Self { ops: self.ops.clone(), phase: Phase::ONE }
    }

    /// The product `self · other`, with the phase tracked exactly.
    pub fn multiply(&self, other: &PauliWord) -> PauliWord {
        let mut ops = self.ops.clone();
        let mut power = self.phase.power() + other.phase.power();
        for (&q, &b) in &other.ops {
            match ops.get(&q).copied() {
                None => {
                    ops.insert(q, b);
                }
                Some(a) => {
                    let (p, k) = Pauli::product(a, b);
                    power += k;
                    match p {
                        Some(p) => {
                            ops.insert(q, p);
                        }
                        None => {
                            ops.remove(&q);
                        }
                    }
                }
            }
        }
        PauliWord { ops, phase: Phase::from_power(power) }
    }

    /// Bit masks `(flip, sign)`: qubits carrying X or Y flip the basis bit,
    /// qubits carrying Y or Z contribute a `(-1)^bit` sign.
    pub(crate) fn masks(&self) -> (usize, usize, u8) {
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut n_y = 0u8;
        for (&q, &p) in &self.ops {
            match p {
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    sign |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => sign |= 1 << q,
            }
        }
        (flip, sign, n_y)
    }

    /// Applies the word to `input` and accumulates `coeff · P · input` into `out`.
    pub(crate) fn apply_accumulate(&self, coeff: Complex64, input: &[Complex64], out: &mut [Complex64]) {
        let (flip, sign, n_y) = self.masks();
        // Y = iXZ, so each Y contributes a factor i on top of the Z-type sign.
        let c = coeff * self.phase.to_complex() * Phase::from_power(n_y).to_complex();
        for (b, &amp) in input.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let v = if (b & sign).count_ones() % 2 == 1 { -c * amp } else { c * amp };
            out[b ^ flip] += v;
        }
    }

    /// Ordering used for text output: lexicographic over qubits `0..n`
    /// with `I < X < Y < Z`.
    pub fn cmp_lex(&self, other: &PauliWord, n_qubits: usize) -> Ordering {
        let n = n_qubits
            .max(self.max_qubit().map_or(0, |q| q + 1))
            .max(other.max_qubit().map_or(0, |q| q + 1));
        (0..n)
            .map(|q| Pauli::rank(self.get(q)).cmp(&Pauli::rank(other.get(q))))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for PauliWord {
    /// Operators only, e.g. `Z0 Z1 X3`; the identity prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in &self.ops {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.letter(), q)?;
            first = false;
        }
        Ok(())
    }
}

/// A complex-weighted sum of Pauli words on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliWord)>,
}

impl Observable {
    /// The zero observable.
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        Self::from_word(n_qubits, Complex64::new(coeff, 0.0), PauliWord::identity())
    }

    pub fn from_word(n_qubits: usize, coeff: Complex64, word: PauliWord) -> Self {
        assert!(
            word.max_qubit().map_or(true, |q| q < n_qubits),
            "word {word} does not fit on {n_qubits} qubits"
        );
        Self { n_qubits, terms: vec![(coeff, word)] }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(Complex64, PauliWord)>) -> Result<Self> {
        for (_, w) in &terms {
            if let Some(q) = w.max_qubit() {
                if q >= n_qubits {
                    return Err(Error::IndexOutOfRange { index: q, limit: n_qubits });
                }
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Real-coefficient constructor, convenient for Hamiltonians.
    pub fn from_real_terms(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliWord)>) -> Result<Self> {
        Self::from_terms(
            n_qubits,
            terms.into_iter().map(|(c, w)| (Complex64::new(c, 0.0), w)).collect(),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliWord)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The same operator viewed on a register of `n_qubits ≥ self.n_qubits()`.
    pub fn widened(&self, n_qubits: usize) -> Result<Self> {
        if n_qubits < self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: n_qubits });
        }
        Ok(Self { n_qubits, terms: self.terms.clone() })
    }

    pub fn push(&mut self, coeff: Complex64, word: PauliWord) {
        assert!(word.max_qubit().map_or(true, |q| q < self.n_qubits));
        self.terms.push((coeff, word));
    }

    /// Unsimplified sum.
    pub fn add(&self, other: &Observable) -> Result<Observable> {
        self.check_qubits(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { n_qubits: self.n_qubits, terms })
    }

    pub fn scale(&self, factor: Complex64) -> Observable {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, w)| (c * factor, w.clone())).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Observable {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `self - shift · I`, simplified.
    pub fn shifted(&self, shift: f64) -> Observable {
        let mut out = self.clone();
        out.push(Complex64::new(-shift, 0.0), PauliWord::identity());
        out.simplify()
    }

    fn check_qubits(&self, other: &Observable) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(())
    }

    /// Operator product `self · other`, simplified.
    pub fn multiply(&self, other: &Observable) -> Result<Observable> {
        self.multiply_with_tolerance(other, DEFAULT_DROP_TOLERANCE)
    }

    pub fn multiply_with_tolerance(&self, other: &Observable, tol: f64) -> Result<Observable> {
        self.check_qubits(other)?;
        let mut acc: BTreeMap<Vec<(usize, Pauli)>, Complex64> = BTreeMap::new();
        for (ca, wa) in &self.terms {
            for (cb, wb) in &other.terms {
                let w = wa.multiply(wb);
                let key: Vec<(usize, Pauli)> = w.ops.iter().map(|(&q, &p)| (q, p)).collect();
                *acc.entry(key).or_insert(ZERO) += ca * cb * w.phase.to_complex();
            }
        }
        Ok(Self::from_accumulator(self.n_qubits, acc, tol))
    }

    /// `self^power`; `power = 0` gives the identity.
    pub fn pow(&self, power: u32) -> Result<Observable> {
        let mut out = Observable::identity(self.n_qubits, 1.0);
        for _ in 0..power {
            out = out.multiply(self)?;
        }
        Ok(out)
    }

    /// Merges duplicate words, folds word phases into the coefficients and
    /// drops coefficients below [`DEFAULT_DROP_TOLERANCE`].
    pub fn simplify(&self) -> Observable {
        self.simplify_with_tolerance(DEFAULT_DROP_TOLERANCE)
    }

    pub fn simplify_with_tolerance(&self, tol: f64) -> Observable {
        let mut acc: BTreeMap<Vec<(usize, Pauli)>, Complex64> = BTreeMap::new();
        for (c, w) in &self.terms {
            let key: Vec<(usize, Pauli)> = w.ops.iter().map(|(&q, &p)| (q, p)).collect();
            *acc.entry(key).or_insert(ZERO) += c * w.phase.to_complex();
        }
        Self::from_accumulator(self.n_qubits, acc, tol)
    }

    fn from_accumulator(n_qubits: usize, acc: BTreeMap<Vec<(usize, Pauli)>, Complex64>, tol: f64) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= tol)
            .map(|(ops, c)| {
                let word = PauliWord { ops: ops.into_iter().collect(), phase: Phase::ONE };
                (c, word)
            })
            .collect();
        Self { n_qubits, terms }
    }

    /// Largest imaginary part among the phase-folded coefficients.
    pub fn max_imaginary(&self) -> f64 {
        self.simplify_with_tolerance(0.0)
            .terms
            .iter()
            .map(|(c, _)| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imaginary() <= tol
    }

    /// Fails with [`Error::NonHermitian`] unless every folded coefficient is real.
    pub fn ensure_hermitian(&self) -> Result<()> {
        let im = self.max_imaginary();
        if im > 1e-10 {
            Err(Error::NonHermitian(im))
        } else {
            Ok(())
        }
    }

    /// The identity coefficient after simplification.
    pub fn constant(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, w)| w.is_identity())
            .map(|(c, w)| c * w.phase.to_complex())
            .sum()
    }

    /// Σ|c|, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// True when every word is built from Z factors only.
    pub fn is_diagonal(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, w)| w.ops.values().all(|&p| p == Pauli::Z))
    }

    /// `self · state`.
    pub fn apply(&self, state: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        if state.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: state.len() });
        }
        let mut out = vec![ZERO; dim];
        for (c, w) in &self.terms {
            w.apply_accumulate(*c, state, &mut out);
        }
        Ok(out)
    }

    /// `⟨state|self|state⟩`.
    pub fn expectation(&self, state: &[Complex64]) -> Result<Complex64> {
        let applied = self.apply(state)?;
        Ok(state.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum())
    }

    /// Diagonal of the dense matrix without building it. Only meaningful
    /// for diagonal observables.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut diag = vec![ZERO; dim];
        for (c, w) in &self.terms {
            let (flip, sign, n_y) = w.masks();
            if flip != 0 {
                continue;
            }
            let cc = c * w.phase.to_complex() * Phase::from_power(n_y).to_complex();
            for (b, d) in diag.iter_mut().enumerate() {
                if (b & sign).count_ones() % 2 == 1 {
                    *d -= cc;
                } else {
                    *d += cc;
                }
            }
        }
        diag
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_limited(DEFAULT_DENSE_LIMIT)
    }

    pub fn to_dense_limited(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > limit {
            return Err(Error::DenseLimit { n_qubits: self.n_qubits, limit });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (c, w) in &self.terms {
            let (flip, sign, n_y) = w.masks();
            let cc = c * w.phase.to_complex() * Phase::from_power(n_y).to_complex();
            for col in 0..dim {
                let v = if (col & sign).count_ones() % 2 == 1 { -cc } else { cc };
                m[(col ^ flip, col)] += v;
            }
        }
        Ok(m)
    }

    /// Terms in text-output order: identity first, then by descending
    /// coefficient magnitude, then lexicographically by word.
    pub fn sorted_terms(&self) -> Vec<(Complex64, PauliWord)> {
        let mut terms: Vec<(Complex64, PauliWord)> = self
            .terms
            .iter()
            .map(|(c, w)| (c * w.phase.to_complex(), w.without_phase()))
            .collect();
        let n = self.n_qubits;
        terms.sort_by(|(ca, wa), (cb, wb)| {
            wb.is_identity()
                .cmp(&wa.is_identity())
                .then_with(|| cb.norm().partial_cmp(&ca.norm()).unwrap_or(Ordering::Equal))
                .then_with(|| wa.cmp_lex(wb, n))
        });
        terms
    }

    /// Serializes the (simplified, Hermitian) observable in the Pauli text
    /// format, one term per line.
    pub fn to_pauli_text(&self) -> Result<String> {
        let simplified = self.simplify();
        simplified.ensure_hermitian()?;
        let mut out = String::new();
        for (c, w) in simplified.sorted_terms() {
            if w.is_identity() {
                out.push_str(&format!("{:?}\n", c.re));
            } else {
                out.push_str(&format!("{:?} {}\n", c.re, w));
            }
        }
        Ok(out)
    }

    /// Parses the Pauli text format. When `n_qubits` is `None` the register
    /// size is one more than the largest index used.
    pub fn from_pauli_text(text: &str, n_qubits: Option<usize>) -> Result<Observable> {
        let mut terms = Vec::new();
        let mut max_q: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            let mut tokens = line.split_whitespace();
            let coeff_tok = tokens.next().expect("non-empty line has a token");
            let coeff: f64 = coeff_tok
                .parse()
                .map_err(|_| err(format!("bad coefficient `{coeff_tok}`")))?;
            let mut word = PauliWord::identity();
            for tok in tokens {
                let mut chars = tok.chars();
                let letter = chars.next().expect("token is non-empty");
                let rest: String = chars.collect();
                if letter.eq_ignore_ascii_case(&'I') {
                    if !rest.is_empty() && rest.parse::<usize>().is_err() {
                        return Err(err(format!("bad identity token `{tok}`")));
                    }
                    continue;
                }
                let p = Pauli::from_letter(letter).ok_or_else(|| err(format!("bad Pauli letter in `{tok}`")))?;
                let q: usize = rest.parse().map_err(|_| err(format!("bad qubit index in `{tok}`")))?;
                if word.get(q).is_some() {
                    return Err(err(format!("qubit {q} repeated in one term")));
                }
                word.ops.insert(q, p);
                max_q = Some(max_q.map_or(q, |m| m.max(q)));
            }
            terms.push((Complex64::new(coeff, 0.0), word));
        }
        let needed = max_q.map_or(0, |q| q + 1);
        let n = match n_qubits {
            Some(n) if n < needed => {
                return Err(Error::QubitMismatch { left: needed, right: n });
            }
            Some(n) => n,
            None => needed.max(1),
        };
        Ok(Observable { n_qubits: n, terms })
    }
}

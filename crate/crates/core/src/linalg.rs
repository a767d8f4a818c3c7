//! Dense Hermitian helpers shared by the exact oracles.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// A Hermitian matrix held in its eigenbasis, for evaluating `f(H)·v`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn new(m: &DMatrix<Complex64>) -> Self {
        let (values, vectors) = hermitian_eigen(m);
        Self { values, vectors }
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    pub fn range(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    /// Coordinates of `v` in the eigenbasis.
    pub fn project(&self, v: &[Complex64]) -> DVector<Complex64> {
        self.vectors.adjoint() * DVector::from_column_slice(v)
    }

    /// Back to the computational basis.
    pub fn lift(&self, coords: &DVector<Complex64>) -> Vec<Complex64> {
        (&self.vectors * coords).iter().cloned().collect()
    }

    /// `f(H)·v`.
    pub fn apply_fn(&self, v: &[Complex64], f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        let mut c = self.project(v);
        for (ci, &e) in c.iter_mut().zip(&self.values) {
            *ci *= f(e);
        }
        self.lift(&c)
    }
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

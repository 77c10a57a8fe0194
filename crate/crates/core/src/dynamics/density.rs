use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{lit, to_f64, Real};

use super::HilbertSpace;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Wraps `m` without checks.
    pub fn from_matrix_unchecked(m: CMatrix<T>) -> Self {
        assert!(m.is_square());
        Self { m }
    }

    /// Wraps `m` after checking the three invariants.
    pub fn from_matrix(m: CMatrix<T>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(m);
        rho.check(lit(1e-10), lit(1e-8), lit(1e-8))?;
        Ok(rho)
    }

    pub fn ground(space: &HilbertSpace) -> Self {
        Self::basis(space.dim(), 0)
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = Complex::new(T::one(), T::zero());
        Self { m }
    }

    /// `|ψ⟩⟨ψ|` with `ψ` normalized first.
    pub fn pure(psi: &[Complex<T>]) -> Self {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        let v: Vec<Complex<T>> = psi.iter().map(|c| c / norm).collect();
        Self { m: CMatrix::outer(&v) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex::new(T::one() / lit(dim as f64), T::zero());
        Self { m: CMatrix::from_diagonal(&vec![w; dim]) }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        self.m.as_slice()
    }

    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    pub fn populations(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> T {
        // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.m.as_slice().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> T {
        self.m.hermiticity_error()
    }

    pub fn symmetrize(&mut self) {
        self.m = self.m.hermitian_part();
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        let (vals, _) = self.m.hermitian_part().hermitian_eigen()?;
        Ok(vals.first().copied().unwrap_or_else(T::zero))
    }

    /// Returns the first failing invariant as a [`Error::StateInvariant`].
    pub fn check(&self, herm_tol: T, trace_tol: T, psd_tol: T) -> Result<()> {
        self.check_at(0.0, herm_tol, trace_tol, psd_tol)
    }

    pub(crate) fn check_at(&self, time: f64, herm_tol: T, trace_tol: T, psd_tol: T) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(Error::StateInvariant {
                invariant: "hermiticity",
                time,
                detail: format!("max |ρ − ρ†| = {:e}", to_f64(herm)),
            });
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > trace_tol {
            return Err(Error::StateInvariant { invariant: "trace", time, detail: format!("Tr ρ = {}", to_f64(tr)) });
        }
        let min = self.min_eigenvalue()?;
        if min < -psd_tol {
            return Err(Error::StateInvariant {
                invariant: "positivity",
                time,
                detail: format!("min eigenvalue {:e}", to_f64(min)),
            });
        }
        Ok(())
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &CMatrix<T>) -> Self {
        Self { m: u.matmul(&self.m).matmul(&u.dagger()) }
    }

    /// Applies `diag(e^{iθ_q·n_q})` per qubit: the virtual-Z frame rotation
    /// extended to all transmon levels.
    pub fn rotate_frames(&self, space: &HilbertSpace, frames: &[f64]) -> Self {
        let phase: Vec<Complex<T>> = (0..space.dim())
            .map(|i| {
                let theta: f64 = frames.iter().enumerate().map(|(q, f)| f * space.level(i, q) as f64).sum();
                crate::scalar::cis(lit(theta.rem_euclid(std::f64::consts::TAU)))
            })
            .collect();
        let n = self.dim();
        let mut m = self.m.clone();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = phase[i] * self.m[(i, j)] * phase[j].conj();
            }
        }
        Self { m }
    }

    pub fn to_f64(&self) -> DensityMatrix<f64> {
        let data = self.m.as_slice().iter().map(|c| Complex::new(to_f64(c.re), to_f64(c.im))).collect();
        DensityMatrix { m: CMatrix::from_vec(self.dim(), self.dim(), data) }
    }
}

/// JSON shape of a state artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub dim: usize,
    pub labels: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityMatrix<f64> {
    pub fn to_document(&self, labels: Vec<String>) -> StateDocument {
        let n = self.dim();
        let row = |i: usize, f: fn(&Complex<f64>) -> f64| (0..n).map(|j| f(&self.m[(i, j)])).collect();
        StateDocument {
            dim: n,
            labels,
            re: (0..n).map(|i| row(i, |c| c.re)).collect(),
            im: (0..n).map(|i| row(i, |c| c.im)).collect(),
        }
    }

    pub fn from_document(doc: &StateDocument) -> Result<Self> {
        let n = doc.dim;
        if doc.re.len() != n || doc.im.len() != n || doc.re.iter().chain(&doc.im).any(|r| r.len() != n) {
            return Err(Error::invariant("state", format!("re/im must be {n}×{n}")));
        }
        let data = (0..n * n).map(|k| Complex::new(doc.re[k / n][k % n], doc.im[k / n][k % n])).collect();
        Self::from_matrix(CMatrix::from_vec(n, n, data))
    }
}

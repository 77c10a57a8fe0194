//! Dense complex matrices and the handful of kernels the pipeline needs.
//!
//! Matrices are small (at most 81 x 81 for four three-level transmons, 64 x 64
//! for the six-qubit unitary oracle), so everything is row-major `Vec` storage
//! with straightforward loops.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// `|ψ⟩⟨ψ|`
    pub fn outer(psi: &[Complex<T>]) -> Self {
        let n = psi.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entry-wise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> T {
        let mut err = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// `(M + M†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let half: T = lit(0.5);
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in i..self.cols {
                let v = (self[(i, j)] + self[(j, i)].conj()) * half;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m
    }

    /// Unitarity residual `‖U U† − I‖_F`.
    pub fn unitarity_error(&self) -> T {
        (&self.matmul(&self.dagger()) - &Self::identity(self.rows)).frobenius_norm()
    }

    /// Left-multiplies by `op` acting on `targets` of an `n_sites` register with
    /// `levels` states per site. Site 0 is the most significant digit.
    pub fn apply_local_left(&self, op: &CMatrix<T>, targets: &[usize], n_sites: usize, levels: usize) -> Self {
        let local = levels.pow(targets.len() as u32);
        assert_eq!(op.rows, local, "local operator dimension");
        assert_eq!(self.rows, levels.pow(n_sites as u32));
        let strides: Vec<usize> = targets.iter().map(|&q| levels.pow((n_sites - 1 - q) as u32)).collect();
        let mut out = Self::zeros(self.rows, self.cols);
        let mut sub = vec![0usize; local];
        for base in 0..self.rows {
            // visit each block once via its representative with all target digits zero
            if strides.iter().any(|&s| (base / s) % levels != 0) {
                continue;
            }
            for (li, slot) in sub.iter_mut().enumerate() {
                let mut idx = base;
                let mut rem = li;
                for &s in strides.iter().rev() {
                    idx += (rem % levels) * s;
                    rem /= levels;
                }
                *slot = idx;
            }
            for c in 0..self.cols {
                for (a, &ra) in sub.iter().enumerate() {
                    let mut acc = Complex::zero();
                    for (b, &rb) in sub.iter().enumerate() {
                        let o = op[(a, b)];
                        if !o.is_zero() {
                            acc = acc + o * self[(rb, c)];
                        }
                    }
                    out[(ra, c)] = acc;
                }
            }
        }
        out
    }

    /// Embeds `op` acting on `targets` into the full `levels^n_sites` space.
    pub fn embed(op: &CMatrix<T>, targets: &[usize], n_sites: usize, levels: usize) -> Self {
        Self::identity(levels.pow(n_sites as u32)).apply_local_left(op, targets, n_sites, levels)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns ascending eigenvalues and the matrix whose columns are
    /// the matching orthonormal eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<(Vec<T>, CMatrix<T>)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { left: self.rows, right: self.cols });
        }
        let n = self.rows;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm().max(T::min_positive_value());
        let tol = T::solver_eps() * scale;
        for _sweep in 0..100 {
            let mut off = T::zero();
            for p in 0..n {
                for q in p + 1..n {
                    off = off + a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= tol * lit(1e-3) {
                        continue;
                    }
                    let phase = apq / mag; // e^{iθ}
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = (aqq - app) / (lit::<T>(2.0) * mag);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    // J = diag(1, e^{-iθ}) · [[c, s], [-s, c]]
                    let jpp = Complex::new(c, T::zero());
                    let jpq = Complex::new(s, T::zero());
                    let jqp = -phase.conj() * s;
                    let jqq = phase.conj() * c;
                    // A ← A J
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * jpp + akq * jqp;
                        a[(k, q)] = akp * jpq + akq * jqq;
                    }
                    // A ← J† A
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                    }
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * jpp + vkq * jqp;
                        v[(k, q)] = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vecs = Self::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            for k in 0..n {
                vecs[(k, new)] = v[(k, old)];
            }
        }
        Ok((values, vecs))
    }

    /// Applies `f` to the eigenvalues of a Hermitian matrix: `V f(Λ) V†`.
    pub fn hermitian_map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let (vals, vecs) = self.hermitian_eigen()?;
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                let vi = vecs[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vi * vecs[(j, k)].conj();
                }
            }
        }
        Ok(out)
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

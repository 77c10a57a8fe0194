use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{lit, to_f64, Real};

use super::space::bitstring;
use super::{DensityMatrix, HilbertSpace};

/// `PρP / Tr(PρP)` on the `2^n` computational states, and `1 − Tr(PρP)`.
pub fn project_computational<T: Real>(rho: &DensityMatrix<T>, space: &HilbertSpace) -> Result<(DensityMatrix<T>, T)> {
    if rho.dim() != space.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: space.dim() });
    }
    let idx = space.computational_indices();
    let m = rho.matrix();
    let weight: T = idx.iter().map(|&i| m[(i, i)].re).sum();
    if weight < lit(1e-12) {
        return Err(Error::NoComputationalSupport(to_f64(weight)));
    }
    let k = idx.len();
    let mut p = CMatrix::zeros(k, k);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            p[(a, b)] = m[(i, j)] / weight;
        }
    }
    Ok((DensityMatrix::from_matrix_unchecked(p), T::one() - weight))
}

/// Uhlmann fidelity `(Tr√(√ρ1 ρ2 √ρ1))²`.
///
/// When either argument is numerically rank one, the exact identity
/// `F = λ⟨ψ|ρ|ψ⟩` is used instead; the square roots of round-off-level
/// eigenvalues would otherwise cost about eight digits.
pub fn fidelity<T: Real>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> Result<T> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let tol = lit::<T>(1e-8);
    let (v1, u1) = rho1.matrix().hermitian_part().hermitian_eigen()?;
    let (v2, u2) = rho2.matrix().hermitian_part().hermitian_eigen()?;
    for &m in [v1[0], v2[0]].iter() {
        if m < -tol {
            return Err(Error::NotPsd(to_f64(m)));
        }
    }
    let rank_cut = T::epsilon().sqrt() * lit(1e-2);
    let rank_one = |v: &[T]| v.len() < 2 || v[v.len() - 2] <= rank_cut;
    let top = |u: &CMatrix<T>| -> Vec<Complex<T>> { (0..u.rows()).map(|i| u[(i, u.cols() - 1)]).collect() };
    if rank_one(&v2) {
        let f = *v2.last().unwrap() * pure_state_fidelity(rho1, &top(&u2))?;
        return Ok(f.max(T::zero()).min(T::one()));
    }
    if rank_one(&v1) {
        let f = *v1.last().unwrap() * pure_state_fidelity(rho2, &top(&u1))?;
        return Ok(f.max(T::zero()).min(T::one()));
    }
    let sq: Vec<Complex<T>> = v1.iter().map(|&l| Complex::new(l.max(T::zero()).sqrt(), T::zero())).collect();
    let s1 = u1.matmul(&CMatrix::from_diagonal(&sq)).matmul(&u1.dagger());
    let inner = s1.matmul(rho2.matrix()).matmul(&s1).hermitian_part();
    let (lam, _) = inner.hermitian_eigen()?;
    let tr: T = lam.iter().map(|&l| l.max(T::zero()).sqrt()).sum();
    Ok((tr * tr).min(T::one()))
}

/// `⟨ψ|ρ|ψ⟩` for normalized `ψ`.
pub fn pure_state_fidelity<T: Real>(rho: &DensityMatrix<T>, psi: &[Complex<T>]) -> Result<T> {
    if rho.dim() != psi.len() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: psi.len() });
    }
    let v = rho.matrix().matvec(psi);
    Ok(psi.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum())
}

/// Multinomial draw of `shots` outcomes from the diagonal of a projected
/// `2^n`-dimensional state. Only nonzero counts are returned.
pub fn sample_counts<T: Real>(rho_proj: &DensityMatrix<T>, shots: u64, seed: u64) -> BTreeMap<String, u64> {
    let k = rho_proj.dim();
    let n = k.trailing_zeros() as usize;
    assert_eq!(1usize << n, k, "projected state must have dimension 2^n");
    let probs: Vec<f64> = rho_proj.populations().into_iter().map(|p| to_f64(p).max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    let mut cdf = Vec::with_capacity(k);
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k];
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let b = cdf.partition_point(|&c| c <= u).min(k - 1);
        counts[b] += 1;
    }
    counts.into_iter().enumerate().filter(|&(_, c)| c > 0).map(|(b, c)| (bitstring(b, n), c)).collect()
}

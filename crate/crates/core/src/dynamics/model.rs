//! Rotating-frame transmon model and the structured Lindblad right-hand side.
//!
//! Every operator appearing in the model is either diagonal in the Fock basis
//! or a sparse ladder operator, so the RHS only ever touches `O(nnz·dim)`
//! entries instead of doing dense products.

use std::f64::consts::TAU;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::platform::{pure_dephasing_time, PlatformSpec};
use crate::pulse::{Pulse, PulseKind, PulseSchedule};
use crate::scalar::{cis, lit, Real};

use super::HilbertSpace;

/// Real-valued sparse matrix as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp<T: Real> {
    pub dim: usize,
    pub entries: Vec<(usize, usize, T)>,
}

impl<T: Real> SparseOp<T> {
    /// Annihilation operator of qubit `q`: `⟨i|a|i+s⟩ = √(n_i+1)`.
    pub fn lowering(space: &HilbertSpace, q: usize) -> Self {
        let s = space.stride(q);
        let entries = (0..space.dim())
            .filter(|&i| space.level(i, q) + 1 < space.levels)
            .map(|i| (i, i + s, lit::<T>((space.level(i, q) + 1) as f64).sqrt()))
            .collect();
        Self { dim: space.dim(), entries }
    }

    /// `a†_i a_j`
    pub fn hop(space: &HilbertSpace, i: usize, j: usize) -> Self {
        let (si, sj) = (space.stride(i), space.stride(j));
        let entries = (0..space.dim())
            .filter(|&k| space.level(k, j) > 0 && space.level(k, i) + 1 < space.levels)
            .map(|k| {
                let v = ((space.level(k, j) * (space.level(k, i) + 1)) as f64).sqrt();
                (k - sj + si, k, lit::<T>(v))
            })
            .collect();
        Self { dim: space.dim(), entries }
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = m[(r, c)] + Complex::new(v, T::zero());
        }
        m
    }
}

/// Static diagonal `Σ_q (α_q/2)·n_q(n_q − 1)` plus any exchange couplings.
#[derive(Debug, Clone)]
pub struct StaticHamiltonian<T: Real> {
    pub diagonal: Vec<T>,
    pub hopping: Vec<HoppingTerm<T>>,
}

/// `g·(e^{iΔt}·a†_i a_j + h.c.)`, `Δ = ω_i − ω_j`.
#[derive(Debug, Clone)]
pub struct HoppingTerm<T: Real> {
    pub pair: (usize, usize),
    pub strength: T,
    pub detuning: T,
    pub op: SparseOp<T>,
}

impl<T: Real> HoppingTerm<T> {
    pub fn coefficient(&self, t: T) -> Complex<T> {
        cis(self.detuning * t) * self.strength
    }
}

impl<T: Real> StaticHamiltonian<T> {
    /// Dense `H_static(t)` for inspection and tests.
    pub fn matrix_at(&self, t: T) -> CMatrix<T> {
        let diag: Vec<Complex<T>> = self.diagonal.iter().map(|&e| Complex::new(e, T::zero())).collect();
        let mut h = CMatrix::from_diagonal(&diag);
        for term in &self.hopping {
            let a = term.op.to_dense().scale(term.coefficient(t));
            h = &(&h + &a) + &a.dagger();
        }
        h
    }
}

pub fn build_static_hamiltonian<T: Real>(p: &PlatformSpec, space: &HilbertSpace) -> Result<StaticHamiltonian<T>> {
    check_space(p, space)?;
    let diagonal = (0..space.dim())
        .map(|i| {
            p.qubits
                .iter()
                .enumerate()
                .map(|(q, qp)| {
                    let n = space.level(i, q) as f64;
                    lit::<T>(qp.anharmonicity / 2.0 * n * (n - 1.0))
                })
                .sum()
        })
        .collect();
    let hopping = p
        .couplings
        .iter()
        .filter(|c| c.strength != 0.0)
        .map(|c| {
            let (i, j) = c.pair;
            HoppingTerm {
                pair: (i, j),
                strength: lit(c.strength),
                detuning: lit(p.qubits[i].frequency - p.qubits[j].frequency),
                op: SparseOp::hop(space, i, j),
            }
        })
        .collect();
    Ok(StaticHamiltonian { diagonal, hopping })
}

fn check_space(p: &PlatformSpec, space: &HilbertSpace) -> Result<()> {
    if space.n_qubits != p.n_qubits() {
        return Err(Error::DimensionMismatch { left: space.n_qubits, right: p.n_qubits() });
    }
    Ok(())
}

/// RWA drive `(Ω(t)/2)·(e^{−iφ}·a_q + e^{iφ}·a†_q)` on `[start, start + T)`.
#[derive(Debug, Clone)]
pub struct DriveTerm<T: Real> {
    pub qubit: usize,
    pub start: T,
    pub duration: T,
    pub sigma: T,
    pub peak: T,
    /// Phase reduced to `[0, 2π)`.
    pub phase: T,
    pub op: SparseOp<T>,
}

impl<T: Real> DriveTerm<T> {
    pub fn envelope(&self, t: T) -> T {
        let x = t - self.start - self.duration / lit(2.0);
        self.peak * (-(x * x) / (lit::<T>(2.0) * self.sigma * self.sigma)).exp()
    }

    pub fn is_active(&self, t: T) -> bool {
        t >= self.start && t < self.start + self.duration
    }

    /// Coefficient of `a` (the `a†` coefficient is its conjugate); evaluated on
    /// the closed window so the integrator sees a smooth envelope.
    pub fn coefficient(&self, t: T) -> Complex<T> {
        cis(-self.phase) * (self.envelope(t) / lit(2.0))
    }

    pub fn operator_at(&self, t: T) -> CMatrix<T> {
        if !self.is_active(t) {
            return CMatrix::zeros(self.op.dim, self.op.dim);
        }
        let a = self.op.to_dense().scale(self.coefficient(t));
        &a + &a.dagger()
    }
}

pub fn build_drive_term<T: Real>(pulse: &Pulse, space: &HilbertSpace) -> Result<DriveTerm<T>> {
    if pulse.kind != PulseKind::Drive {
        return Err(Error::invariant("pulse.kind", "drive pulse expected"));
    }
    let q = pulse.qubits[0];
    let phase = pulse.phase_rad.ok_or_else(|| Error::invariant("pulse.phase_rad", "drive pulse without phase"))?;
    Ok(DriveTerm {
        qubit: q,
        start: lit(pulse.start_ns),
        duration: lit(pulse.duration_ns),
        sigma: lit(pulse.duration_ns / 4.0),
        peak: lit(pulse.amplitude),
        phase: lit(phase.rem_euclid(TAU)),
        op: SparseOp::lowering(space, q),
    })
}

/// Effective controlled phase `ζ·|11⟩⟨11|` on a pair.
#[derive(Debug, Clone)]
pub struct CzTerm<T: Real> {
    pub pair: (usize, usize),
    pub start: T,
    pub end: T,
    pub zeta: T,
    /// Basis states with both qubits of the pair in `|1⟩`.
    pub support: Vec<usize>,
}

impl<T: Real> CzTerm<T> {
    pub fn operator_at(&self, t: T, dim: usize) -> CMatrix<T> {
        let mut m = CMatrix::zeros(dim, dim);
        if t >= self.start && t < self.end {
            for &i in &self.support {
                m[(i, i)] = Complex::new(self.zeta, T::zero());
            }
        }
        m
    }
}

/// `ζ = amplitude·π / cz_duration` so the calibrated window accrues exactly
/// `π`; a shorter window accrues proportionally less.
pub fn build_cz_term<T: Real>(pulse: &Pulse, p: &PlatformSpec, space: &HilbertSpace) -> Result<CzTerm<T>> {
    if pulse.kind != PulseKind::Coupling || pulse.qubits.len() != 2 {
        return Err(Error::invariant("pulse.kind", "two-qubit coupling pulse expected"));
    }
    let (a, b) = (pulse.qubits[0], pulse.qubits[1]);
    let support = (0..space.dim()).filter(|&i| space.level(i, a) == 1 && space.level(i, b) == 1).collect();
    Ok(CzTerm {
        pair: (a, b),
        start: lit(pulse.start_ns),
        end: lit(pulse.end_ns()),
        zeta: lit(pulse.amplitude * std::f64::consts::PI / p.timings.cz_duration),
        support,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseKind {
    /// `a_q`
    Damping,
    /// `|0⟩⟨0| − |1⟩⟨1|` on qubit `q`
    Dephasing,
}

/// `L = √rate · op`
#[derive(Debug, Clone)]
pub struct CollapseOp<T: Real> {
    pub qubit: usize,
    pub kind: CollapseKind,
    pub rate: T,
}

impl<T: Real> CollapseOp<T> {
    pub fn dense(&self, space: &HilbertSpace) -> CMatrix<T> {
        let s = self.rate.sqrt();
        match self.kind {
            CollapseKind::Damping => SparseOp::lowering(space, self.qubit).to_dense().scale(Complex::new(s, T::zero())),
            CollapseKind::Dephasing => {
                let d: Vec<Complex<T>> =
                    (0..space.dim()).map(|i| Complex::new(s * z_weight(space.level(i, self.qubit)), T::zero())).collect();
                CMatrix::from_diagonal(&d)
            }
        }
    }
}

fn z_weight<T: Real>(level: usize) -> T {
    match level {
        0 => T::one(),
        1 => -T::one(),
        _ => T::zero(),
    }
}

/// `√(1/T1)·a` and `√(1/(2Tφ))·(|0⟩⟨0| − |1⟩⟨1|)` per qubit, skipping absent channels.
pub fn build_collapse_ops<T: Real>(p: &PlatformSpec, space: &HilbertSpace) -> Result<Vec<CollapseOp<T>>> {
    check_space(p, space)?;
    let mut out = Vec::new();
    for (q, qp) in p.qubits.iter().enumerate() {
        if let Some(t1) = qp.t1 {
            out.push(CollapseOp { qubit: q, kind: CollapseKind::Damping, rate: lit(1.0 / t1) });
        }
        if let Some(tphi) = pure_dephasing_time(qp.t1, qp.t2)? {
            out.push(CollapseOp { qubit: q, kind: CollapseKind::Dephasing, rate: lit(1.0 / (2.0 * tphi)) });
        }
    }
    Ok(out)
}

/// All time-dependent ingredients of one evolution.
#[derive(Debug, Clone)]
pub struct LindbladModel<T: Real> {
    pub space: HilbertSpace,
    pub static_h: StaticHamiltonian<T>,
    pub drives: Vec<DriveTerm<T>>,
    pub czs: Vec<CzTerm<T>>,
    pub collapse: Vec<CollapseOp<T>>,
}

impl<T: Real> LindbladModel<T> {
    pub fn from_schedule(schedule: &PulseSchedule, p: &PlatformSpec, space: HilbertSpace, decoherence: bool) -> Result<Self> {
        let static_h = build_static_hamiltonian(p, &space)?;
        let mut drives = Vec::new();
        let mut czs = Vec::new();
        for pulse in &schedule.pulses {
            match pulse.kind {
                PulseKind::Drive => drives.push(build_drive_term(pulse, &space)?),
                PulseKind::Coupling => czs.push(build_cz_term(pulse, p, &space)?),
                PulseKind::Readout => {}
            }
        }
        let collapse = if decoherence { build_collapse_ops(p, &space)? } else { Vec::new() };
        Ok(Self { space, static_h, drives, czs, collapse })
    }

    /// Dense `H(t)`.
    pub fn hamiltonian_at(&self, t: T) -> CMatrix<T> {
        let dim = self.space.dim();
        let mut h = self.static_h.matrix_at(t);
        for d in &self.drives {
            h = &h + &d.operator_at(t);
        }
        for c in &self.czs {
            h = &h + &c.operator_at(t, dim);
        }
        h
    }

    /// Straightforward dense Lindbladian, used to cross-check [`PieceRhs`].
    pub fn dense_rhs(&self, t: T, rho: &CMatrix<T>) -> CMatrix<T> {
        let h = self.hamiltonian_at(t);
        let mi = Complex::new(T::zero(), -T::one());
        let mut out = (&h.matmul(rho) - &rho.matmul(&h)).scale(mi);
        let half = Complex::new(lit::<T>(0.5), T::zero());
        for c in &self.collapse {
            let l = c.dense(&self.space);
            let ld = l.dagger();
            let ldl = ld.matmul(&l);
            let jump = l.matmul(rho).matmul(&ld);
            let anti = (&ldl.matmul(rho) + &rho.matmul(&ldl)).scale(half);
            out = &out + &(&jump - &anti);
        }
        out
    }

    /// RHS specialised to the pulses active throughout `[a, b]`.
    pub fn piece(&self, a: T, b: T) -> PieceRhs<'_, T> {
        let mid = (a + b) / lit(2.0);
        let space = &self.space;
        let dim = space.dim();

        let mut energy = self.static_h.diagonal.clone();
        for c in self.czs.iter().filter(|c| c.start <= mid && mid < c.end) {
            for &i in &c.support {
                energy[i] = energy[i] + c.zeta;
            }
        }
        // Γ_i = Σ_k ⟨i|L_k†L_k|i⟩ and the dephasing jump weight w_ij.
        let mut gamma = vec![T::zero(); dim];
        let mut z_rates: Vec<(usize, T)> = Vec::new();
        let mut damping = Vec::new();
        for c in &self.collapse {
            match c.kind {
                CollapseKind::Damping => {
                    for (i, g) in gamma.iter_mut().enumerate() {
                        *g = *g + c.rate * lit(space.level(i, c.qubit) as f64);
                    }
                    damping.push((c.rate, SparseOp::lowering(space, c.qubit)));
                }
                CollapseKind::Dephasing => {
                    for (i, g) in gamma.iter_mut().enumerate() {
                        if space.level(i, c.qubit) < 2 {
                            *g = *g + c.rate;
                        }
                    }
                    z_rates.push((c.qubit, c.rate));
                }
            }
        }
        let half = lit::<T>(0.5);
        let gen: Vec<Complex<T>> = (0..dim).map(|i| Complex::new(-half * gamma[i], -energy[i])).collect();
        let mut jump_weight = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                jump_weight[i * dim + j] = z_rates
                    .iter()
                    .map(|&(q, r)| r * z_weight::<T>(space.level(i, q)) * z_weight::<T>(space.level(j, q)))
                    .fold(T::zero(), |a, b| a + b);
            }
        }

        let mut terms: Vec<ActiveTerm<'_, T>> = self.static_h.hopping.iter().map(ActiveTerm::Hop).collect();
        terms.extend(self.drives.iter().filter(|d| d.start <= mid && mid < d.start + d.duration).map(ActiveTerm::Drive));

        let zero = Complex::new(T::zero(), T::zero());
        PieceRhs {
            dim,
            t0: a,
            gen,
            has_dephasing: !z_rates.is_empty(),
            jump_weight,
            damping,
            terms,
            fwd: vec![zero; dim],
            lab: vec![zero; dim * dim],
            scratch: vec![zero; dim * dim],
        }
    }

    /// Times at which the set of active terms changes.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut v: Vec<T> = Vec::new();
        for d in &self.drives {
            v.push(d.start);
            v.push(d.start + d.duration);
        }
        for c in &self.czs {
            v.push(c.start);
            v.push(c.end);
        }
        v
    }
}

enum ActiveTerm<'a, T: Real> {
    Drive(&'a DriveTerm<T>),
    Hop(&'a HoppingTerm<T>),
}

impl<T: Real> ActiveTerm<'_, T> {
    fn parts(&self, t: T) -> (Complex<T>, &SparseOp<T>) {
        match self {
            ActiveTerm::Drive(d) => (d.coefficient(t), &d.op),
            ActiveTerm::Hop(h) => (h.coefficient(t), &h.op),
        }
    }
}

/// `dρ/dt` on one smooth piece of the schedule, in the interaction picture
/// of its diagonal generator.
///
/// With `u_i = −iE_i − Γ_i/2` and `D(τ) = diag(e^{u_i τ})`, `τ = t − a`, the
/// solver variable is `ρ̃ = D⁻¹ ρ D⁻†`. The diagonal part of the Lindbladian
/// is then solved exactly and the integrator only sees the drive, hopping
/// and jump terms. `ρ̃ = ρ` at the start of the piece.
pub struct PieceRhs<'a, T: Real> {
    dim: usize,
    t0: T,
    gen: Vec<Complex<T>>,
    has_dephasing: bool,
    /// Dephasing jump weight `w_ij`.
    jump_weight: Vec<T>,
    damping: Vec<(T, SparseOp<T>)>,
    terms: Vec<ActiveTerm<'a, T>>,
    fwd: Vec<Complex<T>>,
    lab: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> PieceRhs<'_, T> {
    fn set_factors(&mut self, t: T) {
        let tau = t - self.t0;
        for (f, u) in self.fwd.iter_mut().zip(&self.gen) {
            *f = (*u * tau).exp();
        }
    }

    /// `ρ = D ρ̃ D†` at time `t`.
    pub fn to_lab(&mut self, t: T, y: &[Complex<T>], out: &mut [Complex<T>]) {
        self.set_factors(t);
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.fwd[i] * y[i * n + j] * self.fwd[j].conj();
            }
        }
    }

    /// `ρ_ii / ρ̃_ii` at time `t`.
    pub fn population_factor(&self, t: T, i: usize) -> T {
        let tau = t - self.t0;
        (lit::<T>(2.0) * self.gen[i].re * tau).exp()
    }

    /// `dρ̃/dt`.
    pub fn eval(&mut self, t: T, y: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        if self.terms.is_empty() && self.damping.is_empty() && !self.has_dephasing {
            out.iter_mut().for_each(|v| *v = zero);
            return;
        }
        let mut lab = std::mem::take(&mut self.lab);
        self.to_lab(t, y, &mut lab);
        self.lab_nondiagonal(t, &lab, out);
        self.lab = lab;
        for i in 0..n {
            let fi = self.fwd[i];
            for j in 0..n {
                // Divide by e^{u_i τ}·conj(e^{u_j τ}).
                let f = fi * self.fwd[j].conj();
                out[i * n + j] = out[i * n + j] / f;
            }
        }
    }

    /// Lab-frame `dρ/dt` including the diagonal generator. Used for checks.
    pub fn lab_rhs(&mut self, t: T, rho: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.dim;
        self.lab_nondiagonal(t, rho, out);
        for i in 0..n {
            for j in 0..n {
                let c = self.gen[i] + self.gen[j].conj();
                out[i * n + j] = out[i * n + j] + c * rho[i * n + j];
            }
        }
    }

    /// Everything except `(u_i + ū_j)·ρ_ij`, acting on a lab-frame `ρ`.
    fn lab_nondiagonal(&mut self, t: T, y: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        if self.has_dephasing {
            for ((o, &w), &v) in out.iter_mut().zip(&self.jump_weight).zip(y) {
                *o = v * w;
            }
        } else {
            out.iter_mut().for_each(|v| *v = zero);
        }
        for (rate, op) in &self.damping {
            for &(r1, c1, v1) in &op.entries {
                let w1 = *rate * v1;
                let row = &mut out[r1 * n..(r1 + 1) * n];
                let src = &y[c1 * n..(c1 + 1) * n];
                for &(r2, c2, v2) in &op.entries {
                    row[r2] = row[r2] + src[c2] * (w1 * v2);
                }
            }
        }
        if self.terms.is_empty() {
            return;
        }
        // X = Hρ for the off-diagonal part; then −i[H, ρ] = −i(X − X†).
        let x = &mut self.scratch;
        x.iter_mut().for_each(|v| *v = zero);
        for term in &self.terms {
            let (f, op) = term.parts(t);
            let fc = f.conj();
            for &(r, c, v) in &op.entries {
                let (fv, fcv) = (f * v, fc * v);
                for j in 0..n {
                    x[r * n + j] = x[r * n + j] + fv * y[c * n + j];
                    x[c * n + j] = x[c * n + j] + fcv * y[r * n + j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = x[i * n + j] - x[j * n + i].conj();
                // −i·d
                out[i * n + j] = out[i * n + j] + Complex::new(d.im, -d.re);
            }
        }
    }
}

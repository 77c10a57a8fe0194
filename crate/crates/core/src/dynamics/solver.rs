//! Dormand–Prince 5(4) with FSAL and the Hairer continuous extension.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest step accepted before giving up (ns).
pub const MIN_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
}

/// Interpolant over one accepted step `[t, t + h]`.
pub struct StepView<'a, T: Real> {
    pub t: T,
    pub h: T,
    rcont: &'a [Vec<Complex<T>>; 5],
}

impl<T: Real> StepView<'_, T> {
    pub fn value(&self, theta: T, k: usize) -> Complex<T> {
        let r = self.rcont;
        let t1 = T::one() - theta;
        r[0][k] + (r[1][k] + (r[2][k] + (r[3][k] + r[4][k] * t1) * theta) * t1) * theta
    }

    pub fn fill(&self, theta: T, out: &mut [Complex<T>]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.value(theta, k);
        }
    }
}

pub struct Dopri5<T: Real> {
    tol: Tolerances,
    n: usize,
    k: [Vec<Complex<T>>; 7],
    y1: Vec<Complex<T>>,
    ytmp: Vec<Complex<T>>,
    rcont: [Vec<Complex<T>>; 5],
    /// Step carried across calls.
    h: Option<T>,
    fsal_valid: bool,
    /// Upper bound on the step size, if any.
    pub max_step: Option<T>,
    pub evaluations: u64,
    pub accepted: u64,
    pub rejected: u64,
}

impl<T: Real> Dopri5<T> {
    pub fn new(n: usize, tol: Tolerances) -> Self {
        let z = || vec![Complex::new(T::zero(), T::zero()); n];
        Self {
            tol,
            n,
            k: [z(), z(), z(), z(), z(), z(), z()],
            y1: z(),
            ytmp: z(),
            rcont: [z(), z(), z(), z(), z()],
            h: None,
            fsal_valid: false,
            max_step: None,
            evaluations: 0,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Forgets the FSAL stage; call whenever the RHS changes.
    pub fn reset_rhs(&mut self) {
        self.fsal_valid = false;
    }

    /// Worst entry of `|err_i| / (atol + rtol·max(|y0_i|, |y1_i|))`.
    fn norm(&self, y0: &[Complex<T>], y1: &[Complex<T>], err: &[Complex<T>]) -> T {
        let (atol, rtol) = (lit::<T>(self.tol.atol), lit::<T>(self.tol.rtol));
        let mut worst = T::zero();
        for ((a, b), e) in y0.iter().zip(y1).zip(err) {
            let sc = atol + rtol * a.norm_sqr().max(b.norm_sqr()).sqrt();
            let r = e.norm_sqr() / (sc * sc);
            if !(r <= worst) {
                worst = r;
            }
        }
        worst.sqrt()
    }

    fn initial_step(&mut self, f: &mut impl FnMut(T, &[Complex<T>], &mut [Complex<T>]), t: T, y: &[Complex<T>], span: T) -> T {
        // Hairer & Wanner's starting-step heuristic, order 5.
        let d0 = self.norm(y, y, y);
        let d1 = self.norm(y, y, &self.k[0]);
        let mut h0 = if d0 < lit(1e-5) || d1 < lit(1e-5) { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
        h0 = h0.min(span);
        for ((yt, y), k) in self.ytmp.iter_mut().zip(y).zip(&self.k[0]) {
            *yt = y + k * h0;
        }
        let mut f1 = std::mem::take(&mut self.y1);
        f(t + h0, &self.ytmp, &mut f1);
        self.evaluations += 1;
        let diff: Vec<Complex<T>> = f1.iter().zip(&self.k[0]).map(|(a, b)| a - b).collect();
        self.y1 = f1;
        let d2 = self.norm(y, y, &diff) / h0;
        let h1 =
            if d1.max(d2) <= lit(1e-15) { (h0 * lit(1e-3)).max(lit(1e-6)) } else { (lit::<T>(0.01) / d1.max(d2)).powf(lit(0.2)) };
        (h0 * lit(100.0)).min(h1).min(span)
    }

    /// Integrates `y` from `t0` to `t1` exactly, calling `on_step` after each
    /// accepted step with the step interpolant.
    pub fn integrate<F, S>(&mut self, f: &mut F, t0: T, t1: T, y: &mut [Complex<T>], mut on_step: S) -> Result<()>
    where
        F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
        S: FnMut(&StepView<'_, T>) -> Result<()>,
    {
        assert_eq!(y.len(), self.n);
        if t1 <= t0 {
            return Ok(());
        }
        if !self.fsal_valid {
            let mut k0 = std::mem::take(&mut self.k[0]);
            f(t0, y, &mut k0);
            self.k[0] = k0;
            self.evaluations += 1;
            self.fsal_valid = true;
        }
        let span = t1 - t0;
        let mut h = match self.h {
            Some(h) => h.min(span),
            None => self.initial_step(f, t0, y, span),
        };
        let mut t = t0;
        let mut last_rejected = false;
        let c = |x: f64| lit::<T>(x);
        loop {
            if let Some(m) = self.max_step {
                h = h.min(m);
            }
            let remaining = t1 - t;
            let proposed = h;
            let last = h >= remaining * c(0.999_999);
            if last {
                h = remaining;
            }
            if to_f64(h) < MIN_STEP {
                return Err(Error::StepUnderflow { time: to_f64(t), step: to_f64(h) });
            }
            self.stages(f, t, h, y);
            let mut err = std::mem::take(&mut self.ytmp);
            for (i, e) in err.iter_mut().enumerate() {
                let k = &self.k;
                *e = (k[0][i] * c(E1) + k[2][i] * c(E3) + k[3][i] * c(E4) + k[4][i] * c(E5) + k[5][i] * c(E6) + k[6][i] * c(E7))
                    * h;
            }
            let en = self.norm(y, &self.y1, &err);
            self.ytmp = err;
            if en <= T::one() {
                for i in 0..self.n {
                    let k = &self.k;
                    let dy = self.y1[i] - y[i];
                    self.rcont[0][i] = y[i];
                    self.rcont[1][i] = dy;
                    let bspl = k[0][i] * h - dy;
                    self.rcont[2][i] = bspl;
                    self.rcont[3][i] = dy - k[6][i] * h - bspl;
                    self.rcont[4][i] = (k[0][i] * c(D1)
                        + k[2][i] * c(D3)
                        + k[3][i] * c(D4)
                        + k[4][i] * c(D5)
                        + k[5][i] * c(D6)
                        + k[6][i] * c(D7))
                        * h;
                }
                on_step(&StepView { t, h, rcont: &self.rcont })?;
                y.copy_from_slice(&self.y1);
                self.k.swap(0, 6);
                self.accepted += 1;
                let fac_max = if last_rejected { T::one() } else { c(10.0) };
                let fac = if en == T::zero() { fac_max } else { (c(0.9) * en.powf(c(-0.2))).min(fac_max).max(c(0.2)) };
                let h_next = h * fac;
                last_rejected = false;
                if last {
                    // A step clipped to the endpoint says little about the next piece.
                    self.h = Some(h_next.max(proposed.min(c(10.0) * h)));
                    return Ok(());
                }
                t = t + h;
                h = h_next;
            } else {
                if !en.is_finite() {
                    h = h * c(0.2);
                } else {
                    h = h * (c(0.9) * en.powf(c(-0.2))).max(c(0.2));
                }
                self.rejected += 1;
                last_rejected = true;
            }
        }
    }

    fn stages<F>(&mut self, f: &mut F, t: T, h: T, y: &[Complex<T>])
    where
        F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
    {
        let c = |x: f64| lit::<T>(x);
        let n = self.n;
        macro_rules! stage {
            ($dst:expr, $ct:expr, |$i:ident| $combo:expr) => {{
                for $i in 0..n {
                    self.ytmp[$i] = y[$i] + $combo * h;
                }
                let mut out = std::mem::take(&mut self.k[$dst]);
                f(t + h * c($ct), &self.ytmp, &mut out);
                self.k[$dst] = out;
                self.evaluations += 1;
            }};
        }
        stage!(1, C2, |i| self.k[0][i] * c(A21));
        stage!(2, C3, |i| self.k[0][i] * c(A31) + self.k[1][i] * c(A32));
        stage!(3, C4, |i| self.k[0][i] * c(A41) + self.k[1][i] * c(A42) + self.k[2][i] * c(A43));
        stage!(4, C5, |i| self.k[0][i] * c(A51) + self.k[1][i] * c(A52) + self.k[2][i] * c(A53) + self.k[3][i] * c(A54));
        stage!(5, 1.0, |i| self.k[0][i] * c(A61)
            + self.k[1][i] * c(A62)
            + self.k[2][i] * c(A63)
            + self.k[3][i] * c(A64)
            + self.k[4][i] * c(A65));
        for i in 0..n {
            let k = &self.k;
            self.y1[i] =
                y[i] + (k[0][i] * c(A71) + k[2][i] * c(A73) + k[3][i] * c(A74) + k[4][i] * c(A75) + k[5][i] * c(A76)) * h;
        }
        let mut out = std::mem::take(&mut self.k[6]);
        f(t + h, &self.y1, &mut out);
        self.k[6] = out;
        self.evaluations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn harmonic_oscillator_and_dense_output() {
        // y' = iωy, y(0) = 1
        let w = 0.7;
        let mut f = |_t: f64, y: &[Complex<f64>], out: &mut [Complex<f64>]| out[0] = y[0] * cplx(0.0, w);
        let mut s = Dopri5::new(1, Tolerances { atol: 1e-12, rtol: 1e-10 });
        let mut y = vec![cplx(1.0, 0.0)];
        let mut worst = 0.0f64;
        s.integrate(&mut f, 0.0, 50.0, &mut y, |v| {
            for k in 0..=4 {
                let th = k as f64 / 4.0;
                let t = v.t + th * v.h;
                worst = worst.max((v.value(th, 0) - cplx::<f64>(0.0, w * t).exp()).norm());
            }
            Ok(())
        })
        .unwrap();
        assert!((y[0] - cplx::<f64>(0.0, w * 50.0).exp()).norm() < 1e-8);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn lands_exactly_on_endpoint_and_resumes() {
        let mut f = |_t: f64, y: &[Complex<f64>], out: &mut [Complex<f64>]| out[0] = -y[0];
        let mut s = Dopri5::new(1, Tolerances { atol: 1e-12, rtol: 1e-10 });
        let mut y = vec![cplx(1.0, 0.0)];
        let mut last = 0.0;
        s.integrate(&mut f, 0.0, 1.0, &mut y, |v| {
            last = v.t + v.h;
            Ok(())
        })
        .unwrap();
        assert_eq!(last, 1.0);
        s.integrate(&mut f, 1.0, 3.0, &mut y, |_| Ok(())).unwrap();
        assert!((y[0].re - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn stiff_problem_underflows() {
        let mut f = |t: f64, y: &[Complex<f64>], out: &mut [Complex<f64>]| out[0] = y[0] * (1.0 / (1.0 - t).powi(3)) + 1.0;
        let mut s = Dopri5::new(1, Tolerances { atol: 1e-12, rtol: 1e-12 });
        let mut y = vec![cplx(1.0, 0.0)];
        let err = s.integrate(&mut f, 0.0, 2.0, &mut y, |_| Ok(()));
        assert!(matches!(err, Err(Error::StepUnderflow { .. })));
    }
}

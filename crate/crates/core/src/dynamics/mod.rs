//! Lindblad evolution of the multi-level transmon model driven by a pulse
//! schedule, plus the state analysis used downstream (projection, fidelity,
//! shot sampling).

mod analysis;
mod density;
mod model;
mod solver;
mod space;

pub use analysis::{fidelity, project_computational, pure_state_fidelity, sample_counts};
pub use density::{DensityMatrix, StateDocument};
pub use model::{
    build_collapse_ops, build_cz_term, build_drive_term, build_static_hamiltonian, CollapseKind, CollapseOp, CzTerm, DriveTerm,
    HoppingTerm, LindbladModel, PieceRhs, SparseOp, StaticHamiltonian,
};
pub use solver::{Dopri5, StepView, Tolerances, MIN_STEP};
pub use space::{HilbertSpace, MAX_DIM};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::pulse::PulseSchedule;
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Cap on the integrator step (ns).
    pub max_step_ns: Option<f64>,
    /// Spacing of the recorded population samples (ns).
    pub output_dt: f64,
    pub decoherence: bool,
    pub shots: u64,
    pub seed: u64,
    /// Integrate at least this long, idling after the schedule ends.
    pub duration_ns: Option<f64>,
    /// Full eigenvalue check every this many samples (snapshots always).
    pub positivity_stride: usize,
    pub trace_tol: f64,
    pub psd_tol: f64,
    /// Rotate stored states by the schedule's residual virtual-Z frames.
    pub apply_frames: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            atol: 1e-11,
            rtol: 1e-8,
            max_step_ns: Some(2.0),
            output_dt: 0.01,
            decoherence: true,
            shots: 1000,
            seed: 0,
            duration_ns: None,
            positivity_stride: 1000,
            trace_tol: 1e-8,
            psd_tol: 1e-8,
            apply_frames: true,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("atol", self.atol), ("rtol", self.rtol), ("output_dt", self.output_dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invariant(name, "must be positive"));
            }
        }
        if self.positivity_stride == 0 {
            return Err(Error::invariant("positivity_stride", "must be at least 1"));
        }
        Ok(())
    }
}

pub const SNAPSHOT_GATES_END: &str = "gates_end";
pub const SNAPSHOT_READOUT_ONSET: &str = "readout_onset";
pub const SNAPSHOT_FINAL: &str = "final";

#[derive(Debug, Clone)]
pub struct Snapshot<T: Real> {
    pub name: &'static str,
    pub time_ns: f64,
    pub state: DensityMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct SimResult<T: Real> {
    pub space: HilbertSpace,
    pub times: Vec<f64>,
    /// Computational basis labels, in column order of `populations`.
    pub labels: Vec<String>,
    /// One row per sample: `ρ_bb` for each computational `b`.
    pub populations: Vec<Vec<f64>>,
    /// `1 − Tr(PρP)` per sample.
    pub leakage: Vec<f64>,
    pub final_state: DensityMatrix<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub frames: Vec<f64>,
    pub rhs_evaluations: u64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
    pub min_purity: f64,
}

impl<T: Real> SimResult<T> {
    pub fn snapshot(&self, name: &str) -> Option<&Snapshot<T>> {
        self.snapshots.iter().find(|s| s.name == name)
    }

    /// State that readout samples: readout onset when present, else final.
    pub fn readout_state(&self) -> &DensityMatrix<T> {
        self.snapshot(SNAPSHOT_READOUT_ONSET).map(|s| &s.state).unwrap_or(&self.final_state)
    }

    pub fn populations_csv(&self) -> String {
        let mut out = String::from("time_ns");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push_str(",leakage\n");
        for ((t, row), leak) in self.times.iter().zip(&self.populations).zip(&self.leakage) {
            write!(out, "{t}").unwrap();
            for p in row {
                write!(out, ",{p:e}").unwrap();
            }
            writeln!(out, ",{leak:e}").unwrap();
        }
        out
    }

    /// Counts from the readout-onset state.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
        let (proj, _) = project_computational(self.readout_state(), &self.space)?;
        Ok(sample_counts(&proj, shots, seed))
    }
}

fn sample_grid(end: f64, dt: f64) -> Vec<f64> {
    let k_max = (end / dt + 1e-9).floor() as u64;
    let mut v: Vec<f64> = (0..=k_max).map(|k| k as f64 * dt).collect();
    if end - v.last().copied().unwrap_or(0.0) > 1e-9 {
        v.push(end);
    }
    v
}

/// Integrates the Lindblad equation over the whole schedule (and any extra
/// idle time), starting from `rho0` or the ground state.
pub fn evolve<T: Real>(
    schedule: &PulseSchedule,
    p: &PlatformSpec,
    rho0: Option<&DensityMatrix<T>>,
    opts: &SimOptions,
) -> Result<SimResult<T>> {
    opts.validate()?;
    p.validate()?;
    let space = HilbertSpace::new(p.n_qubits(), p.levels_per_qubit)?;
    let dim = space.dim();
    let model = LindbladModel::<T>::from_schedule(schedule, p, space, opts.decoherence)?;
    let rho0 = match rho0 {
        Some(r) if r.dim() != dim => return Err(Error::DimensionMismatch { left: r.dim(), right: dim }),
        Some(r) => r.clone(),
        None => DensityMatrix::ground(&space),
    };

    let gate_end = schedule.gate_end_ns();
    let readout = schedule.readout_onset_ns();
    let t_end = schedule.total_duration_ns.max(opts.duration_ns.unwrap_or(0.0));

    let mut cuts: Vec<f64> = model.breakpoints().into_iter().map(to_f64).collect();
    cuts.extend([0.0, gate_end, t_end]);
    cuts.extend(readout);
    cuts.retain(|&t| (0.0..=t_end).contains(&t));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let comp = space.computational_indices();
    let grid = sample_grid(t_end, opts.output_dt);
    let mut times = Vec::with_capacity(grid.len());
    let mut populations = Vec::with_capacity(grid.len());
    let mut leakage = Vec::with_capacity(grid.len());
    let mut max_trace_error = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut min_purity = f64::INFINITY;
    let herm_tol = 1e-10f64.max(to_f64(T::epsilon()) * 1e3);

    let check_full = |rho: &DensityMatrix<T>, t: f64, min_eig: &mut f64, min_purity: &mut f64| -> Result<()> {
        let e = to_f64(rho.min_eigenvalue()?);
        *min_eig = min_eig.min(e);
        *min_purity = min_purity.min(to_f64(rho.purity()));
        rho.check_at(t, lit(herm_tol), lit(opts.trace_tol), lit(opts.psd_tol))
    };

    let record = |diag: &[T], t: f64, times: &mut Vec<f64>, pops: &mut Vec<Vec<f64>>, leak: &mut Vec<f64>| -> Result<f64> {
        let tr: f64 = diag.iter().map(|&d| to_f64(d)).sum();
        let row: Vec<f64> = comp.iter().map(|&i| to_f64(diag[i])).collect();
        let in_comp: f64 = row.iter().sum();
        times.push(t);
        pops.push(row);
        leak.push(1.0 - in_comp);
        let err = (tr - 1.0).abs();
        if err > opts.trace_tol {
            return Err(Error::StateInvariant { invariant: "trace", time: t, detail: format!("Tr ρ = {tr}") });
        }
        Ok(err)
    };

    let mut y: Vec<Complex<T>> = rho0.as_slice().to_vec();
    let diag_of = |y: &[Complex<T>]| -> Vec<T> { (0..dim).map(|i| y[i * dim + i].re).collect() };

    let mut next = 0usize;
    if grid.first() == Some(&0.0) {
        max_trace_error = max_trace_error.max(record(&diag_of(&y), 0.0, &mut times, &mut populations, &mut leakage)?);
        next = 1;
    }
    check_full(&rho0, 0.0, &mut min_eig, &mut min_purity)?;

    let mut solver = Dopri5::<T>::new(dim * dim, Tolerances { atol: opts.atol, rtol: opts.rtol });
    solver.max_step = opts.max_step_ns.map(lit);
    let mut snapshots = Vec::new();
    let mut scratch_diag = vec![T::zero(); dim];
    let mut scratch_full = vec![Complex::new(T::zero(), T::zero()); dim * dim];

    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let rhs = std::cell::RefCell::new(model.piece(lit(a), lit(b)));
        let mut f = |t: T, y: &[Complex<T>], out: &mut [Complex<T>]| rhs.borrow_mut().eval(t, y, out);
        solver.reset_rhs();
        solver.integrate(&mut f, lit(a), lit(b), &mut y, |step| {
            let (t0, h) = (to_f64(step.t), to_f64(step.h));
            let t1 = if next < grid.len() && (t0 + h - b).abs() < 1e-9 { b } else { t0 + h };
            while next < grid.len() && grid[next] <= t1 + 1e-9 {
                let ts = grid[next];
                let theta = lit::<T>(((ts - t0) / h).clamp(0.0, 1.0));
                let tl = lit::<T>(ts);
                for (i, d) in scratch_diag.iter_mut().enumerate() {
                    *d = step.value(theta, i * dim + i).re * rhs.borrow().population_factor(tl, i);
                }
                max_trace_error = max_trace_error.max(record(&scratch_diag, ts, &mut times, &mut populations, &mut leakage)?);
                if next.is_multiple_of(opts.positivity_stride) {
                    step.fill(theta, &mut scratch_full);
                    let mut lab = vec![Complex::new(T::zero(), T::zero()); dim * dim];
                    rhs.borrow_mut().to_lab(tl, &scratch_full, &mut lab);
                    let mut rho = DensityMatrix::from_matrix_unchecked(crate::linalg::CMatrix::from_vec(dim, dim, lab));
                    rho.symmetrize();
                    check_full(&rho, ts, &mut min_eig, &mut min_purity)?;
                }
                next += 1;
            }
            Ok(())
        })?;
        rhs.borrow_mut().to_lab(lit(b), &y, &mut scratch_full);
        y.copy_from_slice(&scratch_full);
        let mut names = Vec::new();
        if (b - gate_end).abs() < 1e-9 {
            names.push(SNAPSHOT_GATES_END);
        }
        if readout.is_some_and(|r| (b - r).abs() < 1e-9) {
            names.push(SNAPSHOT_READOUT_ONSET);
        }
        if !names.is_empty() {
            let mut rho = DensityMatrix::from_matrix_unchecked(crate::linalg::CMatrix::from_vec(dim, dim, y.clone()));
            rho.symmetrize();
            check_full(&rho, b, &mut min_eig, &mut min_purity)?;
            for name in names {
                snapshots.push(Snapshot { name, time_ns: b, state: rho.clone() });
            }
        }
    }
    if gate_end == 0.0 {
        snapshots.insert(0, Snapshot { name: SNAPSHOT_GATES_END, time_ns: 0.0, state: rho0.clone() });
    }

    let mut final_state = DensityMatrix::from_matrix_unchecked(crate::linalg::CMatrix::from_vec(dim, dim, y));
    final_state.symmetrize();
    check_full(&final_state, t_end, &mut min_eig, &mut min_purity)?;
    snapshots.push(Snapshot { name: SNAPSHOT_FINAL, time_ns: t_end, state: final_state.clone() });

    let frames = schedule.frame_vec(space.n_qubits);
    if opts.apply_frames && frames.iter().any(|&f| f != 0.0) {
        for s in &mut snapshots {
            s.state = s.state.rotate_frames(&space, &frames);
        }
        final_state = final_state.rotate_frames(&space, &frames);
    }

    Ok(SimResult {
        space,
        times,
        labels: space.computational_labels(),
        populations,
        leakage,
        final_state,
        snapshots,
        frames,
        rhs_evaluations: solver.evaluations,
        accepted_steps: solver.accepted,
        rejected_steps: solver.rejected,
        max_trace_error,
        min_eigenvalue: min_eig,
        min_purity,
    })
}

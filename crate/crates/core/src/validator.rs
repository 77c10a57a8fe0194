//! Stage-by-stage verification of transpile → compile → simulate.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_unitary, global_phase_distance, Circuit, GateKind, ORACLE_MAX_QUBITS};
use crate::dynamics::{evolve, fidelity, project_computational, DensityMatrix, HilbertSpace, SimOptions, SimResult};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::pulse::{Channel, PulseKind, PulseSchedule};
use crate::transpiler::NativeCircuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    CircuitEquivalence,
    PulseValidity,
    Evolution,
    Fidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageVerdict {
    pub stage: Stage,
    pub passed: bool,
    pub metric: f64,
    /// Pass threshold the metric was compared against.
    pub threshold: f64,
    pub details: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdicts: Vec<StageVerdict>,
    /// Artifact name → path of intermediate outputs the verdicts refer to.
    pub artifacts: BTreeMap<String, String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, stage: Stage) -> Option<&StageVerdict> {
        self.verdicts.iter().find(|v| v.stage == stage)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Pass criteria. The evolution and fidelity defaults scale with the
/// circuit so that a clean pipeline passes by a margin; set the fixed
/// overrides to gate on absolute numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Max Frobenius distance after optimal global phase.
    pub equivalence: f64,
    /// Fixed max `1 − F` for the evolution stage, if set.
    pub evolution: Option<f64>,
    /// Coherent error allowance per drive pulse when `evolution` is unset.
    pub evolution_per_pulse: f64,
    /// Floor on the evolution tolerance.
    pub evolution_floor: f64,
    /// Fixed minimum fidelity, if set.
    pub min_fidelity: Option<f64>,
    /// Multiple of the first-order decoherence estimate allowed when
    /// `min_fidelity` is unset.
    pub decoherence_margin: f64,
    /// Output spacing for the validator's own noise-free evolution (ns).
    pub evolution_output_dt: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            equivalence: 1e-9,
            evolution: None,
            evolution_per_pulse: 1e-3,
            evolution_floor: 1e-6,
            min_fidelity: None,
            decoherence_margin: 2.0,
            evolution_output_dt: 1.0,
        }
    }
}

impl Thresholds {
    pub fn evolution_tolerance(&self, schedule: &PulseSchedule) -> f64 {
        self.evolution.unwrap_or_else(|| {
            let drives = schedule.pulses.iter().filter(|p| p.kind == PulseKind::Drive).count() as f64;
            (self.evolution_per_pulse * drives).max(self.evolution_floor)
        })
    }

    /// `1 − margin·Σ_q t·(1/(2T1) + 1/T2)` with `t` the readout onset, on
    /// top of the coherent allowance.
    pub fn fidelity_floor(&self, schedule: &PulseSchedule, p: &PlatformSpec, decoherence: bool) -> f64 {
        if let Some(f) = self.min_fidelity {
            return f;
        }
        let t = schedule.readout_onset_ns().unwrap_or(schedule.total_duration_ns);
        let rate: f64 = if decoherence {
            p.qubits.iter().map(|q| q.t1.map_or(0.0, |t1| 0.5 / t1) + q.t2.map_or(0.0, |t2| 1.0 / t2)).sum()
        } else {
            0.0
        };
        (1.0 - self.decoherence_margin * t * rate - self.evolution_tolerance(schedule)).max(0.0)
    }
}

fn verdict(stage: Stage, passed: bool, metric: f64, threshold: f64, details: String) -> StageVerdict {
    StageVerdict { stage, passed, metric, threshold, details }
}

/// `U_native·RZ(frames)·P_init ≍ P_final·U_original` up to global phase.
pub fn validate_circuit_equivalence(original: &Circuit, native: &NativeCircuit, th: &Thresholds) -> Result<StageVerdict> {
    let n = native.n_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::TooLarge { n, cap: ORACLE_MAX_QUBITS });
    }
    if original.n_qubits > n {
        return Err(Error::DimensionMismatch { left: original.n_qubits, right: n });
    }
    let orig = Circuit::with_gates(n, original.without_measurements().gates);
    let u_native = circuit_unitary::<f64>(&native.with_frames_restored())?.matmul(&native.initial_layout.permutation_matrix());
    let u_orig = native.final_layout.permutation_matrix().matmul(&circuit_unitary::<f64>(&orig)?);
    let d = global_phase_distance(&u_native, &u_orig)?;
    let passed = d < th.equivalence;
    Ok(verdict(
        Stage::CircuitEquivalence,
        passed,
        d,
        th.equivalence,
        format!("{n}-qubit unitaries, Frobenius distance {d:.3e} after optimal global phase"),
    ))
}

/// Counts timing, mapping and readout violations.
pub fn validate_schedule(s: &PulseSchedule, native: &NativeCircuit, p: &PlatformSpec) -> StageVerdict {
    let mut problems: Vec<String> = Vec::new();
    for (a, b) in s.channel_conflicts() {
        problems.push(format!("pulses {a} and {b} overlap on a shared channel"));
    }

    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, pulse) in s.pulses.iter().enumerate() {
        by_label.entry(pulse.label).or_default().push(i);
        if pulse.start_ns < 0.0 || pulse.duration_ns <= 0.0 {
            problems.push(format!("pulse {i} has start {} / duration {}", pulse.start_ns, pulse.duration_ns));
        }
        if pulse.kind == PulseKind::Drive && !pulse.phase_rad.is_some_and(f64::is_finite) {
            problems.push(format!("drive pulse {i} lacks a finite phase"));
        }
    }
    let t = &p.timings;
    for (label, g) in native.circuit.gates.iter().enumerate() {
        let pulses = by_label.remove(&label).unwrap_or_default();
        let expect = match g.kind {
            GateKind::GPI2 => Some((PulseKind::Drive, Channel::Drive(g.qubits[0]), t.gpi2_duration)),
            GateKind::CZ => Some((PulseKind::Coupling, Channel::coupling(g.qubits[0], g.qubits[1]), t.cz_duration)),
            GateKind::M => Some((PulseKind::Readout, Channel::Readout(g.qubits[0]), t.readout_duration)),
            _ => None,
        };
        match (expect, pulses.as_slice()) {
            (None, []) => {}
            (None, extra) => problems.push(format!("gate {label} ({}) is virtual but has {} pulse(s)", g.kind, extra.len())),
            (Some((kind, ch, dur)), [i]) => {
                let pulse = &s.pulses[*i];
                if pulse.kind != kind || pulse.channel != ch || pulse.duration_ns != dur {
                    problems.push(format!(
                        "gate {label} ({}) mapped to {:?} on {} for {} ns, expected {:?} on {ch} for {dur} ns",
                        g.kind, pulse.kind, pulse.channel, pulse.duration_ns, kind
                    ));
                }
            }
            (Some(_), found) => problems.push(format!("gate {label} ({}) has {} pulses, expected 1", g.kind, found.len())),
        }
    }
    for (label, extra) in by_label {
        problems.push(format!("{} pulse(s) labelled {label} match no gate", extra.len()));
    }

    let onsets: Vec<f64> = s.readout_pulses().map(|p| p.start_ns).collect();
    if onsets.windows(2).any(|w| w[0] != w[1]) {
        problems.push("readout pulses do not start simultaneously".into());
    }
    if let Some(&onset) = onsets.first() {
        let gap = onset - s.gate_end_ns();
        if (gap - t.measurement_buffer).abs() > 1e-9 {
            problems.push(format!("buffer before readout is {gap} ns, platform sets {} ns", t.measurement_buffer));
        }
    }
    let max_end = s.pulses.iter().map(|p| p.end_ns()).fold(0.0, f64::max);
    if (s.total_duration_ns - max_end).abs() > 1e-9 {
        problems.push(format!("total_duration_ns {} differs from last pulse end {max_end}", s.total_duration_ns));
    }

    let n = problems.len();
    let details = if n == 0 { format!("{} pulses, no violations", s.pulses.len()) } else { problems.join("; ") };
    verdict(Stage::PulseValidity, n == 0, n as f64, 0.0, details)
}

/// Ideal output state `U_native-with-frames |0…0⟩` on the qubit subspace.
pub fn ideal_output_state(native: &NativeCircuit) -> Result<Vec<Complex<f64>>> {
    let u = circuit_unitary::<f64>(&native.with_frames_restored())?;
    Ok((0..u.rows()).map(|i| u[(i, 0)]).collect())
}

/// Noise-free evolution of `s` against the ideal output state; metric is `1 − F`.
pub fn validate_evolution(s: &PulseSchedule, p: &PlatformSpec, native: &NativeCircuit, th: &Thresholds) -> Result<StageVerdict> {
    if native.n_qubits() > 4 {
        return Err(Error::TooLarge { n: native.n_qubits(), cap: 4 });
    }
    let clean = p.without_decoherence();
    let opts = SimOptions { decoherence: false, output_dt: th.evolution_output_dt, ..Default::default() };
    let r = evolve::<f64>(s, &clean, None, &opts)?;
    let (proj, leak) = project_computational(r.readout_state(), &r.space)?;
    let psi = ideal_output_state(native)?;
    let f = fidelity(&proj, &DensityMatrix::pure(&psi))?;
    let metric = 1.0 - f;
    let tol = th.evolution_tolerance(s);
    Ok(verdict(
        Stage::Evolution,
        metric <= tol,
        metric,
        tol,
        format!("noise-free state infidelity {metric:.3e} (leakage {leak:.3e}) against the ideal output"),
    ))
}

/// Metric is `F` at readout onset (or the final state without readout).
pub fn validate_fidelity(result: &SimResult<f64>, target: &[Complex<f64>], min_fidelity: f64) -> Result<StageVerdict> {
    validate_state_fidelity(result.readout_state(), &result.space, target, min_fidelity)
}

/// [`validate_fidelity`] on a stored full-space state.
pub fn validate_state_fidelity(
    state: &DensityMatrix<f64>,
    space: &HilbertSpace,
    target: &[Complex<f64>],
    min_fidelity: f64,
) -> Result<StageVerdict> {
    let (proj, leak) = project_computational(state, space)?;
    let f = fidelity(&proj, &DensityMatrix::pure(target))?;
    Ok(verdict(
        Stage::Fidelity,
        f >= min_fidelity,
        f,
        min_fidelity,
        format!("state fidelity {f:.6} at readout onset (leakage {leak:.3e})"),
    ))
}

/// Runs the circuit, schedule and evolution stages, plus the fidelity stage
/// when a noisy result is supplied.
pub fn validate_all(
    original: &Circuit,
    native: &NativeCircuit,
    s: &PulseSchedule,
    p: &PlatformSpec,
    noisy: Option<(&SimResult<f64>, bool)>,
    th: &Thresholds,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    report.verdicts.push(validate_circuit_equivalence(original, native, th)?);
    report.verdicts.push(validate_schedule(s, native, p));
    report.verdicts.push(validate_evolution(s, p, native, th)?);
    if let Some((result, decoherence)) = noisy {
        let target = ideal_output_state(native)?;
        report.verdicts.push(validate_fidelity(result, &target, th.fidelity_floor(s, p, decoherence))?);
    }
    Ok(report)
}

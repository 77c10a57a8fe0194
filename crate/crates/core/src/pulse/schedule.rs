use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::platform::PlatformSpec;
use crate::transpiler::{NativeCircuit, VirtualFrames};

use super::{compile_gate, Channel, Pulse, PulseKind, PulseSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerPolicy {
    /// One physical pulse at a time, in program order.
    #[default]
    Sequential,
    Asap,
}

impl std::str::FromStr for SchedulerPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sequential" => Ok(Self::Sequential),
            "asap" => Ok(Self::Asap),
            _ => Err(format!("unknown scheduler policy '{s}' (expected sequential|asap)")),
        }
    }
}

/// Compiles and times every gate of `c`. Readouts all start at
/// `last_gate_end + measurement_buffer`.
///
/// # Panics
/// If the produced schedule has overlapping pulses on a channel.
pub fn schedule(c: &NativeCircuit, p: &PlatformSpec, policy: SchedulerPolicy) -> Result<PulseSchedule> {
    let n = c.n_qubits();
    let mut frames = VirtualFrames::new(n);
    let mut timed = Vec::new();
    let mut readouts = Vec::new();

    let mut cursor = 0.0_f64;
    let mut qubit_ready = vec![0.0_f64; n];
    let mut channel_free: HashMap<Channel, f64> = HashMap::new();

    for (label, g) in c.circuit.gates.iter().enumerate() {
        for mut pulse in compile_gate(g, label, &mut frames, p)? {
            if pulse.kind == PulseKind::Readout {
                readouts.push(pulse);
                continue;
            }
            pulse.start_ns = match policy {
                SchedulerPolicy::Sequential => cursor,
                SchedulerPolicy::Asap => {
                    let q = pulse.qubits.iter().map(|&q| qubit_ready[q]).fold(0.0, f64::max);
                    let ch = pulse
                        .occupied_channels()
                        .iter()
                        .map(|ch| channel_free.get(ch).copied().unwrap_or(0.0))
                        .fold(0.0, f64::max);
                    q.max(ch)
                }
            };
            let end = pulse.end_ns();
            cursor = end;
            for &q in &pulse.qubits {
                qubit_ready[q] = end;
            }
            for ch in pulse.occupied_channels() {
                channel_free.insert(ch, end);
            }
            timed.push(pulse);
        }
    }

    let gate_end = timed.iter().map(Pulse::end_ns).fold(0.0, f64::max);
    let readout_start = gate_end + p.timings.measurement_buffer;
    for mut r in readouts {
        r.start_ns = readout_start;
        timed.push(r);
    }
    timed.sort_by(|a, b| a.start_ns.partial_cmp(&b.start_ns).expect("finite start times"));

    let total = timed.iter().map(Pulse::end_ns).fold(0.0, f64::max);
    let frames: BTreeMap<String, f64> =
        (0..n).map(|q| (q.to_string(), c.final_frames.get(q).copied().unwrap_or(0.0) + frames.get(q))).collect();
    let out = PulseSchedule { platform: p.name.clone(), policy, total_duration_ns: total, pulses: timed, frames };
    let conflicts = out.channel_conflicts();
    assert!(conflicts.is_empty(), "scheduler produced overlapping pulses: {conflicts:?}");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{bell_circuit, build_qft, Circuit, Gate, GateKind};
    use crate::transpiler::test_support::line_platform;
    use crate::transpiler::{transpile, Layout, TranspileOptions};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bell_native() -> NativeCircuit {
        transpile(&bell_circuit(), &line_platform(2), &TranspileOptions::default()).unwrap().native
    }

    fn native(n: usize, gates: Vec<Gate>) -> NativeCircuit {
        NativeCircuit {
            circuit: Circuit::with_gates(n, gates),
            final_frames: vec![0.0; n],
            initial_layout: Layout::trivial(n),
            final_layout: Layout::trivial(n),
        }
    }

    #[test]
    fn bell_sequential_timeline() {
        let s = schedule(&bell_native(), &line_platform(2), SchedulerPolicy::Sequential).unwrap();
        let starts: Vec<(f64, PulseKind)> = s.pulses.iter().map(|p| (p.start_ns, p.kind)).collect();
        assert_eq!(
            starts,
            vec![
                (0.0, PulseKind::Drive),
                (40.0, PulseKind::Drive),
                (80.0, PulseKind::Coupling),
                (176.0, PulseKind::Drive),
                (272.0, PulseKind::Readout),
                (272.0, PulseKind::Readout),
            ]
        );
        assert_eq!(s.total_duration_ns, 1272.0);
        let phases: Vec<f64> = s.pulses.iter().filter_map(|p| p.phase_rad).collect();
        for (got, want) in phases.iter().zip([1.5 * PI, 1.5 * PI, 2.5 * PI]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_recovers_folded_circuit() {
        let native = bell_native();
        let s = schedule(&native, &line_platform(2), SchedulerPolicy::Asap).unwrap();
        let back = s.to_native_circuit(2);
        assert_eq!(back.circuit.without_measurements().gates, native.circuit.without_measurements().gates);
        assert_eq!(back.final_frames, native.final_frames);
    }

    #[test]
    fn bell_asap_parallel_drives() {
        let s = schedule(&bell_native(), &line_platform(2), SchedulerPolicy::Asap).unwrap();
        let drives: Vec<f64> = s.pulses.iter().filter(|p| p.kind == PulseKind::Drive).map(|p| p.start_ns).collect();
        assert_eq!(&drives[..2], &[0.0, 0.0]);
        assert_eq!(s.total_duration_ns, 1232.0);
    }

    #[test]
    fn unfolded_and_folded_agree() {
        let p = line_platform(2);
        let out = transpile(&bell_circuit(), &p, &TranspileOptions::default()).unwrap();
        let a = schedule(&out.native, &p, SchedulerPolicy::Sequential).unwrap();
        let b = schedule(&out.unfolded, &p, SchedulerPolicy::Sequential).unwrap();
        assert_eq!(a.total_duration_ns, b.total_duration_ns);
        for (x, y) in a.pulses.iter().zip(&b.pulses) {
            assert_eq!(x.start_ns, y.start_ns);
            assert!((x.phase_rad.unwrap_or(0.0) - y.phase_rad.unwrap_or(0.0)).abs() < 1e-12);
        }
        for q in 0..2 {
            assert!((a.frame_vec(2)[q] - b.frame_vec(2)[q]).abs() < 1e-12);
        }
    }

    #[test]
    fn same_qubit_serial() {
        let s =
            schedule(&native(1, vec![Gate::gpi2(0, 0.0), Gate::gpi2(0, 0.0)]), &line_platform(1), SchedulerPolicy::Sequential)
                .unwrap();
        assert_eq!(s.pulses[0].start_ns, 0.0);
        assert_eq!(s.pulses[1].start_ns, 40.0);
        assert!(s.readout_onset_ns().is_none());
        assert_eq!(s.total_duration_ns, 80.0);
    }

    #[test]
    fn cz_blocks_drives() {
        let gates = vec![Gate::two(GateKind::CZ, 0, 1), Gate::gpi2(1, 0.0), Gate::gpi2(2, 0.0)];
        let s = schedule(&native(3, gates), &line_platform(3), SchedulerPolicy::Asap).unwrap();
        let by_label: HashMap<usize, f64> = s.pulses.iter().map(|p| (p.label, p.start_ns)).collect();
        assert_eq!(by_label[&1], 96.0);
        assert_eq!(by_label[&2], 0.0);
    }

    #[test]
    fn qft2_sequential_duration_sum() {
        let p = line_platform(2);
        let mut qft = build_qft(2, true);
        qft.measure_all();
        let out = transpile(&qft, &p, &TranspileOptions::default()).unwrap();
        let s = schedule(&out.native, &p, SchedulerPolicy::Sequential).unwrap();
        let sum: f64 = s.pulses.iter().filter(|p| p.kind != PulseKind::Readout).map(|p| p.duration_ns).sum();
        assert_eq!(s.gate_end_ns(), sum);
        assert_eq!(s.total_duration_ns, sum + 56.0 + 1000.0);
    }

    #[test]
    fn deterministic_bytes() {
        let p = line_platform(2);
        let a = schedule(&bell_native(), &p, SchedulerPolicy::Sequential).unwrap().to_json_string().unwrap();
        let b = schedule(&bell_native(), &p, SchedulerPolicy::Sequential).unwrap().to_json_string().unwrap();
        assert_eq!(a, b);
        assert_eq!(PulseSchedule::from_json_str(&a).unwrap().to_json_string().unwrap(), a);
    }

    fn arb_native(n: usize) -> impl Strategy<Value = NativeCircuit> {
        let gate = prop_oneof![
            (0..n, -10.0..10.0f64).prop_map(|(q, phi)| Gate::gpi2(q, phi)),
            (0..n, -10.0..10.0f64).prop_map(|(q, t)| Gate::rz(q, t)),
            (0..n).prop_map(|q| Gate::single(GateKind::Z, q)),
            (0..n - 1).prop_map(|q| Gate::two(GateKind::CZ, q, q + 1)),
        ];
        (proptest::collection::vec(gate, 0..40), any::<bool>()).prop_map(move |(gates, measure)| {
            let mut c = native(n, gates);
            if measure {
                c.circuit.measure_all();
            }
            c
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn random_schedules_are_conflict_free(c in arb_native(4)) {
            let p = line_platform(4);
            let seq = schedule(&c, &p, SchedulerPolicy::Sequential).unwrap();
            let asap = schedule(&c, &p, SchedulerPolicy::Asap).unwrap();
            prop_assert!(seq.channel_conflicts().is_empty());
            prop_assert!(asap.channel_conflicts().is_empty());
            prop_assert!(asap.total_duration_ns <= seq.total_duration_ns);
            let physical: f64 = seq.pulses.iter().filter(|p| p.kind != PulseKind::Readout).map(|p| p.duration_ns).sum();
            prop_assert!((seq.gate_end_ns() - physical).abs() < 1e-9);
            let onsets: Vec<f64> = asap.readout_pulses().map(|p| p.start_ns).collect();
            prop_assert!(onsets.windows(2).all(|w| w[0] == w[1]));
            for w in seq.pulses.windows(2) {
                prop_assert!(w[0].start_ns <= w[1].start_ns);
            }
        }
    }
}

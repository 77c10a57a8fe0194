use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate, GateKind};

use super::NativeCircuit;

/// Per-qubit virtual-Z accumulators.
///
/// A frame `f` means the physical state equals `RZ(f)` applied to what the
/// pulses have produced so far. `RZ(θ)` adds `θ`; `Z` is taken as
/// `RZ(−π)` (equal up to global phase); a later `GPI2(φ)` is emitted as
/// `GPI2(φ − f)`, which follows from `GPI2(φ)·RZ(f) = RZ(f)·GPI2(φ − f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualFrames {
    frames: Vec<f64>,
}

impl VirtualFrames {
    pub fn new(n: usize) -> Self {
        Self { frames: vec![0.0; n] }
    }

    pub fn from_frames(frames: Vec<f64>) -> Self {
        Self { frames }
    }

    pub fn get(&self, q: usize) -> f64 {
        self.frames[q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.frames
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.frames
    }

    /// Records a diagonal single-qubit rotation; returns `false` for kinds
    /// that are not virtual.
    pub fn absorb(&mut self, g: &Gate) -> bool {
        match g.kind {
            GateKind::Z => self.frames[g.qubits[0]] -= PI,
            GateKind::RZ => self.frames[g.qubits[0]] += g.params[0],
            GateKind::I => {}
            _ => return false,
        }
        true
    }

    /// Drive phase for a `GPI2(φ)` on `q` under the current frame.
    pub fn shifted_phase(&self, q: usize, phi: f64) -> f64 {
        phi - self.frames[q]
    }
}

/// Removes every Z/RZ/I by shifting subsequent GPI2 phases. CZ is diagonal
/// and passes through; measurements are unaffected. Residual frames are
/// reported in `final_frames`.
pub fn fold_virtual_z(native: &NativeCircuit) -> NativeCircuit {
    let c = &native.circuit;
    let mut frames = VirtualFrames::from_frames(native.final_frames.clone());
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        if frames.absorb(g) {
            continue;
        }
        if g.kind == GateKind::GPI2 {
            gates.push(Gate::gpi2(g.qubits[0], frames.shifted_phase(g.qubits[0], g.params[0])));
        } else {
            gates.push(g.clone());
        }
    }
    NativeCircuit {
        circuit: Circuit { n_qubits: c.n_qubits, n_clbits: c.n_clbits, gates },
        final_frames: frames.into_vec(),
        initial_layout: native.initial_layout.clone(),
        final_layout: native.final_layout.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, global_phase_distance};
    use crate::transpiler::Layout;
    use proptest::prelude::*;

    fn native(n: usize, gates: Vec<Gate>) -> NativeCircuit {
        NativeCircuit {
            circuit: Circuit::with_gates(n, gates),
            final_frames: vec![0.0; n],
            initial_layout: Layout::trivial(n),
            final_layout: Layout::trivial(n),
        }
    }

    #[test]
    fn hadamard_folds_to_three_half_pi() {
        let f = fold_virtual_z(&native(1, vec![Gate::single(GateKind::Z, 0), Gate::gpi2(0, PI / 2.0)]));
        assert_eq!(f.circuit.gates, vec![Gate::gpi2(0, 3.0 * PI / 2.0)]);
        assert_eq!(f.final_frames, vec![-PI]);
    }

    #[test]
    fn bell_target_phases_accumulate_unreduced() {
        let f = fold_virtual_z(&native(
            2,
            vec![
                Gate::single(GateKind::Z, 1),
                Gate::gpi2(1, PI / 2.0),
                Gate::two(GateKind::CZ, 0, 1),
                Gate::single(GateKind::Z, 1),
                Gate::gpi2(1, PI / 2.0),
            ],
        ));
        let phases: Vec<f64> = f.circuit.gates.iter().filter(|g| g.kind == GateKind::GPI2).map(|g| g.params[0]).collect();
        assert_eq!(phases, vec![3.0 * PI / 2.0, 5.0 * PI / 2.0]);
        assert_eq!(f.final_frames[1], -2.0 * PI);
    }

    #[test]
    fn lone_rz_is_pure_frame() {
        let f = fold_virtual_z(&native(1, vec![Gate::rz(0, 0.42)]));
        assert!(f.circuit.gates.is_empty());
        assert_eq!(f.final_frames, vec![0.42]);
    }

    fn arb_native() -> impl Strategy<Value = Vec<Gate>> {
        let g = (0..4u8, 0..3usize, 1..3usize, -7.0..7.0f64).prop_map(|(k, q, off, a)| match k {
            0 => Gate::single(GateKind::Z, q),
            1 => Gate::rz(q, a),
            2 => Gate::gpi2(q, a),
            _ => Gate::two(GateKind::CZ, q, (q + off) % 3),
        });
        proptest::collection::vec(g, 0..20)
    }

    proptest! {
        #[test]
        fn restoring_frames_recovers_unitary(gates in arb_native()) {
            let n = native(3, gates);
            let f = fold_virtual_z(&n);
            prop_assert!(f.is_folded());
            let d = global_phase_distance(
                &circuit_unitary::<f64>(&f.with_frames_restored()).unwrap(),
                &circuit_unitary::<f64>(&n.circuit).unwrap(),
            ).unwrap();
            prop_assert!(d < 1e-9, "distance {}", d);
        }
    }
}

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::transpiler::VirtualFrames;

use super::{calibrate_pi2_amplitude, Channel, Pulse, PulseKind};

/// Maps one native gate to its unscheduled pulses (`start_ns = 0`).
///
/// Z/RZ/I only update `frames`. GPI2 phases are shifted by the current frame,
/// so an already-folded circuit compiles unchanged under zero frames.
pub fn compile_gate(g: &Gate, label: usize, frames: &mut VirtualFrames, p: &PlatformSpec) -> Result<Vec<Pulse>> {
    if !g.kind.is_native() {
        return Err(Error::NotNative { kind: g.kind.to_string() });
    }
    if frames.absorb(g) {
        return Ok(Vec::new());
    }
    let t = &p.timings;
    let pulse = match g.kind {
        GateKind::GPI2 => {
            let q = g.qubits[0];
            Pulse {
                channel: Channel::Drive(q),
                kind: PulseKind::Drive,
                start_ns: 0.0,
                duration_ns: t.gpi2_duration,
                phase_rad: Some(frames.shifted_phase(q, g.params[0])),
                amplitude: calibrate_pi2_amplitude(t.gpi2_duration),
                qubits: vec![q],
                label,
            }
        }
        GateKind::CZ => {
            let (a, b) = (g.qubits[0].min(g.qubits[1]), g.qubits[0].max(g.qubits[1]));
            if !p.are_coupled(a, b) {
                return Err(Error::Disconnected { a, b });
            }
            Pulse {
                channel: Channel::coupling(a, b),
                kind: PulseKind::Coupling,
                start_ns: 0.0,
                duration_ns: t.cz_duration,
                phase_rad: None,
                amplitude: 1.0,
                qubits: vec![a, b],
                label,
            }
        }
        GateKind::M => {
            let q = g.qubits[0];
            Pulse {
                channel: Channel::Readout(q),
                kind: PulseKind::Readout,
                start_ns: 0.0,
                duration_ns: t.readout_duration,
                phase_rad: None,
                amplitude: 1.0,
                qubits: vec![q],
                label,
            }
        }
        _ => unreachable!("virtual kinds handled above"),
    };
    Ok(vec![pulse])
}

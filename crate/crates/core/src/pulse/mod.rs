//! Native gates → calibrated, timed pulses.

mod calibration;
mod compile;
mod schedule;

pub use calibration::{calibrate_pi2_amplitude, GaussianEnvelope};
pub use compile::compile_gate;
pub use schedule::{schedule, SchedulerPolicy};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::transpiler::{Layout, NativeCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Drive(usize),
    /// Coupler of a pair, stored `(low, high)`.
    Coupling(usize, usize),
    Readout(usize),
}

impl Channel {
    pub fn coupling(a: usize, b: usize) -> Self {
        Channel::Coupling(a.min(b), a.max(b))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Drive(q) => write!(f, "drive_q{q}"),
            Channel::Coupling(a, b) => write!(f, "coupler_q{a}_q{b}"),
            Channel::Readout(q) => write!(f, "readout_q{q}"),
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invariant("channel", format!("unrecognized channel label '{s}'"));
        let num = |t: &str| t.strip_prefix('q').and_then(|n| n.parse::<usize>().ok()).ok_or_else(bad);
        if let Some(rest) = s.strip_prefix("drive_") {
            Ok(Channel::Drive(num(rest)?))
        } else if let Some(rest) = s.strip_prefix("readout_") {
            Ok(Channel::Readout(num(rest)?))
        } else if let Some(rest) = s.strip_prefix("coupler_") {
            let (a, b) = rest.split_once('_').ok_or_else(bad)?;
            Ok(Channel::coupling(num(a)?, num(b)?))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Drive,
    Coupling,
    Readout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub channel: Channel,
    pub kind: PulseKind,
    pub start_ns: f64,
    pub duration_ns: f64,
    /// Drive phase (rad), unreduced; `None` for coupling and readout pulses.
    pub phase_rad: Option<f64>,
    /// Peak Rabi rate (rad/ns) for drive pulses; activation factor otherwise.
    pub amplitude: f64,
    pub qubits: Vec<usize>,
    /// Index of the originating gate in the native circuit.
    pub label: usize,
}

impl Pulse {
    pub fn end_ns(&self) -> f64 {
        self.start_ns + self.duration_ns
    }

    /// Channels this pulse keeps busy: its own, plus both drive lines for a
    /// two-qubit coupling pulse.
    pub fn occupied_channels(&self) -> Vec<Channel> {
        match self.kind {
            PulseKind::Coupling => {
                let mut v = vec![self.channel];
                v.extend(self.qubits.iter().map(|&q| Channel::Drive(q)));
                v
            }
            _ => vec![self.channel],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub platform: String,
    pub policy: SchedulerPolicy,
    pub total_duration_ns: f64,
    pub pulses: Vec<Pulse>,
    /// Final virtual-Z frame per qubit (keys are qubit indices).
    pub frames: BTreeMap<String, f64>,
}

impl PulseSchedule {
    pub fn frame_vec(&self, n_qubits: usize) -> Vec<f64> {
        (0..n_qubits).map(|q| self.frames.get(&q.to_string()).copied().unwrap_or(0.0)).collect()
    }

    /// End of the last drive or coupling pulse.
    pub fn gate_end_ns(&self) -> f64 {
        self.pulses.iter().filter(|p| p.kind != PulseKind::Readout).map(Pulse::end_ns).fold(0.0, f64::max)
    }

    /// Start of the (simultaneous) readout pulses, if any.
    pub fn readout_onset_ns(&self) -> Option<f64> {
        self.pulses.iter().filter(|p| p.kind == PulseKind::Readout).map(|p| p.start_ns).reduce(f64::min)
    }

    pub fn readout_pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.pulses.iter().filter(|p| p.kind == PulseKind::Readout)
    }

    /// Pairs of pulse indices whose occupied channels overlap in time.
    pub fn channel_conflicts(&self) -> Vec<(usize, usize)> {
        let mut busy: BTreeMap<Channel, Vec<(f64, f64, usize)>> = BTreeMap::new();
        for (i, p) in self.pulses.iter().enumerate() {
            for ch in p.occupied_channels() {
                busy.entry(ch).or_default().push((p.start_ns, p.end_ns(), i));
            }
        }
        let mut out = Vec::new();
        for intervals in busy.values_mut() {
            intervals.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
            for (k, a) in intervals.iter().enumerate() {
                for b in &intervals[k + 1..] {
                    if b.0 >= a.1 {
                        break;
                    }
                    out.push((a.2.min(b.2), a.2.max(b.2)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Folded native circuit the pulses implement, in label order, with the
    /// schedule's frames as residual virtual-Z; layouts are trivial.
    pub fn to_native_circuit(&self, n_qubits: usize) -> NativeCircuit {
        let mut pulses: Vec<&Pulse> = self.pulses.iter().collect();
        pulses.sort_by_key(|p| p.label);
        let mut c = Circuit::new(n_qubits);
        for p in pulses {
            match p.kind {
                PulseKind::Drive => c.push(Gate::gpi2(p.qubits[0], p.phase_rad.unwrap_or(0.0))),
                PulseKind::Coupling => c.push(Gate::two(GateKind::CZ, p.qubits[0], p.qubits[1])),
                PulseKind::Readout => c.push(Gate::measure(p.qubits[0], p.qubits[0])),
            };
        }
        NativeCircuit {
            circuit: c,
            final_frames: self.frame_vec(n_qubits),
            initial_layout: Layout::trivial(n_qubits),
            final_layout: Layout::trivial(n_qubits),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_labels_round_trip() {
        for ch in [Channel::Drive(3), Channel::coupling(2, 1), Channel::Readout(0)] {
            assert_eq!(ch.to_string().parse::<Channel>().unwrap(), ch);
        }
        assert_eq!(Channel::coupling(2, 1).to_string(), "coupler_q1_q2");
        assert!("flux_q0".parse::<Channel>().is_err());
    }
}

//! Circuit → hardware-native circuit pass pipeline.
//!
//! `preprocess → place → route → unroll → fold_virtual_z`. Every pass is a
//! pure function of its inputs.

mod decompose;
mod fold;
mod placement;
mod preprocess;
mod routing;

pub use decompose::{translate_gate, unroll};
pub use fold::{fold_virtual_z, VirtualFrames};
pub use placement::{place, Layout, Placement};
pub use preprocess::{optimize, preprocess};
pub use routing::route;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    #[default]
    ShortestPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranspileOptions {
    pub placement: Placement,
    pub routing: Routing,
    pub fold_virtual_z: bool,
    pub optimize: bool,
}

impl Default for TranspileOptions {
    fn default() -> Self {
        Self { placement: Placement::Trivial, routing: Routing::ShortestPaths, fold_virtual_z: true, optimize: true }
    }
}

/// A circuit over physical qubits restricted to native kinds, plus the
/// bookkeeping needed to relate it back to its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NativeCircuit {
    pub circuit: Circuit,
    /// Residual virtual-Z angle per physical qubit: the folded circuit followed
    /// by `RZ(final_frames[q])` on each qubit is unitarily equivalent to the
    /// unfolded one. Not reduced mod 2π.
    pub final_frames: Vec<f64>,
    pub initial_layout: Layout,
    pub final_layout: Layout,
}

impl NativeCircuit {
    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    /// `true` once no Z/RZ/I remain.
    pub fn is_folded(&self) -> bool {
        self.circuit.gates.iter().all(|g| matches!(g.kind, GateKind::GPI2 | GateKind::CZ | GateKind::M))
    }

    /// Measurement-free circuit with the residual frames appended as RZ gates.
    pub fn with_frames_restored(&self) -> Circuit {
        let mut c = self.circuit.without_measurements();
        for (q, &f) in self.final_frames.iter().enumerate() {
            if f != 0.0 {
                c.push(Gate::rz(q, f));
            }
        }
        c
    }

    /// Checks native kinds and that every two-qubit gate sits on a coupled pair.
    pub fn validate(&self, platform: &PlatformSpec) -> Result<()> {
        self.circuit.validate()?;
        for (i, g) in self.circuit.gates.iter().enumerate() {
            if !g.kind.is_native() {
                return Err(Error::NotNative { kind: format!("{} (gates[{i}])", g.kind) });
            }
            if g.qubits.len() == 2 && !platform.are_coupled(g.qubits[0], g.qubits[1]) {
                return Err(Error::Disconnected { a: g.qubits[0], b: g.qubits[1] });
            }
        }
        if self.final_frames.len() != self.circuit.n_qubits {
            return Err(Error::invariant("final_frames", "one entry per qubit required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TranspileReport {
    pub input_gates: usize,
    pub preprocessed_gates: usize,
    pub swaps_inserted: usize,
    pub native_gates: usize,
    pub folded_gates: usize,
    pub gpi2_pulses: usize,
    pub cz_pulses: usize,
    pub measurements: usize,
    pub virtual_z_removed: usize,
    pub final_frames: Vec<f64>,
}

impl TranspileReport {
    /// Physical drive-plus-coupling pulses (GPI2 and CZ).
    pub fn physical_pulses(&self) -> usize {
        self.gpi2_pulses + self.cz_pulses
    }

    /// Fraction of native gates removed by folding.
    pub fn folding_reduction(&self) -> f64 {
        if self.native_gates == 0 {
            0.0
        } else {
            1.0 - self.folded_gates as f64 / self.native_gates as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranspileOutput {
    pub native: NativeCircuit,
    /// The native circuit before virtual-Z folding.
    pub unfolded: NativeCircuit,
    pub report: TranspileReport,
}

/// Runs the full pipeline.
pub fn transpile(c: &Circuit, platform: &PlatformSpec, opts: &TranspileOptions) -> Result<TranspileOutput> {
    c.validate()?;
    let pre = preprocess(c, platform, opts.optimize)?;
    let layout = place(&pre, platform, &opts.placement);
    let (routed, final_layout) = route(&pre, &layout, platform)?;
    let swaps_inserted = routed.count(GateKind::SWAP) - pre.count(GateKind::SWAP);
    let unrolled = unroll(&routed)?;
    let unfolded =
        NativeCircuit { final_frames: vec![0.0; unrolled.n_qubits], circuit: unrolled, initial_layout: layout, final_layout };
    let native = if opts.fold_virtual_z { fold_virtual_z(&unfolded) } else { unfolded.clone() };
    native.validate(platform)?;
    let report = TranspileReport {
        input_gates: c.gates.len(),
        preprocessed_gates: pre.gates.len(),
        swaps_inserted,
        native_gates: unfolded.circuit.gates.len(),
        folded_gates: native.circuit.gates.len(),
        gpi2_pulses: native.circuit.count(GateKind::GPI2),
        cz_pulses: native.circuit.count(GateKind::CZ),
        measurements: native.circuit.count(GateKind::M),
        virtual_z_removed: unfolded.circuit.gates.len() - native.circuit.gates.len(),
        final_frames: native.final_frames.clone(),
    };
    Ok(TranspileOutput { native, unfolded, report })
}

use std::f64::consts::TAU;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;

/// Pads the circuit to the platform width, moves measurements to the end
/// (legal because nothing follows a measurement on its qubit) and, if
/// `optimize`, applies the peephole rules of [`optimize`].
pub fn preprocess(c: &Circuit, platform: &PlatformSpec, optimize_gates: bool) -> Result<Circuit> {
    if c.n_qubits > platform.n_qubits() {
        return Err(Error::CircuitTooWide {
            needed: c.n_qubits,
            available: platform.n_qubits(),
            platform: platform.name.clone(),
        });
    }
    let (mut ops, meas): (Vec<Gate>, Vec<Gate>) = c.gates.iter().cloned().partition(|g| g.kind != GateKind::M);
    if optimize_gates {
        ops = optimize(ops);
    }
    ops.extend(meas);
    Ok(Circuit { n_qubits: platform.n_qubits(), n_clbits: c.n_clbits, gates: ops })
}

fn is_zero_angle(theta: f64) -> bool {
    let r = theta.rem_euclid(TAU);
    r < 1e-12 || TAU - r < 1e-12
}

fn same_qubit_set(a: &Gate, b: &Gate) -> bool {
    match (a.qubits.as_slice(), b.qubits.as_slice()) {
        ([x], [y]) => x == y,
        ([a0, a1], [b0, b1]) => (a0 == b0 && a1 == b1) || (a0 == b1 && a1 == b0),
        _ => false,
    }
}

/// Merges adjacent RZ on a qubit, drops identities and `RZ(0 mod 2π)`, and
/// cancels adjacent H·H, X·X and CZ·CZ pairs, iterating to a fixpoint.
pub fn optimize(mut gates: Vec<Gate>) -> Vec<Gate> {
    loop {
        let before = gates.len();
        gates.retain(|g| !(g.kind == GateKind::I || (g.kind == GateKind::RZ && is_zero_angle(g.params[0]))));
        let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
        // index in `out` of the latest surviving gate per qubit
        let mut last: Vec<Option<usize>> = Vec::new();
        let mut changed = false;
        for g in gates {
            let width = g.qubits.iter().max().map_or(0, |&q| q + 1);
            if last.len() < width {
                last.resize(width, None);
            }
            let prev = {
                let idx: Vec<Option<usize>> = g.qubits.iter().map(|&q| last[q]).collect();
                match idx.as_slice() {
                    [Some(i)] => Some(*i),
                    [Some(i), Some(j)] if i == j => Some(*i),
                    _ => None,
                }
            };
            if let Some(pi) = prev {
                let p = out[pi].as_ref().expect("latest gate is live");
                if same_qubit_set(p, &g) && p.kind == g.kind {
                    match g.kind {
                        GateKind::RZ => {
                            let merged = p.params[0] + g.params[0];
                            out[pi] = Some(Gate::rz(g.qubits[0], merged));
                            changed = true;
                            continue;
                        }
                        GateKind::H | GateKind::X | GateKind::CZ => {
                            out[pi] = None;
                            for &q in &g.qubits {
                                last[q] = None;
                            }
                            changed = true;
                            continue;
                        }
                        _ => {}
                    }
                }
            }
            let idx = out.len();
            for &q in &g.qubits {
                last[q] = Some(idx);
            }
            out.push(Some(g));
        }
        gates = out.into_iter().flatten().collect();
        if !changed && gates.len() == before {
            return gates;
        }
    }
}

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;

use super::Layout;

/// Rewrites a placed circuit onto physical qubits, inserting SWAPs so every
/// two-qubit gate acts on a coupled pair. The first operand walks along the
/// BFS shortest path toward the second. Returns the final layout.
pub fn route(c: &Circuit, layout: &Layout, platform: &PlatformSpec) -> Result<(Circuit, Layout)> {
    let mut layout = layout.clone();
    let mut out = Circuit { n_qubits: platform.n_qubits(), n_clbits: c.n_clbits, gates: Vec::with_capacity(c.gates.len()) };
    for g in &c.gates {
        let mut phys: Vec<usize> = g.qubits.iter().map(|&q| layout.physical(q)).collect();
        if let [a, b] = phys[..] {
            if !platform.are_coupled(a, b) {
                let path = platform.shortest_path(a, b).ok_or(Error::Disconnected { a, b })?;
                for hop in path.windows(2).take(path.len() - 2) {
                    out.gates.push(Gate::two(GateKind::SWAP, hop[0], hop[1]));
                    layout.swap_physical(hop[0], hop[1]);
                }
                phys = g.qubits.iter().map(|&q| layout.physical(q)).collect();
            }
        }
        out.gates.push(Gate { qubits: phys, ..g.clone() });
    }
    Ok((out, layout))
}

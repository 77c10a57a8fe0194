use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::Result;

/// One rewrite step toward the native set. Gate lists apply left to right.
pub fn translate_gate(g: &Gate) -> Result<Vec<Gate>> {
    use GateKind::*;
    let q = |i: usize| g.qubits[i];
    let p = |i: usize| g.params[i];
    Ok(match g.kind {
        I | Z | RZ | GPI2 | CZ | M => vec![g.clone()],
        H => vec![Gate::single(Z, q(0)), Gate::gpi2(q(0), PI / 2.0)],
        // Z·GPI2(0)²·Z = i·X
        X => vec![Gate::single(Z, q(0)), Gate::gpi2(q(0), 0.0), Gate::gpi2(q(0), 0.0), Gate::single(Z, q(0))],
        Y => vec![Gate::single(X, q(0)), Gate::single(Z, q(0))],
        S => vec![Gate::rz(q(0), PI / 2.0)],
        T => vec![Gate::rz(q(0), PI / 4.0)],
        U3 => vec![
            Gate::rz(q(0), p(2)),
            Gate::gpi2(q(0), 0.0),
            Gate::rz(q(0), p(0) + PI),
            Gate::gpi2(q(0), 0.0),
            Gate::rz(q(0), p(1) + PI),
        ],
        RX => vec![Gate::new(U3, &[q(0)], &[p(0), -PI / 2.0, PI / 2.0])],
        RY => vec![Gate::new(U3, &[q(0)], &[p(0), 0.0, 0.0])],
        CNOT => vec![Gate::single(H, q(1)), Gate::two(CZ, q(0), q(1)), Gate::single(H, q(1))],
        CP => {
            let (c, t, th) = (q(0), q(1), p(0));
            vec![
                Gate::rz(c, th / 2.0),
                Gate::two(CNOT, c, t),
                Gate::rz(t, -th / 2.0),
                Gate::two(CNOT, c, t),
                Gate::rz(t, th / 2.0),
            ]
        }
        SWAP => {
            let (a, b) = (q(0), q(1));
            vec![Gate::two(CNOT, a, b), Gate::two(CNOT, b, a), Gate::two(CNOT, a, b)]
        }
    })
}

fn expand(g: &Gate, out: &mut Vec<Gate>) -> Result<()> {
    if g.kind.is_native() {
        out.push(g.clone());
        return Ok(());
    }
    for sub in translate_gate(g)? {
        expand(&sub, out)?;
    }
    Ok(())
}

/// Applies [`translate_gate`] recursively until only native kinds remain.
pub fn unroll(c: &Circuit) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(c.gates.len() * 4);
    for g in &c.gates {
        expand(g, &mut gates)?;
    }
    Ok(Circuit { n_qubits: c.n_qubits, n_clbits: c.n_clbits, gates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, global_phase_distance};

    fn sample_gate(kind: GateKind) -> Gate {
        let qubits: Vec<usize> = if kind.arity() == 2 { vec![1, 0] } else { vec![1] };
        let params: Vec<f64> = [0.731, -1.29, 2.4][..kind.param_count()].to_vec();
        Gate::new(kind, &qubits, &params)
    }

    #[test]
    fn every_rule_preserves_the_unitary() {
        for kind in GateKind::ALL.iter().copied().filter(|&k| k != GateKind::M) {
            let g = sample_gate(kind);
            let one = Circuit::with_gates(2, vec![g.clone()]);
            let rewritten = Circuit::with_gates(2, translate_gate(&g).unwrap());
            let d = global_phase_distance(&circuit_unitary::<f64>(&rewritten).unwrap(), &circuit_unitary::<f64>(&one).unwrap())
                .unwrap();
            assert!(d < 1e-12, "{kind}: {d}");
        }
    }

    #[test]
    fn published_rules() {
        assert_eq!(
            translate_gate(&Gate::single(GateKind::H, 0)).unwrap(),
            vec![Gate::single(GateKind::Z, 0), Gate::gpi2(0, PI / 2.0)]
        );
        assert_eq!(
            translate_gate(&Gate::two(GateKind::CNOT, 0, 1)).unwrap(),
            vec![Gate::single(GateKind::H, 1), Gate::two(GateKind::CZ, 0, 1), Gate::single(GateKind::H, 1)]
        );
    }

    #[test]
    fn native_fixpoint() {
        let c = Circuit::with_gates(
            2,
            vec![Gate::gpi2(0, 0.3), Gate::rz(1, 0.2), Gate::two(GateKind::CZ, 0, 1), Gate::single(GateKind::Z, 0)],
        );
        assert_eq!(unroll(&c).unwrap(), c);
    }

    #[test]
    fn unroll_reaches_native_set() {
        let gates = GateKind::ALL.iter().copied().filter(|&k| k != GateKind::M).map(sample_gate).collect();
        let out = unroll(&Circuit::with_gates(2, gates)).unwrap();
        assert!(out.gates.iter().all(|g| g.kind.is_native()));
    }
}

//! Circuit intermediate representation and the brute-force unitary oracle.
//!
//! Basis states are labelled `|q0 q1 … q(n-1)⟩` with qubit 0 the most
//! significant digit. Gate lists apply left to right: the first gate acts
//! first, so it is the rightmost factor of the circuit unitary.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, lit, Real};

/// Largest register the dense unitary oracle accepts.
pub const ORACLE_MAX_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    RX,
    RY,
    RZ,
    U3,
    GPI2,
    CNOT,
    CZ,
    CP,
    SWAP,
    M,
}

impl GateKind {
    pub const ALL: [GateKind; 17] = [
        GateKind::I,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::U3,
        GateKind::GPI2,
        GateKind::CNOT,
        GateKind::CZ,
        GateKind::CP,
        GateKind::SWAP,
        GateKind::M,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CNOT | GateKind::CZ | GateKind::CP | GateKind::SWAP => 2,
            _ => 1,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::GPI2 | GateKind::CP => 1,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    /// Member of the hardware-native set {I, Z, RZ, GPI2, CZ, M}.
    pub fn is_native(self) -> bool {
        matches!(self, GateKind::I | GateKind::Z | GateKind::RZ | GateKind::GPI2 | GateKind::CZ | GateKind::M)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::U3 => "U3",
            GateKind::GPI2 => "GPI2",
            GateKind::CNOT => "CNOT",
            GateKind::CZ => "CZ",
            GateKind::CP => "CP",
            GateKind::SWAP => "SWAP",
            GateKind::M => "M",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    #[serde(default)]
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clbit: Option<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], params: &[f64]) -> Self {
        Self { kind, params: params.to_vec(), qubits: qubits.to_vec(), clbit: None }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Self::new(kind, &[q], &[])
    }

    pub fn rotation(kind: GateKind, q: usize, angle: f64) -> Self {
        Self::new(kind, &[q], &[angle])
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self::new(kind, &[a, b], &[])
    }

    pub fn cp(theta: f64, control: usize, target: usize) -> Self {
        Self::new(GateKind::CP, &[control, target], &[theta])
    }

    pub fn gpi2(q: usize, phi: f64) -> Self {
        Self::rotation(GateKind::GPI2, q, phi)
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::rotation(GateKind::RZ, q, theta)
    }

    pub fn measure(q: usize, clbit: usize) -> Self {
        Self { kind: GateKind::M, params: vec![], qubits: vec![q], clbit: Some(clbit) }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let field = || format!("{} gate", self.kind);
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::invariant(field(), format!("expects {} qubit(s), got {}", self.kind.arity(), self.qubits.len())));
        }
        if self.params.len() != self.kind.param_count() {
            return Err(Error::invariant(
                field(),
                format!("expects {} parameter(s), got {}", self.kind.param_count(), self.params.len()),
            ));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invariant(field(), "angles must be finite"));
        }
        if let Some(&q) = self.qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::invariant(field(), format!("qubit {q} out of range for {n_qubits}-qubit circuit")));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::invariant(field(), "operands must be distinct"));
        }
        if (self.kind == GateKind::M) != self.clbit.is_some() {
            return Err(Error::invariant(field(), "classical target is required on M and forbidden elsewhere"));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p}")).collect();
            write!(f, "({})", ps.join(", "))?;
        }
        let qs: Vec<String> = self.qubits.iter().map(|q| q.to_string()).collect();
        write!(f, " q[{}]", qs.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    #[serde(default)]
    pub n_clbits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, n_clbits: 0, gates: Vec::new() }
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Self {
        let n_clbits = gates.iter().filter_map(|g| g.clbit).map(|c| c + 1).max().unwrap_or(0);
        Self { n_qubits, n_clbits, gates }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        if let Some(c) = g.clbit {
            self.n_clbits = self.n_clbits.max(c + 1);
        }
        self.gates.push(g);
        self
    }

    /// Appends `M q[i] -> c[i]` on every qubit.
    pub fn measure_all(&mut self) -> &mut Self {
        self.n_clbits = self.n_clbits.max(self.n_qubits);
        for q in 0..self.n_qubits {
            self.gates.push(Gate::measure(q, q));
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut measured = vec![false; self.n_qubits];
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(self.n_qubits).map_err(|e| match e {
                Error::Invariant { field, reason } => Error::Invariant { field: format!("gates[{i}] ({field})"), reason },
                other => other,
            })?;
            if let Some(c) = g.clbit {
                if c >= self.n_clbits {
                    return Err(Error::invariant(format!("gates[{i}]"), format!("classical bit {c} out of range")));
                }
            }
            for &q in &g.qubits {
                if measured[q] {
                    return Err(Error::invariant(format!("gates[{i}]"), format!("gate follows a measurement on qubit {q}")));
                }
            }
            if g.kind == GateKind::M {
                measured[g.qubits[0]] = true;
            }
        }
        Ok(())
    }

    /// The same circuit with measurements removed.
    pub fn without_measurements(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            n_clbits: self.n_clbits,
            gates: self.gates.iter().filter(|g| g.kind != GateKind::M).cloned().collect(),
        }
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn extend(&mut self, other: &Circuit) {
        assert_eq!(self.n_qubits, other.n_qubits);
        for g in &other.gates {
            self.push(g.clone());
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

fn gpi2_matrix<T: Real>(phi: T) -> CMatrix<T> {
    let s: T = lit(FRAC_1_SQRT_2);
    let mi = Complex::new(T::zero(), -s);
    CMatrix::from_rows(&[vec![Complex::new(s, T::zero()), mi * cis(-phi)], vec![mi * cis(phi), Complex::new(s, T::zero())]])
}

fn rz_matrix<T: Real>(theta: T) -> CMatrix<T> {
    let half = theta / lit(2.0);
    CMatrix::from_diagonal(&[cis(-half), cis(half)])
}

fn u3_matrix<T: Real>(theta: T, phi: T, lambda: T) -> CMatrix<T> {
    let c = (theta / lit(2.0)).cos();
    let s = (theta / lit(2.0)).sin();
    CMatrix::from_rows(&[vec![Complex::new(c, T::zero()), -cis(lambda) * s], vec![cis(phi) * s, cis(phi + lambda) * c]])
}

/// Defining matrix of a gate on its own qubits (first listed qubit most
/// significant).
///
/// `GPI2(φ) = (1/√2)·[[1, −i·e^{−iφ}], [−i·e^{iφ}, 1]]`,
/// `RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})`, `CP(θ) = diag(1, 1, 1, e^{iθ})`.
pub fn gate_matrix<T: Real>(g: &Gate) -> Result<CMatrix<T>> {
    let p = |i: usize| -> T { lit(g.params[i]) };
    let z = Complex::new(T::zero(), T::zero());
    let o = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let h: T = lit(FRAC_1_SQRT_2);
    if g.params.len() != g.kind.param_count() {
        return Err(Error::invariant(format!("{} gate", g.kind), "wrong parameter count"));
    }
    Ok(match g.kind {
        GateKind::I => CMatrix::identity(2),
        GateKind::X => CMatrix::from_rows(&[vec![z, o], vec![o, z]]),
        GateKind::Y => CMatrix::from_rows(&[vec![z, -i], vec![i, z]]),
        GateKind::Z => CMatrix::from_diagonal(&[o, -o]),
        GateKind::H => CMatrix::from_rows(&[vec![o * h, o * h], vec![o * h, -o * h]]),
        GateKind::S => CMatrix::from_diagonal(&[o, i]),
        GateKind::T => CMatrix::from_diagonal(&[o, cis(lit(PI / 4.0))]),
        GateKind::RX => u3_matrix(p(0), lit(-PI / 2.0), lit(PI / 2.0)),
        GateKind::RY => u3_matrix(p(0), T::zero(), T::zero()),
        GateKind::RZ => rz_matrix(p(0)),
        GateKind::U3 => u3_matrix(p(0), p(1), p(2)),
        GateKind::GPI2 => gpi2_matrix(p(0)),
        GateKind::CNOT => CMatrix::from_rows(&[vec![o, z, z, z], vec![z, o, z, z], vec![z, z, z, o], vec![z, z, o, z]]),
        GateKind::CZ => CMatrix::from_diagonal(&[o, o, o, -o]),
        GateKind::CP => CMatrix::from_diagonal(&[o, o, o, cis(p(0))]),
        GateKind::SWAP => CMatrix::from_rows(&[vec![o, z, z, z], vec![z, z, o, z], vec![z, o, z, z], vec![z, z, z, o]]),
        GateKind::M => return Err(Error::NoUnitary { kind: g.kind.to_string() }),
    })
}

/// Dense unitary of a measurement-free circuit (at most
/// [`ORACLE_MAX_QUBITS`] qubits).
pub fn circuit_unitary<T: Real>(c: &Circuit) -> Result<CMatrix<T>> {
    if c.n_qubits > ORACLE_MAX_QUBITS {
        return Err(Error::TooLarge { n: c.n_qubits, cap: ORACLE_MAX_QUBITS });
    }
    let mut u = CMatrix::identity(1 << c.n_qubits);
    for g in &c.gates {
        let m = gate_matrix::<T>(g)?;
        u = u.apply_local_left(&m, &g.qubits, c.n_qubits, 2);
    }
    Ok(u)
}

/// Frobenius distance `min_λ ‖u − λ v‖_F` over unit-modulus `λ`; the optimum
/// is the phase of `tr(v† u)`.
pub fn global_phase_distance<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>) -> Result<T> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch { left: u.rows(), right: v.rows() });
    }
    let overlap = v.dagger().matmul(u).trace();
    let lambda = if overlap.norm() > T::zero() { overlap / overlap.norm() } else { Complex::new(T::one(), T::zero()) };
    Ok((u - &v.scale(lambda)).frobenius_norm())
}

pub fn equivalent_up_to_global_phase<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>, tol: T) -> Result<bool> {
    Ok(global_phase_distance(u, v)? < tol)
}

/// Textbook QFT: for each `j`, `H(j)` then `CP(π/2^{k−j})` controlled by `k`
/// on target `j` for `k > j`; optionally the bit-reversal swaps.
pub fn build_qft(n: usize, include_final_swaps: bool) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        c.push(Gate::single(GateKind::H, j));
        for k in j + 1..n {
            c.push(Gate::cp(PI / f64::powi(2.0, (k - j) as i32), k, j));
        }
    }
    if include_final_swaps {
        for i in 0..n / 2 {
            c.push(Gate::two(GateKind::SWAP, i, n - 1 - i));
        }
    }
    c
}

/// `[H0, CNOT01]` followed by measurement of both qubits.
pub fn bell_circuit() -> Circuit {
    let mut c = Circuit::with_gates(2, vec![Gate::single(GateKind::H, 0), Gate::two(GateKind::CNOT, 0, 1)]);
    c.measure_all();
    c
}

/// DFT matrix with entries `e^{2πi·jk/N}/√N`.
pub fn dft_matrix<T: Real>(n_qubits: usize) -> CMatrix<T> {
    let dim = 1usize << n_qubits;
    let norm: T = lit(1.0 / (dim as f64).sqrt());
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        for k in 0..dim {
            let angle = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
            m[(j, k)] = cis(lit::<T>(angle)) * norm;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn m(g: Gate) -> CMatrix<f64> {
        gate_matrix(&g).unwrap()
    }

    #[test]
    fn gpi2_half_pi() {
        let s = FRAC_1_SQRT_2;
        let want = CMatrix::from_rows(&[vec![cplx(s, 0.), cplx(-s, 0.)], vec![cplx(s, 0.), cplx(s, 0.)]]);
        assert!((&m(Gate::gpi2(0, PI / 2.0)) - &want).frobenius_norm() < 1e-15);
    }

    #[test]
    fn diagonal_gates() {
        assert_eq!(m(Gate::single(GateKind::Z, 0)), CMatrix::from_diagonal(&[cplx(1., 0.), cplx(-1., 0.)]));
        assert_eq!(
            m(Gate::two(GateKind::CZ, 0, 1)),
            CMatrix::from_diagonal(&[cplx(1., 0.), cplx(1., 0.), cplx(1., 0.), cplx(-1., 0.)])
        );
    }

    #[test]
    fn measurement_has_no_matrix() {
        assert!(matches!(gate_matrix::<f64>(&Gate::measure(0, 0)), Err(Error::NoUnitary { .. })));
    }

    #[test]
    fn all_gate_matrices_unitary() {
        for kind in GateKind::ALL {
            if kind == GateKind::M {
                continue;
            }
            let qubits: Vec<usize> = (0..kind.arity()).collect();
            let params: Vec<f64> = (0..kind.param_count()).map(|i| 0.37 + 1.1 * i as f64).collect();
            let u = m(Gate::new(kind, &qubits, &params));
            assert!(u.unitarity_error() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn hadamard_rule_holds_exactly() {
        let c = Circuit::with_gates(1, vec![Gate::single(GateKind::Z, 0), Gate::gpi2(0, PI / 2.0)]);
        let u = circuit_unitary::<f64>(&c).unwrap();
        assert!((&u - &m(Gate::single(GateKind::H, 0))).frobenius_norm() < 1e-15);
    }

    #[test]
    fn single_hadamard_and_identity() {
        let c = Circuit::with_gates(1, vec![Gate::single(GateKind::H, 0)]);
        let s = FRAC_1_SQRT_2;
        let want = CMatrix::from_rows(&[vec![cplx(s, 0.), cplx(s, 0.)], vec![cplx(s, 0.), cplx(-s, 0.)]]);
        assert!((&circuit_unitary::<f64>(&c).unwrap() - &want).frobenius_norm() < 1e-15);
        assert_eq!(circuit_unitary::<f64>(&Circuit::new(2)).unwrap(), CMatrix::identity(4));
    }

    #[test]
    fn oracle_is_capped() {
        assert!(matches!(circuit_unitary::<f64>(&Circuit::new(7)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn cnot_orientation() {
        // control 0 (MSB): |10⟩ → |11⟩
        let u = circuit_unitary::<f64>(&Circuit::with_gates(2, vec![Gate::two(GateKind::CNOT, 0, 1)])).unwrap();
        assert_eq!(u[(3, 2)], cplx(1., 0.));
        let r = circuit_unitary::<f64>(&Circuit::with_gates(2, vec![Gate::two(GateKind::CNOT, 1, 0)])).unwrap();
        // control 1: |01⟩ → |11⟩
        assert_eq!(r[(3, 1)], cplx(1., 0.));
    }

    #[test]
    fn global_phase_examples() {
        let x = m(Gate::single(GateKind::X, 0));
        let zz = m(Gate::single(GateKind::Z, 0));
        assert!(equivalent_up_to_global_phase(&x, &x.scale(cplx(-1., 0.)), 1e-12).unwrap());
        assert!(!equivalent_up_to_global_phase(&x, &zz, 1e-3).unwrap());
        let c = Circuit::with_gates(
            1,
            vec![Gate::single(GateKind::Z, 0), Gate::gpi2(0, 0.0), Gate::gpi2(0, 0.0), Gate::single(GateKind::Z, 0)],
        );
        let u = circuit_unitary::<f64>(&c).unwrap();
        assert!(equivalent_up_to_global_phase(&u, &x, 1e-12).unwrap());
        assert!((&u - &x.scale(cplx(0., 1.))).frobenius_norm() < 1e-14);
        assert!(global_phase_distance(&x, &CMatrix::identity(4)).is_err());
    }

    #[test]
    fn qft_gate_counts() {
        assert_eq!(build_qft(1, true).gates, vec![Gate::single(GateKind::H, 0)]);
        let q2 = build_qft(2, true);
        assert_eq!(
            q2.gates,
            vec![
                Gate::single(GateKind::H, 0),
                Gate::cp(PI / 2.0, 1, 0),
                Gate::single(GateKind::H, 1),
                Gate::two(GateKind::SWAP, 0, 1)
            ]
        );
        let q4 = build_qft(4, true);
        assert_eq!((q4.count(GateKind::H), q4.count(GateKind::CP), q4.count(GateKind::SWAP)), (4, 6, 2));
    }

    #[test]
    fn qft_matches_dft() {
        for n in 1..=4 {
            let u = circuit_unitary::<f64>(&build_qft(n, true)).unwrap();
            let d = global_phase_distance(&u, &dft_matrix(n)).unwrap();
            assert!(d < 1e-9, "n={n}: {d}");
        }
        // 2-qubit case matches exactly, no phase needed
        let u = circuit_unitary::<f64>(&build_qft(2, true)).unwrap();
        assert_abs_diff_eq!((&u - &dft_matrix(2)).frobenius_norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn validation_catches_gate_after_measure() {
        let mut c = Circuit::new(1);
        c.push(Gate::measure(0, 0)).push(Gate::single(GateKind::X, 0));
        assert!(c.validate().is_err());
        let bad = Circuit::with_gates(1, vec![Gate::two(GateKind::CZ, 0, 1)]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let c = bell_circuit();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains(r#"{"kind":"H","params":[],"qubits":[0]}"#), "{s}");
        assert_eq!(Circuit::from_json_str(&s).unwrap(), c);
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let kinds: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|&k| k != GateKind::M).collect();
        (proptest::sample::select(kinds), proptest::collection::vec(-7.0..7.0f64, 3), 0..n, 1..n).prop_map(
            move |(k, angles, a, off)| {
                let qubits = if k.arity() == 2 { vec![a, (a + off) % n] } else { vec![a] };
                Gate::new(k, &qubits, &angles[..k.param_count()])
            },
        )
    }

    proptest! {
        #[test]
        fn concatenation_multiplies(
            a in proptest::collection::vec(arb_gate(3), 0..6),
            b in proptest::collection::vec(arb_gate(3), 0..6),
        ) {
            let ca = Circuit::with_gates(3, a.clone());
            let cb = Circuit::with_gates(3, b.clone());
            let mut both = ca.clone();
            both.extend(&cb);
            let lhs = circuit_unitary::<f64>(&both).unwrap();
            let rhs = circuit_unitary::<f64>(&cb).unwrap().matmul(&circuit_unitary::<f64>(&ca).unwrap());
            prop_assert!((&lhs - &rhs).frobenius_norm() < 1e-10);
        }
    }
}

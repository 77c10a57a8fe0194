//! Hardware description: transmon parameters, coupling graph, calibrated
//! durations.
//!
//! Platform documents use lab units (GHz, MHz, µs or ns chosen per field by the
//! key suffix). [`PlatformSpec`] holds internal units only: angular
//! frequencies in rad/ns and times in ns.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QubitParams {
    pub id: usize,
    /// ω (rad/ns)
    pub frequency: f64,
    /// α (rad/ns), negative for transmons
    pub anharmonicity: f64,
    /// Energy relaxation time (ns); `None` disables amplitude damping.
    pub t1: Option<f64>,
    /// Total coherence time (ns); `None` disables pure dephasing.
    pub t2: Option<f64>,
}

impl QubitParams {
    /// Pure dephasing time Tφ with `1/T2 = 1/(2 T1) + 1/Tφ`.
    ///
    /// `Ok(None)` means there is no pure-dephasing channel (T2 absent, or
    /// exactly `2 T1`).
    pub fn pure_dephasing_time(&self) -> Result<Option<f64>> {
        pure_dephasing_time(self.t1, self.t2)
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !self.frequency.is_finite() {
            return Err(Error::invariant(format!("{field}.frequency"), "must be finite"));
        }
        if !self.anharmonicity.is_finite() || self.anharmonicity == 0.0 {
            return Err(Error::invariant(format!("{field}.anharmonicity"), "must be finite and nonzero"));
        }
        if let Some(t1) = self.t1 {
            if !(t1 > 0.0) {
                return Err(Error::invariant(format!("{field}.t1"), "t1 must be positive"));
            }
        }
        if let Some(t2) = self.t2 {
            if !(t2 > 0.0) {
                return Err(Error::invariant(format!("{field}.t2"), "t2 must be positive"));
            }
            if let Some(t1) = self.t1 {
                if t2 > 2.0 * t1 {
                    return Err(Error::invariant(format!("{field}.t2"), "t2 exceeds 2·t1"));
                }
            }
        }
        Ok(())
    }
}

/// Tφ from optional T1/T2 (ns).
pub fn pure_dephasing_time(t1: Option<f64>, t2: Option<f64>) -> Result<Option<f64>> {
    let Some(t2) = t2 else { return Ok(None) };
    let relax = t1.map_or(0.0, |t1| 1.0 / (2.0 * t1));
    let rate = 1.0 / t2 - relax;
    // t2 == 2·t1 lands on zero up to rounding
    if rate.abs() <= 1e-15 / t2 {
        return Ok(None);
    }
    if rate < 0.0 {
        return Err(Error::invariant("t2", format!("non-positive pure-dephasing rate {rate:e} /ns")));
    }
    Ok(Some(1.0 / rate))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// Unordered pair stored as `(low, high)`.
    pub pair: (usize, usize),
    /// g (rad/ns)
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateTimings {
    #[serde(rename = "gpi2_duration_ns")]
    pub gpi2_duration: f64,
    #[serde(rename = "cz_duration_ns")]
    pub cz_duration: f64,
    #[serde(rename = "readout_duration_ns")]
    pub readout_duration: f64,
    #[serde(rename = "measurement_buffer_ns")]
    pub measurement_buffer: f64,
}

impl Default for GateTimings {
    fn default() -> Self {
        Self { gpi2_duration: 40.0, cz_duration: 96.0, readout_duration: 1000.0, measurement_buffer: 56.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformSpec {
    pub name: String,
    pub qubits: Vec<QubitParams>,
    pub couplings: Vec<Coupling>,
    pub timings: GateTimings,
    pub levels_per_qubit: usize,
}

impl PlatformSpec {
    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.levels_per_qubit.pow(self.qubits.len() as u32)
    }

    pub fn are_coupled(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.couplings.iter().any(|c| c.pair == key)
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .couplings
            .iter()
            .filter_map(|c| match c.pair {
                (a, b) if a == q => Some(b),
                (a, b) if b == q => Some(a),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// BFS shortest path from `from` to `to`, expanding neighbours in
    /// ascending index order so ties resolve to the lowest-index route.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.n_qubits();
        if from >= n || to >= n {
            return None;
        }
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Whether any qubit carries a collapse channel.
    pub fn has_decoherence(&self) -> bool {
        self.qubits.iter().any(|q| q.t1.is_some() || q.t2.is_some())
    }

    /// Copy with every T1/T2 removed.
    pub fn without_decoherence(&self) -> Self {
        let mut p = self.clone();
        for q in &mut p.qubits {
            q.t1 = None;
            q.t2 = None;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels_per_qubit < 2 {
            return Err(Error::invariant("levels_per_qubit", "must be at least 2"));
        }
        if self.qubits.is_empty() {
            return Err(Error::invariant("qubits", "at least one qubit required"));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if q.id != i {
                return Err(Error::invariant(format!("qubits[{i}].id"), format!("expected contiguous id {i}, found {}", q.id)));
            }
            q.validate(&format!("qubits[{i}]"))?;
        }
        let mut seen = BTreeSet::new();
        for (i, c) in self.couplings.iter().enumerate() {
            let (a, b) = c.pair;
            let field = format!("couplings[{i}].pair");
            if a == b {
                return Err(Error::invariant(field, "pair members must be distinct"));
            }
            if a >= self.n_qubits() || b >= self.n_qubits() {
                return Err(Error::invariant(field, "pair references an unknown qubit"));
            }
            if a > b {
                return Err(Error::invariant(field, "pair must be normalized as (low, high)"));
            }
            if !seen.insert((a, b)) {
                return Err(Error::invariant(field, "duplicate coupling"));
            }
            if !c.strength.is_finite() {
                return Err(Error::invariant(format!("couplings[{i}].strength"), "must be finite"));
            }
        }
        let t = &self.timings;
        for (name, v) in [
            ("timings.gpi2_duration_ns", t.gpi2_duration),
            ("timings.cz_duration_ns", t.cz_duration),
            ("timings.readout_duration_ns", t.readout_duration),
            ("timings.measurement_buffer_ns", t.measurement_buffer),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invariant(name, "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: PlatformDocument = serde_json::from_str(text)
            .map_err(|e| Error::PlatformFormat(format!("line {} column {}: {e}", e.line(), e.column())))?;
        doc.into_spec()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PlatformDocument::from_spec(self))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }
}

/// Reads and validates a platform document.
pub fn load_platform(path: impl AsRef<Path>) -> Result<PlatformSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    PlatformSpec::from_json_str(&text).map_err(|e| match e {
        Error::PlatformFormat(msg) => Error::PlatformFormat(format!("{}: {msg}", path.display())),
        other => other,
    })
}

// On-disk representation.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformDocument {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    #[serde(default = "default_levels")]
    levels_per_qubit: usize,
    qubits: Vec<QubitDocument>,
    #[serde(default)]
    couplings: Vec<CouplingDocument>,
    #[serde(default)]
    timings: GateTimings,
}

fn default_levels() -> usize {
    3
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitDocument {
    id: usize,
    frequency_ghz: f64,
    anharmonicity_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t1_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t1_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t2_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t2_ns: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDocument {
    pair: [usize; 2],
    #[serde(default)]
    strength_mhz: f64,
}

fn pick_time(us: Option<f64>, ns: Option<f64>, field: &str) -> Result<Option<f64>> {
    match (us, ns) {
        (Some(_), Some(_)) => Err(Error::invariant(field, "give either the _us or the _ns form, not both")),
        (Some(us), None) => Ok(Some(us * 1000.0)),
        (None, ns) => Ok(ns),
    }
}

impl PlatformDocument {
    fn into_spec(self) -> Result<PlatformSpec> {
        let qubits = self
            .qubits
            .iter()
            .enumerate()
            .map(|(i, q)| {
                Ok(QubitParams {
                    id: q.id,
                    frequency: TAU * q.frequency_ghz,
                    anharmonicity: TAU * q.anharmonicity_mhz / 1000.0,
                    t1: pick_time(q.t1_us, q.t1_ns, &format!("qubits[{i}].t1"))?,
                    t2: pick_time(q.t2_us, q.t2_ns, &format!("qubits[{i}].t2"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let couplings = self
            .couplings
            .iter()
            .map(|c| Coupling {
                pair: (c.pair[0].min(c.pair[1]), c.pair[0].max(c.pair[1])),
                strength: TAU * c.strength_mhz / 1000.0,
            })
            .collect();
        for (i, c) in self.couplings.iter().enumerate() {
            if c.pair[0] == c.pair[1] {
                return Err(Error::invariant(format!("couplings[{i}].pair"), "pair members must be distinct"));
            }
        }
        let spec =
            PlatformSpec { name: self.name, qubits, couplings, timings: self.timings, levels_per_qubit: self.levels_per_qubit };
        spec.validate()?;
        Ok(spec)
    }

    fn from_spec(spec: &PlatformSpec) -> Self {
        PlatformDocument {
            name: spec.name.clone(),
            notes: None,
            levels_per_qubit: spec.levels_per_qubit,
            qubits: spec
                .qubits
                .iter()
                .map(|q| QubitDocument {
                    id: q.id,
                    frequency_ghz: q.frequency / TAU,
                    anharmonicity_mhz: q.anharmonicity * 1000.0 / TAU,
                    t1_ns: q.t1,
                    t2_ns: q.t2,
                    ..Default::default()
                })
                .collect(),
            couplings: spec
                .couplings
                .iter()
                .map(|c| CouplingDocument { pair: [c.pair.0, c.pair.1], strength_mhz: c.strength * 1000.0 / TAU })
                .collect(),
            timings: spec.timings,
        }
    }
}

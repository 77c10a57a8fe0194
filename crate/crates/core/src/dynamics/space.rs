use crate::error::{Error, Result};

/// Product space of `n` `d`-level transmons, qubit 0 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    pub n_qubits: usize,
    pub levels: usize,
    dim: usize,
}

/// Largest dimension the dense engine accepts.
pub const MAX_DIM: usize = 729;

impl HilbertSpace {
    pub fn new(n_qubits: usize, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invariant("levels_per_qubit", "at least 2 levels required"));
        }
        let dim = (0..n_qubits).try_fold(1usize, |acc, _| acc.checked_mul(levels)).filter(|&d| d <= MAX_DIM);
        match dim {
            Some(dim) => Ok(Self { n_qubits, levels, dim }),
            None => Err(Error::invariant("hilbert_dim", format!("{levels}^{n_qubits} exceeds the supported maximum {MAX_DIM}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index step for one excitation on qubit `q`.
    pub fn stride(&self, q: usize) -> usize {
        self.levels.pow((self.n_qubits - 1 - q) as u32)
    }

    /// Occupation of qubit `q` in basis state `index`.
    pub fn level(&self, index: usize, q: usize) -> usize {
        (index / self.stride(q)) % self.levels
    }

    pub fn levels_of(&self, index: usize) -> Vec<usize> {
        (0..self.n_qubits).map(|q| self.level(index, q)).collect()
    }

    pub fn index_of(&self, levels: &[usize]) -> usize {
        assert_eq!(levels.len(), self.n_qubits);
        levels.iter().fold(0, |acc, &l| {
            assert!(l < self.levels, "level out of range");
            acc * self.levels + l
        })
    }

    /// Digit string such as `"0120"`.
    pub fn label(&self, index: usize) -> String {
        self.levels_of(index).iter().map(|l| char::from_digit(*l as u32, 36).unwrap()).collect()
    }

    pub fn is_computational(&self, index: usize) -> bool {
        (0..self.n_qubits).all(|q| self.level(index, q) < 2)
    }

    /// Full-space indices of the `2^n` computational states, in bitstring order.
    pub fn computational_indices(&self) -> Vec<usize> {
        (0..1usize << self.n_qubits)
            .map(|b| (0..self.n_qubits).fold(0, |acc, q| acc * self.levels + ((b >> (self.n_qubits - 1 - q)) & 1)))
            .collect()
    }

    pub fn computational_labels(&self) -> Vec<String> {
        (0..1usize << self.n_qubits).map(|b| bitstring(b, self.n_qubits)).collect()
    }
}

pub(crate) fn bitstring(b: usize, n: usize) -> String {
    (0..n).map(|q| if (b >> (n - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect()
}

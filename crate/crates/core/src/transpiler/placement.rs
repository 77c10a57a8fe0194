use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::linalg::CMatrix;
use crate::platform::PlatformSpec;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    Trivial,
    Random {
        seed: u64,
    },
}

/// Logical-to-physical qubit assignment; a permutation of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout {
    logical_to_physical: Vec<usize>,
}

impl Layout {
    pub fn trivial(n: usize) -> Self {
        Self { logical_to_physical: (0..n).collect() }
    }

    /// Returns `None` unless `map` is a permutation.
    pub fn from_vec(map: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; map.len()];
        for &p in &map {
            if p >= map.len() || std::mem::replace(&mut seen[p], true) {
                return None;
            }
        }
        Some(Self { logical_to_physical: map })
    }

    pub fn len(&self) -> usize {
        self.logical_to_physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logical_to_physical.is_empty()
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.logical_to_physical
    }

    pub fn logical(&self, physical: usize) -> usize {
        self.logical_to_physical.iter().position(|&p| p == physical).expect("physical qubit in layout")
    }

    /// Exchanges whatever logical qubits sit on physical `a` and `b`.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        for p in &mut self.logical_to_physical {
            if *p == a {
                *p = b;
            } else if *p == b {
                *p = a;
            }
        }
    }

    /// Basis permutation taking a logical-register state to the physical
    /// register: logical bit `l` lands on physical bit `layout[l]`.
    pub fn permutation_matrix<T: Real>(&self) -> CMatrix<T> {
        let n = self.len();
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for x in 0..dim {
            let mut y = 0usize;
            for l in 0..n {
                if (x >> (n - 1 - l)) & 1 == 1 {
                    y |= 1 << (n - 1 - self.physical(l));
                }
            }
            m[(y, x)] = num_complex::Complex::new(T::one(), T::zero());
        }
        m
    }
}

/// Chooses the initial layout. The circuit is assumed already padded.
pub fn place(c: &Circuit, platform: &PlatformSpec, placement: &Placement) -> Layout {
    let n = platform.n_qubits().max(c.n_qubits);
    match placement {
        Placement::Trivial => Layout::trivial(n),
        Placement::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut map: Vec<usize> = (0..n).collect();
            map.shuffle(&mut rng);
            Layout { logical_to_physical: map }
        }
    }
}

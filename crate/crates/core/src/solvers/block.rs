use std::fmt;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// A set of `q` distinct coordinate indices, stored 0-based and ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockSelection {
    indices: Vec<usize>,
}

impl BlockSelection {
    /// Builds a selection from 0-based indices into `0..n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidBlock("empty block".into()));
        }
        indices.sort_unstable();
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidBlock(format!("index {} outside 1..={n}", last + 1)));
            }
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidBlock(format!("duplicate index {}", w[0] + 1)));
        }
        Ok(BlockSelection { indices })
    }

    /// Builds a selection from 1-based indices, as used in files and on the
    /// command line.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        let zero_based = indices
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::InvalidBlock("index 0 in 1-based block".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based, n)
    }

    /// Every index of `0..n`.
    pub fn full(n: usize) -> Self {
        BlockSelection {
            indices: (0..n).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Writes `values` into `out` at the block coordinates; other entries are zero.
    pub fn scatter(&self, values: &[f64], out_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; out_len];
        for (&i, &v) in self.indices.iter().zip(values) {
            out[i] = v;
        }
        out
    }
}

impl fmt::Display for BlockSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// Uniform sampler over the `C(n, q)` subsets of `0..n`.
///
/// Generator: xoshiro256++ seeded from a `u64` through SplitMix64
/// (`rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`). Each draw runs `q`
/// steps of a partial Fisher-Yates shuffle over a persistent permutation,
/// taking each swap position with Lemire's multiply-and-reject reduction of
/// one 64-bit output. The first `q` entries, sorted, form the block.
#[derive(Debug, Clone)]
pub struct BlockSampler {
    rng: Xoshiro256PlusPlus,
    perm: Vec<usize>,
    q: usize,
}

impl BlockSampler {
    pub fn new(n: usize, q: usize, seed: u64) -> Result<Self> {
        if q == 0 || q > n {
            return Err(Error::InvalidConfig(format!("block size q = {q} must lie in 1..={n}")));
        }
        Ok(BlockSampler {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            perm: (0..n).collect(),
            q,
        })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Draws the next block into `out` (cleared first), ascending.
    pub fn sample_into(&mut self, out: &mut Vec<usize>) {
        let n = self.perm.len();
        out.clear();
        for i in 0..self.q {
            let j = i + uniform_below(&mut self.rng, (n - i) as u64) as usize;
            self.perm.swap(i, j);
            out.push(self.perm[i]);
        }
        out.sort_unstable();
    }

    pub fn sample(&mut self) -> BlockSelection {
        let mut indices = Vec::with_capacity(self.q);
        self.sample_into(&mut indices);
        BlockSelection { indices }
    }
}

/// Uniform integer in `0..bound` (Lemire, "Fast random integer generation in
/// an interval", 2019).
fn uniform_below<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let mut wide = u128::from(rng.next_u64()) * u128::from(bound);
    let mut low = wide as u64;
    if low < bound {
        let threshold = bound.wrapping_neg() % bound;
        while low < threshold {
            wide = u128::from(rng.next_u64()) * u128::from(bound);
            low = wide as u64;
        }
    }
    (wide >> 64) as u64
}

/// One uniform draw of `q` distinct indices from `0..n`.
pub fn sample_block(rng_seed: u64, n: usize, q: usize) -> Result<BlockSelection> {
    Ok(BlockSampler::new(n, q, rng_seed)?.sample())
}

//! Random partition of particle indices into batches, one fresh plan per step.

use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;

/// One random partition of 0..N-1 into q near-equal contiguous slices of a
/// uniformly shuffled permutation.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    perm: Vec<u32>,
    /// q + 1 boundary offsets into `perm`.
    offsets: Vec<u32>,
    /// Batch id per particle index.
    batch_of: Vec<u32>,
}

impl BatchPlan {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn q(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Members of batch v (order is the shuffled order, not ascending).
    pub fn batch(&self, v: usize) -> &[u32] {
        &self.perm[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn batch_sizes(&self) -> Vec<usize> {
        (0..self.q()).map(|v| self.batch(v).len()).collect()
    }

    pub fn batch_id(&self, i: usize) -> usize {
        self.batch_of[i] as usize
    }

    /// Build directly from explicit batches (used for enumeration oracles).
    pub fn from_batches(batches: &[Vec<usize>], n: usize) -> Result<BatchPlan> {
        let mut perm = Vec::with_capacity(n);
        let mut offsets = vec![0u32];
        let mut batch_of = vec![u32::MAX; n];
        for (v, b) in batches.iter().enumerate() {
            for &i in b {
                if i >= n || batch_of[i] != u32::MAX {
                    return Err(Error::Config(format!("invalid batch member {i}")));
                }
                batch_of[i] = v as u32;
                perm.push(i as u32);
            }
            offsets.push(perm.len() as u32);
        }
        if perm.len() != n {
            return Err(Error::Config("batches must cover all indices".into()));
        }
        Ok(BatchPlan {
            perm,
            offsets,
            batch_of,
        })
    }
}

/// Uniformly random partition: unbiased Fisher-Yates shuffle of 0..N-1, then
/// contiguous slicing into q parts whose sizes differ by at most one (the
/// first N mod q batches get one extra member).
pub fn make_batches(n: usize, q: usize, rng: &mut impl Rng) -> Result<BatchPlan> {
    if q < 1 || q > n {
        return Err(Error::Config(format!(
            "batch count q = {q} must satisfy 1 <= q <= N = {n}"
        )));
    }
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(rng);
    let base = n / q;
    let extra = n % q;
    let mut offsets = Vec::with_capacity(q + 1);
    let mut acc = 0u32;
    offsets.push(0);
    for v in 0..q {
        acc += base as u32 + u32::from(v < extra);
        offsets.push(acc);
    }
    let mut batch_of = vec![0u32; n];
    for v in 0..q {
        for &i in &perm[offsets[v] as usize..offsets[v + 1] as usize] {
            batch_of[i as usize] = v as u32;
        }
    }
    Ok(BatchPlan {
        perm,
        offsets,
        batch_of,
    })
}

/// 1 iff i and j lie in the same batch. Symmetric; the diagonal is 1.
pub fn same_batch_indicator(plan: &BatchPlan, i: usize, j: usize) -> u8 {
    assert!(i < plan.n() && j < plan.n(), "index out of range");
    u8::from(plan.batch_of[i] == plan.batch_of[j])
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcore::IndexSet;

/// Which half of ℕ was chosen as `N1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Odds,
    Evens,
}

/// `ℕ = N1 ⊔ N2 ⊔ N3 ⊔ …` with `N_i` the `(i-1)`-th dyadic ray read through
/// the enumeration of `ℕ ∖ N1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexPartition {
    pub n1: IndexSet,
    pub rest: IndexSet,
    pub branch: Branch,
}

/// Position of `r` in block `i`: `r` is the `m`-th element of `N_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPosition {
    pub block: usize,
    pub m: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    pub upto: u64,
    pub blocks_used: usize,
    /// Indices lying in no block or in more than one.
    pub failures: Vec<u64>,
}

impl CoverReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn build_partition(half: IndexSet) -> Result<IndexPartition> {
    let branch = if half == IndexSet::odds() {
        Branch::Odds
    } else if half == IndexSet::evens() {
        Branch::Evens
    } else {
        return Err(Error::InvalidIndexSet(format!("{half} is not odds or evens")));
    };
    let rest = IndexSet::complement(half.clone());
    Ok(IndexPartition {
        n1: half,
        rest,
        branch,
    })
}

impl IndexPartition {
    /// `N_i` for `i ≥ 1`.
    pub fn block(&self, i: usize) -> IndexSet {
        assert!(i >= 1, "blocks are numbered from 1");
        if i == 1 {
            return self.n1.clone();
        }
        let ray = IndexSet::dyadic_ray((i - 1) as u32).expect("block index within 65");
        IndexSet::image(self.rest.clone(), ray)
    }

    /// Block and in-block rank of `r`, computed from 2-adic valuations.
    pub fn locate(&self, r: u64) -> BlockPosition {
        if let Some(m) = self.n1.rank(r) {
            return BlockPosition { block: 1, m };
        }
        let p = self.rest.rank(r).expect("r lies in the complement of N1");
        let v = p.trailing_zeros();
        BlockPosition {
            block: v as usize + 2,
            m: ((p >> v) + 1) / 2,
        }
    }

    /// `i_m`, the `m`-th element of `N_i`.
    pub fn position(&self, i: usize, m: u64) -> u64 {
        self.block(i).nth(m).expect("blocks are infinite")
    }

    /// Checks that each `j ≤ upto` lies in exactly one block, testing
    /// membership in every block that can reach `upto`.
    pub fn cover_check(&self, upto: u64) -> CoverReport {
        let blocks_used = 2 + (64 - upto.max(1).leading_zeros()) as usize;
        let blocks: Vec<IndexSet> = (1..=blocks_used).map(|i| self.block(i)).collect();
        let failures = (1..=upto)
            .filter(|&j| blocks.iter().filter(|b| b.contains(j)).count() != 1)
            .collect();
        CoverReport {
            upto,
            blocks_used,
            failures,
        }
    }

    pub fn describe(&self, blocks: usize, shown: u64) -> Vec<(usize, String, Vec<u64>)> {
        (1..=blocks)
            .map(|i| {
                let b = self.block(i);
                (i, b.to_string(), b.iter().take(shown as usize).collect())
            })
            .collect()
    }
}

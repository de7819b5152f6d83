use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FrameError, Result};

/// Default cap on `m^n` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 65_536;

/// Assignment of every node to exactly one of `block_count` blocks.
///
/// Ordering is lexicographic on the assignment vector, which is also the
/// order in which [`partitions_exhaustive`] yields partitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    block_count: usize,
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(block_count: usize, assignment: Vec<usize>) -> Result<Self> {
        if block_count == 0 {
            return Err(invalid("partition needs at least one block"));
        }
        if let Some(&b) = assignment.iter().find(|&&b| b >= block_count) {
            return Err(FrameError::IndexOutOfRange {
                index: b,
                len: block_count,
            });
        }
        Ok(Self {
            block_count,
            assignment,
        })
    }

    /// Every node in block `block`.
    pub fn constant(node_count: usize, block_count: usize, block: usize) -> Result<Self> {
        Self::new(block_count, vec![block; node_count])
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Nodes assigned to `block`, ascending.
    pub fn block(&self, block: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| (b == block).then_some(j))
            .collect()
    }

    /// Rank of this partition in lexicographic enumeration order.
    pub fn index(&self) -> u64 {
        self.assignment
            .iter()
            .fold(0u64, |acc, &b| acc * self.block_count as u64 + b as u64)
    }

    /// Inverse of [`Partition::index`].
    pub fn from_index(node_count: usize, block_count: usize, mut index: u64) -> Self {
        let m = block_count as u64;
        let mut assignment = vec![0; node_count];
        for slot in assignment.iter_mut().rev() {
            *slot = (index % m) as usize;
            index /= m;
        }
        Self {
            block_count,
            assignment,
        }
    }

    pub(crate) fn set_block(&mut self, node: usize, block: usize) {
        self.assignment[node] = block;
    }
}

/// `m^n`, or `None` on overflow.
pub fn partition_count(node_count: usize, block_count: usize) -> Option<u64> {
    let exp = u32::try_from(node_count).ok()?;
    (block_count as u64).checked_pow(exp)
}

/// Checks `m^n ≤ budget` and returns the count.
pub fn check_budget(node_count: usize, block_count: usize, budget: u64) -> Result<u64> {
    if block_count == 0 {
        return Err(invalid("partition needs at least one block"));
    }
    match partition_count(node_count, block_count) {
        Some(total) if total <= budget => Ok(total),
        _ => Err(FrameError::BudgetExceeded {
            blocks: block_count,
            nodes: node_count,
            budget,
        }),
    }
}

/// Lexicographic stream over all `m^n` node assignments.
#[derive(Debug, Clone)]
pub struct PartitionIter {
    node_count: usize,
    block_count: usize,
    next: u64,
    total: u64,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.next >= self.total {
            return None;
        }
        let p = Partition::from_index(self.node_count, self.block_count, self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PartitionIter {}

pub fn partitions_exhaustive(
    node_count: usize,
    block_count: usize,
    budget: u64,
) -> Result<PartitionIter> {
    let total = check_budget(node_count, block_count, budget)?;
    Ok(PartitionIter {
        node_count,
        block_count,
        next: 0,
        total,
    })
}

/// Each node independently uniform over the blocks; deterministic in `seed`.
pub fn random_partition(node_count: usize, block_count: usize, seed: u64) -> Result<Partition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_partition_with(node_count, block_count, &mut rng)
}

pub fn random_partition_with<R: Rng + ?Sized>(
    node_count: usize,
    block_count: usize,
    rng: &mut R,
) -> Result<Partition> {
    if block_count == 0 {
        return Err(invalid("partition needs at least one block"));
    }
    let assignment = (0..node_count)
        .map(|_| rng.random_range(0..block_count))
        .collect();
    Ok(Partition {
        block_count,
        assignment,
    })
}

//! Weavings of c-fusion frames and universal bounds over partitions.
//!
//! A weaving picks, for every node, which member contributes there. Its frame
//! operator is `S_p = Σ_i Σ_{j ∈ σ_i} w_j v_{i,j}² P_{i,j}`, so everything the
//! search needs is the `m × n` table of per-node terms ([`WeavingTable`]).

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FrameError, Result};
use crate::frame::{CFusionFrame, FrameBounds};
use crate::hilbert::{
    check_budget, compress, extreme_eigs, random_partition_with, DiscretizedMeasureSpace,
    Operator, Partition, Subspace, DEFAULT_ENUMERATION_BUDGET,
};

/// How "for every partition" is realized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchStrategy {
    /// All `m^n` assignments; the only certified mode.
    Exhaustive { budget: u64 },
    /// Independent uniform random partitions.
    Sampled { samples: usize, seed: u64 },
    /// First-improvement single-node flips from random starts.
    Descent { restarts: usize, seed: u64 },
}

impl Default for SearchStrategy {
    fn default() -> Self {
        Self::Exhaustive {
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Extreme weaving bounds over a set of partitions, with the partitions that attain them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalBounds {
    #[serde(with = "crate::certify::real")]
    pub lower: f64,
    #[serde(with = "crate::certify::real")]
    pub upper: f64,
    pub lower_witness: Partition,
    pub upper_witness: Partition,
    /// True iff every partition was evaluated.
    pub certified: bool,
    pub evaluated: u64,
}

impl UniversalBounds {
    pub fn bounds(&self) -> FrameBounds {
        FrameBounds::new(self.lower, self.upper)
    }
}

/// Per-member, per-node PSD terms whose partition-selected sum is a weaving operator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeavingTable {
    dim: usize,
    terms: Vec<Vec<Operator>>,
}

#[derive(Clone, Copy)]
struct Extreme {
    value: f64,
    index: u64,
}

impl Extreme {
    fn lowest(a: Self, b: Self) -> Self {
        if (b.value, b.index) < (a.value, a.index) {
            b
        } else {
            a
        }
    }

    fn highest(a: Self, b: Self) -> Self {
        if b.value > a.value || (b.value == a.value && b.index < a.index) {
            b
        } else {
            a
        }
    }
}

impl WeavingTable {
    /// `terms[i][j]` is member `i`'s contribution at node `j`.
    pub fn new(dim: usize, terms: Vec<Vec<Operator>>) -> Result<Self> {
        let m = terms.len();
        if m == 0 {
            return Err(invalid("weaving table needs at least one member"));
        }
        let n = terms[0].len();
        if n == 0 {
            return Err(invalid("weaving table needs at least one node"));
        }
        for row in &terms {
            if row.len() != n {
                return Err(FrameError::LengthMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            if let Some(t) = row.iter().find(|t| t.shape() != (dim, dim)) {
                return Err(FrameError::DimensionMismatch {
                    expected: dim,
                    actual: t.nrows(),
                });
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn member_count(&self) -> usize {
        self.terms.len()
    }

    pub fn node_count(&self) -> usize {
        self.terms[0].len()
    }

    pub fn term(&self, member: usize, node: usize) -> &Operator {
        &self.terms[member][node]
    }

    /// Every term compressed to `onto` (`Qᴴ T Q`).
    pub fn compressed(&self, onto: &Subspace) -> Result<Self> {
        if onto.ambient_dim() != self.dim {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim,
                actual: onto.ambient_dim(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|row| row.iter().map(|t| compress(t, onto)).collect())
            .collect();
        Ok(Self {
            dim: onto.dim(),
            terms,
        })
    }

    fn check_partition(&self, p: &Partition) -> Result<()> {
        if p.block_count() != self.member_count() {
            return Err(invalid(format!(
                "partition has {} blocks, family has {} members",
                p.block_count(),
                self.member_count()
            )));
        }
        if p.node_count() != self.node_count() {
            return Err(FrameError::LengthMismatch {
                expected: self.node_count(),
                actual: p.node_count(),
            });
        }
        Ok(())
    }

    fn sum_for(&self, assignment: &[usize]) -> Operator {
        let mut s = Operator::zeros(self.dim, self.dim);
        for (j, &b) in assignment.iter().enumerate() {
            s += &self.terms[b][j];
        }
        s
    }

    pub fn operator(&self, p: &Partition) -> Result<Operator> {
        self.check_partition(p)?;
        Ok(self.sum_for(p.assignment()))
    }

    /// Raw extreme eigenvalues of the weaving operator.
    pub fn extremes(&self, p: &Partition) -> Result<(f64, f64)> {
        extreme_eigs(&self.operator(p)?)
    }

    pub fn bounds(&self, p: &Partition) -> Result<FrameBounds> {
        FrameBounds::of_operator(&self.operator(p)?)
    }

    /// Sum of every member over every node, an upper envelope for all weavings.
    pub fn total_operator(&self) -> Operator {
        let mut s = Operator::zeros(self.dim, self.dim);
        for t in self.terms.iter().flatten() {
            s += t;
        }
        s
    }

    pub fn universal_bounds(&self, strategy: &SearchStrategy) -> Result<UniversalBounds> {
        if self.dim == 0 {
            return Err(invalid("weaving bounds on a zero-dimensional space are undefined"));
        }
        match *strategy {
            SearchStrategy::Exhaustive { budget } => self.exhaustive(budget),
            SearchStrategy::Sampled { samples, seed } => self.sampled(samples, seed),
            SearchStrategy::Descent { restarts, seed } => self.descent(restarts, seed),
        }
    }

    fn exhaustive(&self, budget: u64) -> Result<UniversalBounds> {
        let (n, m) = (self.node_count(), self.member_count());
        let total = check_budget(n, m, budget)?;
        let init = (
            Extreme {
                value: f64::INFINITY,
                index: u64::MAX,
            },
            Extreme {
                value: f64::NEG_INFINITY,
                index: u64::MAX,
            },
        );
        let (lo, hi) = (0..total)
            .into_par_iter()
            .map(|index| {
                let p = Partition::from_index(n, m, index);
                let (l, h) = extreme_eigs(&self.sum_for(p.assignment()))?;
                Ok((Extreme { value: l, index }, Extreme { value: h, index }))
            })
            .try_reduce(
                || init,
                |a, b| Ok((Extreme::lowest(a.0, b.0), Extreme::highest(a.1, b.1))),
            )?;
        Ok(UniversalBounds {
            lower: lo.value.max(0.0),
            upper: hi.value.max(0.0),
            lower_witness: Partition::from_index(n, m, lo.index),
            upper_witness: Partition::from_index(n, m, hi.index),
            certified: true,
            evaluated: total,
        })
    }

    fn sampled(&self, samples: usize, seed: u64) -> Result<UniversalBounds> {
        if samples == 0 {
            return Err(invalid("sampled search needs at least one sample"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (self.node_count(), self.member_count());
        let mut best: Option<(f64, Partition, f64, Partition)> = None;
        for _ in 0..samples {
            let p = random_partition_with(n, m, &mut rng)?;
            let (l, h) = extreme_eigs(&self.sum_for(p.assignment()))?;
            best = Some(match best {
                None => (l, p.clone(), h, p),
                Some((bl, bp, bh, hp)) => {
                    let (bl, bp) = if (l, &p) < (bl, &bp) { (l, p.clone()) } else { (bl, bp) };
                    let (bh, hp) = if h > bh || (h == bh && p < hp) { (h, p) } else { (bh, hp) };
                    (bl, bp, bh, hp)
                }
            });
        }
        let (lower, lower_witness, upper, upper_witness) = best.expect("samples > 0");
        Ok(UniversalBounds {
            lower: lower.max(0.0),
            upper: upper.max(0.0),
            lower_witness,
            upper_witness,
            certified: false,
            evaluated: samples as u64,
        })
    }

    fn descent(&self, restarts: usize, seed: u64) -> Result<UniversalBounds> {
        if restarts == 0 {
            return Err(invalid("descent search needs at least one restart"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (self.node_count(), self.member_count());
        let mut evaluated = 0u64;
        let mut low: Option<(f64, Partition)> = None;
        let mut high: Option<(f64, Partition)> = None;
        for _ in 0..restarts {
            let start = random_partition_with(n, m, &mut rng)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);

            let (l, lp) = self.descend(start.clone(), &order, Direction::Lower, &mut evaluated)?;
            if low.as_ref().is_none_or(|(bl, bp)| (l, &lp) < (*bl, bp)) {
                low = Some((l, lp));
            }
            let (h, hp) = self.descend(start, &order, Direction::Upper, &mut evaluated)?;
            if high
                .as_ref()
                .is_none_or(|(bh, bp)| h > *bh || (h == *bh && hp < *bp))
            {
                high = Some((h, hp));
            }
        }
        let (lower, lower_witness) = low.expect("restarts > 0");
        let (upper, upper_witness) = high.expect("restarts > 0");
        Ok(UniversalBounds {
            lower: lower.max(0.0),
            upper: upper.max(0.0),
            lower_witness,
            upper_witness,
            certified: false,
            evaluated,
        })
    }

    fn descend(
        &self,
        mut p: Partition,
        order: &[usize],
        dir: Direction,
        evaluated: &mut u64,
    ) -> Result<(f64, Partition)> {
        let m = self.member_count();
        let mut s = self.sum_for(p.assignment());
        let mut current = dir.objective(&s)?;
        *evaluated += 1;
        loop {
            let mut improved = false;
            for &j in order {
                let from = p.block_of(j);
                for to in (0..m).filter(|&b| b != from) {
                    let candidate = &s - &self.terms[from][j] + &self.terms[to][j];
                    let value = dir.objective(&candidate)?;
                    *evaluated += 1;
                    if dir.improves(value, current) {
                        p.set_block(j, to);
                        s = self.sum_for(p.assignment());
                        current = dir.objective(&s)?;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                return Ok((current, p));
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Lower,
    Upper,
}

impl Direction {
    fn objective(self, s: &Operator) -> Result<f64> {
        let (lo, hi) = extreme_eigs(s)?;
        Ok(match self {
            Self::Lower => lo,
            Self::Upper => hi,
        })
    }

    fn improves(self, value: f64, current: f64) -> bool {
        let slack = 1e-13 * (1.0 + current.abs());
        match self {
            Self::Lower => value < current - slack,
            Self::Upper => value > current + slack,
        }
    }
}

/// `m ≥ 2` c-fusion frames on one measure space and one ambient `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WovenFamily {
    members: Vec<CFusionFrame>,
}

impl WovenFamily {
    pub fn new(members: Vec<CFusionFrame>) -> Result<Self> {
        if members.len() < 2 {
            return Err(invalid(format!(
                "a woven family needs at least 2 members, got {}",
                members.len()
            )));
        }
        let first = &members[0];
        for f in &members[1..] {
            if f.space() != first.space() {
                return Err(invalid("members must share one measure space"));
            }
            if f.dim() != first.dim() {
                return Err(FrameError::DimensionMismatch {
                    expected: first.dim(),
                    actual: f.dim(),
                });
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[CFusionFrame] {
        &self.members
    }

    pub fn member(&self, i: usize) -> Result<&CFusionFrame> {
        self.members.get(i).ok_or(FrameError::IndexOutOfRange {
            index: i,
            len: self.members.len(),
        })
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn node_count(&self) -> usize {
        self.members[0].node_count()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn space(&self) -> &DiscretizedMeasureSpace {
        self.members[0].space()
    }

    pub fn table(&self) -> WeavingTable {
        WeavingTable {
            dim: self.dim(),
            terms: self.members.iter().map(|f| f.node_contributions()).collect(),
        }
    }

    pub fn member_bounds(&self) -> Result<Vec<FrameBounds>> {
        self.members.iter().map(|f| f.bounds()).collect()
    }

    pub fn weaving_operator(&self, p: &Partition) -> Result<Operator> {
        self.table().operator(p)
    }

    pub fn weaving_bounds(&self, p: &Partition) -> Result<FrameBounds> {
        self.table().bounds(p)
    }

    pub fn universal_bounds(&self, strategy: &SearchStrategy) -> Result<UniversalBounds> {
        self.table().universal_bounds(strategy)
    }

    /// Universal bounds of the weavings compressed to `onto`.
    pub fn universal_bounds_on(
        &self,
        onto: &Subspace,
        strategy: &SearchStrategy,
    ) -> Result<UniversalBounds> {
        self.table().compressed(onto)?.universal_bounds(strategy)
    }

    /// The family carried by a node subset.
    pub fn restrict(&self, nodes: &[usize]) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|f| f.restrict(nodes))
            .collect::<Result<_>>()?;
        Self::new(members)
    }

    /// `Σ_{i ∈ members} Σ_{j ∈ nodes} w_j v_{i,j}² P_{i,j}`.
    pub fn partial_operator(&self, members: &[usize], nodes: &[usize]) -> Result<Operator> {
        let d = self.dim();
        let mut s = Operator::zeros(d, d);
        for &i in members {
            let f = self.member(i)?;
            for &j in nodes {
                if j >= self.node_count() {
                    return Err(FrameError::IndexOutOfRange {
                        index: j,
                        len: self.node_count(),
                    });
                }
                let scale = f.space().weight(j) * f.weights()[j].powi(2);
                s += &f.projectors()[j] * Complex64::new(scale, 0.0);
            }
        }
        Ok(s)
    }
}

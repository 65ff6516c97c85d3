//! Cyclic block walks and their decomposition into simple cycles.
//!
//! The walk of a partition visits the blocks `labels[0], labels[1], ...,
//! labels[k-1]` and returns to `labels[0]`, giving `k` edges. For a
//! non-crossing partition the resulting multigraph is a cactus and every
//! edge lies on exactly one simple cycle. A loop (two cyclically adjacent
//! positions in the same block) is a cycle of length 1.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ncpart::NonCrossingPartition;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CactusError {
    #[error("empty walk")]
    EmptyWalk,
    #[error("walk revisits block {block} at position {position} after leaving its cycle; the partition is crossing")]
    Crossing { block: usize, position: usize },
}

/// Cyclic sequence of block labels; edge `i` joins `seq[i]` and `seq[(i + 1) % k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockWalk {
    seq: Vec<usize>,
}

impl BlockWalk {
    pub fn new(seq: Vec<usize>) -> Self {
        Self { seq }
    }

    pub fn seq(&self) -> &[usize] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Edges `(from, to)` in walk order, the wrap-around edge last.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.seq.len();
        (0..k).map(move |i| (self.seq[i], self.seq[(i + 1) % k]))
    }

    /// Number of cyclically adjacent equal pairs, i.e. loop edges.
    pub fn loop_count(&self) -> usize {
        self.edges().filter(|(a, b)| a == b).count()
    }
}

/// Multiset of simple-cycle lengths, stored in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleDecomposition {
    lengths: Vec<usize>,
    loops: usize,
}

impl CycleDecomposition {
    pub fn from_lengths(mut lengths: Vec<usize>) -> Self {
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        let loops = lengths.iter().filter(|&&l| l == 1).count();
        Self { lengths, loops }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Number of length-1 cycles.
    pub fn loops(&self) -> usize {
        self.loops
    }

    pub fn cycle_count(&self) -> usize {
        self.lengths.len()
    }

    /// Sum of cycle lengths, equal to the walk length.
    pub fn total(&self) -> usize {
        self.lengths.iter().sum()
    }

    pub fn has_odd_cycle(&self) -> bool {
        self.lengths.iter().any(|l| l % 2 == 1)
    }
}

impl fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.lengths.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

pub fn block_walk(pi: &NonCrossingPartition) -> BlockWalk {
    BlockWalk::new(pi.labels().to_vec())
}

/// Collapses every maximal run of cyclically consecutive equal symbols to a
/// single symbol. Returns the reduced walk and the number of removed
/// positions. A constant walk reduces to one symbol with `r = k - 1`; its
/// remaining wrap edge is still a loop.
pub fn squeeze(walk: &BlockWalk) -> (BlockWalk, usize) {
    let mut reduced: Vec<usize> = Vec::with_capacity(walk.len());
    for &b in walk.seq() {
        if reduced.last() != Some(&b) {
            reduced.push(b);
        }
    }
    while reduced.len() > 1 && reduced.last() == reduced.first() {
        reduced.pop();
    }
    let removed = walk.len() - reduced.len();
    (BlockWalk::new(reduced), removed)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Seen {
    Never,
    OnStack,
    Popped,
}

/// Stack decomposition of an arbitrary cyclic walk.
///
/// Moving to the current top is a loop; moving to a vertex deeper in the
/// stack closes a cycle through every vertex popped on the way; anything
/// else is pushed. A move to a vertex that has already been popped can only
/// happen on a crossing walk and is reported as an error.
pub fn decompose_walk(walk: &BlockWalk) -> Result<CycleDecomposition, CactusError> {
    let seq = walk.seq();
    let Some(&start) = seq.first() else {
        return Err(CactusError::EmptyWalk);
    };
    let width = seq.iter().copied().max().unwrap_or(0) + 1;
    let mut seen = vec![Seen::Never; width];
    let mut stack = Vec::with_capacity(seq.len());
    let mut lengths = Vec::with_capacity(seq.len());
    stack.push(start);
    seen[start] = Seen::OnStack;

    for (i, (_, to)) in walk.edges().enumerate() {
        let top = *stack.last().expect("stack keeps the start vertex");
        if to == top {
            lengths.push(1);
            continue;
        }
        match seen[to] {
            Seen::OnStack => {
                let mut popped = 0;
                while *stack.last().expect("target is on the stack") != to {
                    let v = stack.pop().expect("target is on the stack");
                    seen[v] = Seen::Popped;
                    popped += 1;
                }
                lengths.push(popped + 1);
            }
            Seen::Never => {
                stack.push(to);
                seen[to] = Seen::OnStack;
            }
            Seen::Popped => {
                return Err(CactusError::Crossing { block: to, position: (i + 1) % seq.len() + 1 });
            }
        }
    }
    debug_assert_eq!(stack, [start]);
    Ok(CycleDecomposition::from_lengths(lengths))
}

/// Cycle lengths of the walk graph of a non-crossing partition.
pub fn cycle_decompose(pi: &NonCrossingPartition) -> CycleDecomposition {
    if pi.k() == 0 {
        return CycleDecomposition::from_lengths(Vec::new());
    }
    decompose_walk(&block_walk(pi)).expect("non-crossing partitions decompose")
}

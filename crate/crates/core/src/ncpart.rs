//! Non-crossing partitions of `[k]` in restricted-growth form.
//!
//! A partition is stored as its label string: `labels[i]` is the block of
//! element `i + 1`, blocks numbered from 1 in order of first appearance.
//! Enumeration walks growth strings depth first and only ever extends a
//! prefix with a block that is still "open", so crossing strings are never
//! generated.

use std::fmt;

use num::{BigUint, One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `k` the enumerator accepts.
pub const NCP_K_MAX: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NcpError {
    #[error("k = {k} exceeds the enumeration limit K_max = {max}")]
    ResourceLimit { k: usize, max: usize },
    #[error("labels are not a restricted-growth string: {0}")]
    NotRestrictedGrowth(String),
    #[error("labels {0:?} describe a crossing partition")]
    Crossing(Vec<usize>),
}

/// A non-crossing partition of `[k]` in canonical (restricted-growth) form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NonCrossingPartition {
    labels: Vec<usize>,
    blocks: usize,
}

impl NonCrossingPartition {
    /// Validates `labels` as a non-crossing restricted-growth string.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self, NcpError> {
        let mut max = 0;
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 || l > max + 1 {
                return Err(NcpError::NotRestrictedGrowth(format!(
                    "label {l} at position {} (running max {max})",
                    i + 1
                )));
            }
            max = max.max(l);
        }
        if !is_non_crossing(&labels) {
            return Err(NcpError::Crossing(labels));
        }
        Ok(Self { labels, blocks: max })
    }

    /// The empty partition of `[0]`.
    pub fn empty() -> Self {
        Self { labels: Vec::new(), blocks: 0 }
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    /// Number of blocks `t`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Blocks as sorted lists of 1-based elements.
    pub fn block_sets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i + 1);
        }
        out
    }
}

impl fmt::Display for NonCrossingPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// True iff no `a < b < c < d` has `labels[a] == labels[c] != labels[b] == labels[d]`.
///
/// Works on any label sequence (restricted growth not required). A block can
/// be rejoined only while every block opened after it is abandoned for good.
pub fn is_non_crossing(labels: &[usize]) -> bool {
    let mut stack: Vec<usize> = Vec::new();
    let mut closed: Vec<usize> = Vec::new();
    for &l in labels {
        if closed.contains(&l) {
            return false;
        }
        match stack.iter().position(|&b| b == l) {
            Some(pos) => closed.extend(stack.drain(pos + 1..)),
            None => stack.push(l),
        }
    }
    true
}

/// Lazy enumerator over non-crossing partitions of `[k]` in lexicographic
/// order of their label strings, optionally restricted to exactly `t` blocks.
#[derive(Clone, Debug)]
pub struct NcpIter {
    k: usize,
    target: Option<usize>,
    labels: Vec<usize>,
    // stacks[i] = open blocks (bottom to top) before position i is assigned.
    stacks: Vec<Vec<usize>>,
    // maxes[i] = largest label among labels[..i].
    maxes: Vec<usize>,
    state: IterState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum IterState {
    Fresh,
    Running,
    Done,
}

impl NcpIter {
    fn new(k: usize, target: Option<usize>) -> Self {
        Self {
            k,
            target,
            labels: vec![0; k],
            stacks: vec![Vec::new(); k + 1],
            maxes: vec![0; k + 1],
            state: IterState::Fresh,
        }
    }

    fn feasible(&self, pos: usize, new_max: usize) -> bool {
        match self.target {
            None => true,
            Some(t) => new_max <= t && t - new_max < self.k - pos,
        }
    }

    fn assign(&mut self, pos: usize, label: usize) {
        let mut stack = self.stacks[pos].clone();
        match stack.iter().position(|&b| b == label) {
            Some(at) => stack.truncate(at + 1),
            None => stack.push(label),
        }
        self.labels[pos] = label;
        self.maxes[pos + 1] = self.maxes[pos].max(label);
        self.stacks[pos + 1] = stack;
    }

    /// Fills positions `from..k` with the lexicographically smallest feasible
    /// completion: rejoin block 1 while slack remains, then open new blocks.
    fn complete_from(&mut self, from: usize) {
        for pos in from..self.k {
            let max = self.maxes[pos];
            let label = if pos > 0 && self.feasible(pos, max) { 1 } else { max + 1 };
            self.assign(pos, label);
        }
    }

    /// Smallest valid choice at `pos` strictly greater than its current label.
    fn next_choice(&self, pos: usize) -> Option<usize> {
        let current = self.labels[pos];
        let max = self.maxes[pos];
        if current == max + 1 {
            return None;
        }
        let stack = &self.stacks[pos];
        let candidates = stack.iter().copied().filter(|&b| b > current).chain(std::iter::once(max + 1));
        candidates.into_iter().find(|&c| self.feasible(pos, max.max(c)))
    }
}

impl Iterator for NcpIter {
    type Item = NonCrossingPartition;

    fn next(&mut self) -> Option<Self::Item> {
        match self.state {
            IterState::Done => return None,
            IterState::Fresh => {
                self.state = IterState::Running;
                if self.k == 0 {
                    self.state = IterState::Done;
                    return match self.target {
                        None | Some(0) => Some(NonCrossingPartition::empty()),
                        Some(_) => None,
                    };
                }
                if let Some(t) = self.target {
                    if t == 0 || t > self.k {
                        self.state = IterState::Done;
                        return None;
                    }
                }
                self.complete_from(0);
            }
            IterState::Running => {
                // position 0 is always label 1, so only positions >= 1 advance
                let advanced = (1..self.k).rev().find_map(|pos| self.next_choice(pos).map(|c| (pos, c)));
                match advanced {
                    Some((pos, choice)) => {
                        self.assign(pos, choice);
                        self.complete_from(pos + 1);
                    }
                    None => {
                        self.state = IterState::Done;
                        return None;
                    }
                }
            }
        }
        Some(NonCrossingPartition { labels: self.labels.clone(), blocks: self.maxes[self.k] })
    }
}

fn check_limit(k: usize) -> Result<(), NcpError> {
    if k > NCP_K_MAX {
        Err(NcpError::ResourceLimit { k, max: NCP_K_MAX })
    } else {
        Ok(())
    }
}

/// All non-crossing partitions of `[k]`, lexicographic in their labels.
pub fn enumerate_ncp(k: usize) -> Result<NcpIter, NcpError> {
    check_limit(k)?;
    Ok(NcpIter::new(k, None))
}

/// Non-crossing partitions of `[k]` with exactly `t` blocks. Empty when `t > k`.
pub fn enumerate_ncp_with_blocks(k: usize, t: usize) -> Result<NcpIter, NcpError> {
    check_limit(k)?;
    Ok(NcpIter::new(k, Some(t)))
}

fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Catalan number `C_k = binom(2k, k) / (k + 1)`.
pub fn catalan(k: usize) -> BigUint {
    binomial(2 * k, k) / BigUint::from(k + 1)
}

/// Narayana number `N(k, t) = binom(k, t) binom(k, t - 1) / k`, with `N(0, 0) = 1`.
pub fn narayana(k: usize, t: usize) -> BigUint {
    if k == 0 {
        return if t == 0 { BigUint::one() } else { BigUint::zero() };
    }
    if t == 0 || t > k {
        return BigUint::zero();
    }
    binomial(k, t) * binomial(k, t - 1) / BigUint::from(k)
}

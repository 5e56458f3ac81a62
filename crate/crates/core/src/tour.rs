//! Feasible tours and their block structure.
//!
//! Positions are 1-based over `1..=2n`; the depot sits implicitly at position
//! `0` and again at `2n + 1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::instance::{Instance, NodeId};

/// 1-based position in a tour.
pub type Position = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TourError {
    #[error("sequence is not a permutation of 1..={max}")]
    NotAPermutation { max: usize },
    #[error("precedence violated: delivery {1} is visited before pickup {0}")]
    PrecedenceViolated(NodeId, NodeId),
    #[error("request order is not a permutation of 1..={0}")]
    InvalidOrder(usize),
    #[error("tour has {tour} pairs but the instance has {instance}")]
    DimensionError { tour: usize, instance: usize },
    #[error("malformed tour text: {0}")]
    Malformed(String),
}

/// A feasible Hamiltonian cycle starting and ending at the depot.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tour {
    n: usize,
    /// `nodes[0] == nodes[2n + 1] == 0`; `nodes[p]` is the node at position `p`.
    nodes: Vec<NodeId>,
    /// `pos[v]` is the position of node `v`; `pos[0] == 0`.
    pos: Vec<Position>,
}

impl fmt::Debug for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tour{:?}", self.seq())
    }
}

impl fmt::Display for Tour {
    /// `0 <seq...> 0`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.nodes.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Tour {
    type Err = TourError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let vals = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| TourError::Malformed(format!("bad node `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() < 4 || vals[0] != 0 || vals[vals.len() - 1] != 0 || vals.len() % 2 != 0 {
            return Err(TourError::Malformed("expected `0 <2n nodes> 0`".into()));
        }
        Tour::from_sequence(&vals[1..vals.len() - 1], (vals.len() - 2) / 2)
    }
}

/// Pickup or delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Pickup,
    Delivery,
}

/// A run of same-kind nodes occupying positions `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub kind: NodeKind,
    pub start: Position,
    pub end: Position,
}

impl Block {
    /// Number of nodes in the block (always at least one).
    pub fn size(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, p: Position) -> bool {
        (self.start..=self.end).contains(&p)
    }
}

impl Tour {
    /// Validates `seq` (the `2n` non-depot nodes in visiting order).
    pub fn from_sequence(seq: &[NodeId], n: usize) -> Result<Self, TourError> {
        if n == 0 || seq.len() != 2 * n {
            return Err(TourError::NotAPermutation { max: 2 * n });
        }
        let mut pos = vec![0; 2 * n + 1];
        for (k, &v) in seq.iter().enumerate() {
            if v == 0 || v > 2 * n || pos[v] != 0 {
                return Err(TourError::NotAPermutation { max: 2 * n });
            }
            pos[v] = k + 1;
        }
        for i in 1..=n {
            if pos[i] > pos[n + i] {
                return Err(TourError::PrecedenceViolated(i, n + i));
            }
        }
        let mut nodes = Vec::with_capacity(2 * n + 2);
        nodes.push(0);
        nodes.extend_from_slice(seq);
        nodes.push(0);
        Ok(Self { n, nodes, pos })
    }

    /// Serves requests one at a time in `order`: `i1, n+i1, i2, n+i2, ...`.
    pub fn canonical(n: usize, order: &[NodeId]) -> Result<Self, TourError> {
        let mut seen = vec![false; n + 1];
        if n == 0 || order.len() != n {
            return Err(TourError::InvalidOrder(n));
        }
        for &i in order {
            if i == 0 || i > n || seen[i] {
                return Err(TourError::InvalidOrder(n));
            }
            seen[i] = true;
        }
        let seq: Vec<NodeId> = order.iter().flat_map(|&i| [i, n + i]).collect();
        Ok(Self::from_parts_unchecked(n, seq))
    }

    /// Builds a tour whose feasibility the caller has already established.
    pub(crate) fn from_parts_unchecked(n: usize, seq: Vec<NodeId>) -> Self {
        let mut nodes = Vec::with_capacity(2 * n + 2);
        nodes.push(0);
        nodes.extend(seq);
        nodes.push(0);
        let mut pos = vec![0; 2 * n + 1];
        for p in 1..=2 * n {
            pos[nodes[p]] = p;
        }
        let tour = Self { n, nodes, pos };
        debug_assert!(tour.check().is_ok(), "infeasible tour built internally: {tour:?}");
        tour
    }

    /// Re-runs the full feasibility check.
    pub fn check(&self) -> Result<(), TourError> {
        Tour::from_sequence(self.seq(), self.n).map(|_| ())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// The `2n` visited nodes, depot excluded.
    #[inline]
    pub fn seq(&self) -> &[NodeId] {
        &self.nodes[1..=2 * self.n]
    }

    /// Node sequence with the depot at both ends (`0 ... 0`).
    #[inline]
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Node at position `p` (`0` and `2n + 1` are the depot).
    #[inline]
    pub fn at(&self, p: Position) -> NodeId {
        self.nodes[p]
    }

    #[inline]
    pub fn position(&self, node: NodeId) -> Position {
        self.pos[node]
    }

    #[inline]
    pub fn is_pickup(&self, node: NodeId) -> bool {
        node >= 1 && node <= self.n
    }

    #[inline]
    pub fn kind_at(&self, p: Position) -> NodeKind {
        if self.is_pickup(self.nodes[p]) {
            NodeKind::Pickup
        } else {
            NodeKind::Delivery
        }
    }

    /// Total travel cost including both depot legs.
    pub fn cost(&self, instance: &Instance) -> Result<f64, TourError> {
        if instance.n() != self.n {
            return Err(TourError::DimensionError { tour: self.n, instance: instance.n() });
        }
        Ok(self.cost_unchecked(instance))
    }

    #[inline]
    pub(crate) fn cost_unchecked(&self, instance: &Instance) -> f64 {
        sequence_cost(&self.nodes, instance)
    }

    /// Maximal same-kind runs in visiting order. Kinds alternate and the first
    /// block is always a pickup block.
    pub fn maximal_blocks(&self) -> Vec<Block> {
        let mut blocks: Vec<Block> = Vec::new();
        for p in 1..=2 * self.n {
            let kind = self.kind_at(p);
            match blocks.last_mut() {
                Some(b) if b.kind == kind => b.end = p,
                _ => blocks.push(Block { kind, start: p, end: p }),
            }
        }
        blocks
    }

    /// Index into [`Tour::maximal_blocks`] of the block containing each position
    /// (entry `0` unused).
    pub fn block_index(&self) -> Vec<usize> {
        let mut idx = vec![0; 2 * self.n + 1];
        let mut b = 0;
        for p in 2..=2 * self.n {
            if self.kind_at(p) != self.kind_at(p - 1) {
                b += 1;
            }
            idx[p] = b;
        }
        idx
    }

    /// Prefix counts of pickups: entry `p` is the number of pickups among
    /// positions `1..=p`.
    pub fn pickup_profile(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.n + 1);
        out.push(0);
        for p in 1..=2 * self.n {
            out.push(out[p - 1] + usize::from(self.is_pickup(self.nodes[p])));
        }
        out
    }
}

/// Cost of a closed node walk given with the depot at both ends.
#[inline]
pub(crate) fn sequence_cost(nodes: &[NodeId], instance: &Instance) -> f64 {
    nodes.windows(2).map(|w| instance.cost(w[0], w[1])).sum()
}

/// True when `seq` is a permutation of `1..=2n` with every pickup first.
pub fn is_feasible(seq: &[NodeId], n: usize) -> bool {
    Tour::from_sequence(seq, n).is_ok()
}

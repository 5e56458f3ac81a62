//! Feasibility-preserving neighbourhood operators.
//!
//! The five admissible kinds are node exchanges inside a block (`N1`), a
//! delivery swapped with a later pickup (`N2`), two whole pickup-delivery pairs
//! swapped (`N3`), two same-kind sub-blocks of one maximal block swapped
//! (`B1`), and a delivery sub-block swapped with a later pickup sub-block
//! (`B2`). The unrestricted position swap (`Naive`) and the pair re-insertion
//! (`Insertion`) are auxiliary.
//!
//! Rewards are `cost(old) - cost(new)`, so improvements are positive.

mod insertion;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, NodeId};
use crate::tour::{NodeKind, Position, Tour};

pub use insertion::{apply_insertion, insertion_as_exchanges, precedence_relation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("move {0} is out of range for this tour")]
    MoveOutOfRange(String),
    #[error("move {0} does not match the node kinds at its positions")]
    MoveIllTyped(String),
    #[error("insertion targets the same position twice")]
    PositionClash,
    #[error("naive swaps may break precedence; use apply_naive")]
    NotAdmissible,
    #[error("insertion cannot be expressed with node exchanges from this tour")]
    NotExpressible,
}

/// Operator family. The first five are the admissible action set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    N1,
    N2,
    N3,
    B1,
    B2,
    Naive,
    Insertion,
}

impl OperatorKind {
    pub const ADMISSIBLE: [OperatorKind; 5] =
        [OperatorKind::N1, OperatorKind::N2, OperatorKind::N3, OperatorKind::B1, OperatorKind::B2];

    /// Index in `0..5` for admissible kinds.
    pub fn action_index(self) -> Option<usize> {
        Self::ADMISSIBLE.iter().position(|&k| k == self)
    }

    pub fn from_action_index(i: usize) -> Option<Self> {
        Self::ADMISSIBLE.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::N1 => "n1",
            OperatorKind::N2 => "n2",
            OperatorKind::N3 => "n3",
            OperatorKind::B1 => "b1",
            OperatorKind::B2 => "b2",
            OperatorKind::Naive => "naive",
            OperatorKind::Insertion => "insertion",
        }
    }
}

impl FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "n1" => OperatorKind::N1,
            "n2" => OperatorKind::N2,
            "n3" => OperatorKind::N3,
            "b1" => OperatorKind::B1,
            "b2" => OperatorKind::B2,
            "naive" => OperatorKind::Naive,
            "insertion" | "ins" => OperatorKind::Insertion,
            other => return Err(format!("unknown operator `{other}`")),
        })
    }
}

/// One parameterised operator application. Positions are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    /// Swap positions `a < b` inside one maximal block.
    N1 { a: Position, b: Position },
    /// Swap the delivery at `a` with the pickup at `b > a`.
    N2 { a: Position, b: Position },
    /// Swap pickups `i`, `j` and their deliveries.
    N3 { i: NodeId, j: NodeId },
    /// Swap spans `u_start..=u_end` and `v_start..=v_end` of one maximal block.
    B1 { u_start: Position, u_end: Position, v_start: Position, v_end: Position },
    /// Swap delivery span `d_start..=d_end` with the later pickup span `p_start..=p_end`.
    B2 { d_start: Position, d_end: Position, p_start: Position, p_end: Position },
    /// Swap any two positions; may break precedence.
    Naive { a: Position, b: Position },
    /// Remove pair `(i, n+i)` and re-insert it at final positions `p_new < d_new`.
    Insertion { i: NodeId, p_new: Position, d_new: Position },
}

impl Move {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Move::N1 { .. } => OperatorKind::N1,
            Move::N2 { .. } => OperatorKind::N2,
            Move::N3 { .. } => OperatorKind::N3,
            Move::B1 { .. } => OperatorKind::B1,
            Move::B2 { .. } => OperatorKind::B2,
            Move::Naive { .. } => OperatorKind::Naive,
            Move::Insertion { .. } => OperatorKind::Insertion,
        }
    }

    /// Positional constraints that do not depend on a tour.
    pub fn check_shape(&self) -> Result<(), MoveError> {
        let ok = match *self {
            Move::N1 { a, b } | Move::N2 { a, b } => a >= 1 && a < b,
            Move::Naive { a, b } => a >= 1 && b >= 1 && a != b,
            Move::N3 { i, j } => i >= 1 && j >= 1 && i != j,
            Move::B1 { u_start: s1, u_end: e1, v_start: s2, v_end: e2 }
            | Move::B2 { d_start: s1, d_end: e1, p_start: s2, p_end: e2 } => {
                s1 >= 1 && s1 <= e1 && e1 < s2 && s2 <= e2
            }
            Move::Insertion { i, p_new, d_new } => {
                if p_new == d_new {
                    return Err(MoveError::PositionClash);
                }
                i >= 1 && p_new >= 1 && p_new < d_new
            }
        };
        if ok {
            Ok(())
        } else {
            Err(MoveError::MoveOutOfRange(self.to_string()))
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Move::N1 { a, b } => write!(f, "N1 {a} {b}"),
            Move::N2 { a, b } => write!(f, "N2 {a} {b}"),
            Move::N3 { i, j } => write!(f, "N3 {i} {j}"),
            Move::B1 { u_start, u_end, v_start, v_end } => {
                write!(f, "B1 {u_start} {u_end} {v_start} {v_end}")
            }
            Move::B2 { d_start, d_end, p_start, p_end } => {
                write!(f, "B2 {d_start} {d_end} {p_start} {p_end}")
            }
            Move::Naive { a, b } => write!(f, "NAIVE {a} {b}"),
            Move::Insertion { i, p_new, d_new } => write!(f, "INS {i} {p_new} {d_new}"),
        }
    }
}

impl FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut toks = s.split_whitespace();
        let tag = toks.next().ok_or("empty move")?;
        let args = toks
            .map(|t| t.parse::<usize>().map_err(|_| format!("bad integer `{t}`")))
            .collect::<Result<Vec<_>, _>>()?;
        let mv = match (tag, args.as_slice()) {
            ("N1", &[a, b]) => Move::N1 { a, b },
            ("N2", &[a, b]) => Move::N2 { a, b },
            ("N3", &[i, j]) => Move::N3 { i, j },
            ("B1", &[u_start, u_end, v_start, v_end]) => Move::B1 { u_start, u_end, v_start, v_end },
            ("B2", &[d_start, d_end, p_start, p_end]) => Move::B2 { d_start, d_end, p_start, p_end },
            ("NAIVE", &[a, b]) => Move::Naive { a, b },
            ("INS", &[i, p_new, d_new]) => Move::Insertion { i, p_new, d_new },
            _ => return Err(format!("unrecognised move `{s}`")),
        };
        Ok(mv)
    }
}

fn all_kind(tour: &Tour, from: Position, to: Position, kind: NodeKind) -> bool {
    (from..=to).all(|p| tour.kind_at(p) == kind)
}

/// Checks `mv` against `tour`. `Naive` is rejected as not admissible.
pub fn validate(tour: &Tour, mv: &Move) -> Result<(), MoveError> {
    mv.check_shape()?;
    let len = 2 * tour.n();
    let out_of_range = || MoveError::MoveOutOfRange(mv.to_string());
    let ill_typed = || MoveError::MoveIllTyped(mv.to_string());
    match *mv {
        Move::N1 { a, b } => {
            if b > len {
                return Err(out_of_range());
            }
            if !all_kind(tour, a, b, tour.kind_at(a)) {
                return Err(ill_typed());
            }
        }
        Move::N2 { a, b } => {
            if b > len {
                return Err(out_of_range());
            }
            if tour.kind_at(a) != NodeKind::Delivery || tour.kind_at(b) != NodeKind::Pickup {
                return Err(ill_typed());
            }
        }
        Move::N3 { i, j } => {
            if i > tour.n() || j > tour.n() {
                return Err(out_of_range());
            }
        }
        Move::B1 { u_start, v_end, .. } => {
            if v_end > len {
                return Err(out_of_range());
            }
            if !all_kind(tour, u_start, v_end, tour.kind_at(u_start)) {
                return Err(ill_typed());
            }
        }
        Move::B2 { d_start, d_end, p_start, p_end } => {
            if p_end > len {
                return Err(out_of_range());
            }
            if !all_kind(tour, d_start, d_end, NodeKind::Delivery)
                || !all_kind(tour, p_start, p_end, NodeKind::Pickup)
            {
                return Err(ill_typed());
            }
        }
        Move::Naive { .. } => return Err(MoveError::NotAdmissible),
        Move::Insertion { i, d_new, .. } => {
            if d_new > len {
                return Err(out_of_range());
            }
            if i > tour.n() {
                return Err(ill_typed());
            }
        }
    }
    Ok(())
}

/// Cost change `new - old` when the nodes at a few positions are replaced.
/// Only edges touching a changed position are evaluated.
fn sparse_delta(tour: &Tour, inst: &Instance, changes: &[(Position, NodeId)]) -> f64 {
    let nodes = tour.nodes();
    let new_at = |p: Position| {
        changes.iter().find(|&&(q, _)| q == p).map_or(nodes[p], |&(_, v)| v)
    };
    // edge e joins positions e and e+1
    let mut edges = [usize::MAX; 8];
    let mut count = 0;
    for &(p, _) in changes {
        for e in [p - 1, p] {
            if !edges[..count].contains(&e) {
                edges[count] = e;
                count += 1;
            }
        }
    }
    edges[..count]
        .iter()
        .map(|&e| inst.cost(new_at(e), new_at(e + 1)) - inst.cost(nodes[e], nodes[e + 1]))
        .sum()
}

/// Cost change `new - old` of exchanging spans `s1..=e1` and `s2..=e2`
/// (`e1 < s2`), keeping the order inside each span and in between.
fn exchange_delta(tour: &Tour, inst: &Instance, s1: Position, e1: Position, s2: Position, e2: Position) -> f64 {
    let v = tour.nodes();
    let c = |a: NodeId, b: NodeId| inst.cost(a, b);
    let (x, u1, uk, v1, vl, y) = (v[s1 - 1], v[s1], v[e1], v[s2], v[e2], v[e2 + 1]);
    if e1 + 1 == s2 {
        let old = c(x, u1) + c(uk, v1) + c(vl, y);
        let new = c(x, v1) + c(vl, u1) + c(uk, y);
        new - old
    } else {
        let (m1, mj) = (v[e1 + 1], v[s2 - 1]);
        let old = c(x, u1) + c(uk, m1) + c(mj, v1) + c(vl, y);
        let new = c(x, v1) + c(vl, m1) + c(mj, u1) + c(uk, y);
        new - old
    }
}

fn exchange_spans(seq: &[NodeId], s1: Position, e1: Position, s2: Position, e2: Position) -> Vec<NodeId> {
    // seq is 0-based over positions 1..=2n
    let (s1, e1, s2, e2) = (s1 - 1, e1 - 1, s2 - 1, e2 - 1);
    let mut out = Vec::with_capacity(seq.len());
    out.extend_from_slice(&seq[..s1]);
    out.extend_from_slice(&seq[s2..=e2]);
    out.extend_from_slice(&seq[e1 + 1..s2]);
    out.extend_from_slice(&seq[s1..=e1]);
    out.extend_from_slice(&seq[e2 + 1..]);
    out
}

/// Raw sequence after exchanging two spans, without any feasibility check.
pub fn exchange_raw(tour: &Tour, s1: Position, e1: Position, s2: Position, e2: Position) -> Vec<NodeId> {
    exchange_spans(tour.seq(), s1, e1, s2, e2)
}

/// Incremental cost change `new - old` for a move already validated against `tour`.
pub(crate) fn move_delta(tour: &Tour, mv: &Move, inst: &Instance) -> f64 {
    let n = tour.n();
    match *mv {
        Move::N1 { a, b } | Move::N2 { a, b } | Move::Naive { a, b } => {
            sparse_delta(tour, inst, &[(a, tour.at(b)), (b, tour.at(a))])
        }
        Move::N3 { i, j } => {
            let (pi, pj) = (tour.position(i), tour.position(j));
            let (di, dj) = (tour.position(n + i), tour.position(n + j));
            sparse_delta(tour, inst, &[(pi, j), (pj, i), (di, n + j), (dj, n + i)])
        }
        Move::B1 { u_start, u_end, v_start, v_end } => {
            exchange_delta(tour, inst, u_start, u_end, v_start, v_end)
        }
        Move::B2 { d_start, d_end, p_start, p_end } => {
            exchange_delta(tour, inst, d_start, d_end, p_start, p_end)
        }
        Move::Insertion { .. } => {
            let seq = insertion::inserted_sequence(tour, mv);
            crate::tour::sequence_cost(&with_depot(&seq), inst) - tour.cost_unchecked(inst)
        }
    }
}

fn with_depot(seq: &[NodeId]) -> Vec<NodeId> {
    let mut v = Vec::with_capacity(seq.len() + 2);
    v.push(0);
    v.extend_from_slice(seq);
    v.push(0);
    v
}

/// Resulting node sequence for a move already validated against `tour`.
pub(crate) fn moved_sequence(tour: &Tour, mv: &Move) -> Vec<NodeId> {
    let n = tour.n();
    let mut seq = tour.seq().to_vec();
    match *mv {
        Move::N1 { a, b } | Move::N2 { a, b } | Move::Naive { a, b } => seq.swap(a - 1, b - 1),
        Move::N3 { i, j } => {
            seq.swap(tour.position(i) - 1, tour.position(j) - 1);
            seq.swap(tour.position(n + i) - 1, tour.position(n + j) - 1);
        }
        Move::B1 { u_start, u_end, v_start, v_end } => {
            seq = exchange_spans(&seq, u_start, u_end, v_start, v_end)
        }
        Move::B2 { d_start, d_end, p_start, p_end } => {
            seq = exchange_spans(&seq, d_start, d_end, p_start, p_end)
        }
        Move::Insertion { .. } => seq = insertion::inserted_sequence(tour, mv),
    }
    seq
}

/// Applies an admissible move (or an insertion) and returns the new tour with
/// its reward `cost(tour) - cost(new_tour)`.
pub fn apply_move(tour: &Tour, mv: &Move, inst: &Instance) -> Result<(Tour, f64), MoveError> {
    validate(tour, mv)?;
    let reward = -move_delta(tour, mv, inst);
    let next = Tour::from_parts_unchecked(tour.n(), moved_sequence(tour, mv));
    Ok((next, reward))
}

/// Reward of a validated move without building the new tour.
pub fn move_reward(tour: &Tour, mv: &Move, inst: &Instance) -> Result<f64, MoveError> {
    validate(tour, mv)?;
    Ok(-move_delta(tour, mv, inst))
}

/// Outcome of an unrestricted position swap.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveOutcome {
    pub seq: Vec<NodeId>,
    pub feasible: bool,
    /// Defined only for feasible results.
    pub reward: Option<f64>,
}

/// Swaps two arbitrary positions and reports whether precedence survived.
pub fn apply_naive(tour: &Tour, a: Position, b: Position, inst: &Instance) -> Result<NaiveOutcome, MoveError> {
    let mv = Move::Naive { a, b };
    mv.check_shape()?;
    if a > 2 * tour.n() || b > 2 * tour.n() {
        return Err(MoveError::MoveOutOfRange(mv.to_string()));
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let mut seq = tour.seq().to_vec();
    seq.swap(lo - 1, hi - 1);
    let n = tour.n();
    // only the two swapped nodes can break precedence
    let ok = |node: NodeId, p: Position| {
        if tour.is_pickup(node) {
            p < tour.position(node + n)
        } else {
            p > tour.position(node - n)
        }
    };
    let (x, y) = (tour.at(lo), tour.at(hi));
    let feasible = x != pair(y, n) && ok(x, hi) && ok(y, lo);
    let reward = feasible.then(|| -sparse_delta(tour, inst, &[(lo, y), (hi, x)]));
    Ok(NaiveOutcome { seq, feasible, reward })
}

fn pair(node: NodeId, n: usize) -> NodeId {
    if node <= n {
        node + n
    } else {
        node - n
    }
}

/// Every move of `kind` applicable to `tour`, in a fixed order.
pub fn enumerate_moves(tour: &Tour, kind: OperatorKind) -> Vec<Move> {
    let n = tour.n();
    let len = 2 * n;
    let mut out = Vec::new();
    match kind {
        OperatorKind::N1 => {
            for b in tour.maximal_blocks() {
                for a in b.start..=b.end {
                    for c in a + 1..=b.end {
                        out.push(Move::N1 { a, b: c });
                    }
                }
            }
        }
        OperatorKind::N2 => {
            for a in 1..=len {
                if tour.kind_at(a) != NodeKind::Delivery {
                    continue;
                }
                for b in a + 1..=len {
                    if tour.kind_at(b) == NodeKind::Pickup {
                        out.push(Move::N2 { a, b });
                    }
                }
            }
        }
        OperatorKind::N3 => {
            for i in 1..=n {
                for j in i + 1..=n {
                    out.push(Move::N3 { i, j });
                }
            }
        }
        OperatorKind::B1 => {
            for b in tour.maximal_blocks() {
                for u_start in b.start..=b.end {
                    for u_end in u_start..=b.end {
                        for v_start in u_end + 1..=b.end {
                            for v_end in v_start..=b.end {
                                out.push(Move::B1 { u_start, u_end, v_start, v_end });
                            }
                        }
                    }
                }
            }
        }
        OperatorKind::B2 => {
            let blocks = tour.maximal_blocks();
            for (k, d) in blocks.iter().enumerate().filter(|(_, b)| b.kind == NodeKind::Delivery) {
                for p in blocks[k + 1..].iter().filter(|b| b.kind == NodeKind::Pickup) {
                    for d_start in d.start..=d.end {
                        for d_end in d_start..=d.end {
                            for p_start in p.start..=p.end {
                                for p_end in p_start..=p.end {
                                    out.push(Move::B2 { d_start, d_end, p_start, p_end });
                                }
                            }
                        }
                    }
                }
            }
        }
        OperatorKind::Naive => {
            for a in 1..=len {
                for b in a + 1..=len {
                    out.push(Move::Naive { a, b });
                }
            }
        }
        OperatorKind::Insertion => {
            for i in 1..=n {
                for p_new in 1..=len {
                    for d_new in p_new + 1..=len {
                        out.push(Move::Insertion { i, p_new, d_new });
                    }
                }
            }
        }
    }
    out
}

/// A move with its reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredMove {
    pub mv: Move,
    pub reward: f64,
}

/// Samples `min(k, |applicable|)` moves of `kind` without replacement and
/// returns the one with the largest reward (ties go to the lowest enumeration
/// index). Infeasible naive swaps are never returned.
pub fn sample_best_move<R: Rng + ?Sized>(
    tour: &Tour,
    kind: OperatorKind,
    inst: &Instance,
    k: usize,
    rng: &mut R,
) -> Option<ScoredMove> {
    let moves = enumerate_moves(tour, kind);
    if moves.is_empty() || k == 0 {
        return None;
    }
    let mut picks = index::sample(rng, moves.len(), k.min(moves.len())).into_vec();
    picks.sort_unstable();
    best_of(tour, inst, picks.into_iter().map(|i| moves[i]))
}

/// Highest-reward admissible candidate, first one winning ties.
pub fn best_of(tour: &Tour, inst: &Instance, candidates: impl IntoIterator<Item = Move>) -> Option<ScoredMove> {
    let mut best: Option<ScoredMove> = None;
    for mv in candidates {
        let reward = match mv {
            Move::Naive { a, b } => match apply_naive(tour, a, b, inst).ok().and_then(|o| o.reward) {
                Some(r) => r,
                None => continue,
            },
            _ => -move_delta(tour, &mv, inst),
        };
        if best.is_none_or(|b| reward > b.reward) {
            best = Some(ScoredMove { mv, reward });
        }
    }
    best
}

#[cfg(test)]
mod tests;

//! Exhaustive optimum for small instances.
//!
//! Two search modes return identical results: plain enumeration of every
//! feasible tour (the reference) and a depth-first branch and bound over
//! prefixes in lexicographic order that drops a prefix once its cost exceeds
//! the incumbent. Ties are broken by the lexicographically smallest sequence.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::enumerate::{count_feasible, enumerate_feasible, enumerate_feasible_from, EnumerationError, DEFAULT_ENUMERATION_CAP};
use crate::instance::{Instance, NodeId};
use crate::par::Schedule;
use crate::tour::Tour;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Enumerate,
    BranchAndBound,
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    pub cap: usize,
    pub mode: SearchMode,
    pub schedule: Schedule,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_ENUMERATION_CAP, mode: SearchMode::Enumerate, schedule: Schedule::Serial }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub tour: Tour,
    pub cost: f64,
    /// Feasible tours accounted for, scored or pruned. Always `count_feasible(n)`.
    pub examined: BigUint,
    /// Complete tours whose cost was actually evaluated.
    pub scored: u64,
}

/// JSON form of an [`ExactResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRecord {
    pub n: usize,
    pub cost: f64,
    pub seq: Vec<NodeId>,
    pub examined: String,
}

impl ExactResult {
    pub fn record(&self) -> ExactRecord {
        ExactRecord {
            n: self.tour.n(),
            cost: self.cost,
            seq: self.tour.seq().to_vec(),
            examined: self.examined.to_string(),
        }
    }
}

/// Optimum by plain enumeration, serially, with the default cap.
pub fn brute_force(inst: &Instance) -> Result<ExactResult, EnumerationError> {
    solve_exact(inst, &ExactOptions::default())
}

#[derive(Debug, Clone)]
struct Best {
    cost: f64,
    seq: Vec<NodeId>,
    scored: u64,
}

impl Best {
    fn empty() -> Self {
        Self { cost: f64::INFINITY, seq: Vec::new(), scored: 0 }
    }

    fn offer(&mut self, cost: f64, seq: &[NodeId]) {
        self.scored += 1;
        if cost < self.cost || (cost == self.cost && seq < self.seq.as_slice()) {
            self.cost = cost;
            self.seq.clear();
            self.seq.extend_from_slice(seq);
        }
    }

    fn merge(mut self, other: Best) -> Best {
        let scored = self.scored + other.scored;
        if !other.seq.is_empty()
            && (other.cost < self.cost || (other.cost == self.cost && other.seq < self.seq))
        {
            self = other;
        }
        self.scored = scored;
        self
    }
}

pub fn solve_exact(inst: &Instance, opts: &ExactOptions) -> Result<ExactResult, EnumerationError> {
    let n = inst.n();
    // surface cap and size errors before spawning work
    enumerate_feasible(n, opts.cap)?;
    let parts = opts.schedule.map_range(n, |k| {
        let first = k + 1;
        match opts.mode {
            SearchMode::Enumerate => scan(inst, first, opts.cap),
            SearchMode::BranchAndBound => branch_and_bound(inst, first),
        }
    });
    let best = parts.into_iter().fold(Best::empty(), Best::merge);
    Ok(ExactResult {
        tour: Tour::from_parts_unchecked(n, best.seq),
        cost: best.cost,
        examined: count_feasible(n),
        scored: best.scored,
    })
}

fn scan(inst: &Instance, first: NodeId, cap: usize) -> Best {
    let mut best = Best::empty();
    for t in enumerate_feasible_from(inst.n(), first, cap).expect("checked by caller") {
        best.offer(t.cost_unchecked(inst), t.seq());
    }
    best
}

struct Dfs<'a> {
    inst: &'a Instance,
    n: usize,
    seq: Vec<NodeId>,
    visited: Vec<bool>,
    best: Best,
}

impl Dfs<'_> {
    fn descend(&mut self, last: NodeId, partial: f64) {
        if partial > self.best.cost {
            return;
        }
        let n = self.n;
        if self.seq.len() == 2 * n {
            let total = partial + self.inst.cost(last, 0);
            let seq = std::mem::take(&mut self.seq);
            self.best.offer(total, &seq);
            self.seq = seq;
            return;
        }
        for v in 1..=2 * n {
            let open = !self.visited[v] && (v <= n || self.visited[v - n]);
            if !open {
                continue;
            }
            self.visited[v] = true;
            self.seq.push(v);
            self.descend(v, partial + self.inst.cost(last, v));
            self.seq.pop();
            self.visited[v] = false;
        }
    }
}

fn branch_and_bound(inst: &Instance, first: NodeId) -> Best {
    let n = inst.n();
    let mut dfs = Dfs { inst, n, seq: vec![first], visited: vec![false; 2 * n + 1], best: Best::empty() };
    dfs.visited[first] = true;
    dfs.descend(first, inst.cost(0, first));
    dfs.best
}

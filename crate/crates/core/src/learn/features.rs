//! State features: one 12-wide row per node plus a short operator history.
//!
//! Node row: `[x, y, is_depot, is_pickup, is_delivery, pred_x, pred_y,
//! succ_x, succ_y, dist_to_pred, dist_to_succ, position / 2n]`, rows in node-id
//! order. The depot sits at position 0; its predecessor is the last visited
//! node and its successor the first. Matrix-mode instances have no
//! coordinates and report the origin for every point.
//!
//! Operator vector: `[last_improvement, cost - best_cost, steps_since_improvement / M]`
//! followed by `H` pairs `[kind / 5, improvement]`, most recent first, where
//! `kind` counts from 1 (`N1`) to 5 (`B2`) so that padding stays distinct.

use std::collections::VecDeque;

use crate::instance::Instance;
use crate::operators::OperatorKind;
use crate::tour::Tour;

pub const NODE_FEATURES: usize = 12;
pub const SUMMARY_FEATURES: usize = 3;

/// Length of the operator vector for history length `h`.
pub fn op_dim(h: usize) -> usize {
    2 * h + SUMMARY_FEATURES
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFeatures {
    /// Row-major `rows x NODE_FEATURES`.
    pub node_matrix: Vec<f64>,
    pub rows: usize,
    pub op_vector: Vec<f64>,
}

impl StateFeatures {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.node_matrix[r * NODE_FEATURES..(r + 1) * NODE_FEATURES]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub kind: OperatorKind,
    pub improvement: f64,
}

/// Per-episode search bookkeeping feeding the operator vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchHistory {
    capacity: usize,
    episode_len: usize,
    recent: VecDeque<StepRecord>,
    last_improvement: f64,
    best_cost: f64,
    steps_since_improvement: usize,
}

impl SearchHistory {
    pub fn new(capacity: usize, episode_len: usize, initial_cost: f64) -> Self {
        Self {
            capacity,
            episode_len,
            recent: VecDeque::with_capacity(capacity + 1),
            last_improvement: 0.0,
            best_cost: initial_cost,
            steps_since_improvement: 0,
        }
    }

    /// Records one step; `improvement` is the step reward, `cost` the cost after it.
    pub fn record(&mut self, kind: OperatorKind, improvement: f64, cost: f64) {
        self.recent.push_front(StepRecord { kind, improvement });
        self.recent.truncate(self.capacity);
        self.last_improvement = improvement;
        if improvement > 0.0 {
            self.steps_since_improvement = 0;
        } else {
            self.steps_since_improvement += 1;
        }
        self.best_cost = self.best_cost.min(cost);
    }

    pub fn best_cost(&self) -> f64 {
        self.best_cost
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn recent(&self) -> impl Iterator<Item = &StepRecord> {
        self.recent.iter()
    }
}

pub fn extract_features(tour: &Tour, inst: &Instance, history: &SearchHistory) -> StateFeatures {
    let n = tour.n();
    let rows = 2 * n + 1;
    let nodes = tour.nodes();
    let mut m = vec![0.0; rows * NODE_FEATURES];
    for node in 0..rows {
        let p = if node == 0 { 0 } else { tour.position(node) };
        let pred = if p == 0 { nodes[2 * n] } else { nodes[p - 1] };
        let succ = nodes[p + 1];
        let (here, before, after) = (inst.point(node), inst.point(pred), inst.point(succ));
        let row = &mut m[node * NODE_FEATURES..(node + 1) * NODE_FEATURES];
        row[0] = here.x;
        row[1] = here.y;
        row[2] = f64::from(u8::from(node == 0));
        row[3] = f64::from(u8::from(inst.is_pickup(node)));
        row[4] = f64::from(u8::from(inst.is_delivery(node)));
        row[5] = before.x;
        row[6] = before.y;
        row[7] = after.x;
        row[8] = after.y;
        row[9] = inst.cost(pred, node);
        row[10] = inst.cost(node, succ);
        row[11] = p as f64 / (2 * n) as f64;
    }

    let h = history.capacity;
    let mut op = vec![0.0; op_dim(h)];
    op[0] = history.last_improvement;
    op[1] = tour.cost_unchecked(inst) - history.best_cost;
    op[2] = history.steps_since_improvement as f64 / history.episode_len.max(1) as f64;
    for (k, rec) in history.recent.iter().enumerate() {
        let idx = rec.kind.action_index().expect("history holds admissible kinds");
        op[SUMMARY_FEATURES + 2 * k] = (idx + 1) as f64 / 5.0;
        op[SUMMARY_FEATURES + 2 * k + 1] = rec.improvement;
    }
    StateFeatures { node_matrix: m, rows, op_vector: op }
}

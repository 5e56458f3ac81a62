//! Fixed operator-selection rules run on the same episodic budget as training.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::train::{audit, episode_rng};
use super::LearnError;
use crate::enumerate::{random_canonical, random_tour};
use crate::instance::{Instance, NodeId};
use crate::operators::{apply_move, apply_naive, best_of, sample_best_move, Move, OperatorKind, ScoredMove};
use crate::par::Schedule;
use crate::tour::Tour;

/// Rewards at or below this count as no improvement for greedy descent.
const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Random,
    Single,
    GreedyBest,
    Naive,
    Insertion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Baseline {
    /// Uniform choice among the kinds each step.
    Random(Vec<OperatorKind>),
    /// Always the same kind.
    Single(OperatorKind),
    /// Best sampled move over all kinds; stops when nothing improves.
    GreedyBest(Vec<OperatorKind>),
    /// Unrestricted position swaps, infeasible proposals rejected.
    Naive,
    /// A random pair re-inserted at the best of the sampled position pairs.
    Insertion,
}

pub fn baseline_policy(kinds: &[OperatorKind], selection: Selection) -> Result<Baseline, LearnError> {
    let admissible = || {
        if kinds.is_empty() {
            return Err(LearnError::InvalidConfig("empty operator set".into()));
        }
        if let Some(k) = kinds.iter().find(|k| k.action_index().is_none()) {
            return Err(LearnError::InvalidConfig(format!("{} is not an admissible operator", k.name())));
        }
        Ok(kinds.to_vec())
    };
    Ok(match selection {
        Selection::Random => Baseline::Random(admissible()?),
        Selection::GreedyBest => Baseline::GreedyBest(admissible()?),
        Selection::Single => match admissible()?.as_slice() {
            [k] => Baseline::Single(*k),
            _ => return Err(LearnError::InvalidConfig("single-operator baseline needs exactly one kind".into())),
        },
        Selection::Naive => Baseline::Naive,
        Selection::Insertion => Baseline::Insertion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// Canonical tour with a shuffled request order.
    Canonical,
    /// Uniformly random feasible tour.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub episodes: usize,
    /// Steps per episode; `None` means `50 n`.
    pub steps: Option<usize>,
    pub k_candidates: usize,
    pub seed: u64,
    /// `None` picks uniform starts for greedy descent and canonical ones otherwise.
    pub start: Option<Start>,
    pub audit: bool,
    pub schedule: Schedule,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            episodes: 20,
            steps: None,
            k_candidates: 32,
            seed: 0,
            start: None,
            audit: false,
            schedule: Schedule::Serial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub best_tour: Vec<NodeId>,
    pub best_cost: f64,
    pub episodes: usize,
    pub steps: u64,
    /// Infeasible naive proposals discarded.
    pub rejections: u64,
    /// Steps where no move was available.
    pub no_ops: u64,
    /// Best cost seen up to and including each episode.
    pub cost_curve: Vec<f64>,
}

struct EpisodeOutcome {
    best: Tour,
    best_cost: f64,
    steps: u64,
    rejections: u64,
    no_ops: u64,
}

fn naive_step<R: Rng + ?Sized>(tour: &Tour, inst: &Instance, k: usize, rng: &mut R, rejections: &mut u64) -> Option<Tour> {
    let len = 2 * tour.n();
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    for _ in 0..k {
        let a = rng.gen_range(1..=len);
        let mut b = rng.gen_range(1..len);
        if b >= a {
            b += 1;
        }
        let out = apply_naive(tour, a, b, inst).expect("positions in range");
        match out.reward {
            Some(r) if best.as_ref().is_none_or(|(_, br)| r > *br) => best = Some((out.seq, r)),
            Some(_) => {}
            None => *rejections += 1,
        }
    }
    best.map(|(seq, _)| Tour::from_sequence(&seq, tour.n()).expect("feasible by construction"))
}

fn insertion_step<R: Rng + ?Sized>(tour: &Tour, inst: &Instance, k: usize, rng: &mut R) -> Option<ScoredMove> {
    let n = tour.n();
    let len = 2 * n;
    let i = rng.gen_range(1..=n);
    let pairs = len * (len - 1) / 2;
    let mut picks = index::sample(rng, pairs, k.min(pairs)).into_vec();
    picks.sort_unstable();
    // unrank p < d in the order (1,2), (1,3), ..., (2,3), ...
    let unrank = |mut r: usize| {
        for p in 1..len {
            let row = len - p;
            if r < row {
                return (p, p + 1 + r);
            }
            r -= row;
        }
        unreachable!("rank below the pair count")
    };
    best_of(tour, inst, picks.into_iter().map(|r| {
        let (p_new, d_new) = unrank(r);
        Move::Insertion { i, p_new, d_new }
    }))
}

fn run_one(inst: &Instance, baseline: &Baseline, cfg: &BaselineConfig, episode: usize) -> Result<EpisodeOutcome, LearnError> {
    let n = inst.n();
    let mut rng = episode_rng(cfg.seed, episode as u64);
    let start = cfg.start.unwrap_or(match baseline {
        Baseline::GreedyBest(_) => Start::Uniform,
        _ => Start::Canonical,
    });
    let mut tour = match start {
        Start::Canonical => random_canonical(n, &mut rng),
        Start::Uniform => random_tour(n, &mut rng),
    };
    let mut out = EpisodeOutcome { best_cost: tour.cost_unchecked(inst), best: tour.clone(), steps: 0, rejections: 0, no_ops: 0 };
    let k = cfg.k_candidates;
    for _ in 0..cfg.steps.unwrap_or(50 * n) {
        out.steps += 1;
        let next = match baseline {
            Baseline::Random(kinds) => {
                let kind = kinds[rng.gen_range(0..kinds.len())];
                sample_best_move(&tour, kind, inst, k, &mut rng).map(|m| apply_move(&tour, &m.mv, inst))
            }
            Baseline::Single(kind) => {
                sample_best_move(&tour, *kind, inst, k, &mut rng).map(|m| apply_move(&tour, &m.mv, inst))
            }
            Baseline::GreedyBest(kinds) => {
                let mut best: Option<ScoredMove> = None;
                for &kind in kinds {
                    if let Some(m) = sample_best_move(&tour, kind, inst, k, &mut rng) {
                        if best.is_none_or(|b| m.reward > b.reward) {
                            best = Some(m);
                        }
                    }
                }
                match best {
                    Some(m) if m.reward > IMPROVEMENT_TOL => Some(apply_move(&tour, &m.mv, inst)),
                    _ => break,
                }
            }
            Baseline::Naive => naive_step(&tour, inst, k, &mut rng, &mut out.rejections).map(|t| Ok((t, 0.0))),
            Baseline::Insertion => insertion_step(&tour, inst, k, &mut rng).map(|m| apply_move(&tour, &m.mv, inst)),
        };
        match next {
            Some(applied) => {
                tour = applied.expect("sampled moves are valid").0;
                if cfg.audit {
                    audit(&tour)?;
                }
                let c = tour.cost_unchecked(inst);
                if c < out.best_cost {
                    out.best_cost = c;
                    out.best = tour.clone();
                }
            }
            None => out.no_ops += 1,
        }
    }
    Ok(out)
}

/// Runs `cfg.episodes` independent episodes and keeps the best tour; the
/// earliest episode wins ties.
pub fn run_baseline(inst: &Instance, baseline: &Baseline, cfg: &BaselineConfig) -> Result<BaselineReport, LearnError> {
    if cfg.episodes == 0 || cfg.k_candidates == 0 {
        return Err(LearnError::InvalidConfig("episodes and k_candidates must be positive".into()));
    }
    let outcomes = cfg.schedule.map_range(cfg.episodes, |e| run_one(inst, baseline, cfg, e));
    let mut report: Option<BaselineReport> = None;
    for o in outcomes {
        let o = o?;
        let r = report.get_or_insert_with(|| BaselineReport {
            best_tour: o.best.seq().to_vec(),
            best_cost: o.best_cost,
            episodes: 0,
            steps: 0,
            rejections: 0,
            no_ops: 0,
            cost_curve: Vec::new(),
        });
        if o.best_cost < r.best_cost {
            r.best_cost = o.best_cost;
            r.best_tour = o.best.seq().to_vec();
        }
        r.episodes += 1;
        r.steps += o.steps;
        r.rejections += o.rejections;
        r.no_ops += o.no_ops;
        r.cost_curve.push(r.best_cost);
    }
    Ok(report.expect("at least one episode"))
}

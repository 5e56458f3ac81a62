//! Running one method on one instance.

use std::fmt;
use std::time::Instant;

use anyhow::Result;
use clap::ValueEnum;
use pdtsp::exact::{solve_exact, ExactOptions, SearchMode};
use pdtsp::learn::{run_baseline, train, Baseline, BaselineConfig, TrainConfig};
use pdtsp::{Instance, NodeId, OperatorKind, Tour};
use serde::Serialize;

use crate::config::Tunables;
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Method {
    L2t,
    Greedy,
    Random,
    Naive,
    N1,
    N2,
    N3,
    B1,
    B2,
    Insertion,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::L2t => "l2t",
            Method::Greedy => "greedy",
            Method::Random => "random",
            Method::Naive => "naive",
            Method::N1 => "n1",
            Method::N2 => "n2",
            Method::N3 => "n3",
            Method::B1 => "b1",
            Method::B2 => "b2",
            Method::Insertion => "insertion",
            Method::Exact => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of a result table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub method: String,
    pub instance: String,
    pub n: usize,
    /// Empty for failed runs.
    pub cost: Option<f64>,
    pub seconds: f64,
    pub seed: u64,
    pub extra: String,
}

pub struct Outcome {
    pub tour: Tour,
    pub cost: f64,
    pub seconds: f64,
    pub extra: String,
    /// Best cost after each episode.
    pub curve: Vec<f64>,
}

impl Outcome {
    pub fn record(&self, method: Method, instance: &str, n: usize, seed: u64) -> RunRecord {
        RunRecord {
            method: method.name().to_string(),
            instance: instance.to_string(),
            n,
            cost: Some(self.cost),
            seconds: self.seconds,
            seed,
            extra: self.extra.clone(),
        }
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("episode,best_cost\n");
        for (k, c) in self.curve.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k + 1, c));
        }
        out
    }
}

/// `0 <seq> 0` on one line.
pub fn tour_text(tour: &Tour) -> String {
    tour.nodes().iter().map(NodeId::to_string).collect::<Vec<_>>().join(" ")
}

/// Re-validates an emitted tour from scratch.
pub fn audit(seq: &[NodeId], n: usize) -> Result<Tour> {
    Tour::from_sequence(seq, n).map_err(|e| Failure(format!("emitted tour failed the feasibility audit: {e}")).into())
}

pub fn train_config(t: &Tunables) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        episodes: t.episodes.unwrap_or(d.episodes),
        steps: t.steps.or(d.steps),
        eps_conv: t.eps_conv.unwrap_or(d.eps_conv),
        patience: t.patience.unwrap_or(d.patience),
        lr: t.lr.unwrap_or(d.lr),
        k_candidates: t.candidates.unwrap_or(d.k_candidates),
        history: t.history.unwrap_or(d.history),
        width: t.width.unwrap_or(d.width),
        seed: t.seed.unwrap_or(d.seed),
        schedule: t.schedule.unwrap_or_default(),
        audit: true,
        ..d
    }
}

fn baseline_config(t: &Tunables, episodes: Option<usize>) -> BaselineConfig {
    let d = BaselineConfig::default();
    BaselineConfig {
        episodes: episodes.unwrap_or(d.episodes),
        steps: t.steps.or(d.steps),
        k_candidates: t.candidates.unwrap_or(d.k_candidates),
        seed: t.seed.unwrap_or(d.seed),
        schedule: t.schedule.unwrap_or_default(),
        audit: true,
        ..d
    }
}

pub fn run_method(inst: &Instance, method: Method, t: &Tunables) -> Result<Outcome> {
    let n = inst.n();
    let admissible = OperatorKind::ADMISSIBLE.to_vec();
    let baseline = match method {
        Method::L2t => {
            let cfg = train_config(t);
            let clock = Instant::now();
            let report = train(inst, &cfg)?;
            let seconds = clock.elapsed().as_secs_f64();
            return Ok(Outcome {
                tour: audit(&report.best_tour, n)?,
                cost: report.best_cost,
                seconds,
                extra: format!("episodes={};converged={}", report.episodes_run, report.converged),
                curve: report.cost_curve,
            });
        }
        Method::Exact => {
            let opts = ExactOptions {
                cap: t.cap.unwrap_or(ExactOptions::default().cap),
                mode: SearchMode::BranchAndBound,
                schedule: t.schedule.unwrap_or_default(),
            };
            let clock = Instant::now();
            let result = solve_exact(inst, &opts)?;
            let seconds = clock.elapsed().as_secs_f64();
            return Ok(Outcome {
                tour: audit(result.tour.seq(), n)?,
                cost: result.cost,
                seconds,
                extra: format!("examined={};scored={}", result.examined, result.scored),
                curve: vec![result.cost],
            });
        }
        Method::Greedy => Baseline::GreedyBest(admissible),
        Method::Random => Baseline::Random(admissible),
        Method::Naive => Baseline::Naive,
        Method::Insertion => Baseline::Insertion,
        Method::N1 => Baseline::Single(OperatorKind::N1),
        Method::N2 => Baseline::Single(OperatorKind::N2),
        Method::N3 => Baseline::Single(OperatorKind::N3),
        Method::B1 => Baseline::Single(OperatorKind::B1),
        Method::B2 => Baseline::Single(OperatorKind::B2),
    };
    let episodes = if method == Method::Greedy { t.restarts } else { t.episodes };
    let cfg = baseline_config(t, episodes);
    let clock = Instant::now();
    let report = run_baseline(inst, &baseline, &cfg)?;
    let seconds = clock.elapsed().as_secs_f64();
    let mut extra = format!("episodes={};steps={};no_ops={}", report.episodes, report.steps, report.no_ops);
    if method == Method::Naive {
        extra.push_str(&format!(";rejections={}", report.rejections));
    }
    Ok(Outcome {
        tour: audit(&report.best_tour, n)?,
        cost: report.best_cost,
        seconds,
        extra,
        curve: report.cost_curve,
    })
}

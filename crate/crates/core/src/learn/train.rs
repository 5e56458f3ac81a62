//! Episodes and the outer training loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, SearchHistory};
use super::net::ActorCritic;
use super::ppo::{ppo_update, Transition};
use super::{LearnError, TrainConfig};
use crate::enumerate::random_canonical;
use crate::instance::{Instance, NodeId};
use crate::operators::{apply_move, sample_best_move, OperatorKind};
use crate::tour::Tour;

/// Independent random stream for episode `episode` under `seed`.
pub fn episode_rng(seed: u64, episode: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    rng
}

const UPDATE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct Episode {
    pub transitions: Vec<Transition>,
    pub best_tour: Tour,
    pub best_cost: f64,
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

pub(crate) fn audit(tour: &Tour) -> Result<(), LearnError> {
    Tour::from_sequence(tour.seq(), tour.n())
        .map(|_| ())
        .map_err(|e| LearnError::AuditFailed(format!("{tour}: {e}")))
}

/// Rolls out one episode from a canonical tour with a shuffled request order.
/// Each step samples a kind from the policy and applies the best of
/// `k_candidates` sampled moves of that kind, improving or not.
pub fn run_episode<R: Rng + ?Sized>(
    inst: &Instance,
    net: &ActorCritic,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Episode, LearnError> {
    let n = inst.n();
    let steps = cfg.steps_for(n);
    let mut tour = random_canonical(n, rng);
    let mut cost = tour.cost_unchecked(inst);
    let mut best = (tour.clone(), cost);
    let mut history = SearchHistory::new(net.history(), steps, cost);
    let mut s = extract_features(&tour, inst, &history);
    let mut transitions = Vec::with_capacity(steps);
    for step in 0..steps {
        let out = net.forward(&s)?;
        let a = sample_index(&out.probs, rng);
        let kind = OperatorKind::from_action_index(a).expect("five actions");
        let mut reward = 0.0;
        if let Some(choice) = sample_best_move(&tour, kind, inst, cfg.k_candidates, rng) {
            let (next, r) = apply_move(&tour, &choice.mv, inst).expect("enumerated moves are valid");
            tour = next;
            reward = r;
            cost = tour.cost_unchecked(inst);
            if cfg.audit {
                audit(&tour)?;
            }
            if cost < best.1 {
                best = (tour.clone(), cost);
            }
        }
        history.record(kind, reward, cost);
        let s_next = extract_features(&tour, inst, &history);
        transitions.push(Transition {
            s: std::mem::replace(&mut s, s_next.clone()),
            a,
            r: reward,
            s_next,
            logp_old: out.probs[a].ln(),
            done: step + 1 == steps,
        });
    }
    Ok(Episode { transitions, best_tour: best.0, best_cost: best.1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub best_tour: Vec<NodeId>,
    pub best_cost: f64,
    /// Best cost seen up to and including each episode.
    pub cost_curve: Vec<f64>,
    pub episodes_run: usize,
    pub converged: bool,
}

impl TrainReport {
    pub fn tour(&self) -> Tour {
        Tour::from_sequence(&self.best_tour, self.best_tour.len() / 2).expect("reports hold feasible tours")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    /// `episode,best_cost` rows, episodes counted from 1.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("episode,best_cost\n");
        for (k, c) in self.cost_curve.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k + 1, c));
        }
        out
    }
}

pub fn train(inst: &Instance, cfg: &TrainConfig) -> Result<TrainReport, LearnError> {
    train_with_net(inst, cfg).map(|(report, _)| report)
}

/// Trains from a fresh network and returns the report with the final network.
pub fn train_with_net(inst: &Instance, cfg: &TrainConfig) -> Result<(TrainReport, ActorCritic), LearnError> {
    cfg.validate()?;
    let mut net = ActorCritic::new(cfg.width, cfg.history, cfg.seed);
    let mut update_rng = episode_rng(cfg.seed, UPDATE_STREAM);
    let mut best: Option<(Tour, f64)> = None;
    let mut curve: Vec<f64> = Vec::new();
    let mut streak = 0;
    let mut converged = false;
    let mut next_episode = 0;
    while next_episode < cfg.episodes && !converged {
        let wave = cfg.episodes_per_update.min(cfg.episodes - next_episode);
        let net_ref = &net;
        let episodes = cfg.schedule.map_range(wave, |k| {
            let mut rng = episode_rng(cfg.seed, (next_episode + k) as u64);
            run_episode(inst, net_ref, cfg, &mut rng)
        });
        let mut buffer = Vec::new();
        for ep in episodes {
            let ep = ep?;
            if best.as_ref().is_none_or(|b| ep.best_cost < b.1) {
                best = Some((ep.best_tour, ep.best_cost));
            }
            let c = best.as_ref().expect("set above").1;
            if let Some(&prev) = curve.last() {
                if (c - prev).abs() < cfg.eps_conv {
                    streak += 1;
                } else {
                    streak = 0;
                }
            }
            curve.push(c);
            buffer.extend(ep.transitions);
            if streak >= cfg.patience {
                converged = true;
                break;
            }
        }
        next_episode += wave;
        if !converged && !buffer.is_empty() {
            ppo_update(&mut net, &buffer, cfg, &mut update_rng)?;
        }
    }
    let (tour, cost) = best.expect("at least one episode");
    let report = TrainReport {
        best_tour: tour.seq().to_vec(),
        best_cost: cost,
        episodes_run: curve.len(),
        cost_curve: curve,
        converged,
    };
    Ok((report, net))
}

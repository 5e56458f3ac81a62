//! One-step advantage and the clipped-ratio update.

use rand::seq::SliceRandom;
use rand::Rng;

use super::features::StateFeatures;
use super::net::{ActorCritic, ACTIONS};
use super::{LearnError, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: StateFeatures,
    pub a: usize,
    pub r: f64,
    pub s_next: StateFeatures,
    pub logp_old: f64,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    /// Mean of `(ratio - 1) - ln ratio`, which is never negative.
    pub approx_kl: f64,
    pub minibatches: usize,
}

/// Advantages `r + gamma V(s') (1 - done) - V(s)` and value targets
/// `r + gamma V(s') (1 - done)` under the current parameters. Advantages are
/// standardised when the config asks for it.
pub fn advantages(net: &ActorCritic, buffer: &[Transition], cfg: &TrainConfig) -> Result<(Vec<f64>, Vec<f64>), LearnError> {
    let per = cfg.schedule.map(buffer.iter().collect(), |t| -> Result<(f64, f64), LearnError> {
        let v = net.forward(&t.s)?.value;
        let next = if t.done { 0.0 } else { net.forward(&t.s_next)?.value };
        let target = t.r + cfg.gamma * next;
        Ok((target - v, target))
    });
    let (mut adv, targets): (Vec<f64>, Vec<f64>) = per.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().unzip();
    if cfg.normalize_advantages {
        let len = adv.len() as f64;
        let mean = adv.iter().sum::<f64>() / len;
        let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / len;
        let std = var.sqrt().max(1e-8);
        for a in &mut adv {
            *a = (*a - mean) / std;
        }
    }
    Ok((adv, targets))
}

/// Samples per gradient work item; fixed so the reduction order does not
/// depend on the schedule.
const GRAIN: usize = 8;

struct Partial {
    grad: Vec<f64>,
    policy_loss: f64,
    value_loss: f64,
    kl: f64,
}

fn minibatch_gradient(
    net: &ActorCritic,
    buffer: &[Transition],
    adv: &[f64],
    targets: &[f64],
    idx: &[usize],
    cfg: &TrainConfig,
) -> Result<Partial, LearnError> {
    let scale = 1.0 / idx.len() as f64;
    let parts = cfg.schedule.map(idx.chunks(GRAIN).collect(), |chunk| -> Result<Partial, LearnError> {
        let mut p = Partial { grad: vec![0.0; net.params().len()], policy_loss: 0.0, value_loss: 0.0, kl: 0.0 };
        for &j in chunk {
            let t = &buffer[j];
            let tr = net.trace(&t.s)?;
            let probs = tr.output.probs;
            let logp = probs[t.a].ln();
            let ratio = (logp - t.logp_old).exp();
            let a = adv[j];
            let unclipped = ratio * a;
            let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * a;
            p.policy_loss -= unclipped.min(clipped);
            p.kl += (ratio - 1.0) - (logp - t.logp_old);
            let mut dlogits = [0.0; ACTIONS];
            if unclipped <= clipped {
                let coef = -a * ratio * scale;
                for (k, d) in dlogits.iter_mut().enumerate() {
                    *d = coef * (f64::from(u8::from(k == t.a)) - probs[k]);
                }
            }
            let err = tr.output.value - targets[j];
            p.value_loss += err * err;
            let dvalue = 2.0 * cfg.value_coef * err * scale;
            net.backward(&t.s, &tr, &dlogits, dvalue, &mut p.grad);
        }
        Ok(p)
    });
    let mut total = Partial { grad: vec![0.0; net.params().len()], policy_loss: 0.0, value_loss: 0.0, kl: 0.0 };
    for p in parts {
        let p = p?;
        for (g, v) in total.grad.iter_mut().zip(&p.grad) {
            *g += v;
        }
        total.policy_loss += p.policy_loss;
        total.value_loss += p.value_loss;
        total.kl += p.kl;
    }
    Ok(total)
}

/// `update_epochs` passes of plain gradient descent over shuffled minibatches
/// of the clipped surrogate plus `value_coef` times the value error.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &mut ActorCritic,
    buffer: &[Transition],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<UpdateStats, LearnError> {
    if buffer.is_empty() {
        return Err(LearnError::EmptyBuffer);
    }
    let (adv, targets) = advantages(net, buffer, cfg)?;
    let mut stats = UpdateStats::default();
    let mut seen = 0usize;
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    for _ in 0..cfg.update_epochs {
        order.shuffle(rng);
        for idx in order.chunks(cfg.batch.max(1)) {
            let part = minibatch_gradient(net, buffer, &adv, &targets, idx, cfg)?;
            for (p, g) in net.params_mut().iter_mut().zip(&part.grad) {
                *p -= cfg.lr * g;
            }
            stats.policy_loss += part.policy_loss;
            stats.value_loss += part.value_loss;
            stats.approx_kl += part.kl;
            stats.minibatches += 1;
            seen += idx.len();
        }
    }
    let seen = seen as f64;
    stats.policy_loss /= seen;
    stats.value_loss /= seen;
    stats.approx_kl /= seen;
    Ok(stats)
}

//! Tunable flags and the `key=value` config file they override.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use pdtsp::par::Schedule;

#[derive(Debug, Clone, Default, Args)]
pub struct Tunables {
    /// Base random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training episodes (l2t) or episodes per baseline run.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Steps per episode (default 50 n).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Hidden width of the policy network.
    #[arg(long)]
    pub width: Option<usize>,
    /// Recent operator applications in the search-history features.
    #[arg(long)]
    pub history: Option<usize>,
    /// Sampled candidate moves per step.
    #[arg(long)]
    pub candidates: Option<usize>,
    /// Independent restarts for greedy descent.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Convergence threshold on the best-cost curve.
    #[arg(long = "eps-conv")]
    pub eps_conv: Option<f64>,
    /// Largest n accepted by exact search.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Episodes below the convergence threshold before training stops.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// `serial` or `parallel`.
    #[arg(long)]
    pub schedule: Option<Schedule>,
}

fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    value.parse().map(Some).map_err(|e| anyhow::anyhow!("config key `{key}`: {e}"))
}

impl Tunables {
    /// Parses `key = value` lines; `#` starts a comment. Keys are the long
    /// flag names, with `-` and `_` interchangeable.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut t = Tunables::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key=value", lineno + 1);
            };
            let (key, value) = (key.trim().replace('_', "-"), value.trim());
            match key.as_str() {
                "seed" => t.seed = parsed(&key, value)?,
                "episodes" => t.episodes = parsed(&key, value)?,
                "steps" => t.steps = parsed(&key, value)?,
                "width" => t.width = parsed(&key, value)?,
                "history" => t.history = parsed(&key, value)?,
                "candidates" => t.candidates = parsed(&key, value)?,
                "restarts" => t.restarts = parsed(&key, value)?,
                "eps-conv" => t.eps_conv = parsed(&key, value)?,
                "cap" => t.cap = parsed(&key, value)?,
                "patience" => t.patience = parsed(&key, value)?,
                "lr" => t.lr = parsed(&key, value)?,
                "schedule" => t.schedule = parsed(&key, value)?,
                other => bail!("config line {}: unknown key `{other}`", lineno + 1),
            }
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse_config(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Flags win over the config file.
    pub fn over(self, file: Tunables) -> Tunables {
        Tunables {
            seed: self.seed.or(file.seed),
            episodes: self.episodes.or(file.episodes),
            steps: self.steps.or(file.steps),
            width: self.width.or(file.width),
            history: self.history.or(file.history),
            candidates: self.candidates.or(file.candidates),
            restarts: self.restarts.or(file.restarts),
            eps_conv: self.eps_conv.or(file.eps_conv),
            cap: self.cap.or(file.cap),
            patience: self.patience.or(file.patience),
            lr: self.lr.or(file.lr),
            schedule: self.schedule.or(file.schedule),
        }
    }
}

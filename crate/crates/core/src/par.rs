//! Serial or data-parallel execution of independent work items.
//!
//! Results always come back in input order, so the two schedules are
//! interchangeable wherever the caller reduces in that order. Without the
//! `parallel` feature [`Schedule::Parallel`] runs serially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Serial,
    #[default]
    Parallel,
}

impl Schedule {
    /// True when this build can actually run work items concurrently.
    pub fn is_concurrent(self) -> bool {
        cfg!(feature = "parallel") && self == Schedule::Parallel
    }

    /// Applies `f` to each item, preserving order.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Schedule::Parallel {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }

    /// Applies `f` to `0..count`, preserving order.
    pub fn map_range<R, F>(self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.map((0..count).collect(), f)
    }
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(Schedule::Serial),
            "parallel" => Ok(Schedule::Parallel),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

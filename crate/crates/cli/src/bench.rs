//! Instance × method × seed grids written as CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pdtsp::par::Schedule;
use pdtsp::Instance;

use crate::config::Tunables;
use crate::run::{run_method, Method, RunRecord};

pub const COLUMNS: [&str; 7] = ["method", "instance", "n", "cost", "seconds", "seed", "extra"];

/// Expands directories to their `*.pdtsp` files; the result is sorted.
pub fn collect_instances(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in std::fs::read_dir(p).with_context(|| format!("listing {}", p.display()))? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "pdtsp") {
                    out.push(path);
                }
            }
        } else {
            out.push(p.clone());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub struct BenchOptions {
    pub methods: Vec<Method>,
    pub seeds: u64,
    pub timing: bool,
    pub tunables: Tunables,
}

/// Runs every cell; a failing cell becomes a row with `status=error` and an
/// empty cost. Rows come back sorted by instance, method and seed.
pub fn run_bench(instances: &[PathBuf], opts: &BenchOptions) -> Vec<RunRecord> {
    let base_seed = opts.tunables.seed.unwrap_or(0);
    let mut cells = Vec::new();
    for path in instances {
        for &method in &opts.methods {
            for k in 0..opts.seeds {
                cells.push((path.clone(), method, base_seed + k));
            }
        }
    }
    let schedule = opts.tunables.schedule.unwrap_or_default();
    let mut rows = schedule.map(cells, |(path, method, seed)| {
        let id = instance_id(&path);
        let loaded = std::fs::read_to_string(&path)
            .map_err(anyhow::Error::from)
            .and_then(|text| Instance::parse(&text).map_err(anyhow::Error::from));
        let n = loaded.as_ref().map_or(0, Instance::n);
        let tunables = Tunables { seed: Some(seed), schedule: Some(Schedule::Serial), ..opts.tunables.clone() };
        let result = loaded.and_then(|inst| run_method(&inst, method, &tunables));
        match result {
            Ok(outcome) => {
                let mut row = outcome.record(method, &id, n, seed);
                row.extra = format!("status=ok;{}", row.extra);
                if !opts.timing {
                    row.seconds = 0.0;
                }
                row
            }
            Err(e) => RunRecord {
                method: method.name().to_string(),
                instance: id,
                n,
                cost: None,
                seconds: 0.0,
                seed,
                extra: format!("status=error;message={}", format!("{e:#}").replace(['\n', ';'], " ")),
            },
        }
    });
    rows.sort_by(|a, b| (&a.instance, &a.method, a.seed).cmp(&(&b.instance, &b.method, b.seed)));
    rows
}

pub fn write_csv<W: Write>(rows: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

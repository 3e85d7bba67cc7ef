//! Append-only result log: one JSON record per completed replica batch.
//! Rerunning with the same log skips the ranges already recorded.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lineperc_core::stats::{merge_all, EstimateRecord};

use crate::runner::run_range;
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone)]
pub struct ResumeLog {
    path: PathBuf,
}

/// A run that stopped before covering every replica.
#[derive(Debug, thiserror::Error)]
#[error("stopped after {done} of {total} replicas; resume with --resume {}", .log.display())]
pub struct Interrupted {
    pub done: u64,
    pub total: u64,
    pub log: PathBuf,
}

impl ResumeLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        ResumeLog { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records of `spec` already in the log. Any record of a different
    /// spec is an error: a log belongs to one experiment.
    pub fn load(&self, spec: &ExperimentSpec) -> Result<Vec<EstimateRecord>> {
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        let hash = spec.hash();
        let f = std::fs::File::open(&self.path)?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: EstimateRecord = serde_json::from_str(&line)
                .with_context(|| format!("{}:{}: not a record", self.path.display(), i + 1))?;
            if rec.spec_hash != hash || rec.master_seed != spec.master_seed {
                bail!(
                    "{} holds results of spec {} (seed {}), not {hash} (seed {})",
                    self.path.display(),
                    rec.spec_hash,
                    rec.master_seed,
                    spec.master_seed
                );
            }
            out.push(rec);
        }
        Ok(out)
    }

    pub fn append(&self, rec: &EstimateRecord) -> Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", serde_json::to_string(rec)?)?;
        f.sync_data()?;
        Ok(())
    }
}

/// Replica ranges of `0..total` not covered by `done`, cut into batches.
pub fn missing_batches(done: &[(u64, u64)], total: u64, batch: u64) -> Vec<(u64, u64)> {
    let mut gaps = Vec::new();
    let mut at = 0;
    let mut covered: Vec<(u64, u64)> = done.to_vec();
    covered.sort_unstable();
    for (a, b) in covered {
        if a > at {
            gaps.push((at, a.min(total)));
        }
        at = at.max(b);
    }
    if at < total {
        gaps.push((at, total));
    }
    let batch = batch.max(1);
    gaps.into_iter()
        .filter(|g| g.0 < g.1)
        .flat_map(|(a, b)| (a..b).step_by(batch as usize).map(move |s| (s, (s + batch).min(b))))
        .collect()
}

/// Runs the missing batches of `spec`, appending each to the log, and
/// returns the merged record. With `stop_after`, stops after that many new
/// batches and reports an [`Interrupted`] error if replicas remain.
pub fn run_resumable(
    spec: &ExperimentSpec,
    log: &ResumeLog,
    batch: u64,
    stop_after: Option<usize>,
    pool: &rayon::ThreadPool,
) -> Result<EstimateRecord> {
    let mut records = log.load(spec)?;
    let mut merged = merge_all(&records)?.unwrap_or_else(|| EstimateRecord::empty(spec.hash(), spec.master_seed));
    if merged.replicas.iter().any(|r| r.1 > spec.replicas) {
        bail!("log covers replicas beyond the requested {}", spec.replicas);
    }
    let todo = missing_batches(&merged.replicas, spec.replicas, batch);
    for (i, range) in todo.iter().enumerate() {
        if stop_after.is_some_and(|s| i >= s) {
            return Err(Interrupted { done: merged.trials, total: spec.replicas, log: log.path.clone() }.into());
        }
        let rec = run_range(spec, *range, pool)?;
        log.append(&rec)?;
        merged = merged.merge(&rec)?;
        records.push(rec);
    }
    Ok(merged)
}

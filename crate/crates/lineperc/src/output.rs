//! CSV and JSON result tables.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{ensure, Context, Result};
use lineperc_core::stats::EstimateRecord;
use serde::Serialize;

use crate::spec::ExperimentSpec;

/// Column names for dimension `d`. The trailing `timestamp` column is the
/// only one outside the determinism contract.
pub fn csv_header(d: usize) -> Vec<String> {
    let mut h = vec!["spec_hash".to_string(), "d".into()];
    h.extend((1..=d).map(|i| format!("p{i}")));
    for c in ["observable", "n", "N", "L", "block_n", "c", "k", "replicas", "successes", "estimate", "stderr", "master_seed"] {
        h.push(c.into());
    }
    h.push("timestamp".into());
    h
}

fn row(spec: &ExperimentSpec, rec: &EstimateRecord, timestamp: u64) -> Vec<String> {
    let g = &spec.geometry;
    let mut r = vec![rec.spec_hash.clone(), spec.d().to_string()];
    r.extend(spec.params.iter().map(|p| p.to_string()));
    r.extend([
        spec.observable.to_string(),
        g.n.to_string(),
        g.outer().to_string(),
        g.l.to_string(),
        g.block_n.to_string(),
        g.c.to_string(),
        g.k.to_string(),
        rec.trials.to_string(),
        rec.successes.to_string(),
        rec.estimate.to_string(),
        rec.stderr.to_string(),
        rec.master_seed.to_string(),
        timestamp.to_string(),
    ]);
    r
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn write_csv(w: impl Write, rows: &[(ExperimentSpec, EstimateRecord)]) -> Result<()> {
    let d = rows.first().map_or(3, |r| r.0.d());
    ensure!(rows.iter().all(|r| r.0.d() == d), "all rows of one table must share the dimension");
    let mut out = csv::Writer::from_writer(w);
    out.write_record(csv_header(d))?;
    let ts = unix_now();
    for (spec, rec) in rows {
        out.write_record(row(spec, rec, ts))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(path: &Path, rows: &[(ExperimentSpec, EstimateRecord)]) -> Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(f, rows)
}

#[derive(Serialize)]
struct JsonRow<'a> {
    spec: &'a ExperimentSpec,
    record: &'a EstimateRecord,
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

pub fn rows_json(rows: &[(ExperimentSpec, EstimateRecord)]) -> serde_json::Value {
    serde_json::to_value(rows.iter().map(|(spec, record)| JsonRow { spec, record }).collect::<Vec<_>>())
        .expect("rows serialize")
}

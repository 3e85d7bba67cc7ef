//! Parallel replica execution. Replica `r` always uses `SeedSpec(master, r)`
//! and results are reduced by counting, so no thread count changes a record.

use std::time::Instant;

use anyhow::{Context, Result};
use lineperc_core::observe::{evaluate, Observable, ReplicaOutcome};
use lineperc_core::stats::{bisect_increasing, BisectOutcome, EstimateRecord};
use lineperc_core::SeedSpec;
use rayon::prelude::*;

use crate::spec::ExperimentSpec;

pub const THREADS_ENV: &str = "LINEPERC_THREADS";

/// Pool with `threads` workers, else `LINEPERC_THREADS`, else the machine default.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = match threads {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?,
            Err(_) => 0,
        },
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?)
}

pub fn run_outcomes(spec: &ExperimentSpec, range: (u64, u64), pool: &rayon::ThreadPool) -> Result<Vec<ReplicaOutcome>> {
    spec.validate()?;
    let params = spec.param_vector()?;
    let out: lineperc_core::Result<Vec<ReplicaOutcome>> = pool.install(|| {
        (range.0..range.1)
            .into_par_iter()
            .map(|r| evaluate(spec.observable, &params, &spec.geometry, SeedSpec::new(spec.master_seed, r)))
            .collect()
    });
    Ok(out?)
}

/// Record over replicas `range.0..range.1`.
pub fn run_range(spec: &ExperimentSpec, range: (u64, u64), pool: &rayon::ThreadPool) -> Result<EstimateRecord> {
    let start = Instant::now();
    let successes = run_outcomes(spec, range, pool)?.iter().filter(|o| o.success).count() as u64;
    let mut rec = EstimateRecord::from_counts(spec.hash(), spec.master_seed, range, successes)?;
    rec.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(rec)
}

pub fn run_experiment(spec: &ExperimentSpec, pool: &rayon::ThreadPool) -> Result<EstimateRecord> {
    run_range(spec, (0, spec.replicas), pool)
}

/// Bisection on the diagonal parameter `ρ` of an observable increasing in
/// `ρ`; the spec's parameter vector only fixes the dimension.
pub fn bisect_critical(
    spec: &ExperimentSpec,
    range: (f64, f64),
    target: f64,
    tol: f64,
    pool: &rayon::ThreadPool,
) -> Result<BisectOutcome> {
    let d = spec.d();
    let out = bisect_increasing(range, target, tol, |rho| {
        run_experiment(&spec.with_params(vec![rho; d]), pool)
            .map_err(|e| lineperc_core::Error::Domain(format!("evaluation at {rho} failed: {e:#}")))
    })?;
    Ok(out)
}

/// Bisection on the survival probability of 2-directed paths to `depth`.
pub fn estimate_two_directed_pc(
    depth: usize,
    range: (f64, f64),
    tol: f64,
    replicas: u64,
    master_seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<BisectOutcome> {
    if depth < 16 {
        anyhow::bail!("depth must be at least 16, got {depth}");
    }
    let geometry = lineperc_core::observe::Geometry { depth, ..Default::default() };
    let spec = ExperimentSpec::new(vec![0.5; 3], Observable::TwoDirected, geometry, replicas, master_seed);
    bisect_critical(&spec, range, 0.5, tol, pool)
}

/// Records at each inner radius `n`.
pub fn decay_curve(spec: &ExperimentSpec, ns: &[u32], pool: &rayon::ThreadPool) -> Result<Vec<(u32, EstimateRecord)>> {
    ns.iter()
        .map(|&n| {
            let g = lineperc_core::observe::Geometry { n, ..spec.geometry };
            Ok((n, run_experiment(&spec.with_geometry(g), pool)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lineperc_core::observe::Geometry;

    #[test]
    fn thread_count_does_not_change_records() {
        let spec = ExperimentSpec::new(
            vec![0.8; 3],
            Observable::Connection,
            Geometry { n: 4, ..Geometry::default() },
            200,
            17,
        );
        let one = run_experiment(&spec, &thread_pool(Some(1)).unwrap()).unwrap();
        let four = run_experiment(&spec, &thread_pool(Some(4)).unwrap()).unwrap();
        assert_eq!(one, four);
        let a = run_range(&spec, (0, 77), &thread_pool(Some(2)).unwrap()).unwrap();
        let b = run_range(&spec, (77, 200), &thread_pool(Some(3)).unwrap()).unwrap();
        assert_eq!(b.merge(&a).unwrap(), one);
    }

    #[test]
    fn trivial_estimates() {
        let pool = thread_pool(Some(2)).unwrap();
        let g = Geometry { n: 5, ..Geometry::default() };
        let ones = ExperimentSpec::new(vec![1.0; 3], Observable::Connection, g, 10, 1);
        let r = run_experiment(&ones, &pool).unwrap();
        assert_eq!((r.estimate, r.stderr), (1.0, 0.0));
        let r = run_experiment(&ones.with_params(vec![0.0, 0.5, 0.5]), &pool).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn degenerate_bisection_range() {
        let pool = thread_pool(Some(2)).unwrap();
        let spec = ExperimentSpec::new(vec![0.5; 3], Observable::Crossing, Geometry { l: 6, ..Geometry::default() }, 20, 3);
        let out = bisect_critical(&spec, (0.99, 1.0), 0.5, 0.005, &pool).unwrap();
        assert!(out.lo >= 0.99);
        assert_eq!(out.bracket, lineperc_core::stats::Bracket::AtOrBelowLow);
        assert!(estimate_two_directed_pc(8, (0.5, 1.0), 0.01, 10, 1, &pool).is_err());
    }
}

//! Binomial estimate records, merging, decay fits and monotone bisection.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Outcome of a batch of independent Bernoulli replicas.
///
/// `replicas` lists the half-open replica index ranges that contributed,
/// sorted and coalesced. Equality ignores `wall_time_secs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub spec_hash: String,
    pub master_seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: Vec<(u64, u64)>,
    pub wall_time_secs: f64,
}

impl PartialEq for EstimateRecord {
    fn eq(&self, o: &Self) -> bool {
        self.spec_hash == o.spec_hash
            && self.master_seed == o.master_seed
            && self.trials == o.trials
            && self.successes == o.successes
            && self.estimate.to_bits() == o.estimate.to_bits()
            && self.stderr.to_bits() == o.stderr.to_bits()
            && self.replicas == o.replicas
    }
}

fn point(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / trials as f64;
    (p, libm::sqrt(p * (1.0 - p) / trials as f64))
}

impl EstimateRecord {
    pub fn empty(spec_hash: impl Into<String>, master_seed: u64) -> Self {
        EstimateRecord {
            spec_hash: spec_hash.into(),
            master_seed,
            trials: 0,
            successes: 0,
            estimate: 0.0,
            stderr: 0.0,
            replicas: Vec::new(),
            wall_time_secs: 0.0,
        }
    }

    /// Record for replicas `range.0..range.1`, `successes` of which succeeded.
    pub fn from_counts(
        spec_hash: impl Into<String>,
        master_seed: u64,
        range: (u64, u64),
        successes: u64,
    ) -> Result<Self> {
        if range.1 < range.0 {
            return Err(Error::Merge(format!("reversed replica range {range:?}")));
        }
        let trials = range.1 - range.0;
        if successes > trials {
            return Err(Error::Merge(format!("{successes} successes in {trials} trials")));
        }
        let (estimate, stderr) = point(successes, trials);
        let replicas = if trials > 0 { alloc::vec![range] } else { Vec::new() };
        Ok(EstimateRecord {
            spec_hash: spec_hash.into(),
            master_seed,
            trials,
            successes,
            estimate,
            stderr,
            replicas,
            wall_time_secs: 0.0,
        })
    }

    /// Wilson score interval at `z` standard deviations.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        if self.trials == 0 {
            return (0.0, 1.0);
        }
        let n = self.trials as f64;
        let p = self.estimate;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }

    /// Combines records over disjoint replica ranges of the same spec.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.spec_hash != other.spec_hash || self.master_seed != other.master_seed {
            return Err(Error::Merge(format!(
                "spec mismatch: {}/{} vs {}/{}",
                self.spec_hash, self.master_seed, other.spec_hash, other.master_seed
            )));
        }
        let mut ranges: Vec<(u64, u64)> = self.replicas.iter().chain(&other.replicas).copied().collect();
        ranges.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(ranges.len());
        for r in ranges {
            match merged.last_mut() {
                Some(last) if r.0 < last.1 => {
                    return Err(Error::Merge(format!("overlapping replica ranges {last:?} and {r:?}")));
                }
                Some(last) if r.0 == last.1 => last.1 = r.1,
                _ => merged.push(r),
            }
        }
        let trials = self.trials + other.trials;
        let successes = self.successes + other.successes;
        let (estimate, stderr) = point(successes, trials);
        Ok(EstimateRecord {
            spec_hash: self.spec_hash.clone(),
            master_seed: self.master_seed,
            trials,
            successes,
            estimate,
            stderr,
            replicas: merged,
            wall_time_secs: self.wall_time_secs + other.wall_time_secs,
        })
    }
}

pub fn merge_all<'a>(records: impl IntoIterator<Item = &'a EstimateRecord>) -> Result<Option<EstimateRecord>> {
    let mut acc: Option<EstimateRecord> = None;
    for r in records {
        acc = Some(match acc {
            None => r.clone(),
            Some(a) => a.merge(r)?,
        });
    }
    Ok(acc)
}

/// Standard error of a difference of two independent estimates.
pub fn combined_stderr(a: f64, b: f64) -> f64 {
    libm::sqrt(a * a + b * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    /// `P(n) ≈ A e^{-rate n}`
    Exponential,
    /// `P(n) ≈ A n^{-rate}`
    Power,
}

/// Least-squares line `y = intercept - rate * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub rate: f64,
    pub intercept: f64,
    pub rss: f64,
    pub r_squared: f64,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept - self.rate * x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fit of `ln P` against `n`.
    pub exponential: LineFit,
    /// Fit of `ln P` against `ln n`.
    pub power: LineFit,
    pub preferred: DecayModel,
    /// Residual sum of squares of the other model minus that of the
    /// preferred one.
    pub margin: f64,
}

impl DecayFit {
    pub fn fit(&self, model: DecayModel) -> &LineFit {
        match model {
            DecayModel::Exponential => &self.exponential,
            DecayModel::Power => &self.power,
        }
    }

    /// Predicted probability at `n` under `model`.
    pub fn predict(&self, model: DecayModel, n: f64) -> f64 {
        match model {
            DecayModel::Exponential => libm::exp(self.exponential.predict(n)),
            DecayModel::Power => libm::exp(self.power.predict(libm::log(n))),
        }
    }
}

pub fn line_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| {
        let r = y - (intercept + slope * x);
        r * r
    }).sum();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    LineFit { rate: -slope, intercept, rss, r_squared }
}

/// Fits both decay families to `(n, P(n))` points.
pub fn fit_decay(curve: &[(f64, f64)]) -> Result<DecayFit> {
    if curve.len() < 4 {
        return Err(Error::Domain(format!("decay fit needs at least 4 points, got {}", curve.len())));
    }
    if let Some(&(n, p)) = curve.iter().find(|&&(n, p)| !(p > 0.0) || !(n > 0.0)) {
        return Err(Error::Domain(format!("non-positive point ({n}, {p}); raise the replica count")));
    }
    let mut ns: Vec<f64> = curve.iter().map(|c| c.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::Domain("decay fit needs at least two distinct n".into()));
    }
    let ys: Vec<f64> = curve.iter().map(|c| libm::log(c.1)).collect();
    let xe: Vec<f64> = curve.iter().map(|c| c.0).collect();
    let xp: Vec<f64> = curve.iter().map(|c| libm::log(c.0)).collect();
    let exponential = line_fit(&xe, &ys);
    let power = line_fit(&xp, &ys);
    let (preferred, margin) = if exponential.rss <= power.rss {
        (DecayModel::Exponential, power.rss - exponential.rss)
    } else {
        (DecayModel::Power, exponential.rss - power.rss)
    };
    Ok(DecayFit { exponential, power, preferred, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bracket {
    /// The target level is crossed inside the range.
    Inside,
    /// The estimate already meets the target at the low end.
    AtOrBelowLow,
    /// The estimate stays below the target at the high end.
    AboveHigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectOutcome {
    pub lo: f64,
    pub hi: f64,
    pub bracket: Bracket,
    /// Every evaluated `(parameter, record)` in evaluation order.
    pub evaluations: Vec<(f64, EstimateRecord)>,
}

impl BisectOutcome {
    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisects on an increasing observable until the bracket is at most `tol`
/// wide. When the range does not bracket `target` the search stops and the
/// outcome says on which side the crossing lies.
pub fn bisect_increasing(
    range: (f64, f64),
    target: f64,
    tol: f64,
    mut estimate: impl FnMut(f64) -> Result<EstimateRecord>,
) -> Result<BisectOutcome> {
    let (mut lo, mut hi) = range;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Domain(format!("bad bisection range {range:?} or tolerance {tol}")));
    }
    let mut evaluations = Vec::new();
    let at_lo = estimate(lo)?;
    let below = at_lo.estimate >= target;
    evaluations.push((lo, at_lo));
    if below {
        return Ok(BisectOutcome { lo, hi: lo, bracket: Bracket::AtOrBelowLow, evaluations });
    }
    let at_hi = estimate(hi)?;
    let above = at_hi.estimate < target;
    evaluations.push((hi, at_hi));
    if above {
        return Ok(BisectOutcome { lo: hi, hi, bracket: Bracket::AboveHigh, evaluations });
    }
    while hi - lo > tol {
        let mid = (lo + hi) / 2.0;
        let r = estimate(mid)?;
        if r.estimate < target {
            lo = mid;
        } else {
            hi = mid;
        }
        evaluations.push((mid, r));
    }
    Ok(BisectOutcome { lo, hi, bracket: Bracket::Inside, evaluations })
}

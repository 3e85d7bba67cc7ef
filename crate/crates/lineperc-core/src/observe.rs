//! Per-replica evaluation of the experiment observables. Every outcome is a
//! pure function of the parameters, the geometry and the seed.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use hashbrown::HashSet;
use serde::{Deserialize, Serialize};

use crate::cluster::{density_vector, label_sites, spans, Classifier};
use crate::lattice::{BoxRegion, Configuration, ParamVector, SeedSpec, SiteOracle, DEFAULT_SITE_LIMIT};
use crate::planar::{open_crossing_exists, two_directed_survives, Direction, Field2D, Rect};
use crate::renorm::{good_block_crossing, RenormFields, RenormRegion};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// The origin reaches the boundary of `B(n)`.
    Connection,
    /// The origin reaches the boundary of `B(n)` but not that of `B(N)`.
    Truncated,
    /// An open path joins the two faces of `B(L)` orthogonal to the
    /// crossing axis.
    Crossing,
    /// A bottom-to-top crossing of good blocks in the staircase region.
    GoodBlockCrossing,
    /// An open 2-directed path of `depth` steps from the origin in the
    /// plane field of axis 0.
    TwoDirected,
    /// Some component of `B(L)` spans the box; the value is the largest
    /// such density.
    Density,
    /// Every site of `B(n)` is open.
    AllVacant,
    /// Reference mode: bottom-top open crossing of `[-L, L]²` in the plane
    /// field of axis 0, which is Bernoulli site percolation on ℤ².
    PlanarCrossing,
}

impl Observable {
    pub const ALL: [Observable; 8] = [
        Observable::Connection,
        Observable::Truncated,
        Observable::Crossing,
        Observable::GoodBlockCrossing,
        Observable::TwoDirected,
        Observable::Density,
        Observable::AllVacant,
        Observable::PlanarCrossing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Connection => "connection",
            Observable::Truncated => "truncated",
            Observable::Crossing => "crossing",
            Observable::GoodBlockCrossing => "good-block-crossing",
            Observable::TwoDirected => "two-directed",
            Observable::Density => "density",
            Observable::AllVacant => "all-vacant",
            Observable::PlanarCrossing => "planar-crossing",
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Params(format!("unknown observable {s:?}")))
    }
}

impl core::fmt::Display for Observable {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sizes used by the observables. Fields an observable does not read are
/// ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Inner radius for connection, truncated and all-vacant.
    pub n: u32,
    /// Outer radius of the truncated event; `kappa * n` when absent.
    pub big_n: Option<u32>,
    pub kappa: u32,
    /// Box radius for crossing and density.
    pub l: u32,
    pub axis: usize,
    pub block_n: usize,
    pub c: f64,
    pub k: usize,
    pub depth: usize,
    pub classifier: Classifier,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            n: 8,
            big_n: None,
            kappa: 4,
            l: 16,
            axis: 2,
            block_n: 8,
            c: 2.0,
            k: 16,
            depth: 32,
            classifier: Classifier::Spanning,
        }
    }
}

impl Geometry {
    pub fn outer(&self) -> u32 {
        self.big_n.unwrap_or(self.kappa.saturating_mul(self.n))
    }

    pub fn validate(&self, obs: Observable, d: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::Geometry(format!("{}: {m}", obs.name())));
        match obs {
            Observable::Connection | Observable::AllVacant if self.n == 0 => bad("n must be positive"),
            Observable::Truncated if self.n == 0 || self.outer() <= self.n => bad("need 0 < n < N"),
            Observable::Crossing if self.axis >= d => bad("crossing axis out of range"),
            Observable::Crossing | Observable::Density | Observable::PlanarCrossing if self.l == 0 => bad("L must be positive"),
            Observable::GoodBlockCrossing if self.block_n == 0 || self.k == 0 || !(self.c > 0.0) => {
                bad("need block n ≥ 1, k ≥ 1, c > 0")
            }
            Observable::TwoDirected if self.depth == 0 => bad("depth must be positive"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaOutcome {
    pub success: bool,
    /// Observable-specific number: largest spanning density for density,
    /// the indicator otherwise.
    pub value: f64,
    /// Number of spanning components for density, 0 otherwise.
    pub count: u64,
}

impl ReplicaOutcome {
    fn flag(success: bool) -> Self {
        ReplicaOutcome { success, value: success as u8 as f64, count: 0 }
    }
}

/// Largest l∞ norm reached by the open cluster of the origin inside
/// `B(limit)`, evaluating sites on demand. `None` when the origin is closed.
/// Exploration goes outward first, so clusters that reach the boundary are
/// usually detected after visiting few sites.
pub fn origin_reach(oracle: &SiteOracle, limit: u32) -> Option<u32> {
    let d = oracle.d();
    let origin = vec![0i64; d];
    if !oracle.is_open(&origin) {
        return None;
    }
    if limit == 0 {
        return Some(0);
    }
    let lim = limit as i64;
    let norm = |v: &[i64]| v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as u32;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut heap: BinaryHeap<(u32, Vec<i64>)> = BinaryHeap::new();
    seen.insert(origin.clone());
    heap.push((0, origin));
    let mut best = 0;
    while let Some((r, v)) = heap.pop() {
        best = best.max(r);
        if best == limit {
            break;
        }
        for k in 0..d {
            for s in [-1, 1] {
                let mut w = v.clone();
                w[k] += s;
                if w[k].abs() > lim || seen.contains(&w) {
                    continue;
                }
                if oracle.is_open(&w) {
                    seen.insert(w.clone());
                    heap.push((norm(&w), w));
                } else {
                    seen.insert(w);
                }
            }
        }
    }
    Some(best)
}

/// Evaluates one replica.
pub fn evaluate(obs: Observable, params: &ParamVector, geom: &Geometry, seed: SeedSpec) -> Result<ReplicaOutcome> {
    geom.validate(obs, params.d())?;
    let d = params.d();
    Ok(match obs {
        Observable::Connection => {
            let o = SiteOracle::new(params, seed);
            ReplicaOutcome::flag(origin_reach(&o, geom.n).is_some_and(|r| r >= geom.n))
        }
        Observable::Truncated => {
            let o = SiteOracle::new(params, seed);
            let big = geom.outer();
            ReplicaOutcome::flag(origin_reach(&o, big).is_some_and(|r| r >= geom.n && r < big))
        }
        Observable::AllVacant => {
            let o = SiteOracle::new(params, seed);
            let mut all = true;
            BoxRegion::centered(d, geom.n).window().for_each(|v| all = all && o.is_open(v));
            ReplicaOutcome::flag(all)
        }
        Observable::Crossing => {
            let mut cfg = Configuration::sample(params, BoxRegion::centered(d, geom.l), seed)?;
            let bits = cfg.materialize_with_limit(DEFAULT_SITE_LIMIT)?;
            ReplicaOutcome::flag(spans(bits, geom.axis))
        }
        Observable::Density => {
            let mut cfg = Configuration::sample(params, BoxRegion::centered(d, geom.l), seed)?;
            let lab = label_sites(cfg.materialize_with_limit(DEFAULT_SITE_LIMIT)?);
            let dv = density_vector(&lab, geom.classifier, usize::MAX);
            let rho = dv.densities.first().copied().unwrap_or(0.0);
            ReplicaOutcome { success: rho > 0.0, value: rho, count: dv.densities.len() as u64 }
        }
        Observable::GoodBlockCrossing => {
            let region = RenormRegion::new(geom.c, geom.k, geom.block_n)?;
            let fields = RenormFields::sample_for(params, seed, &region);
            ReplicaOutcome::flag(good_block_crossing(&fields, &region)?.is_some())
        }
        Observable::TwoDirected => {
            let o = SiteOracle::new(params, seed);
            let t = geom.depth as i64;
            let mut buf = vec![0i64; d - 1];
            let field = Field2D::from_fn([0, 0], [t, t], |p| {
                buf[0] = p[0];
                buf[1] = p[1];
                o.plane_open(0, &buf)
            });
            ReplicaOutcome::flag(two_directed_survives(&field, [0, 0], geom.depth)?)
        }
        Observable::PlanarCrossing => {
            let o = SiteOracle::new(params, seed);
            let l = geom.l as i64;
            let mut buf = vec![0i64; d - 1];
            let field = Field2D::from_fn([-l, -l], [l, l], |p| {
                buf[0] = p[0];
                buf[1] = p[1];
                o.plane_open(0, &buf)
            });
            let side = 2 * geom.l as usize + 1;
            let rect = Rect::new(side, side, -l, -l)?;
            ReplicaOutcome::flag(open_crossing_exists(&field, &rect, Direction::BottomTop)?)
        }
    })
}

//! Randomised property suites behind `verify-lemma`. Each suite returns a
//! report with instance and violation counts and the first counterexample.

use std::collections::BTreeMap;
use std::str::FromStr;

use anyhow::{bail, Result};
use lineperc_core::path::{check_product, path_product, random_compatible_pair, LatticePath};
use lineperc_core::planar::{duality_holds, Field2D, Rect};
use lineperc_core::renorm::{bridge_blocks, check_bridge, is_good_block, BlockCoord, RenormFields};
use lineperc_core::rng::{CounterRng, StreamKey, AUX_STREAM_BASE};
use lineperc_core::{ParamVector, SeedSpec};
use serde::Serialize;
use serde_json::{json, Value};

use crate::snapshot::write_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    PathProduct,
    Bridge,
    Duality,
}

impl FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "path-product" => Suite::PathProduct,
            "bridge" => Suite::Bridge,
            "duality" => Suite::Duality,
            _ => bail!("unknown suite {s:?} (path-product | bridge | duality)"),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub instances: u64,
    pub violations: u64,
    /// Instances drawn but not checkable, such as a bridge whose neighbour
    /// block is not good.
    pub skipped: u64,
    /// Path products whose projections equal the inputs exactly.
    pub equality_rate: Option<f64>,
    /// Checked instances per case, for suites with distinct cases.
    pub cases: BTreeMap<String, u64>,
    pub first_counterexample: Option<Value>,
}

impl VerifyReport {
    fn new(suite: &str, seed: u64) -> Self {
        VerifyReport {
            suite: suite.into(),
            seed,
            instances: 0,
            violations: 0,
            skipped: 0,
            equality_rate: None,
            cases: BTreeMap::new(),
            first_counterexample: None,
        }
    }

    fn violation(&mut self, fixture: impl FnOnce() -> Value) {
        self.violations += 1;
        if self.first_counterexample.is_none() {
            self.first_counterexample = Some(fixture());
        }
    }
}

fn rng(seed: u64, instance: u64, tag: u64) -> CounterRng {
    CounterRng::new(StreamKey::new(seed, instance, AUX_STREAM_BASE + tag), 0)
}

fn dump(p: &LatticePath) -> String {
    let mut buf = Vec::new();
    write_path(&mut buf, p.sites()).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// Rows of `#` (open) and `.` (closed), top row first.
fn picture(f: &Field2D) -> Vec<String> {
    let (lo, hi) = (f.lo(), f.hi());
    (lo[1]..=hi[1]).rev().map(|y| (lo[0]..=hi[0]).map(|x| if f.is_open([x, y]) { '#' } else { '.' }).collect()).collect()
}

/// Random fields on random rectangles up to `max_side` square.
pub fn verify_duality(instances: u64, seed: u64, max_side: usize) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new("duality", seed);
    for i in 0..instances {
        let mut g = rng(seed, i, 0);
        let p = g.uniform();
        let n = g.range(1, max_side as i64) as usize;
        let m = g.range(1, max_side as i64) as usize;
        let (k, l) = (g.range(-5, 5), g.range(-5, 5));
        let r = Rect::new(n, m, k, l)?;
        let f = Field2D::from_fn([k, l], [r.x_max(), r.y_max()], |_| g.uniform() < p);
        rep.instances += 1;
        if !duality_holds(&f, &r)? {
            rep.violation(|| json!({ "instance": i, "rect": r, "p": p, "field": picture(&f) }));
        }
    }
    Ok(rep)
}

/// Product check of one pair; on success, whether both projections are exact.
fn check_pair(a: &LatticePath, b: &LatticePath) -> std::result::Result<bool, Value> {
    match path_product(a, b) {
        Ok(out) => {
            let c = check_product(a, b, &out);
            if c.passed() {
                Ok(c.xz_equal && c.yz_equal)
            } else {
                Err(json!({ "check": c, "product": dump(&out) }))
            }
        }
        Err(e) => Err(json!({ "error": e.to_string() })),
    }
}

/// Random compatible pairs with heights in `0..=max_h`.
pub fn verify_path_product(instances: u64, seed: u64, max_h: i64, max_len: usize) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new("path-product", seed);
    let mut exact = 0u64;
    for i in 0..instances {
        let (a, b) = random_compatible_pair(&mut rng(seed, i, 1), max_h, max_len);
        rep.instances += 1;
        match check_pair(&a, &b) {
            Ok(eq) => exact += eq as u64,
            Err(mut v) => rep.violation(|| {
                v["instance"] = json!(i);
                v["xz_path"] = json!(dump(&a));
                v["yz_path"] = json!(dump(&b));
                v
            }),
        }
    }
    if rep.instances > 0 {
        rep.equality_rate = Some(exact as f64 / rep.instances as f64);
    }
    Ok(rep)
}

/// The product check on a single pair read from path dumps.
pub fn verify_path_pair(a: &LatticePath, b: &LatticePath) -> VerifyReport {
    let mut rep = VerifyReport::new("path-product", 0);
    rep.instances = 1;
    match check_pair(a, b) {
        Ok(eq) => rep.equality_rate = Some(eq as u8 as f64),
        Err(v) => rep.violation(|| v),
    }
    rep
}

const NEIGHBOURS: [(&str, i64, i64, i64); 6] =
    [("+x", 1, 0, 0), ("-x", -1, 0, 0), ("+y", 0, 1, 0), ("-y", 0, -1, 0), ("+z", 0, 0, 1), ("-z", 0, 0, -1)];

/// Bridges from block `(1, 1, 1)` to each of its six neighbours, on fields
/// covering `[0, 4n-1]³`. With `all_open` the fields are fully open and a
/// single instance per side length is run.
pub fn verify_bridge(ns: &[usize], instances: u64, seed: u64, params: &ParamVector, all_open: bool) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new("bridge", seed);
    for &n in ns {
        if n == 0 {
            bail!("block side must be positive");
        }
        let top = 4 * n as i64 - 1;
        let runs = if all_open { 1 } else { instances };
        for i in 0..runs {
            let fields = if all_open {
                RenormFields::all_open([0; 3], [top; 3])
            } else {
                RenormFields::sample(params, SeedSpec::new(seed, i), [0; 3], [top; 3])
            };
            let Some(a) = is_good_block(&fields, BlockCoord::new(1, 1, 1, n))? else {
                rep.skipped += NEIGHBOURS.len() as u64;
                continue;
            };
            for (case, dj, dl, dh) in NEIGHBOURS {
                let Some(b) = is_good_block(&fields, BlockCoord::new(1 + dj, 1 + dl, 1 + dh, n))? else {
                    rep.skipped += 1;
                    continue;
                };
                rep.instances += 1;
                *rep.cases.entry(format!("n={n} {case}")).or_default() += 1;
                let fixture = |detail: Value| json!({ "n": n, "replica": i, "from": a, "to": b, "detail": detail });
                match bridge_blocks(&a, &b) {
                    Ok(path) => {
                        let c = check_bridge(&a, &b, &path);
                        if !c.passed() {
                            rep.violation(|| fixture(json!({ "check": c, "path": dump(&path) })));
                        }
                    }
                    Err(e) => rep.violation(|| fixture(json!({ "error": e.to_string() }))),
                }
            }
        }
    }
    Ok(rep)
}

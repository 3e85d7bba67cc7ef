//! Block renormalization in three dimensions.
//!
//! Sites here are `(x, y, z)` with `z` the height. The three planar fields
//! are read from the lattice so that the `y = 0` plane carries the field of
//! lattice axis 1, the `x = 0` plane that of axis 2 and the `z = 0` plane
//! that of axis 0: the renormalization site `(x, y, z)` is the lattice site
//! `(z, y, x, 0, …, 0)`. Axes 3 and up contribute a site field on ℤ³.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};
use serde::{Deserialize, Serialize};

use crate::lattice::{Configuration, ParamVector, SeedSpec, SiteOracle};
use crate::path::{banded_product, concat, is_adjacent, path_product, reversal, simplify, LatticePath, Plane, Site};
use crate::planar::{
    is_open_crossing, leftmost_bottom_top_crossing, lowest_left_right_crossing, Direction, Field2D, Point, Rect,
};
use crate::{Error, Result};

/// Parameters of the three planar fields and of the product field of the
/// remaining axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    /// Lattice axes 0, 1, 2.
    pub planar: [f64; 3],
    /// Product of the parameters of axes 3 and up; 1 when `d = 3`.
    pub extra: f64,
}

pub fn split_fields(params: &ParamVector) -> SplitParams {
    let p = params.p();
    SplitParams { planar: [p[0], p[1], p[2]], extra: p[3..].iter().product() }
}

/// The lattice site of dimension `d` behind a renormalization site.
pub fn lattice_site(v: Site, d: usize) -> Vec<i64> {
    let mut out = vec![0; d];
    out[..3].copy_from_slice(&[v[2], v[1], v[0]]);
    out
}

/// Site field of the axes beyond the third.
#[derive(Debug, Clone)]
pub enum ExtraField {
    AllOpen,
    /// Read from the lattice fields of axes `3..d`.
    Lattice(SiteOracle),
    /// Everything open except the listed sites.
    ClosedSites(HashSet<Site>),
}

impl ExtraField {
    pub fn is_open(&self, v: Site) -> bool {
        match self {
            ExtraField::AllOpen => true,
            ExtraField::ClosedSites(c) => !c.contains(&v),
            ExtraField::Lattice(o) => {
                let site = lattice_site(v, o.d());
                let mut buf = [0i64; crate::lattice::MAX_D];
                (3..o.d()).all(|i| o.plane_open(i, crate::lattice::project_into(&site, i, &mut buf)))
            }
        }
    }
}

/// Planar fields `y = 0` (points `[x, z]`), `x = 0` (points `[y, z]`),
/// `z = 0` (points `[x, y]`) and the extra site field.
#[derive(Debug, Clone)]
pub struct RenormFields {
    pub xz: Field2D,
    pub yz: Field2D,
    pub xy: Field2D,
    pub extra: ExtraField,
}

impl RenormFields {
    /// Samples the fields on the box `lo..=hi` from the lattice model.
    pub fn sample(params: &ParamVector, seed: SeedSpec, lo: Site, hi: Site) -> Self {
        let o = SiteOracle::new(params, seed);
        let d = params.d();
        let at = |a: i64, b: i64| {
            let mut v = vec![0i64; d - 1];
            v[0] = a;
            v[1] = b;
            v
        };
        let xz = Field2D::from_fn([lo[0], lo[2]], [hi[0], hi[2]], |p| o.plane_open(1, &at(p[1], p[0])));
        let yz = Field2D::from_fn([lo[1], lo[2]], [hi[1], hi[2]], |p| o.plane_open(2, &at(p[1], p[0])));
        let xy = Field2D::from_fn([lo[0], lo[1]], [hi[0], hi[1]], |p| o.plane_open(0, &at(p[1], p[0])));
        let extra = if d == 3 { ExtraField::AllOpen } else { ExtraField::Lattice(o) };
        RenormFields { xz, yz, xy, extra }
    }

    pub fn sample_for(params: &ParamVector, seed: SeedSpec, region: &RenormRegion) -> Self {
        let (lo, hi) = region.field_box();
        Self::sample(params, seed, lo, hi)
    }

    pub fn all_open(lo: Site, hi: Site) -> Self {
        RenormFields {
            xz: Field2D::filled([lo[0], lo[2]], [hi[0], hi[2]], true),
            yz: Field2D::filled([lo[1], lo[2]], [hi[1], hi[2]], true),
            xy: Field2D::filled([lo[0], lo[1]], [hi[0], hi[1]], true),
            extra: ExtraField::AllOpen,
        }
    }

    /// Full vacancy of a site.
    pub fn is_open(&self, v: Site) -> bool {
        self.xz.is_open([v[0], v[2]])
            && self.yz.is_open([v[1], v[2]])
            && self.xy.is_open([v[0], v[1]])
            && self.extra.is_open(v)
    }

    /// Open in every field except the `z = 0` one.
    pub fn is_open_but_xy(&self, v: Site) -> bool {
        self.xz.is_open([v[0], v[2]]) && self.yz.is_open([v[1], v[2]]) && self.extra.is_open(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockCoord {
    pub j: i64,
    pub l: i64,
    pub h: i64,
    pub n: usize,
}

impl BlockCoord {
    pub fn new(j: i64, l: i64, h: i64, n: usize) -> Self {
        BlockCoord { j, l, h, n }
    }

    pub fn lo(&self) -> Site {
        let n = self.n as i64;
        [self.j * n, self.l * n, self.h * n]
    }

    pub fn contains(&self, v: &Site) -> bool {
        let lo = self.lo();
        (0..3).all(|k| lo[k] <= v[k] && v[k] < lo[k] + self.n as i64)
    }

    pub fn is_adjacent(&self, o: &BlockCoord) -> bool {
        self.n == o.n && (self.j - o.j).abs() + (self.l - o.l).abs() + (self.h - o.h).abs() == 1
    }

    /// Narrow rectangle `n × 2n` in the plane with horizontal block index `t`.
    fn tall(&self, t: i64) -> Rect {
        let n = self.n as i64;
        Rect { n: self.n, m: 2 * self.n, k: t * n, l: self.h * n }
    }

    fn wide(&self, t: i64) -> Rect {
        let n = self.n as i64;
        Rect { n: 2 * self.n, m: self.n, k: t * n, l: self.h * n }
    }
}

/// Crossings certifying that a block is good. Index 0 is the `y = 0`
/// plane (points `[x, z]`), index 1 the `x = 0` plane (points `[y, z]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodBlockWitness {
    pub coord: BlockCoord,
    /// Leftmost bottom-top crossings of the `n × 2n` rectangles.
    pub xi: [Vec<Point>; 2],
    /// Lowest left-right crossings of the `2n × n` rectangles.
    pub zeta: [Vec<Point>; 2],
    pub extra_open: bool,
}

impl GoodBlockWitness {
    /// Start site of the bridges: the product of the two bottom-top
    /// crossing starts.
    pub fn start(&self) -> Site {
        [self.xi[0][0][0], self.xi[1][0][0], self.xi[0][0][1]]
    }

    fn swapped(&self) -> Self {
        let c = self.coord;
        GoodBlockWitness {
            coord: BlockCoord { j: c.l, l: c.j, ..c },
            xi: [self.xi[1].clone(), self.xi[0].clone()],
            zeta: [self.zeta[1].clone(), self.zeta[0].clone()],
            extra_open: self.extra_open,
        }
    }
}

fn crossing_or_none(r: Result<Vec<Point>>) -> Result<Option<Vec<Point>>> {
    match r {
        Ok(p) => Ok(Some(p)),
        Err(Error::NoCrossing) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Witness of goodness, or `None` when one of the five defining events fails.
pub fn is_good_block(fields: &RenormFields, coord: BlockCoord) -> Result<Option<GoodBlockWitness>> {
    if coord.n == 0 {
        return Err(Error::Geometry("block side must be positive".into()));
    }
    let planes = [(&fields.xz, coord.j), (&fields.yz, coord.l)];
    for (f, t) in planes {
        for r in [coord.tall(t), coord.wide(t)] {
            if !f.covers(&r) {
                return Err(Error::Range(format!("{r:?} is not covered by the field window")));
            }
        }
    }
    let mut xi: [Vec<Point>; 2] = Default::default();
    let mut zeta: [Vec<Point>; 2] = Default::default();
    for (i, (f, t)) in planes.into_iter().enumerate() {
        match crossing_or_none(leftmost_bottom_top_crossing(f, &coord.tall(t)))? {
            Some(p) => xi[i] = p,
            None => return Ok(None),
        }
        match crossing_or_none(lowest_left_right_crossing(f, &coord.wide(t)))? {
            Some(p) => zeta[i] = p,
            None => return Ok(None),
        }
    }
    let lo = coord.lo();
    let n = coord.n as i64;
    for x in lo[0]..lo[0] + n {
        for y in lo[1]..lo[1] + n {
            for z in lo[2]..lo[2] + n {
                if !fields.extra.is_open([x, y, z]) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(GoodBlockWitness { coord, xi, zeta, extra_open: true }))
}

/// Whether every crossing of `w` is an open crossing of its rectangle.
pub fn witness_is_valid(fields: &RenormFields, w: &GoodBlockWitness) -> bool {
    let c = w.coord;
    [(&fields.xz, c.j, 0), (&fields.yz, c.l, 1)].into_iter().all(|(f, t, i)| {
        is_open_crossing(f, &c.tall(t), Direction::BottomTop, &w.xi[i])
            && is_open_crossing(f, &c.wide(t), Direction::LeftRight, &w.zeta[i])
    })
}

/// Prefix up to the first point at height `top`.
fn stop_at(p: &[Point], top: i64) -> Vec<Point> {
    match p.iter().position(|q| q[1] == top) {
        Some(i) => p[..=i].to_vec(),
        None => p.to_vec(),
    }
}

fn reversed(p: &[Point]) -> Vec<Point> {
    p.iter().rev().copied().collect()
}

/// Follows `start` to its first point on `guide`, moves along `guide` in
/// whichever direction meets `target` sooner, then follows `target` from
/// the first position of the meeting point to its end.
fn route(start: &[Point], guide: &[Point], target: &[Point]) -> Result<Vec<Point>> {
    let gpos: HashMap<Point, usize> = guide.iter().enumerate().rev().map(|(i, &p)| (p, i)).collect();
    let tpos: HashMap<Point, usize> = target.iter().enumerate().rev().map(|(i, &p)| (p, i)).collect();
    let (i, g) = start
        .iter()
        .enumerate()
        .find_map(|(i, p)| gpos.get(p).map(|&g| (i, g)))
        .ok_or_else(|| Error::Path("bridge pieces do not meet".into()))?;
    let fwd = (g..guide.len()).find(|&k| tpos.contains_key(&guide[k]));
    let back = (0..=g).rev().find(|&k| tpos.contains_key(&guide[k]));
    let e = match (fwd, back) {
        (Some(f), Some(b)) => {
            if f - g <= g - b {
                f
            } else {
                b
            }
        }
        (Some(f), None) => f,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::Path("guide never meets the target".into())),
    };
    let mut out = start[..i].to_vec();
    if e >= g {
        out.extend_from_slice(&guide[g..=e]);
    } else {
        out.extend(guide[e..=g].iter().rev());
    }
    out.extend_from_slice(&target[tpos[&guide[e]] + 1..]);
    Ok(out)
}

fn embed(plane: Plane, p: &[Point]) -> Result<LatticePath> {
    LatticePath::new(p.iter().map(|&q| plane.embed(q)).collect())
}

fn product(a: &[Point], b: &[Point], banded: bool) -> Result<LatticePath> {
    let (ga, gb) = (embed(Plane::XZ, a)?, embed(Plane::YZ, b)?);
    if banded {
        banded_product(&ga, &gb)
    } else {
        path_product(&ga, &gb)
    }
}

/// `b` sits directly above `a`.
fn bridge_up(a: &GoodBlockWitness, b: &GoodBlockWitness) -> Result<LatticePath> {
    let n = a.coord.n as i64;
    let top_b = b.coord.h * n + n - 1;
    let lower = product(&a.xi[0], &a.xi[1], false)?;
    let mut beta: [Vec<Point>; 2] = Default::default();
    for (i, t) in [a.coord.j, a.coord.l].into_iter().enumerate() {
        let right = t * n + n - 1;
        let zeta_s = match b.zeta[i].iter().position(|q| q[0] == right) {
            Some(k) => &b.zeta[i][..=k],
            None => &b.zeta[i][..],
        };
        beta[i] = route(&reversed(&a.xi[i]), zeta_s, &reversed(&stop_at(&b.xi[i], top_b)))?;
    }
    concat(&lower, &product(&beta[0], &beta[1], true)?)
}

/// `b` is the next block along `x`.
fn bridge_right(a: &GoodBlockWitness, b: &GoodBlockWitness) -> Result<LatticePath> {
    let n = a.coord.n as i64;
    let top = a.coord.h * n + n - 1;
    let xi_b = stop_at(&b.xi[0], top);
    let alpha_xz = route(&stop_at(&a.xi[0], top), &a.zeta[0], &xi_b)?;
    let alpha_yz = stop_at(&a.xi[1], top);
    let alpha = product(&alpha_xz, &alpha_yz, true)?;
    let beta = product(&reversed(&xi_b), &reversed(&stop_at(&b.xi[1], top)), false)?;
    concat(&alpha, &beta)
}

fn swap_xy(p: &LatticePath) -> LatticePath {
    LatticePath::new(p.sites().iter().map(|v| [v[1], v[0], v[2]]).collect()).expect("swap keeps adjacency")
}

/// Path between the bridge starts of two adjacent good blocks whose
/// projections stay inside the crossings of the two witnesses.
pub fn bridge_blocks(a: &GoodBlockWitness, b: &GoodBlockWitness) -> Result<LatticePath> {
    let (ca, cb) = (a.coord, b.coord);
    if !ca.is_adjacent(&cb) {
        return Err(Error::Geometry(format!("blocks {ca:?} and {cb:?} are not adjacent")));
    }
    if !a.extra_open || !b.extra_open {
        return Err(Error::Geometry("witness of a block that is not good".into()));
    }
    let d = (cb.j - ca.j, cb.l - ca.l, cb.h - ca.h);
    match d {
        (0, 0, 1) => bridge_up(a, b),
        (1, 0, 0) => bridge_right(a, b),
        (0, 0, -1) | (-1, 0, 0) | (0, -1, 0) => Ok(reversal(&bridge_blocks(b, a)?)),
        (0, 1, 0) => Ok(swap_xy(&bridge_right(&a.swapped(), &b.swapped())?)),
        _ => unreachable!(),
    }
}

/// Per-instance verdicts of [`check_bridge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeCheck {
    pub endpoints: bool,
    pub nearest_neighbour: bool,
    pub inside_blocks: bool,
    pub xz_inside: bool,
    pub yz_inside: bool,
}

impl BridgeCheck {
    pub fn passed(&self) -> bool {
        self.endpoints && self.nearest_neighbour && self.inside_blocks && self.xz_inside && self.yz_inside
    }
}

pub fn check_bridge(a: &GoodBlockWitness, b: &GoodBlockWitness, path: &LatticePath) -> BridgeCheck {
    let s = path.sites();
    let allowed = |i: usize| -> HashSet<Point> {
        a.xi[i].iter().chain(&a.zeta[i]).chain(&b.xi[i]).chain(&b.zeta[i]).copied().collect()
    };
    let (pxz, pyz) = (allowed(0), allowed(1));
    BridgeCheck {
        endpoints: s.first() == Some(&a.start()) && s.last() == Some(&b.start()),
        nearest_neighbour: s.windows(2).all(|w| is_adjacent(&w[0], &w[1])),
        inside_blocks: s.iter().all(|v| a.coord.contains(v) || b.coord.contains(v)),
        xz_inside: s.iter().all(|v| pxz.contains(&[v[0], v[2]])),
        yz_inside: s.iter().all(|v| pyz.contains(&[v[1], v[2]])),
    }
}

/// Staircase of block columns `(⌊c/2⌋, ⌈c/2⌉)` for `c` in `0..width`,
/// stacked `k` high, with `width = max(1, ⌈c ln k⌉)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormRegion {
    pub c: f64,
    pub k: usize,
    pub n: usize,
    pub width: usize,
}

impl RenormRegion {
    pub fn new(c: f64, k: usize, n: usize) -> Result<Self> {
        if !(c > 0.0) || k == 0 || n == 0 {
            return Err(Error::Geometry(format!("region needs c > 0, k ≥ 1, n ≥ 1 (got {c}, {k}, {n})")));
        }
        let width = (libm::ceil(c * libm::log(k as f64)) as usize).max(1);
        Ok(RenormRegion { c, k, n, width })
    }

    pub fn block(&self, column: usize, h: usize) -> BlockCoord {
        BlockCoord::new((column / 2) as i64, column.div_ceil(2) as i64, h as i64, self.n)
    }

    pub fn blocks(&self) -> Vec<BlockCoord> {
        (0..self.width).flat_map(|c| (0..self.k).map(move |h| self.block(c, h))).collect()
    }

    pub fn contains_block(&self, b: &BlockCoord) -> bool {
        b.n == self.n && self.blocks().contains(b)
    }

    pub fn contains(&self, v: &Site) -> bool {
        self.blocks().iter().any(|b| b.contains(v))
    }

    /// Box of sites that good-block checks on this region read.
    pub fn field_box(&self) -> (Site, Site) {
        let n = self.n as i64;
        let jmax = ((self.width - 1) / 2) as i64;
        let lmax = (self.width - 1).div_ceil(2) as i64;
        ([0, 0, 0], [(jmax + 2) * n - 1, (lmax + 2) * n - 1, (self.k as i64 + 1) * n - 1])
    }
}

/// Good-block witnesses of a region, indexed `[column][h]`.
pub fn good_block_grid(fields: &RenormFields, region: &RenormRegion) -> Result<Vec<Vec<Option<GoodBlockWitness>>>> {
    (0..region.width)
        .map(|c| (0..region.k).map(|h| is_good_block(fields, region.block(c, h))).collect())
        .collect()
}

/// Shortest bottom-to-top path of good blocks in the grid.
pub fn crossing_in_grid(grid: &[Vec<Option<GoodBlockWitness>>]) -> Option<Vec<(usize, usize)>> {
    let w = grid.len();
    let k = grid.first()?.len();
    let good = |c: usize, h: usize| grid[c][h].is_some();
    let mut prev: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut queue: VecDeque<(usize, usize)> = (0..w).filter(|&c| good(c, 0)).map(|c| (c, 0)).collect();
    for &s in &queue {
        prev.insert(s, s);
    }
    while let Some((c, h)) = queue.pop_front() {
        if h + 1 == k {
            let mut path = vec![(c, h)];
            let mut cur = (c, h);
            while prev[&cur] != cur {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        let mut next = vec![(c, h + 1)];
        if h > 0 {
            next.push((c, h - 1));
        }
        if c > 0 {
            next.push((c - 1, h));
        }
        if c + 1 < w {
            next.push((c + 1, h));
        }
        for q in next {
            if good(q.0, q.1) && !prev.contains_key(&q) {
                prev.insert(q, (c, h));
                queue.push_back(q);
            }
        }
    }
    None
}

/// A bottom-to-top crossing of good blocks inside the region, if any.
pub fn good_block_crossing(fields: &RenormFields, region: &RenormRegion) -> Result<Option<Vec<BlockCoord>>> {
    let grid = good_block_grid(fields, region)?;
    Ok(crossing_in_grid(&grid).map(|p| p.into_iter().map(|(c, h)| region.block(c, h)).collect()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningPath {
    pub path: LatticePath,
    /// Every site is also open in the `z = 0` field, so the path is open in
    /// the full model.
    pub fully_open: bool,
}

/// Joins the bridges along a good-block crossing into one path from height
/// 0 to height `(k - 1) n`.
pub fn extract_spanning_path(
    fields: &RenormFields,
    region: &RenormRegion,
    block_path: &[BlockCoord],
) -> Result<SpanningPath> {
    let (first, last) = match (block_path.first(), block_path.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Geometry("empty block path".into())),
    };
    if first.h != 0 || last.h != region.k as i64 - 1 {
        return Err(Error::Geometry("block path must run from layer 0 to the top layer".into()));
    }
    if let Some(b) = block_path.iter().find(|b| !region.contains_block(b)) {
        return Err(Error::Geometry(format!("block {b:?} is outside the region")));
    }
    if block_path.windows(2).any(|w| !w[0].is_adjacent(&w[1])) {
        return Err(Error::Geometry("consecutive blocks are not adjacent".into()));
    }
    let mut witnesses = Vec::with_capacity(block_path.len());
    for &b in block_path {
        witnesses.push(is_good_block(fields, b)?.ok_or_else(|| Error::Geometry(format!("block {b:?} is not good")))?);
    }
    let mut path = LatticePath::single(witnesses[0].start());
    for w in witnesses.windows(2) {
        path = concat(&path, &bridge_blocks(&w[0], &w[1])?)?;
    }
    let path = simplify(&path);
    let fully_open = path.sites().iter().all(|v| fields.xy.is_open([v[0], v[1]]));
    Ok(SpanningPath { path, fully_open })
}

/// JSON-friendly outcome of scanning one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionScan {
    pub n: usize,
    pub c: f64,
    pub k: usize,
    pub width: usize,
    /// `good[h][column]`.
    pub good: Vec<Vec<bool>>,
    pub crossing: Option<Vec<BlockCoord>>,
    pub path: Option<Vec<Site>>,
    pub fully_open: Option<bool>,
}

pub fn scan_region(fields: &RenormFields, region: &RenormRegion, with_path: bool) -> Result<RegionScan> {
    let grid = good_block_grid(fields, region)?;
    let crossing: Option<Vec<BlockCoord>> =
        crossing_in_grid(&grid).map(|p| p.into_iter().map(|(c, h)| region.block(c, h)).collect());
    let mut path = None;
    let mut fully_open = None;
    if let (true, Some(cr)) = (with_path, &crossing) {
        let sp = extract_spanning_path(fields, region, cr)?;
        fully_open = Some(sp.fully_open);
        path = Some(sp.path.into_sites());
    }
    Ok(RegionScan {
        n: region.n,
        c: region.c,
        k: region.k,
        width: region.width,
        good: (0..region.k).map(|h| (0..region.width).map(|c| grid[c][h].is_some()).collect()).collect(),
        crossing,
        path,
        fully_open,
    })
}

/// Anything that can report the vacancy of a lattice site.
pub trait Vacancy {
    fn d(&self) -> usize;
    fn open(&self, v: &[i64]) -> bool;
}

impl Vacancy for SiteOracle {
    fn d(&self) -> usize {
        SiteOracle::d(self)
    }

    fn open(&self, v: &[i64]) -> bool {
        self.is_open(v)
    }
}

impl Vacancy for Configuration {
    fn d(&self) -> usize {
        Configuration::d(self)
    }

    fn open(&self, v: &[i64]) -> bool {
        self.vacancy(v).unwrap_or(false)
    }
}

/// The slab of sites with `v_i = 0` for `i ≥ 3` and first three
/// coordinates summing to `k - 1`, `k` or `k + 1`, cut to `|v|∞ ≤ radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPatch {
    pub k: i64,
    pub radius: u32,
    pub sites: Vec<Vec<i64>>,
    pub open: Vec<bool>,
    /// Anchor `(k, 0, 0, …)`, the origin when `k = 0`.
    pub anchor: Vec<i64>,
    /// Size of the open cluster of the anchor inside the patch; 0 if closed.
    pub anchor_cluster: usize,
    pub reaches_boundary: bool,
}

pub fn diagonal_plane_patch<V: Vacancy>(source: &V, k: i64, radius: u32) -> Result<DiagonalPatch> {
    let d = source.d();
    let r = radius as i64;
    if k.abs() > r {
        return Err(Error::Range(format!("anchor level {k} lies outside radius {radius}")));
    }
    let mut sites = Vec::new();
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    for x in -r..=r {
        for y in -r..=r {
            for s in k - 1..=k + 1 {
                let z = s - x - y;
                if z.abs() <= r {
                    index.insert([x, y, z], sites.len());
                    let mut v = vec![0; d];
                    v[..3].copy_from_slice(&[x, y, z]);
                    sites.push(v);
                }
            }
        }
    }
    let open: Vec<bool> = sites.iter().map(|v| source.open(v)).collect();
    let mut anchor = vec![0; d];
    anchor[0] = k;
    let a = index[&[k, 0, 0]];
    let mut size = 0;
    let mut reaches = false;
    if open[a] {
        let mut seen = vec![false; sites.len()];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let v = [sites[i][0], sites[i][1], sites[i][2]];
            reaches |= v.iter().any(|c| c.abs() == r);
            for axis in 0..3 {
                for step in [-1, 1] {
                    let mut w = v;
                    w[axis] += step;
                    if let Some(&j) = index.get(&w) {
                        if open[j] && !seen[j] {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
    }
    Ok(DiagonalPatch { k, radius, sites, open, anchor, anchor_cluster: size, reaches_boundary: reaches })
}

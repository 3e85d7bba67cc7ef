//! Nearest-neighbour paths in ℤ³ and the product of planar paths.
//!
//! Height is the third coordinate. Paths in the plane `y = 0` and in the
//! plane `x = 0` are combined site-wise by `(x,0,z) × (0,y,z) = (x,y,z)`;
//! [`path_product`] lifts a compatible pair of planar paths to a path of ℤ³
//! whose two projections stay inside the inputs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::rng::CounterRng;
use crate::{Error, Result};

pub type Site = [i64; 3];

#[inline]
pub fn height(v: &Site) -> i64 {
    v[2]
}

#[inline]
pub fn is_adjacent(a: &Site, b: &Site) -> bool {
    (a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs() == 1
}

/// Projection onto the plane `y = 0`.
pub fn project_xz(v: &Site) -> Site {
    [v[0], 0, v[2]]
}

/// Projection onto the plane `x = 0`.
pub fn project_yz(v: &Site) -> Site {
    [0, v[1], v[2]]
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LatticePath {
    sites: Vec<Site>,
}

impl LatticePath {
    /// Checks that consecutive sites are nearest neighbours.
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if let Some(w) = sites.windows(2).find(|w| !is_adjacent(&w[0], &w[1])) {
            return Err(Error::Path(format!("{:?} and {:?} are not neighbours", w[0], w[1])));
        }
        Ok(LatticePath { sites })
    }

    pub(crate) fn from_vec(sites: Vec<Site>) -> Self {
        debug_assert!(sites.windows(2).all(|w| is_adjacent(&w[0], &w[1])));
        LatticePath { sites }
    }

    pub fn single(v: Site) -> Self {
        LatticePath { sites: alloc::vec![v] }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn into_sites(self) -> Vec<Site> {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn first(&self) -> Option<&Site> {
        self.sites.first()
    }

    pub fn last(&self) -> Option<&Site> {
        self.sites.last()
    }

    pub fn contains(&self, v: &Site) -> bool {
        self.sites.contains(v)
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = hashbrown::HashSet::with_capacity(self.sites.len());
        self.sites.iter().all(|v| seen.insert(*v))
    }

    pub fn in_plane(&self, plane: Plane) -> bool {
        self.sites.iter().all(|v| plane.contains(v))
    }
}

/// The two coordinate planes through the height axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    /// `y = 0`, points `(x, 0, z)`.
    XZ,
    /// `x = 0`, points `(0, y, z)`.
    YZ,
}

impl Plane {
    pub fn contains(self, v: &Site) -> bool {
        match self {
            Plane::XZ => v[1] == 0,
            Plane::YZ => v[0] == 0,
        }
    }

    /// Embeds a planar point `(horizontal, height)`.
    pub fn embed(self, p: [i64; 2]) -> Site {
        match self {
            Plane::XZ => [p[0], 0, p[1]],
            Plane::YZ => [0, p[0], p[1]],
        }
    }

    pub fn project(self, v: &Site) -> Site {
        match self {
            Plane::XZ => project_xz(v),
            Plane::YZ => project_yz(v),
        }
    }
}

/// A path confined to one of the two planes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanarPath {
    plane: Plane,
    path: LatticePath,
}

impl PlanarPath {
    pub fn new(plane: Plane, path: LatticePath) -> Result<Self> {
        if !path.in_plane(plane) {
            return Err(Error::Path(format!("path leaves the {plane:?} plane")));
        }
        Ok(PlanarPath { plane, path })
    }

    /// Embeds a path of `(horizontal, height)` points.
    pub fn from_points(plane: Plane, points: &[[i64; 2]]) -> Result<Self> {
        let path = LatticePath::new(points.iter().map(|&p| plane.embed(p)).collect())?;
        Ok(PlanarPath { plane, path })
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn path(&self) -> &LatticePath {
        &self.path
    }
}

fn nonempty(p: &LatticePath) -> Result<()> {
    if p.is_empty() {
        Err(Error::Path("empty path".into()))
    } else {
        Ok(())
    }
}

pub fn height_variation(path: &LatticePath) -> Result<i64> {
    nonempty(path)?;
    Ok(height(path.last().unwrap()) - height(path.first().unwrap()))
}

/// Prefix up to the first site at height `k`; the whole path if `k` is never reached.
pub fn stop_at_height(path: &LatticePath, k: i64) -> LatticePath {
    LatticePath::from_vec(stop_slice(&path.sites, k).to_vec())
}

fn stop_slice(p: &[Site], k: i64) -> &[Site] {
    match p.iter().position(|v| height(v) == k) {
        Some(i) => &p[..=i],
        None => p,
    }
}

pub fn reversal(path: &LatticePath) -> LatticePath {
    let mut s = path.sites.clone();
    s.reverse();
    LatticePath { sites: s }
}

pub fn concat(a: &LatticePath, b: &LatticePath) -> Result<LatticePath> {
    match (a.last(), b.first()) {
        (Some(x), Some(y)) if x == y => {
            let mut s = a.sites.clone();
            s.extend_from_slice(&b.sites[1..]);
            Ok(LatticePath { sites: s })
        }
        (None, _) => Ok(b.clone()),
        (_, None) => Ok(a.clone()),
        (Some(x), Some(y)) => Err(Error::Path(format!("cannot join {x:?} to {y:?}"))),
    }
}

/// Follows `a` until its first site on `b`, then continues along `b` from the
/// first position of `b` holding that site.
pub fn juxtapose(a: &LatticePath, b: &LatticePath) -> Result<LatticePath> {
    let mut first_pos: HashMap<Site, usize> = HashMap::with_capacity(b.len());
    for (j, v) in b.sites.iter().enumerate() {
        first_pos.entry(*v).or_insert(j);
    }
    for (i, v) in a.sites.iter().enumerate() {
        if let Some(&j) = first_pos.get(v) {
            let mut s = a.sites[..i].to_vec();
            s.extend_from_slice(&b.sites[j..]);
            return Ok(LatticePath { sites: s });
        }
    }
    Err(Error::Path("juxtaposed paths do not meet".into()))
}

/// Chronological loop erasure; keeps both endpoints.
pub fn simplify(path: &LatticePath) -> LatticePath {
    LatticePath { sites: erase_loops(&path.sites) }
}

fn erase_loops(p: &[Site]) -> Vec<Site> {
    let mut out: Vec<Site> = Vec::with_capacity(p.len());
    let mut pos: HashMap<Site, usize> = HashMap::with_capacity(p.len());
    for v in p {
        if let Some(&k) = pos.get(v) {
            for w in out.drain(k + 1..) {
                pos.remove(&w);
            }
        } else {
            pos.insert(*v, out.len());
            out.push(*v);
        }
    }
    out
}

/// `(x,0,z) × (0,y,z) = (x,y,z)`.
pub fn site_product(v: &Site, w: &Site) -> Result<Site> {
    if v[1] != 0 || w[0] != 0 {
        return Err(Error::Incompatible(format!("{v:?} × {w:?}: sites not in the y = 0 and x = 0 planes")));
    }
    if v[2] != w[2] {
        return Err(Error::Incompatible(format!("{v:?} × {w:?}: heights differ")));
    }
    Ok([v[0], w[1], v[2]])
}

/// Failure reasons of [`compatibility`], in checking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Incompatibility {
    Empty,
    /// The first path leaves `y = 0` or the second leaves `x = 0`.
    WrongPlanes,
    /// Start heights or end heights differ.
    EndpointHeights,
    /// Some prefix has height variation of the opposite sign.
    SignChange,
    /// The final height is reached before the last site.
    EarlyFinish,
}

fn sign_constant(p: &[Site]) -> bool {
    let z0 = height(&p[0]);
    let h = height(p.last().unwrap()) - z0;
    p.iter().all(|v| (height(v) - z0) * h >= 0)
}

fn finishes_last(p: &[Site]) -> bool {
    let e = height(p.last().unwrap());
    p.iter().position(|v| height(v) == e) == Some(p.len() - 1)
}

pub fn compatibility(g: &LatticePath, g2: &LatticePath) -> core::result::Result<(), Incompatibility> {
    if g.is_empty() || g2.is_empty() {
        return Err(Incompatibility::Empty);
    }
    if !g.in_plane(Plane::XZ) || !g2.in_plane(Plane::YZ) {
        return Err(Incompatibility::WrongPlanes);
    }
    let (a, b) = (&g.sites, &g2.sites);
    if height(&a[0]) != height(&b[0]) || height(a.last().unwrap()) != height(b.last().unwrap()) {
        return Err(Incompatibility::EndpointHeights);
    }
    if !sign_constant(a) || !sign_constant(b) {
        return Err(Incompatibility::SignChange);
    }
    if !finishes_last(a) || !finishes_last(b) {
        return Err(Incompatibility::EarlyFinish);
    }
    Ok(())
}

pub fn is_compatible(g: &LatticePath, g2: &LatticePath) -> bool {
    compatibility(g, g2).is_ok()
}

/// Lifts a compatible pair: a path from `g[0] × g2[0]` to `g.last × g2.last`
/// whose projections onto the two planes lie inside `g` and `g2`. The result
/// is loop-erased.
pub fn path_product(g: &LatticePath, g2: &LatticePath) -> Result<LatticePath> {
    compatibility(g, g2).map_err(|e| Error::Incompatible(format!("{e:?}")))?;
    let mut ctx = Lifter::default();
    let flip = height_variation(g)? < 0;
    let a = oriented(&g.sites, flip);
    let b = oriented(&g2.sites, flip);
    let out = ctx.ascend(&a, &b);
    Ok(LatticePath::from_vec(oriented(&out, flip)))
}

/// Product of two planar paths that share start and end heights and stay
/// between them (the final height may be visited early). The result has the
/// same endpoint and projection guarantees as [`path_product`].
pub fn banded_product(g: &LatticePath, g2: &LatticePath) -> Result<LatticePath> {
    nonempty(g)?;
    nonempty(g2)?;
    if !g.in_plane(Plane::XZ) || !g2.in_plane(Plane::YZ) {
        return Err(Error::Incompatible(format!("{:?}", Incompatibility::WrongPlanes)));
    }
    let (a, b) = (&g.sites, &g2.sites);
    let (s, e) = (height(&a[0]), height(a.last().unwrap()));
    if height(&b[0]) != s || height(b.last().unwrap()) != e {
        return Err(Error::Incompatible(format!("{:?}", Incompatibility::EndpointHeights)));
    }
    let (lo, hi) = (s.min(e), s.max(e));
    if a.iter().chain(b.iter()).any(|v| height(v) < lo || height(v) > hi) {
        return Err(Error::Incompatible("heights leave the band between the endpoints".into()));
    }
    let flip = e < s;
    let a = oriented(a, flip);
    let b = oriented(b, flip);
    let top = height(a.last().unwrap());
    let ia = a.iter().position(|v| height(v) == top).unwrap();
    let ib = b.iter().position(|v| height(v) == top).unwrap();
    let mut ctx = Lifter::default();
    let mut out = ctx.ascend(&a[..=ia], &b[..=ib]);
    ctx.level(&a, &b, ia, ib, top, &mut out);
    Ok(LatticePath::from_vec(oriented(&erase_loops(&out), flip)))
}

fn oriented(p: &[Site], flip: bool) -> Vec<Site> {
    if flip {
        p.iter().map(|v| [v[0], v[1], -v[2]]).collect()
    } else {
        p.to_vec()
    }
}

#[inline]
fn cross(v: &Site, w: &Site) -> Site {
    debug_assert_eq!(v[2], w[2]);
    [v[0], w[1], v[2]]
}

fn push_tail(out: &mut Vec<Site>, piece: &[Site]) {
    debug_assert_eq!(out.last(), piece.first());
    out.extend_from_slice(&piece[1..]);
}

type Key = (Vec<Site>, Vec<Site>);

/// Recursive construction with memoised sub-products.
#[derive(Default)]
struct Lifter {
    memo: HashMap<Key, Vec<Site>>,
}

impl Lifter {
    /// Product of an ascending compatible pair (start height minimal, final
    /// height first reached at the last site).
    fn ascend(&mut self, a: &[Site], b: &[Site]) -> Vec<Site> {
        let key = (a.to_vec(), b.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let s = height(&a[0]);
        let e = height(a.last().unwrap());
        let out = if e == s {
            alloc::vec![cross(&a[0], &b[0])]
        } else {
            // Reach height e - 1, walk both paths to their last site below e,
            // then step up together.
            let ta = a.iter().position(|v| height(v) == e - 1).unwrap();
            let tb = b.iter().position(|v| height(v) == e - 1).unwrap();
            let mut out = self.ascend(&a[..=ta], &b[..=tb]);
            let (ma, mb) = (a.len() - 1, b.len() - 1);
            self.level(&a[..ma], &b[..mb], ta, tb, e - 1, &mut out);
            out.push(cross(&a[ma], &b[mb]));
            erase_loops(&out)
        };
        self.memo.insert(key, out.clone());
        out
    }

    fn descend(&mut self, a: &[Site], b: &[Site]) -> Vec<Site> {
        let fa = oriented(a, true);
        let fb = oriented(b, true);
        oriented(&self.ascend(&fa, &fb), true)
    }

    /// Moves the pointers `(i, j)`, both at height `lvl`, to the ends of `a`
    /// and `b`. Both paths end at `lvl`, stay at or below it, and start at
    /// their minimal height.
    fn level(&mut self, a: &[Site], b: &[Site], mut i: usize, mut j: usize, lvl: i64, out: &mut Vec<Site>) {
        loop {
            if i + 1 < a.len() {
                (i, j) = self.advance(a, b, i, j, lvl, false, out);
            }
            if j + 1 < b.len() {
                (j, i) = self.advance(b, a, j, i, lvl, true, out);
            }
            if i + 1 == a.len() && j + 1 == b.len() {
                return;
            }
        }
    }

    /// Advances along `mover` to its end while the partner pointer shuttles
    /// back and forth on its already-visited prefix. `swapped` is set when
    /// `mover` lives in the `x = 0` plane.
    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        mover: &[Site],
        partner: &[Site],
        mut i: usize,
        mut j: usize,
        lvl: i64,
        swapped: bool,
        out: &mut Vec<Site>,
    ) -> (usize, usize) {
        let pair = |m: &Site, p: &Site| if swapped { cross(p, m) } else { cross(m, p) };
        while i + 1 < mover.len() {
            if height(&mover[i + 1]) == lvl {
                i += 1;
                out.push(pair(&mover[i], &partner[j]));
                continue;
            }
            // Excursion below lvl from i to r.
            let r = i + 1 + mover[i + 1..].iter().position(|v| height(v) == lvl).unwrap();
            let low = mover[i..=r].iter().map(height).min().unwrap();
            let q = i + mover[i..=r].iter().position(|v| height(v) == low).unwrap();
            let jb = (0..=j).rev().find(|&k| height(&partner[k]) == low).unwrap();
            let jr = jb + partner[jb..=j].iter().position(|v| height(v) == lvl).unwrap();
            let down_m = &mover[i..=q];
            let down_p: Vec<Site> = partner[jb..=j].iter().rev().copied().collect();
            let up_m = &mover[q..=r];
            let up_p = &partner[jb..=jr];
            let (d, u) = if swapped {
                (self.descend(&down_p, down_m), self.ascend(up_p, up_m))
            } else {
                (self.descend(down_m, &down_p), self.ascend(up_m, up_p))
            };
            push_tail(out, &d);
            push_tail(out, &u);
            i = r;
            j = jr;
        }
        (i, j)
    }
}

/// Random compatible pair with height variation in `[-max_h, max_h]` and at
/// most `max_len` sites each. Steps are drawn until the final height is hit;
/// when the remaining budget gets tight the walk heads straight for it.
pub fn random_compatible_pair(rng: &mut CounterRng, max_h: i64, max_len: usize) -> (LatticePath, LatticePath) {
    let max_len = max_len.max(max_h.unsigned_abs() as usize + 1);
    let z0 = rng.range(-3, 3);
    let h = rng.range(-max_h, max_h);
    let mut walk = |plane: Plane| {
        let len = rng.range(h.abs() + 1, max_len as i64) as usize;
        let mut pts = vec![[rng.range(-3, 3), z0]];
        let (lo, hi) = (z0.min(z0 + h), z0.max(z0 + h));
        while h != 0 && *pts.last().map(|p| &p[1]).unwrap() != z0 + h {
            let [x, z] = *pts.last().unwrap();
            let left = len - pts.len();
            let toward = (z0 + h - z).signum();
            let step = if (z0 + h - z).unsigned_abs() as usize + 1 >= left {
                [0, toward]
            } else {
                match rng.below(4) {
                    0 => [1, 0],
                    1 => [-1, 0],
                    2 => [0, toward],
                    _ if (lo..=hi).contains(&(z - toward)) => [0, -toward],
                    _ => [0, toward],
                }
            };
            pts.push([x + step[0], z + step[1]]);
        }
        LatticePath::from_vec(pts.into_iter().map(|p| plane.embed(p)).collect())
    };
    let a = walk(Plane::XZ);
    let b = walk(Plane::YZ);
    (a, b)
}

/// Per-instance contract check of a lifted path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductCheck {
    pub endpoints: bool,
    pub nearest_neighbour: bool,
    pub xz_inside: bool,
    pub yz_inside: bool,
    pub self_avoiding: bool,
    /// Projection onto `y = 0` equals the site set of the first input.
    pub xz_equal: bool,
    pub yz_equal: bool,
}

impl ProductCheck {
    pub fn passed(&self) -> bool {
        self.endpoints && self.nearest_neighbour && self.xz_inside && self.yz_inside
    }
}

/// Recomputes the projections of `out` and compares them with the inputs.
pub fn check_product(g: &LatticePath, g2: &LatticePath, out: &LatticePath) -> ProductCheck {
    use hashbrown::HashSet;
    let sa: HashSet<Site> = g.sites().iter().copied().collect();
    let sb: HashSet<Site> = g2.sites().iter().copied().collect();
    let pa: HashSet<Site> = out.sites().iter().map(project_xz).collect();
    let pb: HashSet<Site> = out.sites().iter().map(project_yz).collect();
    let endpoints = match (g.first(), g.last(), g2.first(), g2.last(), out.first(), out.last()) {
        (Some(a0), Some(a1), Some(b0), Some(b1), Some(o0), Some(o1)) => {
            *o0 == [a0[0], b0[1], a0[2]] && *o1 == [a1[0], b1[1], a1[2]]
        }
        _ => false,
    };
    ProductCheck {
        endpoints,
        nearest_neighbour: out.sites().windows(2).all(|w| is_adjacent(&w[0], &w[1])),
        xz_inside: pa.is_subset(&sa),
        yz_inside: pb.is_subset(&sb),
        self_avoiding: out.is_self_avoiding(),
        xz_equal: pa == sa,
        yz_equal: pb == sb,
    }
}

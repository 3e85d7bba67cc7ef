//! Connected components of boxed configurations, with free boundaries and
//! nearest-neighbour adjacency.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lattice::{compute_sites, Configuration, SiteBits, Window, DEFAULT_SITE_LIMIT, MAX_D};
use crate::{Error, Result};

pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a as usize] < self.size[b as usize] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        a
    }
}

/// Component labels over a window. Label 0 marks closed sites; components
/// are numbered from 1 in order of their first site in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabeling {
    window: Window,
    labels: Vec<u32>,
    sizes: Vec<u64>,
    /// Bit `2k` set when the component touches the low face of coordinate
    /// `k`, bit `2k + 1` for the high face.
    faces: Vec<u64>,
}

impl ClusterLabeling {
    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Labels in row-major order of the window.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: &[i64]) -> Option<u32> {
        self.window.index(v).map(|i| self.labels[i])
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, label: u32) -> u64 {
        self.sizes[label as usize - 1]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn touches(&self, label: u32, axis: usize, high: bool) -> bool {
        self.faces[label as usize - 1] >> (2 * axis + high as usize) & 1 == 1
    }

    pub fn touches_boundary(&self, label: u32) -> bool {
        self.faces[label as usize - 1] != 0
    }

    pub fn spans(&self, label: u32, axis: usize) -> bool {
        self.touches(label, axis, false) && self.touches(label, axis, true)
    }
}

/// Row-major walk of a window reporting each site's unpadded index, its
/// bit index in `bits` and its local coordinates.
fn for_each_site(bits: &SiteBits, mut f: impl FnMut(usize, usize, &[usize])) {
    let w = bits.window();
    let d = w.dim();
    let lens: Vec<usize> = (0..d).map(|k| w.len(k)).collect();
    let mut c = [0usize; MAX_D];
    let mut u = 0usize;
    loop {
        let b: usize = (0..d).map(|k| c[k] * bits.stride(k)).sum();
        f(u, b, &c[..d]);
        u += 1;
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            c[k] += 1;
            if c[k] < lens[k] {
                break;
            }
            c[k] = 0;
        }
    }
}

pub fn label_sites(bits: &SiteBits) -> ClusterLabeling {
    let w = bits.window().clone();
    let d = w.dim();
    let vol = w.volume() as usize;
    let mut ustride = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        ustride[k] = ustride[k + 1] * w.len(k + 1);
    }
    let mut open = vec![false; vol];
    let mut uf = UnionFind::new(vol);
    for_each_site(bits, |u, b, c| {
        if !bits.bit(b) {
            return;
        }
        open[u] = true;
        for k in 0..d {
            if c[k] > 0 && open[u - ustride[k]] {
                uf.union(u as u32, (u - ustride[k]) as u32);
            }
        }
    });
    let mut labels = vec![0u32; vol];
    let mut root_label = vec![0u32; vol];
    let mut sizes: Vec<u64> = Vec::new();
    let mut faces: Vec<u64> = Vec::new();
    for_each_site(bits, |u, _, c| {
        if !open[u] {
            return;
        }
        let r = uf.find(u as u32) as usize;
        if root_label[r] == 0 {
            sizes.push(0);
            faces.push(0);
            root_label[r] = sizes.len() as u32;
        }
        let l = root_label[r];
        labels[u] = l;
        sizes[l as usize - 1] += 1;
        for k in 0..d {
            if c[k] == 0 {
                faces[l as usize - 1] |= 1 << (2 * k);
            }
            if c[k] + 1 == w.len(k) {
                faces[l as usize - 1] |= 1 << (2 * k + 1);
            }
        }
    });
    ClusterLabeling { window: w, labels, sizes, faces }
}

fn sites_of(config: &Configuration) -> Result<alloc::borrow::Cow<'_, SiteBits>> {
    match config.sites() {
        Some(s) => Ok(alloc::borrow::Cow::Borrowed(s)),
        None => Ok(alloc::borrow::Cow::Owned(compute_sites(
            &config.region().window(),
            config.fields(),
            DEFAULT_SITE_LIMIT,
        )?)),
    }
}

pub fn label_clusters(config: &Configuration) -> Result<ClusterLabeling> {
    let bits = sites_of(config)?;
    Ok(label_sites(&bits))
}

/// Breadth-first exploration of open sites inside the local box
/// `lo..=hi` (coordinates relative to the window).
struct Explorer<'a> {
    bits: &'a SiteBits,
    d: usize,
    strides: [usize; MAX_D],
    lo: [usize; MAX_D],
    hi: [usize; MAX_D],
}

impl<'a> Explorer<'a> {
    fn new(bits: &'a SiteBits, lo: &[usize], hi: &[usize]) -> Self {
        let d = bits.window().dim();
        let mut e = Explorer { bits, d, strides: [0; MAX_D], lo: [0; MAX_D], hi: [0; MAX_D] };
        for k in 0..d {
            e.strides[k] = bits.stride(k);
            e.lo[k] = lo[k];
            e.hi[k] = hi[k];
        }
        e
    }

    fn whole(bits: &'a SiteBits) -> Self {
        let w = bits.window();
        let hi: Vec<usize> = (0..w.dim()).map(|k| w.len(k) - 1).collect();
        Self::new(bits, &vec![0; w.dim()], &hi)
    }

    #[inline]
    fn coords(&self, mut i: usize, out: &mut [usize; MAX_D]) {
        for k in 0..self.d {
            out[k] = i / self.strides[k];
            i %= self.strides[k];
        }
    }

    /// Visits every open site reachable from `sources`; `stop` ends the
    /// search early when it returns true.
    fn run(&self, sources: &[usize], mut stop: impl FnMut(&[usize]) -> bool) -> bool {
        let mut seen = vec![0u64; self.bits.words().len()];
        let mut queue: Vec<usize> = Vec::new();
        for &s in sources {
            if self.bits.bit(s) && seen[s / 64] >> (s % 64) & 1 == 0 {
                seen[s / 64] |= 1 << (s % 64);
                queue.push(s);
            }
        }
        let mut head = 0;
        let mut c = [0usize; MAX_D];
        while head < queue.len() {
            let i = queue[head];
            head += 1;
            self.coords(i, &mut c);
            if stop(&c[..self.d]) {
                return true;
            }
            for k in 0..self.d {
                let s = self.strides[k];
                if c[k] > self.lo[k] {
                    let j = i - s;
                    if self.bits.bit(j) && seen[j / 64] >> (j % 64) & 1 == 0 {
                        seen[j / 64] |= 1 << (j % 64);
                        queue.push(j);
                    }
                }
                if c[k] < self.hi[k] {
                    let j = i + s;
                    if self.bits.bit(j) && seen[j / 64] >> (j % 64) & 1 == 0 {
                        seen[j / 64] |= 1 << (j % 64);
                        queue.push(j);
                    }
                }
            }
        }
        false
    }
}

/// Largest l∞ distance from `center` reached by the open cluster of
/// `center` inside `center + [-limit, limit]^d`; `None` if `center` is closed.
pub fn cluster_reach(bits: &SiteBits, center: &[i64], limit: u32) -> Result<Option<u32>> {
    let w = bits.window();
    let d = w.dim();
    let r = limit as i64;
    if center.len() != d || (0..d).any(|k| center[k] - r < w.lo()[k] || center[k] + r > w.hi()[k]) {
        return Err(Error::Range(format!("box of radius {limit} around {center:?} leaves the window")));
    }
    let c: Vec<usize> = (0..d).map(|k| (center[k] - w.lo()[k]) as usize).collect();
    let lo: Vec<usize> = c.iter().map(|&x| x - limit as usize).collect();
    let hi: Vec<usize> = c.iter().map(|&x| x + limit as usize).collect();
    let start = bits.bit_index(center).unwrap();
    if !bits.bit(start) {
        return Ok(None);
    }
    let mut best = 0u32;
    Explorer::new(bits, &lo, &hi).run(&[start], |x| {
        let dist = (0..d).map(|k| x[k].abs_diff(c[k])).max().unwrap_or(0) as u32;
        best = best.max(dist);
        best == limit
    });
    Ok(Some(best))
}

fn origin(d: usize) -> Vec<i64> {
    vec![0; d]
}

/// The origin is open and joined by an open path to the boundary of `B(n)`.
pub fn origin_connects_to_boundary(config: &Configuration, n: u32) -> Result<bool> {
    let bits = sites_of(config)?;
    Ok(cluster_reach(&bits, &origin(config.d()), n)?.is_some_and(|r| r >= n))
}

/// The origin reaches the boundary of `B(n)` but not that of `B(big_n)`.
pub fn truncated_connectivity_event(config: &Configuration, n: u32, big_n: u32) -> Result<bool> {
    if n >= big_n {
        return Err(Error::Geometry(format!("inner radius {n} must be below outer radius {big_n}")));
    }
    let bits = sites_of(config)?;
    Ok(cluster_reach(&bits, &origin(config.d()), big_n)?.is_some_and(|r| r >= n && r < big_n))
}

/// Whether an open path joins the two faces of the window orthogonal to `axis`.
pub fn spans(bits: &SiteBits, axis: usize) -> bool {
    let w = bits.window();
    let last = w.len(axis) - 1;
    let mut sources = Vec::new();
    for_each_site(bits, |_, b, c| {
        if c[axis] == 0 && bits.bit(b) {
            sources.push(b);
        }
    });
    Explorer::whole(bits).run(&sources, |c| c[axis] == last)
}

pub fn spanning_component_count(labeling: &ClusterLabeling, axis: usize) -> usize {
    (1..=labeling.component_count() as u32).filter(|&l| labeling.spans(l, axis)).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classifier {
    /// Spans the box along at least one axis.
    Spanning,
    /// Touches the box boundary.
    BoundaryTouching,
}

/// Ranked densities (size over box volume) of the components selected by
/// `classifier`, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    pub densities: Vec<f64>,
}

pub fn density_vector(labeling: &ClusterLabeling, classifier: Classifier, top_k: usize) -> DensityVector {
    let vol = labeling.window().volume() as f64;
    let d = labeling.window().dim();
    let mut sizes: Vec<u64> = (1..=labeling.component_count() as u32)
        .filter(|&l| match classifier {
            Classifier::Spanning => (0..d).any(|k| labeling.spans(l, k)),
            Classifier::BoundaryTouching => labeling.touches_boundary(l),
        })
        .map(|l| labeling.size(l))
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes.truncate(top_k);
    DensityVector { densities: sizes.into_iter().map(|s| s as f64 / vol).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BoxRegion, ParamVector, PlaneField, SeedSpec};
    use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
    use proptest::prelude::*;

    fn sampled(p: f64, n: u32, seed: u64) -> Configuration {
        Configuration::sample(&ParamVector::diagonal(3, p).unwrap(), BoxRegion::centered(3, n), SeedSpec::new(seed, 0)).unwrap()
    }

    fn uniform(region: &BoxRegion, open: bool) -> Configuration {
        let fields = (0..region.d()).map(|i| PlaneField::filled(i, region.projection(i), open)).collect();
        Configuration::from_fields(region.clone(), fields).unwrap()
    }

    /// Flood fill over `vacancy`, independent of the labeling code.
    fn flood(cfg: &Configuration) -> Vec<BTreeSet<Vec<i64>>> {
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        cfg.region().window().for_each(|v| {
            if seen.contains(v) || !cfg.vacancy(v).unwrap() {
                return;
            }
            let mut comp = BTreeSet::new();
            let mut q = VecDeque::from([v.to_vec()]);
            seen.insert(v.to_vec());
            while let Some(x) = q.pop_front() {
                for k in 0..x.len() {
                    for s in [-1, 1] {
                        let mut y = x.clone();
                        y[k] += s;
                        if cfg.region().contains(&y) && !seen.contains(&y) && cfg.vacancy(&y).unwrap() {
                            seen.insert(y.clone());
                            q.push_back(y);
                        }
                    }
                }
                comp.insert(x);
            }
            comps.push(comp);
        });
        comps
    }

    fn partition(l: &ClusterLabeling) -> Vec<BTreeSet<Vec<i64>>> {
        let mut m: BTreeMap<u32, BTreeSet<Vec<i64>>> = BTreeMap::new();
        let mut i = 0;
        l.window().for_each(|v| {
            if l.labels()[i] != 0 {
                m.entry(l.labels()[i]).or_default().insert(v.to_vec());
            }
            i += 1;
        });
        m.into_values().collect()
    }

    #[test]
    fn trivial_labelings() {
        let region = BoxRegion::centered(3, 3);
        let l = label_clusters(&uniform(&region, true)).unwrap();
        assert_eq!(l.sizes(), &[343]);
        assert_eq!(spanning_component_count(&l, 2), 1);
        assert_eq!(density_vector(&l, Classifier::Spanning, 5).densities, vec![1.0]);
        assert!(origin_connects_to_boundary(&uniform(&region, true), 3).unwrap());
        assert!(!truncated_connectivity_event(&uniform(&region, true), 1, 3).unwrap());
        let l = label_clusters(&uniform(&region, false)).unwrap();
        assert_eq!(l.component_count(), 0);
        assert_eq!(spanning_component_count(&l, 0), 0);
        assert!(!origin_connects_to_boundary(&uniform(&region, false), 2).unwrap());
        assert!(origin_connects_to_boundary(&uniform(&region, true), 4).is_err());
        assert!(truncated_connectivity_event(&uniform(&region, true), 3, 3).is_err());
    }

    #[test]
    fn dead_end_segment() {
        // Only the segment from the origin to x = 2 is open inside B(5).
        let region = BoxRegion::centered(3, 5);
        let f0 = PlaneField::from_fn(0, region.projection(0), |p| p == [0, 0]);
        let f1 = PlaneField::from_fn(1, region.projection(1), |p| p[1] == 0 && (0..=2).contains(&p[0]));
        let f2 = PlaneField::from_fn(2, region.projection(2), |p| p[1] == 0 && (0..=2).contains(&p[0]));
        let cfg = Configuration::from_fields(region, vec![f0, f1, f2]).unwrap();
        assert!(truncated_connectivity_event(&cfg, 2, 5).unwrap());
        assert!(!truncated_connectivity_event(&cfg, 3, 5).unwrap());
        assert!(origin_connects_to_boundary(&cfg, 2).unwrap());
        assert!(!origin_connects_to_boundary(&cfg, 3).unwrap());
    }

    #[test]
    fn parallel_slabs() {
        // Two open slabs x ∈ {-3,-2} and x ∈ {2,3}, separated by closed lines.
        let region = BoxRegion::centered(3, 3);
        let slab = |x: i64| (2..=3).contains(&x.abs());
        let fields = vec![
            PlaneField::filled(0, region.projection(0), true),
            PlaneField::from_fn(1, region.projection(1), |p| slab(p[0])),
            PlaneField::from_fn(2, region.projection(2), |p| slab(p[0])),
        ];
        let l = label_clusters(&Configuration::from_fields(region, fields).unwrap()).unwrap();
        let dv = density_vector(&l, Classifier::Spanning, 10);
        assert_eq!(dv.densities.len(), 2);
        assert_eq!(dv.densities[0], dv.densities[1]);
        assert!((dv.densities[0] - 98.0 / 343.0).abs() < 1e-12);
        assert_eq!(spanning_component_count(&l, 1), 2);
        assert_eq!(spanning_component_count(&l, 0), 0);
    }

    #[test]
    fn labeling_matches_flood_fill() {
        for seed in 0..8 {
            for p in [0.55, 0.65, 0.8] {
                let cfg = sampled(p, 6, seed);
                let l = label_clusters(&cfg).unwrap();
                let mut a = partition(&l);
                let mut b = flood(&cfg);
                a.sort();
                b.sort();
                assert_eq!(a, b);
                let total: u64 = l.sizes().iter().sum();
                let bits = compute_sites(&cfg.region().window(), cfg.fields(), DEFAULT_SITE_LIMIT).unwrap();
                assert_eq!(total, bits.count_open());
                // Labels are numbered by first appearance.
                let mut next = 1;
                for &x in l.labels() {
                    if x == next {
                        next += 1;
                    }
                    assert!(x < next);
                }
                // Spanning components by face intersection.
                for axis in 0..3 {
                    let expect = b
                        .iter()
                        .filter(|c| c.iter().any(|v| v[axis] == -6) && c.iter().any(|v| v[axis] == 6))
                        .count();
                    assert_eq!(spanning_component_count(&l, axis), expect);
                    assert_eq!(spans(&bits, axis), expect > 0);
                }
                let dv = density_vector(&l, Classifier::Spanning, usize::MAX);
                let spanning = (0..3).map(|k| spanning_component_count(&l, k)).max().unwrap();
                assert!(dv.densities.len() >= spanning);
                assert!(dv.densities.windows(2).all(|w| w[0] >= w[1]));
                assert!(dv.densities.iter().sum::<f64>() <= 1.0);
            }
        }
    }

    #[test]
    fn origin_events_match_bfs() {
        for seed in 0..20 {
            let cfg = sampled(0.72, 32, seed);
            let comps = flood(&sampled(0.72, 8, seed));
            let origin_comp = comps.iter().find(|c| c.contains(&vec![0, 0, 0]));
            for n in [2u32, 5, 8] {
                let expect = origin_comp.is_some_and(|c| c.iter().any(|v| v.iter().any(|x| x.unsigned_abs() == n as u64)));
                assert_eq!(origin_connects_to_boundary(&cfg, n).unwrap(), expect);
            }
            let far = flood(&cfg);
            let oc = far.iter().find(|c| c.contains(&vec![0, 0, 0]));
            let norm = |v: &Vec<i64>| v.iter().map(|x| x.unsigned_abs()).max().unwrap();
            let reach8 = oc.is_some_and(|c| {
                // Reaching norm 8 through sites of norm ≤ 8 is the same as
                // touching norm 8 at all.
                c.iter().any(|v| norm(v) >= 8)
            });
            let reach32 = oc.is_some_and(|c| c.iter().any(|v| norm(v) == 32));
            assert_eq!(truncated_connectivity_event(&cfg, 8, 32).unwrap(), reach8 && !reach32);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn monotonicity(seed in any::<u64>(), n in 2u32..6) {
            let params = ParamVector::diagonal(3, 0.7).unwrap();
            let region = BoxRegion::centered(3, 4 * n);
            let s = SeedSpec::new(seed, 0);
            let low = Configuration::sample(&params, region.clone(), s).unwrap();
            // Raising one parameter with the same uniforms only opens sites.
            let high = Configuration::sample(&ParamVector::new(vec![0.7, 0.85, 0.7]).unwrap(), region, s).unwrap();
            if origin_connects_to_boundary(&low, n).unwrap() {
                prop_assert!(origin_connects_to_boundary(&high, n).unwrap());
            }
            for big in [2 * n, 3 * n] {
                let a = truncated_connectivity_event(&low, n, big).unwrap();
                let b = truncated_connectivity_event(&low, n, 4 * n).unwrap();
                prop_assert!(!a || b);
            }
        }
    }
}

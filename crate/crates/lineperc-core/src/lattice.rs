//! Model parameters, hyperplane fields and the vacant set.
//!
//! Axes are numbered `0..d`. The field of axis `i` lives on the hyperplane
//! orthogonal to `e_i`; a point of that plane is addressed by the `d - 1`
//! coordinates that remain after deleting coordinate `i`, in increasing
//! axis order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::StreamKey;
use crate::{Error, Result};

/// Largest supported dimension.
pub const MAX_D: usize = 32;

/// Default ceiling on the number of sites [`Configuration::materialize`] accepts.
pub const DEFAULT_SITE_LIMIT: u128 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    p: Vec<f64>,
}

impl ParamVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 3 || p.len() > MAX_D {
            return Err(Error::Params(format!(
                "dimension must be in 3..={MAX_D}, got {}",
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Params(format!("probability {bad} outside [0,1]")));
        }
        Ok(ParamVector { p })
    }

    pub fn diagonal(d: usize, rho: f64) -> Result<Self> {
        Self::new(vec![rho; d])
    }

    pub fn d(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, axis: usize) -> f64 {
        self.p[axis]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master: u64,
    pub replica: u64,
}

impl SeedSpec {
    pub fn new(master: u64, replica: u64) -> Self {
        SeedSpec { master, replica }
    }

    pub fn key(&self, axis: usize) -> StreamKey {
        StreamKey::new(self.master, self.replica, axis as u64)
    }
}

/// Integer rectangle with inclusive bounds, stored row-major with the last
/// coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Geometry(format!(
                "window bounds of dimension {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Geometry(format!("empty window {lo:?}..={hi:?}")));
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self, k: usize) -> usize {
        (self.hi[k] - self.lo[k] + 1) as usize
    }

    pub fn volume(&self) -> u128 {
        (0..self.dim()).map(|k| self.len(k) as u128).product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(k, &c)| self.lo[k] <= c && c <= self.hi[k])
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    /// Row-major index of `x`, or `None` outside the window.
    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0usize;
        for k in 0..self.dim() {
            idx = idx * self.len(k) + (x[k] - self.lo[k]) as usize;
        }
        Some(idx)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut x = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            let l = self.len(k);
            x[k] = self.lo[k] + (idx % l) as i64;
            idx /= l;
        }
        x
    }

    /// Visits every point in row-major order.
    pub fn for_each(&self, mut f: impl FnMut(&[i64])) {
        let mut x = self.lo.clone();
        loop {
            f(&x);
            let mut k = self.dim();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if x[k] < self.hi[k] {
                    x[k] += 1;
                    break;
                }
                x[k] = self.lo[k];
            }
        }
    }
}

/// The l∞ box `center + [-radius, radius]^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxRegion {
    pub center: Vec<i64>,
    pub radius: u32,
}

impl BoxRegion {
    pub fn new(center: Vec<i64>, radius: u32) -> Self {
        BoxRegion { center, radius }
    }

    pub fn centered(d: usize, radius: u32) -> Self {
        BoxRegion { center: vec![0; d], radius }
    }

    pub fn d(&self) -> usize {
        self.center.len()
    }

    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn volume(&self) -> u128 {
        (self.side() as u128).pow(self.d() as u32)
    }

    pub fn window(&self) -> Window {
        let r = self.radius as i64;
        Window {
            lo: self.center.iter().map(|c| c - r).collect(),
            hi: self.center.iter().map(|c| c + r).collect(),
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let r = self.radius as i64;
        v.len() == self.d() && v.iter().zip(&self.center).all(|(x, c)| (x - c).abs() <= r)
    }

    /// Sites of the box with at least one neighbour outside it.
    pub fn is_boundary(&self, v: &[i64]) -> bool {
        let r = self.radius as i64;
        self.contains(v) && v.iter().zip(&self.center).any(|(x, c)| (x - c).abs() == r)
    }

    /// Image of the box under the projection along `axis`.
    pub fn projection(&self, axis: usize) -> Window {
        project_window(&self.window(), axis)
    }
}

pub fn project_window(w: &Window, axis: usize) -> Window {
    let lo = w.lo.iter().enumerate().filter(|(k, _)| *k != axis).map(|(_, &c)| c).collect();
    let hi = w.hi.iter().enumerate().filter(|(k, _)| *k != axis).map(|(_, &c)| c).collect();
    Window { lo, hi }
}

/// Writes the plane coordinates of `v` along `axis` into `out` and returns
/// the filled prefix.
#[inline]
pub fn project_into<'a>(v: &[i64], axis: usize, out: &'a mut [i64]) -> &'a [i64] {
    let mut j = 0;
    for (k, &c) in v.iter().enumerate() {
        if k != axis {
            out[j] = c;
            j += 1;
        }
    }
    &out[..j]
}

pub fn project(v: &[i64], axis: usize) -> Vec<i64> {
    v.iter().enumerate().filter(|(k, _)| *k != axis).map(|(_, &c)| c).collect()
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Copies `len` bits starting at bit `start` of `src` into `out`, low bits first.
pub fn read_bits(src: &[u64], start: usize, len: usize, out: &mut [u64]) {
    let shift = start % 64;
    let base = start / 64;
    let nw = words_for(len);
    for (w, slot) in out.iter_mut().enumerate().take(nw) {
        let lo = src[base + w] >> shift;
        let hi = if shift != 0 && base + w + 1 < src.len() {
            src[base + w + 1] << (64 - shift)
        } else {
            0
        };
        *slot = lo | hi;
    }
    if len % 64 != 0 {
        out[nw - 1] &= (1u64 << (len % 64)) - 1;
    }
}

/// Bernoulli field on a window of the hyperplane orthogonal to `axis`.
///
/// Bits are packed row-major over the window (last coordinate fastest) into
/// 64-bit words, bit `k` of the sequence at bit `k % 64` of word `k / 64`.
/// Bits past the window volume are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneField {
    axis: usize,
    window: Window,
    bits: Vec<u64>,
}

impl PlaneField {
    pub fn filled(axis: usize, window: Window, open: bool) -> Self {
        let n = window.volume() as usize;
        let mut bits = vec![if open { u64::MAX } else { 0 }; words_for(n)];
        if open && n % 64 != 0 {
            *bits.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        PlaneField { axis, window, bits }
    }

    pub fn from_fn(axis: usize, window: Window, mut f: impl FnMut(&[i64]) -> bool) -> Self {
        let mut field = Self::filled(axis, window.clone(), false);
        let mut idx = 0;
        window.for_each(|x| {
            if f(x) {
                field.bits[idx / 64] |= 1 << (idx % 64);
            }
            idx += 1;
        });
        field
    }

    pub fn from_words(axis: usize, window: Window, bits: Vec<u64>) -> Result<Self> {
        let n = window.volume() as usize;
        if bits.len() != words_for(n) {
            return Err(Error::Geometry(format!(
                "{} words for a window of {} sites",
                bits.len(),
                n
            )));
        }
        if n % 64 != 0 && bits[bits.len() - 1] >> (n % 64) != 0 {
            return Err(Error::Geometry("nonzero padding bits".into()));
        }
        Ok(PlaneField { axis, window, bits })
    }

    /// Samples `ω(x) = [u(x) < p]` with the counter uniforms of `seed`.
    pub fn sample(p: f64, axis: usize, window: Window, seed: SeedSpec) -> Self {
        let key = seed.key(axis);
        Self::from_fn(axis, window, |x| key.uniform(x) < p)
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn get(&self, x: &[i64]) -> Option<bool> {
        self.window.index(x).map(|i| self.bit(i))
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: &[i64], open: bool) -> Result<()> {
        let i = self
            .window
            .index(x)
            .ok_or_else(|| Error::Range(format!("{x:?} not in plane window")))?;
        if open {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
        Ok(())
    }

    pub fn count_open(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Copy of the field restricted to a subwindow.
    pub fn restrict(&self, window: &Window) -> Result<Self> {
        if !self.window.contains_window(window) {
            return Err(Error::Range(format!("{window:?} not inside {:?}", self.window)));
        }
        Ok(Self::from_fn(self.axis, window.clone(), |x| self.get(x).unwrap()))
    }
}

/// The uniforms behind a plane field, kept so the field can be re-thresholded
/// at any retention probability. Fields obtained from the same uniforms are
/// monotone in `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneUniforms {
    axis: usize,
    window: Window,
    u: Vec<f64>,
}

impl PlaneUniforms {
    pub fn sample(axis: usize, window: Window, seed: SeedSpec) -> Self {
        let key = seed.key(axis);
        let mut u = Vec::with_capacity(window.volume() as usize);
        window.for_each(|x| u.push(key.uniform(x)));
        PlaneUniforms { axis, window, u }
    }

    pub fn threshold(&self, p: f64) -> PlaneField {
        let mut field = PlaneField::filled(self.axis, self.window.clone(), false);
        for (i, &u) in self.u.iter().enumerate() {
            if u < p {
                field.bits[i / 64] |= 1 << (i % 64);
            }
        }
        field
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }
}

/// Samples the `d` plane fields covering the projections of `region`.
pub fn sample_plane_fields(params: &ParamVector, region: &BoxRegion, seed: SeedSpec) -> Vec<PlaneField> {
    (0..params.d())
        .map(|i| PlaneField::sample(params.get(i), i, region.projection(i), seed))
        .collect()
}

/// Open sites of a rectangular window, one padded row of words per line
/// along the last coordinate. Every row keeps at least one zero padding bit,
/// so a step along the last coordinate never lands on an open site of the
/// neighbouring row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteBits {
    window: Window,
    row_words: usize,
    strides: Vec<usize>,
    words: Vec<u64>,
}

impl SiteBits {
    pub fn empty(window: Window) -> Self {
        let d = window.dim();
        let row_words = words_for(window.len(d - 1) + 1);
        let mut strides = vec![1usize; d];
        if d >= 2 {
            strides[d - 2] = row_words * 64;
            for k in (0..d - 2).rev() {
                strides[k] = strides[k + 1] * window.len(k + 1);
            }
        }
        let total = if d >= 2 { strides[0] * window.len(0) } else { row_words * 64 };
        SiteBits { window, row_words, strides, words: vec![0; total / 64] }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Bit offset between neighbours along coordinate `k`.
    pub fn stride(&self, k: usize) -> usize {
        self.strides[k]
    }

    pub fn row_words(&self) -> usize {
        self.row_words
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit_len(&self) -> usize {
        self.words.len() * 64
    }

    pub fn bit_index(&self, v: &[i64]) -> Option<usize> {
        if !self.window.contains(v) {
            return None;
        }
        Some(v.iter().enumerate().map(|(k, &c)| (c - self.window.lo[k]) as usize * self.strides[k]).sum())
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn get(&self, v: &[i64]) -> Option<bool> {
        self.bit_index(v).map(|i| self.bit(i))
    }

    pub fn set(&mut self, v: &[i64], open: bool) {
        let i = self.bit_index(v).expect("site outside window");
        if open {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_open(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Coordinates of bit `i`; padding bits give coordinates past the window.
    pub fn coords_of(&self, mut i: usize) -> Vec<i64> {
        let d = self.window.dim();
        let mut v = vec![0; d];
        for k in 0..d {
            v[k] = self.window.lo[k] + (i / self.strides[k]) as i64;
            i %= self.strides[k];
        }
        v
    }

    fn row_mut(&mut self, row: usize) -> &mut [u64] {
        let w = self.row_words;
        &mut self.words[row * w..(row + 1) * w]
    }
}

/// A boxed configuration: the plane fields covering a box, optionally with
/// the open sites of the box computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    region: BoxRegion,
    fields: Vec<PlaneField>,
    sites: Option<SiteBits>,
}

impl Configuration {
    pub fn sample(params: &ParamVector, region: BoxRegion, seed: SeedSpec) -> Result<Self> {
        if region.d() != params.d() {
            return Err(Error::Params(format!(
                "box of dimension {} for {} parameters",
                region.d(),
                params.d()
            )));
        }
        let fields = sample_plane_fields(params, &region, seed);
        Ok(Configuration { region, fields, sites: None })
    }

    pub fn from_fields(region: BoxRegion, fields: Vec<PlaneField>) -> Result<Self> {
        if fields.len() != region.d() {
            return Err(Error::Geometry(format!("{} fields for d = {}", fields.len(), region.d())));
        }
        for (i, f) in fields.iter().enumerate() {
            if f.axis() != i || !f.window().contains_window(&region.projection(i)) {
                return Err(Error::Range(format!("field {i} does not cover the box projection")));
            }
        }
        Ok(Configuration { region, fields, sites: None })
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn fields(&self) -> &[PlaneField] {
        &self.fields
    }

    pub fn d(&self) -> usize {
        self.region.d()
    }

    /// Whether `v` is open: every field is open at the projection of `v`.
    pub fn vacancy(&self, v: &[i64]) -> Result<bool> {
        if !self.region.contains(v) {
            return Err(Error::Range(format!("{v:?} outside the box")));
        }
        if let Some(s) = &self.sites {
            return Ok(s.get(v).unwrap());
        }
        let mut buf = [0i64; MAX_D];
        Ok(self.fields.iter().all(|f| f.get(project_into(v, f.axis(), &mut buf)).unwrap()))
    }

    pub fn materialize(&mut self) -> Result<&SiteBits> {
        self.materialize_with_limit(DEFAULT_SITE_LIMIT)
    }

    pub fn materialize_with_limit(&mut self, limit: u128) -> Result<&SiteBits> {
        if self.sites.is_none() {
            self.sites = Some(compute_sites(&self.region.window(), &self.fields, limit)?);
        }
        Ok(self.sites.as_ref().unwrap())
    }

    pub fn sites(&self) -> Option<&SiteBits> {
        self.sites.as_ref()
    }
}

/// Open sites of `window` given plane fields whose windows cover its projections.
pub fn compute_sites(window: &Window, fields: &[PlaneField], limit: u128) -> Result<SiteBits> {
    let d = window.dim();
    let volume = window.volume();
    if volume > limit {
        return Err(Error::Capacity { volume, limit });
    }
    for (i, f) in fields.iter().enumerate() {
        if f.axis() != i || !f.window().contains_window(&project_window(window, i)) {
            return Err(Error::Range(format!("field {i} does not cover the window")));
        }
    }
    let mut out = SiteBits::empty(window.clone());
    let len = window.len(d - 1);
    let rw = out.row_words;
    let mut tmp = vec![0u64; rw];
    let mut plane = [0i64; MAX_D];
    let prefix = Window { lo: window.lo[..d - 1].to_vec(), hi: window.hi[..d - 1].to_vec() };
    let mut row = 0usize;
    let mut last_axis_closed = false;
    prefix.for_each(|c| {
        let r = row;
        row += 1;
        last_axis_closed = !fields[d - 1].get(c).unwrap();
        if last_axis_closed {
            return;
        }
        let dst = out.row_mut(r);
        dst.fill(u64::MAX);
        for f in &fields[..d - 1] {
            // Plane point of the row start: drop coordinate `axis` from (c, lo_last).
            let mut j = 0;
            for (k, &ck) in c.iter().enumerate() {
                if k != f.axis() {
                    plane[j] = ck;
                    j += 1;
                }
            }
            plane[j] = window.lo[d - 1];
            let start = f.window().index(&plane[..d - 1]).unwrap();
            read_bits(f.words(), start, len, &mut tmp);
            for (a, b) in dst.iter_mut().zip(&tmp) {
                *a &= *b;
            }
        }
        if len % 64 != 0 {
            dst[rw - 1] &= (1u64 << (len % 64)) - 1;
        }
    });
    Ok(out)
}

/// Vacancy of arbitrary sites straight from the counter uniforms, without
/// storing any field. Agrees with [`Configuration::sample`] on every site.
#[derive(Debug, Clone)]
pub struct SiteOracle {
    p: Vec<f64>,
    keys: Vec<StreamKey>,
}

impl SiteOracle {
    pub fn new(params: &ParamVector, seed: SeedSpec) -> Self {
        SiteOracle { p: params.p().to_vec(), keys: (0..params.d()).map(|i| seed.key(i)).collect() }
    }

    pub fn d(&self) -> usize {
        self.p.len()
    }

    #[inline]
    pub fn plane_open(&self, axis: usize, x: &[i64]) -> bool {
        let p = self.p[axis];
        p >= 1.0 || (p > 0.0 && self.keys[axis].uniform(x) < p)
    }

    #[inline]
    pub fn is_open(&self, v: &[i64]) -> bool {
        let mut buf = [0i64; MAX_D];
        (0..self.p.len()).all(|i| self.plane_open(i, project_into(v, i, &mut buf)))
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if libm::fabs(s) >= libm::fabs(x) {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// `ln P(B(n) ⊂ 𝒱) = (2n+1)^{d-1} Σ ln p_i`; `-∞` when some `p_i = 0`.
pub fn log_prob_box_all_vacant(params: &ParamVector, n: u32) -> f64 {
    if params.p().contains(&0.0) {
        return f64::NEG_INFINITY;
    }
    let lines = libm::pow((2 * n as u64 + 1) as f64, (params.d() - 1) as f64);
    lines * compensated_sum(params.p().iter().map(|&p| libm::log(p)))
}

pub fn prob_box_all_vacant(params: &ParamVector, n: u32) -> f64 {
    libm::exp(log_prob_box_all_vacant(params, n))
}

/// Both sides of one displayed inequality, also in log form, and whether it
/// holds strictly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub n: u32,
    /// `min p_i^{d(2n+1)^{d-1}} > p^{(2n+1)^d}`: the all-open box is likelier
    /// under the line model.
    pub all_open: Comparison,
    /// `1-(1-p_1)^{(2n+1)^{d-1}} < 1-(1-p)^{(2n+1)^d}`: some open site in
    /// the box is less likely under the line model.
    pub some_closed: Comparison,
    /// Smallest `n` in `1..=64` from which both comparisons hold strictly
    /// through 64, if any.
    pub n0: Option<u32>,
}

pub const DOMINATION_SCAN_MAX: u32 = 64;

fn ln_one_minus_exp(a: f64) -> f64 {
    // ln(1 - e^a) for a <= 0.
    if a > -core::f64::consts::LN_2 {
        libm::log(-libm::expm1(a))
    } else {
        libm::log1p(-libm::exp(a))
    }
}

fn compare_powers(n: u32, params: &ParamVector, p_bern: f64) -> (Comparison, Comparison) {
    let d = params.d() as u32;
    let side = (2 * n + 1) as u128;
    let face = side.pow(d - 1);
    let vol = side.pow(d);
    let pmin = params.p().iter().cloned().fold(1.0, f64::min);

    let e1 = (d as u128) * face;
    let log_lhs = e1 as f64 * libm::log(pmin);
    let log_rhs = vol as f64 * libm::log(p_bern);
    // Exponents are integers, so equal bases compare exactly.
    let strict1 = if pmin == p_bern { e1 < vol } else { log_lhs > log_rhs };
    let all_open = Comparison {
        lhs: libm::exp(log_lhs),
        rhs: libm::exp(log_rhs),
        log_lhs,
        log_rhs,
        strict: strict1,
    };

    let p1 = params.get(0);
    let a = face as f64 * libm::log1p(-p1);
    let b = vol as f64 * libm::log1p(-p_bern);
    let strict2 = if p1 == p_bern { face < vol } else { b < a };
    let some_closed = Comparison {
        lhs: -libm::expm1(a),
        rhs: -libm::expm1(b),
        log_lhs: ln_one_minus_exp(a),
        log_rhs: ln_one_minus_exp(b),
        strict: strict2,
    };
    (all_open, some_closed)
}

/// Evaluates both comparisons at `n` and scans `n = 1..=64` for the point
/// from which both hold.
pub fn domination_inequalities(params: &ParamVector, p_bern: f64, n: u32) -> Result<DominationReport> {
    let degenerate = |x: f64| !(x > 0.0 && x < 1.0);
    if params.p().iter().any(|&x| degenerate(x)) || degenerate(p_bern) {
        return Err(Error::Domain("all probabilities must lie strictly inside (0,1)".into()));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let (all_open, some_closed) = compare_powers(n, params, p_bern);
    let mut n0 = None;
    for m in (1..=DOMINATION_SCAN_MAX).rev() {
        let (x, y) = compare_powers(m, params, p_bern);
        if x.strict && y.strict {
            n0 = Some(m);
        } else {
            break;
        }
    }
    Ok(DominationReport { n, all_open, some_closed, n0 })
}

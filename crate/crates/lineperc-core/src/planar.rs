//! Crossings of rectangles in two-dimensional site fields.
//!
//! Points are `[horizontal, vertical]`. A rectangle `R(n, m; k, l)` is
//! `[k, k+n-1] × [l, l+m-1]`; its left side is the column `x = k` and its
//! bottom side is the row `y = l`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lattice::{PlaneField, Window};
use crate::{Error, Result};

pub type Point = [i64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    /// Width.
    pub n: usize,
    /// Height.
    pub m: usize,
    pub k: i64,
    pub l: i64,
}

impl Rect {
    pub fn new(n: usize, m: usize, k: i64, l: i64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Geometry(format!("rectangle {n}x{m} is empty")));
        }
        Ok(Rect { n, m, k, l })
    }

    pub fn x_max(&self) -> i64 {
        self.k + self.n as i64 - 1
    }

    pub fn y_max(&self) -> i64 {
        self.l + self.m as i64 - 1
    }

    pub fn contains(&self, p: Point) -> bool {
        self.k <= p[0] && p[0] <= self.x_max() && self.l <= p[1] && p[1] <= self.y_max()
    }

    fn local(&self, p: Point) -> usize {
        (p[0] - self.k) as usize * self.m + (p[1] - self.l) as usize
    }

    fn point(&self, i: usize) -> Point {
        [self.k + (i / self.m) as i64, self.l + (i % self.m) as i64]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LeftRight,
    BottomTop,
}

/// Boolean field on a rectangular window of ℤ².
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field2D {
    lo: Point,
    hi: Point,
    open: Vec<bool>,
}

impl Field2D {
    pub fn filled(lo: Point, hi: Point, open: bool) -> Self {
        let w = (hi[0] - lo[0] + 1).max(0) as usize;
        let h = (hi[1] - lo[1] + 1).max(0) as usize;
        Field2D { lo, hi, open: vec![open; w * h] }
    }

    pub fn from_fn(lo: Point, hi: Point, mut f: impl FnMut(Point) -> bool) -> Self {
        let mut out = Self::filled(lo, hi, false);
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                let i = out.index([x, y]).unwrap();
                out.open[i] = f([x, y]);
            }
        }
        out
    }

    /// Views a plane field of a three-dimensional model.
    pub fn from_plane(field: &PlaneField) -> Result<Self> {
        let w: &Window = field.window();
        if w.dim() != 2 {
            return Err(Error::Geometry(format!("plane window of dimension {}", w.dim())));
        }
        let (lo, hi) = ([w.lo()[0], w.lo()[1]], [w.hi()[0], w.hi()[1]]);
        Ok(Self::from_fn(lo, hi, |p| field.get(&p).unwrap()))
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    fn height(&self) -> usize {
        (self.hi[1] - self.lo[1] + 1) as usize
    }

    fn index(&self, p: Point) -> Option<usize> {
        if p[0] < self.lo[0] || p[0] > self.hi[0] || p[1] < self.lo[1] || p[1] > self.hi[1] {
            return None;
        }
        Some((p[0] - self.lo[0]) as usize * self.height() + (p[1] - self.lo[1]) as usize)
    }

    pub fn get(&self, p: Point) -> Option<bool> {
        self.index(p).map(|i| self.open[i])
    }

    pub fn is_open(&self, p: Point) -> bool {
        self.get(p) == Some(true)
    }

    pub fn set(&mut self, p: Point, open: bool) {
        let i = self.index(p).expect("point outside field");
        self.open[i] = open;
    }

    pub fn covers(&self, r: &Rect) -> bool {
        self.lo[0] <= r.k && r.x_max() <= self.hi[0] && self.lo[1] <= r.l && r.y_max() <= self.hi[1]
    }

    fn check(&self, r: &Rect) -> Result<()> {
        if self.covers(r) {
            Ok(())
        } else {
            Err(Error::Range(format!("{r:?} not inside field window {:?}..={:?}", self.lo, self.hi)))
        }
    }
}

const NN: [[i64; 2]; 4] = [[-1, 0], [1, 0], [0, -1], [0, 1]];
const STAR: [[i64; 2]; 8] = [[-1, -1], [-1, 0], [-1, 1], [0, -1], [0, 1], [1, -1], [1, 0], [1, 1]];

fn on_start(r: &Rect, p: Point, dir: Direction) -> bool {
    match dir {
        Direction::LeftRight => p[0] == r.k,
        Direction::BottomTop => p[1] == r.l,
    }
}

fn on_end(r: &Rect, p: Point, dir: Direction) -> bool {
    match dir {
        Direction::LeftRight => p[0] == r.x_max(),
        Direction::BottomTop => p[1] == r.y_max(),
    }
}

/// Breadth-first search over sites of `r` with state `want`.
fn crossing(field: &Field2D, r: &Rect, dir: Direction, want: bool, steps: &[[i64; 2]]) -> bool {
    let mut seen = vec![false; r.n * r.m];
    let mut queue = VecDeque::new();
    for i in 0..r.n * r.m {
        let p = r.point(i);
        if on_start(r, p, dir) && field.get(p) == Some(want) {
            seen[i] = true;
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        if on_end(r, p, dir) {
            return true;
        }
        for s in steps {
            let q = [p[0] + s[0], p[1] + s[1]];
            if r.contains(q) && field.get(q) == Some(want) {
                let i = r.local(q);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    false
}

pub fn open_crossing_exists(field: &Field2D, r: &Rect, dir: Direction) -> Result<bool> {
    field.check(r)?;
    Ok(crossing(field, r, dir, true, &NN))
}

/// Crossing by closed sites under 8-neighbour adjacency.
pub fn closed_star_crossing_exists(field: &Field2D, r: &Rect, dir: Direction) -> Result<bool> {
    field.check(r)?;
    Ok(crossing(field, r, dir, false, &STAR))
}

/// Exactly one of "open bottom-top crossing" and "closed left-right
/// *-crossing" occurs.
pub fn duality_holds(field: &Field2D, r: &Rect) -> Result<bool> {
    let open = open_crossing_exists(field, r, Direction::BottomTop)?;
    let star = closed_star_crossing_exists(field, r, Direction::LeftRight)?;
    Ok(open ^ star)
}

/// Lexicographically least open crossing of `r` in direction `dir`, sites
/// compared with `key`. Only the first site lies on the start side and only
/// the last on the end side.
fn least_crossing(field: &Field2D, r: &Rect, dir: Direction, key: fn(Point) -> (i64, i64)) -> Result<Vec<Point>> {
    field.check(r)?;
    let cells = r.n * r.m;
    let usable = |p: Point| r.contains(p) && field.is_open(p);
    let mut used = vec![false; cells];

    // Whether the end side is reachable from `from` through unused open
    // sites off the start side.
    let reachable = |from: Point, used: &[bool]| -> bool {
        if on_end(r, from, dir) {
            return true;
        }
        let mut seen = used.to_vec();
        let mut queue = VecDeque::from([from]);
        seen[r.local(from)] = true;
        while let Some(p) = queue.pop_front() {
            for s in NN {
                let q = [p[0] + s[0], p[1] + s[1]];
                if !usable(q) || on_start(r, q, dir) || seen[r.local(q)] {
                    continue;
                }
                if on_end(r, q, dir) {
                    return true;
                }
                seen[r.local(q)] = true;
                queue.push_back(q);
            }
        }
        false
    };

    let mut starts: Vec<Point> = (0..cells).map(|i| r.point(i)).filter(|&p| on_start(r, p, dir) && usable(p)).collect();
    starts.sort_by_key(|&p| key(p));
    let first = starts.into_iter().find(|&p| reachable(p, &used)).ok_or(Error::NoCrossing)?;
    let mut path = vec![first];
    used[r.local(first)] = true;
    let mut cur = first;
    while !on_end(r, cur, dir) {
        let mut next: Vec<Point> = NN
            .iter()
            .map(|s| [cur[0] + s[0], cur[1] + s[1]])
            .filter(|&q| usable(q) && !on_start(r, q, dir) && !used[r.local(q)])
            .collect();
        next.sort_by_key(|&p| key(p));
        let step = next
            .into_iter()
            .find(|&q| {
                used[r.local(q)] = true;
                let ok = reachable(q, &used);
                used[r.local(q)] = false;
                ok
            })
            .expect("reachability is preserved along the greedy path");
        used[r.local(step)] = true;
        path.push(step);
        cur = step;
    }
    Ok(path)
}

/// Open bottom-top crossing, least in lexicographic order of its sites
/// compared by `(x, y)`.
pub fn leftmost_bottom_top_crossing(field: &Field2D, r: &Rect) -> Result<Vec<Point>> {
    least_crossing(field, r, Direction::BottomTop, |p| (p[0], p[1]))
}

/// Open left-right crossing, least in lexicographic order of its sites
/// compared by `(y, x)`.
pub fn lowest_left_right_crossing(field: &Field2D, r: &Rect) -> Result<Vec<Point>> {
    least_crossing(field, r, Direction::LeftRight, |p| (p[1], p[0]))
}

/// Checks that `path` is a nearest-neighbour open crossing of `r` in `dir`
/// touching the start side only first and the end side only last.
pub fn is_open_crossing(field: &Field2D, r: &Rect, dir: Direction, path: &[Point]) -> bool {
    let Some((first, last)) = path.first().zip(path.last()) else {
        return false;
    };
    path.iter().all(|&p| r.contains(p) && field.is_open(p))
        && path.windows(2).all(|w| (w[0][0] - w[1][0]).abs() + (w[0][1] - w[1][1]).abs() == 1)
        && on_start(r, *first, dir)
        && on_end(r, *last, dir)
        && path[1..].iter().all(|&p| !on_start(r, p, dir))
        && path[..path.len() - 1].iter().all(|&p| !on_end(r, p, dir))
}

const STEP_X: usize = 0;
const STEP_Y: usize = 1;

/// State index of a 2-directed walker: last step direction and the length of
/// the current straight run (1 or 2).
fn state(dir: usize, run: usize) -> usize {
    dir * 2 + (run - 1)
}

fn successor(s: Option<usize>, dir: usize) -> Option<usize> {
    match s {
        None => Some(state(dir, 1)),
        Some(s) => {
            let (d, run) = (s / 2, s % 2 + 1);
            if d == dir {
                (run < 2).then(|| state(dir, 2))
            } else {
                Some(state(dir, 1))
            }
        }
    }
}

/// Reachable states per level: `levels[t][x - ox]` is a 4-bit mask over
/// [`state`] for the site `(x, oy + t - (x - ox))`.
struct Directed {
    origin: Point,
    levels: Vec<Vec<u8>>,
}

fn directed_check(field: &Field2D, origin: Point, depth: usize) -> Result<()> {
    let far = [origin[0] + depth as i64, origin[1] + depth as i64];
    if field.get(origin).is_none() || field.get(far).is_none() {
        return Err(Error::Range(format!("window does not cover depth {depth} from {origin:?}")));
    }
    Ok(())
}

fn directed_forward(field: &Field2D, origin: Point, depth: usize) -> Directed {
    let site = |t: usize, i: usize| [origin[0] + i as i64, origin[1] + (t - i) as i64];
    let mut levels: Vec<Vec<u8>> = Vec::with_capacity(depth + 1);
    if !field.is_open(origin) {
        return Directed { origin, levels };
    }
    levels.push(vec![0]);
    for t in 1..=depth {
        let prev = &levels[t - 1];
        let mut cur = vec![0u8; t + 1];
        for (i, slot) in cur.iter_mut().enumerate() {
            if !field.is_open(site(t, i)) {
                continue;
            }
            // Arrive by an x-step from (i-1) or a y-step from i.
            for (dir, from) in [(STEP_X, i.checked_sub(1)), (STEP_Y, (i < t).then_some(i))] {
                let Some(j) = from else { continue };
                let mask = prev[j];
                let sources: Vec<Option<usize>> = if t == 1 {
                    vec![None]
                } else {
                    (0..4).filter(|s| mask >> s & 1 == 1).map(Some).collect()
                };
                for s in sources {
                    if let Some(n) = successor(s, dir) {
                        *slot |= 1 << n;
                    }
                }
            }
        }
        if cur.iter().all(|&m| m == 0) {
            levels.push(cur);
            break;
        }
        levels.push(cur);
    }
    Directed { origin, levels }
}

/// Sites reachable from `origin` by open 2-directed paths of at most `depth` steps.
pub fn two_directed_cluster(field: &Field2D, origin: Point, depth: usize) -> Result<Vec<Point>> {
    directed_check(field, origin, depth)?;
    let dir = directed_forward(field, origin, depth);
    let mut out = Vec::new();
    for (t, level) in dir.levels.iter().enumerate() {
        for (i, &mask) in level.iter().enumerate() {
            if mask != 0 || t == 0 {
                out.push([dir.origin[0] + i as i64, dir.origin[1] + (t - i) as i64]);
            }
        }
    }
    Ok(out)
}

/// Whether some open 2-directed path from `origin` has exactly `depth` steps.
pub fn two_directed_survives(field: &Field2D, origin: Point, depth: usize) -> Result<bool> {
    directed_check(field, origin, depth)?;
    let dir = directed_forward(field, origin, depth);
    Ok(dir.levels.len() == depth + 1 && dir.levels[depth].iter().any(|&m| m != 0 || depth == 0))
}

/// The open 2-directed path of `depth` steps whose height sequence is
/// lexicographically least: every step goes right whenever a full-depth
/// continuation remains possible.
pub fn lowest_two_directed_path(field: &Field2D, origin: Point, depth: usize) -> Result<Vec<Point>> {
    directed_check(field, origin, depth)?;
    if !field.is_open(origin) {
        return Err(Error::NoCrossing);
    }
    let site = |t: usize, i: usize| [origin[0] + i as i64, origin[1] + (t - i) as i64];
    // alive[t][i] bit s: from state s at level t, site i, level `depth` is reachable.
    let mut alive: Vec<Vec<u8>> = vec![Vec::new(); depth + 1];
    alive[depth] = (0..=depth).map(|i| if field.is_open(site(depth, i)) { 0b1111 } else { 0 }).collect();
    for t in (0..depth).rev() {
        let mut cur = vec![0u8; t + 1];
        for (i, slot) in cur.iter_mut().enumerate() {
            if !field.is_open(site(t, i)) {
                continue;
            }
            for s in 0..4 {
                let ok = [(STEP_X, i + 1), (STEP_Y, i)].iter().any(|&(dir, j)| {
                    successor(Some(s), dir).is_some_and(|n| alive[t + 1][j] >> n & 1 == 1)
                });
                if ok {
                    *slot |= 1 << s;
                }
            }
        }
        alive[t] = cur;
    }
    let mut path = vec![origin];
    let (mut i, mut s) = (0usize, None::<usize>);
    for t in 0..depth {
        let mut moved = false;
        for (dir, j) in [(STEP_X, i + 1), (STEP_Y, i)] {
            if let Some(n) = successor(s, dir) {
                if alive[t + 1][j] >> n & 1 == 1 {
                    i = j;
                    s = Some(n);
                    path.push(site(t + 1, j));
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            return Err(Error::NoCrossing);
        }
    }
    Ok(path)
}

/// Whether `path` is a 2-directed path: unit steps right or up, never three
/// in a row the same way.
pub fn is_two_directed(path: &[Point]) -> bool {
    let steps: Vec<Option<usize>> = path
        .windows(2)
        .map(|w| match [w[1][0] - w[0][0], w[1][1] - w[0][1]] {
            [1, 0] => Some(STEP_X),
            [0, 1] => Some(STEP_Y),
            _ => None,
        })
        .collect();
    steps.iter().all(|s| s.is_some()) && steps.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2]))
}

//! Exact passage times and geodesics on the weighted window.
//!
//! The passage time between two sites is the minimum total edge weight over
//! unrestricted 4-neighbour lattice paths; orientation plays no role here,
//! every stored edge can be traversed both ways at the same weight. Search
//! is A* with the L1 lower bound (every weight is at least 1), the whole
//! equal-cost shell is settled, and the reported path is reconstructed
//! backwards with a fixed direction preference, so results are deterministic.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::{HashMap, HashSet};

use crate::lattice::{Axis, Displacement, PassageField, Site};
use crate::oriented::{
    is_bidirectional, nearest_bidirectional_on_antidiagonal, LevelTable, ESCAPES,
};
use crate::qpath::{stabilized_path, QPathTrace};
use crate::{Error, Result};

/// A lattice path with its total traversal time.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    /// Consecutive 4-neighbour sites.
    pub sites: Vec<Site>,
    /// Sum of traversed edge weights.
    pub total_time: f64,
}

impl GeodesicPath {
    /// Wraps an oriented open step sequence; its time is its length.
    pub fn from_open_steps(sites: Vec<Site>) -> Self {
        let total_time = (sites.len() - 1) as f64;
        GeodesicPath { sites, total_time }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Weight of the stored edge between two neighbouring sites.
fn step_weight(field: &PassageField, a: Site, b: Site) -> Result<f64> {
    let d = Displacement::between(a, b);
    let (base, axis) = match (d.dx, d.dt) {
        (1, 0) => (a, Axis::Right),
        (-1, 0) => (b, Axis::Right),
        (0, 1) => (a, Axis::Up),
        (0, -1) => (b, Axis::Up),
        _ => return Err(Error::Config("path steps must be lattice neighbours")),
    };
    field.weight(base, axis)
}

/// Total weight along an arbitrary 4-neighbour path.
pub fn path_time(field: &PassageField, sites: &[Site]) -> Result<f64> {
    let mut total = 0.0;
    for w in sites.windows(2) {
        total += step_weight(field, w[0], w[1])?;
    }
    Ok(total)
}

// step preference for path reconstruction: right, up, left, down
const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    f: f64,
    site: Site,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap on (f, site)
        other.f.total_cmp(&self.f).then_with(|| other.site.cmp(&self.site))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn shortest_path(
    field: &PassageField,
    from: Site,
    to: Site,
    allowed: Option<&HashSet<Site>>,
) -> Result<(f64, Vec<Site>)> {
    let window = field.window();
    if !window.contains(from) || !window.contains(to) {
        return Err(Error::OutOfWindow);
    }
    if let Some(set) = allowed {
        if !set.contains(&from) || !set.contains(&to) {
            return Err(Error::Disconnected);
        }
    }
    if from == to {
        return Ok((0.0, alloc::vec![from]));
    }
    let h = |s: Site| s.l1(to) as f64;
    let mut dist: HashMap<Site, f64> = HashMap::new();
    let mut settled: HashSet<Site> = HashSet::new();
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    dist.insert(from, 0.0);
    heap.push(HeapEntry { f: h(from), site: from });
    let mut target_time: Option<f64> = None;

    while let Some(HeapEntry { f, site }) = heap.pop() {
        // once the target is settled, finish the equal-cost shell so that
        // every site on every optimal path is settled
        if let Some(t) = target_time {
            if f > t {
                break;
            }
        }
        if !settled.insert(site) {
            continue;
        }
        let d_site = dist[&site];
        if site == to {
            target_time = Some(d_site);
        }
        for (dx, dt) in DIRECTIONS {
            let nbr = site.offset(dx, dt);
            if !window.contains(nbr) {
                continue;
            }
            if let Some(set) = allowed {
                if !set.contains(&nbr) {
                    continue;
                }
            }
            if settled.contains(&nbr) {
                continue;
            }
            let cand = d_site + step_weight(field, site, nbr)?;
            let improved = match dist.get(&nbr) {
                Some(&old) => cand < old,
                None => true,
            };
            if improved {
                dist.insert(nbr, cand);
                let fv = cand + h(nbr);
                if target_time.is_none_or(|t| fv <= t) {
                    heap.push(HeapEntry { f: fv, site: nbr });
                }
            }
        }
    }

    let Some(total) = target_time else {
        return Err(Error::Disconnected);
    };

    // deterministic reconstruction: walk back from the target, preferring
    // incoming steps right, up, left, down in that order
    let mut path = alloc::vec![to];
    let mut cur = to;
    while cur != from {
        let d_cur = dist[&cur];
        let mut chosen = None;
        for (dx, dt) in DIRECTIONS {
            let pred = cur.offset(-dx, -dt);
            if !window.contains(pred) || !settled.contains(&pred) {
                continue;
            }
            if let Some(set) = allowed {
                if !set.contains(&pred) {
                    continue;
                }
            }
            if let Some(&dp) = dist.get(&pred) {
                if dp + step_weight(field, pred, cur)? == d_cur {
                    chosen = Some(pred);
                    break;
                }
            }
        }
        cur = chosen.expect("settled shell contains an optimal predecessor");
        path.push(cur);
    }
    path.reverse();
    Ok((total, path))
}

/// Exact passage time between two sites plus one minimizing path.
pub fn passage_time(field: &PassageField, x: Site, y: Site) -> Result<(f64, GeodesicPath)> {
    let (total, sites) = shortest_path(field, x, y, None)?;
    Ok((total, GeodesicPath { sites, total_time: total }))
}

/// Shortest path restricted to `allowed`; both endpoints must belong to it.
pub fn constrained_geodesic(
    field: &PassageField,
    x: Site,
    y: Site,
    allowed: &HashSet<Site>,
) -> Result<GeodesicPath> {
    let (total, sites) = shortest_path(field, x, y, Some(allowed))?;
    Ok(GeodesicPath { sites, total_time: total })
}

/// Checks that an oriented open path is a geodesic: its passage time equals
/// its length equals the L1 displacement of its endpoints. Fails with
/// [`Error::NotOrientedOpen`] when a step is closed or not oriented.
pub fn verify_oriented_geodesic(field: &PassageField, path: &[Site]) -> Result<bool> {
    if path.is_empty() {
        return Err(Error::Config("path must contain at least one site"));
    }
    for w in path.windows(2) {
        let d = Displacement::between(w[0], w[1]);
        let axis = match (d.dx, d.dt) {
            (1, 0) => Axis::Right,
            (0, 1) => Axis::Up,
            _ => return Err(Error::NotOrientedOpen),
        };
        if !field.is_open(w[0], axis)? {
            return Err(Error::NotOrientedOpen);
        }
    }
    let length = (path.len() - 1) as f64;
    let first = path[0];
    let last = *path.last().unwrap();
    let (tau, _) = passage_time(field, first, last)?;
    Ok(tau == length && first.l1(last) == path.len() as u64 - 1)
}

/// Checks that a contiguous 4-neighbour subpath achieves the exact passage
/// time between its endpoints.
pub fn subpath_is_geodesic(field: &PassageField, sites: &[Site]) -> Result<bool> {
    if sites.len() < 2 {
        return Ok(true);
    }
    let time = path_time(field, sites)?;
    let (tau, _) = passage_time(field, sites[0], *sites.last().unwrap())?;
    Ok(tau == time)
}

/// The enclosure of a non-percolating origin: coalescing forward q-paths
/// from the nearest bi-directional points on its anti-diagonal, their
/// anti-oriented twins, and the lattice region bounded by the four segments.
#[derive(Debug, Clone)]
pub struct SandwichRegion {
    /// Forward segments up to the meeting index `n0`.
    pub right_forward: Vec<Site>,
    pub left_forward: Vec<Site>,
    /// Anti segments up to `n0_anti`.
    pub right_anti: Vec<Site>,
    pub left_anti: Vec<Site>,
    pub n0: u32,
    pub n0_anti: u32,
    delta: HashSet<Site>,
}

impl SandwichRegion {
    pub fn contains(&self, s: Site) -> bool {
        self.delta.contains(&s)
    }

    pub fn delta(&self) -> &HashSet<Site> {
        &self.delta
    }

    /// Enclosed sites in sorted order.
    pub fn delta_sites(&self) -> Vec<Site> {
        let mut v: Vec<Site> = self.delta.iter().copied().collect();
        v.sort();
        v
    }

    /// Meeting site of the two forward segments.
    pub fn forward_meeting(&self) -> Site {
        *self.right_forward.last().unwrap()
    }
}

fn first_meeting(a: &QPathTrace, b: &QPathTrace) -> Option<u32> {
    let horizon = a.stabilized_upto.min(b.stabilized_upto);
    (0..=horizon).find(|&n| a.site_at(n) == b.site_at(n))
}

/// Builds the sandwich region around `origin`. Fails with
/// [`Error::WindowExhausted`] when either pair of paths does not meet within
/// the safe window.
pub fn sandwich_region(
    field: &PassageField,
    fwd: &LevelTable,
    anti: &LevelTable,
    origin: Site,
    q: f64,
    escape_margin: u32,
    max_steps: u32,
) -> Result<SandwichRegion> {
    let (j_r, j_l) = nearest_bidirectional_on_antidiagonal(fwd, anti, origin, escape_margin)?;
    let right = origin.offset(j_r, -j_r);
    let left = origin.offset(j_l, -j_l);

    let rf = stabilized_path(field, fwd, right, q, escape_margin, max_steps)?;
    let lf = stabilized_path(field, fwd, left, q, escape_margin, max_steps)?;
    let n0 = first_meeting(&rf, &lf).ok_or(Error::WindowExhausted)?;
    let ra = stabilized_path(field, anti, right, q, escape_margin, max_steps)?;
    let la = stabilized_path(field, anti, left, q, escape_margin, max_steps)?;
    let n0_anti = first_meeting(&ra, &la).ok_or(Error::WindowExhausted)?;

    let mut delta = HashSet::new();
    let c0 = origin.diag();
    // scanline per anti-diagonal level between the left and right path
    for d in 0..=n0 {
        let (a, b) = (lf.site_at(d).x, rf.site_at(d).x);
        let (lo, hi) = (a.min(b), a.max(b));
        for x in lo..=hi {
            let t = (c0 + d as i64 - x as i64) as i32;
            delta.insert(Site::new(x, t));
        }
    }
    for d in 0..=n0_anti {
        let (a, b) = (la.site_at(d).x, ra.site_at(d).x);
        let (lo, hi) = (a.min(b), a.max(b));
        for x in lo..=hi {
            let t = (c0 - d as i64 - x as i64) as i32;
            delta.insert(Site::new(x, t));
        }
    }
    debug_assert!(delta.contains(&origin));

    Ok(SandwichRegion {
        right_forward: rf.steps[..=n0 as usize].to_vec(),
        left_forward: lf.steps[..=n0 as usize].to_vec(),
        right_anti: ra.steps[..=n0_anti as usize].to_vec(),
        left_anti: la.steps[..=n0_anti as usize].to_vec(),
        n0,
        n0_anti,
        delta,
    })
}

/// A directed geodesic through an arbitrary origin.
#[derive(Debug, Clone)]
pub struct SandwichGeodesic {
    pub path: GeodesicPath,
    /// `None` when the origin percolates and the path is its stabilized
    /// q-path.
    pub region: Option<SandwichRegion>,
    /// Regeneration increments of the forward continuation, for direction
    /// estimates.
    pub increments: Vec<(u32, Displacement)>,
}

/// Builds a semi-infinite (window-limited) geodesic from `origin`.
///
/// A percolating origin yields its stabilized q-path. Otherwise the origin
/// is enclosed by a [`SandwichRegion`]; the path is the region-restricted
/// geodesic from the origin to the forward meeting point, concatenated with
/// the q-path continuation from there.
pub fn sandwich_geodesic(
    field: &PassageField,
    fwd: &LevelTable,
    anti: &LevelTable,
    origin: Site,
    q: f64,
    escape_margin: u32,
    max_steps: u32,
) -> Result<SandwichGeodesic> {
    if fwd.level(origin)? == ESCAPES {
        let trace = stabilized_path(field, fwd, origin, q, escape_margin, max_steps)?;
        return Ok(SandwichGeodesic {
            path: GeodesicPath::from_open_steps(trace.steps.clone()),
            region: None,
            increments: trace.increments(),
        });
    }
    let region = sandwich_region(field, fwd, anti, origin, q, escape_margin, max_steps)?;
    let meeting = region.forward_meeting();
    let spliced = constrained_geodesic(field, origin, meeting, region.delta())?;

    // continue with the q-path restarted at the meeting point
    let continuation = stabilized_path(field, fwd, meeting, q, escape_margin, max_steps)?;
    let mut sites = spliced.sites.clone();
    sites.extend_from_slice(&continuation.steps[1..]);
    let total_time = spliced.total_time + (continuation.steps.len() - 1) as f64;
    Ok(SandwichGeodesic {
        path: GeodesicPath { sites, total_time },
        region: Some(region),
        increments: continuation.increments(),
    })
}

/// Concatenates the anti and forward q-paths through a bi-directional site
/// into one two-sided open path; every finite subpath is a geodesic.
pub fn bi_infinite_geodesic(
    field: &PassageField,
    fwd: &LevelTable,
    anti: &LevelTable,
    site: Site,
    q: f64,
    escape_margin: u32,
    max_steps: u32,
) -> Result<GeodesicPath> {
    if !is_bidirectional(fwd, anti, site, escape_margin)? {
        return Err(Error::NotBidirectional);
    }
    let backward = stabilized_path(field, anti, site, q, escape_margin, max_steps)?;
    let forward = stabilized_path(field, fwd, site, q, escape_margin, max_steps)?;
    let mut sites: Vec<Site> = backward.steps.iter().rev().copied().collect();
    sites.extend_from_slice(&forward.steps[1..]);
    Ok(GeodesicPath::from_open_steps(sites))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ExcessDistribution, Orientation, Window};
    use crate::streams::SplitMix64;

    fn atom2() -> ExcessDistribution {
        ExcessDistribution::Atom { value: 2.0 }
    }

    /// Exhaustive minimum over all self-avoiding 4-neighbour paths. Windows
    /// must have at most 32 sites.
    fn brute_force_passage(field: &PassageField, from: Site, to: Site) -> f64 {
        let w = field.window();
        assert!(w.len() <= 32);
        fn dfs(field: &PassageField, cur: Site, to: Site, visited: u32, time: f64, best: &mut f64) {
            if time >= *best {
                return;
            }
            if cur == to {
                *best = time;
                return;
            }
            let w = field.window();
            for (dx, dt) in DIRECTIONS {
                let nbr = cur.offset(dx, dt);
                if !w.contains(nbr) {
                    continue;
                }
                let bit = 1u32 << w.index(nbr);
                if visited & bit != 0 {
                    continue;
                }
                let wt = step_weight(field, cur, nbr).unwrap();
                dfs(field, nbr, to, visited | bit, time + wt, best);
            }
        }
        let mut best = f64::INFINITY;
        dfs(field, from, to, 1u32 << w.index(from), 0.0, &mut best);
        best
    }

    #[test]
    fn trivial_passage_times() {
        let w = Window::square(0, 4).unwrap();
        let f = PassageField::sample(w, 1.0, atom2(), 3).unwrap();
        let (t0, p0) = passage_time(&f, Site::new(2, 2), Site::new(2, 2)).unwrap();
        assert_eq!(t0, 0.0);
        assert_eq!(p0.sites, alloc::vec![Site::new(2, 2)]);
        let (t1, p1) = passage_time(&f, Site::new(1, 1), Site::new(2, 1)).unwrap();
        assert_eq!(t1, 1.0);
        assert_eq!(p1.sites.len(), 2);
        assert!(passage_time(&f, Site::new(0, 0), Site::new(9, 0)).is_err());
    }

    #[test]
    fn matches_brute_force_on_small_windows() {
        let mut rng = SplitMix64::new(21);
        for seed in 0..120u64 {
            let w = Window::new(0, 4, 0, 4).unwrap();
            let p = [0.3, 0.7, 1.0][(seed % 3) as usize];
            let f = PassageField::sample(w, p, atom2(), seed).unwrap();
            let from = w.site_at((rng.next_u64() % 25) as usize);
            let to = w.site_at((rng.next_u64() % 25) as usize);
            let (tau, path) = passage_time(&f, from, to).unwrap();
            let brute = brute_force_passage(&f, from, to);
            assert_eq!(tau, brute, "seed {seed} {from:?}->{to:?}");
            assert_eq!(path_time(&f, &path.sites).unwrap(), tau);
            assert_eq!(path.sites.first(), Some(&from));
            assert_eq!(path.sites.last(), Some(&to));
        }
    }

    #[test]
    fn passage_time_lower_bound() {
        for seed in 0..10u64 {
            let w = Window::square(0, 20).unwrap();
            let f = PassageField::sample(w, 0.7, atom2(), seed).unwrap();
            let mut rng = SplitMix64::new(seed);
            for _ in 0..10 {
                let a = w.site_at((rng.next_u64() % w.len() as u64) as usize);
                let b = w.site_at((rng.next_u64() % w.len() as u64) as usize);
                let (tau, _) = passage_time(&f, a, b).unwrap();
                assert!(tau >= a.l1(b) as f64);
            }
        }
    }

    #[test]
    fn deterministic_tie_breaking_prefers_right_then_up() {
        // all edges open: many equal-time paths; every site's incoming step
        // prefers right, so right-steps accumulate at the target end
        let w = Window::square(0, 6).unwrap();
        let f = PassageField::sample(w, 1.0, atom2(), 9).unwrap();
        let (tau, path) = passage_time(&f, Site::new(0, 0), Site::new(3, 3)).unwrap();
        assert_eq!(tau, 6.0);
        let expected: Vec<Site> = alloc::vec![
            Site::new(0, 0),
            Site::new(0, 1),
            Site::new(0, 2),
            Site::new(0, 3),
            Site::new(1, 3),
            Site::new(2, 3),
            Site::new(3, 3),
        ];
        assert_eq!(path.sites, expected);
        let (_, path2) = passage_time(&f, Site::new(0, 0), Site::new(3, 3)).unwrap();
        assert_eq!(path.sites, path2.sites);
    }

    #[test]
    fn window_growth_never_increases_interior_times() {
        for seed in 0..8u64 {
            let small = Window::square(0, 14).unwrap();
            let big = Window::square(-8, 22).unwrap();
            let fs = PassageField::sample(small, 0.6, atom2(), seed).unwrap();
            let fb = PassageField::sample(big, 0.6, atom2(), seed).unwrap();
            let a = Site::new(5, 6);
            let b = Site::new(9, 8);
            let (ts, _) = passage_time(&fs, a, b).unwrap();
            let (tb, _) = passage_time(&fb, a, b).unwrap();
            assert!(tb <= ts);
            // margin >= separation: the time is already stable
            assert_eq!(ts, tb, "seed {seed}");
        }
    }

    #[test]
    fn oriented_paths_verify_and_junk_is_rejected() {
        let w = Window::square(-4, 120).unwrap();
        let f = PassageField::sample(w, 0.7, atom2(), 33).unwrap();
        let table = LevelTable::compute(&f, Orientation::Forward);
        if table.level(Site::new(0, 0)).unwrap() == ESCAPES {
            let tr = stabilized_path(&f, &table, Site::new(0, 0), 0.5, 16, 60).unwrap();
            assert!(verify_oriented_geodesic(&f, &tr.steps).unwrap());
            for sub in tr.steps.windows(7).step_by(5) {
                assert!(verify_oriented_geodesic(&f, sub).unwrap());
            }
        }
        // a step through a closed edge is rejected
        let closed = PassageField::from_pattern(w, 0.5, atom2(), 0, |_, _| false, |_| 0.5).unwrap();
        assert_eq!(
            verify_oriented_geodesic(&closed, &[Site::new(0, 0), Site::new(1, 0)]).unwrap_err(),
            Error::NotOrientedOpen
        );
        // a non-oriented step is rejected
        assert_eq!(
            verify_oriented_geodesic(&f, &[Site::new(5, 5), Site::new(4, 5)]).unwrap_err(),
            Error::NotOrientedOpen
        );
    }

    #[test]
    fn constrained_search_respects_the_set() {
        let w = Window::square(0, 8).unwrap();
        let f = PassageField::sample(w, 0.5, atom2(), 4).unwrap();
        // whole window: agrees with the free oracle
        let all: HashSet<Site> = w.sites().collect();
        let (tau, _) = passage_time(&f, Site::new(0, 0), Site::new(5, 5)).unwrap();
        let g = constrained_geodesic(&f, Site::new(0, 0), Site::new(5, 5), &all).unwrap();
        assert_eq!(g.total_time, tau);
        // corridor: the only route is the corridor itself
        let corridor: HashSet<Site> = (0..=8).map(|x| Site::new(x, 0)).collect();
        let g = constrained_geodesic(&f, Site::new(0, 0), Site::new(8, 0), &corridor).unwrap();
        assert_eq!(g.sites.len(), 9);
        // disconnected set
        let split: HashSet<Site> = [Site::new(0, 0), Site::new(2, 0)].into_iter().collect();
        assert_eq!(
            constrained_geodesic(&f, Site::new(0, 0), Site::new(2, 0), &split).unwrap_err(),
            Error::Disconnected
        );
    }

    #[test]
    fn subpaths_of_reported_geodesics_are_geodesics() {
        for seed in 0..6u64 {
            let w = Window::square(0, 16).unwrap();
            let f = PassageField::sample(w, 0.6, atom2(), seed).unwrap();
            let (_, path) = passage_time(&f, Site::new(0, 0), Site::new(14, 13)).unwrap();
            let n = path.sites.len();
            for (i, j) in [(0, n / 2), (n / 4, 3 * n / 4), (1, n - 1)] {
                if i < j {
                    assert!(subpath_is_geodesic(&f, &path.sites[i..=j]).unwrap(), "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn sandwich_trivial_branches() {
        // p = 1: every origin percolates, the sandwich is the q-path itself
        let w = Window::square(-40, 40).unwrap();
        let f = PassageField::sample(w, 1.0, atom2(), 2).unwrap();
        let fwd = LevelTable::compute(&f, Orientation::Forward);
        let anti = LevelTable::compute(&f, Orientation::Anti);
        let out = sandwich_geodesic(&f, &fwd, &anti, Site::new(0, 0), 1.0, 8, 20).unwrap();
        assert!(out.region.is_none());
        assert_eq!(out.path.sites.last(), Some(&Site::new(20, 0)));
        assert_eq!(out.path.total_time, 20.0);
    }

    #[test]
    fn sandwich_encloses_non_percolating_origins() {
        let mut built = 0;
        for seed in 0..400u64 {
            let w = Window::square(-220, 220).unwrap();
            let f = PassageField::sample(w, 0.7, atom2(), seed).unwrap();
            let fwd = LevelTable::compute(&f, Orientation::Forward);
            if fwd.level(Site::new(0, 0)).unwrap() == ESCAPES {
                continue;
            }
            let anti = LevelTable::compute(&f, Orientation::Anti);
            let out = match sandwich_geodesic(&f, &fwd, &anti, Site::new(0, 0), 0.5, 24, 150) {
                Ok(o) => o,
                Err(Error::WindowExhausted) | Err(Error::CensoredBeforeFound) => continue,
                Err(e) => panic!("seed {seed}: {e}"),
            };
            built += 1;
            let region = out.region.as_ref().unwrap();
            assert!(region.contains(Site::new(0, 0)));
            // the spliced prefix stays inside the region
            let meeting = region.forward_meeting();
            let k = out
                .path
                .sites
                .iter()
                .position(|&s| s == meeting)
                .expect("meeting point on the path");
            for s in &out.path.sites[..=k] {
                assert!(region.contains(*s), "seed {seed} site {s:?} left the region");
            }
            // restricted time equals the free passage time
            let (tau, _) = passage_time(&f, Site::new(0, 0), meeting).unwrap();
            assert_eq!(tau, path_time(&f, &out.path.sites[..=k]).unwrap(), "seed {seed}");
            if built >= 12 {
                break;
            }
        }
        assert!(built >= 5, "only {built} sandwich constructions succeeded");
    }

    #[test]
    fn two_sided_concatenation() {
        // p = 1, q = 1: horizontal line through the site
        let w = Window::square(-30, 30).unwrap();
        let f = PassageField::sample(w, 1.0, atom2(), 7).unwrap();
        let fwd = LevelTable::compute(&f, Orientation::Forward);
        let anti = LevelTable::compute(&f, Orientation::Anti);
        let g = bi_infinite_geodesic(&f, &fwd, &anti, Site::new(0, 0), 1.0, 5, 10).unwrap();
        assert_eq!(g.sites.first(), Some(&Site::new(-10, 0)));
        assert_eq!(g.sites.last(), Some(&Site::new(10, 0)));
        assert!(g.sites.iter().all(|s| s.t == 0));
        // the centered length-2 subpath is a geodesic
        let mid = g.sites.iter().position(|&s| s == Site::new(0, 0)).unwrap();
        assert!(subpath_is_geodesic(&f, &g.sites[mid - 1..=mid + 1]).unwrap());

        // non-bidirectional site is refused
        let closed = PassageField::from_pattern(w, 0.5, atom2(), 0, |_, _| false, |_| 0.5).unwrap();
        let cf = LevelTable::compute(&closed, Orientation::Forward);
        let ca = LevelTable::compute(&closed, Orientation::Anti);
        assert_eq!(
            bi_infinite_geodesic(&closed, &cf, &ca, Site::new(0, 0), 0.5, 5, 10).unwrap_err(),
            Error::NotBidirectional
        );
    }
}

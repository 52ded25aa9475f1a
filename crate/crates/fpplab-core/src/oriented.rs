//! Longest-oriented-open-path tables and window-escape percolation proxies.
//!
//! `l(x,t)` is the length of the longest oriented open path starting at
//! `(x,t)` inside the window. Sites whose longest path reaches the far
//! boundary carry the [`ESCAPES`] sentinel: their true length cannot be
//! determined from the window, and under a supercritical law a sentinel at
//! distance `>= escape_margin` from the far boundary is the finite-window
//! proxy for membership in the set of percolation points.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{Axis, Orientation, PassageField, Site, Window};
use crate::{Error, Result};

/// Sentinel level: the longest open path from this site leaves the window.
pub const ESCAPES: u32 = u32::MAX;

#[inline]
fn bump(v: u32) -> u32 {
    if v == ESCAPES {
        ESCAPES
    } else {
        v + 1
    }
}

/// Longest-path lengths for one orientation of a field's window.
#[derive(Debug, Clone)]
pub struct LevelTable {
    window: Window,
    orientation: Orientation,
    l: Vec<u32>,
}

impl LevelTable {
    /// Runs the dynamic program. Values satisfy
    /// `l(x,t) = 1 + max { l(y,s) : (y,s) oriented neighbour, edge open }`
    /// with 0 when both oriented edges are closed; the sentinel propagates
    /// through open edges and seeds the far boundary.
    pub fn compute(field: &PassageField, orientation: Orientation) -> Self {
        let window = field.window();
        let w = window.width();
        let h = window.height();
        let mut l = vec![0u32; w * h];
        match orientation {
            Orientation::Forward => {
                // reverse raster order: (x+1,t) and (x,t+1) are both done
                for row in (0..h).rev() {
                    let base = row * w;
                    if row + 1 == h {
                        l[base..base + w].fill(ESCAPES);
                        continue;
                    }
                    l[base + w - 1] = ESCAPES;
                    for col in (0..w - 1).rev() {
                        let idx = base + col;
                        let mut best = 0u32;
                        if field.open_at_index(idx, Axis::Right) {
                            best = best.max(bump(l[idx + 1]));
                        }
                        if field.open_at_index(idx, Axis::Up) {
                            best = best.max(bump(l[idx + w]));
                        }
                        l[idx] = best;
                    }
                }
            }
            Orientation::Anti => {
                // anti steps traverse the stored edges of the left/lower
                // neighbour
                for row in 0..h {
                    let base = row * w;
                    if row == 0 {
                        l[base..base + w].fill(ESCAPES);
                        continue;
                    }
                    l[base] = ESCAPES;
                    for col in 1..w {
                        let idx = base + col;
                        let mut best = 0u32;
                        if field.open_at_index(idx - 1, Axis::Right) {
                            best = best.max(bump(l[idx - 1]));
                        }
                        if field.open_at_index(idx - w, Axis::Up) {
                            best = best.max(bump(l[idx - w]));
                        }
                        l[idx] = best;
                    }
                }
            }
        }
        LevelTable { window, orientation, l }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Longest-path length at `site`, `ESCAPES` when it leaves the window.
    pub fn level(&self, site: Site) -> Result<u32> {
        if !self.window.contains(site) {
            return Err(Error::OutOfWindow);
        }
        Ok(self.level_unchecked(site))
    }

    #[inline]
    pub(crate) fn level_unchecked(&self, site: Site) -> u32 {
        self.l[self.window.index(site)]
    }

    /// `l_k = min(l, k)`; the sentinel truncates to `k`.
    pub fn truncated(&self, site: Site, k: u32) -> Result<u32> {
        Ok(self.level(site)?.min(k))
    }

    #[inline]
    pub(crate) fn truncated_unchecked(&self, site: Site, k: u32) -> u32 {
        self.level_unchecked(site).min(k)
    }

    /// True iff the site carries the escape sentinel.
    pub fn escapes(&self, site: Site) -> Result<bool> {
        Ok(self.level(site)? == ESCAPES)
    }
}

/// Finite-window verdict about membership in the percolation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PercStatus {
    /// The longest open path leaves the window.
    Escapes,
    /// The open cluster dies inside the window at the stated length, at a
    /// safe distance from the far boundary.
    Finite(u32),
    /// Too close to the far boundary for a trustworthy finite verdict.
    Censored,
}

/// Classifies a site with the given escape margin.
pub fn perc_status(table: &LevelTable, site: Site, escape_margin: u32) -> Result<PercStatus> {
    if escape_margin == 0 {
        return Err(Error::Config("escape margin must be >= 1"));
    }
    let l = table.level(site)?;
    if l == ESCAPES {
        return Ok(PercStatus::Escapes);
    }
    if table.window.far_distance(site, table.orientation) >= escape_margin {
        Ok(PercStatus::Finite(l))
    } else {
        Ok(PercStatus::Censored)
    }
}

/// The oriented neighbours realizing `l_{k-1}(y,s) + 1 = l_k(x,t)` through
/// open edges. Empty exactly when both oriented edges are closed (or leave
/// the window).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Maximizers {
    /// The x-directed candidate: `(x+1,t)` forward, `(x-1,t)` anti.
    pub x_step: Option<Site>,
    /// The t-directed candidate: `(x,t+1)` forward, `(x,t-1)` anti.
    pub t_step: Option<Site>,
}

impl Maximizers {
    pub fn count(&self) -> usize {
        self.x_step.is_some() as usize + self.t_step.is_some() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn contains(&self, s: Site) -> bool {
        self.x_step == Some(s) || self.t_step == Some(s)
    }
}

/// Computes the maximizer set `M_k` at `site` for truncation level `k >= 1`.
pub fn maximizer_set(
    field: &PassageField,
    table: &LevelTable,
    site: Site,
    k: u32,
) -> Result<Maximizers> {
    if k == 0 {
        return Err(Error::Config("truncation level k must be >= 1"));
    }
    let lk = table.truncated(site, k)?;
    let orientation = table.orientation;
    let mut out = Maximizers { x_step: None, t_step: None };
    for (axis, slot) in [(Axis::Right, 0usize), (Axis::Up, 1usize)] {
        if field.step_open(site, orientation, axis) == Some(true) {
            let (dx, dt) = orientation.step(axis);
            let nbr = site.offset(dx, dt);
            if table.truncated_unchecked(nbr, k - 1) + 1 == lk {
                match slot {
                    0 => out.x_step = Some(nbr),
                    _ => out.t_step = Some(nbr),
                }
            }
        }
    }
    Ok(out)
}

/// True iff the site escapes in both orientations and sits at least
/// `margin` from every window side, so both verdicts are trustworthy.
pub fn is_bidirectional(
    fwd: &LevelTable,
    anti: &LevelTable,
    site: Site,
    margin: u32,
) -> Result<bool> {
    if !fwd.window.contains(site) {
        return Err(Error::OutOfWindow);
    }
    Ok(fwd.window.boundary_distance(site) >= margin
        && fwd.level_unchecked(site) == ESCAPES
        && anti.level_unchecked(site) == ESCAPES)
}

/// All uncensored bi-directional percolation points of the window.
pub fn bidirectional_scan(fwd: &LevelTable, anti: &LevelTable, margin: u32) -> Vec<Site> {
    let w = fwd.window;
    let mut out = Vec::new();
    let m = margin as i32;
    for t in w.t_min + m..=w.t_max - m {
        for x in w.x_min + m..=w.x_max - m {
            let s = Site::new(x, t);
            if fwd.level_unchecked(s) == ESCAPES && anti.level_unchecked(s) == ESCAPES {
                out.push(s);
            }
        }
    }
    out
}

/// Nearest bi-directional points on the origin's anti-diagonal: the smallest
/// `j > 0` and largest `j < 0` such that `origin + (j, -j)` is bi-directional
/// and uncensored. Fails with [`Error::CensoredBeforeFound`] if a scan leaves
/// the safe region first.
pub fn nearest_bidirectional_on_antidiagonal(
    fwd: &LevelTable,
    anti: &LevelTable,
    origin: Site,
    margin: u32,
) -> Result<(i32, i32)> {
    if !fwd.window.contains(origin) {
        return Err(Error::OutOfWindow);
    }
    let scan = |dir: i32| -> Result<i32> {
        let mut j = dir;
        loop {
            let s = origin.offset(j, -j);
            if !fwd.window.contains(s) || fwd.window.boundary_distance(s) < margin {
                return Err(Error::CensoredBeforeFound);
            }
            if fwd.level_unchecked(s) == ESCAPES && anti.level_unchecked(s) == ESCAPES {
                return Ok(j);
            }
            j += dir;
        }
    };
    let j_r = scan(1)?;
    let j_l = scan(-1)?;
    Ok((j_r, j_l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ExcessDistribution;

    pub(crate) fn atom2() -> ExcessDistribution {
        ExcessDistribution::Atom { value: 2.0 }
    }

    /// Exhaustive oracle: enumerates every oriented open path from `site` by
    /// depth-first search. Independent of the DP.
    pub(crate) fn level_by_enumeration(
        field: &PassageField,
        orientation: Orientation,
        site: Site,
    ) -> u32 {
        let w = field.window();
        let on_far_boundary = |s: Site| w.far_distance(s, orientation) == 0;
        if on_far_boundary(site) {
            return ESCAPES;
        }
        let mut best = 0u32;
        // stack of (site, depth, next axis to try)
        let mut stack = vec![(site, 0u32, 0u8)];
        while let Some((s, depth, tried)) = stack.pop() {
            if tried >= 2 {
                continue;
            }
            stack.push((s, depth, tried + 1));
            let axis = if tried == 0 { Axis::Right } else { Axis::Up };
            if field.step_open(s, orientation, axis) == Some(true) {
                let (dx, dt) = orientation.step(axis);
                let nxt = s.offset(dx, dt);
                if on_far_boundary(nxt) {
                    return ESCAPES;
                }
                best = best.max(depth + 1);
                stack.push((nxt, depth + 1, 0));
            }
        }
        best
    }

    fn pattern_field(
        window: Window,
        open_right: &[(i32, i32)],
        open_up: &[(i32, i32)],
    ) -> PassageField {
        let r: Vec<Site> = open_right.iter().map(|&(x, t)| Site::new(x, t)).collect();
        let u: Vec<Site> = open_up.iter().map(|&(x, t)| Site::new(x, t)).collect();
        PassageField::from_pattern(
            window,
            0.5,
            atom2(),
            0,
            move |s, a| match a {
                Axis::Right => r.contains(&s),
                Axis::Up => u.contains(&s),
            },
            |_| 0.5,
        )
        .unwrap()
    }

    #[test]
    fn hand_pattern_3x3() {
        // interior values computed by hand; all boundary sites escape
        let w = Window::square(0, 2).unwrap();
        let f = pattern_field(w, &[(0, 0)], &[(1, 0)]);
        let t = LevelTable::compute(&f, Orientation::Forward);
        assert_eq!(t.level(Site::new(0, 0)).unwrap(), 2);
        assert_eq!(t.level(Site::new(1, 0)).unwrap(), 1);
        assert_eq!(t.level(Site::new(0, 1)).unwrap(), 0);
        assert_eq!(t.level(Site::new(1, 1)).unwrap(), 0);
        for s in [Site::new(2, 0), Site::new(2, 2), Site::new(0, 2)] {
            assert_eq!(t.level(s).unwrap(), ESCAPES);
        }
    }

    #[test]
    fn both_edges_closed_means_zero() {
        let w = Window::square(0, 4).unwrap();
        let f = pattern_field(w, &[], &[]);
        let t = LevelTable::compute(&f, Orientation::Forward);
        assert_eq!(t.level(Site::new(1, 1)).unwrap(), 0);
        let a = LevelTable::compute(&f, Orientation::Anti);
        assert_eq!(a.level(Site::new(3, 3)).unwrap(), 0);
    }

    #[test]
    fn full_field_escapes_everywhere() {
        let w = Window::square(0, 12).unwrap();
        let f = PassageField::sample(w, 1.0, atom2(), 5).unwrap();
        for orientation in [Orientation::Forward, Orientation::Anti] {
            let t = LevelTable::compute(&f, orientation);
            for s in w.sites() {
                assert_eq!(t.level(s).unwrap(), ESCAPES);
            }
        }
    }

    #[test]
    fn dp_matches_enumeration_on_random_fields() {
        for seed in 0..40u64 {
            let w = Window::new(-3, 4, 0, 6).unwrap();
            let f = PassageField::sample(w, 0.55, atom2(), seed).unwrap();
            for orientation in [Orientation::Forward, Orientation::Anti] {
                let t = LevelTable::compute(&f, orientation);
                for s in w.sites() {
                    assert_eq!(
                        t.level(s).unwrap(),
                        level_by_enumeration(&f, orientation, s),
                        "seed {seed} site {s:?} {orientation:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn truncation() {
        let w = Window::square(0, 5).unwrap();
        let f = pattern_field(w, &[(0, 0), (1, 0), (2, 0)], &[]);
        let t = LevelTable::compute(&f, Orientation::Forward);
        assert_eq!(t.level(Site::new(0, 0)).unwrap(), 3);
        assert_eq!(t.truncated(Site::new(0, 0), 2).unwrap(), 2);
        assert_eq!(t.truncated(Site::new(0, 1), 5).unwrap(), 0);
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let tf = LevelTable::compute(&full, Orientation::Forward);
        assert_eq!(tf.truncated(Site::new(1, 1), 7).unwrap(), 7);
        assert!(t.truncated(Site::new(9, 9), 1).is_err());
    }

    #[test]
    fn maximizers_match_definition() {
        for seed in 0..25u64 {
            let w = Window::square(0, 6).unwrap();
            let f = PassageField::sample(w, 0.6, atom2(), seed).unwrap();
            let t = LevelTable::compute(&f, Orientation::Forward);
            for s in w.sites() {
                for k in 1..=4u32 {
                    let m = maximizer_set(&f, &t, s, k).unwrap();
                    let lk = t.truncated(s, k).unwrap();
                    for (axis, field_of) in [(Axis::Right, m.x_step), (Axis::Up, m.t_step)] {
                        let (dx, dt) = Orientation::Forward.step(axis);
                        let nbr = s.offset(dx, dt);
                        let expect = f.step_open(s, Orientation::Forward, axis) == Some(true)
                            && t.truncated(nbr, k - 1).unwrap() + 1 == lk;
                        assert_eq!(field_of.is_some(), expect, "seed {seed} {s:?} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn maximizers_trivial_cases() {
        let w = Window::square(0, 4).unwrap();
        let closed = pattern_field(w, &[], &[]);
        let t = LevelTable::compute(&closed, Orientation::Forward);
        for k in 1..5 {
            assert!(maximizer_set(&closed, &t, Site::new(1, 1), k).unwrap().is_empty());
        }
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let tf = LevelTable::compute(&full, Orientation::Forward);
        for k in 1..4 {
            assert_eq!(maximizer_set(&full, &tf, Site::new(1, 1), k).unwrap().count(), 2);
        }
        assert!(maximizer_set(&full, &tf, Site::new(1, 1), 0).is_err());
    }

    #[test]
    fn anti_table_equals_forward_of_point_reflection() {
        let w = Window::new(0, 7, 0, 7).unwrap();
        let cx = w.x_min + w.x_max;
        let ct = w.t_min + w.t_max;
        for seed in 0..10u64 {
            let f = PassageField::sample(w, 0.6, atom2(), seed).unwrap();
            let f2 = f.clone();
            let reflected = PassageField::from_pattern(
                w,
                0.6,
                atom2(),
                seed,
                move |s, a| {
                    let base = match a {
                        Axis::Right => Site::new(cx - s.x - 1, ct - s.t),
                        Axis::Up => Site::new(cx - s.x, ct - s.t - 1),
                    };
                    // edges leaving the window have no mirror image
                    f2.is_open(base, a).unwrap_or(false)
                },
                |_| 0.5,
            )
            .unwrap();
            let anti = LevelTable::compute(&f, Orientation::Anti);
            let fwd_reflected = LevelTable::compute(&reflected, Orientation::Forward);
            for s in w.sites() {
                let image = Site::new(cx - s.x, ct - s.t);
                assert_eq!(
                    anti.level(s).unwrap(),
                    fwd_reflected.level(image).unwrap(),
                    "seed {seed} {s:?}"
                );
            }
        }
    }

    #[test]
    fn raising_p_never_lowers_levels() {
        let w = Window::square(0, 30).unwrap();
        for seed in 0..5u64 {
            let lo = PassageField::sample(w, 0.55, atom2(), seed).unwrap();
            let hi = PassageField::sample(w, 0.75, atom2(), seed).unwrap();
            let tl = LevelTable::compute(&lo, Orientation::Forward);
            let th = LevelTable::compute(&hi, Orientation::Forward);
            for s in w.sites() {
                let (a, b) = (tl.level(s).unwrap(), th.level(s).unwrap());
                // ESCAPES is u32::MAX, so plain integer order works
                assert!(b >= a, "seed {seed} {s:?}: {a} > {b}");
            }
        }
    }

    #[test]
    fn finite_verdicts_survive_window_growth() {
        let margin = 6;
        let small = Window::square(0, 24).unwrap();
        let big = Window::square(-10, 40).unwrap();
        for seed in 0..10u64 {
            let fs = PassageField::sample(small, 0.6, atom2(), seed).unwrap();
            let fb = PassageField::sample(big, 0.6, atom2(), seed).unwrap();
            let ts = LevelTable::compute(&fs, Orientation::Forward);
            let tb = LevelTable::compute(&fb, Orientation::Forward);
            for s in small.sites() {
                if let PercStatus::Finite(l) = perc_status(&ts, s, margin).unwrap() {
                    assert_eq!(tb.level(s).unwrap(), l, "seed {seed} {s:?}");
                }
            }
        }
    }

    #[test]
    fn perc_status_cases() {
        let w = Window::square(0, 99).unwrap();
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let t = LevelTable::compute(&full, Orientation::Forward);
        assert_eq!(perc_status(&t, Site::new(50, 50), 50).unwrap(), PercStatus::Escapes);
        assert!(perc_status(&t, Site::new(1, 1), 0).is_err());

        let closed = pattern_field(w, &[], &[]);
        let tc = LevelTable::compute(&closed, Orientation::Forward);
        assert_eq!(perc_status(&tc, Site::new(20, 20), 50).unwrap(), PercStatus::Finite(0));
        assert_eq!(perc_status(&tc, Site::new(98, 20), 50).unwrap(), PercStatus::Censored);
    }

    #[test]
    fn bidirectional_scan_full_field() {
        let w = Window::square(0, 20).unwrap();
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let fwd = LevelTable::compute(&full, Orientation::Forward);
        let anti = LevelTable::compute(&full, Orientation::Anti);
        let margin = 3;
        let hits = bidirectional_scan(&fwd, &anti, margin);
        assert_eq!(hits.len(), 15 * 15);
        let (jr, jl) =
            nearest_bidirectional_on_antidiagonal(&fwd, &anti, Site::new(10, 10), margin)
                .unwrap();
        assert_eq!((jr, jl), (1, -1));
    }

    #[test]
    fn blocked_site_is_excluded() {
        // all edges open except the two anti-step edges out of (10, 10)
        let w = Window::square(0, 20).unwrap();
        let s = Site::new(10, 10);
        let f = PassageField::from_pattern(
            w,
            0.99,
            atom2(),
            0,
            move |site, a| !(a == Axis::Right && site == Site::new(9, 10))
                && !(a == Axis::Up && site == Site::new(10, 9)),
            |_| 0.5,
        )
        .unwrap();
        let fwd = LevelTable::compute(&f, Orientation::Forward);
        let anti = LevelTable::compute(&f, Orientation::Anti);
        assert_eq!(anti.level(s).unwrap(), 0);
        assert_eq!(level_by_enumeration(&f, Orientation::Anti, s), 0);
        let hits = bidirectional_scan(&fwd, &anti, 3);
        assert!(!hits.contains(&s));
        assert!(hits.contains(&Site::new(9, 10)));
        assert!(is_bidirectional(&fwd, &anti, Site::new(11, 10), 3).unwrap());
        assert!(!is_bidirectional(&fwd, &anti, s, 3).unwrap());
    }

    #[test]
    fn scan_errors_when_censored_first() {
        let w = Window::square(0, 9).unwrap();
        let closed = pattern_field(w, &[], &[]);
        let fwd = LevelTable::compute(&closed, Orientation::Forward);
        let anti = LevelTable::compute(&closed, Orientation::Anti);
        assert_eq!(
            nearest_bidirectional_on_antidiagonal(&fwd, &anti, Site::new(5, 5), 3).unwrap_err(),
            Error::CensoredBeforeFound
        );
    }
}

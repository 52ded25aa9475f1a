//! Randomized greedy paths on the oriented cluster and their regeneration
//! structure.
//!
//! The finite construction `gamma_k` takes `k` steps from the origin, step
//! `j+1` following a maximizer of the level table at truncation `k - j`;
//! two-element maximizer sets are broken towards the x-step when the site's
//! uniform is at most `q`. Whenever the tip of some `gamma_k` carries the
//! escape sentinel the prefix up to `k` freezes, which yields the stabilized
//! path together with its regeneration times `T_j` and increments `Y_j`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::lattice::{Axis, Displacement, PassageField, Site};
use crate::oriented::{maximizer_set, LevelTable, Maximizers, ESCAPES};
use crate::stats;
use crate::{Error, Result};

/// One regeneration record: at path index `time` the construction tip is a
/// percolation point and `y` is the displacement since the previous record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regeneration {
    pub time: u32,
    pub y: Displacement,
}

/// A stabilized q-path with its regeneration records.
#[derive(Debug, Clone)]
pub struct QPathTrace {
    pub origin: Site,
    pub q: f64,
    /// `steps[0]` is the origin; consecutive steps are oriented open edges.
    pub steps: Vec<Site>,
    /// Index of the last frozen prefix (the final regeneration time).
    pub stabilized_upto: u32,
    pub regenerations: Vec<Regeneration>,
    /// True when the construction had to stop because it consulted a site
    /// within the escape margin of the far boundary.
    pub censored: bool,
}

impl QPathTrace {
    /// Regeneration increments `(T_j - T_{j-1}, Y_j)`.
    pub fn increments(&self) -> Vec<(u32, Displacement)> {
        let mut out = Vec::with_capacity(self.regenerations.len());
        let mut prev = 0u32;
        for r in &self.regenerations {
            out.push((r.time - prev, r.y));
            prev = r.time;
        }
        out
    }

    /// Site of the path at index `n`.
    pub fn site_at(&self, n: u32) -> Site {
        self.steps[n as usize]
    }

    /// Checks the structural trace invariants; returns a description of the
    /// first violation.
    pub fn validate(&self, field: &PassageField, table: &LevelTable) -> core::result::Result<(), &'static str> {
        if self.steps.first() != Some(&self.origin) {
            return Err("path must start at the origin");
        }
        let orientation = table.orientation();
        for w in self.steps.windows(2) {
            let d = Displacement::between(w[0], w[1]);
            let legal = [orientation.step(Axis::Right), orientation.step(Axis::Up)];
            if !legal.contains(&(d.dx, d.dt)) {
                return Err("step is not a unit oriented move");
            }
            let axis = if d.dx != 0 { Axis::Right } else { Axis::Up };
            if field.step_open(w[0], orientation, axis) != Some(true) {
                return Err("step crosses a closed or missing edge");
            }
        }
        let mut prev_time = 0u32;
        let mut acc = (0i64, 0i64);
        for r in &self.regenerations {
            if r.time <= prev_time {
                return Err("regeneration times must increase");
            }
            if r.y.l1() > (r.time - prev_time) as u64 {
                return Err("increment exceeds elapsed time");
            }
            if table.level_unchecked(self.steps[r.time as usize]) != ESCAPES {
                return Err("regeneration tip does not escape");
            }
            acc.0 += r.y.dx as i64;
            acc.1 += r.y.dt as i64;
            let here = self.steps[r.time as usize];
            if (here.x as i64 - self.origin.x as i64, here.t as i64 - self.origin.t as i64) != acc {
                return Err("increments do not telescope to the path position");
            }
            prev_time = r.time;
        }
        if self.stabilized_upto != prev_time {
            return Err("stabilized_upto must equal the last regeneration time");
        }
        if self.steps.len() != self.stabilized_upto as usize + 1 {
            return Err("steps must end at the last regeneration");
        }
        Ok(())
    }
}

/// Applies the tie-breaking case table to a maximizer set.
#[inline]
fn choose(m: Maximizers, u: f64, q: f64) -> Result<Site> {
    match (m.x_step, m.t_step) {
        (Some(x), None) => Ok(x),
        (None, Some(t)) => Ok(t),
        (Some(x), Some(t)) => Ok(if u <= q { x } else { t }),
        (None, None) => Err(Error::EmptyMaximizerSet),
    }
}

/// One step of the construction at truncation level `k`: the x-step if it is
/// the unique maximizer or the tie-break favours it, the t-step otherwise.
pub fn select_step(
    field: &PassageField,
    table: &LevelTable,
    site: Site,
    q: f64,
    k: u32,
) -> Result<Site> {
    let m = maximizer_set(field, table, site, k)?;
    choose(m, field.uniform(site)?, q)
}

/// The finite construction `gamma_k`: a path of `k` oriented open steps from
/// `origin`, step `j+1` using truncation level `k - j`. Requires
/// `l(origin) >= k`.
pub fn build_gamma_k(
    field: &PassageField,
    table: &LevelTable,
    origin: Site,
    q: f64,
    k: u32,
) -> Result<Vec<Site>> {
    if k == 0 {
        return Err(Error::Config("gamma_k needs k >= 1"));
    }
    if table.level(origin)? < k {
        return Err(Error::InsufficientLength);
    }
    let mut path = Vec::with_capacity(k as usize + 1);
    path.push(origin);
    let mut cur = origin;
    for j in 0..k {
        cur = select_step(field, table, cur, q, k - j)?;
        path.push(cur);
    }
    Ok(path)
}

/// Builds the stabilized q-path from a percolating origin.
///
/// Segments between regenerations are found by horizon search: from the last
/// regeneration site, `gamma_delta` is rebuilt for `delta = 1, 2, ...` until
/// its tip carries the escape sentinel; the prefix then freezes and the
/// search restarts from the new tip. The construction stops cleanly once
/// `max_steps` is reached, and is truncated at the last regeneration and
/// marked censored as soon as it consults a site within `escape_margin` of
/// the far boundary.
pub fn stabilized_path(
    field: &PassageField,
    table: &LevelTable,
    origin: Site,
    q: f64,
    escape_margin: u32,
    max_steps: u32,
) -> Result<QPathTrace> {
    if table.level(origin)? != ESCAPES {
        return Err(Error::OriginNotPercolating);
    }
    let window = field.window();
    let orientation = table.orientation();
    let safe = |s: Site| window.far_distance(s, orientation) >= escape_margin;

    let mut steps = vec![origin];
    let mut regenerations: Vec<Regeneration> = Vec::new();
    let mut anchor = origin;
    let mut anchor_time = 0u32;
    let mut censored = !safe(origin);

    'outer: while !censored && anchor_time < max_steps {
        let budget = max_steps - anchor_time;
        let mut found: Option<Vec<Site>> = None;
        for delta in 1..=budget {
            let mut cur = anchor;
            let mut segment = Vec::with_capacity(delta as usize);
            for i in 0..delta {
                let m = maximizer_set(field, table, cur, delta - i)?;
                let next = choose(m, field.uniform_unchecked(cur), q)?;
                if !safe(next) {
                    censored = true;
                    break 'outer;
                }
                segment.push(next);
                cur = next;
            }
            if table.level_unchecked(cur) == ESCAPES {
                found = Some(segment);
                break;
            }
        }
        match found {
            Some(segment) => {
                let tip = *segment.last().unwrap();
                anchor_time += segment.len() as u32;
                steps.extend(segment);
                regenerations.push(Regeneration {
                    time: anchor_time,
                    y: Displacement::between(anchor, tip),
                });
                anchor = tip;
            }
            None => break, // budget exhausted without a further regeneration
        }
    }

    let stabilized_upto = regenerations.last().map_or(0, |r| r.time);
    steps.truncate(stabilized_upto as usize + 1);
    Ok(QPathTrace { origin, q, steps, stabilized_upto, regenerations, censored })
}

/// Direction estimate from pooled regeneration increments.
#[derive(Debug, Clone, Copy)]
pub struct DirectionEstimate {
    pub q: f64,
    /// `arg` of the mean increment, radians in `[0, pi/2]` for forward paths.
    pub theta_hat: f64,
    pub mean_t: f64,
    pub mean_y: (f64, f64),
    /// Half-width of the bootstrap 95% interval.
    pub ci_halfwidth: f64,
    pub n_regenerations: usize,
}

/// Minimum increments for a direction estimate.
pub const MIN_DIRECTION_SAMPLES: usize = 100;
/// Default bootstrap resample count.
pub const DIRECTION_BOOTSTRAP: usize = 2000;

fn angle_of_indices(increments: &[(u32, Displacement)], idx: &[usize]) -> f64 {
    let mut sx = 0i64;
    let mut st = 0i64;
    for &i in idx {
        sx += increments[i].1.dx as i64;
        st += increments[i].1.dt as i64;
    }
    libm::atan2(st as f64, sx as f64)
}

/// Estimates the asymptotic direction `theta(q)` from i.i.d. regeneration
/// increments, with a percentile-bootstrap confidence interval.
pub fn estimate_direction(
    increments: &[(u32, Displacement)],
    q: f64,
    resamples: usize,
    rng: &mut impl Rng,
) -> Result<DirectionEstimate> {
    let n = increments.len();
    if n < MIN_DIRECTION_SAMPLES {
        return Err(Error::InsufficientSamples);
    }
    let all: Vec<usize> = (0..n).collect();
    let theta_hat = angle_of_indices(increments, &all);
    let mean_t = increments.iter().map(|&(t, _)| t as f64).sum::<f64>() / n as f64;
    let mean_y = (
        increments.iter().map(|&(_, y)| y.dx as f64).sum::<f64>() / n as f64,
        increments.iter().map(|&(_, y)| y.dt as f64).sum::<f64>() / n as f64,
    );
    let (lo, hi) = stats::bootstrap_ci_95(n, resamples, rng, |idx| {
        angle_of_indices(increments, idx)
    });
    Ok(DirectionEstimate {
        q,
        theta_hat,
        mean_t,
        mean_y,
        ci_halfwidth: 0.5 * (hi - lo),
        n_regenerations: n,
    })
}

/// Delta-method standard error for the direction angle; a fast alternative
/// to the bootstrap interval.
pub fn direction_stderr_delta(increments: &[(u32, Displacement)]) -> Result<f64> {
    let n = increments.len();
    if n < MIN_DIRECTION_SAMPLES {
        return Err(Error::InsufficientSamples);
    }
    let nf = n as f64;
    let mx = increments.iter().map(|&(_, y)| y.dx as f64).sum::<f64>() / nf;
    let mt = increments.iter().map(|&(_, y)| y.dt as f64).sum::<f64>() / nf;
    let mut vxx = 0.0;
    let mut vtt = 0.0;
    let mut vxt = 0.0;
    for &(_, y) in increments {
        let ex = y.dx as f64 - mx;
        let et = y.dt as f64 - mt;
        vxx += ex * ex;
        vtt += et * et;
        vxt += ex * et;
    }
    let denom = nf * (nf - 1.0);
    vxx /= denom;
    vtt /= denom;
    vxt /= denom;
    // grad of atan2(mt, mx) is (-mt, mx) / r^2
    let r2 = mx * mx + mt * mt;
    let var = (mt * mt * vxx - 2.0 * mx * mt * vxt + mx * mx * vtt) / (r2 * r2);
    Ok(libm::sqrt(var.max(0.0)))
}

/// Tail fit of regeneration waiting times `T_1` (or increments, which share
/// its law). Needs at least 1000 samples.
pub fn fit_regeneration_tail(samples: &[u32]) -> Result<stats::TailFit> {
    stats::fit_survival_tail(samples, 1000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Axis, ExcessDistribution, Orientation, Window};
    use crate::oriented::perc_status;
    use crate::oriented::PercStatus;
    use crate::streams::SplitMix64;

    fn atom2() -> ExcessDistribution {
        ExcessDistribution::Atom { value: 2.0 }
    }

    #[test]
    fn forced_and_tied_steps() {
        // only the right edge open: forced x-step whatever U and q
        let w = Window::square(0, 5).unwrap();
        let f = PassageField::from_pattern(
            w,
            0.5,
            atom2(),
            0,
            |s, a| a == Axis::Right && s.t == 0,
            |_| 0.99,
        )
        .unwrap();
        let t = LevelTable::compute(&f, Orientation::Forward);
        let step = select_step(&f, &t, Site::new(0, 0), 0.0, 1).unwrap();
        assert_eq!(step, Site::new(1, 0));

        // full field: both maximizers; q = 1 forces right, q = 0 forces up
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let tf = LevelTable::compute(&full, Orientation::Forward);
        for k in 1..4 {
            assert_eq!(select_step(&full, &tf, Site::new(1, 1), 1.0, k).unwrap(), Site::new(2, 1));
            assert_eq!(select_step(&full, &tf, Site::new(1, 1), 0.0, k).unwrap(), Site::new(1, 2));
        }

        // closed field: empty maximizer set is an error
        let closed = PassageField::from_pattern(w, 0.5, atom2(), 0, |_, _| false, |_| 0.5).unwrap();
        let tc = LevelTable::compute(&closed, Orientation::Forward);
        assert_eq!(
            select_step(&closed, &tc, Site::new(1, 1), 0.5, 1).unwrap_err(),
            Error::EmptyMaximizerSet
        );
    }

    #[test]
    fn hand_computed_case_table_walk() {
        // 4x4 window, explicit openness and uniforms, q = 0.5.
        //
        // Right edges open at (0,0),(1,0),(0,1),(1,1),(2,1); up edges open at
        // (0,0),(1,0),(2,0),(1,1). Uniforms: 0.3 at (0,0) (<= q, prefers
        // right), 0.7 at (1,0) (> q, prefers up), 0.2 at (1,1).
        let w = Window::square(0, 3).unwrap();
        let rights = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)];
        let ups = [(0, 0), (1, 0), (2, 0), (1, 1)];
        let f = PassageField::from_pattern(
            w,
            0.5,
            atom2(),
            0,
            move |s, a| match a {
                Axis::Right => rights.contains(&(s.x, s.t)),
                Axis::Up => ups.contains(&(s.x, s.t)),
            },
            |s| match (s.x, s.t) {
                (0, 0) => 0.3,
                (1, 0) => 0.7,
                (1, 1) => 0.2,
                _ => 0.9,
            },
        )
        .unwrap();
        let t = LevelTable::compute(&f, Orientation::Forward);
        // Hand evaluation of gamma_3 from (0,0):
        //   level 3 at (0,0): l3 = 3; both neighbours reach level 2 => tie,
        //     U = 0.3 <= 0.5 -> (1,0)
        //   level 2 at (1,0): l2 = 2; (2,0) has l1 = 1 (up edge open), (1,1)
        //     has l1 = 1 => tie, U = 0.7 > 0.5 -> (1,1)
        //   level 1 at (1,1): l1 = 1; both edges open => tie, U = 0.2 -> (2,1)
        let path = build_gamma_k(&f, &t, Site::new(0, 0), 0.5, 3).unwrap();
        assert_eq!(
            path,
            vec![Site::new(0, 0), Site::new(1, 0), Site::new(1, 1), Site::new(2, 1)]
        );
    }

    #[test]
    fn gamma_k_preconditions() {
        let w = Window::square(0, 4).unwrap();
        let f = PassageField::from_pattern(
            w,
            0.5,
            atom2(),
            0,
            |s, a| a == Axis::Right && s.t == 0 && s.x == 0,
            |_| 0.5,
        )
        .unwrap();
        let t = LevelTable::compute(&f, Orientation::Forward);
        assert_eq!(t.level(Site::new(0, 0)).unwrap(), 1);
        assert!(build_gamma_k(&f, &t, Site::new(0, 0), 0.5, 1).is_ok());
        assert_eq!(
            build_gamma_k(&f, &t, Site::new(0, 0), 0.5, 2).unwrap_err(),
            Error::InsufficientLength
        );
        assert!(build_gamma_k(&f, &t, Site::new(0, 0), 0.5, 0).is_err());
    }

    #[test]
    fn full_field_paths_are_straight_and_regenerate_every_step() {
        let w = Window::square(0, 40).unwrap();
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let t = LevelTable::compute(&full, Orientation::Forward);
        let rightmost = stabilized_path(&full, &t, Site::new(0, 0), 1.0, 4, 30).unwrap();
        assert!(!rightmost.censored);
        assert_eq!(rightmost.stabilized_upto, 30);
        for (j, r) in rightmost.regenerations.iter().enumerate() {
            assert_eq!(r.time, j as u32 + 1);
            assert_eq!((r.y.dx, r.y.dt), (1, 0));
        }
        assert_eq!(*rightmost.steps.last().unwrap(), Site::new(30, 0));

        let q_half = stabilized_path(&full, &t, Site::new(0, 0), 0.5, 4, 30).unwrap();
        for (j, r) in q_half.regenerations.iter().enumerate() {
            assert_eq!(r.time, j as u32 + 1);
            assert!(r.y.l1() == 1);
        }
        q_half.validate(&full, &t).unwrap();
    }

    #[test]
    fn traces_satisfy_invariants_on_random_fields() {
        for seed in 0..30u64 {
            let w = Window::square(-4, 140).unwrap();
            let f = PassageField::sample(w, 0.72, atom2(), seed).unwrap();
            let t = LevelTable::compute(&f, Orientation::Forward);
            if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
                continue;
            }
            let tr = stabilized_path(&f, &t, Site::new(0, 0), 0.4, 16, 90).unwrap();
            tr.validate(&f, &t).unwrap();
            // increments have L1 exactly equal to elapsed time for oriented steps
            for (dt, y) in tr.increments() {
                assert_eq!(y.l1(), dt as u64);
                assert!(y.dx >= 0 && y.dt >= 0);
            }
        }
    }

    #[test]
    fn anti_traces_mirror_forward() {
        for seed in 0..10u64 {
            let w = Window::square(-120, 8).unwrap();
            let f = PassageField::sample(w, 0.72, atom2(), seed).unwrap();
            let t = LevelTable::compute(&f, Orientation::Anti);
            if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
                continue;
            }
            let tr = stabilized_path(&f, &t, Site::new(0, 0), 0.5, 16, 80).unwrap();
            tr.validate(&f, &t).unwrap();
            for (dt, y) in tr.increments() {
                assert_eq!(y.l1(), dt as u64);
                assert!(y.dx <= 0 && y.dt <= 0);
            }
        }
    }

    #[test]
    fn frozen_prefixes_are_invariant_under_extension() {
        let mut rng = SplitMix64::new(77);
        let mut checked = 0;
        for seed in 0..40u64 {
            let w = Window::square(-4, 260).unwrap();
            let f = PassageField::sample(w, 0.7, atom2(), seed).unwrap();
            let t = LevelTable::compute(&f, Orientation::Forward);
            if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
                continue;
            }
            let tr = stabilized_path(&f, &t, Site::new(0, 0), 0.5, 20, 120).unwrap();
            if tr.censored || tr.regenerations.is_empty() {
                continue;
            }
            for r in tr.regenerations.iter().take(4) {
                let k = r.time;
                for _ in 0..3 {
                    let extra = 1 + (rng.next_u64() % 60) as u32;
                    let m = k + extra;
                    if t.level(Site::new(0, 0)).unwrap() < m {
                        continue;
                    }
                    let gamma_m = build_gamma_k(&f, &t, Site::new(0, 0), 0.5, m).unwrap();
                    assert_eq!(&gamma_m[..=k as usize], &tr.steps[..=k as usize]);
                    checked += 1;
                }
            }
        }
        assert!(checked > 30, "only {checked} prefix checks ran");
    }

    #[test]
    fn stabilized_path_equals_greedy_escape_walk() {
        // Independent characterization: from any sentinel site, the realized
        // step is the tie-break among neighbours that themselves carry the
        // sentinel.
        for seed in 0..25u64 {
            let w = Window::square(-4, 200).unwrap();
            let f = PassageField::sample(w, 0.7, atom2(), seed).unwrap();
            let t = LevelTable::compute(&f, Orientation::Forward);
            if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
                continue;
            }
            let q = 0.35;
            let tr = stabilized_path(&f, &t, Site::new(0, 0), q, 20, 100).unwrap();
            let mut cur = Site::new(0, 0);
            for idx in 1..=tr.stabilized_upto {
                let right = cur.offset(1, 0);
                let up = cur.offset(0, 1);
                let r_esc = f.step_open(cur, Orientation::Forward, Axis::Right) == Some(true)
                    && t.level(right).unwrap() == ESCAPES;
                let u_esc = f.step_open(cur, Orientation::Forward, Axis::Up) == Some(true)
                    && t.level(up).unwrap() == ESCAPES;
                cur = match (r_esc, u_esc) {
                    (true, false) => right,
                    (false, true) => up,
                    (true, true) => {
                        if f.uniform(cur).unwrap() <= q {
                            right
                        } else {
                            up
                        }
                    }
                    (false, false) => panic!("walk left the escape set"),
                };
                assert_eq!(cur, tr.site_at(idx), "seed {seed} index {idx}");
            }
        }
    }

    #[test]
    fn censoring_truncates_at_last_regeneration() {
        let w = Window::square(0, 40).unwrap();
        let full = PassageField::sample(w, 1.0, atom2(), 1).unwrap();
        let t = LevelTable::compute(&full, Orientation::Forward);
        // margin 30 leaves ten safe steps from the origin
        let tr = stabilized_path(&full, &t, Site::new(0, 0), 1.0, 30, 1000).unwrap();
        assert!(tr.censored);
        assert_eq!(tr.stabilized_upto, 10);
        assert_eq!(tr.steps.len(), 11);
        tr.validate(&full, &t).unwrap();
        // non-percolating origin is an error
        let closed = PassageField::from_pattern(w, 0.5, atom2(), 0, |_, _| false, |_| 0.5).unwrap();
        let tc = LevelTable::compute(&closed, Orientation::Forward);
        assert_eq!(
            stabilized_path(&closed, &tc, Site::new(5, 5), 0.5, 4, 10).unwrap_err(),
            Error::OriginNotPercolating
        );
    }

    #[test]
    fn q_coupling_keeps_paths_ordered() {
        // shared field and uniforms: the larger q never sits strictly left
        for seed in 0..20u64 {
            let w = Window::square(-4, 160).unwrap();
            let f = PassageField::sample(w, 0.72, atom2(), seed).unwrap();
            let t = LevelTable::compute(&f, Orientation::Forward);
            if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
                continue;
            }
            let lo = stabilized_path(&f, &t, Site::new(0, 0), 0.25, 16, 90).unwrap();
            let hi = stabilized_path(&f, &t, Site::new(0, 0), 0.75, 16, 90).unwrap();
            let n = lo.steps.len().min(hi.steps.len());
            for i in 0..n {
                assert!(
                    hi.steps[i].x >= lo.steps[i].x,
                    "seed {seed} step {i}: {:?} vs {:?}",
                    hi.steps[i],
                    lo.steps[i]
                );
            }
        }
    }

    #[test]
    fn diagonal_reflection_swaps_q_for_one_minus_q() {
        // swap x/t, replace U by 1-U and q by 1-q: paths map onto each other
        for seed in 0..10u64 {
            let w = Window::square(-4, 120).unwrap();
            let f = PassageField::sample(w, 0.7, atom2(), seed).unwrap();
            let f2 = f.clone();
            let f3 = f.clone();
            let reflected = PassageField::from_pattern(
                w,
                0.7,
                atom2(),
                seed,
                move |s, a| {
                    let m = Site::new(s.t, s.x);
                    match a {
                        Axis::Right => f2.is_open(m, Axis::Up).unwrap_or(false),
                        Axis::Up => f3.is_open(m, Axis::Right).unwrap_or(false),
                    }
                },
                {
                    let f4 = f.clone();
                    move |s| {
                        let u = f4.uniform(Site::new(s.t, s.x)).unwrap();
                        // keep the value inside [0,1)
                        (1.0 - u).min(1.0 - f64::EPSILON)
                    }
                },
            )
            .unwrap();
            let t = LevelTable::compute(&f, Orientation::Forward);
            let tr = LevelTable::compute(&reflected, Orientation::Forward);
            if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
                continue;
            }
            let q = 0.3;
            let a = stabilized_path(&f, &t, Site::new(0, 0), q, 16, 70).unwrap();
            let b = stabilized_path(&reflected, &tr, Site::new(0, 0), 1.0 - q, 16, 70).unwrap();
            let n = a.steps.len().min(b.steps.len());
            for i in 0..n {
                assert_eq!(a.steps[i], Site::new(b.steps[i].t, b.steps[i].x), "seed {seed}");
            }
        }
    }

    #[test]
    fn direction_estimate_trivial_values() {
        let mut rng = SplitMix64::new(5);
        let pure_x: Vec<(u32, Displacement)> =
            (0..200).map(|_| (1, Displacement { dx: 1, dt: 0 })).collect();
        let d = estimate_direction(&pure_x, 1.0, 200, &mut rng).unwrap();
        assert_eq!(d.theta_hat, 0.0);
        assert_eq!(d.mean_y, (1.0, 0.0));

        let diagonal: Vec<(u32, Displacement)> =
            (0..200).map(|_| (2, Displacement { dx: 1, dt: 1 })).collect();
        let d = estimate_direction(&diagonal, 0.5, 200, &mut rng).unwrap();
        assert!((d.theta_hat - core::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert_eq!(d.mean_t, 2.0);
        assert_eq!((d.mean_y.0 / d.mean_t, d.mean_y.1 / d.mean_t), (0.5, 0.5));

        assert_eq!(
            estimate_direction(&pure_x[..50], 1.0, 100, &mut rng).unwrap_err(),
            Error::InsufficientSamples
        );
        let se = direction_stderr_delta(&diagonal).unwrap();
        assert_eq!(se, 0.0); // no variance in the increments
    }

    #[test]
    fn regeneration_status_matches_table() {
        let w = Window::square(-4, 160).unwrap();
        let f = PassageField::sample(w, 0.7, atom2(), 12).unwrap();
        let t = LevelTable::compute(&f, Orientation::Forward);
        if t.level(Site::new(0, 0)).unwrap() != ESCAPES {
            return;
        }
        let tr = stabilized_path(&f, &t, Site::new(0, 0), 0.5, 24, 100).unwrap();
        for r in &tr.regenerations {
            assert_eq!(
                perc_status(&t, tr.site_at(r.time), 24).unwrap(),
                PercStatus::Escapes
            );
        }
    }
}

//! Rightmost-path speed and the flat-edge angular sector.
//!
//! The speed is read off the same regeneration ratios as every other
//! direction estimate: the rightmost path (`q = 1`) has L1-normalized
//! velocity `v` on the line `x + y = 1`, and the rotated coordinate
//! `alpha = (v_x - v_t) / sqrt(2)` parametrizes the flat edge between
//! `M = (1/2 + alpha/sqrt(2), 1/2 - alpha/sqrt(2))` and its swap `N`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::lattice::{Displacement, ExcessDistribution, Orientation, PassageField, Site, Window};
use crate::oriented::{LevelTable, ESCAPES};
use crate::qpath::{estimate_direction, stabilized_path, DirectionEstimate};
use crate::stats;
use crate::streams::{replica_seed, SplitMix64};
use crate::{Error, Result};

/// Flat-edge calibration derived from the rightmost-path speed.
#[derive(Debug, Clone, Copy)]
pub struct ConeEstimate {
    pub p: f64,
    /// Rotated-coordinate speed in `[0, 1/sqrt(2)]`.
    pub alpha_hat: f64,
    pub m_point: (f64, f64),
    pub n_point: (f64, f64),
    /// Angle of `M`, the lower edge of the percolation cone.
    pub theta_minus: f64,
    /// Angle of `N`, the upper edge.
    pub theta_plus: f64,
    pub alpha_ci_halfwidth: f64,
    pub theta_ci_halfwidth: f64,
    pub n_regenerations: usize,
    /// Fraction of replicas whose origin escaped the window.
    pub escape_rate: f64,
}

/// Escape-rate floor below which the law is treated as subcritical.
pub const ESCAPE_RATE_FLOOR: f64 = 0.05;

fn flat_edge_points(alpha: f64) -> ((f64, f64), (f64, f64)) {
    let off = alpha * FRAC_1_SQRT_2;
    // clamp the tiny negative overshoot of 1/sqrt(2) squared
    let m = ((0.5 + off).min(1.0), (0.5 - off).max(0.0));
    let n = (m.1, m.0);
    (m, n)
}

/// Pure algebra: cone geometry for a given speed.
pub fn cone_from_alpha(p: f64, alpha: f64) -> ConeEstimate {
    let alpha = alpha.clamp(0.0, FRAC_1_SQRT_2);
    let (m, n) = flat_edge_points(alpha);
    ConeEstimate {
        p,
        alpha_hat: alpha,
        m_point: m,
        n_point: n,
        theta_minus: libm::atan2(m.1, m.0),
        theta_plus: libm::atan2(n.1, n.0),
        alpha_ci_halfwidth: 0.0,
        theta_ci_halfwidth: 0.0,
        n_regenerations: 0,
        escape_rate: 0.0,
    }
}

fn alpha_of_indices(increments: &[(u32, Displacement)], idx: &[usize]) -> f64 {
    let mut sx = 0i64;
    let mut st = 0i64;
    for &i in idx {
        sx += increments[i].1.dx as i64;
        st += increments[i].1.dt as i64;
    }
    // v_x + v_t = 1 along oriented paths, so normalizing by the total time
    // equals normalizing by the total displacement
    let total = (sx + st) as f64;
    ((sx as f64 - st as f64) / total) * FRAC_1_SQRT_2
}

/// Cone estimate from pooled rightmost-path increments.
pub fn estimate_alpha_from_increments(
    p: f64,
    increments: &[(u32, Displacement)],
    escape_rate: f64,
    resamples: usize,
    rng: &mut impl Rng,
) -> Result<ConeEstimate> {
    let n = increments.len();
    if n < 100 {
        return Err(Error::InsufficientSamples);
    }
    let all: Vec<usize> = (0..n).collect();
    let alpha = alpha_of_indices(increments, &all).clamp(0.0, FRAC_1_SQRT_2);
    let (alo, ahi) =
        stats::bootstrap_ci_95(n, resamples, rng, |idx| alpha_of_indices(increments, idx));
    let (m, n_pt) = flat_edge_points(alpha);
    let theta_minus = libm::atan2(m.1, m.0);
    let theta_plus = libm::atan2(n_pt.1, n_pt.0);
    // the cone angle is a smooth map of alpha; propagate the interval ends
    let th_lo = {
        let (mm, _) = flat_edge_points(ahi.clamp(0.0, FRAC_1_SQRT_2));
        libm::atan2(mm.1, mm.0)
    };
    let th_hi = {
        let (mm, _) = flat_edge_points(alo.clamp(0.0, FRAC_1_SQRT_2));
        libm::atan2(mm.1, mm.0)
    };
    Ok(ConeEstimate {
        p,
        alpha_hat: alpha,
        m_point: m,
        n_point: n_pt,
        theta_minus,
        theta_plus,
        alpha_ci_halfwidth: 0.5 * (ahi - alo),
        theta_ci_halfwidth: 0.5 * (th_hi - th_lo),
        n_regenerations: n,
        escape_rate,
    })
}

/// Sequential reference driver: samples `replicas` fields, runs the `q = 1`
/// stabilized path from `origin` on each percolating one, and pools the
/// regeneration increments.
#[allow(clippy::too_many_arguments)]
pub fn estimate_alpha(
    p: f64,
    excess: ExcessDistribution,
    window: Window,
    origin: Site,
    escape_margin: u32,
    max_steps: u32,
    replicas: usize,
    seed: u64,
) -> Result<ConeEstimate> {
    if replicas == 0 {
        return Err(Error::InsufficientSamples);
    }
    let mut increments = Vec::new();
    let mut escaped = 0usize;
    for r in 0..replicas {
        let field = PassageField::sample(window, p, excess, replica_seed(seed, r as u64))?;
        let table = LevelTable::compute(&field, Orientation::Forward);
        if table.level(origin)? != ESCAPES {
            continue;
        }
        escaped += 1;
        let trace = stabilized_path(&field, &table, origin, 1.0, escape_margin, max_steps)?;
        increments.extend(trace.increments());
    }
    let escape_rate = escaped as f64 / replicas as f64;
    if escape_rate < ESCAPE_RATE_FLOOR {
        return Err(Error::SubcriticalSuspected);
    }
    let mut rng = SplitMix64::new(replica_seed(seed, 0x0c0e));
    estimate_alpha_from_increments(p, &increments, escape_rate, 2000, &mut rng)
}

/// Per-replica increments for every grid point, sharing one field and one
/// uniform stream across `q` values (common random numbers).
pub fn grid_increments(
    field: &PassageField,
    table: &LevelTable,
    origin: Site,
    q_grid: &[f64],
    escape_margin: u32,
    max_steps: u32,
) -> Result<Vec<Vec<(u32, Displacement)>>> {
    let mut out = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let trace = stabilized_path(field, table, origin, q, escape_margin, max_steps)?;
        out.push(trace.increments());
    }
    Ok(out)
}

/// Sequential reference driver for the direction curve over a q-grid.
#[allow(clippy::too_many_arguments)]
pub fn theta_curve(
    p: f64,
    excess: ExcessDistribution,
    q_grid: &[f64],
    window: Window,
    origin: Site,
    escape_margin: u32,
    max_steps: u32,
    replicas: usize,
    seed: u64,
) -> Result<Vec<DirectionEstimate>> {
    if q_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("q grid must be sorted ascending"));
    }
    if q_grid.iter().any(|&q| !(0.0..=1.0).contains(&q)) {
        return Err(Error::Config("q grid values must lie in [0, 1]"));
    }
    let mut pooled: Vec<Vec<(u32, Displacement)>> = q_grid.iter().map(|_| Vec::new()).collect();
    for r in 0..replicas {
        let field = PassageField::sample(window, p, excess, replica_seed(seed, r as u64))?;
        let table = LevelTable::compute(&field, Orientation::Forward);
        if table.level(origin)? != ESCAPES {
            continue;
        }
        let per_q = grid_increments(&field, &table, origin, q_grid, escape_margin, max_steps)?;
        for (bucket, mut incs) in pooled.iter_mut().zip(per_q) {
            bucket.append(&mut incs);
        }
    }
    let mut rng = SplitMix64::new(replica_seed(seed, 0x7e7a));
    q_grid
        .iter()
        .zip(&pooled)
        .map(|(&q, incs)| estimate_direction(incs, q, 2000, &mut rng))
        .collect()
}

//! Flat-edge calibration: rightmost-path speed, cone angles, and the
//! endpoint comparison against the direction estimates at q = 1 and q = 0.

use std::path::Path;

use anyhow::{Context, Result};
use fpplab_core::cone::{estimate_alpha_from_increments, ESCAPE_RATE_FLOOR};
use fpplab_core::lattice::{Displacement, Orientation, PassageField, Site, Window};
use fpplab_core::oriented::{LevelTable, ESCAPES};
use fpplab_core::qpath::{estimate_direction, stabilized_path};
use fpplab_core::streams::{replica_seed, SplitMix64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::emit::Artifacts;
use crate::experiments::{within_joint_ci, Outcome, RunOptions};

struct Replica {
    rightmost: Vec<(u32, Displacement)>,
    leftmost: Vec<(u32, Displacement)>,
}

fn run_replica(cfg: &ExperimentConfig, index: u64) -> Result<Option<Replica>> {
    let window = cfg.forward_window(-8)?;
    let field = PassageField::sample(
        window,
        cfg.p,
        cfg.excess_distribution(),
        replica_seed(cfg.seed, index),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let table = LevelTable::compute(&field, Orientation::Forward);
    let origin = Site::new(0, 0);
    if table.level(origin).map_err(|e| anyhow::anyhow!("{e}"))? != ESCAPES {
        return Ok(None);
    }
    let right = stabilized_path(&field, &table, origin, 1.0, cfg.escape_margin, cfg.depth)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let left = stabilized_path(&field, &table, origin, 0.0, cfg.escape_margin, cfg.depth)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(Some(Replica { rightmost: right.increments(), leftmost: left.increments() }))
}

/// Coarse escape-probability scan; gives a sanity band for the oriented
/// threshold, never a point estimate.
fn threshold_band(cfg: &ExperimentConfig) -> Result<serde_json::Value> {
    let window = Window::new(-4, 360, -4, 360).map_err(|e| anyhow::anyhow!("{e}"))?;
    let grid: Vec<f64> = (0..=8).map(|i| 0.56 + 0.02 * i as f64).collect();
    let reps = 48u64;
    let mut rows = Vec::new();
    let mut lo = f64::NAN;
    let mut hi = f64::NAN;
    for (pi, &p) in grid.iter().enumerate() {
        let escapes: usize = (0..reps)
            .into_par_iter()
            .map(|r| {
                let field = PassageField::sample(
                    window,
                    p,
                    cfg.excess_distribution(),
                    replica_seed(cfg.seed, 0x7000 + pi as u64 * 64 + r),
                )
                .unwrap();
                let table = LevelTable::compute(&field, Orientation::Forward);
                (table.level(Site::new(0, 0)).unwrap() == ESCAPES) as usize
            })
            .sum();
        let rate = escapes as f64 / reps as f64;
        let se = (rate * (1.0 - rate) / reps as f64).sqrt();
        if rate - 2.0 * se <= 0.0 {
            lo = p;
        }
        if hi.is_nan() && rate - 2.0 * se > 0.05 {
            hi = p;
        }
        rows.push(json!({"p": p, "escape_rate": rate, "stderr": se}));
    }
    Ok(json!({"scan": rows, "band": [lo, hi],
        "note": "escape rate over small windows; wide-interval sanity band only"}))
}

pub fn run(
    cfg: &ExperimentConfig,
    dir: &Path,
    _opts: RunOptions,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let replicas: Vec<Option<Replica>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| run_replica(cfg, i))
        .collect::<Result<_>>()?;

    let mut rightmost = Vec::new();
    let mut leftmost = Vec::new();
    let mut escaped = 0usize;
    for rep in replicas.iter().flatten() {
        escaped += 1;
        rightmost.extend_from_slice(&rep.rightmost);
        leftmost.extend_from_slice(&rep.leftmost);
    }
    let escape_rate = escaped as f64 / cfg.replicas as f64;
    if escape_rate < ESCAPE_RATE_FLOOR {
        anyhow::bail!("escape rate {escape_rate:.3} below the supercritical floor");
    }

    let mut rng = SplitMix64::new(replica_seed(cfg.seed, 0xa1fa));
    let cone = estimate_alpha_from_increments(
        cfg.p,
        &rightmost,
        escape_rate,
        cfg.bootstrap_resamples,
        &mut rng,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))
    .context("alpha estimate (raise --replicas?)")?;

    let mut rng1 = SplitMix64::new(replica_seed(cfg.seed, 0xa1fb));
    let theta_1 = estimate_direction(&rightmost, 1.0, cfg.bootstrap_resamples, &mut rng1)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut rng0 = SplitMix64::new(replica_seed(cfg.seed, 0xa1fc));
    let theta_0 = estimate_direction(&leftmost, 0.0, cfg.bootstrap_resamples, &mut rng0)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let minus_ok = within_joint_ci(
        theta_1.theta_hat,
        theta_1.ci_halfwidth,
        cone.theta_minus,
        cone.theta_ci_halfwidth,
    );
    let plus_ok = within_joint_ci(
        theta_0.theta_hat,
        theta_0.ci_halfwidth,
        cone.theta_plus,
        cone.theta_ci_halfwidth,
    );

    let summary = json!({
        "p": cfg.p,
        "alpha_hat": cone.alpha_hat,
        "alpha_ci_halfwidth": cone.alpha_ci_halfwidth,
        "m_point": [cone.m_point.0, cone.m_point.1],
        "n_point": [cone.n_point.0, cone.n_point.1],
        "theta_minus": cone.theta_minus,
        "theta_plus": cone.theta_plus,
        "theta_ci_halfwidth": cone.theta_ci_halfwidth,
        "n_regenerations": cone.n_regenerations,
        "escape_rate": escape_rate,
        "curve": [
            {"q": 0.0, "theta_hat": theta_0.theta_hat, "ci_halfwidth": theta_0.ci_halfwidth},
            {"q": 1.0, "theta_hat": theta_1.theta_hat, "ci_halfwidth": theta_1.ci_halfwidth},
        ],
        "endpoint_match": {"theta_minus": minus_ok, "theta_plus": plus_ok},
        "threshold": threshold_band(cfg)?,
    });
    artifacts.write_json(dir, "cone.json", &summary)?;
    Ok(Outcome { summary, pass: Some(minus_ok && plus_ok) })
}

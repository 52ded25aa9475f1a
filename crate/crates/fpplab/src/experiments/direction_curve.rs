//! Direction curve over a q-grid with common random numbers.
//!
//! Each replica reuses one field and one uniform stream for every grid
//! point, so the coupled monotonicity of the curve can be checked pathwise
//! and exactly; the angle estimates pool regeneration increments across
//! replicas.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use anyhow::{Context, Result};
use fpplab_core::lattice::{Displacement, Orientation, PassageField, Site};
use fpplab_core::oriented::{LevelTable, ESCAPES};
use fpplab_core::qpath::{estimate_direction, stabilized_path};
use fpplab_core::streams::{replica_seed, SplitMix64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::emit::{Artifacts, CsvFile};
use crate::experiments::{within_joint_ci, Outcome, RunOptions};
use crate::render::render_field;

struct Replica {
    /// Regeneration increments per grid point.
    per_q: Vec<Vec<(u32, Displacement)>>,
    /// Endpoint angles at the common stabilized length, per grid point.
    angles: Vec<f64>,
    monotone_ok: bool,
    censored: usize,
    common_length: u32,
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
    let mut traces = Vec::with_capacity(cfg.q_grid.len());
    for &q in &cfg.q_grid {
        let trace = stabilized_path(&field, &table, origin, q, cfg.escape_margin, cfg.depth)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        traces.push(trace);
    }
    let censored = traces.iter().filter(|t| t.censored).count();
    let common_length = traces.iter().map(|t| t.stabilized_upto).min().unwrap_or(0);
    // pathwise coupling: a larger q never sits strictly to the left
    let mut monotone_ok = true;
    for pair in traces.windows(2) {
        for n in 0..=common_length {
            if pair[1].site_at(n).x < pair[0].site_at(n).x {
                monotone_ok = false;
                break;
            }
        }
    }
    let angles = traces
        .iter()
        .map(|t| {
            let d = Displacement::between(t.origin, t.site_at(common_length));
            (d.dt as f64).atan2(d.dx as f64)
        })
        .collect();
    Ok(Some(Replica {
        per_q: traces.iter().map(|t| t.increments()).collect(),
        angles,
        monotone_ok,
        censored,
        common_length,
    }))
}

pub fn run(
    cfg: &ExperimentConfig,
    dir: &Path,
    opts: RunOptions,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let replicas: Vec<Option<Replica>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| run_replica(cfg, i))
        .collect::<Result<_>>()?;

    let mut pooled: Vec<Vec<(u32, Displacement)>> =
        cfg.q_grid.iter().map(|_| Vec::new()).collect();
    let mut skipped = 0usize;
    let mut censored_traces = 0usize;
    let mut monotone_violations = 0usize;
    let mut angle_violations = 0usize;
    let mut usable = 0usize;
    for rep in replicas.iter() {
        let Some(rep) = rep else {
            skipped += 1;
            continue;
        };
        usable += 1;
        censored_traces += rep.censored;
        if !rep.monotone_ok {
            monotone_violations += 1;
        }
        if rep.common_length > 0
            && rep.angles.windows(2).any(|w| w[1] > w[0] + 1e-12)
        {
            angle_violations += 1;
        }
        for (bucket, incs) in pooled.iter_mut().zip(&rep.per_q) {
            bucket.extend_from_slice(incs);
        }
    }

    // per-q direction estimates on the pooled increments
    let mut curve = Vec::new();
    let mut estimates = Vec::new();
    for (qi, (&q, incs)) in cfg.q_grid.iter().zip(&pooled).enumerate() {
        let mut rng = SplitMix64::new(replica_seed(cfg.seed, 0xd1_0000 + qi as u64));
        let est = estimate_direction(incs, q, cfg.bootstrap_resamples, &mut rng)
            .map_err(|e| anyhow::anyhow!("{e}"))
            .with_context(|| format!("direction estimate at q = {q} (raise --replicas?)"))?;
        curve.push(json!({
            "q": q,
            "theta_hat": est.theta_hat,
            "ci_halfwidth": est.ci_halfwidth,
            "mean_t": est.mean_t,
            "mean_y": [est.mean_y.0, est.mean_y.1],
            "n_regenerations": est.n_regenerations,
        }));
        estimates.push(est);
    }

    // reflection symmetry: theta(q) + theta(1-q) = pi/2 when the grid is
    // symmetric around 1/2
    let mut symmetry = Vec::new();
    let mut symmetry_ok = true;
    let n = cfg.q_grid.len();
    for i in 0..n / 2 + n % 2 {
        let j = n - 1 - i;
        let (qi, qj) = (cfg.q_grid[i], cfg.q_grid[j]);
        if (qi + qj - 1.0).abs() > 1e-9 {
            continue;
        }
        let (a, b) = (&estimates[i], &estimates[j]);
        let dev = a.theta_hat + b.theta_hat - FRAC_PI_2;
        let ok = within_joint_ci(a.theta_hat + b.theta_hat, a.ci_halfwidth + b.ci_halfwidth,
            FRAC_PI_2, 0.0);
        symmetry_ok &= ok;
        symmetry.push(json!({"q": qi, "deviation": dev, "within_ci": ok}));
    }

    if cfg.emit_rows {
        let mut csv = CsvFile::create(
            dir,
            "regenerations.csv",
            &["replica", "q", "j", "T_j", "Y_j_x", "Y_j_t", "censored"],
        )?;
        for (r, rep) in replicas.iter().enumerate() {
            let Some(rep) = rep else { continue };
            for (qi, incs) in rep.per_q.iter().enumerate() {
                let mut t_abs = 0u32;
                let censored = rep.censored > 0;
                for (j, (dt, y)) in incs.iter().enumerate() {
                    t_abs += dt;
                    csv.row(&[
                        r.to_string(),
                        cfg.q_grid[qi].to_string(),
                        (j + 1).to_string(),
                        t_abs.to_string(),
                        y.dx.to_string(),
                        y.dt.to_string(),
                        (censored as u8).to_string(),
                    ])?;
                }
            }
        }
        csv.finish(artifacts)?;
    }

    if opts.render {
        render_demo(cfg, dir, artifacts)?;
    }

    let pass = monotone_violations == 0 && angle_violations == 0 && symmetry_ok;
    let summary = json!({
        "usable_replicas": usable,
        "skipped_non_percolating": skipped,
        "censored_traces": censored_traces,
        "monotone_violations": monotone_violations,
        "angle_violations": angle_violations,
        "symmetry_ok": symmetry_ok,
        "symmetry": symmetry,
        "curve": curve,
    });
    artifacts.write_json(dir, "direction_curve.json", &summary)?;
    Ok(Outcome { summary, pass: Some(pass) })
}

/// Small-field snapshot with the extreme and middle q-paths drawn.
fn render_demo(cfg: &ExperimentConfig, dir: &Path, artifacts: &mut Artifacts) -> Result<()> {
    let demo = ExperimentConfig { depth: 72, escape_margin: 12, window: None, ..cfg.clone() };
    let window = demo.forward_window(-4)?;
    for attempt in 0..64u64 {
        let field = PassageField::sample(
            window,
            demo.p,
            demo.excess_distribution(),
            replica_seed(demo.seed, 0x5e6 + attempt),
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        let table = LevelTable::compute(&field, Orientation::Forward);
        if table.level(Site::new(0, 0)).map_err(|e| anyhow::anyhow!("{e}"))? != ESCAPES {
            continue;
        }
        let mut paths = Vec::new();
        for (q, color) in [(1.0, "#d62728"), (0.5, "#2ca02c"), (0.0, "#1f77b4")] {
            let tr = stabilized_path(&field, &table, Site::new(0, 0), q, demo.escape_margin, 72)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            paths.push((tr.steps, color));
        }
        let refs: Vec<(&[Site], &str)> =
            paths.iter().map(|(p, c)| (p.as_slice(), *c)).collect();
        if let Some(svg) = render_field(&field, &refs) {
            artifacts.write_text(dir, "direction_curve.svg", &svg)?;
        }
        return Ok(());
    }
    Ok(())
}

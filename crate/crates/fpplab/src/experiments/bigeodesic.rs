//! Two-sided geodesics through bi-directional percolation points, plus the
//! density comparison: the fraction of bi-directional interior sites should
//! match the squared escape probability.

use std::path::Path;

use anyhow::Result;
use fpplab_core::lattice::{Orientation, PassageField, Site};
use fpplab_core::oracle::{bi_infinite_geodesic, subpath_is_geodesic};
use fpplab_core::oriented::{bidirectional_scan, LevelTable, ESCAPES};
use fpplab_core::stats;
use fpplab_core::streams::{replica_seed, SplitMix64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::emit::{Artifacts, CsvFile};
use crate::experiments::{Outcome, RunOptions};
use crate::render::render_field;

struct Replica {
    /// (site, backward length, forward length, checks passed, checks total)
    paths: Vec<(Site, usize, usize, usize, usize)>,
    bidirectional_density: f64,
    escape_rate: f64,
    interior_sites: u64,
}

/// Two-sided paths sampled per replica window.
const SITES_PER_REPLICA: usize = 25;

fn run_replica(cfg: &ExperimentConfig, index: u64) -> Result<Replica> {
    let window = cfg.centered_window()?;
    let field = PassageField::sample(
        window,
        cfg.p,
        cfg.excess_distribution(),
        replica_seed(cfg.seed, index),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let fwd = LevelTable::compute(&field, Orientation::Forward);
    let anti = LevelTable::compute(&field, Orientation::Anti);

    // density bookkeeping over the interior
    let m = cfg.escape_margin as i32;
    let mut interior = 0u64;
    let mut escapes = 0u64;
    for t in window.t_min + m..=window.t_max - m {
        for x in window.x_min + m..=window.x_max - m {
            interior += 1;
            if fwd.level(Site::new(x, t)).unwrap() == ESCAPES {
                escapes += 1;
            }
        }
    }
    let hits = bidirectional_scan(&fwd, &anti, cfg.escape_margin);
    let density = hits.len() as f64 / interior as f64;
    let escape_rate = escapes as f64 / interior as f64;

    // spread the sampled sites across the hit list deterministically
    let mut rng = SplitMix64::new(replica_seed(cfg.seed, 0xb1d ^ index));
    let mut paths = Vec::new();
    if !hits.is_empty() {
        let stride = (hits.len() / SITES_PER_REPLICA).max(1);
        for chunk_start in (0..hits.len()).step_by(stride).take(SITES_PER_REPLICA) {
            let site = hits[chunk_start];
            let g = match bi_infinite_geodesic(
                &field,
                &fwd,
                &anti,
                site,
                cfg.q,
                cfg.escape_margin,
                cfg.centered_depth,
            ) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let center = g.sites.iter().position(|&s| s == site).unwrap_or(0);
            let n = g.sites.len();
            let mut total = 0;
            let mut passed = 0;
            // one straddling pair plus random spans
            let mut pairs = Vec::new();
            if center > 0 && center + 1 < n {
                let i = center - (1 + rng.next_u64() as usize % center.min(150));
                let j = center + (1 + rng.next_u64() as usize % (n - center - 1).min(150));
                pairs.push((i, j));
            }
            for _ in 0..4 {
                if n < 2 {
                    break;
                }
                let i = rng.next_u64() as usize % (n - 1);
                let span = 2 + rng.next_u64() as usize % 150;
                pairs.push((i, (i + span).min(n - 1)));
            }
            for (i, j) in pairs {
                if i >= j {
                    continue;
                }
                total += 1;
                if subpath_is_geodesic(&field, &g.sites[i..=j])
                    .map_err(|e| anyhow::anyhow!("{e}"))?
                {
                    passed += 1;
                }
            }
            paths.push((site, center, n - 1 - center, passed, total));
        }
    }
    Ok(Replica { paths, bidirectional_density: density, escape_rate, interior_sites: interior })
}

pub fn run(
    cfg: &ExperimentConfig,
    dir: &Path,
    opts: RunOptions,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let replicas: Vec<Replica> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| run_replica(cfg, i))
        .collect::<Result<_>>()?;

    let mut paths_built = 0usize;
    let mut checks_total = 0usize;
    let mut checks_passed = 0usize;
    // per-replica gap between the density and the squared escape rate;
    // replica-level spread gives an honest error bar despite correlations
    let mut density_gaps = Vec::new();
    let mut interior_total = 0u64;
    for rep in &replicas {
        paths_built += rep.paths.len();
        for &(_, _, _, passed, total) in &rep.paths {
            checks_total += total;
            checks_passed += passed;
        }
        density_gaps.push(rep.bidirectional_density - rep.escape_rate * rep.escape_rate);
        interior_total += rep.interior_sites;
    }
    let gap_mean = stats::mean(&density_gaps);
    let gap_se = stats::stderr_of_mean(&density_gaps);
    let density_ok = gap_mean.abs() <= 3.0 * gap_se;

    if cfg.emit_rows {
        let mut csv = CsvFile::create(
            dir,
            "bigeodesic.csv",
            &["replica", "x", "t", "back_len", "fwd_len", "checks_passed", "checks_total"],
        )?;
        for (r, rep) in replicas.iter().enumerate() {
            for &(site, back, fwd_len, passed, total) in &rep.paths {
                csv.row(&[
                    r.to_string(),
                    site.x.to_string(),
                    site.t.to_string(),
                    back.to_string(),
                    fwd_len.to_string(),
                    passed.to_string(),
                    total.to_string(),
                ])?;
            }
        }
        csv.finish(artifacts)?;
    }

    if opts.render {
        render_demo(cfg, dir, artifacts)?;
    }

    let all_checks = checks_passed == checks_total && checks_total > 0;
    let pass = all_checks && density_ok;
    let summary = json!({
        "replicas": cfg.replicas,
        "paths_built": paths_built,
        "subpath_checks": {"passed": checks_passed, "total": checks_total},
        "density": {
            "interior_sites": interior_total,
            "gap_mean": gap_mean,
            "gap_stderr": gap_se,
            "within_3_sigma": density_ok,
        },
    });
    artifacts.write_json(dir, "bigeodesic.json", &summary)?;
    Ok(Outcome { summary, pass: Some(pass) })
}

fn render_demo(cfg: &ExperimentConfig, dir: &Path, artifacts: &mut Artifacts) -> Result<()> {
    let demo = ExperimentConfig { centered_depth: 56, escape_margin: 12, window: None, ..cfg.clone() };
    let window = demo.centered_window()?;
    for attempt in 0..50u64 {
        let field = PassageField::sample(
            window,
            demo.p,
            demo.excess_distribution(),
            replica_seed(demo.seed, 0xb1de + attempt),
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        let fwd = LevelTable::compute(&field, Orientation::Forward);
        let anti = LevelTable::compute(&field, Orientation::Anti);
        let hits = bidirectional_scan(&fwd, &anti, demo.escape_margin);
        let Some(&site) = hits.first() else { continue };
        let Ok(g) = bi_infinite_geodesic(
            &field,
            &fwd,
            &anti,
            site,
            demo.q,
            demo.escape_margin,
            demo.centered_depth,
        ) else {
            continue;
        };
        if let Some(svg) = render_field(&field, &[(&g.sites, "#d62728")]) {
            artifacts.write_text(dir, "bigeodesic.svg", &svg)?;
        }
        return Ok(());
    }
    Ok(())
}

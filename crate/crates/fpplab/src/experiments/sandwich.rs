//! Sandwich geodesics through non-percolating origins: enclosure by
//! coalescing forward and anti paths, region-restricted splicing, oracle
//! verification, and the direction comparison against percolating origins.

use std::path::Path;

use anyhow::{Context, Result};
use fpplab_core::lattice::{Displacement, Orientation, PassageField, Site};
use fpplab_core::oracle::{passage_time, path_time, sandwich_geodesic, subpath_is_geodesic};
use fpplab_core::oriented::{LevelTable, ESCAPES};
use fpplab_core::qpath::estimate_direction;
use fpplab_core::streams::{replica_seed, SplitMix64};
use fpplab_core::Error as CoreError;
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::emit::{Artifacts, CsvFile};
use crate::experiments::{within_joint_ci, Outcome, RunOptions};
use crate::render::render_field;

enum Replica {
    /// Origin percolates: its increments feed the reference direction pool.
    Percolating(Vec<(u32, Displacement)>),
    /// Window too small for this replica.
    Censored,
    Sandwich(Box<SandwichResult>),
}

struct SandwichResult {
    j_r: i32,
    j_l: i32,
    n0: u32,
    n0_anti: u32,
    delta_size: usize,
    restricted_time: f64,
    unrestricted_time: f64,
    times_equal: bool,
    subchecks_total: usize,
    subchecks_passed: usize,
    increments: Vec<(u32, Displacement)>,
}

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
    let origin = Site::new(0, 0);

    let out = match sandwich_geodesic(
        &field,
        &fwd,
        &anti,
        origin,
        cfg.q,
        cfg.escape_margin,
        cfg.centered_depth,
    ) {
        Ok(o) => o,
        Err(CoreError::WindowExhausted) | Err(CoreError::CensoredBeforeFound) => {
            return Ok(Replica::Censored)
        }
        Err(e) => anyhow::bail!("replica {index}: {e}"),
    };

    let Some(region) = out.region else {
        return Ok(Replica::Percolating(out.increments));
    };

    let meeting = region.forward_meeting();
    let k = out
        .path
        .sites
        .iter()
        .position(|&s| s == meeting)
        .expect("meeting point lies on the spliced path");
    let restricted_time =
        path_time(&field, &out.path.sites[..=k]).map_err(|e| anyhow::anyhow!("{e}"))?;
    let (unrestricted_time, _) =
        passage_time(&field, origin, meeting).map_err(|e| anyhow::anyhow!("{e}"))?;

    // sampled subpath checks, including one straddling the splice point
    let mut rng = SplitMix64::new(replica_seed(cfg.seed, 0x5a0d ^ index));
    let n = out.path.sites.len();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if n > k + 2 && k > 0 {
        let i = rng.next_u64() as usize % k;
        let j = (k + 1) + (rng.next_u64() as usize % (n - k - 1)).min(200);
        pairs.push((i, j.min(n - 1)));
    }
    for _ in 0..5 {
        let i = rng.next_u64() as usize % (n - 1);
        let span = 2 + rng.next_u64() as usize % 200;
        pairs.push((i, (i + span).min(n - 1)));
    }
    let mut passed = 0;
    let mut total = 0;
    for (i, j) in pairs {
        if i >= j {
            continue;
        }
        total += 1;
        if subpath_is_geodesic(&field, &out.path.sites[i..=j])
            .map_err(|e| anyhow::anyhow!("{e}"))?
        {
            passed += 1;
        }
    }

    let j_r = region.right_forward[0].x - origin.x;
    let j_l = region.left_forward[0].x - origin.x;
    Ok(Replica::Sandwich(Box::new(SandwichResult {
        j_r,
        j_l,
        n0: region.n0,
        n0_anti: region.n0_anti,
        delta_size: region.delta().len(),
        restricted_time,
        unrestricted_time,
        times_equal: restricted_time == unrestricted_time,
        subchecks_total: total,
        subchecks_passed: passed,
        increments: out.increments,
    })))
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

    let mut reference_pool: Vec<(u32, Displacement)> = Vec::new();
    let mut sandwich_pool: Vec<(u32, Displacement)> = Vec::new();
    let mut censored = 0usize;
    let mut percolating = 0usize;
    let mut rows = Vec::new();
    let mut all_equal = true;
    let mut all_subchecks = true;
    for (i, rep) in replicas.iter().enumerate() {
        match rep {
            Replica::Censored => censored += 1,
            Replica::Percolating(incs) => {
                percolating += 1;
                reference_pool.extend_from_slice(incs);
            }
            Replica::Sandwich(s) => {
                all_equal &= s.times_equal;
                all_subchecks &= s.subchecks_passed == s.subchecks_total;
                sandwich_pool.extend_from_slice(&s.increments);
                rows.push((i, s));
            }
        }
    }
    let built = rows.len();

    // direction of the spliced continuations vs the percolating reference
    let mut rng_a = SplitMix64::new(replica_seed(cfg.seed, 0xd1a));
    let mut rng_b = SplitMix64::new(replica_seed(cfg.seed, 0xd1b));
    let dir_sandwich =
        estimate_direction(&sandwich_pool, cfg.q, cfg.bootstrap_resamples, &mut rng_a)
            .map_err(|e| anyhow::anyhow!("{e}"))
            .context("sandwich continuation directions (raise --replicas?)")?;
    let dir_reference =
        estimate_direction(&reference_pool, cfg.q, cfg.bootstrap_resamples, &mut rng_b)
            .map_err(|e| anyhow::anyhow!("{e}"))
            .context("percolating reference directions")?;
    let direction_match = within_joint_ci(
        dir_sandwich.theta_hat,
        dir_sandwich.ci_halfwidth,
        dir_reference.theta_hat,
        dir_reference.ci_halfwidth,
    );

    if cfg.emit_rows {
        let mut csv = CsvFile::create(
            dir,
            "sandwich.csv",
            &[
                "replica",
                "j_r",
                "j_l",
                "n0",
                "n0_anti",
                "delta_size",
                "restricted_time",
                "unrestricted_time",
                "times_equal",
                "subchecks_passed",
                "subchecks_total",
            ],
        )?;
        for (i, s) in &rows {
            csv.row(&[
                i.to_string(),
                s.j_r.to_string(),
                s.j_l.to_string(),
                s.n0.to_string(),
                s.n0_anti.to_string(),
                s.delta_size.to_string(),
                s.restricted_time.to_string(),
                s.unrestricted_time.to_string(),
                (s.times_equal as u8).to_string(),
                s.subchecks_passed.to_string(),
                s.subchecks_total.to_string(),
            ])?;
        }
        csv.finish(artifacts)?;
    }

    if opts.render {
        render_demo(cfg, dir, artifacts)?;
    }

    let pass = all_equal && all_subchecks && direction_match && built > 0;
    let summary = json!({
        "replicas": cfg.replicas,
        "non_percolating_built": built,
        "percolating_skipped": percolating,
        "censored": censored,
        "restricted_equals_unrestricted": all_equal,
        "subpath_checks_ok": all_subchecks,
        "direction": {
            "sandwich_theta": dir_sandwich.theta_hat,
            "sandwich_ci": dir_sandwich.ci_halfwidth,
            "reference_theta": dir_reference.theta_hat,
            "reference_ci": dir_reference.ci_halfwidth,
            "match": direction_match,
        },
    });
    artifacts.write_json(dir, "sandwich.json", &summary)?;
    Ok(Outcome { summary, pass: Some(pass) })
}

/// Renders one successful enclosure at toy scale.
fn render_demo(cfg: &ExperimentConfig, dir: &Path, artifacts: &mut Artifacts) -> Result<()> {
    let demo = ExperimentConfig { centered_depth: 56, escape_margin: 12, window: None, ..cfg.clone() };
    let window = demo.centered_window()?;
    for attempt in 0..200u64 {
        let field = PassageField::sample(
            window,
            demo.p,
            demo.excess_distribution(),
            replica_seed(demo.seed, 0xde30 + attempt),
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        let fwd = LevelTable::compute(&field, Orientation::Forward);
        if fwd.level(Site::new(0, 0)).map_err(|e| anyhow::anyhow!("{e}"))? == ESCAPES {
            continue;
        }
        let anti = LevelTable::compute(&field, Orientation::Anti);
        let Ok(out) = sandwich_geodesic(
            &field,
            &fwd,
            &anti,
            Site::new(0, 0),
            demo.q,
            demo.escape_margin,
            demo.centered_depth,
        ) else {
            continue;
        };
        let Some(region) = &out.region else { continue };
        let overlays: Vec<(&[Site], &str)> = vec![
            (&region.right_forward, "#9467bd"),
            (&region.left_forward, "#9467bd"),
            (&region.right_anti, "#8c564b"),
            (&region.left_anti, "#8c564b"),
            (&out.path.sites, "#d62728"),
        ];
        if let Some(svg) = render_field(&field, &overlays) {
            artifacts.write_text(dir, "sandwich.svg", &svg)?;
        }
        return Ok(());
    }
    Ok(())
}

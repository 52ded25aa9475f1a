//! Coalescence of q-path pairs: joint regeneration statistics, absorption
//! rates by initial separation, tail fits, and the log-drift profile of the
//! separation chain.

use std::path::Path;

use anyhow::{Context, Result};
use fpplab_core::coalescence::{drift_profile, merge_traces, select_m0, CoalescenceTrace};
use fpplab_core::lattice::{Orientation, PassageField, Site};
use fpplab_core::oriented::{LevelTable, ESCAPES};
use fpplab_core::qpath::stabilized_path;
use fpplab_core::stats::fit_survival_tail;
use fpplab_core::streams::replica_seed;
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::emit::{Artifacts, CsvFile};
use crate::experiments::{Outcome, RunOptions};

struct Job {
    separation: u32,
    /// Separations driven only for the drift profile are excluded from the
    /// absorption-rate criterion.
    drift_only: bool,
}

struct JobResult {
    separation: u32,
    drift_only: bool,
    skipped: bool,
    censored: bool,
    trace: Option<CoalescenceTrace>,
    marginal_increments: Vec<u32>,
}

fn run_job(cfg: &ExperimentConfig, job: &Job, index: u64) -> Result<JobResult> {
    let k = (job.separation / 2) as i32;
    let lateral_min = -(k + 8);
    let window = cfg.forward_window(lateral_min)?;
    let field = PassageField::sample(
        window,
        cfg.p,
        cfg.excess_distribution(),
        replica_seed(cfg.seed, index),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let table = LevelTable::compute(&field, Orientation::Forward);
    let a = Site::new(0, 0);
    let b = Site::new(k, -k);
    let mut out = JobResult {
        separation: job.separation,
        drift_only: job.drift_only,
        skipped: false,
        censored: false,
        trace: None,
        marginal_increments: Vec::new(),
    };
    let esc = |s: Site| table.level(s).map(|l| l == ESCAPES).unwrap_or(false);
    if !esc(a) || !esc(b) {
        out.skipped = true;
        return Ok(out);
    }
    let ta = stabilized_path(&field, &table, a, cfg.q, cfg.escape_margin, cfg.depth)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let tb = stabilized_path(&field, &table, b, cfg.q, cfg.escape_margin, cfg.depth)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    out.marginal_increments.extend(ta.increments().iter().map(|&(dt, _)| dt));
    let joint = merge_traces(&ta, &tb);
    out.censored = joint.censored;
    out.trace = Some(joint);
    Ok(out)
}

pub fn run(
    cfg: &ExperimentConfig,
    dir: &Path,
    _opts: RunOptions,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let mut jobs = Vec::new();
    for &s in &cfg.separations {
        for _ in 0..cfg.replicas {
            jobs.push(Job { separation: s, drift_only: false });
        }
    }
    for &s in &cfg.drift_separations {
        for _ in 0..cfg.replicas {
            jobs.push(Job { separation: s, drift_only: true });
        }
    }

    let results: Vec<JobResult> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| run_job(cfg, job, i as u64))
        .collect::<Result<_>>()?;

    // absorption statistics per separation (primary separations only)
    let mut per_sep = Vec::new();
    let mut all_absorbed = true;
    for &s in &cfg.separations {
        let of_sep: Vec<&JobResult> =
            results.iter().filter(|r| r.separation == s && !r.drift_only).collect();
        let skipped = of_sep.iter().filter(|r| r.skipped).count();
        let censored = of_sep.iter().filter(|r| !r.skipped && r.censored).count();
        let uncensored: Vec<&&JobResult> =
            of_sep.iter().filter(|r| !r.skipped && !r.censored).collect();
        let absorbed =
            uncensored.iter().filter(|r| r.trace.as_ref().is_some_and(|t| t.absorbed())).count();
        let rate = if uncensored.is_empty() {
            0.0
        } else {
            absorbed as f64 / uncensored.len() as f64
        };
        all_absorbed &= rate >= 0.99 && !uncensored.is_empty();
        per_sep.push(json!({
            "separation": s,
            "replicas": of_sep.len(),
            "skipped_non_percolating": skipped,
            "censored": censored,
            "uncensored": uncensored.len(),
            "absorbed": absorbed,
            "absorbed_rate": rate,
        }));
    }

    // increment bound is exact on every transition
    let mut bound_violations = 0u64;
    for r in &results {
        if let Some(t) = &r.trace {
            for (z, z_next, dtau) in t.transitions() {
                if (z_next as i64 - z as i64).unsigned_abs() > 2 * dtau as u64 {
                    bound_violations += 1;
                }
            }
        }
    }

    // tail fits: joint increments vs marginal increments
    let joint_deltas: Vec<u32> = results
        .iter()
        .filter_map(|r| r.trace.as_ref())
        .flat_map(|t| t.taus.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>())
        .collect();
    let marginal_deltas: Vec<u32> =
        results.iter().flat_map(|r| r.marginal_increments.iter().copied()).collect();
    let joint_fit = fit_survival_tail(&joint_deltas, 1000)
        .map_err(|e| anyhow::anyhow!("{e}"))
        .context("joint tail fit (raise --replicas?)")?;
    let marginal_fit = fit_survival_tail(&marginal_deltas, 1000)
        .map_err(|e| anyhow::anyhow!("{e}"))
        .context("marginal tail fit")?;
    // joint regenerations are rarer, so their tail decays no faster
    let se = marginal_fit.rate_stderr.hypot(joint_fit.rate_stderr);
    let domination_ok = joint_fit.rate <= marginal_fit.rate + 2.0 * se;

    // drift profile over every recorded transition
    let traces: Vec<CoalescenceTrace> =
        results.iter().filter_map(|r| r.trace.clone()).collect();
    let (drift, omitted) = drift_profile(&traces, &cfg.drift_buckets);
    let m0 = select_m0(&drift);
    let drift_rows: Vec<_> = drift
        .iter()
        .map(|d| {
            json!({
                "m": d.m,
                "drift": d.drift,
                "stderr": d.stderr,
                "n": d.n,
                "absorbed": d.absorbed,
                "negative_at_2_sigma": d.drift + 2.0 * d.stderr <= 0.0,
            })
        })
        .collect();

    if cfg.emit_rows {
        let mut csv = CsvFile::create(
            dir,
            "joint_regenerations.csv",
            &["replica", "q", "j", "tau_j", "Z_j", "absorbed"],
        )?;
        for (r, res) in results.iter().enumerate() {
            let Some(t) = &res.trace else { continue };
            for (j, (&tau, &z)) in t.taus.iter().zip(&t.zs).enumerate() {
                csv.row(&[
                    r.to_string(),
                    cfg.q.to_string(),
                    j.to_string(),
                    tau.to_string(),
                    z.to_string(),
                    ((z == 0) as u8).to_string(),
                ])?;
            }
        }
        csv.finish(artifacts)?;
    }

    let pass = all_absorbed && bound_violations == 0 && domination_ok && m0.is_some();
    let summary = json!({
        "q": cfg.q,
        "depth": cfg.depth,
        "per_separation": per_sep,
        "increment_bound_violations": bound_violations,
        "joint_tail": {
            "rate": joint_fit.rate, "prefactor": joint_fit.prefactor,
            "rate_stderr": joint_fit.rate_stderr, "samples": joint_fit.sample_size,
            "goodness_p": joint_fit.goodness,
        },
        "marginal_tail": {
            "rate": marginal_fit.rate, "prefactor": marginal_fit.prefactor,
            "rate_stderr": marginal_fit.rate_stderr, "samples": marginal_fit.sample_size,
            "goodness_p": marginal_fit.goodness,
        },
        "tail_domination_ok": domination_ok,
        "drift": {
            "buckets": drift_rows,
            "omitted_buckets": omitted,
            "m0": m0,
            "replica_separation_map": "job index runs separations in config order, replicas within",
        },
    });
    artifacts.write_json(dir, "coalescence.json", &summary)?;
    Ok(Outcome { summary, pass: Some(pass) })
}

//! Experiment runner for the first-passage percolation laboratory.
//!
//! Pairs the algorithmic core with configuration parsing, parallel replica
//! orchestration, artifact emission (CSV, JSON, SVG), and content-hashed
//! run manifests. The binary exposes one subcommand per experiment; see the
//! README for the full tour.

pub mod bruteforce;
pub mod config;
pub mod emit;
pub mod experiments;
pub mod render;

use std::path::Path;

use anyhow::Result;

use crate::config::ExperimentConfig;
use crate::emit::Artifacts;
use crate::experiments::{Kind, Outcome, RunOptions};

/// Runs one experiment end to end: replicas, artifacts, manifest.
pub fn run_experiment(
    kind: Kind,
    cfg: &ExperimentConfig,
    out_dir: &Path,
    opts: RunOptions,
) -> Result<Outcome> {
    std::fs::create_dir_all(out_dir)?;
    let mut artifacts = Artifacts::new();
    let outcome = experiments::run(kind, cfg, out_dir, opts, &mut artifacts)?;
    emit::write_manifest(out_dir, kind.name(), cfg, &outcome.summary, outcome.pass, &artifacts)?;
    Ok(outcome)
}

/// Writes a field snapshot (and optionally its level tables) to `out_dir`.
pub fn export_field(cfg: &ExperimentConfig, out_dir: &Path, with_levels: bool) -> Result<()> {
    use fpplab_core::lattice::{Orientation, PassageField, Window};
    use fpplab_core::oriented::LevelTable;

    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let window = match cfg.window {
        Some(spec) => spec.to_window()?,
        None => Window::square(0, 63).map_err(|e| anyhow::anyhow!("{e}"))?,
    };
    let field = PassageField::sample(window, cfg.p, cfg.excess_distribution(), cfg.seed)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut artifacts = Artifacts::new();
    artifacts.write_text(out_dir, "field.txt", &emit::field_snapshot(&field))?;
    let header = emit::FieldHeader {
        x_min: window.x_min,
        x_max: window.x_max,
        t_min: window.t_min,
        t_max: window.t_max,
        p: cfg.p,
        excess: &cfg.excess,
        seed: cfg.seed,
    };
    artifacts.write_json(out_dir, "field.json", &header)?;
    if with_levels {
        let fwd = LevelTable::compute(&field, Orientation::Forward);
        let anti = LevelTable::compute(&field, Orientation::Anti);
        artifacts.write_text(out_dir, "levels.txt", &emit::levels_snapshot(&fwd, &anti))?;
    }
    emit::write_manifest(
        out_dir,
        "export-field",
        cfg,
        &serde_json::json!({"sites": window.len(), "levels": with_levels}),
        None,
        &artifacts,
    )?;
    Ok(())
}

//! Experiment drivers: replica orchestration, aggregation, and checks.
//!
//! Every driver runs its replicas through a rayon pool with one derived
//! seed per job, aggregates sequentially in job order, and reports a
//! summary plus an optional pass verdict for `--check`. Outputs are
//! byte-stable for a fixed configuration.

pub mod bigeodesic;
pub mod coalescence;
pub mod cone;
pub mod direction_curve;
pub mod oracle_sweep;
pub mod sandwich;

use std::path::Path;

use anyhow::Result;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::emit::Artifacts;

/// The experiments exposed as CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    DirectionCurve,
    Coalescence,
    Sandwich,
    Bigeodesic,
    Cone,
    OracleSweep,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::DirectionCurve => "direction-curve",
            Kind::Coalescence => "coalescence",
            Kind::Sandwich => "sandwich",
            Kind::Bigeodesic => "bigeodesic",
            Kind::Cone => "cone",
            Kind::OracleSweep => "oracle-sweep",
        }
    }
}

/// Result of one experiment run: summary statistics and the verdict of the
/// experiment's built-in checks (`None` when it defines none).
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub pass: Option<bool>,
}

/// Options that come from flags rather than the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub render: bool,
}

pub fn run(
    kind: Kind,
    cfg: &ExperimentConfig,
    dir: &Path,
    opts: RunOptions,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    cfg.validate()?;
    match kind {
        Kind::DirectionCurve => direction_curve::run(cfg, dir, opts, artifacts),
        Kind::Coalescence => coalescence::run(cfg, dir, opts, artifacts),
        Kind::Sandwich => sandwich::run(cfg, dir, opts, artifacts),
        Kind::Bigeodesic => bigeodesic::run(cfg, dir, opts, artifacts),
        Kind::Cone => cone::run(cfg, dir, opts, artifacts),
        Kind::OracleSweep => oracle_sweep::run(cfg, dir, opts, artifacts),
    }
}

/// Two estimates agree when their 95% intervals overlap.
pub(crate) fn within_joint_ci(a: f64, ci_a: f64, b: f64, ci_b: f64) -> bool {
    (a - b).abs() <= ci_a + ci_b
}

//! Declarative experiment configuration: a TOML file of `key = value`
//! sections with command-line overrides. Unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use fpplab_core::lattice::{ExcessDistribution, Window};
use serde::{Deserialize, Serialize};

/// Excess law of closed-edge weights, as written in config files.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExcessSpec {
    Atom { value: f64 },
    ShiftedExponential { rate: f64 },
    ShiftedUniform { lo: f64, hi: f64 },
}

impl ExcessSpec {
    pub fn to_distribution(self) -> ExcessDistribution {
        match self {
            ExcessSpec::Atom { value } => ExcessDistribution::Atom { value },
            ExcessSpec::ShiftedExponential { rate } => {
                ExcessDistribution::ShiftedExponential { rate }
            }
            ExcessSpec::ShiftedUniform { lo, hi } => ExcessDistribution::ShiftedUniform { lo, hi },
        }
    }
}

/// Explicit window bounds, overriding the per-experiment default geometry.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub x_min: i32,
    pub x_max: i32,
    pub t_min: i32,
    pub t_max: i32,
}

impl WindowSpec {
    pub fn to_window(self) -> Result<Window> {
        Window::new(self.x_min, self.x_max, self.t_min, self.t_max)
            .map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// All experiment parameters. Defaults target the supercritical regime at
/// desk scale; every field can come from the config file or a flag.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Probability of an open (weight 1) edge.
    pub p: f64,
    /// Tie-breaking parameter of the path construction.
    pub q: f64,
    /// Grid for the direction-curve experiment; must be sorted.
    pub q_grid: Vec<f64>,
    pub excess: ExcessSpec,
    /// Forward construction depth (path steps).
    pub depth: u32,
    /// Construction depth of the sandwich and two-sided experiments, which
    /// need room in all four directions.
    pub centered_depth: u32,
    pub escape_margin: u32,
    pub replicas: usize,
    pub seed: u64,
    /// Initial tip separations for the coalescence experiment.
    pub separations: Vec<u32>,
    /// Additional separations driven only to populate drift buckets.
    pub drift_separations: Vec<u32>,
    pub drift_buckets: Vec<u32>,
    /// Side length of the windows in the oracle sweep.
    pub oracle_side: u32,
    /// Site pairs checked per sweep window.
    pub oracle_pairs: usize,
    pub bootstrap_resamples: usize,
    /// Write per-regeneration CSV rows (can be large at full depth).
    pub emit_rows: bool,
    /// Explicit window override; experiments derive their own when absent.
    pub window: Option<WindowSpec>,
    /// Maximum sites a replica is allowed to allocate tables for.
    pub max_window_sites: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: 0.7,
            q: 0.5,
            q_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            excess: ExcessSpec::Atom { value: 2.0 },
            depth: 4000,
            centered_depth: 1000,
            escape_margin: 64,
            replicas: 100,
            seed: 1,
            separations: vec![2, 10, 50],
            drift_separations: vec![20, 40, 80, 120],
            drift_buckets: vec![20, 40, 80],
            oracle_side: 5,
            oracle_pairs: 3,
            bootstrap_resamples: 2000,
            emit_rows: true,
            window: None,
            max_window_sites: 80_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            bail!("p must lie in (0, 1], got {}", self.p);
        }
        if !(0.0..=1.0).contains(&self.q) {
            bail!("q must lie in [0, 1], got {}", self.q);
        }
        if self.q_grid.is_empty() || self.q_grid.windows(2).any(|w| w[0] > w[1]) {
            bail!("q_grid must be non-empty and sorted ascending");
        }
        if self.q_grid.iter().any(|q| !(0.0..=1.0).contains(q)) {
            bail!("q_grid values must lie in [0, 1]");
        }
        self.excess
            .to_distribution()
            .validate()
            .map_err(|e| anyhow::anyhow!("excess: {e}"))?;
        if self.depth == 0 || self.centered_depth == 0 {
            bail!("depths must be positive");
        }
        if self.escape_margin == 0 {
            bail!("escape_margin must be at least 1");
        }
        if self.replicas == 0 {
            bail!("replicas must be positive");
        }
        if self.oracle_side < 2 || self.oracle_side > 7 {
            bail!("oracle_side must lie in 2..=7 (enumeration stays tractable)");
        }
        if self.separations.iter().chain(&self.drift_separations).any(|&s| s % 2 != 0) {
            bail!("separations must be even (origins share an anti-diagonal)");
        }
        if let Some(w) = self.window {
            w.to_window()?;
        }
        Ok(())
    }

    pub fn excess_distribution(&self) -> ExcessDistribution {
        self.excess.to_distribution()
    }

    /// Window for constructions growing up-right from the origin.
    pub fn forward_window(&self, lateral_min: i32) -> Result<Window> {
        let w = match self.window {
            Some(spec) => spec.to_window()?,
            None => {
                let hi = self.depth as i64 + self.escape_margin as i64 + 8;
                Window::new(lateral_min, hi as i32, lateral_min, hi as i32)
                    .map_err(|e| anyhow::anyhow!("{e}"))?
            }
        };
        self.check_budget(&w)?;
        Ok(w)
    }

    /// Window for constructions growing in both orientations around the
    /// origin.
    pub fn centered_window(&self) -> Result<Window> {
        let w = match self.window {
            Some(spec) => spec.to_window()?,
            None => {
                let r = self.centered_depth as i64 + self.escape_margin as i64 + 8;
                Window::new(-(r as i32), r as i32, -(r as i32), r as i32)
                    .map_err(|e| anyhow::anyhow!("{e}"))?
            }
        };
        self.check_budget(&w)?;
        Ok(w)
    }

    fn check_budget(&self, w: &Window) -> Result<()> {
        if w.len() as u64 > self.max_window_sites {
            bail!(
                "window holds {} sites, above the configured budget {}",
                w.len(),
                self.max_window_sites
            );
        }
        Ok(())
    }
}

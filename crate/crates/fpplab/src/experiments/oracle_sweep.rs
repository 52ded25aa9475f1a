//! Cross-checks the shortest-path oracle and the level tables against
//! exhaustive enumeration on tiny windows.

use std::path::Path;

use anyhow::Result;
use fpplab_core::lattice::{Axis, Orientation, PassageField, Site, Window};
use fpplab_core::oracle::passage_time;
use fpplab_core::oriented::LevelTable;
use fpplab_core::streams::{replica_seed, SplitMix64};
use rayon::prelude::*;
use serde_json::json;

use crate::bruteforce;
use crate::config::ExperimentConfig;
use crate::emit::Artifacts;
use crate::experiments::{Outcome, RunOptions};

const SWEEP_PS: [f64; 3] = [0.3, 0.7, 1.0];

fn sweep_window(cfg: &ExperimentConfig, index: u64) -> Result<(usize, usize)> {
    let side = cfg.oracle_side as i32;
    let window = Window::square(0, side - 1).map_err(|e| anyhow::anyhow!("{e}"))?;
    let p = SWEEP_PS[(index % 3) as usize];
    let field = PassageField::sample(
        window,
        p,
        cfg.excess_distribution(),
        replica_seed(cfg.seed, index),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut rng = SplitMix64::new(replica_seed(cfg.seed, 0x5eeb ^ index));
    let mut pairs = vec![(Site::new(0, 0), Site::new(side - 1, side - 1))];
    for _ in 1..cfg.oracle_pairs {
        let a = window.site_at(rng.next_u64() as usize % window.len());
        let b = window.site_at(rng.next_u64() as usize % window.len());
        pairs.push((a, b));
    }
    let mut checked = 0;
    let mut mismatches = 0;
    for (a, b) in pairs {
        let (tau, _) = passage_time(&field, a, b).map_err(|e| anyhow::anyhow!("{e}"))?;
        let brute = bruteforce::passage_by_enumeration(&field, a, b);
        checked += 1;
        if tau != brute {
            mismatches += 1;
        }
    }
    Ok((checked, mismatches))
}

/// One random 4x4 openness pattern checked against path enumeration.
fn pattern_check(cfg: &ExperimentConfig, index: u64) -> Result<(usize, usize)> {
    let window = Window::square(0, 3).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut rng = SplitMix64::new(replica_seed(cfg.seed, 0xfa77 ^ index));
    let bits = rng.next_u64();
    let field = PassageField::from_pattern(
        window,
        0.5,
        cfg.excess_distribution(),
        index,
        move |s, a| {
            let i = (s.t * 4 + s.x) * 2 + (a == Axis::Up) as i32;
            (bits >> (i as u32 & 63)) & 1 == 1
        },
        |_| 0.5,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut checked = 0;
    let mut mismatches = 0;
    for orientation in [Orientation::Forward, Orientation::Anti] {
        let table = LevelTable::compute(&field, orientation);
        for s in window.sites() {
            checked += 1;
            if table.level(s).map_err(|e| anyhow::anyhow!("{e}"))?
                != bruteforce::level_by_enumeration(&field, orientation, s)
            {
                mismatches += 1;
            }
        }
    }
    Ok((checked, mismatches))
}

pub fn run(
    cfg: &ExperimentConfig,
    dir: &Path,
    _opts: RunOptions,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let passage: Vec<(usize, usize)> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| sweep_window(cfg, i))
        .collect::<Result<_>>()?;
    let pattern_count = cfg.replicas.max(1000) as u64;
    let levels: Vec<(usize, usize)> = (0..pattern_count)
        .into_par_iter()
        .map(|i| pattern_check(cfg, i))
        .collect::<Result<_>>()?;

    let passage_checked: usize = passage.iter().map(|&(c, _)| c).sum();
    let passage_mismatches: usize = passage.iter().map(|&(_, m)| m).sum();
    let level_checked: usize = levels.iter().map(|&(c, _)| c).sum();
    let level_mismatches: usize = levels.iter().map(|&(_, m)| m).sum();

    let pass = passage_mismatches == 0 && level_mismatches == 0;
    let summary = json!({
        "oracle_side": cfg.oracle_side,
        "p_values": SWEEP_PS,
        "passage": {"windows": cfg.replicas, "pairs": passage_checked,
            "mismatches": passage_mismatches},
        "levels": {"patterns": pattern_count, "sites": level_checked,
            "mismatches": level_mismatches},
    });
    artifacts.write_json(dir, "oracle_sweep.json", &summary)?;
    Ok(Outcome { summary, pass: Some(pass) })
}

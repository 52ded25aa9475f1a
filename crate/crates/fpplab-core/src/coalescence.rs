//! Joint regenerations of two q-paths started on a common anti-diagonal,
//! the separation chain `Z_j`, and the empirical log-drift diagnostic.
//!
//! A joint regeneration is a path index at which both constructions
//! regenerate simultaneously; `Z_j` is the L1 distance between the tips
//! there. Zero is the only absorbing state: once the tips coincide at a
//! joint regeneration both constructions restart from the same site and the
//! step sequences agree forever.

use alloc::vec::Vec;

use crate::lattice::{PassageField, Site};
use crate::oriented::{LevelTable, ESCAPES};
use crate::qpath::{stabilized_path, QPathTrace};
use crate::stats::{self, TailFit};
use crate::{Error, Result};

/// Joint trace of two q-paths sharing one field and one uniform stream.
#[derive(Debug, Clone)]
pub struct CoalescenceTrace {
    pub origins: (Site, Site),
    pub q: f64,
    /// Joint regeneration times, starting with `tau_0 = 0`. Truncated at the
    /// first absorbing regeneration.
    pub taus: Vec<u32>,
    /// Tip separations at the joint regenerations, `zs[j] = Z_j`.
    pub zs: Vec<u32>,
    /// First index at which the two step sequences meet, if they do within
    /// the constructed depth.
    pub n0: Option<u32>,
    pub censored: bool,
}

impl CoalescenceTrace {
    /// True when the separation chain reached its absorbing state.
    pub fn absorbed(&self) -> bool {
        self.zs.last() == Some(&0)
    }

    /// Consecutive `(Z_j, Z_{j+1}, tau_{j+1} - tau_j)` transitions.
    pub fn transitions(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (1..self.zs.len()).map(move |j| {
            (self.zs[j - 1], self.zs[j], self.taus[j] - self.taus[j - 1])
        })
    }
}

/// Builds both stabilized paths and merges their regeneration structures.
///
/// Origins must share an anti-diagonal and both must carry the escape
/// sentinel. The separation chain is recorded up to `max_steps` or the first
/// absorbing joint regeneration, whichever comes first; if either marginal
/// construction is censored the joint trace is censored and covers the
/// common safe prefix.
pub fn joint_trace(
    field: &PassageField,
    table: &LevelTable,
    origin_x: Site,
    origin_y: Site,
    q: f64,
    escape_margin: u32,
    max_steps: u32,
) -> Result<CoalescenceTrace> {
    if origin_x.diag() != origin_y.diag() {
        return Err(Error::PreconditionDiagonal);
    }
    if table.level(origin_x)? != ESCAPES || table.level(origin_y)? != ESCAPES {
        return Err(Error::OriginNotPercolating);
    }
    let tx = stabilized_path(field, table, origin_x, q, escape_margin, max_steps)?;
    let ty = stabilized_path(field, table, origin_y, q, escape_margin, max_steps)?;
    Ok(merge_traces(&tx, &ty))
}

/// Merges two marginal traces into the joint regeneration record.
pub fn merge_traces(tx: &QPathTrace, ty: &QPathTrace) -> CoalescenceTrace {
    let horizon = tx.stabilized_upto.min(ty.stabilized_upto);
    let mut taus = Vec::new();
    let mut zs = Vec::new();
    taus.push(0);
    zs.push(tx.origin.l1(ty.origin) as u32);
    let times_y: hashbrown::HashSet<u32> =
        ty.regenerations.iter().map(|r| r.time).collect();
    let mut absorbed = zs[0] == 0;
    for r in &tx.regenerations {
        if absorbed || r.time > horizon {
            break;
        }
        if times_y.contains(&r.time) {
            let z = tx.site_at(r.time).l1(ty.site_at(r.time)) as u32;
            taus.push(r.time);
            zs.push(z);
            if z == 0 {
                absorbed = true;
            }
        }
    }
    let mut n0 = None;
    for n in 0..=horizon {
        if tx.site_at(n) == ty.site_at(n) {
            n0 = Some(n);
            break;
        }
    }
    CoalescenceTrace {
        origins: (tx.origin, ty.origin),
        q: tx.q,
        taus,
        zs,
        n0,
        censored: tx.censored || ty.censored,
    }
}

/// Tail fit of joint regeneration increments `tau_{j+1} - tau_j`.
pub fn fit_joint_tail(increments: &[u32]) -> Result<TailFit> {
    stats::fit_survival_tail(increments, 1000)
}

/// Per-bucket estimate of `E[log Z_{j+1} - log Z_j | Z_j ~ m]`.
///
/// A transition belongs to bucket `m` when `Z_j` lies in `[2m/3, 4m/3)`;
/// absorbing transitions (`Z_{j+1} = 0`) are excluded from the drift mean
/// and counted separately.
#[derive(Debug, Clone, Copy)]
pub struct DriftEstimate {
    pub m: u32,
    pub drift: f64,
    pub stderr: f64,
    /// Non-absorbing transitions in the bucket.
    pub n: usize,
    /// Absorbing transitions in the bucket.
    pub absorbed: usize,
}

/// Minimum non-absorbing transitions for a bucket to be reported.
pub const MIN_BUCKET_SAMPLES: usize = 200;

/// Drift profile over the given separation buckets; buckets with fewer than
/// `MIN_BUCKET_SAMPLES` usable transitions are omitted and returned in the
/// second list.
pub fn drift_profile(
    traces: &[CoalescenceTrace],
    buckets: &[u32],
) -> (Vec<DriftEstimate>, Vec<u32>) {
    let mut logs: Vec<Vec<f64>> = buckets.iter().map(|_| Vec::new()).collect();
    let mut absorbed = alloc::vec![0usize; buckets.len()];
    for trace in traces {
        for (z, z_next, _) in trace.transitions() {
            if z == 0 {
                continue;
            }
            for (b, &m) in buckets.iter().enumerate() {
                let lo = 2.0 * m as f64 / 3.0;
                let hi = 4.0 * m as f64 / 3.0;
                if (z as f64) >= lo && (z as f64) < hi {
                    if z_next == 0 {
                        absorbed[b] += 1;
                    } else {
                        logs[b].push(libm::log(z_next as f64) - libm::log(z as f64));
                    }
                    break;
                }
            }
        }
    }
    let mut estimates = Vec::new();
    let mut omitted = Vec::new();
    for (b, &m) in buckets.iter().enumerate() {
        if logs[b].len() < MIN_BUCKET_SAMPLES {
            omitted.push(m);
            continue;
        }
        estimates.push(DriftEstimate {
            m,
            drift: stats::mean(&logs[b]),
            stderr: stats::stderr_of_mean(&logs[b]),
            n: logs[b].len(),
            absorbed: absorbed[b],
        });
    }
    (estimates, omitted)
}

/// Smallest even bucket such that every reported bucket at or above it has
/// `drift + 2 stderr <= 0`.
pub fn select_m0(estimates: &[DriftEstimate]) -> Option<u32> {
    let mut sorted: Vec<&DriftEstimate> = estimates.iter().collect();
    sorted.sort_by_key(|e| e.m);
    let mut candidate = None;
    for e in sorted.iter().rev() {
        if e.drift + 2.0 * e.stderr <= 0.0 {
            if e.m % 2 == 0 {
                candidate = Some(e.m);
            }
        } else {
            break;
        }
    }
    candidate
}

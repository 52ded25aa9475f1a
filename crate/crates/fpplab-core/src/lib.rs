//! Core algorithms for first-passage percolation on the two-dimensional
//! integer lattice with unit-atom passage times.
//!
//! Everything in this crate is deterministic given a seed and operates on
//! finite axis-aligned windows. The companion `fpplab` crate adds IO, file
//! formats, a CLI, and parallel experiment drivers.
//!
//! Module map:
//!
//! * [`lattice`] — windows, sites, passage-time fields, tie-breaking uniforms
//! * [`oriented`] — longest-oriented-open-path tables and percolation proxies
//! * [`qpath`] — randomized greedy paths, regeneration records, direction
//!   estimates
//! * [`coalescence`] — joint regenerations of path pairs and the separation
//!   chain
//! * [`oracle`] — exact shortest-path passage times, sandwich and two-sided
//!   geodesic constructions
//! * [`cone`] — rightmost-path speed and the flat-edge angular sector
//! * [`stats`] — survival-tail fits, bootstrap intervals, drift profiles

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod coalescence;
pub mod cone;
mod error;
pub mod lattice;
pub mod oracle;
pub mod oriented;
pub mod qpath;
pub mod stats;
pub mod streams;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use fpplab::config::ExperimentConfig;
use fpplab::experiments::{Kind, RunOptions};

/// Monte Carlo laboratory for first-passage percolation with unit-atom
/// passage times: directed q-paths on the oriented cluster, regeneration
/// statistics, coalescence, sandwich and two-sided geodesics, all checked
/// against an exact shortest-path oracle.
#[derive(Parser)]
#[command(name = "fpplab", version, about, max_term_width = 100)]
struct Cli {
    /// Declarative TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Master seed; replicas derive disjoint streams from it.
    #[arg(long)]
    seed: u64,
    /// Number of replicas (fields) to run.
    #[arg(long)]
    replicas: usize,
    /// Output directory for artifacts and the manifest.
    #[arg(long)]
    out_dir: PathBuf,
    /// Exit non-zero when the experiment's acceptance checks fail.
    #[arg(long)]
    check: bool,
    /// Also emit an SVG snapshot (small demo windows only).
    #[arg(long)]
    render: bool,
    /// Open-edge probability.
    #[arg(long)]
    p: Option<f64>,
    /// Tie-breaking parameter.
    #[arg(long)]
    q: Option<f64>,
    /// Forward construction depth in steps.
    #[arg(long)]
    depth: Option<u32>,
    /// Construction depth of origin-centered experiments.
    #[arg(long)]
    centered_depth: Option<u32>,
    /// Censoring margin from the far window boundary.
    #[arg(long)]
    escape_margin: Option<u32>,
    /// Skip the per-row CSV tables.
    #[arg(long)]
    no_rows: bool,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Direction estimates over a q-grid with common random numbers.
    /// CSV: replica, q, j, T_j, Y_j_x, Y_j_t, censored.
    DirectionCurve(CommonArgs),
    /// Joint regenerations, absorption rates, tail fits, drift profile.
    /// CSV: replica, q, j, tau_j, Z_j, absorbed.
    Coalescence(CommonArgs),
    /// Sandwich geodesics through non-percolating origins.
    /// CSV: replica, j_r, j_l, n0, n0_anti, delta_size, restricted_time,
    /// unrestricted_time, times_equal, subchecks_passed, subchecks_total.
    Sandwich(CommonArgs),
    /// Two-sided geodesics through bi-directional points and the density
    /// comparison. CSV: replica, x, t, back_len, fwd_len, checks_passed,
    /// checks_total.
    Bigeodesic(CommonArgs),
    /// Rightmost-path speed, flat-edge geometry, endpoint comparison.
    Cone(CommonArgs),
    /// Exhaustive cross-check of the oracle and the level tables on tiny
    /// windows.
    OracleSweep(CommonArgs),
    /// Write a field snapshot (text lines plus JSON header).
    ExportField {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the forward/anti level tables.
        #[arg(long)]
        levels: bool,
    },
}

fn build_config(config_path: Option<&PathBuf>, args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match config_path {
        Some(path) => ExperimentConfig::from_toml_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.seed = args.seed;
    cfg.replicas = args.replicas;
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(q) = args.q {
        cfg.q = q;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(d) = args.centered_depth {
        cfg.centered_depth = d;
    }
    if let Some(m) = args.escape_margin {
        cfg.escape_margin = m;
    }
    if args.no_rows {
        cfg.emit_rows = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (kind, common) = match &cli.command {
        Command::DirectionCurve(c) => (Some(Kind::DirectionCurve), c.clone()),
        Command::Coalescence(c) => (Some(Kind::Coalescence), c.clone()),
        Command::Sandwich(c) => (Some(Kind::Sandwich), c.clone()),
        Command::Bigeodesic(c) => (Some(Kind::Bigeodesic), c.clone()),
        Command::Cone(c) => (Some(Kind::Cone), c.clone()),
        Command::OracleSweep(c) => (Some(Kind::OracleSweep), c.clone()),
        Command::ExportField { common, .. } => (None, common.clone()),
    };
    let cfg = build_config(cli.config.as_ref(), &common)?;

    let Some(kind) = kind else {
        let Command::ExportField { levels, .. } = &cli.command else { unreachable!() };
        fpplab::export_field(&cfg, &common.out_dir, *levels)?;
        println!("wrote field snapshot to {}", common.out_dir.display());
        return Ok(ExitCode::SUCCESS);
    };

    let opts = RunOptions { render: common.render };
    let outcome = fpplab::run_experiment(kind, &cfg, &common.out_dir, opts)?;
    match outcome.pass {
        Some(true) => println!("{}: checks passed", kind.name()),
        Some(false) => println!("{}: CHECKS FAILED", kind.name()),
        None => println!("{}: done", kind.name()),
    }
    println!("artifacts in {}", common.out_dir.display());
    if common.check && outcome.pass == Some(false) {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

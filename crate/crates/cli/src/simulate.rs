//! `simulate`: evolve, check the subsolution conditions and write artifacts.

use std::fs;
use std::path::Path;

use mixzone::evolution::{integrate, Blowup, InterfaceState, StepperConfig};
use mixzone::subsolution::{subsolution_report, ZoneLattice};
use mixzone::MixError;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::output::{snapshot_name, write_json, write_snapshot, write_trace, OutputRow};

#[derive(Debug)]
pub enum SimulateError {
    Config(ConfigError),
    Io(std::io::Error),
    Numerics(MixError),
}

impl std::fmt::Display for SimulateError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(e) => write!(f, "configuration error: {e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Numerics(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl std::error::Error for SimulateError {}

impl From<std::io::Error> for SimulateError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<ConfigError> for SimulateError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<MixError> for SimulateError {
    fn from(e: MixError) -> Self {
        match e {
            MixError::InvalidParameter { name, reason } => Self::Config(ConfigError::new(name, reason)),
            MixError::Stability { dt, bound } => {
                Self::Config(ConfigError::new("time.dt", format!("{dt} exceeds the stability bound {bound:.6e}")))
            }
            other => Self::Numerics(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub stability_bound: f64,
    pub steps: usize,
    pub snapshots: usize,
    pub blowup: Option<Blowup>,
    /// First output time at which |γ♯| ≥ ½ or a hull slack is violated.
    pub subsolution_failure: Option<f64>,
    pub max_zero_mean_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub config: RunConfig,
    pub cli_version: &'static str,
    pub core_version: &'static str,
    pub trace_columns: [&'static str; 8],
    pub measured: Measured,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub rows: Vec<OutputRow>,
    pub measured: Measured,
}

impl SimulateOutcome {
    /// Scientific success: no blowup and no subsolution failure.
    pub fn ok(&self) -> bool {
        self.measured.blowup.is_none() && self.measured.subsolution_failure.is_none()
    }
}

/// Run `cfg` and write trace.csv, snapshots/ and meta.json into `out`.
/// `base` resolves relative snapshot paths in the initial data.
pub fn run_simulate(cfg: &RunConfig, base: &Path, out: &Path) -> Result<SimulateOutcome, SimulateError> {
    cfg.validate()?;
    let cfg = cfg.clone().resolved();
    let f0 = cfg.initial_grid(base)?;
    let state = InterfaceState::new(f0, cfg.time.t_start, cfg.model.c, cfg.delta(), cfg.model.kappa)?
        .with_trunc_radius(cfg.trunc_radius())?;
    let stepper = StepperConfig {
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        output_every: cfg.time.output_every,
        with_diagnostics: true,
        ..Default::default()
    };
    let traj = integrate(&state, &stepper)?;
    let lattice = ZoneLattice::interior(cfg.grid.n, cfg.stride(), cfg.check.n_lambda)?;
    let report = subsolution_report(&traj, &lattice, cfg.model.c)?;

    let rows: Vec<OutputRow> = report
        .rows
        .iter()
        .map(|r| {
            let snap = traj.snapshots.iter().find(|s| s.t == r.t).expect("report rows come from snapshots");
            let d = snap.diagnostics.expect("diagnostics requested");
            OutputRow {
                t: r.t,
                l2_norm: snap.f.l2_norm(),
                h4_norm: d.h4_norm,
                energy: d.energy,
                max_abs_gamma: r.max_abs_gamma,
                min_hull_slack: r.min_slacks.iter().copied().fold(f64::INFINITY, f64::min),
                m_bound: r.m_bound,
                zero_mean_residual: r.max_zero_mean_residual,
            }
        })
        .collect();

    fs::create_dir_all(out.join("snapshots"))?;
    write_trace(&out.join("trace.csv"), &rows)?;
    for s in &traj.snapshots {
        write_snapshot(&out.join("snapshots").join(snapshot_name(s.t)), &s.f)?;
    }
    let measured = Measured {
        stability_bound: traj.stability_bound,
        steps: traj.steps,
        snapshots: traj.snapshots.len(),
        blowup: traj.blowup.clone(),
        subsolution_failure: report.first_failure,
        max_zero_mean_residual: rows.iter().map(|r| r.zero_mean_residual).fold(0.0, f64::max),
    };
    let meta = Meta {
        config: cfg,
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: mixzone::VERSION,
        trace_columns: crate::output::TRACE_COLUMNS,
        measured: measured.clone(),
    };
    write_json(&out.join("meta.json"), &meta)?;
    Ok(SimulateOutcome { rows, measured })
}

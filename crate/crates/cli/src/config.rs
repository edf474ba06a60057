//! Run configuration: JSON ingestion, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use mixzone::GridFunction1D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::read_snapshot;

/// Bad configuration, tagged with the dotted key path it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub domain_length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 1024, domain_length: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub c: f64,
    /// Mollifier width; 4h when absent.
    pub delta: Option<f64>,
    pub kappa: f64,
    /// Window radius of the velocity integral; L/2 when absent.
    pub trunc_radius: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { c: 1.0, delta: None, kappa: 1e-3, trunc_radius: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Time of the initial data; nonzero when resuming from a snapshot.
    pub t_start: f64,
    pub output_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { dt: 0.01, t_end: 0.1, t_start: 0.0, output_every: 1 }
    }
}

/// Sampling of the mixing zone for the subsolution checks: every stride-th
/// site and `n_lambda` interior levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    /// Site stride; N/32 when absent.
    pub stride: Option<usize>,
    pub n_lambda: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { stride: None, n_lambda: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero {},
    /// amplitude·exp(−((x − center)/width)²)
    GaussianBump {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// amplitude·cos(wavenumber·x + phase)·exp(−(x/width)²); the phase is
    /// drawn from the seed when absent.
    CosinePacket {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
        #[serde(default = "default_packet_width")]
        width: f64,
        #[serde(default)]
        phase: Option<f64>,
    },
    /// Snapshot CSV (x, f); relative paths resolve against the config file.
    File { path: PathBuf },
}

fn default_amplitude() -> f64 {
    0.1
}

fn one() -> f64 {
    1.0
}

fn default_packet_width() -> f64 {
    4.0
}

impl Default for InitialData {
    fn default() -> Self {
        Self::GaussianBump { amplitude: 0.1, width: 1.0, center: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub time: TimeConfig,
    pub initial: InitialData,
    pub check: CheckConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn h(&self) -> f64 {
        self.grid.domain_length / self.grid.n as f64
    }

    pub fn delta(&self) -> f64 {
        self.model.delta.unwrap_or(4.0 * self.h())
    }

    pub fn trunc_radius(&self) -> f64 {
        self.model.trunc_radius.unwrap_or(0.5 * self.grid.domain_length)
    }

    pub fn stride(&self) -> usize {
        self.check.stride.unwrap_or((self.grid.n / 32).max(1))
    }

    /// Fill the optional fields with their defaults so the echo is explicit.
    pub fn resolved(mut self) -> Self {
        self.model.delta = Some(self.delta());
        self.model.trunc_radius = Some(self.trunc_radius());
        self.check.stride = Some(self.stride());
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if g.n < mixzone::grid::MIN_POINTS || !g.n.is_power_of_two() {
            return Err(ConfigError::new(
                "grid.n",
                format!("{} must be a power of two and at least {}", g.n, mixzone::grid::MIN_POINTS),
            ));
        }
        positive("grid.domain_length", g.domain_length)?;
        let m = &self.model;
        if !(m.c > 0.0 && m.c < 2.0) {
            return Err(ConfigError::new("model.c", format!("{} must lie in the open interval (0, 2)", m.c)));
        }
        if let Some(d) = m.delta {
            positive("model.delta", d)?;
            if d < 2.0 * self.h() {
                return Err(ConfigError::new("model.delta", format!("{d} is below two grid cells")));
            }
        }
        if !(m.kappa >= 0.0 && m.kappa.is_finite()) {
            return Err(ConfigError::new("model.kappa", "must be finite and nonnegative"));
        }
        if let Some(r) = m.trunc_radius {
            if !(r > 0.0 && r <= 0.5 * g.domain_length) {
                return Err(ConfigError::new("model.trunc_radius", format!("{r} must lie in (0, L/2]")));
            }
        }
        let t = &self.time;
        positive("time.dt", t.dt)?;
        if !(t.t_start >= 0.0 && t.t_start.is_finite()) {
            return Err(ConfigError::new("time.t_start", "must be finite and nonnegative"));
        }
        if !(t.t_end > t.t_start && t.t_end.is_finite()) {
            return Err(ConfigError::new("time.t_end", "must be finite and exceed time.t_start"));
        }
        if t.output_every == 0 {
            return Err(ConfigError::new("time.output_every", "must be at least 1"));
        }
        if self.check.stride == Some(0) {
            return Err(ConfigError::new("check.stride", "must be at least 1"));
        }
        if self.check.n_lambda == 0 {
            return Err(ConfigError::new("check.n_lambda", "need at least one level"));
        }
        match &self.initial {
            InitialData::GaussianBump { amplitude, width, center } => {
                finite("initial.amplitude", *amplitude)?;
                positive("initial.width", *width)?;
                finite("initial.center", *center)?;
            }
            InitialData::CosinePacket { amplitude, wavenumber, width, phase } => {
                finite("initial.amplitude", *amplitude)?;
                finite("initial.wavenumber", *wavenumber)?;
                positive("initial.width", *width)?;
                if let Some(p) = phase {
                    finite("initial.phase", *p)?;
                }
            }
            InitialData::Zero {} | InitialData::File { .. } => {}
        }
        Ok(())
    }

    /// Initial grid function; `base` anchors relative snapshot paths.
    pub fn initial_grid(&self, base: &Path) -> Result<GridFunction1D, ConfigError> {
        let (n, l) = (self.grid.n, self.grid.domain_length);
        let built = match &self.initial {
            InitialData::Zero {} => GridFunction1D::zeros(n, l),
            &InitialData::GaussianBump { amplitude, width, center } => {
                GridFunction1D::from_fn(n, l, |x| amplitude * (-((x - center) / width).powi(2)).exp())
            }
            &InitialData::CosinePacket { amplitude, wavenumber, width, phase } => {
                let phase = phase.unwrap_or_else(|| {
                    ChaCha8Rng::seed_from_u64(self.seed).gen_range(0.0..std::f64::consts::TAU)
                });
                GridFunction1D::from_fn(n, l, |x| {
                    amplitude * (wavenumber * x + phase).cos() * (-(x / width).powi(2)).exp()
                })
            }
            InitialData::File { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let f = read_snapshot(&full)
                    .map_err(|e| ConfigError::new("initial.path", format!("{}: {e}", full.display())))?;
                if f.len() != n {
                    return Err(ConfigError::new(
                        "initial.path",
                        format!("snapshot has {} points but grid.n is {n}", f.len()),
                    ));
                }
                if (f.length() - l).abs() > 1e-9 * l {
                    return Err(ConfigError::new(
                        "initial.path",
                        format!("snapshot period {} differs from grid.domain_length {l}", f.length()),
                    ));
                }
                GridFunction1D::new(f.into_samples(), l)
            }
        };
        built.map_err(|e| ConfigError::new("initial", e.to_string()))
    }
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("{v} must be finite and positive")))
    }
}

fn finite(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, "must be finite"))
    }
}

/// Parse and validate a JSON document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg.resolved())
}

//! Run configuration (TOML) and the initial-data presets.
//!
//! ```toml
//! schema_version = 1
//!
//! [model]
//! a = 1.0
//! gamma = 5.0
//! mu = 0.1
//! P = 1.0
//! R = 2
//! N = 32
//!
//! [time]
//! t_end = 5.0
//! output_dt = 0.05
//!
//! [initial]
//! preset = "single_mode"
//! k = 4
//! amplitude = 0.01
//! target = "velocity"
//! ```

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::MonitorSettings;
use crate::error::{Error, Result};
use crate::galerkin::{output_grid, RunOptions, Stepping};
use crate::model::{stationary_xi, InitialData, ModelParams, Profile};
use crate::spectral::GridField;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelBlock,
    pub time: TimeBlock,
    pub initial: InitialConfig,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub monitors: MonitorBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_xi_floor")]
    pub xi_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t_end: f64,
    #[serde(default = "default_tol_ode")]
    pub tol_ode: f64,
    /// Spacing of the recorded diagnostics; defaults to `t_end / 100`.
    #[serde(default)]
    pub output_dt: Option<f64>,
    /// Fixed step size. Without it the step is chosen adaptively.
    #[serde(default)]
    pub dt: Option<f64>,
}

/// Initial-data preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `v0 = 0`, `xi0 = xi*`.
    Stationary,
    /// One mode of amplitude `amplitude` on top of the stationary state.
    SingleMode { k: usize, amplitude: f64, target: Target },
    /// `v0 = 0`, `xi0 = pi0`: only the boundary is out of equilibrium.
    BoundaryRelax { pi0: f64 },
    /// Analytic data with geometrically decaying modes: `v0 = amplitude
    /// sum_k ratio^k w_k`, `xi0 = xi* + amplitude sum_k ratio^k s_k`.
    MixedMode { amplitude: f64, ratio: f64 },
    /// Sampled data from a CSV file with columns `x, v, xi` on a closed
    /// uniform grid.
    Custom { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Velocity,
    Volume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
            snapshot_times: Vec::new(),
        }
    }
}

/// Monitor tolerances. Names listed in `soft` are reported but never abort
/// a run: `mean_v`, `energy`, `endpoint`, `u_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorBlock {
    #[serde(default = "default_mean_v_tol")]
    pub mean_v_tol: f64,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default = "default_u_end_tol")]
    pub u_end_tol: f64,
    #[serde(default)]
    pub soft: Vec<String>,
}

impl Default for MonitorBlock {
    fn default() -> Self {
        Self {
            mean_v_tol: default_mean_v_tol(),
            energy_tol: default_energy_tol(),
            u_end_tol: default_u_end_tol(),
            soft: Vec::new(),
        }
    }
}

const MONITOR_NAMES: [&str; 4] = ["mean_v", "energy", "endpoint", "u_end"];

fn default_oversample() -> usize {
    4
}
fn default_xi_floor() -> f64 {
    1e-8
}
fn default_tol_ode() -> f64 {
    1e-10
}
fn default_directory() -> PathBuf {
    PathBuf::from("output")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}
fn default_mean_v_tol() -> f64 {
    1e-12
}
fn default_energy_tol() -> f64 {
    1e-6
}
fn default_u_end_tol() -> f64 {
    1e-10
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<()> {
        self.params()?;
        let t = &self.time;
        if !(t.t_end > 0.0) {
            return Err(Error::Config(format!("time.t_end must be positive, got {}", t.t_end)));
        }
        if let Some(dt) = t.output_dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("time.output_dt must be positive, got {dt}")));
            }
        }
        if let Some(dt) = t.dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("time.dt must be positive, got {dt}")));
            }
        }
        if let Some(bad) = self.monitors.soft.iter().find(|s| !MONITOR_NAMES.contains(&s.as_str())) {
            return Err(Error::Config(format!(
                "monitors.soft: unknown monitor `{bad}` (known: {})",
                MONITOR_NAMES.join(", ")
            )));
        }
        if let Some(bad) = self.output.snapshot_times.iter().find(|&&s| !(0.0..=t.t_end).contains(&s)) {
            return Err(Error::Config(format!("output.snapshot_times: {bad} outside [0, t_end]")));
        }
        if let InitialConfig::SingleMode { k, .. } = self.initial {
            if k == 0 || k > self.model.n {
                return Err(Error::Config(format!("initial.k must be in 1..={}, got {k}", self.model.n)));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        ModelParams::new(m.a, m.gamma, m.mu, m.p, m.r, m.n)?
            .with_oversample(m.oversample)?
            .with_xi_floor(m.xi_floor)?
            .with_tol_ode(self.time.tol_ode)
    }

    pub fn output_dt(&self) -> f64 {
        self.time.output_dt.unwrap_or(self.time.t_end / 100.0)
    }

    /// Recorded times: the output grid merged with the snapshot times.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = output_grid(self.time.t_end, self.output_dt());
        times.extend(self.output.snapshot_times.iter().copied().filter(|&t| t > 0.0));
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    pub fn run_options(&self) -> RunOptions {
        let soft = |name: &str| self.monitors.soft.iter().any(|s| s == name);
        let monitors = MonitorSettings {
            mean_v_tol: if soft("mean_v") { f64::INFINITY } else { self.monitors.mean_v_tol },
            energy_tol: if soft("energy") { None } else { Some(self.monitors.energy_tol) },
            exact_endpoints: !soft("endpoint"),
            u_end_tol: if soft("u_end") { f64::INFINITY } else { self.monitors.u_end_tol },
        };
        let stepping = match self.time.dt {
            Some(dt) => Stepping::Fixed { dt },
            None => {
                let h_max = self.output_dt();
                Stepping::Adaptive {
                    h0: h_max.min(1e-3),
                    h_max,
                }
            }
        };
        RunOptions {
            stepping,
            monitors,
            variant: Default::default(),
        }
    }

    /// Builds the initial data; relative `custom` paths resolve against
    /// `base_dir`.
    pub fn initial_data(&self, params: &ModelParams, base_dir: &Path) -> Result<InitialData> {
        Ok(match &self.initial {
            InitialConfig::Stationary => stationary(params),
            InitialConfig::SingleMode { k, amplitude, target } => single_mode(params, *k, *amplitude, *target),
            InitialConfig::BoundaryRelax { pi0 } => boundary_relax(*pi0),
            InitialConfig::MixedMode { amplitude, ratio } => mixed_mode(params, *amplitude, *ratio)?,
            InitialConfig::Custom { file } => {
                let path = if file.is_absolute() { file.clone() } else { base_dir.join(file) };
                read_custom(&path)?
            }
        })
    }
}

pub fn stationary(params: &ModelParams) -> InitialData {
    InitialData {
        v0: Profile::Constant(0.0),
        xi0: Profile::Constant(stationary_xi(params)),
    }
}

pub fn single_mode(params: &ModelParams, k: usize, amplitude: f64, target: Target) -> InitialData {
    let xs = stationary_xi(params);
    let kf = PI * k as f64;
    match target {
        Target::Velocity => InitialData {
            v0: Profile::function(move |x| amplitude * SQRT_2 * (kf * x).cos()),
            xi0: Profile::Constant(xs),
        },
        Target::Volume => InitialData {
            v0: Profile::Constant(0.0),
            xi0: Profile::function(move |x| xs + amplitude * SQRT_2 * (kf * x).sin()),
        },
    }
}

pub fn boundary_relax(pi0: f64) -> InitialData {
    InitialData {
        v0: Profile::Constant(0.0),
        xi0: Profile::Constant(pi0),
    }
}

/// Analytic data whose cosine/sine coefficients are `amplitude ratio^k`.
pub fn mixed_mode(params: &ModelParams, amplitude: f64, ratio: f64) -> Result<InitialData> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::Config(format!("mixed_mode ratio must be in [0, 1), got {ratio}")));
    }
    let xs = stationary_xi(params);
    // sum_{k>=1} r^k cos(k t) and sum_{k>=1} r^k sin(k t) in closed form.
    let den = move |t: f64| 1.0 - 2.0 * ratio * t.cos() + ratio * ratio;
    Ok(InitialData {
        v0: Profile::function(move |x| {
            let t = PI * x;
            amplitude * SQRT_2 * (ratio * t.cos() - ratio * ratio) / den(t)
        }),
        xi0: Profile::function(move |x| {
            let t = PI * x;
            xs + amplitude * SQRT_2 * ratio * t.sin() / den(t)
        }),
    })
}

/// Reads `x, v, xi` columns (header row required) sampled on a closed
/// uniform grid.
pub fn read_custom(path: &Path) -> Result<InitialData> {
    let err = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["x", "v", "xi"] {
        return Err(err(format!("expected columns x, v, xi, found {}", names.join(", "))));
    }
    let (mut xs, mut vs, mut xis) = (Vec::new(), Vec::new(), Vec::new());
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| err(e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            row.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| err(format!("row {}: column {}: {e}", line + 2, names[i])))
        };
        xs.push(parse(0)?);
        vs.push(parse(1)?);
        xis.push(parse(2)?);
    }
    let m = xs.len();
    if m < 3 {
        return Err(err(format!("need at least 3 rows, found {m}")));
    }
    let h = 1.0 / (m - 1) as f64;
    if let Some(j) = (0..m).find(|&j| (xs[j] - j as f64 * h).abs() > 1e-9) {
        return Err(err(format!("x is not the closed uniform grid on [0, 1] (row {})", j + 2)));
    }
    Ok(InitialData {
        v0: Profile::Sampled(GridField::from_values(vs)),
        xi0: Profile::Sampled(GridField::from_values(xis)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
[model]
a = 1.0
gamma = 5.0
mu = 0.1
P = 1.0
R = 2
N = 16
[time]
t_end = 1.0
[initial]
preset = "single_mode"
k = 3
amplitude = 1e-4
target = "velocity"
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = RunConfig::from_toml_str(BASE).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.grid, 65);
        assert_eq!(cfg.output.formats, vec![Format::Csv]);
        assert_eq!(cfg.output_times().len(), 100);
        assert!(matches!(cfg.run_options().stepping, Stepping::Adaptive { .. }));
        assert_eq!(
            cfg.initial,
            InitialConfig::SingleMode {
                k: 3,
                amplitude: 1e-4,
                target: Target::Velocity
            }
        );
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::from_toml_str(BASE).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_configs() {
        let p_zero = BASE.replace("P = 1.0", "P = 0.0");
        let e = RunConfig::from_toml_str(&p_zero).unwrap_err();
        assert!(e.to_string().contains("A1"), "{e}");

        let unknown = BASE.replace("mu = 0.1", "mu = 0.1\nnu = 2.0");
        let e = RunConfig::from_toml_str(&unknown).unwrap_err();
        assert!(e.to_string().contains("nu"), "{e}");
        assert!(e.to_string().contains("line"), "{e}");

        let version = BASE.replace("schema_version = 1", "schema_version = 7");
        assert!(RunConfig::from_toml_str(&version).is_err());

        let k = BASE.replace("k = 3", "k = 40");
        assert!(RunConfig::from_toml_str(&k).is_err());
    }

    #[test]
    fn mixed_mode_has_geometric_coefficients() {
        let p = ModelParams::new(1.0, 5.0, 0.1, 1.0, 2, 16).unwrap();
        let init = mixed_mode(&p, 0.01, 0.5).unwrap();
        let v = init.v0.sample(2049);
        let xi = init.xi0.sample(2049);
        let c = crate::spectral::cosine_analyze(&v, 6).unwrap();
        let fluct = GridField::from_values(xi.values().iter().map(|x| x - 1.0).collect());
        let s = crate::spectral::sine_analyze(&fluct, 6).unwrap();
        for k in 1..=6 {
            let expect = 0.01 * 0.5f64.powi(k as i32);
            assert!((c.get(k) - expect).abs() < 1e-10, "cos k={k}");
            assert!((s.get(k) - expect).abs() < 1e-10, "sin k={k}");
        }
        assert!(c.get(0).abs() < 1e-14);
    }
}

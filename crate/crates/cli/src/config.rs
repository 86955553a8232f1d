//! Per-subcommand parameters. Every struct rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use vortexlab::evolve::{BoxSpec, Nonlinearity, TorusConfig};
use vortexlab::helmholtz::{Domain, Resolution, RungeOptions, TruncationConfig};
use vortexlab::scenarios::RunPlan;
use vortexlab::schrod_approx::PipelineConfig;
use vortexlab::vortex::{EventConfig, ExtractConfig};

use crate::CliError;

pub const SCHEMA: &str = include_str!("schema.json");

/// Keys shared by every config file; command-line flags take precedence.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Reads `path` (or nothing) into `T`, splitting off the shared keys.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<(T, Common), CliError> {
    let Some(path) = path else {
        return Ok((T::default(), Common::default()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("{}: top level must be an object", path.display())))?;
    let mut common = Common::default();
    if let Some(s) = obj.remove("seed") {
        common.seed = Some(
            s.as_u64()
                .ok_or_else(|| CliError::Config("seed must be a nonnegative integer".into()))?,
        );
    }
    if let Some(o) = obj.remove("out") {
        let s = o.as_str().ok_or_else(|| CliError::Config("out must be a string".into()))?;
        common.out = Some(PathBuf::from(s));
    }
    let cfg = serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, common))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} = {v} must be positive")))
    }
}

fn grid_size(name: &str, n: usize) -> Result<(), CliError> {
    if n >= 16 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} = {n} must be a power of two >= 16")))
    }
}

/// Known local solution used as input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HelmholtzTruth {
    /// `G_τ(x − position)`.
    PointSource { position: [f64; 3] },
    /// `exp(i k·x)` with `|k|² = −τ`; needs `τ < 0`.
    PlaneWave { direction: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RungeRun {
    pub tau: f64,
    pub eps: f64,
    pub domain: Domain,
    /// Defaults to a ball of radius `0.3R` centred `3R` from the domain.
    pub source: Option<Domain>,
    pub resolution: Resolution,
    pub ground_truth: HelmholtzTruth,
    pub runge: RungeOptions,
    /// Cutoffs for the entire-solution error curve.
    pub l0: Vec<usize>,
    pub truncation: TruncationConfig,
    /// Random trials of the three-ball stability probe; 0 skips it.
    pub stability_trials: usize,
}

impl Default for RungeRun {
    fn default() -> Self {
        Self {
            tau: 1.0,
            eps: 5e-3,
            domain: Domain::unit_ball(),
            source: None,
            resolution: Resolution::default(),
            ground_truth: HelmholtzTruth::PointSource { position: [2.0, 0.0, 0.0] },
            runge: RungeOptions::default(),
            l0: vec![4, 8, 12, 16, 20],
            truncation: TruncationConfig::default(),
            stability_trials: 0,
        }
    }
}

impl RungeRun {
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.tau.is_finite() {
            return Err(CliError::Config("tau must be finite".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CliError::Config(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if let HelmholtzTruth::PlaneWave { direction } = self.ground_truth {
            if self.tau >= 0.0 {
                return Err(CliError::Config("plane_wave needs tau < 0".into()));
            }
            if direction.iter().all(|d| *d == 0.0) {
                return Err(CliError::Config("plane_wave direction must be nonzero".into()));
            }
        }
        if self.l0.iter().any(|&l| l > self.truncation.max_degree) {
            return Err(CliError::Config(format!("l0 entries must be <= {}", self.truncation.max_degree)));
        }
        Ok(())
    }
}

/// Space-time ground truth for the Schrödinger pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchrodTruth {
    /// `G_{τ₀}(x − position) e^{iτ₀t}`.
    SingleMode { tau0: f64, position: [f64; 3] },
    /// One of the polynomial presets.
    Scenario {
        name: String,
        #[serde(default)]
        radius: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchrodRun {
    pub ground_truth: SchrodTruth,
    pub domain: Domain,
    pub per_axis: usize,
    pub half_width: f64,
    pub n_times: usize,
    pub residual_tol: f64,
    pub eps: f64,
    /// Error is measured on this subdomain when given.
    pub interior: Option<Domain>,
    pub pipeline: PipelineConfig,
}

impl Default for SchrodRun {
    fn default() -> Self {
        Self {
            ground_truth: SchrodTruth::SingleMode {
                tau0: -2.0 * std::f64::consts::PI,
                position: [2.0, 0.0, 0.0],
            },
            domain: Domain::unit_ball(),
            per_axis: 16,
            half_width: 0.5,
            n_times: 64,
            residual_tol: 0.1,
            eps: 0.05,
            interior: None,
            pipeline: PipelineConfig::default(),
        }
    }
}

impl SchrodRun {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("half_width", self.half_width)?;
        positive("residual_tol", self.residual_tol)?;
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CliError::Config(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if self.per_axis < 4 {
            return Err(CliError::Config("per_axis must be at least 4".into()));
        }
        if let Some(hk) = &self.pipeline.hk {
            BoxSpec::new(hk.grid.length, hk.grid.n, hk.grid.periodic).map_err(|e| CliError::Config(format!("pipeline.hk.grid: {e}")))?;
        }
        Ok(())
    }
}

/// Initial datum on the periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Constant { value: [f64; 2] },
    /// `1 − a e^{−|x−c|²/(2w²)}(1 + i x₁/2)`.
    Bump { amplitude: f64, width: f64, center: [f64; 3] },
    /// `1 + a ξ` with `ξ` uniform complex noise in the unit square, seeded.
    Noise { amplitude: f64 },
    Snapshot { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveRun {
    pub length: f64,
    pub n: usize,
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    pub dt: f64,
    pub t_end: f64,
    /// Observables and snapshots are recorded this many times after `t = 0`.
    pub records: usize,
    pub write_snapshots: bool,
    pub initial: Initial,
}

impl Default for EvolveRun {
    fn default() -> Self {
        Self {
            length: 16.0,
            n: 32,
            kappa: 1.0,
            nonlinearity: Nonlinearity::GrossPitaevskii,
            dt: 1e-3,
            t_end: 0.1,
            records: 10,
            write_snapshots: false,
            initial: Initial::Constant { value: [1.0, 0.0] },
        }
    }
}

impl EvolveRun {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("length", self.length)?;
        positive("dt", self.dt)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(CliError::Config("t_end must be nonnegative".into()));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(CliError::Config(format!("t_end = {} is not a multiple of dt = {}", self.t_end, self.dt)));
        }
        if self.records == 0 {
            return Err(CliError::Config("records must be at least 1".into()));
        }
        if !matches!(self.initial, Initial::Snapshot { .. }) {
            grid_size("n", self.n)?;
        }
        if let Initial::Bump { width, .. } = self.initial {
            positive("initial.width", width)?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeRun {
    /// Snapshot files, in time order.
    pub snapshots: Vec<PathBuf>,
    /// Alternatively every `*.bin` file of a directory, sorted by name.
    pub snapshot_dir: Option<PathBuf>,
    pub extract: ExtractConfig,
    pub events: EventConfig,
    /// Largest centroid jump for component linking, in grid spacings.
    pub link_jump: f64,
}

impl Default for AnalyzeRun {
    fn default() -> Self {
        Self {
            snapshots: Vec::new(),
            snapshot_dir: None,
            extract: ExtractConfig::default(),
            events: EventConfig::default(),
            link_jump: 4.0,
        }
    }
}

impl AnalyzeRun {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.snapshots.is_empty() == self.snapshot_dir.is_none() {
            return Err(CliError::Config("give exactly one of snapshots and snapshot_dir".into()));
        }
        positive("link_jump", self.link_jump)?;
        validate_extract(&self.extract)
    }
}

fn validate_extract(c: &ExtractConfig) -> Result<(), CliError> {
    if !(c.window_fraction > 0.0 && c.window_fraction <= 1.0) {
        return Err(CliError::Config("extract.window_fraction must lie in (0, 1]".into()));
    }
    positive("extract.merge_factor", c.merge_factor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioRun {
    pub preset: String,
    pub radius: Option<f64>,
    /// Replaces the preset's suggested grid and times.
    pub plan: Option<RunPlan>,
    pub extract: ExtractConfig,
    pub events: EventConfig,
    pub write_snapshots: bool,
}

impl Default for ScenarioRun {
    fn default() -> Self {
        Self {
            preset: "hyperbolic-exchange".into(),
            radius: None,
            plan: None,
            extract: ExtractConfig::default(),
            events: EventConfig::default(),
            write_snapshots: false,
        }
    }
}

impl ScenarioRun {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = &self.plan {
            positive("plan.length", p.length)?;
            positive("plan.dt", p.dt)?;
            grid_size("plan.n", p.n)?;
            if p.steps < 2 {
                return Err(CliError::Config("plan.steps must be at least 2".into()));
            }
        }
        validate_extract(&self.extract)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusRun {
    /// Cube sides to compare.
    pub j: Vec<usize>,
    pub q_max: u64,
    pub denominator_limit: u64,
    /// Datum `v̂₀(ξ) = exp(−a|ξ|²)`.
    pub gaussian_a: f64,
    pub eval_radius: f64,
    pub eval_points: usize,
    pub eval_times: Vec<f64>,
}

impl Default for TorusRun {
    fn default() -> Self {
        let t = TorusConfig::default();
        Self {
            j: vec![2, 3, 4],
            q_max: t.q_max,
            denominator_limit: t.denominator_limit,
            gaussian_a: 1.0,
            eval_radius: 1.0,
            eval_points: 64,
            eval_times: (1..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

impl TorusRun {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.j.is_empty() || self.j.contains(&0) {
            return Err(CliError::Config("j must list positive cube sides".into()));
        }
        if self.q_max == 0 {
            return Err(CliError::Config("q_max must be at least 1".into()));
        }
        positive("gaussian_a", self.gaussian_a)?;
        positive("eval_radius", self.eval_radius)?;
        if self.eval_points == 0 || self.eval_times.is_empty() {
            return Err(CliError::Config("eval_points and eval_times must be nonempty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestRun {
    /// Also run the slower resolution and order checks.
    pub thorough: bool,
}

impl SelftestRun {
    pub fn validate(&self) -> Result<(), CliError> {
        Ok(())
    }
}

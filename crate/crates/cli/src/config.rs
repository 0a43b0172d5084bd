//! Strict TOML experiment configuration.

use anyhow::{anyhow, bail, Context, Result};
use coulombflow::initial::InitialConditionSpec;
use coulombflow::pde_solver::{SolverConfig, Viscosity};
use coulombflow::torus_field::{ScalarField, TorusGrid};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
}

impl GridConfig {
    pub fn build(&self, key: &str) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.n).map_err(|e| anyhow!("{key}: {e}"))
    }
}

/// `"auto"` (`ε = h`) or a nonnegative value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Word(String),
    Value(f64),
}

impl Default for EpsilonSpec {
    fn default() -> Self {
        EpsilonSpec::Word("auto".into())
    }
}

fn default_cfl() -> f64 {
    0.45
}

fn default_observe_every() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub m: f64,
    #[serde(default)]
    pub epsilon: EpsilonSpec,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    /// Explicit snapshot times; exclusive with `snapshots`.
    #[serde(default)]
    pub output_times: Option<Vec<f64>>,
    /// Number of uniform intervals; snapshots at `t_end·j/snapshots`, `j = 0..=snapshots`.
    #[serde(default)]
    pub snapshots: Option<usize>,
    /// Required lower bound on `u₀` for `m < 1`.
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default = "default_observe_every")]
    pub observe_every: usize,
}

impl SolverSection {
    pub fn build(&self, key: &str) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.m, self.t_end);
        cfg.epsilon = match &self.epsilon {
            EpsilonSpec::Word(w) if w == "auto" => Viscosity::Auto,
            EpsilonSpec::Word(w) => bail!("{key}.epsilon: expected \"auto\" or a nonnegative number, got \"{w}\""),
            EpsilonSpec::Value(v) => Viscosity::Value(*v),
        };
        cfg.cfl = self.cfl;
        cfg.floor_m_lt_1 = self.floor;
        cfg.observe_every = self.observe_every;
        match (&self.output_times, self.snapshots) {
            (Some(_), Some(_)) => bail!("{key}: set either output_times or snapshots, not both"),
            (Some(times), None) => cfg.output_times = times.clone(),
            (None, Some(0)) => bail!("{key}.snapshots: must be at least 1"),
            (None, Some(k)) => cfg = cfg.with_uniform_outputs(k),
            (None, None) => {}
        }
        cfg.validate().map_err(|e| anyhow!("{key}: {e}"))?;
        Ok(cfg)
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

fn default_threshold() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Used when `--out` is not given.
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Support threshold relative to `max u₀`.
    #[serde(default = "default_threshold")]
    pub support_threshold: f64,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { dir: None, formats: default_formats(), support_threshold: default_threshold() }
    }
}

fn default_front_outputs() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSection {
    pub s1: f64,
    pub s2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSection {
    pub alpha: f64,
    pub s: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperSection {
    pub c: f64,
    pub alpha: f64,
    pub s2: f64,
    pub s3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontsSection {
    pub m: f64,
    pub ubar: f64,
    pub t_end: f64,
    /// Number of uniform output intervals.
    #[serde(default = "default_front_outputs")]
    pub outputs: usize,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub single: Option<SingleSection>,
    #[serde(default)]
    pub double: Option<DoubleSection>,
    #[serde(default, rename = "super")]
    pub supersolution: Option<SuperSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Conservation,
    Barriers,
    Asymptotics,
    Subsolution,
    WaitingTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormName {
    L1,
    Linf,
    Hm1,
}

fn default_norms() -> Vec<NormName> {
    vec![NormName::L1, NormName::Linf, NormName::Hm1]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    /// Relative mass added to the last observable record.
    pub mass_leak: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    pub grid: GridConfig,
    pub solver: SolverSection,
    pub initial_condition: InitialConditionSpec,
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_norms")]
    pub decay_norms: Vec<NormName>,
    #[serde(default = "default_threshold")]
    pub support_threshold: f64,
    #[serde(default)]
    pub fault_injection: Option<FaultInjection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub name: String,
    #[serde(default)]
    pub runs: Vec<RunSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub initial_condition: Option<InitialConditionSpec>,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub fronts: Option<FrontsSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

/// A parsed config with its raw bytes and directory.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub raw: Vec<u8>,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let raw = std::fs::read(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let text = std::str::from_utf8(&raw).with_context(|| format!("config {} is not UTF-8", path.display()))?;
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| anyhow!("invalid config {}: {e}", path.display()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, raw, base_dir })
}

pub fn validate_threshold(key: &str, theta: f64) -> Result<()> {
    if !(theta >= 0.0 && theta < 1.0) {
        bail!("{key}: must lie in [0, 1), got {theta}");
    }
    Ok(())
}

/// Grid, solver config and initial field for one simulation.
pub fn build_run(
    grid: &GridConfig,
    solver: &SolverSection,
    ic: &InitialConditionSpec,
    base_dir: &Path,
    prefix: &str,
) -> Result<(SolverConfig, ScalarField)> {
    let g = grid.build(&format!("{prefix}grid"))?;
    let cfg = solver.build(&format!("{prefix}solver"))?;
    let u0 = ic.build(g, base_dir).map_err(|e| anyhow!("{prefix}{e}"))?;
    if cfg.m < 1.0 {
        let floor = cfg.floor_m_lt_1.unwrap_or(0.0);
        if u0.min() < floor || !(u0.min() > 0.0) {
            bail!("{prefix}initial_condition: min u0 = {} must be positive and at least solver.floor = {floor} when m < 1", u0.min());
        }
    }
    Ok((cfg, u0))
}

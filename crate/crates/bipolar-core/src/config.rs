//! Declarative run description: grid, packet, potential, schedule, mode and
//! thresholds, plus optional result assertions. Configs are TOML documents;
//! presets expand to plain configs and individual fields can be overridden
//! with dotted `key=value` paths.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{ConditionThresholds, StageParams};
use crate::error::{Error, Result};
use crate::evolve::TimeStepper;
use crate::grid::Grid;
use crate::packet::PacketSpec;
use crate::potential::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_left: f64,
    pub x_right: f64,
    pub n_points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.x_left, self.x_right, self.n_points)
    }
}

fn default_snapshot_count() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Explicit snapshot times; when absent a uniform schedule with
    /// `snapshot_count` points (including 0 and t_max) is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default = "default_snapshot_count")]
    pub snapshot_count: usize,
}

impl TimeConfig {
    pub fn schedule(&self) -> Vec<f64> {
        if let Some(times) = &self.snapshot_times {
            return times.clone();
        }
        if self.t_max == 0.0 || self.snapshot_count < 2 {
            return vec![0.0];
        }
        let count = self.snapshot_count;
        (0..count)
            .map(|i| self.t_max * i as f64 / (count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeConfig {
    #[default]
    Single,
    Splice {
        #[serde(default)]
        x_d: f64,
    },
    Multisurface {
        #[serde(default)]
        v0_eff: f64,
    },
}

fn default_dt_divisor() -> u32 {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub enabled: bool,
    /// Oracle runs at dt / dt_divisor.
    pub dt_divisor: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enabled: false,
            dt_divisor: default_dt_divisor(),
        }
    }
}

/// Result assertion evaluated after a run (`--assert`); failures map to the
/// dedicated exit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AssertSpec {
    CombinedMin { min: f64, max: f64 },
    CombinedFinal { min: f64, max: f64 },
    RtSum { min: f64, max: f64 },
    /// sqrt of the final coherent total-norm square.
    NormFinal { min: f64, max: f64 },
    Condition1Pass,
    Condition2Pass,
    Condition3Pass,
    BranchProbabilitiesAbove { min: f64 },
    MinusNormZero,
    StageAfterPeak,
    SplicedTotalAgrees { limit: f64 },
    PsiRMinusNonzero,
    OracleMaxDiffBelow { limit: f64 },
    MinusProbabilityRightOfDividerAbove { min: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AssertOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn default_diag_stride() -> usize {
    10
}

fn default_rt_tolerance() -> f64 {
    0.01
}

fn default_admissibility_tolerance() -> f64 {
    crate::packet::DEFAULT_ADMISSIBILITY_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub grid: GridConfig,
    pub packet: PacketSpec,
    pub potential: PotentialModel,
    pub time: TimeConfig,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub thresholds: ConditionThresholds,
    #[serde(default)]
    pub stage: StageParams,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub stepper: TimeStepper,
    #[serde(default = "default_diag_stride")]
    pub diagnostics_stride: usize,
    #[serde(default = "default_rt_tolerance")]
    pub rt_tolerance: f64,
    #[serde(default = "default_admissibility_tolerance")]
    pub admissibility_tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub asserts: Vec<AssertSpec>,
}

impl RunConfig {
    /// Structural validation before any allocation-heavy work.
    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.packet.validate()?;
        if !(self.time.dt > 0.0) || !self.time.dt.is_finite() {
            return Err(Error::Config("time.dt must be positive".into()));
        }
        if !(self.time.t_max >= 0.0) || !self.time.t_max.is_finite() {
            return Err(Error::Config("time.t_max must be non-negative".into()));
        }
        if let Some(times) = &self.time.snapshot_times {
            let mut last = f64::NEG_INFINITY;
            for &t in times {
                if !t.is_finite() || t < 0.0 || t > self.time.t_max {
                    return Err(Error::Config(format!(
                        "snapshot time {t} outside [0, {}]",
                        self.time.t_max
                    )));
                }
                if t < last {
                    return Err(Error::Config("snapshot times must be ascending".into()));
                }
                last = t;
            }
        }
        if self.oracle.dt_divisor == 0 {
            return Err(Error::Config("oracle.dt_divisor must be positive".into()));
        }
        if self.diagnostics_stride == 0 {
            return Err(Error::Config("diagnostics_stride must be positive".into()));
        }
        match (&self.mode, self.potential.n_surfaces()) {
            (ModeConfig::Single, 1) => {}
            (ModeConfig::Single, f) => {
                return Err(Error::Config(format!(
                    "mode single requires a one-surface potential, got {f}"
                )));
            }
            (ModeConfig::Splice { .. }, 1) => {}
            (ModeConfig::Splice { .. }, f) => {
                return Err(Error::Config(format!(
                    "mode splice requires a one-surface potential, got {f}"
                )));
            }
            (ModeConfig::Multisurface { .. }, _) => {}
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }
}

/// Apply dotted-path `key=value` overrides to a config document. Values are
/// parsed as TOML (numbers, booleans, arrays, inline tables) and fall back to
/// strings.
pub fn apply_overrides(config: &RunConfig, sets: &[String]) -> Result<RunConfig> {
    if sets.is_empty() {
        return Ok(config.clone());
    }
    let text = config.to_toml();
    let mut table: toml::Table = text.parse().expect("round trip");
    for entry in sets {
        let (path, raw) = entry.split_once('=').ok_or_else(|| {
            Error::Config(format!("--set expects key=value, got `{entry}`"))
        })?;
        let value = parse_toml_value(raw.trim());
        insert_path(&mut table, path.trim(), value)?;
    }
    let merged = toml::to_string(&table).expect("table serializes");
    RunConfig::from_toml(&merged)
}

fn parse_toml_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    if let Ok(t) = probe.parse::<toml::Table>() {
        if let Some(v) = t.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

fn insert_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut parts = path.split('.').collect::<Vec<_>>();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("invalid override path `{path}`")));
    }
    let last = parts.pop().expect("non-empty path");
    let mut current = table;
    for part in parts {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry.as_table_mut().ok_or_else(|| {
            Error::Config(format!("override path `{path}` crosses a non-table value"))
        })?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

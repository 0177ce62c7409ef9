//! Flat key-value run configuration (TOML syntax).
//!
//! ```toml
//! eps1 = 10.0
//! eps2 = 7.0
//! Gamma_E = 1.0
//! Gamma_C = 1.0
//! Gamma_B = 1.0
//! gamma0 = 1.0
//! T_E = 333.3333333333333
//! T_C = 6.666666666666667
//! axis = "T_B"
//! grid_min = 10.0
//! grid_max = 300.0
//! grid_points = 200
//! variant = "partial"
//! ```
//!
//! All energies, temperatures and rates are in units of the coupling
//! `delta`, which is fixed to 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::liouville::Variant;
use crate::model::{BathSpec, Baths, SystemSpec};
use crate::point::{OperatingPoint, SweepAxis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid key-value TOML: {0}")]
    Syntax(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

impl ConfigError {
    /// Offending key, when one can be named.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax(_) => None,
            ConfigError::Missing(k) | ConfigError::Invalid { key: k, .. } => Some(k),
        }
    }

    fn invalid(key: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key, message: message.into() }
    }
}

/// The document exactly as written; echoed back in JSON output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(rename = "Gamma_E", skip_serializing_if = "Option::is_none")]
    pub gamma_e: Option<f64>,
    #[serde(rename = "Gamma_C", skip_serializing_if = "Option::is_none")]
    pub gamma_c: Option<f64>,
    #[serde(rename = "Gamma_B", skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(rename = "T_E", skip_serializing_if = "Option::is_none")]
    pub t_e: Option<f64>,
    #[serde(rename = "T_C", skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
    #[serde(rename = "T_B", skip_serializing_if = "Option::is_none")]
    pub t_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_absolute: Option<f64>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))
    }
}

/// Which Liouvillian variants a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantChoice {
    One(Variant),
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            // Default first, so "both" lists it ahead of the comparison run.
            VariantChoice::Both => vec![Variant::PartialSecular, Variant::Secular],
            VariantChoice::One(v) => vec![v],
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        if s.trim().eq_ignore_ascii_case("both") {
            return Ok(VariantChoice::Both);
        }
        s.parse::<Variant>()
            .map(VariantChoice::One)
            .map_err(|e| ConfigError::invalid("variant", e.to_string()))
    }
}

impl Default for VariantChoice {
    fn default() -> Self {
        VariantChoice::One(Variant::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSet {
    pub fluxes: bool,
    pub conductances: bool,
    pub amplification: bool,
    pub coherence: bool,
}

impl Default for OutputSet {
    fn default() -> Self {
        Self { fluxes: true, conductances: true, amplification: true, coherence: true }
    }
}

impl OutputSet {
    fn parse(items: &[String]) -> Result<Self, ConfigError> {
        let mut out = OutputSet { fluxes: false, conductances: false, amplification: false, coherence: false };
        for item in items {
            match item.as_str() {
                "fluxes" => out.fluxes = true,
                "conductances" => out.conductances = true,
                "amplification" => out.amplification = true,
                "coherence" => out.coherence = true,
                other => return Err(ConfigError::invalid("outputs", format!("unknown output `{other}`"))),
            }
        }
        if items.is_empty() {
            return Err(ConfigError::invalid("outputs", "must name at least one output"));
        }
        Ok(out)
    }

    /// Amplification factors are built from the conductances.
    pub fn needs_conductances(&self) -> bool {
        self.conductances || self.amplification
    }
}

/// Fixed parameters plus the grid to run along `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    /// Fixed parameters; the axis field is overwritten per grid point.
    pub point: OperatingPoint,
    pub variants: VariantChoice,
    pub outputs: OutputSet,
    pub delta_absolute: Option<f64>,
    pub raw: RawConfig,
}

fn required(value: Option<f64>, key: &'static str) -> Result<f64, ConfigError> {
    let v = value.ok_or(ConfigError::Missing(key))?;
    if !v.is_finite() {
        return Err(ConfigError::invalid(key, format!("{v} is not finite")));
    }
    Ok(v)
}

fn positive(value: Option<f64>, key: &'static str) -> Result<f64, ConfigError> {
    let v = required(value, key)?;
    if v <= 0.0 {
        return Err(ConfigError::invalid(key, format!("{v} must be positive")));
    }
    Ok(v)
}

fn non_negative(value: Option<f64>, key: &'static str) -> Result<f64, ConfigError> {
    let v = required(value, key)?;
    if v < 0.0 {
        return Err(ConfigError::invalid(key, format!("{v} must be non-negative")));
    }
    Ok(v)
}

fn build_grid(raw: &RawConfig) -> Result<Vec<f64>, ConfigError> {
    let range_given = raw.grid_min.is_some() || raw.grid_max.is_some() || raw.grid_points.is_some();
    if let Some(grid) = &raw.grid {
        if range_given {
            return Err(ConfigError::invalid("grid", "give either `grid` or grid_min/grid_max/grid_points, not both"));
        }
        if grid.is_empty() {
            return Err(ConfigError::invalid("grid", "must not be empty"));
        }
        if let Some(bad) = grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(ConfigError::invalid("grid", format!("value {bad} is not a positive number")));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::invalid("grid", "values must be strictly increasing"));
        }
        return Ok(grid.clone());
    }
    if !range_given {
        return Err(ConfigError::Missing("grid"));
    }
    let lo = positive(raw.grid_min, "grid_min")?;
    let hi = positive(raw.grid_max, "grid_max")?;
    let n = raw.grid_points.ok_or(ConfigError::Missing("grid_points"))?;
    if n == 0 {
        return Err(ConfigError::invalid("grid_points", "must be at least 1"));
    }
    if lo > hi || (lo == hi && n > 1) {
        return Err(ConfigError::invalid("grid", format!("grid_min = {lo} must be below grid_max = {hi}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect())
}

/// Fixed parameters only; the grid keys are ignored. Used by single-point
/// runs, where `T_B` must be present.
pub fn parse_point(raw: &RawConfig) -> Result<(OperatingPoint, VariantChoice), ConfigError> {
    let eps1 = positive(raw.eps1, "eps1")?;
    let eps2 = positive(raw.eps2, "eps2")?;
    let gamma_e = non_negative(raw.gamma_e, "Gamma_E")?;
    let gamma_c = non_negative(raw.gamma_c, "Gamma_C")?;
    let gamma_b = non_negative(raw.gamma_b, "Gamma_B")?;
    let gamma0 = non_negative(raw.gamma0, "gamma0")?;
    let t_e = positive(raw.t_e, "T_E")?;
    let t_c = positive(raw.t_c, "T_C")?;
    let t_b = positive(raw.t_b, "T_B")?;
    let variants = match &raw.variant {
        Some(v) => VariantChoice::parse(v)?,
        None => VariantChoice::default(),
    };
    let spec = SystemSpec::new(eps1, eps2, 1.0).map_err(|e| ConfigError::invalid("eps1", e.to_string()))?;
    let baths = Baths::new(
        BathSpec::emitter(t_e, gamma_e).map_err(|e| ConfigError::invalid("T_E", e.to_string()))?,
        BathSpec::collector(t_c, gamma_c).map_err(|e| ConfigError::invalid("T_C", e.to_string()))?,
        BathSpec::base(t_b, gamma_b, gamma0).map_err(|e| ConfigError::invalid("T_B", e.to_string()))?,
    )
    .map_err(|e| ConfigError::invalid("T_B", e.to_string()))?;
    let primary = variants.variants()[0];
    Ok((OperatingPoint::new(spec, baths, primary), variants))
}

pub fn parse_config(text: &str) -> Result<SweepPlan, ConfigError> {
    plan_from_raw(RawConfig::from_toml(text)?)
}

pub fn plan_from_raw(raw: RawConfig) -> Result<SweepPlan, ConfigError> {
    let axis: SweepAxis = raw
        .axis
        .as_deref()
        .ok_or(ConfigError::Missing("axis"))?
        .parse()
        .map_err(|e: String| ConfigError::invalid("axis", e))?;
    let grid = build_grid(&raw)?;

    // The swept key may be omitted; the first grid value stands in for it.
    let mut filled = raw.clone();
    match axis {
        SweepAxis::BaseTemperature => filled.t_b = filled.t_b.or(Some(grid[0])),
        SweepAxis::BaseDecoherenceRate => filled.gamma_b = filled.gamma_b.or(Some(grid[0])),
        SweepAxis::BaseDephasingRate => filled.gamma0 = filled.gamma0.or(Some(grid[0])),
    }
    let (point, variants) = parse_point(&filled)?;

    let outputs = match &raw.outputs {
        Some(items) => OutputSet::parse(items)?,
        None => OutputSet::default(),
    };
    let delta_absolute = match raw.delta_absolute {
        Some(d) => Some(positive(Some(d), "delta_absolute")?),
        None => None,
    };
    Ok(SweepPlan { axis, grid, point, variants, outputs, delta_absolute, raw })
}

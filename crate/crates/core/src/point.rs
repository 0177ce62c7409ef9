use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::liouville::{assemble, Liouvillian, Variant};
use crate::model::{BathSpec, Baths, SystemSpec};
use crate::steady::{steady_state, SteadyState};
use crate::thermo::{flux_breakdown, FluxBreakdown};

/// Everything needed to pin down one steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub spec: SystemSpec,
    pub baths: Baths,
    pub variant: Variant,
}

/// Steady state of an operating point together with its heat currents.
#[derive(Debug, Clone)]
pub struct Solution {
    pub liouvillian: Liouvillian,
    pub steady: SteadyState,
    pub fluxes: FluxBreakdown,
}

impl OperatingPoint {
    pub fn new(spec: SystemSpec, baths: Baths, variant: Variant) -> Self {
        Self { spec, baths, variant }
    }

    pub fn liouvillian(&self) -> Liouvillian {
        assemble(&self.spec, &self.baths, self.variant)
    }

    pub fn solve(&self) -> Result<Solution> {
        let liouvillian = self.liouvillian();
        let steady = steady_state(&liouvillian)?;
        let fluxes = flux_breakdown(&liouvillian, &self.spec, &self.baths, &steady.rho)?;
        Ok(Solution { liouvillian, steady, fluxes })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn base_temperature(&self) -> f64 {
        self.baths.base.temperature
    }

    pub fn with_base_temperature(&self, t_b: f64) -> Result<Self> {
        self.with_axis(SweepAxis::BaseTemperature, t_b)
    }

    /// Copy of the point with the swept base parameter replaced.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let b = self.baths.base;
        let base = match axis {
            SweepAxis::BaseTemperature => BathSpec::base(value, b.gamma_wideband, b.dephasing())?,
            SweepAxis::BaseDecoherenceRate => BathSpec::base(b.temperature, value, b.dephasing())?,
            SweepAxis::BaseDephasingRate => BathSpec::base(b.temperature, b.gamma_wideband, value)?,
        };
        let mut out = *self;
        out.baths.base = base;
        Ok(out)
    }

    pub fn axis_value(&self, axis: SweepAxis) -> f64 {
        let b = &self.baths.base;
        match axis {
            SweepAxis::BaseTemperature => b.temperature,
            SweepAxis::BaseDecoherenceRate => b.gamma_wideband,
            SweepAxis::BaseDephasingRate => b.dephasing(),
        }
    }
}

/// Base-bath parameter varied along a sweep or root search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepAxis {
    BaseTemperature,
    BaseDecoherenceRate,
    BaseDephasingRate,
}

impl SweepAxis {
    /// Configuration key of the swept quantity.
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::BaseTemperature => "T_B",
            SweepAxis::BaseDecoherenceRate => "Gamma_B",
            SweepAxis::BaseDephasingRate => "gamma0",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "T_B" | "base_temperature" | "BaseTemperature" => Ok(SweepAxis::BaseTemperature),
            "Gamma_B" | "base_decoherence_rate" | "BaseDecoherenceRate" => Ok(SweepAxis::BaseDecoherenceRate),
            "gamma0" | "base_dephasing_rate" | "BaseDephasingRate" => Ok(SweepAxis::BaseDephasingRate),
            other => Err(format!("unknown axis `{other}` (expected T_B, Gamma_B or gamma0)")),
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::OperatingPoint;
use crate::thermo::FluxBreakdown;

/// Finite-difference settings for `sigma_i = -dJ_i/dT_B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    /// Step as a fraction of `max(T_B, delta)`.
    pub rel_step: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { rel_step: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Conductance {
    pub total: f64,
    pub population: f64,
    pub coherence: f64,
}

/// `alpha_E/C = -sigma_E/C / (sigma_E + sigma_C)`, or a divergence marker
/// where the base conductance vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Amplification {
    Finite { alpha_e: f64, alpha_c: f64 },
    /// Signed infinities plus the base conductance at which they occurred.
    Divergent { alpha_e: f64, alpha_c: f64, sigma_b: f64 },
}

impl Amplification {
    pub fn alpha_e(&self) -> f64 {
        match *self {
            Amplification::Finite { alpha_e, .. } | Amplification::Divergent { alpha_e, .. } => alpha_e,
        }
    }

    pub fn alpha_c(&self) -> f64 {
        match *self {
            Amplification::Finite { alpha_c, .. } | Amplification::Divergent { alpha_c, .. } => alpha_c,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Amplification::Divergent { .. })
    }
}

const DIVERGENCE_THRESHOLD: f64 = 1e-12;

fn ratio(numerator_e: f64, denominator: f64, scale: f64, sigma_b: f64) -> Amplification {
    if denominator.abs() < DIVERGENCE_THRESHOLD * scale || denominator == 0.0 {
        let sign = if numerator_e * denominator.signum() >= 0.0 { 1.0 } else { -1.0 };
        return Amplification::Divergent {
            alpha_e: sign * f64::INFINITY,
            alpha_c: -sign * f64::INFINITY,
            sigma_b,
        };
    }
    let alpha_e = numerator_e / denominator;
    Amplification::Finite { alpha_e, alpha_c: -1.0 - alpha_e }
}

/// Closed-form amplification from the three conductances.
pub fn amplification(sigma_e: f64, sigma_c: f64, sigma_b: f64) -> Amplification {
    let scale = sigma_e.abs().max(sigma_c.abs()).max(sigma_b.abs());
    ratio(-sigma_e, sigma_e + sigma_c, scale, sigma_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransistorMetrics {
    pub sigma_e: Conductance,
    pub sigma_c: Conductance,
    pub sigma_b: Conductance,
    pub alpha: Amplification,
    /// `dJ_E / dJ_B` and `dJ_C / dJ_B` taken directly from the stencil.
    pub alpha_fd: Amplification,
    /// Negative differential thermal resistance at the emitter or collector.
    pub ndtr: bool,
    pub step: f64,
    /// Richardson truncation estimate plus a rounding floor, per terminal
    /// (E, C, B).
    pub error_estimate: [f64; 3],
}

impl TransistorMetrics {
    pub fn sum_rule_residual(&self) -> f64 {
        (self.sigma_e.total + self.sigma_c.total + self.sigma_b.total).abs()
    }

    /// Tolerance for the sum rule: ten times the combined FD error estimate.
    pub fn sum_rule_tolerance(&self) -> f64 {
        10.0 * self.error_estimate.iter().sum::<f64>()
    }

    pub fn max_error_estimate(&self) -> f64 {
        self.error_estimate.iter().copied().fold(0.0, f64::max)
    }
}

/// Six numbers per evaluation: (total, coherence) for E, C, B.
fn sample(f: &FluxBreakdown) -> [f64; 6] {
    [
        f.emitter.total,
        f.emitter.coherence,
        f.collector.total,
        f.collector.coherence,
        f.base.total,
        f.base.coherence,
    ]
}

/// `sigma_i = -dJ_i/dT_B` by central differences at steps `h` and `h/2`
/// combined with one Richardson level.
pub fn conductances(point: &OperatingPoint, opts: &FdOptions) -> Result<TransistorMetrics> {
    let t_b = point.base_temperature();
    let mut h = opts.rel_step * t_b.max(point.spec.delta());
    if h >= 0.5 * t_b {
        h = 0.5 * t_b;
    }
    if !(h >= 1e3 * f64::EPSILON * t_b) {
        return Err(Error::StepUnderflow { step: h, t_b });
    }

    let eval = |t: f64| -> Result<[f64; 6]> { Ok(sample(&point.with_base_temperature(t)?.solve()?.fluxes)) };
    let plus = eval(t_b + h)?;
    let minus = eval(t_b - h)?;
    let plus_half = eval(t_b + 0.5 * h)?;
    let minus_half = eval(t_b - 0.5 * h)?;

    let mut deriv = [0.0; 6];
    let mut trunc = [0.0; 6];
    for k in 0..6 {
        let coarse = (plus[k] - minus[k]) / (2.0 * h);
        let fine = (plus_half[k] - minus_half[k]) / h;
        deriv[k] = (4.0 * fine - coarse) / 3.0;
        trunc[k] = (fine - coarse).abs() / 3.0;
    }
    let flux_scale = plus.iter().chain(&minus).fold(0.0f64, |m, x| m.max(x.abs()));
    let rounding = 1e-13 * flux_scale / h;

    let conductance = |k: usize| Conductance {
        total: -deriv[k],
        coherence: -deriv[k + 1],
        population: -deriv[k] + deriv[k + 1],
    };
    let sigma_e = conductance(0);
    let sigma_c = conductance(2);
    let sigma_b = conductance(4);

    let d_scale = deriv[0].abs().max(deriv[2].abs()).max(deriv[4].abs());
    let alpha_fd = ratio(deriv[0], deriv[4], d_scale, sigma_b.total);

    Ok(TransistorMetrics {
        sigma_e,
        sigma_c,
        sigma_b,
        alpha: amplification(sigma_e.total, sigma_c.total, sigma_b.total),
        alpha_fd,
        ndtr: sigma_e.total < 0.0 || sigma_c.total < 0.0,
        step: h,
        error_estimate: [trunc[0] + rounding, trunc[2] + rounding, trunc[4] + rounding],
    })
}

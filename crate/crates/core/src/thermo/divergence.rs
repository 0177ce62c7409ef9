use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{OperatingPoint, SweepAxis};
use crate::thermo::{conductances, FdOptions};

/// Bisection stops once the bracket is this small relative to its midpoint.
pub const BISECTION_REL_TOL: f64 = 1e-6;
const MAX_ITERATIONS: usize = 200;

/// Base conductance with `axis` set to `x`.
pub fn sigma_b_along(point: &OperatingPoint, axis: SweepAxis, x: f64, opts: &FdOptions) -> Result<f64> {
    Ok(conductances(&point.with_axis(axis, x)?, opts)?.sigma_b.total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSearch {
    pub root: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Locates `sigma_B = 0` along `axis` by bisection; the amplification
/// factors diverge there.
pub fn find_sigma_b_zero(
    point: &OperatingPoint,
    axis: SweepAxis,
    bracket: (f64, f64),
    opts: &FdOptions,
) -> Result<DivergenceSearch> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let f = |x: f64| sigma_b_along(point, axis, x, opts);
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(DivergenceSearch { root: lo, lo, hi: lo, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(DivergenceSearch { root: hi, lo: hi, hi, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut iterations = 0;
    while hi - lo > BISECTION_REL_TOL * (0.5 * (lo + hi)).abs() && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(DivergenceSearch { root: mid, lo: mid, hi: mid, iterations });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(DivergenceSearch { root: 0.5 * (lo + hi), lo, hi, iterations })
}

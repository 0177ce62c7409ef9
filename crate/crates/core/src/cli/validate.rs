use serde::Serialize;

use crate::cli::config::SweepPlan;
use crate::liouville::Variant;
use crate::point::OperatingPoint;
use crate::steady::RESIDUAL_TOLERANCE;
use crate::thermo::{conductances, diagnose_fluxes, entropy_production, FdOptions};

/// Outcome of one named check at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub axis_value: f64,
    pub variant: Variant,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {:<18} at {:<14} {:<8} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            format!("{:.6}", self.axis_value),
            self.variant.tag(),
            self.detail
        )
    }
}

/// Relative tolerance for the two routes to the amplification factors.
pub const ALPHA_ROUTE_TOLERANCE: f64 = 1e-4;
/// The routes are only compared when `|sigma_B|` is at least this fraction
/// of the largest conductance.
pub const ALPHA_ROUTE_MIN_SIGMA_B: f64 = 1e-3;
/// Base current mismatch left after the known constant offset.
pub const BASE_CLOSED_FORM_TOLERANCE: f64 = 1e-8;

/// Runs every numerical self-consistency check at one point.
pub fn check_point(point: &OperatingPoint, x: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| {
        out.push(Check { axis_value: x, variant: point.variant, name, passed, detail });
    };
    let sol = match point.solve() {
        Ok(s) => s,
        Err(e) => {
            push("steady_state", false, e.to_string());
            return out;
        }
    };
    let rho = &sol.steady.rho;
    push(
        "solver_residual",
        sol.steady.residual <= RESIDUAL_TOLERANCE,
        format!("{:.3e} <= {:.0e}", sol.steady.residual, RESIDUAL_TOLERANCE),
    );
    push("density_matrix", rho.validate().is_ok(), format!("min eigenvalue {:.3e}", rho.min_eigenvalue()));
    let fl = sol.fluxes.first_law_residual();
    push("first_law", fl <= 1e-10, format!("relative {fl:.3e} <= 1e-10"));

    let currents = sol.fluxes.totals();
    let sigma = entropy_production(&currents, &point.baths);
    let floor = 1e-12 * currents.max_abs() / point.baths.base.temperature.min(point.baths.emitter.temperature).min(point.baths.collector.temperature);
    push("entropy_production", sigma >= -floor, format!("{sigma:.6e} >= 0"));

    match diagnose_fluxes(&sol.liouvillian, &point.spec, &point.baths, rho) {
        Ok(d) => push(
            "closed_form_base",
            d.base_residual_after_offset <= BASE_CLOSED_FORM_TOLERANCE,
            format!(
                "after offset {:.3e}; emitter/collector mismatch {:.3e}/{:.3e}",
                d.base_residual_after_offset, d.relative_mismatch.emitter, d.relative_mismatch.collector
            ),
        ),
        Err(e) => push("closed_form_base", false, e.to_string()),
    }

    match conductances(point, &FdOptions::default()) {
        Ok(m) => {
            push(
                "sum_rule",
                m.sum_rule_residual() <= m.sum_rule_tolerance(),
                format!("{:.3e} <= {:.3e}", m.sum_rule_residual(), m.sum_rule_tolerance()),
            );
            let a = &m.alpha;
            if !a.is_divergent() {
                let gap = (a.alpha_e() + a.alpha_c() + 1.0).abs();
                push("alpha_identity", gap <= 1e-12 * a.alpha_e().abs().max(1.0), format!("|alpha_E + alpha_C + 1| = {gap:.3e}"));
            }
            let scale = m.sigma_e.total.abs().max(m.sigma_c.total.abs()).max(m.sigma_b.total.abs());
            if m.sigma_b.total.abs() >= ALPHA_ROUTE_MIN_SIGMA_B * scale && !a.is_divergent() && !m.alpha_fd.is_divergent() {
                let rel = (a.alpha_e() - m.alpha_fd.alpha_e()).abs() / a.alpha_e().abs().max(f64::MIN_POSITIVE);
                push("alpha_routes", rel <= ALPHA_ROUTE_TOLERANCE, format!("relative {rel:.3e} <= {ALPHA_ROUTE_TOLERANCE:.0e}"));
            }
        }
        Err(e) => push("conductances", false, e.to_string()),
    }
    out
}

/// Checks for every (grid value, variant) pair, in sweep order.
pub fn check_plan(plan: &SweepPlan, pool: &rayon::ThreadPool) -> Vec<Check> {
    use rayon::prelude::*;
    let variants = plan.variants.variants();
    let tasks: Vec<(f64, Variant)> = plan.grid.iter().flat_map(|&x| variants.iter().map(move |&v| (x, v))).collect();
    let per_point: Vec<Vec<Check>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(x, v)| match plan.point.with_variant(v).with_axis(plan.axis, x) {
                Ok(p) => check_point(&p, x),
                Err(e) => vec![Check { axis_value: x, variant: v, name: "parameters", passed: false, detail: e.to_string() }],
            })
            .collect()
    });
    per_point.into_iter().flatten().collect()
}

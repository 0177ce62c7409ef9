use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::config::SweepPlan;
use crate::error::Result;
use crate::liouville::Variant;
use crate::point::OperatingPoint;
use crate::steady::{local_coherence, RESIDUAL_TOLERANCE};
use crate::thermo::{conductances, FdOptions, TransistorMetrics};

/// Relative first-law tolerance used to flag rows.
pub const ROW_FIRST_LAW_TOLERANCE: f64 = 1e-10;

/// One (grid value, variant) evaluation. Fields that were not requested, or
/// could not be computed, are NaN and `status` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub j_e: f64,
    pub j_c: f64,
    pub j_b: f64,
    pub j_e1: f64,
    pub j_e2: f64,
    pub j_c1: f64,
    pub j_c2: f64,
    pub j_b1: f64,
    pub j_b2: f64,
    pub sigma_e: f64,
    pub sigma_c: f64,
    pub sigma_b: f64,
    pub sigma_e1: f64,
    pub sigma_e2: f64,
    pub sigma_c1: f64,
    pub sigma_c2: f64,
    pub sigma_b1: f64,
    pub sigma_b2: f64,
    pub alpha_e: f64,
    pub alpha_c: f64,
    pub re_rho12: f64,
    pub abs_rho12: f64,
    pub variant: Variant,
    pub residual: f64,
    pub first_law_residual: f64,
    pub sum_rule_residual: f64,
    pub status: String,
}

/// Column names, in output order.
pub const COLUMNS: [&str; 28] = [
    "axis_value",
    "J_E",
    "J_C",
    "J_B",
    "J_E1",
    "J_E2",
    "J_C1",
    "J_C2",
    "J_B1",
    "J_B2",
    "sigma_E",
    "sigma_C",
    "sigma_B",
    "sigma_E1",
    "sigma_E2",
    "sigma_C1",
    "sigma_C2",
    "sigma_B1",
    "sigma_B2",
    "alpha_E",
    "alpha_C",
    "re_rho12",
    "abs_rho12",
    "variant",
    "residual",
    "first_law_residual",
    "sum_rule_residual",
    "status",
];

/// Index of the variant column; every other column except the last is numeric.
pub(crate) const VARIANT_COLUMN: usize = 23;
pub(crate) const NUMERIC_COLUMNS: usize = 26;

impl SweepRow {
    fn blank(axis_value: f64, variant: Variant) -> Self {
        let n = f64::NAN;
        Self {
            axis_value,
            j_e: n,
            j_c: n,
            j_b: n,
            j_e1: n,
            j_e2: n,
            j_c1: n,
            j_c2: n,
            j_b1: n,
            j_b2: n,
            sigma_e: n,
            sigma_c: n,
            sigma_b: n,
            sigma_e1: n,
            sigma_e2: n,
            sigma_c1: n,
            sigma_c2: n,
            sigma_b1: n,
            sigma_b2: n,
            alpha_e: n,
            alpha_c: n,
            re_rho12: n,
            abs_rho12: n,
            variant,
            residual: n,
            first_law_residual: n,
            sum_rule_residual: n,
            status: String::new(),
        }
    }

    /// Numeric columns in output order (everything but variant and status).
    pub fn numeric(&self) -> [f64; NUMERIC_COLUMNS] {
        [
            self.axis_value,
            self.j_e,
            self.j_c,
            self.j_b,
            self.j_e1,
            self.j_e2,
            self.j_c1,
            self.j_c2,
            self.j_b1,
            self.j_b2,
            self.sigma_e,
            self.sigma_c,
            self.sigma_b,
            self.sigma_e1,
            self.sigma_e2,
            self.sigma_c1,
            self.sigma_c2,
            self.sigma_b1,
            self.sigma_b2,
            self.alpha_e,
            self.alpha_c,
            self.re_rho12,
            self.abs_rho12,
            self.residual,
            self.first_law_residual,
            self.sum_rule_residual,
        ]
    }

    pub fn from_numeric(v: [f64; NUMERIC_COLUMNS], variant: Variant, status: String) -> Self {
        Self {
            axis_value: v[0],
            j_e: v[1],
            j_c: v[2],
            j_b: v[3],
            j_e1: v[4],
            j_e2: v[5],
            j_c1: v[6],
            j_c2: v[7],
            j_b1: v[8],
            j_b2: v[9],
            sigma_e: v[10],
            sigma_c: v[11],
            sigma_b: v[12],
            sigma_e1: v[13],
            sigma_e2: v[14],
            sigma_c1: v[15],
            sigma_c2: v[16],
            sigma_b1: v[17],
            sigma_b2: v[18],
            alpha_e: v[19],
            alpha_c: v[20],
            re_rho12: v[21],
            abs_rho12: v[22],
            variant,
            residual: v[23],
            first_law_residual: v[24],
            sum_rule_residual: v[25],
            status,
        }
    }

    /// Bitwise equality, treating NaN as equal to NaN.
    pub fn same_bits(&self, other: &Self) -> bool {
        self.variant == other.variant
            && self.status == other.status
            && self.numeric().iter().zip(other.numeric()).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Converts from units of the coupling to absolute units, given the
    /// coupling in those units. Energies, temperatures and rates scale
    /// once, currents twice, conductances once.
    pub fn rescaled(mut self, delta: f64) -> Self {
        let d2 = delta * delta;
        self.axis_value *= delta;
        for j in [
            &mut self.j_e,
            &mut self.j_c,
            &mut self.j_b,
            &mut self.j_e1,
            &mut self.j_e2,
            &mut self.j_c1,
            &mut self.j_c2,
            &mut self.j_b1,
            &mut self.j_b2,
        ] {
            *j *= d2;
        }
        for s in [
            &mut self.sigma_e,
            &mut self.sigma_c,
            &mut self.sigma_b,
            &mut self.sigma_e1,
            &mut self.sigma_e2,
            &mut self.sigma_c1,
            &mut self.sigma_c2,
            &mut self.sigma_b1,
            &mut self.sigma_b2,
            &mut self.sum_rule_residual,
        ] {
            *s *= delta;
        }
        // The solver residual is |L vec(rho)|, a rate.
        self.residual *= delta;
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Evaluates a single operating point. Failures are recorded in the row.
pub fn evaluate(
    point: &OperatingPoint,
    axis_value: f64,
    with_conductances: bool,
    with_coherence: bool,
    opts: &FdOptions,
) -> SweepRow {
    let mut row = SweepRow::blank(axis_value, point.variant);
    let solution = match point.solve() {
        Ok(s) => s,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    let f = &solution.fluxes;
    row.j_e = f.emitter.total;
    row.j_c = f.collector.total;
    row.j_b = f.base.total;
    row.j_e1 = f.emitter.population;
    row.j_e2 = f.emitter.coherence;
    row.j_c1 = f.collector.population;
    row.j_c2 = f.collector.coherence;
    row.j_b1 = f.base.population;
    row.j_b2 = f.base.coherence;
    row.residual = solution.steady.residual;
    row.first_law_residual = f.first_law_residual();
    if with_coherence {
        let z = local_coherence(&solution.steady.rho);
        row.re_rho12 = z.re;
        row.abs_rho12 = z.norm();
    }

    let mut problems = Vec::new();
    if row.residual > RESIDUAL_TOLERANCE {
        problems.push(format!("solver residual {:.3e}", row.residual));
    }
    if row.first_law_residual > ROW_FIRST_LAW_TOLERANCE {
        problems.push(format!("first law {:.3e}", row.first_law_residual));
    }

    if with_conductances {
        match conductances(point, opts) {
            Ok(m) => {
                fill_metrics(&mut row, &m);
                if row.sum_rule_residual > m.sum_rule_tolerance() {
                    problems.push(format!(
                        "sum rule {:.3e} > {:.3e}",
                        row.sum_rule_residual,
                        m.sum_rule_tolerance()
                    ));
                }
            }
            Err(e) => {
                row.status = format!("error: {e}");
                return row;
            }
        }
    }
    row.status = if problems.is_empty() { "ok".to_string() } else { format!("tolerance: {}", problems.join("; ")) };
    row
}

fn fill_metrics(row: &mut SweepRow, m: &TransistorMetrics) {
    row.sigma_e = m.sigma_e.total;
    row.sigma_c = m.sigma_c.total;
    row.sigma_b = m.sigma_b.total;
    row.sigma_e1 = m.sigma_e.population;
    row.sigma_e2 = m.sigma_e.coherence;
    row.sigma_c1 = m.sigma_c.population;
    row.sigma_c2 = m.sigma_c.coherence;
    row.sigma_b1 = m.sigma_b.population;
    row.sigma_b2 = m.sigma_b.coherence;
    row.alpha_e = m.alpha.alpha_e();
    row.alpha_c = m.alpha.alpha_c();
    row.sum_rule_residual = m.sum_rule_residual();
}

/// Runs every (grid value, variant) pair of the plan. Rows come back sorted
/// by grid value and then by variant in the order the plan lists them, so
/// the output does not depend on `threads`.
pub fn run_sweep(plan: &SweepPlan, threads: Option<usize>) -> Result<Vec<SweepRow>, rayon::ThreadPoolBuildError> {
    let variants = plan.variants.variants();
    let tasks: Vec<(f64, Variant)> =
        plan.grid.iter().flat_map(|&x| variants.iter().map(move |&v| (x, v))).collect();
    let opts = FdOptions::default();
    let with_conductances = plan.outputs.needs_conductances();
    let with_coherence = plan.outputs.coherence;

    let job = |&(x, variant): &(f64, Variant)| -> SweepRow {
        let row = match plan.point.with_variant(variant).with_axis(plan.axis, x) {
            Ok(point) => evaluate(&point, x, with_conductances, with_coherence, &opts),
            Err(e) => {
                let mut row = SweepRow::blank(x, variant);
                row.status = format!("error: {e}");
                row
            }
        };
        match plan.delta_absolute {
            Some(d) => row.rescaled(d),
            None => row,
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    // par_iter().map().collect() preserves input order.
    Ok(pool.install(|| tasks.par_iter().map(job).collect()))
}

//! Command-line front end: configuration, sweeps, root search and output.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 solver error,
//! 3 I/O error.

pub mod config;
pub mod emit;
pub mod sweep;
pub mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::liouville::Variant;
use crate::point::{OperatingPoint, SweepAxis};
use crate::steady::{local_coherence, Basis, DensityMatrix};
use crate::thermo::{
    conductances, diagnose_fluxes, entropy_production, find_sigma_b_zero, Amplification, FdOptions,
};

pub use config::{parse_config, plan_from_raw, ConfigError, RawConfig, SweepPlan, VariantChoice};
pub use emit::{emit, read_csv, read_json, Format};
pub use sweep::{evaluate, run_sweep, SweepRow, COLUMNS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(#[from] crate::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Secular,
    Partial,
    Both,
}

impl From<VariantArg> for VariantChoice {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Secular => VariantChoice::One(Variant::Secular),
            VariantArg::Partial => VariantChoice::One(Variant::PartialSecular),
            VariantArg::Both => VariantChoice::Both,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "thermal-transistor", version, about = "Steady-state heat transport in a three-level thermal transistor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (flat TOML).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: FormatArg,
    /// Output file, or `-` for standard output.
    #[arg(long, short, default_value = "-", global = true)]
    pub output: String,
    /// Overrides the `variant` key of the configuration.
    #[arg(long, value_enum, global = true)]
    pub variant: Option<VariantArg>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state, currents and conductances at a single point.
    Steady {
        /// Value of the configured axis; otherwise the fixed parameters are used.
        #[arg(long)]
        at: Option<f64>,
    },
    /// Sweep the configured grid.
    Sweep,
    /// Locate the zero of the base conductance along the configured axis.
    FindDivergence {
        /// Search interval `lo,hi`; defaults to the ends of the grid.
        #[arg(long, value_parser = parse_bracket, allow_hyphen_values = true)]
        bracket: Option<(f64, f64)>,
    },
    /// Run the numerical self-consistency checks over the grid.
    Validate,
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("hi: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(format!("need 0 < lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn load_raw(common: &CommonArgs) -> Result<RawConfig, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut raw = RawConfig::from_toml(&text)?;
    if let Some(v) = common.variant {
        raw.variant = Some(
            match v {
                VariantArg::Secular => "secular",
                VariantArg::Partial => "partial",
                VariantArg::Both => "both",
            }
            .to_string(),
        );
    }
    Ok(raw)
}

fn has_grid(raw: &RawConfig) -> bool {
    raw.grid.is_some() || raw.grid_min.is_some() || raw.grid_max.is_some() || raw.grid_points.is_some()
}

fn config_echo(raw: &RawConfig) -> Value {
    serde_json::to_value(raw).unwrap_or(Value::Null)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn open_output(target: &str) -> Result<Box<dyn Write>, CliError> {
    if target == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(target).map_err(|e| CliError::io(format!("creating {target}"), e))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn write_out(target: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let mut out = open_output(target)?;
    body(&mut out).and_then(|_| out.flush()).map_err(|e| CliError::io(format!("writing {target}"), e))
}

fn matrix_json(rho: &DensityMatrix) -> Value {
    let m = rho.entries();
    Value::Array((0..3).map(|i| Value::Array((0..3).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())).collect())
}

fn amplification_json(a: &Amplification) -> Value {
    json!({
        "alpha_E": emit::float_value(a.alpha_e()),
        "alpha_C": emit::float_value(a.alpha_c()),
        "divergent": a.is_divergent(),
    })
}

/// Full single-point report.
pub fn steady_report(point: &OperatingPoint) -> Result<Value, crate::Error> {
    let sol = point.solve()?;
    let f = &sol.fluxes;
    let coherence = local_coherence(&sol.steady.rho);
    let diag = diagnose_fluxes(&sol.liouvillian, &point.spec, &point.baths, &sol.steady.rho)?;
    let m = conductances(point, &FdOptions::default())?;
    let c = |x: &crate::thermo::Conductance| json!({"total": x.total, "population": x.population, "coherence": x.coherence});
    let j = |x: &crate::thermo::BathFlux| json!({"total": x.total, "population": x.population, "coherence": x.coherence});
    Ok(json!({
        "variant": point.variant.tag(),
        "T_B": point.baths.base.temperature,
        "Gamma_B": point.baths.base.gamma_wideband,
        "gamma0": point.baths.base.dephasing(),
        "rho_local": matrix_json(&sol.steady.rho.to_basis(Basis::Local)),
        "rho_dressed": matrix_json(&sol.steady.rho.to_basis(Basis::Dressed)),
        "re_rho12": coherence.re,
        "abs_rho12": coherence.norm(),
        "solver_residual": sol.steady.residual,
        "currents": {"emitter": j(&f.emitter), "collector": j(&f.collector), "base": j(&f.base)},
        "first_law_residual": f.first_law_residual(),
        "entropy_production": entropy_production(&f.totals(), &point.baths),
        "closed_form": {
            "emitter": diag.closed.emitter,
            "collector": diag.closed.collector,
            "base": diag.closed.base,
            "relative_mismatch": diag.relative_mismatch,
            "base_constant_offset": diag.base_constant_offset,
            "base_residual_after_offset": diag.base_residual_after_offset,
        },
        "conductances": {"emitter": c(&m.sigma_e), "collector": c(&m.sigma_c), "base": c(&m.sigma_b)},
        "amplification": amplification_json(&m.alpha),
        "amplification_fd": amplification_json(&m.alpha_fd),
        "ndtr": m.ndtr,
        "fd_step": m.step,
        "fd_error_estimate": m.error_estimate,
        "sum_rule_residual": m.sum_rule_residual(),
    }))
}

fn run_steady(common: &CommonArgs, at: Option<f64>) -> Result<(), CliError> {
    let mut raw = load_raw(common)?;
    if let Some(x) = at {
        let axis: SweepAxis = match raw.axis.as_deref() {
            Some(a) => a.parse().map_err(|e: String| ConfigError::Invalid { key: "axis", message: e })?,
            None => SweepAxis::BaseTemperature,
        };
        match axis {
            SweepAxis::BaseTemperature => raw.t_b = Some(x),
            SweepAxis::BaseDecoherenceRate => raw.gamma_b = Some(x),
            SweepAxis::BaseDephasingRate => raw.gamma0 = Some(x),
        }
    }
    let (point, variants) = config::parse_point(&raw)?;
    let axis_value = at.unwrap_or(point.baths.base.temperature);
    match common.format {
        FormatArg::Json => {
            let mut reports = Vec::new();
            for v in variants.variants() {
                reports.push(steady_report(&point.with_variant(v))?);
            }
            let doc = json!({"schema_version": emit::SCHEMA_VERSION, "config": config_echo(&raw), "points": reports});
            write_out(&common.output, |w| {
                serde_json::to_writer_pretty(&mut *w, &doc)?;
                writeln!(w)
            })
        }
        FormatArg::Csv => {
            let opts = FdOptions::default();
            let mut rows = Vec::new();
            for v in variants.variants() {
                let p = point.with_variant(v);
                // Surface the solver error itself rather than a row status.
                p.solve()?;
                let row = evaluate(&p, axis_value, true, true, &opts);
                if row.status.starts_with("error") {
                    conductances(&p, &opts)?;
                }
                rows.push(match raw.delta_absolute {
                    Some(d) => row.rescaled(d),
                    None => row,
                });
            }
            write_out(&common.output, |w| emit::write_csv(&rows, w))
        }
    }
}

fn run_sweep_command(common: &CommonArgs) -> Result<(), CliError> {
    let raw = load_raw(common)?;
    let plan = plan_from_raw(raw)?;
    if common.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let rows = run_sweep(&plan, common.threads).map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let format = match common.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let echo = config_echo(&plan.raw);
    write_out(&common.output, |w| emit(&rows, format, &echo, w))
}

fn run_find_divergence(common: &CommonArgs, bracket: Option<(f64, f64)>) -> Result<(), CliError> {
    let raw = load_raw(common)?;
    let axis: SweepAxis = raw
        .axis
        .as_deref()
        .ok_or(ConfigError::Missing("axis"))?
        .parse()
        .map_err(|e: String| ConfigError::Invalid { key: "axis", message: e })?;
    let (point, variants, bracket) = if has_grid(&raw) {
        let plan = plan_from_raw(raw.clone())?;
        let b = bracket.unwrap_or((plan.grid[0], *plan.grid.last().unwrap()));
        (plan.point, plan.variants, b)
    } else {
        let b = bracket.ok_or(ConfigError::Missing("grid"))?;
        let mut filled = raw.clone();
        match axis {
            SweepAxis::BaseTemperature => filled.t_b = filled.t_b.or(Some(b.0)),
            SweepAxis::BaseDecoherenceRate => filled.gamma_b = filled.gamma_b.or(Some(b.0)),
            SweepAxis::BaseDephasingRate => filled.gamma0 = filled.gamma0.or(Some(b.0)),
        }
        let (p, v) = config::parse_point(&filled)?;
        (p, v, b)
    };
    if bracket.0 >= bracket.1 {
        return Err(CliError::Usage(format!("bracket {},{} is empty", bracket.0, bracket.1)));
    }

    let opts = FdOptions::default();
    let pool = pool(common.threads)?;
    let list = variants.variants();
    let results: Vec<(Variant, Result<crate::thermo::DivergenceSearch, crate::Error>)> = pool.install(|| {
        use rayon::prelude::*;
        list.par_iter().map(|&v| (v, find_sigma_b_zero(&point.with_variant(v), axis, bracket, &opts))).collect()
    });

    let mut hard_failure = None;
    let mut records = Vec::new();
    for (v, r) in &results {
        let (root, lo, hi, iterations, status) = match r {
            Ok(s) => (s.root, s.lo, s.hi, s.iterations as f64, "ok".to_string()),
            Err(e @ crate::Error::NoSignChange { .. }) => (f64::NAN, bracket.0, bracket.1, 0.0, format!("no root: {e}")),
            Err(e) => {
                hard_failure.get_or_insert_with(|| e.clone());
                (f64::NAN, bracket.0, bracket.1, 0.0, format!("error: {e}"))
            }
        };
        let scale = raw.delta_absolute.unwrap_or(1.0);
        records.push((*v, root * scale, lo * scale, hi * scale, iterations, status));
    }

    match common.format {
        FormatArg::Json => {
            let doc = json!({
                "schema_version": emit::SCHEMA_VERSION,
                "config": config_echo(&raw),
                "axis": axis.key(),
                "bracket": [bracket.0, bracket.1],
                "results": records.iter().map(|(v, root, lo, hi, it, status)| json!({
                    "variant": v.tag(),
                    "root": emit::float_value(*root),
                    "lo": lo, "hi": hi,
                    "iterations": *it as u64,
                    "status": status,
                })).collect::<Vec<_>>(),
            });
            write_out(&common.output, |w| {
                serde_json::to_writer_pretty(&mut *w, &doc)?;
                writeln!(w)
            })?;
        }
        FormatArg::Csv => {
            write_out(&common.output, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["variant", "axis", "root", "lo", "hi", "iterations", "status"]).map_err(emit::csv_io)?;
                for (v, root, lo, hi, it, status) in &records {
                    c.write_record([
                        v.tag().to_string(),
                        axis.key().to_string(),
                        emit::format_float(*root),
                        emit::format_float(*lo),
                        emit::format_float(*hi),
                        format!("{}", *it as u64),
                        status.clone(),
                    ])
                    .map_err(emit::csv_io)?;
                }
                c.flush()
            })?;
        }
    }
    match hard_failure {
        Some(e) => Err(CliError::Solver(e)),
        None => Ok(()),
    }
}

fn run_validate(common: &CommonArgs) -> Result<(), CliError> {
    let raw = load_raw(common)?;
    let plan = plan_from_raw(raw)?;
    let pool = pool(common.threads)?;
    let checks = validate::check_plan(&plan, &pool);
    let failed = checks.iter().filter(|c| !c.passed).count();
    write_out(&common.output, |w| match common.format {
        FormatArg::Json => {
            let doc = json!({
                "schema_version": emit::SCHEMA_VERSION,
                "axis": plan.axis.key(),
                "passed": failed == 0,
                "checks": checks,
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
        FormatArg::Csv => {
            for c in &checks {
                writeln!(w, "{}", c.line())?;
            }
            writeln!(w, "{} checks, {} failed", checks.len(), failed)
        }
    })?;
    if failed > 0 {
        return Err(CliError::Solver(crate::Error::UnphysicalState(format!("{failed} validation checks failed"))));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Steady { at } => run_steady(&cli.common, *at),
        Command::Sweep => run_sweep_command(&cli.common),
        Command::FindDivergence { bracket } => run_find_divergence(&cli.common, *bracket),
        Command::Validate => run_validate(&cli.common),
    }
}

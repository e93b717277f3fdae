//! The five subcommands: each builds its inputs from the experiment config,
//! runs one core operation, and emits a JSON or CSV report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vexpdo_core::exponent::{self, ExponentCheckReport};
use vexpdo_core::fredholm::{self, Verdict};
use vexpdo_core::grid::SampledFunction;
use vexpdo_core::maximal::{hl_maximal, q_maximal, sharp_maximal};
use vexpdo_core::modular;
use vexpdo_core::pdo::{self, PdoPlan};
use vexpdo_core::verify::{self, VerifyOptions, VerifyReport};
use vexpdo_core::Error as CoreError;

use crate::config::{numeric_error, ExperimentConfig};
use crate::{CliError, Format};

/// Tolerance for the recombination gap of the `mstar` exponent check.
const MSTAR_RECOMBINE_TOL: f64 = 1e-12;

/// Where a report goes: a file or stdout.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    fn write(&self, text: &str) -> Result<(), CliError> {
        match &self.path {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn emit_json<T: Serialize>(sink: &Sink, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
    text.push('\n');
    sink.write(&text)
}

/// Quote a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

// -- norm ---------------------------------------------------------------------

pub fn cmd_norm(config: &ExperimentConfig, format: Format, sink: &Sink) -> Result<(), CliError> {
    let grid = config.grid()?;
    let p = config.exponent(grid)?;
    let f = config.function(grid)?;
    let result =
        modular::luxemburg_norm(&f, &p, config.tolerances.norm_tol).map_err(numeric_error)?;
    match format {
        Format::Json => emit_json(sink, &result),
        Format::Csv => sink.write(&format!(
            "value,iterations,modular_at_value\n{},{},{}\n",
            result.value, result.iterations, result.modular_at_value
        )),
        Format::Table => Err(CliError::Config(
            "format table is only available for verify".into(),
        )),
    }
}

// -- check-exponent -----------------------------------------------------------

pub fn cmd_check_exponent(
    config: &ExperimentConfig,
    format: Format,
    sink: &Sink,
) -> Result<(), CliError> {
    let grid = config.grid()?;
    let p = config.exponent(grid)?;
    let spec = &config.exponent;
    let p_inf = config.exponent_limit();

    let mut reports = Vec::new();
    for check in &spec.checks {
        let report = match check.as_str() {
            "bounds" => exponent::check_bounds(&p),
            "local" => exponent::check_log_holder_local(&p, spec.threshold),
            "infinity" => exponent::check_log_holder_infinity(&p, p_inf, spec.threshold)
                .map_err(|e| CliError::Config(format!("[exponent]: {e}")))?,
            "nekvinda" => exponent::check_nekvinda(&p, p_inf, spec.nekvinda_c, spec.threshold)
                .map_err(|e| CliError::Config(format!("[exponent]: {e}")))?,
            "mstar" => mstar_report(&p, spec.p0, spec.theta)?,
            other => {
                return Err(CliError::Config(format!(
                    "exponent.checks: unknown check {other:?} \
                     (expected bounds, local, infinity, nekvinda, or mstar)"
                )))
            }
        };
        reports.push(report);
    }

    match format {
        Format::Json => emit_json(sink, &reports),
        Format::Csv => {
            let mut text =
                String::from("condition,holds,best_constant,threshold,witness,details\n");
            for r in &reports {
                let witness = r
                    .witness
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                let details = r
                    .details
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";");
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    csv_field(&r.condition),
                    r.holds,
                    r.best_constant,
                    r.threshold,
                    csv_field(&witness),
                    csv_field(&details)
                ));
            }
            sink.write(&text)
        }
        Format::Table => Err(CliError::Config(
            "format table is only available for verify".into(),
        )),
    }
}

/// Convex-split check `1/p = theta/p0 + (1 - theta)/p1`: feasibility of the
/// decomposition plus the recombination gap. An infeasible node is reported
/// (witness + reciprocal), not treated as a process error.
fn mstar_report(
    p: &exponent::Exponent,
    p0: f64,
    theta: f64,
) -> Result<ExponentCheckReport, CliError> {
    let mut details = BTreeMap::new();
    details.insert("p0".into(), p0);
    details.insert("theta".into(), theta);
    match exponent::mstar_decompose(p, p0, theta) {
        Ok(p1) => {
            let recombined = exponent::mstar_recombine(p0, theta, &p1).map_err(numeric_error)?;
            let mut gap = 0.0_f64;
            let mut witness = 0usize;
            for (i, (a, b)) in recombined.values().iter().zip(p.values()).enumerate() {
                let d = (a - b).abs();
                if d > gap {
                    gap = d;
                    witness = i;
                }
            }
            details.insert("p1_min".into(), p1.p_minus());
            details.insert("p1_max".into(), p1.p_plus());
            Ok(ExponentCheckReport {
                condition: "mstar".into(),
                holds: gap <= MSTAR_RECOMBINE_TOL,
                best_constant: gap,
                threshold: MSTAR_RECOMBINE_TOL,
                witness: vec![witness],
                details,
            })
        }
        Err(CoreError::InfeasibleDecomposition {
            node,
            x,
            reciprocal,
        }) => {
            details.insert("reciprocal".into(), reciprocal);
            for (axis, c) in x.iter().enumerate() {
                details.insert(format!("x{}", axis + 1), *c);
            }
            Ok(ExponentCheckReport {
                condition: "mstar".into(),
                holds: false,
                best_constant: reciprocal,
                threshold: MSTAR_RECOMBINE_TOL,
                witness: vec![node],
                details,
            })
        }
        Err(e) => Err(CliError::Config(format!("[exponent]: {e}"))),
    }
}

// -- apply --------------------------------------------------------------------

/// Output of `apply`: the transformed samples plus summary norms and the
/// deviation from the input (zero-ish when the operator is the identity).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApplyReport {
    pub operator: String,
    pub symbol: Option<String>,
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub sup_deviation_from_input: f64,
    /// Node values in flat grid order, `[re, im]` pairs.
    pub values: Vec<[f64; 2]>,
}

pub fn cmd_apply(config: &ExperimentConfig, format: Format, sink: &Sink) -> Result<(), CliError> {
    let grid = config.grid()?;
    let f = config.function(grid)?;
    let operator = config.apply.operator.as_str();

    let mut symbol_name = None;
    let image: SampledFunction = match operator {
        "op" | "multiplier" => {
            let symbol = config.symbol(grid.dim())?;
            symbol_name = Some(symbol.name().to_string());
            let plan = PdoPlan::new(&grid);
            if operator == "op" {
                pdo::apply(&plan, &symbol, &f).map_err(numeric_error)?
            } else {
                pdo::apply_multiplier(&plan, &symbol, &f).map_err(numeric_error)?
            }
        }
        "hl" => hl_maximal(&f),
        "sharp" => sharp_maximal(&f),
        "q" => q_maximal(&f, config.apply.q).map_err(numeric_error)?,
        other => {
            return Err(CliError::Config(format!(
                "apply.operator: unknown operator {other:?} \
                 (expected op, multiplier, hl, sharp, or q)"
            )))
        }
    };

    let deviation = image.sub(&f).map_err(numeric_error)?.sup_norm();
    let report = ApplyReport {
        operator: operator.to_string(),
        symbol: symbol_name,
        dim: grid.dim(),
        half_width: grid.half_width(),
        points_per_axis: grid.points_per_axis(),
        sup_norm: image.sup_norm(),
        l2_norm: image.l2_norm(),
        sup_deviation_from_input: deviation,
        values: image.values().iter().map(|v| [v.re, v.im]).collect(),
    };

    match format {
        Format::Json => emit_json(sink, &report),
        Format::Csv => {
            let mut text = String::from(if grid.dim() == 1 {
                "index,x1,re,im\n"
            } else {
                "index,x1,x2,re,im\n"
            });
            for (i, v) in image.values().iter().enumerate() {
                let x = grid.node(i);
                if grid.dim() == 1 {
                    text.push_str(&format!("{},{},{},{}\n", i, x[0], v.re, v.im));
                } else {
                    text.push_str(&format!("{},{},{},{},{}\n", i, x[0], x[1], v.re, v.im));
                }
            }
            sink.write(&text)
        }
        Format::Table => Err(CliError::Config(
            "format table is only available for verify".into(),
        )),
    }
}

// -- fredholm -----------------------------------------------------------------

pub fn cmd_fredholm(
    config: &ExperimentConfig,
    format: Format,
    sink: &Sink,
) -> Result<(), CliError> {
    let grid = config.grid()?;
    let p = config.exponent(grid)?;
    let symbol = config.symbol(grid.dim())?;
    let (spec, defaulted) = config.probe_spec();
    if defaulted {
        eprintln!("note: no [fredholm] section; probe-family defaults applied");
    }

    let report = fredholm::run_fredholm_pipeline(&symbol, &p, &spec).map_err(numeric_error)?;
    match format {
        Format::Json => emit_json(sink, &report)?,
        Format::Csv => sink.write(&report.decay_table_csv())?,
        Format::Table => {
            return Err(CliError::Config(
                "format table is only available for verify".into(),
            ))
        }
    }
    if report.verdict != Verdict::FredholmConsistent {
        let verdict = serde_json::to_string(&report.verdict)
            .unwrap_or_else(|_| format!("{:?}", report.verdict));
        return Err(CliError::Acceptance(format!("verdict {verdict}")));
    }
    Ok(())
}

// -- verify -------------------------------------------------------------------

pub fn cmd_verify(
    config: &ExperimentConfig,
    format: Format,
    only: Option<&str>,
    sink: &Sink,
) -> Result<(), CliError> {
    if let Some(module) = only {
        if !verify::modules().contains(&module) {
            return Err(CliError::Config(format!(
                "--only: unknown module {module:?} (expected one of {})",
                verify::modules().join(", ")
            )));
        }
    }

    let mut options = VerifyOptions::with_seed(config.seed);
    if let Some(tol) = config.tolerances.luxemburg_rel_tol {
        options.luxemburg_rel_tol = tol;
    }
    let report = verify::run_with(&options, only);

    match format {
        Format::Json => emit_json(sink, &report)?,
        Format::Csv => sink.write(&verify_csv(&report))?,
        Format::Table => {
            let mut text = report.summary_lines().join("\n");
            let passed = report.outcomes.iter().filter(|o| o.passed).count();
            text.push_str(&format!(
                "\nresult: {} ({passed}/{} passed, seed {})\n",
                if report.all_passed { "PASS" } else { "FAIL" },
                report.outcomes.len(),
                report.seed
            ));
            sink.write(&text)?;
        }
    }

    if report.all_passed {
        Ok(())
    } else {
        match report.outcomes.iter().find(|o| !o.passed) {
            Some(first) => Err(CliError::Acceptance(format!(
                "first failing check: {} {}",
                first.index, first.name
            ))),
            None => Err(CliError::Acceptance("no checks were run".into())),
        }
    }
}

fn verify_csv(report: &VerifyReport) -> String {
    let mut text = String::from("index,name,module,passed,elapsed_ms,budget_ms,details\n");
    for o in &report.outcomes {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            o.index,
            csv_field(&o.name),
            csv_field(&o.module),
            o.passed,
            o.elapsed_ms,
            o.budget_ms,
            csv_field(&o.details)
        ));
    }
    text
}

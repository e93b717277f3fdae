//! Experiment configuration: one TOML file of `key = value` sections drives
//! every subcommand. Unknown sections, keys, and built-in names are rejected
//! with messages naming the offending field.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use vexpdo_core::exponent::Exponent;
use vexpdo_core::fredholm::ProbeFamilySpec;
use vexpdo_core::grid::{bump, Grid, SampledFunction};
use vexpdo_core::symbols::{self, Symbol};
use vexpdo_core::verify::DEFAULT_SEED;
use vexpdo_core::{oracle, Error as CoreError};

use crate::CliError;

/// Full configuration; every section is optional and defaults to the values
/// documented in the README.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for every randomized trial.
    pub seed: u64,
    pub grid: GridSpec,
    pub exponent: ExponentSpec,
    pub function: FunctionSpec,
    pub symbol: SymbolSpec,
    pub apply: ApplySpec,
    /// Probe-family parameters; when the whole section is absent the
    /// defaults are applied and noted on stderr.
    pub fredholm: Option<FredholmSpec>,
    pub tolerances: ToleranceSpec,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: DEFAULT_SEED,
            grid: GridSpec::default(),
            exponent: ExponentSpec::default(),
            function: FunctionSpec::default(),
            symbol: SymbolSpec::default(),
            apply: ApplySpec::default(),
            fredholm: None,
            tolerances: ToleranceSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim: 1,
            half_width: 10.0,
            points: 128,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentSpec {
    /// `constant`, `log_log_sine`, or `log_holder_decay`.
    pub name: String,
    /// Value of a constant exponent.
    pub p: f64,
    /// Oscillation parameters of `log_log_sine`.
    pub alpha: f64,
    pub beta: f64,
    /// Limit exponent: constructor argument for `log_holder_decay`, and the
    /// reference value for the at-infinity and Nekvinda checks. Defaults to
    /// the natural limit of the named exponent.
    pub p_inf: Option<f64>,
    /// Amplitude of `log_holder_decay`.
    pub amplitude: f64,
    /// Pass threshold shared by the regularity checks.
    pub threshold: f64,
    /// Base of the Nekvinda integrand.
    pub nekvinda_c: f64,
    /// Checks run by `check-exponent`, in order.
    pub checks: Vec<String>,
    /// Convex-split parameters for the `mstar` check.
    pub p0: f64,
    pub theta: f64,
}

impl Default for ExponentSpec {
    fn default() -> Self {
        ExponentSpec {
            name: "constant".into(),
            p: 2.0,
            alpha: 0.1,
            beta: 0.05,
            p_inf: None,
            amplitude: 0.5,
            threshold: 0.1,
            nekvinda_c: 0.5,
            checks: ["bounds", "local", "infinity", "nekvinda", "mstar"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            p0: 2.0,
            theta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionSpec {
    /// `bump`, `random`, `indicator`, or `constant`.
    pub kind: String,
    /// Bump center, one coordinate per axis.
    pub center: Vec<f64>,
    pub width: f64,
    /// Optional modulation frequency applied along the first axis.
    pub modulation: f64,
    /// Indicator bounds, applied per axis.
    pub lo: f64,
    pub hi: f64,
    /// Constant value.
    pub re: f64,
    pub im: f64,
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec {
            kind: "bump".into(),
            center: vec![0.0],
            width: 2.0,
            modulation: 0.0,
            lo: 0.0,
            hi: 1.0,
            re: 1.0,
            im: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolSpec {
    /// Registry name understood by the symbol builder: `one`,
    /// `bracket_power`, `bracket_elliptic`, `so_log_sine`,
    /// `nonelliptic_demo`, `x_bump`, or `phi_r`.
    pub name: String,
    /// Optional numeric parameter (order, width, or radius).
    pub param: Option<f64>,
}

impl Default for SymbolSpec {
    fn default() -> Self {
        SymbolSpec {
            name: "one".into(),
            param: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApplySpec {
    /// `op`, `multiplier`, `hl`, `sharp`, or `q`.
    pub operator: String,
    /// Exponent of the q-maximal operator.
    pub q: f64,
}

impl Default for ApplySpec {
    fn default() -> Self {
        ApplySpec {
            operator: "op".into(),
            q: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FredholmSpec {
    pub bump_width: f64,
    pub translation_start: f64,
    pub translation_count: usize,
    pub modulation_base: f64,
    pub modulation_count: usize,
    /// Optional convex-split record attached to the report.
    pub p0: Option<f64>,
    pub theta: Option<f64>,
}

impl Default for FredholmSpec {
    fn default() -> Self {
        let base = ProbeFamilySpec::default();
        FredholmSpec {
            bump_width: base.bump_width,
            translation_start: base.translation_start,
            translation_count: base.translation_count,
            modulation_base: base.modulation_base,
            modulation_count: base.modulation_count,
            p0: None,
            theta: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Bisection tolerance of the Luxemburg norm solver.
    pub norm_tol: f64,
    /// Override for the check-1 cap of the verification suite.
    pub luxemburg_rel_tol: Option<f64>,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            norm_tol: vexpdo_core::modular::DEFAULT_NORM_TOL,
            luxemburg_rel_tol: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// `json` or `csv` (`table` also allowed for `verify`).
    pub format: Option<String>,
    /// Report destination; stdout when absent.
    pub path: Option<String>,
}

impl ExperimentConfig {
    /// Parse a config file, mapping syntax and unknown-field problems to
    /// config errors carrying the TOML diagnostic.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.dim, self.grid.half_width, self.grid.points)
            .map_err(|e| CliError::Config(format!("[grid]: {e}")))
    }

    /// Build the configured exponent on `grid`.
    pub fn exponent(&self, grid: Grid) -> Result<Exponent, CliError> {
        let spec = &self.exponent;
        let built = match spec.name.as_str() {
            "constant" => Exponent::constant(grid, spec.p),
            "log_log_sine" => Exponent::log_log_sine(grid, spec.alpha, spec.beta),
            "log_holder_decay" => {
                Exponent::log_holder_decay(grid, spec.p_inf.unwrap_or(2.0), spec.amplitude)
            }
            other => {
                return Err(CliError::Config(format!(
                    "exponent.name: unknown exponent {other:?} \
                     (expected constant, log_log_sine, or log_holder_decay)"
                )))
            }
        };
        built.map_err(|e| CliError::Config(format!("[exponent]: {e}")))
    }

    /// Limit exponent used by the at-infinity and Nekvinda checks.
    pub fn exponent_limit(&self) -> f64 {
        let spec = &self.exponent;
        spec.p_inf.unwrap_or(match spec.name.as_str() {
            "log_log_sine" => 2.0 + spec.alpha,
            "log_holder_decay" => 2.0,
            _ => spec.p,
        })
    }

    /// Build the configured test function on `grid`.
    pub fn function(&self, grid: Grid) -> Result<SampledFunction, CliError> {
        let spec = &self.function;
        let f = match spec.kind.as_str() {
            "bump" => {
                if spec.center.len() != grid.dim() {
                    return Err(CliError::Config(format!(
                        "function.center: expected {} coordinates, got {}",
                        grid.dim(),
                        spec.center.len()
                    )));
                }
                bump(&grid, &spec.center, spec.width)
                    .map_err(|e| CliError::Config(format!("[function]: {e}")))?
            }
            "random" => oracle::random_function(grid, self.seed),
            "indicator" => {
                let (lo, hi) = (spec.lo, spec.hi);
                SampledFunction::from_real_fn(grid, move |x| {
                    if x.iter().all(|&c| (lo..=hi).contains(&c)) {
                        1.0
                    } else {
                        0.0
                    }
                })
            }
            "constant" => {
                let value = Complex64::new(spec.re, spec.im);
                SampledFunction::from_fn(grid, move |_| value)
            }
            other => {
                return Err(CliError::Config(format!(
                    "function.kind: unknown kind {other:?} \
                     (expected bump, random, indicator, or constant)"
                )))
            }
        };
        if spec.modulation != 0.0 {
            let omega = spec.modulation;
            let values = f
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| v * Complex64::from_polar(1.0, omega * grid.node(i)[0]))
                .collect();
            return SampledFunction::new(grid, values)
                .map_err(|e| CliError::Config(format!("[function]: {e}")));
        }
        Ok(f)
    }

    /// Build the configured symbol for a `dim`-dimensional grid.
    pub fn symbol(&self, dim: usize) -> Result<Symbol, CliError> {
        symbols::builtin(&self.symbol.name, dim, self.symbol.param)
            .map_err(|e| CliError::Config(format!("symbol.name: {e}")))
    }

    /// Probe-family parameters plus whether defaults were substituted.
    pub fn probe_spec(&self) -> (ProbeFamilySpec, bool) {
        match &self.fredholm {
            Some(spec) => (
                ProbeFamilySpec {
                    bump_width: spec.bump_width,
                    translation_start: spec.translation_start,
                    translation_count: spec.translation_count,
                    modulation_base: spec.modulation_base,
                    modulation_count: spec.modulation_count,
                    mstar: spec.p0.zip(spec.theta),
                },
                false,
            ),
            None => (ProbeFamilySpec::default(), true),
        }
    }
}

/// Split core errors between bad-configuration and numeric failure exits.
pub fn numeric_error(e: CoreError) -> CliError {
    CliError::Numeric(e.to_string())
}

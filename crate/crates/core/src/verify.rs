//! End-to-end verification suite.
//!
//! Eleven numbered checks exercise the crate against independent oracles and
//! frozen reference values: Luxemburg norms against closed-form `L^p` norms,
//! prefix-sum maximal operators against exhaustive search, operator bounds,
//! the regularizer identity, residual decay, and exponent admissibility.
//! Every check carries a pinned runtime budget and reports a one-line
//! human-readable summary; tolerances live in constants at the top of this
//! file so a reader can audit them in one place.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent::{self, Exponent};
use crate::fredholm::{self, ProbeFamilySpec, Verdict};
use crate::grid::{bump, Grid, SampledFunction};
use crate::maximal::{hl_maximal, q_maximal, sharp_maximal};
use crate::modular::{self, DEFAULT_NORM_TOL};
use crate::oracle;
use crate::pdo::{self, PdoPlan};
use crate::symbols::{self, SampleLattice, Symbol};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;
/// Number of checks in the suite.
pub const CRITERIA: usize = 11;

/// Default grid for the suite: 1D, half-width 10, 128 nodes.
const HALF_WIDTH: f64 = 10.0;
const POINTS: usize = 128;

// -- Pinned tolerances, one per check that needs one. --------------------------

/// Check 1: relative deviation of the Luxemburg norm from the closed-form
/// constant-exponent norm.
const LUXEMBURG_REL_TOL: f64 = 1e-8;
/// Check 2: the modular of `f / ||f||` may exceed 1 by at most this much.
const UNIT_BALL_SLACK: f64 = 1e-9;
/// Check 4: allowed gap between the prefix-sum and exhaustive maximal values.
const MAXIMAL_ORACLE_TOL: f64 = 1e-12;
/// Check 5: slack for `M# f <= 2 M f` and tolerance for shift invariance.
const SHARP_DOUBLING_SLACK: f64 = 1e-12;
const SHARP_SHIFT_TOL: f64 = 1e-12;
/// Check 6: allowed spread of the per-function sup ratios within one symbol.
const POINTWISE_SPREAD_CAP: f64 = 5.0;
/// Check 7: allowed spread of the operator-norm ratios within one symbol.
const NORM_SPREAD_CAP: f64 = 10.0;
/// Check 8: lattice deviation of `a b_R` from `1 - phi_R`.
const IDENTITY_TOL: f64 = 1e-14;
/// Check 10: residual-ratio monotonicity slack and final/first cap.
const COMPOSITION_MONOTONE_SLACK: f64 = 1e-9;
const COMPOSITION_FINAL_OVER_FIRST: f64 = 0.5;
/// Check 11: threshold for the at-infinity log-Hoelder constant, the limit
/// exponent it is measured against, and the recombination tolerance.
const INFINITY_THRESHOLD: f64 = 0.1;
const OSCILLATING_P_INF: f64 = 2.1;
const RECOMBINE_TOL: f64 = 1e-12;

/// Frozen reference values for check 4: the discrete maximal function of the
/// indicator of `[0, 1]` on the 64-point grid, at the nodes nearest
/// x = 2, 4, 8. Each equals (mass in nodes) / (nodes in the best window):
/// the indicator covers 4 nodes, and the best windows hold 7, 15, 27 nodes.
const INDICATOR_TAIL: [(f64, f64); 3] = [(2.0, 4.0 / 7.0), (4.0, 4.0 / 15.0), (8.0, 4.0 / 27.0)];

/// Frozen reference values for check 11: the at-infinity log-Hoelder
/// constant of the oscillating exponent `log_log_sine(0.1, 0.05)` measured
/// against `p_inf = 2.1` on 128-point grids of half-width 10, 20, 40. The
/// constant grows with the domain because the sine term keeps oscillating,
/// so a fixed threshold of 0.1 passes only the smallest domain.
#[allow(clippy::excessive_precision)] // literals pinned exactly as measured
const OSCILLATING_INFINITY_CONSTANTS: [(f64, f64); 3] = [
    (10.0, 9.41747347905795146e-2),
    (20.0, 1.38969920906858169e-1),
    (40.0, 1.81154810973788771e-1),
];
/// Allowed relative drift when re-measuring the frozen constants above.
const FROZEN_REL_TOL: f64 = 1e-9;

/// Knobs honored by a suite run. The defaults are the pinned values used by
/// the acceptance gate; callers may tighten `luxemburg_rel_tol` to
/// demonstrate tolerance sensitivity (the suite then fails check 1).
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Cap on the relative deviation in check 1.
    pub luxemburg_rel_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            luxemburg_rel_tol: LUXEMBURG_REL_TOL,
        }
    }
}

impl VerifyOptions {
    pub fn with_seed(seed: u64) -> Self {
        VerifyOptions {
            seed,
            ..VerifyOptions::default()
        }
    }
}

/// Outcome of a single check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionOutcome {
    /// 1-based position in the suite.
    pub index: usize,
    pub name: String,
    /// Module the check exercises; `--only` filters on this.
    pub module: String,
    pub passed: bool,
    pub elapsed_ms: u64,
    pub budget_ms: u64,
    /// One-line summary: measured quantities against their pinned caps.
    pub details: String,
}

impl CriterionOutcome {
    /// `PASS [ 3/11] lattice-property (modular, 120 ms) — ...` line.
    pub fn summary_line(&self) -> String {
        format!(
            "{} [{:2}/{}] {} ({}, {} ms) — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.index,
            CRITERIA,
            self.name,
            self.module,
            self.elapsed_ms,
            self.details
        )
    }
}

/// Outcome of a full (possibly filtered) run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub outcomes: Vec<CriterionOutcome>,
    pub all_passed: bool,
}

impl VerifyReport {
    /// One summary line per executed check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.outcomes.iter().map(|o| o.summary_line()).collect()
    }
}

struct CheckSpec {
    index: usize,
    name: &'static str,
    module: &'static str,
    budget_ms: u64,
    run: fn(&VerifyOptions) -> Result<(bool, String)>,
}

const CHECKS: [CheckSpec; CRITERIA] = [
    CheckSpec {
        index: 1,
        name: "luxemburg-constant-p",
        module: "modular",
        budget_ms: 5_000,
        run: check_luxemburg_constant_p,
    },
    CheckSpec {
        index: 2,
        name: "unit-ball-law",
        module: "modular",
        budget_ms: 10_000,
        run: check_unit_ball_law,
    },
    CheckSpec {
        index: 3,
        name: "lattice-property",
        module: "modular",
        budget_ms: 20_000,
        run: check_lattice_property,
    },
    CheckSpec {
        index: 4,
        name: "maximal-oracle-and-tail",
        module: "maximal",
        budget_ms: 10_000,
        run: check_maximal_oracle_and_tail,
    },
    CheckSpec {
        index: 5,
        name: "sharp-maximal-laws",
        module: "maximal",
        budget_ms: 10_000,
        run: check_sharp_maximal_laws,
    },
    CheckSpec {
        index: 6,
        name: "pointwise-sharp-estimate",
        module: "pdo",
        budget_ms: 60_000,
        run: check_pointwise_sharp_estimate,
    },
    CheckSpec {
        index: 7,
        name: "boundedness-probe",
        module: "pdo",
        budget_ms: 60_000,
        run: check_boundedness_probe,
    },
    CheckSpec {
        index: 8,
        name: "regularizer-identity",
        module: "fredholm",
        budget_ms: 5_000,
        run: check_regularizer_identity,
    },
    CheckSpec {
        index: 9,
        name: "fredholm-residual-decay",
        module: "fredholm",
        budget_ms: 120_000,
        run: check_fredholm_residual_decay,
    },
    CheckSpec {
        index: 10,
        name: "composition-residual-order",
        module: "pdo",
        budget_ms: 60_000,
        run: check_composition_residual_order,
    },
    CheckSpec {
        index: 11,
        name: "exponent-checkers",
        module: "exponent",
        budget_ms: 10_000,
        run: check_exponent_checkers,
    },
];

/// Modules that own at least one check, in suite order.
pub fn modules() -> Vec<&'static str> {
    let mut seen = Vec::new();
    for spec in &CHECKS {
        if !seen.contains(&spec.module) {
            seen.push(spec.module);
        }
    }
    seen
}

/// Run one check by 1-based index. Out-of-range indices return `None`.
pub fn run_criterion(index: usize, seed: u64) -> Option<CriterionOutcome> {
    let options = VerifyOptions::with_seed(seed);
    CHECKS
        .iter()
        .find(|spec| spec.index == index)
        .map(|spec| execute(spec, &options))
}

/// Run every check with the given seed.
pub fn run_all(seed: u64) -> VerifyReport {
    run_filtered(seed, None)
}

/// Run the checks belonging to one module, or all of them.
pub fn run_filtered(seed: u64, only: Option<&str>) -> VerifyReport {
    run_with(&VerifyOptions::with_seed(seed), only)
}

/// Run the suite with explicit options, optionally restricted to a module.
pub fn run_with(options: &VerifyOptions, only: Option<&str>) -> VerifyReport {
    let outcomes: Vec<CriterionOutcome> = CHECKS
        .iter()
        .filter(|spec| only.is_none_or(|m| m == spec.module))
        .map(|spec| execute(spec, options))
        .collect();
    let all_passed = !outcomes.is_empty() && outcomes.iter().all(|o| o.passed);
    VerifyReport {
        seed: options.seed,
        outcomes,
        all_passed,
    }
}

fn execute(spec: &CheckSpec, options: &VerifyOptions) -> CriterionOutcome {
    let start = Instant::now();
    let run = (spec.run)(options);
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let (mut passed, mut details) = match run {
        Ok((passed, details)) => (passed, details),
        Err(e) => (false, format!("error: {e}")),
    };
    if passed && elapsed_ms >= spec.budget_ms {
        passed = false;
        details = format!(
            "{details}; over budget ({elapsed_ms} ms >= {} ms)",
            spec.budget_ms
        );
    }
    CriterionOutcome {
        index: spec.index,
        name: spec.name.into(),
        module: spec.module.into(),
        passed,
        elapsed_ms,
        budget_ms: spec.budget_ms,
        details,
    }
}

fn default_grid() -> Result<Grid> {
    Grid::new(1, HALF_WIDTH, POINTS)
}

fn oscillating_exponent(grid: Grid) -> Result<Exponent> {
    Exponent::log_log_sine(grid, 0.1, 0.05)
}

/// The 12-member bump family shared by checks 6 and 7: three widths times
/// four centers, all supported well inside the domain.
fn bump_family(grid: &Grid) -> Result<Vec<SampledFunction>> {
    let mut family = Vec::with_capacity(12);
    for &width in &[1.0, 1.5, 2.0] {
        for &center in &[-3.0, -1.0, 1.0, 3.0] {
            family.push(bump(grid, &[center], width)?);
        }
    }
    Ok(family)
}

/// Symbols probed by checks 6 and 7: the identity, an order-zero elliptic
/// multiplier, and the slowly oscillating model symbol.
fn probe_symbols() -> Result<Vec<Symbol>> {
    Ok(vec![
        symbols::one(1)?,
        symbols::bracket_elliptic(1)?,
        symbols::so_log_sine(1)?,
    ])
}

// -- Check 1 ------------------------------------------------------------------

/// For constant exponents the Luxemburg norm has a closed form, the ordinary
/// discrete `L^p` norm; the bisection must reproduce it.
fn check_luxemburg_constant_p(options: &VerifyOptions) -> Result<(bool, String)> {
    let cap = options.luxemburg_rel_tol;
    let seed = options.seed;
    let grid = default_grid()?;
    let mut worst = 0.0_f64;
    let mut cases = 0usize;
    for &p_val in &[1.5, 2.0, 3.0] {
        let p = Exponent::constant(grid, p_val)?;
        for i in 0..50 {
            let f = oracle::random_function(grid, seed.wrapping_add(i));
            let reference = oracle::lp_norm(&f, p_val);
            let measured = modular::luxemburg_norm(&f, &p, DEFAULT_NORM_TOL)?.value;
            worst = worst.max((measured - reference).abs() / reference);
            cases += 1;
        }
    }
    Ok((
        worst <= cap,
        format!("{cases} norms, worst relative deviation {worst:.2e} (cap {cap:.0e})"),
    ))
}

// -- Check 2 ------------------------------------------------------------------

/// The norm puts `f / ||f||` on the unit modular ball and any smaller
/// denominator pushes the modular above 1.
fn check_unit_ball_law(options: &VerifyOptions) -> Result<(bool, String)> {
    let seed = options.seed;
    let grid = default_grid()?;
    let p = oscillating_exponent(grid)?;
    let mut worst_at_norm = f64::NEG_INFINITY;
    let mut min_below = f64::INFINITY;
    for i in 0..50 {
        let f = oracle::random_function(grid, seed.wrapping_add(1_000 + i));
        let norm = modular::luxemburg_norm(&f, &p, DEFAULT_NORM_TOL)?.value;
        let at_norm = modular::modular(&f.scale(Complex64::new(1.0 / norm, 0.0)), &p)?;
        let below = modular::modular(&f.scale(Complex64::new(1.0 / (0.99 * norm), 0.0)), &p)?;
        worst_at_norm = worst_at_norm.max(at_norm);
        min_below = min_below.min(below);
    }
    let passed = worst_at_norm <= 1.0 + UNIT_BALL_SLACK && min_below > 1.0;
    Ok((
        passed,
        format!(
            "50 functions, max modular at the norm {worst_at_norm:.12} \
             (cap 1 + {UNIT_BALL_SLACK:.0e}), min modular at 0.99x {min_below:.6} (must exceed 1)"
        ),
    ))
}

// -- Check 3 ------------------------------------------------------------------

/// Nodewise domination `|f| <= |g|` must order the norms (up to twice the
/// bisection tolerance, enforced inside `check_lattice`).
fn check_lattice_property(options: &VerifyOptions) -> Result<(bool, String)> {
    let seed = options.seed;
    let grid = default_grid()?;
    let p = oscillating_exponent(grid)?;
    let mut violations = 0usize;
    for i in 0..200 {
        let (f, g) = oracle::random_dominated_pair(grid, seed.wrapping_add(2_000 + i));
        if !modular::check_lattice(&f, &g, &p)? {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("200 dominated pairs, {violations} norm-ordering violations (cap 0)"),
    ))
}

// -- Check 4 ------------------------------------------------------------------

/// The prefix-sum maximal operator must agree with exhaustive window search,
/// and the maximal function of the indicator of `[0, 1]` must match both its
/// frozen window values and the continuum profile `1/x` to one-cell error.
fn check_maximal_oracle_and_tail(options: &VerifyOptions) -> Result<(bool, String)> {
    let seed = options.seed;
    let grid = Grid::new(1, HALF_WIDTH, 64)?;
    let mut worst_gap = 0.0_f64;
    for i in 0..20 {
        let f = oracle::random_function(grid, seed.wrapping_add(3_000 + i));
        let fast = hl_maximal(&f);
        let slow = oracle::exhaustive_hl_maximal(&f, grid.points_per_axis() / 2);
        for (a, b) in fast.values().iter().zip(&slow) {
            worst_gap = worst_gap.max((a.re - b).abs());
        }
    }

    let indicator = SampledFunction::from_real_fn(grid, |x| {
        if (0.0..=1.0).contains(&x[0]) {
            1.0
        } else {
            0.0
        }
    });
    let maximal = hl_maximal(&indicator);
    let h = grid.spacing();
    let mut tail_ok = true;
    let mut tail_notes = Vec::new();
    for &(target, frozen) in &INDICATOR_TAIL {
        let node = ((target + HALF_WIDTH) / h).round() as usize;
        let x = grid.node(node)[0];
        let value = maximal.values()[node].re;
        let frozen_gap = (value - frozen).abs();
        let profile_gap = (value - 1.0 / x).abs();
        let one_cell = h / x;
        if frozen_gap > MAXIMAL_ORACLE_TOL || profile_gap > one_cell {
            tail_ok = false;
        }
        tail_notes.push(format!(
            "x={x:.4}: |M - 1/x| = {profile_gap:.3e} (cap {one_cell:.3e})"
        ));
    }

    let passed = worst_gap <= MAXIMAL_ORACLE_TOL && tail_ok;
    Ok((
        passed,
        format!(
            "20 seeds, worst prefix-vs-exhaustive gap {worst_gap:.2e} \
             (cap {MAXIMAL_ORACLE_TOL:.0e}); indicator tail {}",
            tail_notes.join(", ")
        ),
    ))
}

// -- Check 5 ------------------------------------------------------------------

/// Structure of the sharp maximal operator: it annihilates constants, is
/// dominated by twice the maximal operator, and ignores constant shifts.
fn check_sharp_maximal_laws(options: &VerifyOptions) -> Result<(bool, String)> {
    let seed = options.seed;
    let grid = default_grid()?;

    let constant = SampledFunction::from_fn(grid, |_| Complex64::new(1.75, -0.5));
    let sharp_const = sharp_maximal(&constant).sup_norm();

    let shift = Complex64::new(0.7, -0.3);
    let mut worst_doubling = 0.0_f64;
    let mut worst_shift = 0.0_f64;
    for i in 0..50 {
        let f = oracle::random_function(grid, seed.wrapping_add(4_000 + i));
        let sharp = sharp_maximal(&f);
        let maximal = hl_maximal(&f);
        for (s, m) in sharp.values().iter().zip(maximal.values()) {
            // Every mean oscillation is at most twice the corresponding mean
            // of |f|, so only accumulated roundoff can breach the factor 2.
            worst_doubling = worst_doubling.max(s.re - 2.0 * m.re * (1.0 + SHARP_DOUBLING_SLACK));
        }
        let shifted = sharp_maximal(&f.map(|v| v + shift));
        for (a, b) in shifted.values().iter().zip(sharp.values()) {
            worst_shift = worst_shift.max((a.re - b.re).abs());
        }
    }

    let passed = sharp_const == 0.0 && worst_doubling <= 0.0 && worst_shift <= SHARP_SHIFT_TOL;
    Ok((
        passed,
        format!(
            "sharp of constant = {sharp_const:.1e} (must be 0); worst excess over 2M \
             {worst_doubling:.2e} (cap 0); shift deviation {worst_shift:.2e} (cap {SHARP_SHIFT_TOL:.0e})"
        ),
    ))
}

// -- Check 6 ------------------------------------------------------------------

/// Pointwise control `M#(Op(a)u) <= C M_2 u`: the sup of the nodewise ratio
/// must stay finite and close to uniform across a family of bumps, since the
/// constant depends on the symbol but not on the test function.
fn check_pointwise_sharp_estimate(_options: &VerifyOptions) -> Result<(bool, String)> {
    let grid = default_grid()?;
    let plan = PdoPlan::new(&grid);
    let family = bump_family(&grid)?;
    let mut notes = Vec::new();
    let mut passed = true;
    for symbol in probe_symbols()? {
        let mut ratios = Vec::with_capacity(family.len());
        for u in &family {
            let image = pdo::apply(&plan, &symbol, u)?;
            let sharp = sharp_maximal(&image);
            let control = q_maximal(u, 2.0)?;
            let mut sup = 0.0_f64;
            for (s, m) in sharp.values().iter().zip(control.values()) {
                let ratio = s.re / m.re;
                if !ratio.is_finite() {
                    sup = f64::INFINITY;
                    break;
                }
                sup = sup.max(ratio);
            }
            ratios.push(sup);
        }
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max / min;
        if !(max.is_finite() && spread < POINTWISE_SPREAD_CAP) {
            passed = false;
        }
        notes.push(format!(
            "{}: sup {max:.3}, spread {spread:.3}",
            symbol.name()
        ));
    }
    Ok((
        passed,
        format!(
            "12 bumps per symbol; {} (spread cap {POINTWISE_SPREAD_CAP})",
            notes.join("; ")
        ),
    ))
}

// -- Check 7 ------------------------------------------------------------------

/// Norm-ratio probe for boundedness on the oscillating-exponent space: the
/// ratios `||Op(a)u|| / ||u||` across the bump family must not blow up with
/// scale or position.
fn check_boundedness_probe(_options: &VerifyOptions) -> Result<(bool, String)> {
    let grid = default_grid()?;
    let p = oscillating_exponent(grid)?;
    let plan = PdoPlan::new(&grid);
    let family = bump_family(&grid)?;
    let mut notes = Vec::new();
    let mut passed = true;
    for symbol in probe_symbols()? {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for u in &family {
            let image = pdo::apply(&plan, &symbol, u)?;
            let ratio = modular::norm_value(&image, &p)? / modular::norm_value(u, &p)?;
            max = max.max(ratio);
            min = min.min(ratio);
        }
        let spread = max / min;
        if !(max.is_finite() && spread < NORM_SPREAD_CAP) {
            passed = false;
        }
        notes.push(format!(
            "{}: max ratio {max:.3}, spread {spread:.3}",
            symbol.name()
        ));
    }
    Ok((
        passed,
        format!(
            "12 bumps per symbol; {} (spread cap {NORM_SPREAD_CAP})",
            notes.join("; ")
        ),
    ))
}

// -- Check 8 ------------------------------------------------------------------

/// The regularizer is built by pointwise division, so `a b_R = 1 - phi_R`
/// must hold to roundoff on the whole sample lattice for every elliptic
/// built-in symbol.
fn check_regularizer_identity(_options: &VerifyOptions) -> Result<(bool, String)> {
    let grid = default_grid()?;
    let lattice = SampleLattice::from_grid(&grid);
    let elliptic: Vec<Symbol> = vec![
        symbols::one(1)?,
        symbols::bracket_power(1, -1.0)?,
        symbols::bracket_power(1, 0.0)?,
        symbols::bracket_power(1, 1.0)?,
        symbols::bracket_elliptic(1)?,
    ];
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    for symbol in &elliptic {
        let radius =
            fredholm::ellipticity_radius(symbol, &lattice, fredholm::DEFAULT_ELLIPTICITY_EPS)
                .ok_or(crate::error::Error::EllipticityViolation {
                    radius: 0.0,
                    min_abs: 0.0,
                    x: vec![0.0],
                    xi: vec![0.0],
                })?;
        let b =
            symbols::regularizer_b_r(symbol, radius, &lattice, fredholm::DEFAULT_ELLIPTICITY_EPS)?;
        let phi = symbols::cutoff_phi_r(1, radius)?;
        worst = worst.max(fredholm::identity_residual(symbol, &b, &phi, &lattice));
        count += 1;
    }
    Ok((
        worst <= IDENTITY_TOL,
        format!(
            "{count} elliptic symbols, worst lattice deviation of a*b_R from 1 - phi_R \
             {worst:.2e} (cap {IDENTITY_TOL:.0e})"
        ),
    ))
}

// -- Check 9 ------------------------------------------------------------------

/// Full regularizer pipeline on the oscillating-exponent space: residual
/// decay tables for the identity and an elliptic multiplier must both earn a
/// Fredholm-consistent verdict, and the non-elliptic demo symbol must be
/// rejected at the ellipticity stage.
fn check_fredholm_residual_decay(_options: &VerifyOptions) -> Result<(bool, String)> {
    let grid = default_grid()?;
    let p = oscillating_exponent(grid)?;
    let spec = ProbeFamilySpec::default();

    let mut notes = Vec::new();
    let mut passed = true;
    let mut worst_final = 0.0_f64;
    for symbol in [symbols::one(1)?, symbols::bracket_elliptic(1)?] {
        let report = fredholm::run_fredholm_pipeline(&symbol, &p, &spec)?;
        if report.verdict != Verdict::FredholmConsistent {
            passed = false;
        }
        for check in &report.checks {
            worst_final = worst_final.max(check.final_over_first);
        }
        notes.push(format!("{}: {:?}", symbol.name(), report.verdict));
    }

    let demo = symbols::nonelliptic_demo(1)?;
    let report = fredholm::run_fredholm_pipeline(&demo, &p, &spec)?;
    if report.verdict != Verdict::EllipticFail {
        passed = false;
    }
    notes.push(format!("{}: {:?}", demo.name(), report.verdict));

    Ok((
        passed,
        format!(
            "{}; worst final/first {worst_final:.3} (cap {})",
            notes.join("; "),
            fredholm::FINAL_OVER_FIRST_MAX
        ),
    ))
}

// -- Check 10 -----------------------------------------------------------------

/// Order gain of the symbol calculus: the commutator-type residual of
/// `Op(m)Op(v) - Op(m v)` applied to modulated bumps must shrink as the
/// modulation frequency grows, because the residual symbol has order -1.
fn check_composition_residual_order(_options: &VerifyOptions) -> Result<(bool, String)> {
    let grid = default_grid()?;
    let plan = PdoPlan::new(&grid);
    let multiplier = symbols::bracket_elliptic(1)?;
    let envelope_width = 2.0;
    let envelope = symbols::x_bump(1, envelope_width)?;

    let mut ratios = Vec::new();
    for k in 0..4u32 {
        let omega = 2.0 * f64::from(1u32 << k) * std::f64::consts::PI / HALF_WIDTH;
        let u = SampledFunction::from_fn(grid, |x| {
            Complex64::from_polar(
                crate::grid::mollifier(x[0].abs() / envelope_width),
                omega * x[0],
            )
        });
        let residual = pdo::composition_residual(&plan, &multiplier, &envelope, &u)?;
        ratios.push(residual.l2_norm() / u.l2_norm());
    }

    let monotone = ratios
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + COMPOSITION_MONOTONE_SLACK));
    let final_over_first = ratios[ratios.len() - 1] / ratios[0];
    let passed = monotone && final_over_first <= COMPOSITION_FINAL_OVER_FIRST;
    let table = ratios
        .iter()
        .map(|r| format!("{r:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((
        passed,
        format!(
            "residual ratios [{table}] over doubling frequencies, final/first \
             {final_over_first:.3} (cap {COMPOSITION_FINAL_OVER_FIRST})"
        ),
    ))
}

// -- Check 11 -----------------------------------------------------------------

/// Exponent admissibility: constant exponents score exactly zero on every
/// regularity check; the oscillating exponent outgrows a fixed at-infinity
/// threshold as the domain doubles, yet still admits the convex split
/// `1/p = theta/p0 + (1 - theta)/p1` with an exact recombination.
fn check_exponent_checkers(_options: &VerifyOptions) -> Result<(bool, String)> {
    let grid = default_grid()?;

    let mut const_worst = 0.0_f64;
    for &p_val in &[1.5, 2.0, 3.0] {
        let p = Exponent::constant(grid, p_val)?;
        let local = exponent::check_log_holder_local(&p, INFINITY_THRESHOLD);
        let infinity = exponent::check_log_holder_infinity(&p, p_val, INFINITY_THRESHOLD)?;
        let nekvinda = exponent::check_nekvinda(&p, p_val, 0.5, INFINITY_THRESHOLD)?;
        for report in [&local, &infinity, &nekvinda] {
            const_worst = const_worst.max(report.best_constant.abs());
            if !report.holds {
                const_worst = const_worst.max(f64::INFINITY);
            }
        }
    }

    let mut doubling_ok = true;
    let mut doubling_notes = Vec::new();
    for (i, &(half_width, frozen)) in OSCILLATING_INFINITY_CONSTANTS.iter().enumerate() {
        let g = Grid::new(1, half_width, POINTS)?;
        let p = oscillating_exponent(g)?;
        let report =
            exponent::check_log_holder_infinity(&p, OSCILLATING_P_INF, INFINITY_THRESHOLD)?;
        let drift = (report.best_constant - frozen).abs() / frozen;
        // The threshold admits only the smallest domain: holds at L = 10,
        // fails at L = 20 and L = 40.
        let expected_holds = i == 0;
        if report.holds != expected_holds || drift > FROZEN_REL_TOL {
            doubling_ok = false;
        }
        doubling_notes.push(format!(
            "L={half_width}: c={:.4} {}",
            report.best_constant,
            if report.holds { "holds" } else { "fails" }
        ));
    }

    let p = oscillating_exponent(grid)?;
    let p1 = exponent::mstar_decompose(&p, 2.0, 0.5)?;
    let recombined = exponent::mstar_recombine(2.0, 0.5, &p1)?;
    let mut recombine_gap = 0.0_f64;
    for (a, b) in recombined.values().iter().zip(p.values()) {
        recombine_gap = recombine_gap.max((a - b).abs());
    }

    let passed = const_worst == 0.0 && doubling_ok && recombine_gap <= RECOMBINE_TOL;
    Ok((
        passed,
        format!(
            "constant checkers worst {const_worst:.1e} (must be 0); at-infinity under doubling \
             {} (threshold {INFINITY_THRESHOLD}); split p0=2 theta=0.5 recombines to \
             {recombine_gap:.2e} (cap {RECOMBINE_TOL:.0e})",
            doubling_notes.join(", ")
        ),
    ))
}

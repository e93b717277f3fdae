//! Fredholm probe pipeline: ellipticity radius, regularizer construction,
//! and residual decay on weakly-null probe families.
//!
//! For a symbol `a` that is elliptic at infinity there is a radius `R` and
//! a regularizer `b_R = (1 - phi_R)/a` with `a b_R = 1 - phi_R` exactly.
//! `Op(b_R)` then inverts `Op(a)` modulo an operator that should behave
//! like a compact one. Compactness itself is not computable on a grid; the
//! honest desk-scale surrogate is that the residuals
//! `I - Op(a) Op(b_R)` (right) and `I - Op(b_R) Op(a)` (left) crush
//! canonical weakly-null families — bumps translated toward the domain
//! edge, and bumps modulated to ever higher frequency. The pipeline builds
//! both families, tabulates the residual norm ratios in the variable-
//! exponent norm, and issues a verdict from fixed decay thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{bump, Grid, SampledFunction};
use crate::modular::{self, DEFAULT_NORM_TOL};
use crate::pdo::{self, PdoPlan, SUPPORT_GUARD_FRACTION};
use crate::symbols::{self, SampleLattice, Symbol};

/// Floor for `inf |a|` on the outer region (condition for building `b_R`).
pub const DEFAULT_ELLIPTICITY_EPS: f64 = 1e-3;
/// A residual table row may exceed its predecessor by at most this factor.
pub const MONOTONE_SLACK: f64 = 1.05;
/// Last table entry must be at most this fraction of the first.
pub const FINAL_OVER_FIRST_MAX: f64 = 0.25;
/// Identity `a b_R = 1 - phi_R` must hold to this relative tolerance.
pub const IDENTITY_TOL: f64 = 1e-14;

/// Outcome of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "Fredholm-consistent")]
    FredholmConsistent,
    #[serde(rename = "inconclusive")]
    Inconclusive,
    #[serde(rename = "elliptic-fail")]
    EllipticFail,
}

/// Which weakly-null family a probe belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeFamily {
    #[serde(rename = "translate")]
    Translate,
    #[serde(rename = "modulate")]
    Modulate,
}

/// One row of the residual decay tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeResidual {
    pub index: usize,
    pub family: ProbeFamily,
    pub description: String,
    /// `||(I - Op(a) Op(b_R)) u|| / ||u||` in the variable-exponent norm.
    pub right_ratio: f64,
    /// `||(I - Op(b_R) Op(a)) u|| / ||u||`.
    pub left_ratio: f64,
}

/// Decay diagnostics for one (side, family) slice of the tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayCheck {
    pub family: ProbeFamily,
    pub side: String,
    pub monotone: bool,
    pub final_over_first: f64,
    pub passes: bool,
}

/// Probe family parameters. Defaults fit the standard `L = 10` grid:
/// five bumps with centers marching geometrically to `0.7 L` and four
/// modulations doubling from `4 pi / L`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeFamilySpec {
    pub bump_width: f64,
    pub translation_start: f64,
    pub translation_count: usize,
    /// First modulation frequency as a multiple of `pi / L`.
    pub modulation_base: f64,
    pub modulation_count: usize,
    /// Optional `(p0, theta)` to record the exponent decomposition used by
    /// the boundedness argument; purely informational.
    pub mstar: Option<(f64, f64)>,
}

impl Default for ProbeFamilySpec {
    fn default() -> Self {
        ProbeFamilySpec {
            bump_width: 1.0,
            translation_start: 0.4375,
            translation_count: 5,
            modulation_base: 4.0,
            modulation_count: 4,
            mstar: None,
        }
    }
}

/// Recorded exponent-decomposition attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MStarRecord {
    pub p0: f64,
    pub theta: f64,
    pub feasible: bool,
}

/// Full pipeline output; serializable as JSON and as a CSV decay table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FredholmReport {
    pub symbol: String,
    pub grid: Grid,
    /// Chosen ellipticity radius, absent when no ladder rung qualifies.
    pub radius: Option<f64>,
    /// `inf |a|` over the lattice region `|x| + |xi| >= R`.
    pub outer_inf: Option<f64>,
    /// Max relative deviation of `a b_R` from `1 - phi_R` on the lattice.
    pub identity_residual: Option<f64>,
    pub probes: Vec<ProbeResidual>,
    /// Probes dropped because their support would cross `0.8 L`.
    pub truncated: Vec<String>,
    pub checks: Vec<DecayCheck>,
    pub mstar: Option<MStarRecord>,
    pub verdict: Verdict,
}

impl FredholmReport {
    /// The decay tables as CSV, one row per probe.
    pub fn decay_table_csv(&self) -> String {
        let mut out = String::from("index,family,description,right_ratio,left_ratio\n");
        for p in &self.probes {
            let family = match p.family {
                ProbeFamily::Translate => "translate",
                ProbeFamily::Modulate => "modulate",
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.index, family, p.description, p.right_ratio, p.left_ratio
            ));
        }
        out
    }
}

/// Smallest rung of the radius ladder on which `|a|` stays at or above
/// `eps` over the outer lattice region `|x| + |xi| >= R`.
///
/// The ladder spans an octave below half the lattice reach
/// (`reach = x_half_width + xi_max`), so the largest rung still leaves the
/// outer half of the lattice as scan region. Absence is a value: symbols
/// that oscillate all the way out simply never qualify.
pub fn ellipticity_radius(a: &Symbol, lattice: &SampleLattice, eps: f64) -> Option<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return None;
    }
    let reach = lattice.x_half_width + lattice.xi_max;
    let ladder = [reach / 16.0, reach / 8.0, reach / 4.0];
    let xs = lattice.x_points();
    let xis = lattice.xi_points();
    let dim = lattice.dim;
    'rungs: for radius in ladder {
        let mut min_abs = f64::INFINITY;
        for x in &xs {
            let nx = norm2(&x[..dim]);
            for xi in &xis {
                if nx + norm2(&xi[..dim]) >= radius {
                    let v = a.evaluate(&x[..dim], &xi[..dim]).norm();
                    if !v.is_finite() || v < eps {
                        continue 'rungs;
                    }
                    min_abs = min_abs.min(v);
                }
            }
        }
        if min_abs.is_finite() {
            return Some(radius);
        }
    }
    None
}

fn norm2(v: &[f64]) -> f64 {
    match v.len() {
        1 => v[0].abs(),
        _ => v[0].hypot(v[1]),
    }
}

/// `inf |a|` over the outer lattice region (diagnostic for the report).
fn outer_infimum(a: &Symbol, lattice: &SampleLattice, radius: f64) -> f64 {
    let dim = lattice.dim;
    let mut min_abs = f64::INFINITY;
    for x in lattice.x_points() {
        let nx = norm2(&x[..dim]);
        for xi in lattice.xi_points() {
            if nx + norm2(&xi[..dim]) >= radius {
                min_abs = min_abs.min(a.evaluate(&x[..dim], &xi[..dim]).norm());
            }
        }
    }
    min_abs
}

/// Max relative deviation of `a b_R` from `1 - phi_R` over the lattice.
pub(crate) fn identity_residual(
    a: &Symbol,
    b: &Symbol,
    phi: &Symbol,
    lattice: &SampleLattice,
) -> f64 {
    let dim = lattice.dim;
    let mut worst = 0.0_f64;
    for x in lattice.x_points() {
        for xi in lattice.xi_points() {
            let (x, xi) = (&x[..dim], &xi[..dim]);
            let lhs = a.evaluate(x, xi) * b.evaluate(x, xi);
            let rhs = num_complex::Complex64::new(1.0, 0.0) - phi.evaluate(x, xi);
            let dev = (lhs - rhs).norm() / rhs.norm().max(1.0);
            worst = worst.max(dev);
        }
    }
    worst
}

struct Probe {
    family: ProbeFamily,
    description: String,
    u: SampledFunction,
}

/// Build both weakly-null families, dropping members whose support would
/// cross the `0.8 L` guard and noting them.
fn build_probes(grid: &Grid, spec: &ProbeFamilySpec) -> Result<(Vec<Probe>, Vec<String>)> {
    if spec.bump_width.is_nan() || spec.bump_width <= 0.0 {
        return Err(Error::NonPositive {
            what: "probe bump width",
            value: spec.bump_width,
        });
    }
    let guard = SUPPORT_GUARD_FRACTION * grid.half_width();
    let mut probes = Vec::new();
    let mut truncated = Vec::new();
    let mut center = spec.translation_start;
    for k in 0..spec.translation_count {
        let desc = format!("bump(center={center}, width={})", spec.bump_width);
        if center + spec.bump_width > guard + 1e-12 {
            truncated.push(format!("{desc}: support would cross {guard}"));
        } else {
            let mut c = [0.0; 2];
            c[0] = center;
            probes.push(Probe {
                family: ProbeFamily::Translate,
                description: desc,
                u: bump(grid, &c[..grid.dim()], spec.bump_width)?,
            });
        }
        if k + 1 < spec.translation_count {
            center *= 2.0;
        }
    }
    let base = bump(grid, &[0.0; 2][..grid.dim()], spec.bump_width)?;
    let mut omega = spec.modulation_base * std::f64::consts::PI / grid.half_width();
    for k in 0..spec.modulation_count {
        let w = omega;
        let u =
            SampledFunction::from_fn(*grid, |x| num_complex::Complex64::from_polar(1.0, w * x[0]))
                .binary(&base, |ph, b| ph * b)?;
        probes.push(Probe {
            family: ProbeFamily::Modulate,
            description: format!("bump(width={}) * exp(i {omega:.6} x)", spec.bump_width),
            u,
        });
        if k + 1 < spec.modulation_count {
            omega *= 2.0;
        }
    }
    Ok((probes, truncated))
}

/// Slice the tables by (side, family) and check monotone decay.
fn decay_checks(probes: &[ProbeResidual]) -> Vec<DecayCheck> {
    let mut out = Vec::new();
    for family in [ProbeFamily::Translate, ProbeFamily::Modulate] {
        for (side, pick) in [("right", true), ("left", false)] {
            let ratios: Vec<f64> = probes
                .iter()
                .filter(|p| p.family == family)
                .map(|p| if pick { p.right_ratio } else { p.left_ratio })
                .collect();
            if ratios.is_empty() {
                continue;
            }
            let monotone = ratios.windows(2).all(|w| w[1] <= w[0] * MONOTONE_SLACK);
            let final_over_first = if ratios[0] > 0.0 {
                ratios[ratios.len() - 1] / ratios[0]
            } else {
                0.0
            };
            out.push(DecayCheck {
                family,
                side: side.to_string(),
                monotone,
                final_over_first,
                passes: monotone && final_over_first <= FINAL_OVER_FIRST_MAX,
            });
        }
    }
    out
}

/// Run the full pipeline for one symbol and exponent.
pub fn run_fredholm_pipeline(
    a: &Symbol,
    p: &Exponent,
    spec: &ProbeFamilySpec,
) -> Result<FredholmReport> {
    let grid = *p.grid();
    p.ensure_admissible()?;
    let lattice = SampleLattice::from_grid(&grid);
    let mstar = spec.mstar.map(|(p0, theta)| MStarRecord {
        p0,
        theta,
        feasible: crate::exponent::mstar_decompose(p, p0, theta).is_ok(),
    });
    let radius = match ellipticity_radius(a, &lattice, DEFAULT_ELLIPTICITY_EPS) {
        Some(r) => r,
        None => {
            return Ok(FredholmReport {
                symbol: a.name().to_string(),
                grid,
                radius: None,
                outer_inf: None,
                identity_residual: None,
                probes: Vec::new(),
                truncated: Vec::new(),
                checks: Vec::new(),
                mstar,
                verdict: Verdict::EllipticFail,
            });
        }
    };
    let b = symbols::regularizer_b_r(a, radius, &lattice, DEFAULT_ELLIPTICITY_EPS)?;
    let phi = symbols::cutoff_phi_r(grid.dim(), radius)?;
    let id_res = identity_residual(a, &b, &phi, &lattice);
    if id_res > IDENTITY_TOL {
        return Err(Error::NonFinite {
            context: "regularizer identity drifted beyond tolerance",
        });
    }
    let plan = PdoPlan::new(&grid);
    let (probes, truncated) = build_probes(&grid, spec)?;
    let mut rows = Vec::with_capacity(probes.len());
    for (index, probe) in probes.iter().enumerate() {
        let u_norm = modular::luxemburg_norm(&probe.u, p, DEFAULT_NORM_TOL)?.value;
        // guard the probe itself; the intermediates Op(.)u are smooth
        // non-compactly-supported functions and legitimately reach the edge
        let first = pdo::apply(&plan, &b, &probe.u)?;
        let right = pdo::apply_unguarded(&plan, a, &first)?.sub(&probe.u)?;
        let first = pdo::apply(&plan, a, &probe.u)?;
        let left = pdo::apply_unguarded(&plan, &b, &first)?.sub(&probe.u)?;
        let right_ratio = modular::luxemburg_norm(&right, p, DEFAULT_NORM_TOL)?.value / u_norm;
        let left_ratio = modular::luxemburg_norm(&left, p, DEFAULT_NORM_TOL)?.value / u_norm;
        rows.push(ProbeResidual {
            index,
            family: probe.family,
            description: probe.description.clone(),
            right_ratio,
            left_ratio,
        });
    }
    let checks = decay_checks(&rows);
    let verdict = if !checks.is_empty() && checks.iter().all(|c| c.passes) {
        Verdict::FredholmConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(FredholmReport {
        symbol: a.name().to_string(),
        grid,
        radius: Some(radius),
        outer_inf: Some(outer_infimum(a, &lattice, radius)),
        identity_residual: Some(id_res),
        probes: rows,
        truncated,
        checks,
        mstar,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent;

    fn grid_128() -> Grid {
        Grid::new(1, 10.0, 128).unwrap()
    }

    #[test]
    fn radius_ladder_for_constant_symbol() {
        let lat = SampleLattice::from_grid(&grid_128());
        let a = symbols::one(1).unwrap();
        let r = ellipticity_radius(&a, &lat, 1e-3).unwrap();
        let reach = lat.x_half_width + lat.xi_max;
        assert!((r - reach / 16.0).abs() < 1e-12);
    }

    #[test]
    fn oscillating_symbol_has_no_radius() {
        let lat = SampleLattice::from_grid(&grid_128());
        let a = symbols::nonelliptic_demo(1).unwrap();
        assert!(ellipticity_radius(&a, &lat, 1e-3).is_none());
    }

    #[test]
    fn symbol_vanishing_on_bounded_set_gets_finite_radius() {
        // a = 1 - phi_{R0} vanishes exactly inside |x|+|xi| <= R0 and is 1
        // far out; some rung beyond the zero set must qualify.
        let lat = SampleLattice::from_grid(&grid_128());
        let r0 = 2.0;
        let phi = symbols::cutoff_phi_r(1, r0).unwrap();
        let a = symbols::sum(
            &symbols::one(1).unwrap(),
            &symbols::scaled(&phi, num_complex::Complex64::new(-1.0, 0.0)),
        )
        .unwrap();
        let r = ellipticity_radius(&a, &lat, 1e-3).unwrap();
        let reach = lat.x_half_width + lat.xi_max;
        assert!(r > r0, "radius {r} should clear the zero set");
        // the smallest rung sits inside the zero set, so the scan must have
        // moved up the ladder at least once
        assert!((r - reach / 8.0).abs() < 1e-12, "radius {r}");
    }

    #[test]
    fn pipeline_constant_symbol_is_fredholm_consistent() {
        let grid = grid_128();
        let p = exponent::Exponent::log_log_sine(grid, 0.1, 0.05).unwrap();
        let a = symbols::one(1).unwrap();
        let report = run_fredholm_pipeline(&a, &p, &ProbeFamilySpec::default()).unwrap();
        assert_eq!(report.verdict, Verdict::FredholmConsistent, "{report:#?}");
        assert_eq!(report.probes.len(), 9);
        assert!(report.truncated.is_empty());
        assert!(report.identity_residual.unwrap() <= IDENTITY_TOL);
        // Op(1) = I commutes, so left and right residuals coincide
        for row in &report.probes {
            assert!(
                (row.right_ratio - row.left_ratio).abs() < 1e-10,
                "row {row:?}"
            );
        }
    }

    #[test]
    fn pipeline_elliptic_multiplier_constant_p() {
        let grid = grid_128();
        let p = exponent::Exponent::constant(grid, 2.0).unwrap();
        let a = symbols::bracket_elliptic(1).unwrap();
        let report = run_fredholm_pipeline(&a, &p, &ProbeFamilySpec::default()).unwrap();
        assert_eq!(report.verdict, Verdict::FredholmConsistent, "{report:#?}");
    }

    #[test]
    fn pipeline_nonelliptic_exits_with_elliptic_fail() {
        let grid = grid_128();
        let p = exponent::Exponent::constant(grid, 2.0).unwrap();
        let a = symbols::nonelliptic_demo(1).unwrap();
        let report = run_fredholm_pipeline(&a, &p, &ProbeFamilySpec::default()).unwrap();
        assert_eq!(report.verdict, Verdict::EllipticFail);
        assert!(report.radius.is_none());
        assert!(report.probes.is_empty());
    }

    #[test]
    fn residual_is_linear_in_the_probe() {
        let grid = grid_128();
        let a = symbols::bracket_elliptic(1).unwrap();
        let lat = SampleLattice::from_grid(&grid);
        let radius = ellipticity_radius(&a, &lat, 1e-3).unwrap();
        let b = symbols::regularizer_b_r(&a, radius, &lat, 1e-3).unwrap();
        let plan = PdoPlan::new(&grid);
        let u = bump(&grid, &[1.0], 1.5).unwrap();
        let residual = |f: &SampledFunction| {
            let mid = pdo::apply(&plan, &b, f).unwrap();
            pdo::apply_unguarded(&plan, &a, &mid)
                .unwrap()
                .sub(f)
                .unwrap()
        };
        let r1 = residual(&u).scale(num_complex::Complex64::new(2.0, 0.0));
        let r2 = residual(&u.scale(num_complex::Complex64::new(2.0, 0.0)));
        assert!(r1.sub(&r2).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn conjugate_exponent_run_completes() {
        let grid = grid_128();
        let p = exponent::Exponent::log_log_sine(grid, 0.1, 0.05).unwrap();
        let q = p.conjugate().unwrap();
        let a = symbols::one(1).unwrap();
        let report = run_fredholm_pipeline(&a, &q, &ProbeFamilySpec::default()).unwrap();
        assert!(report.radius.is_some());
        assert_eq!(report.probes.len(), 9);
    }

    #[test]
    fn oversized_translations_are_truncated_with_notes() {
        let grid = grid_128();
        let p = exponent::Exponent::constant(grid, 2.0).unwrap();
        let a = symbols::one(1).unwrap();
        let spec = ProbeFamilySpec {
            translation_start: 2.0,
            translation_count: 4, // centers 2, 4, 8, 16: the last two cross 0.8 L
            ..ProbeFamilySpec::default()
        };
        let report = run_fredholm_pipeline(&a, &p, &spec).unwrap();
        assert_eq!(report.truncated.len(), 2, "{:?}", report.truncated);
        let n_translated = report
            .probes
            .iter()
            .filter(|r| r.family == ProbeFamily::Translate)
            .count();
        assert_eq!(n_translated, 2);
    }

    #[test]
    fn mstar_note_recorded() {
        let grid = grid_128();
        let p = exponent::Exponent::log_log_sine(grid, 0.1, 0.05).unwrap();
        let a = symbols::one(1).unwrap();
        let spec = ProbeFamilySpec {
            mstar: Some((2.0, 0.5)),
            ..ProbeFamilySpec::default()
        };
        let report = run_fredholm_pipeline(&a, &p, &spec).unwrap();
        let note = report.mstar.unwrap();
        assert!(note.feasible);
        assert_eq!(note.p0, 2.0);
    }

    #[test]
    fn report_round_trips_through_json() {
        let grid = grid_128();
        let p = exponent::Exponent::constant(grid, 2.0).unwrap();
        let a = symbols::one(1).unwrap();
        let report = run_fredholm_pipeline(&a, &p, &ProbeFamilySpec::default()).unwrap();
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: FredholmReport = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(text, again);
        let csv = report.decay_table_csv();
        assert!(csv.starts_with("index,family,description,right_ratio,left_ratio\n"));
        assert_eq!(csv.lines().count(), 1 + report.probes.len());
    }
}

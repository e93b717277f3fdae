//! The modular `I_p(f) = h^n sum |f(x)|^{p(x)}` and the Luxemburg norm
//! `inf { lambda > 0 : I_p(f/lambda) <= 1 }`, solved by bisection on the
//! monotone map `lambda -> I_p(f/lambda)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::SampledFunction;
use crate::par;

/// Default tolerance on the Luxemburg bisection variable `lambda`.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

const MAX_BISECTION_STEPS: usize = 200;

/// Outcome of a Luxemburg norm computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormResult {
    /// The norm value `lambda`.
    pub value: f64,
    /// Bisection steps taken (0 for the zero function).
    pub iterations: usize,
    /// Final bracket `(lambda_lo, lambda_hi)` with `lambda_lo <= value <= lambda_hi`.
    pub bracket: (f64, f64),
    /// `I_p(f / value)`, at most `1 + tol`.
    pub modular_at_value: f64,
}

/// Riemann-sum modular `h^n sum_nodes |f(x)|^{p(x)}`.
pub fn modular(f: &SampledFunction, p: &Exponent) -> Result<f64> {
    if f.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let terms: Vec<f64> =
        par::map_indexed(f.values().len(), |i| f.values()[i].norm().powf(p.value(i)));
    let sum = f.grid().cell_volume() * par::pairwise_sum(&terms);
    if !sum.is_finite() {
        return Err(Error::NonFinite {
            context: "modular sum",
        });
    }
    Ok(sum)
}

/// Modular of `f / lambda`; may return infinity for tiny `lambda` (callers
/// guard the bracket so this never feeds a result).
fn modular_scaled(f: &SampledFunction, p: &Exponent, lambda: f64) -> f64 {
    let terms: Vec<f64> = par::map_indexed(f.values().len(), |i| {
        (f.values()[i].norm() / lambda).powf(p.value(i))
    });
    f.grid().cell_volume() * par::pairwise_sum(&terms)
}

/// Luxemburg norm by bracketing + bisection.
///
/// The bracket starts at `lambda = 1` and doubles or halves until
/// `I(f/lambda_hi) <= 1 <= I(f/lambda_lo)`; the lower leg is floored where
/// the largest single term would overflow. Bisection then runs until the
/// bracket is narrower than `tol * min(1, lambda_hi)` (absolute and relative
/// control at once) *and* the midpoint's modular is `<= 1 + tol`, so the
/// returned value always sits within a whisker above the defining infimum.
pub fn luxemburg_norm(f: &SampledFunction, p: &Exponent, tol: f64) -> Result<NormResult> {
    if f.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::NonPositive {
            what: "norm tolerance",
            value: tol,
        });
    }
    p.ensure_admissible()?;
    if f.is_zero() {
        return Ok(NormResult {
            value: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
            modular_at_value: 0.0,
        });
    }

    let sup = f.sup_norm();
    // Largest magnitude over lambda stays representable above this floor.
    let lambda_floor = sup * 10f64.powf(-300.0 / p.p_plus());

    let mut lo;
    let mut hi;
    if modular_scaled(f, p, 1.0) <= 1.0 {
        hi = 1.0;
        lo = 0.5;
        let mut steps = 0;
        while modular_scaled(f, p, lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if lo < lambda_floor || steps > 1100 {
                return Err(Error::BisectionFailed { iterations: steps });
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        let mut steps = 0;
        while modular_scaled(f, p, hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > 1100 {
                return Err(Error::BisectionFailed { iterations: steps });
            }
        }
    }

    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket at floating-point resolution; hi certifies I <= 1.
            return Ok(NormResult {
                value: hi,
                iterations,
                bracket: (lo, hi),
                modular_at_value: modular_scaled(f, p, hi),
            });
        }
        let width = hi - lo;
        if width <= tol * 1.0_f64.min(hi) {
            let at_mid = modular_scaled(f, p, mid);
            if at_mid <= 1.0 + tol {
                return Ok(NormResult {
                    value: mid,
                    iterations,
                    bracket: (lo, hi),
                    modular_at_value: at_mid,
                });
            }
        }
        if iterations >= MAX_BISECTION_STEPS {
            return Err(Error::BisectionFailed { iterations });
        }
        if modular_scaled(f, p, mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
}

/// Norm value with the default tolerance.
pub fn norm_value(f: &SampledFunction, p: &Exponent) -> Result<f64> {
    Ok(luxemburg_norm(f, p, DEFAULT_NORM_TOL)?.value)
}

/// Lattice (monotonicity) law: given `|f| <= |g|` nodewise, check
/// `||f|| <= ||g|| + 2 tol`. The domination precondition is verified and
/// violations are an error, not a `false`.
pub fn check_lattice(f: &SampledFunction, g: &SampledFunction, p: &Exponent) -> Result<bool> {
    if f.grid() != g.grid() || f.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let mut violations = 0usize;
    let mut first = 0usize;
    for (i, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        if a.norm() > b.norm() {
            if violations == 0 {
                first = i;
            }
            violations += 1;
        }
    }
    if violations > 0 {
        return Err(Error::DominanceViolated {
            count: violations,
            first,
        });
    }
    let nf = luxemburg_norm(f, p, DEFAULT_NORM_TOL)?.value;
    let ng = luxemburg_norm(g, p, DEFAULT_NORM_TOL)?.value;
    Ok(nf <= ng + 2.0 * DEFAULT_NORM_TOL)
}

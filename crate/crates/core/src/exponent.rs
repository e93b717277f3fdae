//! Variable exponents `p(.)` and the regularity checkers used throughout the
//! toolkit: two-sided bounds, local log-Hoelder continuity, log-Hoelder decay
//! at infinity, the Nekvinda integral condition, and the convex `M*`
//! decomposition `1/p = theta/p0 + (1 - theta)/p1`.
//!
//! Exponents built from named closures keep the closure around so every
//! checker can re-run itself on a refined grid; the refinement trend (not the
//! raw constant, which is always finite on a truncated grid) is the part that
//! carries information.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par;

/// Analytic definition of an exponent, evaluable at arbitrary points.
pub type ExponentClosure = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Default acceptance threshold for the log-Hoelder constants.
pub const DEFAULT_HOLDER_THRESHOLD: f64 = 10.0;
/// Default acceptance threshold for the Nekvinda integral.
pub const DEFAULT_NEKVINDA_THRESHOLD: f64 = 1e3;

/// A variable exponent sampled on a grid, optionally with its closure.
#[derive(Clone)]
pub struct Exponent {
    grid: Grid,
    values: Vec<f64>,
    closure: Option<ExponentClosure>,
    p_minus: f64,
    p_plus: f64,
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Exponent")
            .field("grid", &self.grid)
            .field("p_minus", &self.p_minus)
            .field("p_plus", &self.p_plus)
            .field("has_closure", &self.closure.is_some())
            .finish()
    }
}

impl Exponent {
    /// Wrap raw node samples. Values must be finite and positive; the
    /// stricter `p > 1` requirement is checked by [`check_bounds`] and by
    /// [`Exponent::ensure_admissible`] so that boundary violations can be
    /// constructed and reported rather than merely rejected.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        for (node, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "exponent values",
                });
            }
            if v <= 0.0 {
                return Err(Error::ExponentOutOfRange { node, value: v });
            }
        }
        let p_minus = values.iter().copied().fold(f64::INFINITY, f64::min);
        let p_plus = values.iter().copied().fold(0.0, f64::max);
        Ok(Exponent {
            grid,
            values,
            closure: None,
            p_minus,
            p_plus,
        })
    }

    /// Sample a closure on every node and keep it for refinement studies.
    pub fn from_closure(grid: Grid, closure: ExponentClosure) -> Result<Self> {
        let values = (0..grid.node_count())
            .map(|i| {
                let p = grid.node(i);
                closure(&p[..grid.dim()])
            })
            .collect();
        let mut e = Self::from_values(grid, values)?;
        e.closure = Some(closure);
        Ok(e)
    }

    pub fn constant(grid: Grid, p0: f64) -> Result<Self> {
        Self::from_closure(grid, Arc::new(move |_| p0))
    }

    /// `p(x) = 2 + alpha + beta sin(log(log |x|))` for `|x| >= e`, and the
    /// constant `2 + alpha` inside the ball `|x| < e`. Continuous across the
    /// seam because the oscillation argument vanishes at `|x| = e`.
    pub fn log_log_sine(grid: Grid, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0 < beta && beta < alpha) {
            return Err(Error::BadOscillationParams { alpha, beta });
        }
        Self::from_closure(
            grid,
            Arc::new(move |x| log_log_sine_profile(alpha, beta, radius(x))),
        )
    }

    /// `p(x) = p_inf + amplitude / log(e + |x|)`: tends to `p_inf` at the
    /// exact log-Hoelder decay rate, so the at-infinity constant equals
    /// `amplitude`.
    pub fn log_holder_decay(grid: Grid, p_inf: f64, amplitude: f64) -> Result<Self> {
        Self::from_closure(
            grid,
            Arc::new(move |x| p_inf + amplitude / (std::f64::consts::E + radius(x)).ln()),
        )
    }

    /// Affine reparametrization `scale * p(x) + offset` of an existing
    /// exponent, composing closures when available.
    pub fn affine(&self, scale: f64, offset: f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| scale * v + offset).collect();
        let mut out = Self::from_values(self.grid, values)?;
        if let Some(base) = &self.closure {
            let base = Arc::clone(base);
            out.closure = Some(Arc::new(move |x| scale * base(x) + offset));
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// Grid minimum, the discrete stand-in for the essential infimum.
    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    /// Grid maximum, the discrete stand-in for the essential supremum.
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn has_closure(&self) -> bool {
        self.closure.is_some()
    }

    /// Re-sample the closure on a grid with `factor` times as many nodes per
    /// axis (same half-width; the refined lattice contains the original one).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let closure = self
            .closure
            .as_ref()
            .ok_or(Error::ClosureUnavailable { what: "exponent" })?;
        let fine = Grid::new(
            self.grid.dim(),
            self.grid.half_width(),
            self.grid.points_per_axis() * factor.max(1),
        )?;
        Self::from_closure(fine, Arc::clone(closure))
    }

    /// Verify the two-sided bound `1 < p(x)` at every node (finiteness is
    /// structural). Operations that assume admissibility call this first.
    pub fn ensure_admissible(&self) -> Result<()> {
        if self.p_minus > 1.0 {
            return Ok(());
        }
        let node = self
            .values
            .iter()
            .position(|&v| v <= 1.0)
            .expect("p_minus <= 1 implies a witness node");
        Err(Error::ExponentOutOfRange {
            node,
            value: self.values[node],
        })
    }

    /// Pointwise conjugate `p'(x) = p(x) / (p(x) - 1)`, so that
    /// `1/p + 1/p' = 1`. Involutive to roundoff.
    pub fn conjugate(&self) -> Result<Self> {
        self.ensure_admissible()?;
        let values = self.values.iter().map(|&v| v / (v - 1.0)).collect();
        let mut out = Self::from_values(self.grid, values)?;
        if let Some(base) = &self.closure {
            let base = Arc::clone(base);
            out.closure = Some(Arc::new(move |x| {
                let v = base(x);
                v / (v - 1.0)
            }));
        }
        Ok(out)
    }
}

/// Scalar profile of the oscillating example family as a function of `|x|`.
pub fn log_log_sine_profile(alpha: f64, beta: f64, r: f64) -> f64 {
    if r >= std::f64::consts::E {
        2.0 + alpha + beta * r.ln().ln().sin()
    } else {
        2.0 + alpha
    }
}

fn radius(x: &[f64]) -> f64 {
    match x.len() {
        1 => x[0].abs(),
        _ => x[0].hypot(x[1]),
    }
}

/// Outcome of one exponent-class check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentCheckReport {
    /// Which condition was checked (`bounds`, `log_holder_local`, ...).
    pub condition: String,
    pub holds: bool,
    /// Smallest constant (or integral value) witnessing the condition on
    /// this grid.
    pub best_constant: f64,
    /// Value `best_constant` was compared against.
    pub threshold: f64,
    /// Flat node indices achieving the extremum (one node or a pair).
    pub witness: Vec<usize>,
    /// Auxiliary scalars (grid bounds, limit value, refinement data).
    pub details: BTreeMap<String, f64>,
}

/// Two-sided bound check: holds iff `min p > 1` (the grid maximum is finite
/// by construction). Reports the extremal values and their nodes.
pub fn check_bounds(p: &Exponent) -> ExponentCheckReport {
    let argmin = par::argmax(&p.values.iter().map(|v| -v).collect::<Vec<_>>()).unwrap_or(0);
    let argmax = par::argmax(p.values()).unwrap_or(0);
    let mut details = BTreeMap::new();
    details.insert("p_minus".into(), p.p_minus());
    details.insert("p_plus".into(), p.p_plus());
    ExponentCheckReport {
        condition: "bounds".into(),
        holds: p.p_minus() > 1.0,
        best_constant: p.p_plus(),
        threshold: 1.0,
        witness: vec![argmin, argmax],
        details,
    }
}

/// Local log-Hoelder constant: the maximum over distinct node pairs of
/// `|p(x) - p(y)| log(e + 1/|x - y|)`. Exhaustive pair scan; ties resolved
/// toward the lexicographically smallest pair.
pub fn check_log_holder_local(p: &Exponent, threshold: f64) -> ExponentCheckReport {
    let grid = *p.grid();
    let n = grid.node_count();
    let e = std::f64::consts::E;
    let rows: Vec<(f64, usize, usize)> = par::map_indexed(n, |i| {
        let xi = grid.node(i);
        let pi = p.value(i);
        let mut best = (f64::NEG_INFINITY, i, i);
        for j in (i + 1)..n {
            let xj = grid.node(j);
            let d = match grid.dim() {
                1 => (xi[0] - xj[0]).abs(),
                _ => (xi[0] - xj[0]).hypot(xi[1] - xj[1]),
            };
            let c = (pi - p.value(j)).abs() * (e + 1.0 / d).ln();
            if c > best.0 {
                best = (c, i, j);
            }
        }
        best
    });
    let mut best = (0.0_f64, 0usize, 0usize);
    let mut seen = false;
    for row in rows {
        if row.1 == row.2 {
            continue; // last node has no partners
        }
        if !seen || row.0 > best.0 {
            best = row;
            seen = true;
        }
    }
    ExponentCheckReport {
        condition: "log_holder_local".into(),
        holds: best.0 <= threshold,
        best_constant: best.0,
        threshold,
        witness: vec![best.1, best.2],
        details: BTreeMap::new(),
    }
}

/// At-infinity log-Hoelder constant relative to the limit value `p_inf`:
/// the maximum over nodes of `|p(x) - p_inf| log(e + |x|)`.
pub fn check_log_holder_infinity(
    p: &Exponent,
    p_inf: f64,
    threshold: f64,
) -> Result<ExponentCheckReport> {
    if p_inf <= 1.0 {
        return Err(Error::NonPositive {
            what: "p_inf - 1",
            value: p_inf - 1.0,
        });
    }
    let grid = *p.grid();
    let e = std::f64::consts::E;
    let constants: Vec<f64> = par::map_indexed(grid.node_count(), |i| {
        let x = grid.node(i);
        (p.value(i) - p_inf).abs() * (e + grid.norm2(&x)).ln()
    });
    let witness = par::argmax(&constants).unwrap_or(0);
    let best = constants[witness];
    let mut details = BTreeMap::new();
    details.insert("p_inf".into(), p_inf);
    Ok(ExponentCheckReport {
        condition: "log_holder_infinity".into(),
        holds: best <= threshold,
        best_constant: best,
        threshold,
        witness: vec![witness],
        details,
    })
}

/// Nekvinda integral `int |p(x) - p_inf| c^{1/|p(x) - p_inf|} dx` as a
/// Riemann sum over the grid; nodes with `p(x) = p_inf` contribute zero (the
/// integrand's continuous extension). When the exponent carries a closure the
/// sum is recomputed on a 2x refined grid and `holds` additionally requires
/// the two quadratures to agree within 10%.
pub fn check_nekvinda(
    p: &Exponent,
    p_inf: f64,
    c: f64,
    threshold: f64,
) -> Result<ExponentCheckReport> {
    if p_inf <= 1.0 {
        return Err(Error::NonPositive {
            what: "p_inf - 1",
            value: p_inf - 1.0,
        });
    }
    if c <= 0.0 {
        return Err(Error::NonPositive {
            what: "nekvinda base c",
            value: c,
        });
    }
    let quadrature = |q: &Exponent| -> (f64, usize) {
        let grid = q.grid();
        let terms: Vec<f64> = q
            .values()
            .iter()
            .map(|&v| {
                let delta = (v - p_inf).abs();
                if delta == 0.0 {
                    0.0
                } else {
                    delta * c.powf(1.0 / delta)
                }
            })
            .collect();
        let witness = par::argmax(&terms).unwrap_or(0);
        (grid.cell_volume() * par::pairwise_sum(&terms), witness)
    };
    let (sum, witness) = quadrature(p);
    let mut details = BTreeMap::new();
    details.insert("p_inf".into(), p_inf);
    details.insert("c".into(), c);
    let mut holds = sum <= threshold;
    if p.has_closure() {
        let (fine_sum, _) = quadrature(&p.refined(2)?);
        details.insert("refined_integral".into(), fine_sum);
        if sum > 0.0 {
            let ratio = fine_sum / sum;
            details.insert("refinement_ratio".into(), ratio);
            holds = holds && (0.9..=1.1).contains(&ratio);
        }
    }
    Ok(ExponentCheckReport {
        condition: "nekvinda".into(),
        holds,
        best_constant: sum,
        threshold,
        witness: vec![witness],
        details,
    })
}

/// Solve `1/p(x) = theta/p0 + (1 - theta)/p1(x)` for the second factor
/// `p1`. Fails at the first node where the reciprocal leaves `(0, 1)`, i.e.
/// where no admissible finite `p1 > 1` exists.
pub fn mstar_decompose(p: &Exponent, p0: f64, theta: f64) -> Result<Exponent> {
    p.ensure_admissible()?;
    if !(p0 > 1.0 && p0.is_finite()) {
        return Err(Error::NonPositive {
            what: "p0 - 1",
            value: p0 - 1.0,
        });
    }
    if !(0.0 < theta && theta < 1.0) {
        return Err(Error::NonPositive {
            what: "theta (1 - theta)",
            value: theta * (1.0 - theta),
        });
    }
    let grid = *p.grid();
    let mut values = Vec::with_capacity(grid.node_count());
    for (node, &v) in p.values().iter().enumerate() {
        let reciprocal = (1.0 / v - theta / p0) / (1.0 - theta);
        if !(reciprocal > 0.0 && reciprocal < 1.0) {
            let x = grid.node(node);
            return Err(Error::InfeasibleDecomposition {
                node,
                x: x[..grid.dim()].to_vec(),
                reciprocal,
            });
        }
        values.push(1.0 / reciprocal);
    }
    let mut out = Exponent::from_values(grid, values)?;
    if let Some(base) = &p.closure {
        let base = Arc::clone(base);
        out.closure = Some(Arc::new(move |x| {
            (1.0 - theta) / (1.0 / base(x) - theta / p0)
        }));
    }
    Ok(out)
}

/// Recombine a decomposition: `1/p = theta/p0 + (1 - theta)/p1`.
pub fn mstar_recombine(p0: f64, theta: f64, p1: &Exponent) -> Result<Exponent> {
    let values = p1
        .values()
        .iter()
        .map(|&v| 1.0 / (theta / p0 + (1.0 - theta) / v))
        .collect();
    Exponent::from_values(*p1.grid(), values)
}

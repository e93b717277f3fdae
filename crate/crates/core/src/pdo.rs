//! Discretized pseudodifferential operators.
//!
//! The quantization on a grid is the truncated-sum analogue of
//! `Op(a)u(x) = (2pi)^{-n} \int a(x, xi) \hat u(xi) e^{i x xi} d xi`:
//!
//! * forward transform `\hat u(xi) = h^n \sum_x u(x) e^{-i x xi}` over the
//!   grid nodes, evaluated on the frequency lattice `xi = pi k / L`,
//!   `k in [-N/2, N/2)^n`;
//! * synthesis `out(x) = (2pi)^{-n} (pi/L)^n \sum_xi a(x, xi) \hat u(xi)
//!   e^{i x xi}`.
//!
//! With these weights the pair inverts exactly on the grid (`Op(1) = id` to
//! roundoff). Frequency-only symbols take an FFT fast path; general symbols
//! take the dense `O(N^{2n})` sum, parallel over output nodes.
//!
//! The model is periodic with period `2L`, so inputs must keep their mass
//! away from the boundary: `apply` refuses functions supported outside
//! `0.8 L` (max norm) rather than silently wrapping them around.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, SUPPORT_TOL};
use crate::par;
use crate::symbols::{self, Symbol};

/// Fraction of the half-width beyond which input support is rejected.
pub const SUPPORT_GUARD_FRACTION: f64 = 0.8;

/// Precomputed transforms and phase tables for one grid.
#[derive(Clone)]
pub struct PdoPlan {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `e^{i x_j xi_k}` for one axis, row-major `j * N + k`.
    axis_phase: Vec<Complex64>,
    xs: Vec<f64>,
    freqs: Vec<f64>,
}

impl std::fmt::Debug for PdoPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdoPlan").field("grid", &self.grid).finish()
    }
}

impl PdoPlan {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.points_per_axis();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let xs = grid.axis_nodes();
        let freqs = grid.freq_axis_nodes();
        let mut axis_phase = Vec::with_capacity(n * n);
        for &x in &xs {
            for &xi in &freqs {
                axis_phase.push(Complex64::from_polar(1.0, x * xi));
            }
        }
        PdoPlan {
            grid: *grid,
            fwd,
            inv,
            axis_phase,
            xs,
            freqs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Synthesis weight `(2pi)^{-n} (pi/L)^n = (2L)^{-n}`.
    fn synthesis_weight(&self) -> f64 {
        (2.0 * self.grid.half_width()).powi(-(self.grid.dim() as i32))
    }

    /// `(-1)^k` for the shifted frequency index `kp = k + N/2`.
    fn parity(&self, kp: usize) -> f64 {
        if (kp + self.grid.points_per_axis() / 2).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn shuffle(&self, kp: usize) -> usize {
        let n = self.grid.points_per_axis();
        (kp + n / 2) % n
    }

    /// `\hat u` on the frequency lattice, flat-indexed like [`Grid::freq`].
    pub fn forward(&self, u: &SampledFunction) -> Result<Vec<Complex64>> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.points_per_axis();
        let mut buf = u.values().to_vec();
        match self.grid.dim() {
            1 => {
                self.fwd.process(&mut buf);
                let h = self.grid.spacing();
                Ok((0..n)
                    .map(|kp| h * self.parity(kp) * buf[self.shuffle(kp)])
                    .collect())
            }
            _ => {
                self.fft_2d(&mut buf, &self.fwd);
                let h2 = self.grid.cell_volume();
                let mut out = vec![Complex64::new(0.0, 0.0); n * n];
                for k1 in 0..n {
                    for k2 in 0..n {
                        out[k1 * n + k2] = h2
                            * self.parity(k1)
                            * self.parity(k2)
                            * buf[self.shuffle(k1) * n + self.shuffle(k2)];
                    }
                }
                Ok(out)
            }
        }
    }

    /// In-place FFT over both axes of a row-major `N x N` buffer.
    fn fft_2d(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis();
        for row in buf.chunks_exact_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j2 in 0..n {
            for j1 in 0..n {
                col[j1] = buf[j1 * n + j2];
            }
            fft.process(&mut col);
            for j1 in 0..n {
                buf[j1 * n + j2] = col[j1];
            }
        }
    }

    /// Synthesize `out(x) = w \sum_xi A(xi) e^{i x xi}` for x-independent
    /// spectral data via the inverse FFT.
    fn synthesize(&self, spectral: &[Complex64]) -> SampledFunction {
        let n = self.grid.points_per_axis();
        let w = self.synthesis_weight();
        let mut buf = vec![Complex64::new(0.0, 0.0); spectral.len()];
        match self.grid.dim() {
            1 => {
                for kp in 0..n {
                    buf[self.shuffle(kp)] = self.parity(kp) * spectral[kp];
                }
                self.inv.process(&mut buf);
            }
            _ => {
                for k1 in 0..n {
                    for k2 in 0..n {
                        buf[self.shuffle(k1) * n + self.shuffle(k2)] =
                            self.parity(k1) * self.parity(k2) * spectral[k1 * n + k2];
                    }
                }
                self.fft_2d(&mut buf, &self.inv);
            }
        }
        for v in &mut buf {
            *v *= w;
        }
        SampledFunction::new(self.grid, buf).expect("length preserved")
    }
}

/// Reject inputs whose support reaches past `0.8 L` in max norm.
fn support_guard(plan: &PdoPlan, u: &SampledFunction) -> Result<()> {
    if *u.grid() != plan.grid {
        return Err(Error::GridMismatch);
    }
    let radius = SUPPORT_GUARD_FRACTION * plan.grid.half_width();
    let sup = u.sup_norm();
    if sup == 0.0 {
        return Ok(());
    }
    let mut worst: Option<(usize, f64)> = None;
    for (i, v) in u.values().iter().enumerate() {
        let mag = v.norm();
        if mag > SUPPORT_TOL * sup
            && plan.grid.norm_inf(&plan.grid.node(i)) > radius
            && worst.is_none_or(|(_, m)| mag > m)
        {
            worst = Some((i, mag));
        }
    }
    if let Some((node, magnitude)) = worst {
        let x = plan.grid.node(node)[..plan.grid.dim()].to_vec();
        return Err(Error::SupportGuard {
            radius,
            x,
            magnitude,
        });
    }
    Ok(())
}

/// Dense quantization without the input-support check; used by composition
/// chains whose intermediates are legitimately no longer compactly
/// supported. External callers go through [`apply`].
pub(crate) fn apply_unguarded(
    plan: &PdoPlan,
    a: &Symbol,
    u: &SampledFunction,
) -> Result<SampledFunction> {
    if a.dim() != plan.grid.dim() {
        return Err(Error::GridMismatch);
    }
    let uhat = plan.forward(u)?;
    let n = plan.grid.points_per_axis();
    let dim = plan.grid.dim();
    let w = plan.synthesis_weight();
    let values: Vec<Complex64> = match dim {
        1 => par::map_indexed(n, |j| {
            let x = [plan.xs[j]];
            let mut acc = Complex64::new(0.0, 0.0);
            for (kp, &uh) in uhat.iter().enumerate() {
                let xi = [plan.freqs[kp]];
                acc += a.evaluate(&x, &xi) * uh * plan.axis_phase[j * n + kp];
            }
            w * acc
        }),
        _ => par::map_indexed(n * n, |flat| {
            let (j1, j2) = (flat / n, flat % n);
            let x = [plan.xs[j1], plan.xs[j2]];
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in 0..n {
                let p1 = plan.axis_phase[j1 * n + k1];
                for k2 in 0..n {
                    let xi = [plan.freqs[k1], plan.freqs[k2]];
                    acc +=
                        a.evaluate(&x, &xi) * uhat[k1 * n + k2] * p1 * plan.axis_phase[j2 * n + k2];
                }
            }
            w * acc
        }),
    };
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::NonFinite {
            context: "pseudodifferential synthesis",
        });
    }
    SampledFunction::new(plan.grid, values)
}

/// Apply `Op(a)` to `u` (dense quantization, any symbol).
pub fn apply(plan: &PdoPlan, a: &Symbol, u: &SampledFunction) -> Result<SampledFunction> {
    support_guard(plan, u)?;
    apply_unguarded(plan, a, u)
}

/// Apply a frequency-only symbol (Fourier multiplier) via the FFT diagonal
/// path: `out = F^{-1}[ m(xi) \hat u ]`. The symbol is read at `x = 0`.
pub fn apply_multiplier(
    plan: &PdoPlan,
    m: &Symbol,
    u: &SampledFunction,
) -> Result<SampledFunction> {
    support_guard(plan, u)?;
    if m.dim() != plan.grid.dim() {
        return Err(Error::GridMismatch);
    }
    let mut uhat = plan.forward(u)?;
    let origin = [0.0; 2];
    let x = &origin[..plan.grid.dim()];
    for (idx, v) in uhat.iter_mut().enumerate() {
        let xi = plan.grid.freq(idx);
        let mv = m.evaluate(x, &xi[..plan.grid.dim()]);
        if !mv.re.is_finite() || !mv.im.is_finite() {
            return Err(Error::NonFinite {
                context: "multiplier evaluation",
            });
        }
        *v *= mv;
    }
    Ok(plan.synthesize(&uhat))
}

/// Residual `Op(a1)(Op(a2) u) - Op(a1 a2) u` of the leading-order symbol
/// calculus. The support guard applies to the original input only; the
/// intermediate `Op(a2) u` is in general no longer compactly supported.
pub fn composition_residual(
    plan: &PdoPlan,
    a1: &Symbol,
    a2: &Symbol,
    u: &SampledFunction,
) -> Result<SampledFunction> {
    support_guard(plan, u)?;
    let mid = apply_unguarded(plan, a2, u)?;
    let composed = apply_unguarded(plan, a1, &mid)?;
    let prod = symbols::product(a1, a2)?;
    let direct = apply_unguarded(plan, &prod, u)?;
    composed.sub(&direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::bump;
    use crate::oracle;

    fn test_grid() -> Grid {
        Grid::new(1, 10.0, 128).unwrap()
    }

    fn test_input(grid: &Grid) -> SampledFunction {
        // smooth bump plus a modulated copy, supported well inside 0.8 L
        let b = bump(grid, &[0.0], 3.0).unwrap();
        let m = bump(grid, &[1.5], 2.0)
            .unwrap()
            .scale(Complex64::new(0.5, 0.0));
        let osc = SampledFunction::from_fn(*grid, |x| Complex64::from_polar(1.0, 2.0 * x[0]));
        b.add(&m.binary(&osc, |a, b| a * b).unwrap()).unwrap()
    }

    #[test]
    fn forward_of_centered_delta_is_flat() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let mut vals = vec![Complex64::new(0.0, 0.0); grid.node_count()];
        vals[64] = Complex64::new(1.0, 0.0); // x = 0
        let u = SampledFunction::new(grid, vals).unwrap();
        let uhat = plan.forward(&u).unwrap();
        let h = grid.spacing();
        for v in &uhat {
            assert!((v - Complex64::new(h, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn identity_symbol_is_identity() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = test_input(&grid);
        let out = apply(&plan, &symbols::one(1).unwrap(), &u).unwrap();
        let err = out.sub(&u).unwrap().sup_norm();
        assert!(err < 1e-12, "identity residual {err}");

        let grid2 = Grid::new(2, 6.0, 16).unwrap();
        let plan2 = PdoPlan::new(&grid2);
        let u2 = bump(&grid2, &[0.5, -0.3], 2.0).unwrap();
        let out2 = apply(&plan2, &symbols::one(2).unwrap(), &u2).unwrap();
        assert!(out2.sub(&u2).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn multiplier_fast_path_matches_dense_apply() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = test_input(&grid);
        let m = symbols::bracket_power(1, -1.0).unwrap();
        let dense = apply(&plan, &m, &u).unwrap();
        let fast = apply_multiplier(&plan, &m, &u).unwrap();
        let err = dense.sub(&fast).unwrap().sup_norm();
        assert!(err < 1e-10, "fast path mismatch {err}");

        let grid2 = Grid::new(2, 6.0, 16).unwrap();
        let plan2 = PdoPlan::new(&grid2);
        let u2 = bump(&grid2, &[0.0, 0.0], 2.0).unwrap();
        let m2 = symbols::bracket_power(2, -1.0).unwrap();
        let dense2 = apply(&plan2, &m2, &u2).unwrap();
        let fast2 = apply_multiplier(&plan2, &m2, &u2).unwrap();
        assert!(dense2.sub(&fast2).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn dense_apply_matches_naive_oracle() {
        let grid = Grid::new(1, 10.0, 64).unwrap();
        let plan = PdoPlan::new(&grid);
        let u = bump(&grid, &[0.5], 2.5).unwrap();
        let a = symbols::product(
            &symbols::so_log_sine(1).unwrap(),
            &symbols::bracket_power(1, -1.0).unwrap(),
        )
        .unwrap();
        let got = apply(&plan, &a, &u).unwrap();
        let want = oracle::naive_pdo_apply(&|x, xi| a.evaluate(x, xi), &u);
        let err = got.sub(&want).unwrap().sup_norm();
        assert!(err < 1e-10, "oracle mismatch {err}");
    }

    #[test]
    fn apply_is_linear() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = bump(&grid, &[0.0], 3.0).unwrap();
        let v = bump(&grid, &[-1.0], 2.0).unwrap();
        let a = symbols::bracket_elliptic(1).unwrap();
        let alpha = Complex64::new(2.0, -1.0);
        let beta = Complex64::new(0.0, 0.5);
        let lhs = apply(&plan, &a, &u.scale(alpha).add(&v.scale(beta)).unwrap()).unwrap();
        let rhs = apply(&plan, &a, &u)
            .unwrap()
            .scale(alpha)
            .add(&apply(&plan, &a, &v).unwrap().scale(beta))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn x_only_symbol_acts_by_pointwise_multiplication() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = test_input(&grid);
        let v = symbols::x_bump(1, 4.0).unwrap();
        let out = apply(&plan, &v, &u).unwrap();
        let direct = SampledFunction::from_fn(grid, |x| v.evaluate(x, &[0.0]))
            .binary(&u, |a, b| a * b)
            .unwrap();
        let err = out.sub(&direct).unwrap().sup_norm();
        assert!(err < 1e-12, "multiplication residual {err}");
    }

    #[test]
    fn separable_symbol_factorizes() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = test_input(&grid);
        let v = symbols::x_bump(1, 4.0).unwrap();
        let m = symbols::bracket_power(1, -1.0).unwrap();
        let sep = symbols::product(&v, &m).unwrap();
        let lhs = apply(&plan, &sep, &u).unwrap();
        let rhs = SampledFunction::from_fn(grid, |x| v.evaluate(x, &[0.0]))
            .binary(&apply_multiplier(&plan, &m, &u).unwrap(), |a, b| a * b)
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn support_guard_rejects_boundary_mass() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = bump(&grid, &[9.0], 0.8).unwrap();
        match apply(&plan, &symbols::one(1).unwrap(), &u) {
            Err(Error::SupportGuard { radius, .. }) => {
                assert!((radius - 8.0).abs() < 1e-12);
            }
            other => panic!("expected SupportGuard, got {other:?}"),
        }
    }

    #[test]
    fn composition_residual_vanishes_when_x_factor_is_applied_last() {
        // a1 = v(x), a2 = m(xi): Op(v) Op(m) u and Op(v m) u coincide
        // because the x factor leaves the frequency sum untouched.
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = bump(&grid, &[0.0], 3.0).unwrap();
        let v = symbols::x_bump(1, 4.0).unwrap();
        let m = symbols::bracket_power(1, -1.0).unwrap();
        let r = composition_residual(&plan, &v, &m, &u).unwrap();
        assert!(r.sup_norm() < 1e-12, "residual {}", r.sup_norm());
    }

    #[test]
    fn composition_residual_is_the_commutator_in_the_other_order() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let u = bump(&grid, &[0.0], 3.0).unwrap();
        let v = symbols::x_bump(1, 4.0).unwrap();
        let m = symbols::bracket_power(1, -1.0).unwrap();
        let r = composition_residual(&plan, &m, &v, &u).unwrap();
        // independent route: m(D)(v u) - v (m(D) u)
        let vu = SampledFunction::from_fn(grid, |x| v.evaluate(x, &[0.0]))
            .binary(&u, |a, b| a * b)
            .unwrap();
        let lhs = apply_multiplier(&plan, &m, &vu).unwrap();
        let rhs = SampledFunction::from_fn(grid, |x| v.evaluate(x, &[0.0]))
            .binary(&apply_multiplier(&plan, &m, &u).unwrap(), |a, b| a * b)
            .unwrap();
        let want = lhs.sub(&rhs).unwrap();
        let err = r.sub(&want).unwrap().sup_norm();
        assert!(err < 1e-11, "commutator mismatch {err}");
        assert!(r.sup_norm() > 1e-4, "commutator should not vanish");
    }

    #[test]
    fn multiplier_commutes_with_lattice_translation() {
        let grid = test_grid();
        let plan = PdoPlan::new(&grid);
        let n = grid.node_count();
        let u = bump(&grid, &[0.0], 2.0).unwrap();
        let m = symbols::bracket_power(1, -1.0).unwrap();
        let moved = crate::grid::transform_function(
            &u,
            &crate::grid::Transform::Translate(vec![5.0 * grid.spacing()]),
        )
        .unwrap();
        let out = apply_multiplier(&plan, &m, &u).unwrap();
        let out_moved = apply_multiplier(&plan, &m, &moved).unwrap();
        // the discrete model is circulant, so the outputs differ by the
        // same index shift (mod N), node for node
        let mut worst = 0.0_f64;
        for j in 0..n {
            let d = (out_moved.values()[j] - out.values()[(j + n - 5) % n]).norm();
            worst = worst.max(d);
        }
        assert!(worst < 1e-11, "shift equivariance residual {worst}");
    }
}

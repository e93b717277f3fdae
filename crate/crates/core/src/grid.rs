//! Uniform discretization of the truncated cube `[-L, L]^n` and generators
//! for smooth compactly supported test functions.
//!
//! Nodes are `-L + k h` with `h = 2L/N` and `k = 0..N` per axis (the right
//! endpoint `+L` is identified with `-L` for DFT purposes). The frequency
//! lattice is `pi k / L` for `k in [-N/2, N/2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative magnitude below which a sample counts as zero for support checks.
pub(crate) const SUPPORT_TOL: f64 = 1e-12;

/// Uniform periodic grid on `[-L, L]^n`, `n` in {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::BadHalfWidth(half_width));
        }
        if !points_per_axis.is_multiple_of(2) || points_per_axis < 8 {
            return Err(Error::BadPointCount(points_per_axis));
        }
        Ok(Grid {
            dim,
            half_width,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Node spacing `h = 2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Frequency spacing `pi/L` of the DFT lattice.
    pub fn freq_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Nyquist frequency `pi/h`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Total number of nodes, `N^dim`.
    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Cell volume `h^dim`, the Riemann quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spatial nodes along one axis, `-L + k h`.
    pub fn axis_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points_per_axis)
            .map(|k| -self.half_width + k as f64 * h)
            .collect()
    }

    /// Frequency nodes along one axis in increasing order, `pi k / L` for
    /// `k = -N/2 .. N/2 - 1`.
    pub fn freq_axis_nodes(&self) -> Vec<f64> {
        let dxi = self.freq_spacing();
        let half = self.points_per_axis as i64 / 2;
        (-half..half).map(|k| k as f64 * dxi).collect()
    }

    /// Per-axis indices of a flat node index (row-major).
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.points_per_axis, idx % self.points_per_axis],
        }
    }

    pub fn flat_index(&self, axes: [usize; 2]) -> usize {
        match self.dim {
            1 => axes[0],
            _ => axes[0] * self.points_per_axis + axes[1],
        }
    }

    /// Coordinates of a node; the unused component is zero in 1D.
    pub fn node(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let ax = self.axis_indices(idx);
        let mut out = [0.0; 2];
        for d in 0..self.dim {
            out[d] = -self.half_width + ax[d] as f64 * h;
        }
        out
    }

    /// Coordinates of a frequency-lattice point (same flat indexing as nodes).
    pub fn freq(&self, idx: usize) -> [f64; 2] {
        let dxi = self.freq_spacing();
        let half = self.points_per_axis as i64 / 2;
        let ax = self.axis_indices(idx);
        let mut out = [0.0; 2];
        for d in 0..self.dim {
            out[d] = (ax[d] as i64 - half) as f64 * dxi;
        }
        out
    }

    /// Euclidean norm restricted to the active dimensions.
    pub fn norm2(&self, p: &[f64; 2]) -> f64 {
        match self.dim {
            1 => p[0].abs(),
            _ => p[0].hypot(p[1]),
        }
    }

    /// Max norm restricted to the active dimensions.
    pub fn norm_inf(&self, p: &[f64; 2]) -> f64 {
        match self.dim {
            1 => p[0].abs(),
            _ => p[0].abs().max(p[1].abs()),
        }
    }
}

/// Complex samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        if let Some((node, _)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.re.is_finite() || !v.im.is_finite())
        {
            let _ = node;
            return Err(Error::NonFinite {
                context: "sampled function values",
            });
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction {
            values: vec![Complex64::new(0.0, 0.0); grid.node_count()],
            grid,
        }
    }

    /// Sample a closure on every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let p = grid.node(i);
                f(&p[..grid.dim()])
            })
            .collect();
        SampledFunction { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn binary(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(SampledFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binary(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise moduli as a real vector.
    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid-weighted `L^2` norm, `(h^n sum |f|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let terms: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        (self.grid.cell_volume() * crate::par::pairwise_sum(&terms)).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm() == 0.0)
    }

    /// Max-norm radius of the numerical support (nodes with
    /// `|f| > SUPPORT_TOL * sup|f|`). Zero for the zero function.
    pub fn support_radius(&self) -> f64 {
        let sup = self.sup_norm();
        if sup == 0.0 {
            return 0.0;
        }
        let mut r = 0.0_f64;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm() > SUPPORT_TOL * sup {
                r = r.max(self.grid.norm_inf(&self.grid.node(i)));
            }
        }
        r
    }
}

/// Multi-index `alpha = (alpha_1, ..., alpha_n)` with order `|alpha|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    comps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(comps: Vec<u32>) -> Self {
        MultiIndex { comps }
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex {
            comps: vec![0; dim],
        }
    }

    /// Unit index along one axis.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut comps = vec![0; dim];
        comps[axis] = 1;
        MultiIndex { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, axis: usize) -> u32 {
        self.comps[axis]
    }

    pub fn comps(&self) -> &[u32] {
        &self.comps
    }

    pub fn order(&self) -> u32 {
        self.comps.iter().sum()
    }

    /// First axis with a nonzero component.
    pub fn leading_axis(&self) -> Option<usize> {
        self.comps.iter().position(|&c| c > 0)
    }

    /// Decrease the component on `axis` by one.
    pub fn decremented(&self, axis: usize) -> Option<Self> {
        if self.comps[axis] == 0 {
            return None;
        }
        let mut comps = self.comps.clone();
        comps[axis] -= 1;
        Some(MultiIndex { comps })
    }

    /// All multi-indices `b <= self` componentwise, in lexicographic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for (axis, &c) in self.comps.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for base in &out {
                for v in 0..=c {
                    let mut comps = base.comps.clone();
                    comps[axis] = v;
                    next.push(MultiIndex { comps });
                }
            }
            out = next;
        }
        out
    }

    /// Product of per-component binomial coefficients `C(self_i, sub_i)`.
    pub fn binomial_with(&self, sub: &MultiIndex) -> f64 {
        fn binom(n: u32, k: u32) -> f64 {
            let mut acc = 1.0;
            for i in 0..k {
                acc *= (n - i) as f64 / (i + 1) as f64;
            }
            acc
        }
        self.comps
            .iter()
            .zip(&sub.comps)
            .map(|(&a, &b)| binom(a, b))
            .product()
    }
}

///// Peak-normalized standard mollifier ramp profile: `exp(1 - 1/(1 - t^2))`
/// for `|t| < 1`, zero otherwise. Value 1 at `t = 0`.
pub(crate) fn mollifier(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Smooth bump centered at `center` with support ball of radius `width`.
pub fn bump(grid: &Grid, center: &[f64], width: f64) -> Result<SampledFunction> {
    if width.is_nan() || width <= 0.0 {
        return Err(Error::NonPositive {
            what: "bump width",
            value: width,
        });
    }
    let dim = grid.dim();
    Ok(SampledFunction::from_real_fn(*grid, |x| {
        let mut d2 = 0.0;
        for (k, &xk) in x[..dim].iter().enumerate() {
            let delta = xk - center.get(k).copied().unwrap_or(0.0);
            d2 += delta * delta;
        }
        mollifier(d2.sqrt() / width)
    }))
}

/// Test-family transforms.
#[derive(Debug, Clone)]
pub enum Transform {
    /// `f(x - tau)`; `tau` must be a lattice vector.
    Translate(Vec<f64>),
    /// `e^{i <omega, x>} f(x)`.
    Modulate(Vec<f64>),
    /// `f(x / lambda)`; linear interpolation where `x/lambda` is off-lattice.
    Dilate(f64),
}

pub fn transform_function(f: &SampledFunction, transform: &Transform) -> Result<SampledFunction> {
    let grid = *f.grid();
    let n = grid.points_per_axis();
    let h = grid.spacing();
    match transform {
        Transform::Translate(tau) => {
            let mut shifts = [0i64; 2];
            for (d, shift) in shifts.iter_mut().take(grid.dim()).enumerate() {
                let t = tau.get(d).copied().unwrap_or(0.0);
                let steps = t / h;
                if (steps - steps.round()).abs() > 1e-9 {
                    return Err(Error::OffLatticeTranslation {
                        requested: t,
                        spacing: h,
                    });
                }
                *shift = steps.round() as i64;
            }
            let escape = SUPPORT_TOL * f.sup_norm();
            let mut values = vec![Complex64::new(0.0, 0.0); grid.node_count()];
            for (i, &v) in f.values().iter().enumerate() {
                let ax = grid.axis_indices(i);
                let mut target = [0i64; 2];
                let mut inside = true;
                for d in 0..grid.dim() {
                    target[d] = ax[d] as i64 + shifts[d];
                    inside &= (0..n as i64).contains(&target[d]);
                }
                if inside {
                    values[grid.flat_index([target[0] as usize, target[1] as usize])] = v;
                } else if v.norm() > escape {
                    return Err(Error::SupportEscape {
                        node: i,
                        magnitude: v.norm(),
                    });
                }
            }
            SampledFunction::new(grid, values)
        }
        Transform::Modulate(omega) => {
            let dim = grid.dim();
            Ok(SampledFunction::from_fn(grid, |x| {
                let mut phase = 0.0;
                for (d, &xd) in x[..dim].iter().enumerate() {
                    phase += omega.get(d).copied().unwrap_or(0.0) * xd;
                }
                Complex64::from_polar(1.0, phase)
            })
            .binary(f, |ph, v| ph * v)?)
        }
        Transform::Dilate(lambda) => {
            let lambda = *lambda;
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::BadDilation(lambda));
            }
            if lambda > 1.0 {
                let limit = grid.half_width() / lambda + 1e-9;
                if f.support_radius() > limit {
                    return Err(Error::SupportEscape {
                        node: 0,
                        magnitude: f.sup_norm(),
                    });
                }
            }
            let half = n as i64 / 2;
            // 1D interpolation along each axis offset; separable for dim 2
            // because dilation scales every coordinate by the same factor.
            let sample_axis = |j: usize| -> (usize, usize, f64) {
                let s = (j as i64 - half) as f64 / lambda;
                let q = s + half as f64;
                let lo = q.floor().clamp(0.0, (n - 1) as f64);
                let w = (q - lo).clamp(0.0, 1.0);
                let lo = lo as usize;
                let hi = (lo + 1).min(n - 1);
                (lo, hi, w)
            };
            let values = (0..grid.node_count())
                .map(|i| {
                    let ax = grid.axis_indices(i);
                    match grid.dim() {
                        1 => {
                            let (lo, hi, w) = sample_axis(ax[0]);
                            f.values()[lo] * (1.0 - w) + f.values()[hi] * w
                        }
                        _ => {
                            let (l0, h0, w0) = sample_axis(ax[0]);
                            let (l1, h1, w1) = sample_axis(ax[1]);
                            let at = |a: usize, b: usize| f.values()[grid.flat_index([a, b])];
                            (at(l0, l1) * (1.0 - w1) + at(l0, h1) * w1) * (1.0 - w0)
                                + (at(h0, l1) * (1.0 - w1) + at(h0, h1) * w1) * w0
                        }
                    }
                })
                .collect();
            SampledFunction::new(grid, values)
        }
    }
}

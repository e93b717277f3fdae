//! Discrete maximal operators over grid-aligned cubes: the Hardy-Littlewood
//! operator `M`, the power variant `M_q = M(|f|^q)^{1/q}`, cube averages, and
//! the sharp (mean-oscillation) operator `M#`, all driven by summed-area
//! prefix tables.
//!
//! The cube family fixes the supremum set: for each half-width index
//! `k = 0..=k_max` every grid-aligned placement of a `(2k+1)`-node window
//! containing the query node is admitted, and windows crossing the boundary
//! are clipped to the domain (no reflection or extension).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{Grid, SampledFunction};
use crate::modular;
use crate::oracle::IndexBox;
use crate::par;

/// The admissible cube windows: half-width indices `0..=k_max`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CubeFamily {
    pub k_max: usize,
}

impl CubeFamily {
    /// Windows up to the full domain (`k_max = N/2`).
    pub fn default_for(grid: &Grid) -> Self {
        CubeFamily {
            k_max: grid.points_per_axis() / 2,
        }
    }
}

/// Summed-area table over real node values; box sums in O(1).
struct RealPrefix {
    grid: Grid,
    data: Vec<f64>,
}

impl RealPrefix {
    fn new(grid: Grid, values: &[f64]) -> Self {
        let n = grid.points_per_axis();
        match grid.dim() {
            1 => {
                let mut data = vec![0.0; n + 1];
                for i in 0..n {
                    data[i + 1] = data[i] + values[i];
                }
                RealPrefix { grid, data }
            }
            _ => {
                let m = n + 1;
                let mut data = vec![0.0; m * m];
                for i in 0..n {
                    for j in 0..n {
                        data[(i + 1) * m + (j + 1)] =
                            values[i * n + j] + data[i * m + (j + 1)] + data[(i + 1) * m + j]
                                - data[i * m + j];
                    }
                }
                RealPrefix { grid, data }
            }
        }
    }

    fn box_sum(&self, b: &IndexBox) -> f64 {
        match self.grid.dim() {
            1 => self.data[b.hi[0] + 1] - self.data[b.lo[0]],
            _ => {
                let m = self.grid.points_per_axis() + 1;
                let (l0, l1, h0, h1) = (b.lo[0], b.lo[1], b.hi[0] + 1, b.hi[1] + 1);
                self.data[h0 * m + h1] - self.data[l0 * m + h1] - self.data[h0 * m + l1]
                    + self.data[l0 * m + l1]
            }
        }
    }
}

/// Complex counterpart used for cube means of `f` itself.
struct ComplexPrefix {
    re: RealPrefix,
    im: RealPrefix,
}

impl ComplexPrefix {
    fn new(grid: Grid, values: &[Complex64]) -> Self {
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        ComplexPrefix {
            re: RealPrefix::new(grid, &re),
            im: RealPrefix::new(grid, &im),
        }
    }

    fn box_mean(&self, b: &IndexBox, count: usize) -> Complex64 {
        Complex64::new(self.re.box_sum(b), self.im.box_sum(b)) / count as f64
    }
}

fn validate_box(grid: &Grid, cube: &IndexBox) -> Result<()> {
    let n = grid.points_per_axis();
    for d in 0..grid.dim() {
        if cube.lo[d] > cube.hi[d] || cube.hi[d] >= n {
            return Err(Error::CubeOutOfDomain {
                lo: cube.lo[..grid.dim()].to_vec(),
                hi: cube.hi[..grid.dim()].to_vec(),
            });
        }
    }
    Ok(())
}

/// Mean of `f` over an in-domain index box, via a summed-area table.
pub fn cube_average(f: &SampledFunction, cube: &IndexBox) -> Result<Complex64> {
    let grid = *f.grid();
    validate_box(&grid, cube)?;
    let pre = ComplexPrefix::new(grid, f.values());
    Ok(pre.box_mean(cube, cube.node_count(grid.dim())))
}

/// Clip the window with anchor `a` (per-axis, possibly negative) and
/// half-width index `k` to the domain.
fn clipped(a: [i64; 2], k: usize, grid: &Grid) -> IndexBox {
    let n = grid.points_per_axis() as i64;
    let w = 2 * k as i64;
    let mut lo = [0usize; 2];
    let mut hi = [0usize; 2];
    for d in 0..grid.dim() {
        lo[d] = a[d].max(0) as usize;
        hi[d] = (a[d] + w).min(n - 1) as usize;
    }
    IndexBox { lo, hi }
}

fn hl_values(grid: &Grid, abs: &[f64], family: &CubeFamily) -> Vec<f64> {
    let pre = RealPrefix::new(*grid, abs);
    let dim = grid.dim();
    par::map_indexed(grid.node_count(), |i| {
        let c = grid.axis_indices(i);
        let mut best = 0.0_f64;
        for k in 0..=family.k_max {
            let w = 2 * k as i64;
            let c0 = c[0] as i64;
            match dim {
                1 => {
                    for a0 in (c0 - w)..=c0 {
                        let b = clipped([a0, 0], k, grid);
                        let cnt = b.node_count(1);
                        best = best.max(pre.box_sum(&b) / cnt as f64);
                    }
                }
                _ => {
                    let c1 = c[1] as i64;
                    for a0 in (c0 - w)..=c0 {
                        for a1 in (c1 - w)..=c1 {
                            let b = clipped([a0, a1], k, grid);
                            let cnt = b.node_count(2);
                            best = best.max(pre.box_sum(&b) / cnt as f64);
                        }
                    }
                }
            }
        }
        best
    })
}

fn real_samples(grid: Grid, values: Vec<f64>) -> SampledFunction {
    SampledFunction::new(
        grid,
        values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
    .expect("maximal values are finite")
}

/// Hardy-Littlewood maximal function over the default cube family.
pub fn hl_maximal(f: &SampledFunction) -> SampledFunction {
    hl_maximal_with(f, &CubeFamily::default_for(f.grid()))
}

pub fn hl_maximal_with(f: &SampledFunction, family: &CubeFamily) -> SampledFunction {
    let grid = *f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    real_samples(grid, hl_values(&grid, &abs, family))
}

/// Power maximal `M_q f = (M(|f|^q))^{1/q}`, `q >= 1`.
pub fn q_maximal(f: &SampledFunction, q: f64) -> Result<SampledFunction> {
    q_maximal_with(f, q, &CubeFamily::default_for(f.grid()))
}

pub fn q_maximal_with(f: &SampledFunction, q: f64, family: &CubeFamily) -> Result<SampledFunction> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::NonPositive {
            what: "q - 1",
            value: q - 1.0,
        });
    }
    let grid = *f.grid();
    let powers: Vec<f64> = f.values().iter().map(|v| v.norm().powf(q)).collect();
    let maximal = hl_values(&grid, &powers, family);
    Ok(real_samples(
        grid,
        maximal.into_iter().map(|v| v.powf(1.0 / q)).collect(),
    ))
}

/// Sharp maximal function: per node, the largest mean oscillation
/// `mean_Q |f - f_Q|` over admissible cubes containing it.
///
/// Runs in two phases: the oscillation of every distinct window placement is
/// tabulated once (cube means from the summed-area table, one direct pass
/// per window for the oscillation), then each node takes the maximum over
/// its covering placements.
pub fn sharp_maximal(f: &SampledFunction) -> SampledFunction {
    sharp_maximal_with(f, &CubeFamily::default_for(f.grid()))
}

pub fn sharp_maximal_with(f: &SampledFunction, family: &CubeFamily) -> SampledFunction {
    let grid = *f.grid();
    let n = grid.points_per_axis() as i64;
    let dim = grid.dim();
    let pre = ComplexPrefix::new(grid, f.values());

    // Anchor layout per k: per axis, anchors a in [-2k, n-1], stored at
    // shifted index a + 2k in a row of length n + 2k.
    let rows: Vec<i64> = (0..=family.k_max).map(|k| n + 2 * k as i64).collect();
    let offsets: Vec<usize> = {
        let mut acc = 0usize;
        let mut out = Vec::with_capacity(rows.len() + 1);
        for r in &rows {
            out.push(acc);
            acc += (*r as usize).pow(dim as u32);
        }
        out.push(acc);
        out
    };
    let total = *offsets.last().expect("offsets nonempty");

    let osc: Vec<f64> = par::map_indexed(total, |flat| {
        // Decode (k, anchor) from the flat placement index.
        let k = match offsets.binary_search(&flat) {
            Ok(pos) => pos,
            Err(pos) => pos - 1,
        };
        let local = flat - offsets[k];
        let row = rows[k] as usize;
        let shift = 2 * k as i64;
        let a = match dim {
            1 => [local as i64 - shift, 0],
            _ => [(local / row) as i64 - shift, (local % row) as i64 - shift],
        };
        let b = clipped(a, k, &grid);
        let cnt = b.node_count(dim);
        let mean = pre.box_mean(&b, cnt);
        let mut acc = 0.0;
        match dim {
            1 => {
                for i in b.lo[0]..=b.hi[0] {
                    acc += (f.values()[i] - mean).norm();
                }
            }
            _ => {
                for i in b.lo[0]..=b.hi[0] {
                    for j in b.lo[1]..=b.hi[1] {
                        acc += (f.values()[grid.flat_index([i, j])] - mean).norm();
                    }
                }
            }
        }
        acc / cnt as f64
    });

    let values = par::map_indexed(grid.node_count(), |i| {
        let c = grid.axis_indices(i);
        let mut best = 0.0_f64;
        for k in 0..=family.k_max {
            let shift = 2 * k as i64;
            let row = rows[k] as usize;
            let c0 = c[0] as i64;
            match dim {
                1 => {
                    for a0 in (c0 - shift)..=c0 {
                        best = best.max(osc[offsets[k] + (a0 + shift) as usize]);
                    }
                }
                _ => {
                    let c1 = c[1] as i64;
                    for a0 in (c0 - shift)..=c0 {
                        let base = offsets[k] + (a0 + shift) as usize * row;
                        for a1 in (c1 - shift)..=c1 {
                            best = best.max(osc[base + (a1 + shift) as usize]);
                        }
                    }
                }
            }
        }
        best
    });
    real_samples(grid, values)
}

/// Ratio statistics emitted by the boundedness probes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioStats {
    /// One ratio per retained family member, in input order.
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    /// Members skipped (zero functions), with their indices.
    pub skipped: Vec<usize>,
}

fn ratio_stats(ratios: Vec<f64>, skipped: Vec<usize>) -> RatioStats {
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let max = sorted.last().copied().unwrap_or(0.0);
    let median = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    RatioStats {
        ratios,
        max,
        median,
        skipped,
    }
}

/// Empirical operator-norm probe for `M_q` on the space defined by `p`:
/// records `||M_q f||_p / ||f||_p` over the family. Zero members are
/// skipped and noted; no pass/fail verdict is attached.
pub fn probe_maximal_boundedness(
    p: &Exponent,
    family: &[SampledFunction],
    q: f64,
) -> Result<RatioStats> {
    let mut ratios = Vec::new();
    let mut skipped = Vec::new();
    for (i, f) in family.iter().enumerate() {
        if f.is_zero() {
            skipped.push(i);
            continue;
        }
        let mf = q_maximal(f, q)?;
        let num = modular::norm_value(&mf, p)?;
        let den = modular::norm_value(f, p)?;
        ratios.push(num / den);
    }
    Ok(ratio_stats(ratios, skipped))
}

/// Empirical constant for the sharp-maximal lower bound
/// `||f||_p <= C ||M# f||_p`: the max of `||f||_p / ||M# f||_p` over the
/// family. Constant members (vanishing `M# f`) are rejected.
pub fn probe_sharp_inequality(p: &Exponent, family: &[SampledFunction]) -> Result<RatioStats> {
    let mut ratios = Vec::new();
    for f in family {
        let sharp = sharp_maximal(f);
        if sharp.sup_norm() == 0.0 {
            return Err(Error::ConstantFunction);
        }
        let num = modular::norm_value(f, p)?;
        let den = modular::norm_value(&sharp, p)?;
        ratios.push(num / den);
    }
    Ok(ratio_stats(ratios, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::bump;
    use crate::oracle;
    use approx::assert_relative_eq;

    #[test]
    fn cube_average_examples() {
        let g = Grid::new(1, 1.0, 16).unwrap();
        let c = SampledFunction::from_real_fn(g, |_| 2.5);
        let b = IndexBox {
            lo: [3, 0],
            hi: [9, 0],
        };
        assert_relative_eq!(cube_average(&c, &b).unwrap().re, 2.5, epsilon = 1e-14);

        let lin = SampledFunction::from_real_fn(g, |x| x[0]);
        let whole = IndexBox {
            lo: [0, 0],
            hi: [15, 0],
        };
        // left-endpoint nodes average to -h/2
        assert_relative_eq!(
            cube_average(&lin, &whole).unwrap().re,
            -g.spacing() / 2.0,
            epsilon = 1e-14
        );

        let bad = IndexBox {
            lo: [3, 0],
            hi: [16, 0],
        };
        assert!(matches!(
            cube_average(&c, &bad),
            Err(Error::CubeOutOfDomain { .. })
        ));
    }

    #[test]
    fn cube_average_matches_naive_on_random_boxes() {
        for (dim, n) in [(1usize, 64usize), (2, 16)] {
            let g = Grid::new(dim, 5.0, n).unwrap();
            let f = oracle::random_function(g, 31);
            for seed in 0..20u64 {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(900 + seed);
                let mut lo = [0usize; 2];
                let mut hi = [0usize; 2];
                for d in 0..dim {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    lo[d] = a.min(b);
                    hi[d] = a.max(b);
                }
                let b = IndexBox { lo, hi };
                let fast = cube_average(&f, &b).unwrap();
                let slow = oracle::naive_box_average(&f, &b);
                assert!((fast - slow).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn maximal_of_constant_is_constant() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let c = SampledFunction::from_real_fn(g, |_| 3.0);
        let m = hl_maximal(&c);
        for v in m.values() {
            assert_relative_eq!(v.re, 3.0, epsilon = 1e-12);
        }
        for q in [1.0, 2.0, 3.5] {
            let mq = q_maximal(&c, q).unwrap();
            for v in mq.values() {
                assert_relative_eq!(v.re, 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn indicator_tail_decays_like_one_over_x() {
        // chi_[0,1] on L = 10, N = 64 (h = 0.3125). At the nodes nearest
        // x in {2, 4, 8} the best windows give exactly 4/7, 4/15, 4/27.
        let g = Grid::new(1, 10.0, 64).unwrap();
        let chi = SampledFunction::from_real_fn(g, |x| {
            if (0.0..=1.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        });
        let m = hl_maximal(&chi);
        let h = g.spacing();
        for (target, want) in [(2.0, 4.0 / 7.0), (4.0, 4.0 / 15.0), (8.0, 4.0 / 27.0)] {
            let idx = g
                .axis_nodes()
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - target)
                        .abs()
                        .partial_cmp(&(*b - target).abs())
                        .unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let x = g.axis_nodes()[idx];
            assert_relative_eq!(m.values()[idx].re, want, epsilon = 1e-12);
            assert!(
                (m.values()[idx].re - 1.0 / x).abs() <= 2.0 * h / x,
                "tail off target at x = {x}"
            );
        }
    }

    #[test]
    fn prefix_equals_exhaustive_search() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let fam = CubeFamily::default_for(&g);
        for seed in 0..3u64 {
            let f = oracle::random_function(g, seed);
            let fast = hl_maximal(&f);
            let slow = oracle::exhaustive_hl_maximal(&f, fam.k_max);
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a.re - b).abs() < 1e-12);
            }
            let fast_sharp = sharp_maximal(&f);
            let slow_sharp = oracle::exhaustive_sharp_maximal(&f, fam.k_max);
            for (a, b) in fast_sharp.values().iter().zip(&slow_sharp) {
                assert!((a.re - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prefix_equals_exhaustive_search_2d() {
        let g = Grid::new(2, 5.0, 12).unwrap();
        let fam = CubeFamily::default_for(&g);
        let f = oracle::random_function(g, 5);
        let fast = hl_maximal(&f);
        let slow = oracle::exhaustive_hl_maximal(&f, fam.k_max);
        for (a, b) in fast.values().iter().zip(&slow) {
            assert!((a.re - b).abs() < 1e-12);
        }
        let fast_sharp = sharp_maximal(&f);
        let slow_sharp = oracle::exhaustive_sharp_maximal(&f, fam.k_max);
        for (a, b) in fast_sharp.values().iter().zip(&slow_sharp) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }

    #[test]
    fn maximal_dominates_and_scales() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let f = oracle::random_function(g, 9);
        let m = hl_maximal(&f);
        for (mv, fv) in m.values().iter().zip(f.values()) {
            assert!(mv.re >= fv.norm() - 1e-13);
        }
        let scaled = f.scale(Complex64::new(-2.5, 0.0));
        let ms = hl_maximal(&scaled);
        for (a, b) in ms.values().iter().zip(m.values()) {
            assert_relative_eq!(a.re, 2.5 * b.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_maximal_monotone_in_q() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let f = oracle::random_function(g, 17);
        let m1 = q_maximal(&f, 1.0).unwrap();
        let m2 = q_maximal(&f, 2.0).unwrap();
        let hl = hl_maximal(&f);
        for ((a, b), c) in m1.values().iter().zip(m2.values()).zip(hl.values()) {
            assert!(b.re >= a.re - 1e-12, "power-mean monotonicity");
            assert_relative_eq!(a.re, c.re, epsilon = 1e-12);
        }
        assert!(q_maximal(&f, 0.5).is_err());
    }

    #[test]
    fn sharp_maximal_laws() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let c = SampledFunction::from_real_fn(g, |_| 7.0);
        assert_eq!(sharp_maximal(&c).sup_norm(), 0.0);

        let f = oracle::random_function(g, 23);
        let sharp = sharp_maximal(&f);
        let m = hl_maximal(&f);
        for (s, mm) in sharp.values().iter().zip(m.values()) {
            assert!(s.re <= 2.0 * mm.re + 1e-12);
        }
        let shifted = f.map(|v| v + Complex64::new(4.0, -1.0));
        let sharp2 = sharp_maximal(&shifted);
        for (a, b) in sharp2.values().iter().zip(sharp.values()) {
            assert!((a.re - b.re).abs() <= 1e-12);
        }
    }

    #[test]
    fn step_oscillation_near_half() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let step = SampledFunction::from_real_fn(g, |x| if x[0] > 0.0 { 1.0 } else { 0.0 });
        let sharp = sharp_maximal(&step);
        let at_zero = sharp.values()[32].re;
        assert!(
            at_zero >= 0.45,
            "balanced window oscillation, got {at_zero}"
        );
        assert!(at_zero <= 0.5 + 1e-12);
    }

    #[test]
    fn sublinearity() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let f = oracle::random_function(g, 41);
        let h = oracle::random_function(g, 43);
        let sum = f.add(&h).unwrap();
        let mf = hl_maximal(&f);
        let mh = hl_maximal(&h);
        let msum = hl_maximal(&sum);
        for ((a, b), s) in mf.values().iter().zip(mh.values()).zip(msum.values()) {
            assert!(s.re <= a.re + b.re + 1e-12);
        }
    }

    #[test]
    fn boundedness_probe_on_bumps() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let p = Exponent::constant(g, 2.0).unwrap();
        let family: Vec<SampledFunction> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&w| bump(&g, &[0.0], w).unwrap())
            .chain(std::iter::once(SampledFunction::zeros(g)))
            .collect();
        let stats = probe_maximal_boundedness(&p, &family, 1.0).unwrap();
        assert_eq!(stats.ratios.len(), 3);
        assert_eq!(stats.skipped, vec![3]);
        assert!(stats.max.is_finite() && stats.max >= 1.0 - 1e-9);
        // dilate family: ratios stable within a factor 4
        let lo = stats.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(stats.max / lo < 4.0);
    }

    #[test]
    fn sharp_probe_rejects_constants() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let p = Exponent::constant(g, 2.0).unwrap();
        let c = SampledFunction::from_real_fn(g, |_| 1.0);
        assert!(matches!(
            probe_sharp_inequality(&p, &[c]),
            Err(Error::ConstantFunction)
        ));
        let family: Vec<SampledFunction> = [-4.0, 0.0, 4.0]
            .iter()
            .map(|&c0| bump(&g, &[c0], 1.5).unwrap())
            .collect();
        let stats = probe_sharp_inequality(&p, &family).unwrap();
        assert!(stats.max.is_finite() && stats.max > 0.0);
        // scaling every member leaves the ratio set unchanged
        let doubled: Vec<SampledFunction> = family
            .iter()
            .map(|f| f.scale(Complex64::new(2.0, 0.0)))
            .collect();
        let stats2 = probe_sharp_inequality(&p, &doubled).unwrap();
        for (a, b) in stats.ratios.iter().zip(&stats2.ratios) {
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }
}

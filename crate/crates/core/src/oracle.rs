//! Independent reference implementations ("oracles") and seeded data
//! generators used by the test and acceptance suites.
//!
//! Everything here is written for transparency, not speed: direct loops and
//! naive summation only. The operational modules must agree with these
//! results to tight tolerances; sharing code with them would defeat the
//! point, so nothing in this file calls into `maximal` or `pdo`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, SampledFunction};

/// Complex samples with re/im independently uniform on [-1, 1].
pub fn random_function(grid: Grid, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.node_count())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SampledFunction::new(grid, values).expect("random samples are finite")
}

/// A pair `(f, g)` with `|f(x)| <= |g(x)|` at every node: `g` is random and
/// `f` shrinks it by a random per-node factor in [0, 1].
pub fn random_dominated_pair(grid: Grid, seed: u64) -> (SampledFunction, SampledFunction) {
    let g = random_function(grid, seed.wrapping_mul(2).wrapping_add(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(2));
    let f_values = g
        .values()
        .iter()
        .map(|&v| v * rng.gen_range(0.0..=1.0))
        .collect();
    let f = SampledFunction::new(grid, f_values).expect("scaled samples are finite");
    (f, g)
}

/// Closed-form discrete `L^q` norm `(h^n sum |f|^q)^{1/q}` by naive
/// accumulation.
pub fn lp_norm(f: &SampledFunction, q: f64) -> f64 {
    let mut acc = 0.0;
    for v in f.values() {
        acc += v.norm().powf(q);
    }
    (f.grid().cell_volume() * acc).powf(1.0 / q)
}

/// Inclusive index box `[lo, hi]` per axis (1D uses component 0 only).
#[derive(Debug, Clone, Copy)]
pub struct IndexBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl IndexBox {
    pub fn node_count(&self, dim: usize) -> usize {
        (0..dim).map(|d| self.hi[d] - self.lo[d] + 1).product()
    }
}

/// Mean of `f` over the box by direct summation.
pub fn naive_box_average(f: &SampledFunction, b: &IndexBox) -> Complex64 {
    let grid = f.grid();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    match grid.dim() {
        1 => {
            for i in b.lo[0]..=b.hi[0] {
                acc += f.values()[i];
                count += 1;
            }
        }
        _ => {
            for i in b.lo[0]..=b.hi[0] {
                for j in b.lo[1]..=b.hi[1] {
                    acc += f.values()[grid.flat_index([i, j])];
                    count += 1;
                }
            }
        }
    }
    acc / count as f64
}

/// Mean of `|f - mean(f)|` over the box by direct summation.
pub fn naive_box_oscillation(f: &SampledFunction, b: &IndexBox) -> f64 {
    let grid = f.grid();
    let mean = naive_box_average(f, b);
    let mut acc = 0.0;
    let mut count = 0usize;
    match grid.dim() {
        1 => {
            for i in b.lo[0]..=b.hi[0] {
                acc += (f.values()[i] - mean).norm();
                count += 1;
            }
        }
        _ => {
            for i in b.lo[0]..=b.hi[0] {
                for j in b.lo[1]..=b.hi[1] {
                    acc += (f.values()[grid.flat_index([i, j])] - mean).norm();
                    count += 1;
                }
            }
        }
    }
    acc / count as f64
}

/// Every clipped cube of half-width-index `k <= k_max` containing the node
/// with per-axis indices `center`: anchors run over all grid-aligned
/// positions, and cubes crossing the boundary are clipped to the domain.
pub fn boxes_containing(grid: &Grid, center: [usize; 2], k_max: usize) -> Vec<IndexBox> {
    let n = grid.points_per_axis() as i64;
    let dim = grid.dim();
    let mut out = Vec::new();
    for k in 0..=k_max {
        let w = 2 * k as i64;
        let axis_ranges: Vec<Vec<(usize, usize)>> = (0..dim)
            .map(|d| {
                let c = center[d] as i64;
                let mut ranges = Vec::new();
                for a in (c - w)..=c {
                    let lo = a.max(0);
                    let hi = (a + w).min(n - 1);
                    ranges.push((lo as usize, hi as usize));
                }
                ranges
            })
            .collect();
        match dim {
            1 => {
                for &(lo, hi) in &axis_ranges[0] {
                    out.push(IndexBox {
                        lo: [lo, 0],
                        hi: [hi, 0],
                    });
                }
            }
            _ => {
                for &(lo0, hi0) in &axis_ranges[0] {
                    for &(lo1, hi1) in &axis_ranges[1] {
                        out.push(IndexBox {
                            lo: [lo0, lo1],
                            hi: [hi0, hi1],
                        });
                    }
                }
            }
        }
    }
    out
}

/// Exhaustive-search Hardy-Littlewood maximal values (reference for the
/// prefix-sum implementation). `k_max` as in the cube family.
pub fn exhaustive_hl_maximal(f: &SampledFunction, k_max: usize) -> Vec<f64> {
    let grid = f.grid();
    let absf = SampledFunction::new(
        *grid,
        f.values()
            .iter()
            .map(|v| Complex64::new(v.norm(), 0.0))
            .collect(),
    )
    .expect("moduli are finite");
    (0..grid.node_count())
        .map(|i| {
            let center = grid.axis_indices(i);
            boxes_containing(grid, center, k_max)
                .iter()
                .map(|b| naive_box_average(&absf, b).re)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Exhaustive-search sharp maximal values (mean oscillation over cubes).
pub fn exhaustive_sharp_maximal(f: &SampledFunction, k_max: usize) -> Vec<f64> {
    let grid = f.grid();
    (0..grid.node_count())
        .map(|i| {
            let center = grid.axis_indices(i);
            boxes_containing(grid, center, k_max)
                .iter()
                .map(|b| naive_box_oscillation(f, b))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Direct quantization sum, no FFT and no phase tables: analysis
/// `\hat u(xi) = h^n sum_x u(x) e^{-i x xi}` on the frequency lattice, then
/// synthesis `out(x) = (2L)^{-n} sum_xi a(x, xi) \hat u(xi) e^{i x xi}`.
pub fn naive_pdo_apply(
    a: &dyn Fn(&[f64], &[f64]) -> Complex64,
    u: &SampledFunction,
) -> SampledFunction {
    let grid = *u.grid();
    let dim = grid.dim();
    let total = grid.node_count();
    let mut uhat = vec![Complex64::new(0.0, 0.0); total];
    for (k, slot) in uhat.iter_mut().enumerate() {
        let xi = grid.freq(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in u.values().iter().enumerate() {
            let x = grid.node(j);
            let dot: f64 = (0..dim).map(|d| x[d] * xi[d]).sum();
            acc += v * Complex64::from_polar(1.0, -dot);
        }
        *slot = grid.cell_volume() * acc;
    }
    let weight = (2.0 * grid.half_width()).powi(-(dim as i32));
    let values = (0..total)
        .map(|j| {
            let x = grid.node(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &vhat) in uhat.iter().enumerate() {
                let xi = grid.freq(k);
                let dot: f64 = (0..dim).map(|d| x[d] * xi[d]).sum();
                acc += a(&x[..dim], &xi[..dim]) * vhat * Complex64::from_polar(1.0, dot);
            }
            weight * acc
        })
        .collect();
    SampledFunction::new(grid, values).expect("finite synthesis")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_function_is_seed_deterministic() {
        let g = Grid::new(1, 10.0, 16).unwrap();
        let a = random_function(g, 42);
        let b = random_function(g, 42);
        assert_eq!(a.values(), b.values());
        let c = random_function(g, 43);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn dominated_pair_is_dominated() {
        let g = Grid::new(2, 5.0, 8).unwrap();
        for seed in 0..10 {
            let (f, gg) = random_dominated_pair(g, seed);
            for (a, b) in f.values().iter().zip(gg.values()) {
                assert!(a.norm() <= b.norm() + 1e-15);
            }
        }
    }

    #[test]
    fn box_enumeration_counts() {
        let g = Grid::new(1, 10.0, 8).unwrap();
        // k = 0 gives the single-node box; k = 1 gives 3 anchors
        let boxes = boxes_containing(&g, [4, 0], 1);
        assert_eq!(boxes.len(), 1 + 3);
        // single-node box is the node itself
        assert_eq!(boxes[0].lo[0], 4);
        assert_eq!(boxes[0].hi[0], 4);
    }

    #[test]
    fn naive_average_of_linear_function_is_midpoint() {
        let g = Grid::new(1, 1.0, 16).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| x[0]);
        let b = IndexBox {
            lo: [0, 0],
            hi: [15, 0],
        };
        // nodes -1, -0.875, ..., 0.875 average to -0.0625
        let avg = naive_box_average(&f, &b);
        assert!((avg.re - (-0.0625)).abs() < 1e-14);
    }
}

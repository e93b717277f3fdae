//! Numerical toolkit for variable Lebesgue spaces and pseudodifferential
//! operators on sampled grids.
//!
//! The crate discretizes the truncated cube `[-L, L]^n` (n = 1, 2), realizes
//! the Luxemburg norm of `L^{p(.)}`, the Hardy-Littlewood / sharp / q-maximal
//! operators, Hörmander and slowly-oscillating symbol-class estimators, and a
//! DFT quadrature for `Op(a)`. On top of those it runs the explicit
//! regularizer pipeline: ellipticity radius, cutoff `phi_R`, regularizer
//! `b_R = (1 - phi_R)/a`, and compactness probes of the residual
//! `I - Op(a)Op(b_R)` on weakly-null test families.
//!
//! The `parallel` feature (default on) routes the data-parallel inner loops
//! through rayon; without it the same loops run sequentially. All reductions
//! accumulate in a fixed order, so both lanes produce identical results.

pub mod error;
pub mod exponent;
pub mod fredholm;
pub mod grid;
pub mod maximal;
pub mod modular;
pub mod oracle;
mod par;
pub mod pdo;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, MultiIndex, SampledFunction};

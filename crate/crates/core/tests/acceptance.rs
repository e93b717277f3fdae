//! Acceptance gate: one test per verification check, in suite order.
//!
//! Each test prints its summary line (visible with `--nocapture` and in any
//! failure message), so a full run yields one pass/fail line per check.
//! Tolerances and runtime budgets are pinned inside `vexpdo_core::verify`.

use vexpdo_core::verify::{run_criterion, DEFAULT_SEED};

fn gate(index: usize) {
    let outcome = run_criterion(index, DEFAULT_SEED).expect("check index in range");
    let line = outcome.summary_line();
    println!("{line}");
    assert!(outcome.passed, "{line}");
}

#[test]
fn c01_luxemburg_constant_p() {
    gate(1);
}

#[test]
fn c02_unit_ball_law() {
    gate(2);
}

#[test]
fn c03_lattice_property() {
    gate(3);
}

#[test]
fn c04_maximal_oracle_and_tail() {
    gate(4);
}

#[test]
fn c05_sharp_maximal_laws() {
    gate(5);
}

#[test]
fn c06_pointwise_sharp_estimate() {
    gate(6);
}

#[test]
fn c07_boundedness_probe() {
    gate(7);
}

#[test]
fn c08_regularizer_identity() {
    gate(8);
}

#[test]
fn c09_fredholm_residual_decay() {
    gate(9);
}

#[test]
fn c10_composition_residual_order() {
    gate(10);
}

#[test]
fn c11_exponent_checkers() {
    gate(11);
}

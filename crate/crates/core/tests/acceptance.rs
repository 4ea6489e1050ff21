//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line with the measured numbers. Run with `--nocapture` to see
//! the lines for passing criteria too.

use thermoelastic::verify;

fn check(r: verify::CriterionResult) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_printed_matrix_oracle() {
    check(verify::criterion_1());
}

#[test]
fn criterion_02_inverse_norm_identity() {
    check(verify::criterion_2());
}

#[test]
fn criterion_03_decoupled_spectrum() {
    check(verify::criterion_3());
}

#[test]
fn criterion_04_axis_distance_table() {
    check(verify::criterion_4());
}

#[test]
fn criterion_05_uniform_exponential() {
    check(verify::criterion_5());
}

#[test]
fn criterion_06_uniform_polynomial() {
    check(verify::criterion_6());
}

#[test]
fn criterion_07_spectral_asymptotics() {
    check(verify::criterion_7());
}

#[test]
fn criterion_08_determinant_equivalence() {
    check(verify::criterion_8());
}

#[test]
fn criterion_09_quartic_roots_and_ratios() {
    check(verify::criterion_9());
}

#[test]
fn criterion_10_monotonicity_and_dissipation() {
    check(verify::criterion_10());
}

#[test]
fn criterion_11_decay_dichotomy() {
    check(verify::criterion_11());
}

#[test]
fn criterion_12_smoothness_sensitivity() {
    check(verify::criterion_12());
}

#[test]
fn criterion_13_mesh_convergence() {
    check(verify::criterion_13());
}

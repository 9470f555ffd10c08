//! Acceptance gate: every criterion of the verification suite, one test
//! per criterion, printing one pass/fail line each. Run with
//! `cargo test -p asymptorus --test acceptance -- --nocapture` to see the
//! lines for passing criteria too.

use asymptorus::acceptance::{self, CriterionOutcome, Tolerances};

fn check(outcome: CriterionOutcome) {
    println!("{outcome}");
    assert!(outcome.pass, "{outcome}");
}

#[test]
fn criterion_01_clifford_forms_exact() {
    check(acceptance::criterion_1(&Tolerances::default()));
}

#[test]
fn criterion_02_clifford_normal_formula() {
    check(acceptance::criterion_2(&Tolerances::default()));
}

#[test]
fn criterion_03_second_form_cross_validation() {
    check(acceptance::criterion_3(&Tolerances::default()));
}

#[test]
fn criterion_04_coefficient_symmetry() {
    check(acceptance::criterion_4(&Tolerances::default()));
}

#[test]
fn criterion_05_first_period_defect() {
    check(acceptance::criterion_5(&Tolerances::default()));
}

#[test]
fn criterion_06_second_period_defect() {
    check(acceptance::criterion_6(&Tolerances::default()));
}

#[test]
fn criterion_07_poincare_drift_coefficient() {
    check(acceptance::criterion_7(&Tolerances::default()));
}

#[test]
fn criterion_08_flow_vs_variation_scaling() {
    check(acceptance::criterion_8(&Tolerances::default()));
}

#[test]
fn criterion_09_return_map_conjugacy() {
    check(acceptance::criterion_9(&Tolerances::default()));
}

#[test]
fn criterion_10_monotone_drift() {
    check(acceptance::criterion_10(&Tolerances::default()));
}

#[test]
fn criterion_11_hyperbolicity_boundary() {
    check(acceptance::criterion_11(&Tolerances::default()));
}

#[test]
fn criterion_12_figure_export_smoke() {
    check(acceptance::criterion_12(&Tolerances::default()));
}

/// The suite is deterministic: two runs of the cheap criteria produce
/// byte-identical reports (no unseeded randomness anywhere).
#[test]
fn report_is_deterministic() {
    let tol = Tolerances::default();
    for f in [
        acceptance::criterion_1,
        acceptance::criterion_2,
        acceptance::criterion_3,
        acceptance::criterion_4,
        acceptance::criterion_5,
        acceptance::criterion_6,
        acceptance::criterion_11,
    ] {
        let a = f(&tol);
        let b = f(&tol);
        assert_eq!(a.detail, b.detail);
        assert_eq!(a.pass, b.pass);
    }
}

/// Scaling every tolerance down by many orders must flip the verdict;
/// this is what the negative exit-code test of the CLI relies on.
#[test]
fn impossible_tolerances_fail() {
    let tight = Tolerances::scaled(1e-9);
    let out = acceptance::criterion_1(&tight);
    assert!(!out.pass);
}

//! Acceptance criteria 1–14, one test each, printing a PASS/FAIL line.

use wavemap_core::verify;

const SEED: u64 = 7;

fn check(id: u32) {
    let c = verify::criterion(id, SEED).expect("known criterion");
    println!("{c}");
    assert!(c.passed, "{c}");
}

#[test]
fn criterion_01_cauchy_example41() {
    check(1);
}

#[test]
fn criterion_02_cauchy_example42() {
    check(2);
}

#[test]
fn criterion_03_k_functions() {
    check(3);
}

#[test]
fn criterion_04_quadrature_matches_rk() {
    check(4);
}

#[test]
fn criterion_05_structure_constants() {
    check(5);
}

#[test]
fn criterion_06_goursat_table() {
    check(6);
}

#[test]
fn criterion_07_superposition() {
    check(7);
}

#[test]
fn criterion_08_weierstrass_gate() {
    check(8);
}

#[test]
fn criterion_09_geodesics() {
    check(9);
}

#[test]
fn criterion_10_curvature() {
    check(10);
}

#[test]
fn criterion_11_blowup() {
    check(11);
}

#[test]
fn criterion_12_simulator() {
    check(12);
}

#[test]
fn criterion_13_first_integrals() {
    check(13);
}

#[test]
fn criterion_14_energy_density() {
    check(14);
}

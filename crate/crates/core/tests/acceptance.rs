//! One test per acceptance criterion. Each prints a single PASS/FAIL line with
//! the measured quantities and runtime (visible with `--nocapture`).

use conelab::verify::{self, CheckReport};

fn report(id: u32, r: &CheckReport) {
    let measured: Vec<String> = r.measured.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
    println!(
        "[{}] criterion {id:>2} {:<22} {:.2} s  {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.runtime_s,
        measured.join(" ")
    );
    for n in &r.notes {
        println!("      {n}");
    }
    assert!(r.passed, "criterion {id} ({}) failed: expected {}", r.name, r.expected);
}

#[test]
fn c01_witness_asymptotics() {
    report(1, &verify::witness_asymptotics().unwrap());
}

#[test]
fn c02_det_m_identity() {
    report(2, &verify::det_m_grid().unwrap());
}

#[test]
fn c03_dual_sum_membership() {
    report(3, &verify::dual_sum(3).unwrap());
}

#[test]
fn c04_sturm_example() {
    report(4, &verify::sturm(4).unwrap());
}

#[test]
fn c05_slice_bound() {
    report(5, &verify::slice_bound(5).unwrap());
}

#[test]
fn c06_moreau_suite() {
    report(6, &verify::moreau(6).unwrap());
}

#[test]
fn c07_dykstra_dnn() {
    report(7, &verify::dykstra_dnn(7).unwrap());
}

#[test]
fn c08_projection_constructors() {
    report(8, &verify::projections_dim4(8).unwrap());
}

#[test]
fn c09_sung_tam_consistency() {
    report(9, &verify::sung_tam_gallery().unwrap());
}

#[test]
fn c10_equivalence_consistency() {
    report(10, &verify::kappa_blr_agreement(10).unwrap());
}

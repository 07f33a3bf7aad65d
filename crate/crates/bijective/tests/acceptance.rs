//! Acceptance suite: one test per criterion. Each prints a pass/fail line
//! per check row (visible with `cargo test --test acceptance -- --nocapture`)
//! and fails if any row fails.

use bijective::verify::{self, CheckRow};
use bijective::Result;

fn run(id: &str, rows: Result<Vec<CheckRow>>) {
    let rows = rows.unwrap_or_else(|e| panic!("{id}: suite failed to run: {e}"));
    assert!(!rows.is_empty(), "{id}: suite produced no checks");
    let mut all = true;
    for r in &rows {
        println!(
            "[{id}] {} | {} | bound: {} | measured: {} | {}",
            r.check,
            r.instance,
            r.bound,
            r.measured,
            if r.pass { "pass" } else { "FAIL" }
        );
        all &= r.pass;
    }
    assert!(all, "{id} has failing checks");
    println!("[{id}] PASS");
}

#[test]
fn criterion_01_circle_optimality() {
    run("C01", verify::circle_optimality());
}

#[test]
fn criterion_02_paging_optimality() {
    run("C02", verify::paging_optimality());
}

#[test]
fn criterion_03_rbm_optimality() {
    run("C03", verify::rbm_optimality());
}

#[test]
fn criterion_04_circle_bounds() {
    run("C04", verify::circle_bounds());
}

#[test]
fn criterion_05_line_bounds() {
    run("C05", verify::line_bounds());
}

#[test]
fn criterion_06_kcenter_bound() {
    run("C06", verify::kcenter_bound());
}

#[test]
fn criterion_07_star_bound() {
    run("C07", verify::star_bound());
}

#[test]
fn criterion_08_lower_bound_two() {
    run("C08", verify::lower_bound_two());
}

#[test]
fn criterion_09_gadget_mean_improvement() {
    run("C09", verify::gadget_mean_improvement());
}

#[test]
fn criterion_10_line_adversary() {
    run("C10", verify::line_adversary());
}

#[test]
fn criterion_11_star_lower_bound() {
    run("C11", verify::star_lower_bound());
}

#[test]
fn criterion_12_ordering_bounds() {
    run("C12", verify::ordering_bounds());
}

#[test]
fn criterion_13_engine_self_checks() {
    run("C13", verify::engine_self_checks());
}

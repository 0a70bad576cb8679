//! Acceptance suite: one test per numbered verification check, each printing
//! a PASS/FAIL line (run with `--nocapture` to see timings for passing runs).

use deconv_core::verify::run_check;

fn run(id: &str) {
    let outcome = run_check(id).expect("known check id");
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}: {}", outcome.id, outcome.details);
}

#[test]
fn c1_recursion_bias() {
    run("recursion-bias");
}

#[test]
fn c2_recursion_variance() {
    run("recursion-variance");
}

#[test]
fn c3_kernel_projection_equivalence() {
    run("equivalence");
}

#[test]
fn c4_fourier_identity() {
    run("fourier-identity");
}

#[test]
fn c5_rate_ordinary_smooth() {
    run("rate-ordinary");
}

#[test]
fn c6_rate_supersmooth() {
    run("rate-supersmooth");
}

#[test]
fn c7_regime_partition() {
    run("regime-partition");
}

#[test]
fn c8_estimator_sanity() {
    run("estimator-sanity");
}

#[test]
fn c9_bandwidth_coherence() {
    run("bandwidth-coherence");
}

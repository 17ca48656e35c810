//! Norms checked against values computed independently in 40-digit arithmetic
//! (mpmath quadrature of the explicit Hermite-Gaussian eigenfunctions).

use pseudoboson::eigensystem::NormalizationConvention;
use pseudoboson::gbt::presets;
use pseudoboson::norms::{norm_sq_phi, norm_sq_psi};

const CASE_D: [(usize, f64, f64); 3] = [
    (0, 1.5453200174523567, -1.5312345789690086),
    (10, -3.5277806754179095, 4.8696892565361421),
    (12, -4.4443749146787758, 6.2478999229503592),
];

#[test]
fn case_d_log_norms_match_high_precision_quadrature() {
    let p = presets::scenario_d();
    let conv = NormalizationConvention::default_for(&p);
    for (n, ln_phi, ln_psi) in CASE_D {
        let phi = norm_sq_phi(&p, n, &conv).unwrap().ln_abs();
        let psi = norm_sq_psi(&p, n, &conv).unwrap().ln_abs();
        assert!((phi - ln_phi).abs() < 1e-13, "n={n}: {phi} vs {ln_phi}");
        assert!((psi - ln_psi).abs() < 1e-13, "n={n}: {psi} vs {ln_psi}");
    }
}

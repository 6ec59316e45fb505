//! The constructed second-order bifurcated state must satisfy the steady
//! Galerkin equations up to the neglected third-order terms: its residual
//! norm scales like (lambda - lambda0)^{3/2}, so shrinking the excursion
//! by 4 shrinks the residual by about 8.

use deanflow::basis::Truncation;
use deanflow::dynamics::assemble;
use deanflow::reduction::{bifurcated_state, gamma_coefficient, PitchforkBranch};
use deanflow::stability::critical_lambda;
use deanflow::ExecMode;

fn residual_norm(eps: f64) -> f64 {
    let length = 2.0;
    let lambda0 = critical_lambda(1, length);
    let truncation = Truncation::new(8, 8).unwrap();
    let result = gamma_coefficient(1, length, lambda0, truncation).unwrap();
    let lambda = lambda0 * (1.0 + eps);
    let state = bifurcated_state(lambda, &result, length, PitchforkBranch::Plus).unwrap();
    let system = assemble(length, lambda, truncation, ExecMode::default()).unwrap();
    let y = system.coeffs_from(&state).unwrap();
    let mut rhs = vec![0.0; y.len()];
    system.rhs(&y, &mut rhs);
    rhs.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn residual_scales_as_three_halves_power() {
    for eps in [0.04, 0.01] {
        let coarse = residual_norm(eps);
        let fine = residual_norm(eps / 4.0);
        let ratio = coarse / fine;
        assert!(
            ratio >= 6.0,
            "residual ratio at eps = {eps} should be ~8 (3/2-power law), got {ratio:.2}"
        );
    }
}

mod common;

use num_complex::Complex64;
use quadnls::diagnostics::{
    choose_coercivity_radius, classify_threshold, coercivity_monitor, CutoffChi, ThresholdVerdict,
};
use quadnls::fields::FieldState;

use common::{ground_state, rel, system};

#[test]
fn small_multiple_has_positive_gap() {
    let gs = ground_state();
    let spec = system();
    let u = gs.to_state().scaled(0.1);
    let chi = CutoffChi::new(25.0, u.grid()).unwrap();
    let rec = coercivity_monitor(&u, &spec, gs, &chi).unwrap();
    // χ ≡ 1 wherever ψ is not negligible, so ρ = 0.1² · 0.1²
    assert!(rel(rec.threshold_ratio, 1e-4) < 1e-6, "{}", rec.threshold_ratio);
    assert!(rec.gap > 0.0);
    assert!(rec.gap_over_cubic.unwrap() > 0.0);
}

#[test]
fn ground_state_has_zero_gap() {
    let gs = ground_state();
    let spec = system();
    let u = gs.to_state();
    let chi = CutoffChi::new(1e3, u.grid()).unwrap();
    let rec = coercivity_monitor(&u, &spec, gs, &chi).unwrap();
    // K − (5/2)P = 5I − 5I
    assert!(rec.gap.abs() < 1e-3 * gs.k, "{}", rec.gap);
    assert!(rel(rec.threshold_ratio, 1.0) < 1e-12);
}

#[test]
fn zero_state_monitor() {
    let gs = ground_state();
    let u = FieldState::zeros(gs.grid.clone(), 2);
    let chi = CutoffChi::new(5.0, u.grid()).unwrap();
    let rec = coercivity_monitor(&u, &system(), gs, &chi).unwrap();
    assert_eq!((rec.threshold_ratio, rec.gap, rec.cubic_mass), (0.0, 0.0, 0.0));
    assert_eq!(rec.gap_over_cubic, None);
}

#[test]
fn cutoff_kinetic_identity_converges() {
    let gs = ground_state();
    let spec = system();
    let gap = |n: usize| {
        let grid = std::sync::Arc::new(quadnls::fields::RadialGrid::new(20.0, n).unwrap());
        let u = FieldState::from_fn(grid.clone(), 2, 0.0, |k, r| {
            Complex64::from_polar((2.0 - k as f64) * (-r * r / 2.0).exp(), 0.3 * r * r)
        })
        .unwrap();
        let chi = CutoffChi::new(3.0, &grid).unwrap();
        let rec = coercivity_monitor(&u, &spec, gs, &chi).unwrap();
        (rec.identity_lhs - rec.identity_rhs).abs() / rec.identity_lhs
    };
    let (a, b) = (gap(1024), gap(2048));
    assert!(b < 1e-4, "{a} {b}");
    assert!((3.0..5.0).contains(&(a / b)), "{a} {b}");
}

#[test]
fn classifier_examples() {
    let gs = ground_state();
    let spec = system();
    let psi = gs.to_state();

    let half = classify_threshold(&psi.scaled(0.5), &spec, gs).unwrap();
    assert_eq!(half.verdict, ThresholdVerdict::BelowThreshold);
    // E₀(λψ) = λ²K − 2λ³P, Q(λψ) = λ²Q
    let e_half = 0.25 * gs.k - 0.25 * gs.p;
    assert!(rel(half.ratio_qe, 0.25 * e_half / gs.e0) < 1e-10);
    assert!(rel(half.ratio_qk, 0.0625) < 1e-12);

    let exact = classify_threshold(&psi, &spec, gs).unwrap();
    assert_eq!(exact.verdict, ThresholdVerdict::Boundary);
    assert!((exact.ratio_qe - 1.0).abs() < 1e-6 && (exact.ratio_qk - 1.0).abs() < 1e-6);

    let big = classify_threshold(&psi.scaled(1.1), &spec, gs).unwrap();
    assert_eq!(big.verdict, ThresholdVerdict::AboveThreshold);

    let zero = classify_threshold(&FieldState::zeros(gs.grid.clone(), 2), &spec, gs).unwrap();
    assert_eq!(zero.verdict, ThresholdVerdict::BelowThreshold);
    assert_eq!((zero.ratio_qe, zero.ratio_qk), (0.0, 0.0));
}

#[test]
fn classifier_is_gauge_invariant() {
    let gs = ground_state();
    let spec = system();
    let u = FieldState::from_fn(gs.grid.clone(), 2, 0.0, |k, r| {
        Complex64::from_polar((1.0 + 0.3 * k as f64) * (-r * r / 3.0).exp(), 0.2 * r)
    })
    .unwrap();
    let base = classify_threshold(&u, &spec, gs).unwrap();
    for theta in [0.3, 1.7, -2.2] {
        let phases: Vec<f64> = spec.gauge_rates().iter().map(|c| c * theta).collect();
        let c = classify_threshold(&u.rotated(&phases), &spec, gs).unwrap();
        assert_eq!(c.verdict, base.verdict);
        assert!(rel(c.ratio_qe, base.ratio_qe) < 1e-12);
        assert!(rel(c.ratio_qk, base.ratio_qk) < 1e-12);
    }
}

#[test]
fn classifier_needs_unit_frequency() {
    let spec = system();
    let grid = ground_state().grid.clone();
    let gs2 = quadnls::groundstate::solve_ground_state(
        &spec,
        2.0,
        grid,
        &quadnls::groundstate::SolverOptions::default(),
    )
    .unwrap();
    assert!(classify_threshold(&gs2.to_state(), &spec, &gs2).is_err());
}

#[test]
fn coercivity_radius_rule() {
    let gs = ground_state();
    let spec = system();
    let u = gs.to_state().scaled(0.5);
    let radius = choose_coercivity_radius(&u, &spec, gs).unwrap();
    assert!(radius > 0.0 && radius <= gs.grid.r_max());
    assert!(choose_coercivity_radius(&gs.to_state().scaled(1.1), &spec, gs).is_err());
}

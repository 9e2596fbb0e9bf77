//! The solver-based curvature estimator against its sandwich cross-check.

use wricci_core::coarse::CurvatureQuery;
use wricci_core::manifold::{ModelManifold, Potential};

#[test]
fn estimate_sits_inside_the_sandwich_window() {
    // The empirical-W1 estimate carries a positive sampling excess of order
    // cloud_size^{-3/4}; the bracket holds once the repeat-level standard
    // error window covers it, which the reference cloud size does.
    let m = ModelManifold::euclidean(2).unwrap();
    let x0 = m.origin();
    let v = m.tangent(&x0, &[1.0, 0.0]).unwrap();
    let q = CurvatureQuery::new(m, x0, v, 0.3, 0.3, Potential::Zero).unwrap();
    let est = q.estimate_coarse_curvature(2000, 8, 31).unwrap();
    let lo = est.bounds.lower - 3.0 * (est.bounds.se_lower + est.std_error);
    let hi = est.bounds.upper + 3.0 * (est.bounds.se_upper + est.std_error);
    assert!(
        est.w1_hat >= lo && est.w1_hat <= hi,
        "w1 {} outside [{lo}, {hi}]",
        est.w1_hat
    );
    assert!((est.kappa_hat - (1.0 - est.w1_hat / 0.3)).abs() < 1e-15);
    assert!((est.scaled_kappa - q.scale_kappa(est.kappa_hat)).abs() < 1e-15);
    // Flat space with no weight: the sandwich is exact and the midpoint
    // readout vanishes.
    assert!((q.scaled_kappa_of_w1(est.bounds.midpoint())).abs() < 1e-10);
}

#[test]
fn estimate_is_deterministic_per_seed() {
    let m = ModelManifold::sphere(2, 1.0).unwrap().with_ball_safety(0.3).unwrap();
    let x0 = m.origin();
    let v = m.tangent_frame(&x0).into_iter().next().unwrap();
    let q = CurvatureQuery::new(m, x0, v, 0.25, 0.25, Potential::Zero).unwrap();
    let a = q.estimate_coarse_curvature(120, 3, 8).unwrap();
    let b = q.estimate_coarse_curvature(120, 3, 8).unwrap();
    assert_eq!(a.w1_hat, b.w1_hat);
    assert_eq!(a.scaled_kappa, b.scaled_kappa);
    let c = q.estimate_coarse_curvature(120, 3, 9).unwrap();
    assert_ne!(a.w1_hat, c.w1_hat);
}

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use whipchain::continuum::{continuum_energy, polarized_curvature, sigma_solve, ContinuumCurvature, ContinuumCurve};
use whipchain::dynamics::cartesian_residual;
use whipchain::tension::{tension, TridiagonalOperator};
use whipchain::{ChainState, Vec2};

fn random_state(rng: &mut ChaCha8Rng, n: usize, g: f64) -> ChainState {
    let theta = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
    let omega = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    ChainState::new(theta, omega, g).unwrap()
}

#[test]
fn angle_tension_matches_cartesian_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.gen_range(1..40);
        let g = rng.gen_range(0.0..10.0);
        let st = random_state(&mut rng, n, g);
        let lam = tension(&st).unwrap().lambda;
        let reference = common::cartesian_tension(&st);
        let scale = reference.iter().map(|v| v.abs()).fold(1.0, f64::max);
        assert!(common::max_abs_diff(&lam, &reference) <= 1e-12 * scale);
    }
}

#[test]
fn accelerations_satisfy_cartesian_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let n = rng.gen_range(1..30);
        let st = random_state(&mut rng, n, 9.8);
        assert!(cartesian_residual(&st).unwrap() < 1e-9);
    }
}

#[test]
fn operator_matches_reference_matrix() {
    let theta = [0.1, 1.3, -2.0, 0.4, 3.0];
    let dense = TridiagonalOperator::from_angles(&theta).to_dense();
    let reference = common::tension_matrix(&theta);
    for (i, row) in reference.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert_eq!(dense.get(i, j), *v);
        }
    }
}

#[test]
fn flat_curvature_of_linear_pair() {
    let m = 400;
    let curve = ContinuumCurve::from_fn(m, |_| 0.0, |_| 0.0, 0.0).unwrap();
    let ctx = ContinuumCurvature::new(&curve).unwrap();
    let s = curve.s();
    let xp: Vec<Vec2> = s.iter().map(|_| Vec2::new(0.0, 1.0)).collect();
    let yp: Vec<Vec2> = s.iter().map(|&s| Vec2::new(0.0, s)).collect();
    let k = ctx.curvature(&xp, &yp).unwrap();
    assert!((k - 1.0 / 60.0).abs() < 1e-5, "{k}");
    let quad = common::flat_curvature_quadrature(|_| Vec2::new(0.0, 1.0), |s| Vec2::new(0.0, s), 400);
    assert!((quad - 1.0 / 60.0).abs() < 1e-5);
}

#[test]
fn flat_curvature_matches_quadrature() {
    let xf = |s: f64| Vec2::new((PI * s).cos(), s);
    let yf = |s: f64| Vec2::new(s * s, 1.0 - s);
    let reference = common::flat_curvature_quadrature(xf, yf, 600);
    let mut errs = Vec::new();
    for m in [100, 200] {
        let curve = ContinuumCurve::from_fn(m, |_| 0.3, |_| 0.0, 0.0).unwrap();
        let s = curve.s();
        let xp: Vec<Vec2> = s.iter().map(|&s| xf(s)).collect();
        let yp: Vec<Vec2> = s.iter().map(|&s| yf(s)).collect();
        let k = ContinuumCurvature::new(&curve).unwrap().curvature(&xp, &yp).unwrap();
        errs.push((k - reference).abs() / reference);
    }
    assert!(errs[1] < 1e-4 && errs[1] < errs[0], "{errs:?}");
}

#[test]
fn polarized_form_reduces_to_curvature() {
    let m = 80;
    let curve = ContinuumCurve::from_fn(m, |s| 0.7 * (PI * s).sin(), |_| 0.0, 0.0).unwrap();
    let s = curve.s();
    let xp: Vec<Vec2> = s.iter().map(|&s| Vec2::new(s.cos(), s * s)).collect();
    let yp: Vec<Vec2> = s.iter().map(|&s| Vec2::new(1.0 - s, (2.0 * s).sin())).collect();
    let k = ContinuumCurvature::new(&curve).unwrap().curvature(&xp, &yp).unwrap();
    let p = polarized_curvature(&curve, &xp, &yp, &yp).unwrap();
    assert!((k - p).abs() <= 1e-12 * k.abs());
}

#[test]
fn hanging_curve_tension_is_linear() {
    let curve = ContinuumCurve::from_fn(64, |_| -FRAC_PI_2, |_| 0.0, 3.0).unwrap();
    let sigma = sigma_solve(&curve).unwrap();
    for (s, v) in curve.s().iter().zip(&sigma) {
        assert!((v - 3.0 * (1.0 - s)).abs() < 1e-12);
    }
}

#[test]
fn rotating_curve_energy() {
    let w = 1.5;
    let m = 400;
    let curve = ContinuumCurve::from_fn(m, |_| 0.2, |_| w, 0.0).unwrap();
    let e = continuum_energy(&curve);
    assert!((e.kinetic - w * w / 6.0).abs() < 1e-5);
    // σ = ω²(1 - s²)/2 for rigid rotation
    let sigma = sigma_solve(&curve).unwrap();
    for (s, v) in curve.s().iter().zip(&sigma) {
        assert!((v - w * w * (1.0 - s * s) / 2.0).abs() < 1e-4);
    }
}

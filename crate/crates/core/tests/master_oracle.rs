mod common;

use common::{random_ket, random_model};
use nalgebra::{DMatrix, DVector};
use qsd_core::hilbert::two_level::*;
use qsd_core::master::*;
use qsd_core::rng::substream;
use qsd_core::{make_theta, projector, C64};

/// `exp(tL) vec(ρ0)` through nalgebra's Padé matrix exponential.
fn exact_evolution(model: &qsd_core::LindbladModel, rho0: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let l = build_liouvillian(model);
    let prop = (l.matrix() * C64::new(t, 0.0)).exp();
    unvectorize(&(prop * vectorize(rho0)), model.dim())
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn rk4_matches_matrix_exponential() {
    let mut s = substream(100, 0);
    let model = random_model(3, 2, 0.7, &mut s);
    let psi = random_ket(3, &mut s);
    let rho0 = DensityMatrix::pure(&psi).unwrap();
    let grid = [0.5, 1.0, 2.0];
    let out = evolve(&rho0, &build_liouvillian(&model), &grid, &OdeConfig::default()).unwrap();
    for (t, rho) in grid.iter().zip(&out) {
        let exact = exact_evolution(&model, rho0.matrix(), *t);
        assert!(max_abs(&(rho.matrix() - exact)) < 1e-11);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let model = fluorescence_model(10.0, 1.0);
    let rho0 = DensityMatrix::pure(&excited()).unwrap();
    let exact = exact_evolution(&model, rho0.matrix(), 1.0);
    let err = |h: f64| {
        let out = evolve(&rho0, &build_liouvillian(&model), &[1.0], &OdeConfig { h }).unwrap();
        max_abs(&(out[0].matrix() - &exact))
    };
    let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((ratio - 16.0).abs() < 4.0, "ratio {ratio}");
    }
}

#[test]
fn doubled_blocks_follow_the_original_equation() {
    let mut s = substream(101, 0);
    let grid = [1.0, 2.5, 5.0];
    let ode = OdeConfig::default();
    for k in 0..20 {
        let dim = 2 + k % 3;
        let channels = 1 + k % 3;
        let model = random_model(dim, channels, 0.5, &mut s);
        let (phi0, psi0) = (random_ket(dim, &mut s), random_ket(dim, &mut s));
        let full = doubled_evolution(&phi0, &psi0, &model, &grid, &ode).unwrap();
        let seed = projector(&make_theta(&phi0, &psi0).unwrap());
        let liou = build_liouvillian(&model);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let block0 = seed.block(i, j).unwrap();
            let alone = evolve(&block0, &liou, &grid, &ode).unwrap();
            for (rho, single) in full.iter().zip(&alone) {
                let b = rho.block(i, j).unwrap();
                assert!(max_abs(&(b.matrix() - single.matrix())) < 1e-10, "model {k}, block ({i},{j})");
            }
        }
    }
}

#[test]
fn regression_element_of_random_model_matches_exponential() {
    let mut s = substream(102, 0);
    let model = random_model(3, 1, 0.8, &mut s);
    let (phi0, psi0) = (random_ket(3, &mut s), random_ket(3, &mut s));
    let a = qsd_core::Operator::new(common::random_matrix(3, 1.0, &mut s)).unwrap();
    let grid = [0.3, 1.7];
    let got = regression_matrix_element(&a, &phi0, &psi0, &model, &grid, &OdeConfig::default()).unwrap();
    let seed = psi0.vector() * phi0.vector().adjoint();
    for (t, g) in grid.iter().zip(got) {
        let rho = exact_evolution(&model, &seed, *t);
        let expect = (a.matrix() * rho).trace();
        assert!((g - expect).norm() < 1e-10);
    }
}

#[test]
fn fluorescence_correlation_limits() {
    let model = fluorescence_model(10.0, 1.0);
    let rho = steady_state(&model).unwrap();
    let tau: Vec<f64> = (0..=400).map(|k| k as f64 * 0.1).collect();
    let g = oracle_two_time(&sigma_plus(), &sigma_minus(), &model, &rho, 0.0, &tau, &OdeConfig::default()).unwrap();
    let pop = 25.0 / 50.25;
    assert!((g[0] - C64::new(pop, 0.0)).norm() < 1e-10);
    // Long delays factorize into |⟨σ⁺⟩|².
    let coh = rho.expectation(&sigma_plus()).unwrap();
    assert!((g[400] - coh * coh.conj()).norm() < 1e-7);
    // Two-time correlations started in the steady state depend on τ only.
    let shifted = oracle_two_time(&sigma_plus(), &sigma_minus(), &model, &rho, 3.0, &tau[..31], &OdeConfig::default()).unwrap();
    for (a, b) in g.iter().zip(&shifted) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn steady_state_is_a_fixed_point() {
    let mut s = substream(103, 0);
    for dim in [2, 3, 4] {
        let model = random_model(dim, 2, 1.0, &mut s);
        let rho = steady_state(&model).unwrap();
        let rhs = lindblad_rhs(&model, rho.matrix());
        assert!(max_abs(&rhs) < 1e-10);
        assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let v: DVector<C64> = vectorize(rho.matrix());
        assert!(v.iter().all(|z| z.is_finite()));
    }
}

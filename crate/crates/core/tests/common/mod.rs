#![allow(dead_code)]

use nalgebra::DMatrix;
use qsd_core::rng::NoiseStream;
use qsd_core::{Ket, LindbladModel, Operator, C64};

pub fn random_matrix(dim: usize, scale: f64, s: &mut NoiseStream) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| s.complex_gaussian() * scale)
}

/// Hermitian `H` and `channels` Lindblad operators with entries of size ~`scale`.
pub fn random_model(dim: usize, channels: usize, scale: f64, s: &mut NoiseStream) -> LindbladModel {
    let a = random_matrix(dim, scale, s);
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let ls = (0..channels).map(|_| Operator::new(random_matrix(dim, scale, s)).unwrap()).collect();
    LindbladModel::new(Operator::new(h).unwrap(), ls).unwrap()
}

pub fn random_ket(dim: usize, s: &mut NoiseStream) -> Ket {
    Ket::new((0..dim).map(|_| s.complex_gaussian()).collect()).unwrap().normalized().unwrap()
}

pub fn uniform_grid(t_max: f64, nodes: usize) -> Vec<f64> {
    (1..=nodes).map(|k| k as f64 * t_max / nodes as f64).collect()
}

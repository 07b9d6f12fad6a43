#![allow(dead_code)]

use nalgebra::DMatrix;
use sweepcert::numerics::RandomStream;
use sweepcert::qnd::{CMatrix, MeasurementEnsemble};
use sweepcert::C64;

/// Real `n×n` matrix with standard normal entries and `|det| ≥ min_det`.
pub fn random_real_matrix(n: usize, min_det: f64, rng: &mut RandomStream) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.standard_normal());
        if m.determinant().abs() >= min_det {
            return m;
        }
    }
}

pub fn random_complex_matrix(n: usize, min_det: f64, rng: &mut RandomStream) -> CMatrix {
    loop {
        let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.standard_normal(), rng.standard_normal()));
        if m.determinant().norm() >= min_det {
            return m;
        }
    }
}

/// Random complete ensemble: `M_k = A_k L^{-*}` where `Σ A_k* A_k = L L*`.
pub fn random_complete_ensemble(n: usize, k: usize, rng: &mut RandomStream) -> MeasurementEnsemble {
    let a: Vec<CMatrix> = (0..k).map(|_| random_complex_matrix(n, 0.2, rng)).collect();
    let s = a.iter().fold(CMatrix::zeros(n, n), |acc, m| acc + m.adjoint() * m);
    let l = s.cholesky().expect("sum of A*A is positive definite").l();
    let l_inv_adj = l.adjoint().try_inverse().expect("Cholesky factor is invertible");
    let ms = a.into_iter().map(|m| m * &l_inv_adj).collect();
    MeasurementEnsemble::general(ms).expect("construction is complete")
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Unit vector in `R^n` with standard normal direction.
pub fn random_unit_real(n: usize, rng: &mut RandomStream) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / nrm).collect()
}

/// `x ↦ Mx/‖Mx‖` as a map on real coordinates.
pub fn normalized_linear_map(m: &DMatrix<f64>) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |x: &[f64]| {
        let y = m * nalgebra::DVector::from_column_slice(x);
        let nrm = y.norm();
        y.iter().map(|v| v / nrm).collect()
    }
}

//! Finite-difference Jacobian determinants of sphere maps.
//!
//! Used as an independent oracle for the closed-form determinants in
//! [`crate::qnd`]; nothing here knows about measurement matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Relative disagreement between step `h` and `h/2` above which the result is flagged.
const HALVING_WARN_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdJacobian {
    /// `|det|` of the tangent-space differential, from central differences at `step`.
    pub det: f64,
    /// Bound on the change observed when halving the step.
    pub error_bound: f64,
    /// Set when step halving disagrees by more than the relative threshold.
    pub numeric_warning: bool,
}

/// Orthonormal basis of the tangent space `{v : <v, p> = 0}` at a unit vector `p`.
///
/// Gram–Schmidt over the standard basis, visiting coordinates in ascending
/// order of `|p_i|` (ties by index) so the frame is reproducible.
pub fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs()).then(a.cmp(&b)));

    let mut frame: Vec<Vec<f64>> = vec![p.to_vec()];
    for &i in &order {
        if frame.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &frame {
                let d = dot(&v, q);
                for (vj, qj) in v.iter_mut().zip(q) {
                    *vj -= d * qj;
                }
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-6 {
            v.iter_mut().for_each(|x| *x /= nv);
            frame.push(v);
        }
    }
    frame.remove(0);
    frame
}

/// `|det|` of the differential of `map` restricted to the tangent spaces at
/// `point` and `map(point)`, by central differences along great circles.
pub fn fd_jacobian_det_on_sphere<F>(map: F, point: &[f64], step: f64) -> Result<FdJacobian>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    let pn = dot(point, point).sqrt();
    if point.len() < 2 || (pn - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("point must be a unit vector of length >= 2".into()));
    }
    let coarse = tangent_det(&map, point, step)?;
    let fine = tangent_det(&map, point, step / 2.0)?;
    let diff = (coarse - fine).abs();
    let roundoff = point.len() as f64 * f64::EPSILON / step * coarse.abs().max(1.0);
    let error_bound = 2.0 * diff + roundoff;
    Ok(FdJacobian {
        det: coarse,
        error_bound,
        numeric_warning: diff > HALVING_WARN_REL * coarse.abs().max(f64::MIN_POSITIVE),
    })
}

fn tangent_det<F>(map: &F, point: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let image = map(point);
    let in_frame = tangent_basis(point);
    let out_frame = tangent_basis(&image);
    let m = in_frame.len();
    if out_frame.len() != m {
        return Err(Error::InvalidArgument("map changes the sphere dimension".into()));
    }
    let (c, s) = (h.cos(), h.sin());
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for (j, t) in in_frame.iter().enumerate() {
        let fwd: Vec<f64> = point.iter().zip(t).map(|(p, v)| c * p + s * v).collect();
        let bwd: Vec<f64> = point.iter().zip(t).map(|(p, v)| c * p - s * v).collect();
        let (fp, fm) = (map(&fwd), map(&bwd));
        let deriv: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        for (i, u) in out_frame.iter().enumerate() {
            jac[(i, j)] = dot(u, &deriv);
        }
    }
    let det = jac.determinant().abs();
    if !det.is_finite() {
        return Err(Error::NearSingular("non-finite finite-difference Jacobian".into()));
    }
    Ok(det)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normalize(v: Vec<f64>) -> Vec<f64> {
        let n = dot(&v, &v).sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_point() {
        let p = normalize(vec![0.3, -0.5, 0.1, 0.8]);
        let b = tangent_basis(&p);
        assert_eq!(b.len(), 3);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &p).abs() < 1e-14);
            for (j, v) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_map() {
        let p = normalize(vec![0.2, 0.4, -0.3]);
        let r = fd_jacobian_det_on_sphere(|x| x.to_vec(), &p, 1e-6).unwrap();
        assert!((r.det - 1.0).abs() < 1e-8);
        assert!(!r.numeric_warning);
    }

    #[test]
    fn circle_map_by_hand_parameterisation() {
        // θ ↦ atan2(sin θ, 2 cos θ) has derivative 1/2 at θ = 0
        let map = |x: &[f64]| normalize(vec![2.0 * x[0], x[1]]);
        let r = fd_jacobian_det_on_sphere(map, &[1.0, 0.0], 1e-6).unwrap();
        assert!((r.det - 0.5).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(fd_jacobian_det_on_sphere(|x| x.to_vec(), &[1.0, 0.0], 0.0).is_err());
        assert!(fd_jacobian_det_on_sphere(|x| x.to_vec(), &[2.0, 0.0], 1e-6).is_err());
    }

    #[test]
    fn tiny_step_is_flagged() {
        let map = |x: &[f64]| normalize(vec![3.0 * x[0] + x[1], x[1] - 0.5 * x[2], x[2] + 0.2 * x[0]]);
        let p = normalize(vec![0.4, 0.5, 0.6]);
        let r = fd_jacobian_det_on_sphere(map, &p, 1e-13).unwrap();
        assert!(r.numeric_warning);
    }

    #[test]
    fn halving_changes_less_than_bound() {
        let map = |x: &[f64]| normalize(vec![3.0 * x[0] + x[1], x[1] - 0.5 * x[2], x[2] + 0.2 * x[0]]);
        let p = normalize(vec![0.4, 0.5, 0.6]);
        let a = fd_jacobian_det_on_sphere(map, &p, 1e-4).unwrap();
        let b = fd_jacobian_det_on_sphere(map, &p, 0.5e-4).unwrap();
        assert!((a.det - b.det).abs() <= a.error_bound);
    }
}

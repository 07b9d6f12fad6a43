mod common;

use std::sync::Arc;

use approx::assert_relative_eq;
use common::{random_complete_ensemble, rel};
use nalgebra::DMatrix;
use sweepcert::cell_cycle::{CellCycleModel, PowerDensity};
use sweepcert::certify::{
    check_local_integrability, check_proper_subinvariance, fock_proximity_diagnostic, CertificatePlan, SphereFamily,
    Verdict, TREND_SLACK_SE,
};
use sweepcert::markov::{run_ensemble, MarkovProcess, SphereRegion};
use sweepcert::numerics::{
    fd_jacobian_det_on_sphere, integrate_1d, mc_integral_on_sphere, sample_uniform_sphere, sphere_volume, RandomStream,
};
use sweepcert::qnd::{
    example_ensemble, jacobian_det_complex, jacobian_det_real, perron_qnd, realify_matrix, CMatrix, FockLyapunovDensity,
};
use sweepcert::{QuantumState, C64};

fn balanced() -> QuantumState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::from_real(&[s, s]).unwrap()
}

#[test]
fn transition_probability_examples() {
    let ifs = example_ensemble().to_ifs_model();
    let e1 = QuantumState::basis(2, 0).unwrap();
    assert_relative_eq!(ifs.transition_probability(&e1, &SphereRegion::Whole).unwrap(), 1.0, epsilon = 1e-15);

    let near_e1 = SphereRegion::Predicate(Arc::new(|x: &QuantumState| x.components()[0].norm() > 1.0 - 1e-12));
    assert_relative_eq!(ifs.transition_probability(&e1, &near_e1).unwrap(), 1.0, epsilon = 1e-12);

    let second_larger = SphereRegion::Predicate(Arc::new(|x: &QuantumState| x.components()[0].norm() < x.components()[1].norm()));
    assert_relative_eq!(ifs.transition_probability(&balanced(), &second_larger).unwrap(), 0.5, epsilon = 1e-12);
}

#[test]
fn balanced_state_steps_to_the_two_images() {
    let ifs = example_ensemble().to_ifs_model();
    let mut rng = RandomStream::new(5, 0);
    let n = 100_000;
    let mut first = 0usize;
    for _ in 0..n {
        let (k, next) = ifs.step(&balanced(), &mut rng).unwrap();
        let expect = if k == 0 { [0.6, 0.8] } else { [0.8, 0.6] };
        assert!((next.components()[0].re - expect[0]).abs() < 1e-12);
        assert!((next.components()[1].re - expect[1]).abs() < 1e-12);
        first += usize::from(k == 0);
    }
    let p = first as f64 / n as f64;
    assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "frequency {p}");
}

#[test]
fn qnd_ensemble_drifts_towards_coordinate_planes() {
    let ifs = example_ensemble().to_ifs_model();
    let snaps = run_ensemble(&ifs, |s| sample_uniform_sphere(2, s), 10_000, &[0, 200], &RandomStream::new(6, 0)).unwrap();
    let swept = snaps[0]
        .states
        .iter()
        .zip(&snaps[1].states)
        .filter(|(a, b)| b.min_modulus() < a.min_modulus() || b.min_modulus() < 0.1)
        .count();
    assert!(swept as f64 >= 0.99 * 10_000.0, "{swept}");
}

#[test]
fn cell_sizes_grow_in_median() {
    let m = CellCycleModel::new(1.0, 0.5, 0.0).unwrap();
    let snaps = run_ensemble(&m, |s| Ok(0.5 + 0.5 * s.uniform()), 5_000, &[0, 100], &RandomStream::new(7, 0)).unwrap();
    let median = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    assert!(median(&snaps[1].states) > median(&snaps[0].states));
}

#[test]
fn fock_density_transfer_value() {
    let u = FockLyapunovDensity::new(2);
    let v = perron_qnd(&example_ensemble(), &u, &balanced()).unwrap();
    assert_relative_eq!(v, 3.6864, max_relative = 1e-12);
}

#[test]
fn complex_example_matches_finite_differences_on_s3() {
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)]));
    let e1 = QuantumState::basis(2, 0).unwrap();
    let closed = jacobian_det_complex(&m, &e1).unwrap();
    assert_relative_eq!(closed, 0.48f64.powi(2) / 0.6f64.powi(4), max_relative = 1e-12);
    let mr = realify_matrix(&m);
    let fd = fd_jacobian_det_on_sphere(common::normalized_linear_map(&mr), &e1.realify(), 1e-6).unwrap();
    assert!((fd.det - 1.777_78).abs() < 1e-4, "{}", fd.det);
}

#[test]
fn real_three_by_three_matches_finite_differences() {
    let mut rng = RandomStream::new(8, 0);
    for _ in 0..20 {
        let m: DMatrix<f64> = common::random_real_matrix(3, 0.2, &mut rng);
        let phi = common::random_unit_real(3, &mut rng);
        let closed = jacobian_det_real(&m, &phi).unwrap();
        let fd = fd_jacobian_det_on_sphere(common::normalized_linear_map(&m), &phi, 1e-6).unwrap();
        assert!(rel(closed, fd.det) < 1e-5);
    }
}

#[test]
fn sphere_integrals() {
    let est = mc_integral_on_sphere(|p: &QuantumState| p.components()[0].norm_sqr(), 2, 1_000_000, &RandomStream::new(9, 0)).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((est.value - pi2).abs() < 4.0 * est.std_error, "{} ± {}", est.value, est.std_error);

    let fam = SphereFamily::new(2, vec![0.3]).unwrap();
    let integ = check_local_integrability(&FockLyapunovDensity::new(2), &fam, 1_000_000, &RandomStream::new(10, 0));
    assert!(integ[0].finite);
    assert!(integ[0].value > 0.0 && integ[0].value <= 0.3f64.powi(-4) * sphere_volume(2));
}

#[test]
fn cell_power_density_values() {
    let m = CellCycleModel::new(1.0, 0.5, 0.1).unwrap();
    // independent scipy quadrature of the two kernel branches
    let oracle_x4 = 0.272_323_647_723_137_7;
    assert_relative_eq!(m.perron_power_closed_form(4.0).unwrap(), oracle_x4, max_relative = 1e-9);
    let q = m.perron_quadrature(&PowerDensity { beta: 0.1 }, 4.0, 1e-13).unwrap();
    assert_relative_eq!(q, oracle_x4, max_relative = 1e-9);

    // the same value through a single quadrature over [σ, ∞)
    let whole = integrate_1d(|y| m.kernel_eval(1.0, y).unwrap() * y.powf(-0.9), 0.5, f64::INFINITY, 1e-12).unwrap();
    assert!((whole - 0.854_629_1).abs() < 1e-6, "{whole}");
}

#[test]
fn cell_certificate_margins_follow_closed_form() {
    let m = CellCycleModel::new(1.0, 0.5, 0.1).unwrap();
    let plan = CertificatePlan { n_points: 1000, exclusion_radius: 0.0, margin_floor: 1e-9 };
    let sampler = |s: &mut RandomStream| Ok(0.5 * 2000f64.powf(s.uniform()));
    let r = check_proper_subinvariance(&m, &PowerDensity { beta: 0.1 }, &plan, sampler, &RandomStream::new(11, 0)).unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    for s in &r.samples {
        let x = s.u.powf(1.0 / -0.9);
        let expect = 1.0 - m.perron_power_closed_form(x).unwrap() / x.powf(-0.9);
        assert!((s.margin - expect).abs() < 1e-9);
    }
}

#[test]
fn fock_proximity_does_not_decrease() {
    let checkpoints = [0, 50, 100, 200, 300, 400, 500];
    let f = fock_proximity_diagnostic(
        &example_ensemble(),
        |s| sample_uniform_sphere(2, s),
        10_000,
        &checkpoints,
        0.01,
        &RandomStream::new(12, 0),
    )
    .unwrap();
    for w in f.windows(2) {
        let se = |p: f64| (p * (1.0 - p) / 10_000.0).sqrt();
        assert!(w[1].fraction + TREND_SLACK_SE * se(w[0].fraction).hypot(se(w[1].fraction)) >= w[0].fraction);
    }
    assert!(f.last().unwrap().fraction > f[0].fraction);
}

#[test]
fn general_ensemble_probabilities_and_round_trip() {
    let mut rng = RandomStream::new(13, 0);
    for n in [2, 3] {
        let e = random_complete_ensemble(n, 3, &mut rng);
        assert!(e.completeness_residual() < 1e-12);
        for _ in 0..50 {
            let phi = sample_uniform_sphere(n, &mut rng).unwrap();
            let p = e.outcome_probabilities(&phi).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for k in 0..e.len() {
                let back = e.inverse(k, &e.apply(k, &phi).unwrap()).unwrap();
                for (a, b) in back.components().iter().zip(phi.components()) {
                    assert!((a - b).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn transfer_operator_preserves_mass() {
    // ∫ 𝒫ρ dm = ∫ ρ dm for a smooth density on S_2
    let e = random_complete_ensemble(2, 2, &mut RandomStream::new(14, 0));
    let ifs = e.to_ifs_model();
    let rho = |phi: &QuantumState| 1.0 + phi.components()[1].norm_sqr();
    let lhs = mc_integral_on_sphere(|x: &QuantumState| ifs.perron(&rho, x).unwrap(), 2, 400_000, &RandomStream::new(15, 0)).unwrap();
    let rhs = 1.5 * sphere_volume(2);
    assert!((lhs.value - rhs).abs() < 4.0 * lhs.std_error, "{} vs {rhs} ± {}", lhs.value, lhs.std_error);
}

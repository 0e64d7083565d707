use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::field::CoframeField;
use crate::frame::{evaluate_coframe, max_abs, metric, torsion_residual, FrameGeometry};
use crate::solutions::{minkowski, random_polynomial, schwarzschild, warped_static};

fn diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_cp(seed: u64, m: usize, x: f64) -> CoframePoint {
    let sol = random_polynomial(seed, 0.1, m).unwrap();
    evaluate_coframe(&sol.coframe(), &vec![x; m]).unwrap()
}

#[test]
fn identity_gauge_leaves_frame_and_connection() {
    let cp = random_cp(2, 4, 0.3);
    let g = GaugeElement::identity(Signature::LORENTZ4);
    let out = gauge_transform_frame(&cp, &g).unwrap();
    assert!(diff(&out.e, &cp.e) < 1e-15 && diff(&out.de, &cp.de) < 1e-15 && diff(&out.dde, &cp.dde) < 1e-15);
    let sp = spin_connection(&cp).unwrap();
    let w = gauge_transform_omega(&sp, &cp, &g).unwrap();
    assert!(diff(&w.omega, &sp.omega) < 1e-15 && diff(&w.domega, &sp.domega) < 1e-15);
    let e = gauge_transform_e(&cp, &g).unwrap();
    assert!(diff(&e, &cp.big_e) < 1e-15);
    let sec = SectionPoint::holonomic(&cp).unwrap();
    assert_eq!(theta_gauge_invariance_check(&sec, &g).unwrap(), 0.0);
}

#[test]
fn boost_preserves_metric() {
    let sig = Signature::LORENTZ4;
    let cp = evaluate_coframe(&minkowski(4).coframe(), &[0.0; 4]).unwrap();
    let g = GaugeElement::new(sig, plane_transformation(sig, 0, 1, 0.3), CoordMap::Identity);
    let out = gauge_transform_frame(&cp, &g).unwrap();
    let (c, s) = (0.3f64.cosh(), -0.3f64.sinh());
    assert!((out.e(0, 0) - c).abs() < 1e-14 && (out.e(0, 1) - s).abs() < 1e-14);
    assert!((out.e(1, 0) - s).abs() < 1e-14 && (out.e(1, 1) - c).abs() < 1e-14);
    assert!(diff(&metric(&out), &metric(&cp)) < 1e-14);
}

#[test]
fn linear_rescaling_halves_frame() {
    let sig = Signature::LORENTZ4;
    let cp = evaluate_coframe(&CoframeField::identity(sig), &[1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut matrix = vec![0.0; 16];
    (0..4).for_each(|a| matrix[a * 5] = 2.0);
    let g = GaugeElement::new(sig, JetMap::constant(crate::tensor::eta(Signature::new(0, 4)).data().to_vec()), CoordMap::Affine { matrix, offset: vec![0.0; 4] });
    let out = gauge_transform_frame(&cp, &g).unwrap();
    for mu in 0..4 {
        for j in 0..4 {
            assert_eq!(out.e(mu, j), if mu == j { 0.5 } else { 0.0 });
        }
    }
    assert_eq!(out.x, vec![2.0, 4.0, 6.0, 8.0]);
}

#[test]
fn constant_lambda_has_no_inhomogeneous_term() {
    let sig = Signature::LORENTZ4;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cp = evaluate_coframe(&minkowski(4).coframe(), &[0.1; 4]).unwrap();
    let g = GaugeElement::new(sig, random_constant_lorentz(sig, &mut rng, 0.5), CoordMap::Identity);
    let w = gauge_transform_omega(&spin_connection(&cp).unwrap(), &cp, &g).unwrap();
    assert!(max_abs(&w.omega) < 1e-15);
}

#[test]
fn coordinate_rotation_generates_pure_gauge_connection() {
    let sig = Signature::LORENTZ4;
    let cp = evaluate_coframe(&minkowski(4).coframe(), &[0.4, 0.0, 0.0, 0.0]).unwrap();
    let g = GaugeElement::new(sig, coordinate_rotation(4, 2, 3, 0), CoordMap::Identity);
    let w = gauge_transform_omega(&spin_connection(&cp).unwrap(), &cp, &g).unwrap();
    assert!((w.omega(0, 2, 3) - 1.0).abs() < 1e-14);
    assert!((w.omega(0, 3, 2) + 1.0).abs() < 1e-14);
    let direct = spin_connection(&gauge_transform_frame(&cp, &g).unwrap()).unwrap();
    assert!(diff(&direct.omega, &w.omega) < 1e-14);
}

#[test]
fn flipped_inhomogeneous_sign_breaks_the_law() {
    let sig = Signature::LORENTZ4;
    let cp = evaluate_coframe(&minkowski(4).coframe(), &[0.4, 0.0, 0.0, 0.0]).unwrap();
    let mut g = GaugeElement::new(sig, coordinate_rotation(4, 2, 3, 0), CoordMap::Identity);
    g.flip_inhomogeneous = true;
    assert!(commuting_diagram_check(&cp, &g).unwrap() > 1.0);
}

#[test]
fn connection_law_matches_transformed_frame_with_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in [4, 5] {
        let sig = Signature::lorentzian(m);
        for trial in 0..5 {
            let cp = random_cp(trial, m, 0.25);
            let coords = random_affine_map(m, &mut rng, 0.2);
            let g = random_gauge_element(sig, &mut rng, 0.4, coords);
            let direct = spin_connection(&gauge_transform_frame(&cp, &g).unwrap()).unwrap();
            let law = gauge_transform_omega(&spin_connection(&cp).unwrap(), &cp, &g).unwrap();
            assert!(diff(&direct.omega, &law.omega) < 1e-12);
            assert!(diff(&direct.domega, &law.domega) < 1e-11);
        }
    }
}

#[test]
fn commuting_diagram_on_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..20 {
        let m = 4 + (trial % 2) as usize;
        let cp = random_cp(100 + trial, m, -0.3);
        let coords = if trial % 3 == 0 { random_quadratic_map(m, &mut rng, 0.1) } else { random_affine_map(m, &mut rng, 0.2) };
        let g = random_gauge_element(Signature::lorentzian(m), &mut rng, 0.4, coords);
        assert!(commuting_diagram_check(&cp, &g).unwrap() < 1e-9);
    }
}

#[test]
fn non_affine_frame_transform_is_refused() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cp = random_cp(1, 4, 0.0);
    let g = GaugeElement::new(Signature::LORENTZ4, random_constant_lorentz(Signature::LORENTZ4, &mut rng, 0.1), random_quadratic_map(4, &mut rng, 0.1));
    assert_eq!(gauge_transform_frame(&cp, &g).unwrap_err(), GaugeError::NonAffineChart);
}

#[test]
fn invalid_lambda_is_rejected() {
    let sig = Signature::LORENTZ4;
    let mut l = vec![0.0; 16];
    (0..4).for_each(|a| l[a * 5] = 1.0);
    l[1] = 0.5;
    let g = GaugeElement::new(sig, JetMap::constant(l), CoordMap::Identity);
    assert!(matches!(g.at(&[0.0; 4]), Err(GaugeError::NotPseudoOrthogonal { .. })));
    let singular = GaugeElement::new(sig, GaugeElement::identity(sig).lambda, CoordMap::Affine { matrix: vec![0.0; 16], offset: vec![0.0; 4] });
    assert!(matches!(singular.at(&[0.0; 4]), Err(GaugeError::SingularJacobian { .. })));
}

#[test]
fn contact_forms_vanish_exactly_on_holonomic_sections() {
    for seed in 0..5 {
        let cp = random_cp(seed, 4, 0.5);
        let sec = SectionPoint::holonomic(&cp).unwrap();
        assert!(max_abs(&contact_pullback(&sec)) < 1e-10);
        let tr = torsion_residual(&cp, &sec.connection);
        assert!(diff(&contact_pullback(&sec), &tr.iter().map(|t| -0.5 * t).collect::<Vec<_>>()) < 1e-14);
    }
}

#[test]
fn contact_pullback_is_linear_in_connection_perturbation() {
    let cp = random_cp(6, 4, 0.1);
    let sec = SectionPoint::holonomic(&cp).unwrap();
    let perturbed = |c: f64| {
        let mut omega = sec.connection.omega.clone();
        omega[ix3(4, 1, 0, 2)] += c;
        omega[ix3(4, 1, 2, 0)] -= c;
        let sp = SpinConnectionPoint::from_raw(sec.signature, &omega, &sec.connection.domega);
        contact_pullback(&SectionPoint::free(sec.signature, sec.x.clone(), sec.e.clone(), sec.de.clone(), sp))
    };
    let (a, b) = (perturbed(0.1), perturbed(0.2));
    assert!(max_abs(&a) > 1e-3);
    assert!(diff(&b, &a.iter().map(|v| 2.0 * v).collect::<Vec<_>>()) < 1e-12);
}

#[test]
fn contact_difference_is_connection_difference_on_frame() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cp = random_cp(8, 5, -0.2);
    let hol = SectionPoint::holonomic(&cp).unwrap();
    let noise = SectionPoint::random(Signature::lorentzian(5), &mut rng, 0.1).connection;
    let free = SectionPoint::free(hol.signature, hol.x.clone(), hol.e.clone(), hol.de.clone(), noise.clone());
    let (c1, c0) = (contact_pullback(&free), contact_pullback(&hol));
    let m = 5;
    for mu in 0..m {
        for a in 0..m {
            for b in 0..m {
                let mut expect = 0.0;
                for nu in 0..m {
                    let d = |i| noise.omega_mixed(i, mu, nu) - hol.connection.omega_mixed(i, mu, nu);
                    expect += 0.5 * (d(a) * cp.e(nu, b) - d(b) * cp.e(nu, a));
                }
                assert!((c1[ix3(m, mu, a, b)] - c0[ix3(m, mu, a, b)] - expect).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn theta_density_vanishes_for_flat_and_vacuum() {
    let flat = evaluate_coframe(&minkowski(4).coframe(), &[0.0; 4]).unwrap();
    assert_eq!(theta_density(&SectionPoint::holonomic(&flat).unwrap()), 0.0);
    let s = schwarzschild(1.0).unwrap();
    for x in s.sample_points(5, 1) {
        let cp = evaluate_coframe(&s.coframe(), &x).unwrap();
        assert!(theta_density(&SectionPoint::holonomic(&cp).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn theta_density_is_proportional_to_scalar_curvature() {
    let mut configs: Vec<(crate::field::CoframeField, Vec<Vec<f64>>)> = Vec::new();
    for (seed, m) in [(1u64, 4usize), (2, 4), (3, 5), (4, 5)] {
        let s = random_polynomial(seed, 0.1, m).unwrap();
        configs.push((s.coframe(), s.sample_points(20, seed)));
    }
    let w = warped_static(0.2);
    configs.push((w.coframe(), w.sample_points(20, 9)));
    for (field, points) in configs {
        for x in points {
            let geo = FrameGeometry::at(&field, &x).unwrap();
            let l = theta_density(&SectionPoint::holonomic(&geo.coframe).unwrap());
            let scale = geo.coframe.det() * geo.curvature.scalar(&geo.coframe);
            assert!((l - THETA_SCALAR_RATIO * scale).abs() < 1e-10 * (1.0 + scale.abs()));
        }
    }
}

#[test]
fn theta_is_gauge_invariant_for_curvilinear_charts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for m in [4, 5] {
        let sig = Signature::lorentzian(m);
        let sec = SectionPoint::random(sig, &mut rng, 0.2);
        for _ in 0..5 {
            let coords = random_quadratic_map(m, &mut rng, 0.1);
            let g = random_gauge_element(sig, &mut rng, 0.5, coords);
            assert!(theta_gauge_invariance_check(&sec, &g).unwrap() < 1e-9);
        }
    }
}

#[test]
fn omega_identity_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [3, 4, 5] {
        for _ in 0..5 {
            let sec = SectionPoint::random(Signature::lorentzian(m), &mut rng, 0.3);
            let (l, _) = omega_identity_sides(&sec);
            assert!(max_abs(&l) > 1e-2);
            assert!(omega_identity_check(&sec) < 1e-10);
        }
    }
    let mut sec = SectionPoint::random(Signature::LORENTZ4, &mut rng, 0.3);
    sec.connection = SpinConnectionPoint::from_raw(sec.signature, &[0.0; 64], &[0.0; 256]);
    assert_eq!(omega_identity_check(&sec), 0.0);
}

#[test]
fn euler_lagrange_blocks() {
    let flat = evaluate_coframe(&minkowski(4).coframe(), &[0.0; 4]).unwrap();
    assert_eq!(max_abs(&el_residual_b(&SectionPoint::holonomic(&flat).unwrap())), 0.0);
    let s = schwarzschild(1.0).unwrap();
    for x in s.sample_points(5, 2) {
        let cp = evaluate_coframe(&s.coframe(), &x).unwrap();
        assert!(max_abs(&el_residual_b(&SectionPoint::holonomic(&cp).unwrap())) < 1e-8);
    }
    for (seed, m) in [(1u64, 4usize), (5, 5)] {
        let geo = FrameGeometry::at(&random_polynomial(seed, 0.1, m).unwrap().coframe(), &vec![0.3; m]).unwrap();
        let sec = SectionPoint::holonomic(&geo.coframe).unwrap();
        let b = el_residual_b(&sec);
        let g = geo.einstein_density().unwrap();
        assert!(max_abs(&g) > 1e-3);
        assert!(diff(&b, &g.iter().map(|v| EL_B_TO_EINSTEIN * v).collect::<Vec<_>>()) < 1e-9);
    }
}

#[test]
fn el_block_a_co_vanishes_with_torsion() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..50u64 {
        let m = if trial % 2 == 0 { 4 } else { 5 };
        let cp = random_cp(trial, m, 0.2);
        let hol = SectionPoint::holonomic(&cp).unwrap();
        let sec = if trial % 3 == 0 {
            let noise = SectionPoint::random(Signature::lorentzian(m), &mut rng, 0.1).connection;
            let omega: Vec<f64> = hol.connection.omega.iter().zip(&noise.omega).map(|(a, b)| a + 0.01 * b).collect();
            let sp = SpinConnectionPoint::from_raw(hol.signature, &omega, &hol.connection.domega);
            SectionPoint::free(hol.signature, hol.x.clone(), hol.e.clone(), hol.de.clone(), sp)
        } else {
            hol
        };
        let a = max_abs(&el_residual_a(&sec)) < 1e-10;
        let t = max_abs(&torsion_residual(&cp, &sec.connection)) < 1e-10;
        let c = max_abs(&contact_pullback(&sec)) < 1e-10;
        assert_eq!(a, t, "trial {trial}");
        assert_eq!(c, t, "trial {trial}");
        assert_eq!(t, trial % 3 != 0);
    }
}

use super::*;
use crate::expr::parse;
use crate::solutions;
use crate::tensor::linalg::determinant;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const X: [f64; 4] = [0.1, 0.2, -0.1, 0.15];

fn random_config(seed: u64) -> KaluzaConfig {
    solutions::random_polynomial(seed, 0.1, 4).unwrap().kaluza().unwrap()
}

fn config(tetrad: &[&str], potential: &[&str], k: f64) -> KaluzaConfig {
    let e: Vec<Vec<Expr>> = tetrad.chunks(4).map(|row| row.iter().map(|t| parse(t, 4).unwrap()).collect()).collect();
    let a: Vec<Expr> = potential.iter().map(|t| parse(t, 4).unwrap()).collect();
    KaluzaConfig::new(
        CoframeField::from_exprs(Signature::LORENTZ4, e, Params::new()),
        JetMap::from_exprs(a, Params::new()),
        k,
    )
}

const FLAT: [&str; 16] = ["1", "0", "0", "0", "0", "1", "0", "0", "0", "0", "1", "0", "0", "0", "0", "1"];

/// `e^α_a (1/|e|) ∂_b(|e| F^{ab})` from coordinate quantities only.
fn coordinate_divergence(cfg: &KaluzaConfig, x: &[f64]) -> Vec<f64> {
    let cp = crate::frame::evaluate_coframe(&cfg.tetrad, x).unwrap();
    let a = cfg.potential.eval(&jet_seed(x)).unwrap();
    let e = cp.e_dual();
    let eta = Signature::LORENTZ4;
    let mut g = vec![Dual::constant(0.0); 16];
    for p in 0..4 {
        for q in 0..4 {
            for mu in 0..4 {
                g[ix2(4, p, q)] += (e[ix2(4, mu, p)] * e[ix2(4, mu, q)]).scale(eta.diag(mu));
            }
        }
    }
    let ginv = inverse(&g, 4).unwrap();
    let mut vol = determinant(&e, 4);
    if vol.value < 0.0 {
        vol = vol.scale(-1.0);
    }
    let f = |p: usize, q: usize| a[p].partial(q) - a[q].partial(p);
    let mut div = vec![0.0; 4];
    for p in 0..4 {
        for b in 0..4 {
            let mut up = Dual::constant(0.0);
            for c in 0..4 {
                for d in 0..4 {
                    up += ginv[ix2(4, p, c)] * ginv[ix2(4, b, d)] * f(c, d);
                }
            }
            div[p] += (vol * up).grad[b];
        }
        div[p] /= vol.value;
    }
    (0..4).map(|al| (0..4).map(|p| cp.e(al, p) * div[p]).sum()).collect()
}

#[test]
fn lift_has_kaluza_form() {
    let cfg = random_config(3);
    let cp = crate::frame::evaluate_coframe(&lift_coframe(&cfg), &[0.1, 0.2, -0.1, 0.15, 7.0]).unwrap();
    let a = cfg.potential.eval(&jet_seed(&X)).unwrap();
    assert_eq!(cp.e(4, 4), 1.0);
    for i in 0..4 {
        assert_eq!(cp.e(i, 4), 0.0);
        assert!((cp.e(4, i) + cfg.k * a[i].value).abs() < 1e-15);
        assert_eq!(cp.de(i, i, 4), 0.0);
    }
}

#[test]
fn lifted_frame_ignores_fifth_coordinate() {
    let cfg = random_config(4);
    let p = cfg.at_fifth(&X, 0.0).unwrap();
    let q = cfg.at_fifth(&X, 3.7).unwrap();
    assert_eq!(p.geo5.curvature.scalar(&p.geo5.coframe), q.geo5.curvature.scalar(&q.geo5.coframe));
}

#[test]
fn uniform_electric_field_stress() {
    let e = 0.7;
    let cfg = config(&FLAT, &["0.7*x2", "0", "0", "0"], 1.0);
    let p = cfg.at(&X).unwrap();
    assert!((p.field.coordinate[ix2(4, 0, 1)] - e).abs() < 1e-15);
    let t = p.stress();
    assert!((t[0] - 0.5 * e * e).abs() < 1e-14);
    assert!((t[ix2(4, 1, 1)] - 0.5 * e * e).abs() < 1e-14);
    assert!((t[ix2(4, 2, 2)] + 0.5 * e * e).abs() < 1e-14);
    assert!(stress_trace(&p.geo4.coframe, &t).abs() < 1e-14);
}

#[test]
fn stress_is_traceless() {
    for seed in 0..10 {
        let p = random_config(seed).at(&X).unwrap();
        assert!(stress_trace(&p.geo4.coframe, &p.stress()).abs() < 1e-13);
    }
}

#[test]
fn maxwell_matches_coordinate_divergence() {
    let flat = config(&FLAT, &["0", "0.3*x3^2", "0", "0"], 1.0);
    let d = flat.at(&X).unwrap().maxwell_divergence();
    assert!((d[1].abs() - 0.6).abs() < 1e-14, "{d:?}");
    for seed in 0..10 {
        let cfg = random_config(seed);
        let frame = cfg.at(&X).unwrap().maxwell_divergence();
        let coord = coordinate_divergence(&cfg, &X);
        assert!(max_diff(&frame, &coord) < 1e-12, "{frame:?} {coord:?}");
    }
}

#[test]
fn connection_reduces_to_closed_forms() {
    for seed in 0..20 {
        let r = reduction_check(&random_config(seed), &X).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
    }
}

#[test]
fn reduction_chain_closes_off_shell() {
    for seed in 0..10 {
        let c = reduction_chain_check(&random_config(seed), &X).unwrap();
        assert!(c.max_deviation() < 1e-12, "{c:?}");
        assert!(c.einstein_residual > 1e-4 && c.maxwell_residual > 1e-4);
    }
}

#[test]
fn coupling_calibrates_on_reissner_nordstrom() {
    let rn = solutions::reissner_nordstrom_with_coupling(1.0, 0.5, 1.0).unwrap().kaluza().unwrap();
    let k = calibrate_coupling(&rn, &[0.0, 4.0, 1.2, 0.0]).unwrap();
    assert!((k - solutions::RN_COUPLING).abs() < 1e-9, "{k}");
}

#[test]
fn reissner_nordstrom_solves_reduced_system() {
    for q in [0.5, 0.3] {
        let rn = solutions::reissner_nordstrom(1.0, q).unwrap().kaluza().unwrap();
        for r in [2.5, 4.0, 9.0] {
            let p = rn.at(&[0.3, r, 1.0, 0.4]).unwrap();
            assert!(max_abs(&p.einstein_maxwell_residual()) < 1e-10);
            assert!(max_abs(&p.maxwell_residual()) < 1e-12);
        }
    }
}

#[test]
fn lifted_reissner_nordstrom_keeps_scalar_equation() {
    let rn = solutions::reissner_nordstrom(1.0, 0.5).unwrap().kaluza().unwrap();
    let d = lifted_einstein_density(&rn, &[0.0, 4.0, 1.2, 0.3]).unwrap();
    for (k, v) in d.iter().enumerate() {
        if k != ix2(5, 4, 4) {
            assert!(v.abs() < 1e-12, "{k}: {v}");
        }
    }
    assert!(d[ix2(5, 4, 4)].abs() > 1e-2);
}

#[test]
fn restricted_gauge_is_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..8 {
        let cfg = random_config(seed);
        let g = random_restricted_gauge(&mut rng, 0.2);
        let r = gauge_covariance_check(&cfg, &g, &X).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
        assert!(lift_commutation_check(&cfg, &g, &X).unwrap() < 1e-12);
    }
}

#[test]
fn fibre_shift_leaves_residuals_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = random_config(2);
    let g = fibre_shift(random_shift(&mut rng, 0.5));
    let before = cfg.at(&X).unwrap();
    let after = restricted_gauge_transform(&cfg, &g).unwrap().at(&X).unwrap();
    assert!(max_diff(&before.field.coordinate, &after.field.coordinate) < 1e-14);
    assert!(max_diff(&before.einstein_maxwell_residual(), &after.einstein_maxwell_residual()) < 1e-13);
    assert!(max_diff(&before.maxwell_residual(), &after.maxwell_residual()) < 1e-13);
    let shifted = after.a[0].value - before.a[0].value;
    let df = crate::expr::eval_value(&g.shift.diff(0), &X, &Params::new()).unwrap();
    assert!((shifted - df / cfg.k).abs() < 1e-14);
}

#[test]
fn restricted_gauge_refuses_curvilinear_charts() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut g = random_restricted_gauge(&mut rng, 0.1);
    g.coords = crate::jbundle::random_quadratic_map(4, &mut rng, 0.1);
    assert_eq!(restricted_gauge_transform(&random_config(0), &g).unwrap_err(), KaluzaError::NonAffineChart);
}

#[test]
fn euclidean_tetrad_rejected() {
    let mut cfg = random_config(0);
    cfg.tetrad = CoframeField::identity(Signature::new(0, 4));
    assert!(matches!(cfg.at(&X), Err(KaluzaError::Signature(_))));
    assert!(matches!(random_config(0).at(&[0.0; 3]), Err(KaluzaError::DimensionMismatch { got: 3 })));
}

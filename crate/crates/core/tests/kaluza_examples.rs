use vielbein::expr::{parse, Expr, Params};
use vielbein::field::{CoframeField, JetMap};
use vielbein::frame::evaluate_coframe;
use vielbein::kaluza::{field_strength, lift_coframe, reduction_check, KaluzaConfig};
use vielbein::tensor::Signature;

fn flat_with(potential: [&str; 4], k: f64) -> KaluzaConfig {
    let a: Vec<Expr> = potential.iter().map(|t| parse(t, 4).unwrap()).collect();
    KaluzaConfig::new(CoframeField::identity(Signature::LORENTZ4), JetMap::from_exprs(a, Params::new()), k)
}

#[test]
fn zero_potential_lifts_to_identity() {
    let cfg = flat_with(["0", "0", "0", "0"], 1.0);
    let cp = evaluate_coframe(&lift_coframe(&cfg), &[0.3, -0.2, 0.5, 1.0, 2.0]).unwrap();
    for mu in 0..5 {
        for i in 0..5 {
            assert_eq!(cp.e(mu, i), if mu == i { 1.0 } else { 0.0 });
        }
    }
    assert_eq!(reduction_check(&cfg, &[0.3, -0.2, 0.5, 1.0]).unwrap().max(), 0.0);
}

#[test]
fn uniform_magnetic_potential() {
    let b = 0.8;
    let cfg = flat_with(["0.8*x2", "0", "0", "0"], 1.0);
    let x = [0.1, 0.7, -0.4, 0.2];
    let cp = evaluate_coframe(&lift_coframe(&cfg), &[0.1, 0.7, -0.4, 0.2, 0.0]).unwrap();
    assert!((cp.e(4, 0) + b * 0.7).abs() < 1e-15);
    assert_eq!(cp.e(4, 4), 1.0);
    let f = field_strength(&cfg, &x).unwrap();
    assert!((f.coordinate[1] - b).abs() < 1e-15);
    assert!((f.coordinate[4] + b).abs() < 1e-15);
    assert!(reduction_check(&cfg, &x).unwrap().max() < 1e-12);
}

#[test]
fn coulomb_field_strength() {
    let cfg = flat_with(["1/x2", "0", "0", "0"], 1.0);
    let f = field_strength(&cfg, &[0.0, 2.0, 0.0, 0.0]).unwrap();
    assert!((f.coordinate[1] + 0.25).abs() < 1e-15);
}

#[test]
fn fifth_component_of_connection_is_half_coupled_field() {
    // frame F^{12} = 3 with k = 2
    let cfg = flat_with(["-3*x2", "0", "0", "0"], 2.0);
    let x = [0.0, 0.5, 0.0, 0.0];
    let p = cfg.at(&x).unwrap();
    assert!((p.field.frame_up[1] - 3.0).abs() < 1e-15);
    assert!((p.geo5.connection.omega(4, 0, 1) + 3.0).abs() < 1e-14);
}

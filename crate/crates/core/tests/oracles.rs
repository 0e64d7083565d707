use vielbein::frame::{coordinate_oracle, curvature, spin_connection, FrameGeometry};
use vielbein::solutions;

mod common;
use common::{max_diff, omega_array};

fn compare(sol: &solutions::NamedSolution, x: &[f64]) -> (f64, f64) {
    let field = sol.coframe();
    let geo = FrameGeometry::at(&field, x).unwrap();
    let oracle = coordinate_oracle(&field, x).unwrap();
    let conn = max_diff(&oracle.spin_connection(&geo.coframe), &omega_array(&geo.connection, sol.dim()));
    let riemann = max_diff(&geo.curvature.to_coordinate(&geo.coframe), &oracle.riemann);
    (conn, riemann)
}

#[test]
fn schwarzschild_matches_coordinate_oracle() {
    let s = solutions::schwarzschild(1.0).unwrap();
    for x in s.sample_points(10, 1) {
        let (c, r) = compare(&s, &x);
        assert!(c < 1e-12 && r < 1e-11, "{c} {r}");
    }
}

#[test]
fn random_frames_match_coordinate_oracle() {
    for m in 3..=5 {
        for seed in 0..20 {
            let s = solutions::random_polynomial(seed, 0.1, m).unwrap();
            for x in s.sample_points(2, seed) {
                let (c, r) = compare(&s, &x);
                assert!(c < 1e-12 && r < 1e-11, "m={m} seed={seed}: {c} {r}");
            }
        }
    }
}

#[test]
fn einstein_tensor_matches_oracle() {
    for seed in 0..10 {
        let s = solutions::random_polynomial(seed, 0.1, 4).unwrap();
        let x = s.sample_points(1, seed).remove(0);
        let field = s.coframe();
        let geo = FrameGeometry::at(&field, &x).unwrap();
        let oracle = coordinate_oracle(&field, &x).unwrap();
        let g = oracle.einstein_frame(&geo.coframe);
        let d = geo.einstein_density().unwrap();
        let scaled: Vec<f64> = g.iter().map(|v| v * geo.coframe.det()).collect();
        assert!(max_diff(&d, &scaled) < 1e-11);
    }
}

#[test]
fn kretschmann_of_schwarzschild() {
    let s = solutions::schwarzschild(1.5).unwrap();
    for r in [3.5, 5.0, 8.0, 12.0] {
        let cp = vielbein::frame::evaluate_coframe(&s.coframe(), &[0.0, r, 1.1, 0.2]).unwrap();
        let k = curvature(&spin_connection(&cp).unwrap()).kretschmann(&cp);
        let exact = 48.0 * 1.5f64.powi(2) / r.powi(6);
        assert!((k - exact).abs() < 1e-10 * exact, "{k} {exact}");
    }
}

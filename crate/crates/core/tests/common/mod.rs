#![allow(dead_code)]

use vielbein::frame::SpinConnectionPoint;

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `ω_i^{μν}` flattened `[i][μ][ν]`.
pub fn omega_array(sp: &SpinConnectionPoint, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                out.push(sp.omega(i, mu, nu));
            }
        }
    }
    out
}

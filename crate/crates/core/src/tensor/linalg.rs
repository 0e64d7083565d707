//! Square-matrix helpers over any [`Scalar`], row-major `n × n` storage.

use super::jet::Scalar;

/// LU factorisation with partial pivoting (pivot choice by value magnitude).
/// Returns `None` when a pivot vanishes exactly.
fn lu<S: Scalar>(a: &[S], n: usize) -> Option<(Vec<S>, Vec<usize>, f64)> {
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&x, &y| lu[x * n + k].value().abs().total_cmp(&lu[y * n + k].value().abs()))
            .unwrap();
        if lu[piv * n + k].value() == 0.0 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                lu.swap(k * n + c, piv * n + c);
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let d = lu[k * n + k];
        for r in k + 1..n {
            let f = lu[r * n + k] / d;
            lu[r * n + k] = f;
            for c in k + 1..n {
                let t = f * lu[k * n + c];
                lu[r * n + c] -= t;
            }
        }
    }
    Some((lu, perm, sign))
}

pub fn determinant<S: Scalar>(a: &[S], n: usize) -> S {
    match lu(a, n) {
        None => S::zero(),
        Some((lu, _, sign)) => {
            let mut d = S::constant(sign);
            for k in 0..n {
                d = d * lu[k * n + k];
            }
            d
        }
    }
}

pub fn inverse<S: Scalar>(a: &[S], n: usize) -> Option<Vec<S>> {
    let (lu, perm, _) = lu(a, n)?;
    let mut inv = vec![S::zero(); n * n];
    for col in 0..n {
        let mut x: Vec<S> = (0..n).map(|r| if perm[r] == col { S::one() } else { S::zero() }).collect();
        for r in 0..n {
            for c in 0..r {
                let t = lu[r * n + c] * x[c];
                x[r] -= t;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let t = lu[r * n + c] * x[c];
                x[r] -= t;
            }
            x[r] = x[r] / lu[r * n + r];
        }
        for r in 0..n {
            inv[r * n + col] = x[r];
        }
    }
    Some(inv)
}

pub fn matmul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut c = vec![S::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
/// The scaling is chosen from the values, so derivative parts follow exactly.
pub fn expm<S: Scalar>(a: &[S], n: usize) -> Vec<S> {
    let norm = (0..n)
        .map(|r| (0..n).map(|c| a[r * n + c].value().abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled: Vec<S> = a.iter().map(|&x| x.scale(0.5f64.powi(squarings as i32))).collect();
    let mut result: Vec<S> = (0..n * n).map(|k| if k / n == k % n { S::one() } else { S::zero() }).collect();
    let mut term = result.clone();
    for k in 1..=18 {
        term = matmul(&term, &scaled, n).into_iter().map(|x| x.scale(1.0 / k as f64)).collect();
        for (r, t) in result.iter_mut().zip(&term) {
            *r += *t;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, n);
    }
    result
}

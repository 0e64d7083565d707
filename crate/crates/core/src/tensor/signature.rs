use serde::{Deserialize, Serialize};

use super::dense::{Basis, IndexSlot, Tensor, Variance};

/// Metric signature with `p` timelike (−1) and `q` spacelike (+1) directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub const LORENTZ4: Signature = Signature { p: 1, q: 3 };
    pub const LORENTZ5: Signature = Signature { p: 1, q: 4 };

    pub const fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    /// Lorentzian signature `(1, m-1)`.
    pub fn lorentzian(m: usize) -> Self {
        Self { p: 1, q: m - 1 }
    }

    pub const fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal entry `η_{μμ}`.
    #[inline]
    pub fn diag(&self, mu: usize) -> f64 {
        if mu < self.p {
            -1.0
        } else {
            1.0
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|mu| self.diag(mu)).collect()
    }
}

/// `η_{μν}` as a frame tensor with two lower indices.
pub fn eta(sig: Signature) -> Tensor {
    let m = sig.dim();
    let lower = IndexSlot::new(Variance::Lower, Basis::Frame, m);
    let mut t = Tensor::zeros(vec![lower, lower]);
    for mu in 0..m {
        t.set(&[mu, mu], sig.diag(mu));
    }
    t
}

/// `η^{μν}`; numerically identical to [`eta`] but carrying upper slots.
pub fn eta_inverse(sig: Signature) -> Tensor {
    let m = sig.dim();
    let upper = IndexSlot::new(Variance::Upper, Basis::Frame, m);
    let mut t = Tensor::zeros(vec![upper, upper]);
    for mu in 0..m {
        t.set(&[mu, mu], sig.diag(mu));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(t: &Tensor) -> Vec<f64> {
        let m = t.slots()[0].extent;
        (0..m).map(|i| t.get(&[i, i])).collect()
    }

    #[test]
    fn lorentz_four() {
        assert_eq!(diag_of(&eta(Signature::new(1, 3))), vec![-1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn lorentz_five_has_spacelike_fifth_direction() {
        assert_eq!(diag_of(&eta(Signature::new(1, 4))), vec![-1.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn euclidean_plane() {
        let t = eta(Signature::new(0, 2));
        assert_eq!(t.get(&[0, 0]), 1.0);
        assert_eq!(t.get(&[1, 1]), 1.0);
        assert_eq!(t.get(&[0, 1]), 0.0);
    }

    #[test]
    fn eta_is_its_own_inverse() {
        for m in 1..=8 {
            for p in 0..=m {
                let sig = Signature::new(p, m - p);
                let prod = eta_inverse(sig).outer(&eta(sig)).contract(&[(1, 2)]).unwrap();
                for i in 0..m {
                    for j in 0..m {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert_eq!(prod.get(&[i, j]), expect);
                    }
                }
            }
        }
    }
}

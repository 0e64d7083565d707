//! Small dense tensors with index-variance bookkeeping.

use thiserror::Error;

use super::epsilon::EpsilonSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    Upper,
    Lower,
}

/// Whether an index refers to the coordinate basis or to the orthonormal frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Coordinate,
    Frame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexSlot {
    pub variance: Variance,
    pub basis: Basis,
    pub extent: usize,
}

impl IndexSlot {
    pub const fn new(variance: Variance, basis: Basis, extent: usize) -> Self {
        Self { variance, basis, extent }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("contraction slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slot {slot} appears in more than one contraction pair")]
    SlotReused { slot: usize },
    #[error("cannot contract {a:?} with {b:?}: need one upper and one lower index of the same basis and extent")]
    Mismatch { a: IndexSlot, b: IndexSlot },
}

/// Row-major dense tensor of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    slots: Vec<IndexSlot>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(slots: Vec<IndexSlot>) -> Self {
        let len = slots.iter().map(|s| s.extent).product();
        Self { slots, data: vec![0.0; len] }
    }

    pub fn scalar(v: f64) -> Self {
        Self { slots: Vec::new(), data: vec![v] }
    }

    /// The Levi-Civita permutation symbol with all slots of the given kind.
    pub fn epsilon(m: usize, variance: Variance, basis: Basis) -> Self {
        let eps = EpsilonSymbol::get(m);
        let slot = IndexSlot::new(variance, basis, m);
        let mut t = Tensor::zeros(vec![slot; m]);
        for (perm, sign) in eps.permutations() {
            t.set(perm, *sign);
        }
        t
    }

    pub fn slots(&self) -> &[IndexSlot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.slots.len(), "index arity mismatch");
        idx.iter().zip(&self.slots).fold(0, |acc, (&i, s)| {
            assert!(i < s.extent, "index {i} out of range {}", s.extent);
            acc * s.extent + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn outer(&self, other: &Tensor) -> Tensor {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Tensor { slots, data }
    }

    /// Sums over each `(a, b)` slot pair simultaneously. Each pair must join
    /// one upper and one lower slot of equal basis and extent.
    pub fn contract(&self, pairs: &[(usize, usize)]) -> Result<Tensor, TensorError> {
        let rank = self.rank();
        let mut used = vec![false; rank];
        for &(a, b) in pairs {
            for s in [a, b] {
                if s >= rank {
                    return Err(TensorError::SlotOutOfRange { slot: s, rank });
                }
                if used[s] {
                    return Err(TensorError::SlotReused { slot: s });
                }
                used[s] = true;
            }
            let (sa, sb) = (self.slots[a], self.slots[b]);
            if sa.variance == sb.variance || sa.basis != sb.basis || sa.extent != sb.extent {
                return Err(TensorError::Mismatch { a: sa, b: sb });
            }
        }
        let free: Vec<usize> = (0..rank).filter(|s| !used[*s]).collect();
        let out_slots: Vec<IndexSlot> = free.iter().map(|&s| self.slots[s]).collect();
        let mut out = Tensor::zeros(out_slots.clone());
        let sum_extents: Vec<usize> = pairs.iter().map(|&(a, _)| self.slots[a].extent).collect();

        let mut full = vec![0usize; rank];
        for_each_index(&out_slots.iter().map(|s| s.extent).collect::<Vec<_>>(), |fi| {
            for (k, &s) in free.iter().enumerate() {
                full[s] = fi[k];
            }
            let mut acc = 0.0;
            for_each_index(&sum_extents, |si| {
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    full[a] = si[k];
                    full[b] = si[k];
                }
                acc += self.get(&full);
            });
            out.set(fi, acc);
        });
        Ok(out)
    }
}

/// Contracts `a ⊗ b` over the given pairs, numbering `b`'s slots after `a`'s.
pub fn epsilon_contract(a: &Tensor, b: &Tensor, pattern: &[(usize, usize)]) -> Result<Tensor, TensorError> {
    a.outer(b).contract(pattern)
}

/// Visits every multi-index in the box given by `extents` in row-major order.
pub fn for_each_index(extents: &[usize], mut f: impl FnMut(&[usize])) {
    if extents.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; extents.len()];
    loop {
        f(&idx);
        let mut k = extents.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < extents[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(m: usize) -> IndexSlot {
        IndexSlot::new(Variance::Upper, Basis::Frame, m)
    }

    #[test]
    fn epsilon_outer_at_m2() {
        let eu = Tensor::epsilon(2, Variance::Upper, Basis::Frame);
        let el = Tensor::epsilon(2, Variance::Lower, Basis::Frame);
        let t = epsilon_contract(&eu, &el, &[]).unwrap();
        assert_eq!(t.get(&[0, 1, 0, 1]), 1.0);
        assert_eq!(t.get(&[1, 0, 0, 1]), -1.0);
    }

    #[test]
    fn contraction_rejects_same_variance() {
        let a = Tensor::zeros(vec![up(3)]);
        let b = Tensor::zeros(vec![up(3)]);
        assert!(matches!(epsilon_contract(&a, &b, &[(0, 1)]), Err(TensorError::Mismatch { .. })));
    }

    #[test]
    fn contraction_rejects_basis_or_extent_mismatch() {
        let a = Tensor::zeros(vec![up(3)]);
        let b = Tensor::zeros(vec![IndexSlot::new(Variance::Lower, Basis::Coordinate, 3)]);
        assert!(epsilon_contract(&a, &b, &[(0, 1)]).is_err());
        let c = Tensor::zeros(vec![IndexSlot::new(Variance::Lower, Basis::Frame, 4)]);
        assert!(epsilon_contract(&a, &c, &[(0, 1)]).is_err());
        assert_eq!(
            epsilon_contract(&a, &c, &[(0, 7)]),
            Err(TensorError::SlotOutOfRange { slot: 7, rank: 2 })
        );
    }

    #[test]
    fn epsilon_with_symmetric_pair_vanishes() {
        // ε^{ijk} S_{jk} = 0 for symmetric S.
        let eps = Tensor::epsilon(3, Variance::Upper, Basis::Frame);
        let low = IndexSlot::new(Variance::Lower, Basis::Frame, 3);
        let mut s = Tensor::zeros(vec![low, low]);
        let vals = [[1.0, 2.0, -0.5], [2.0, 3.0, 0.7], [-0.5, 0.7, 0.1]];
        for i in 0..3 {
            for j in 0..3 {
                s.set(&[i, j], vals[i][j]);
            }
        }
        let r = epsilon_contract(&eps, &s, &[(1, 3), (2, 4)]).unwrap();
        assert!(r.data().iter().all(|&v| v == 0.0));
    }
}

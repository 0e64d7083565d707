//! Levi-Civita permutation symbols and the double-ε contractions built from them.

use std::sync::OnceLock;

/// Largest dimension for which ε tables are generated.
pub const MAX_EPSILON_DIM: usize = 8;

/// Sign table of the permutation symbol in `m` dimensions, plus the list of
/// its nonzero entries.
#[derive(Debug)]
pub struct EpsilonSymbol {
    m: usize,
    table: Vec<i8>,
    perms: Vec<(Vec<usize>, f64)>,
}

static TABLES: [OnceLock<EpsilonSymbol>; MAX_EPSILON_DIM + 1] = [const { OnceLock::new() }; MAX_EPSILON_DIM + 1];

impl EpsilonSymbol {
    /// Shared table for dimension `m` (built on first use).
    pub fn get(m: usize) -> &'static EpsilonSymbol {
        assert!((1..=MAX_EPSILON_DIM).contains(&m), "epsilon dimension {m} unsupported");
        TABLES[m].get_or_init(|| EpsilonSymbol::build(m))
    }

    fn build(m: usize) -> Self {
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (0..m).collect();
        permute(&mut current, 0, 1.0, &mut perms);
        perms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut table = vec![0i8; m.pow(m as u32)];
        for (p, s) in &perms {
            table[flat(p, m)] = *s as i8;
        }
        Self { m, table, perms }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// `ε(i_1, …, i_m)` with zero-based indices; 0 on any repeat.
    pub fn sign(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.m);
        self.table[flat(idx, self.m)] as f64
    }

    /// All permutations of `0..m` with their signs, in lexicographic order.
    pub fn permutations(&self) -> impl Iterator<Item = (&[usize], &f64)> {
        self.perms.iter().map(|(p, s)| (p.as_slice(), s))
    }
}

fn flat(idx: &[usize], m: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * m + i)
}

fn permute(v: &mut Vec<usize>, k: usize, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
    if k == v.len() {
        out.push((v.clone(), sign));
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, if i == k { sign } else { -sign }, out);
        v.swap(k, i);
    }
}

/// Visits the nonzero terms of
/// `ε^{q_1 … q_n t_1 … t_r} ε_{μ_1 … μ_n s_1 … s_r} e^{μ_1}_{q_1} ⋯ e^{μ_n}_{q_n}`
/// where the first `n_frames` slot pairs are saturated by the coframe `e`
/// (`e[μ][q]`, row-major `m × m`). The callback receives the remaining upper
/// (coordinate) slots `t`, lower (frame) slots `s` and the accumulated weight.
pub fn for_each_saturated(e: &[f64], m: usize, n_frames: usize, mut f: impl FnMut(&[usize], &[usize], f64)) {
    assert!(n_frames <= m);
    let eps = EpsilonSymbol::get(m);
    for (up, su) in eps.permutations() {
        for (lo, sl) in eps.permutations() {
            let mut w = su * sl;
            for a in 0..n_frames {
                w *= e[lo[a] * m + up[a]];
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                f(&up[n_frames..], &lo[n_frames..], w);
            }
        }
    }
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

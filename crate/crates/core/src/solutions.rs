//! Exact and randomized field configurations used as fixtures.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse, Expr, Params};
use crate::field::{CoframeField, JetMap};
use crate::kaluza::KaluzaConfig;
use crate::tensor::Signature;

/// Coupling `k` for which the Reissner–Nordström potential `A_1 = Q/x²`
/// solves the reduced Einstein–Maxwell system. Obtained once with
/// [`crate::kaluza::calibrate_coupling`] at `M = 1, Q = 0.5, r = 4`.
pub const RN_COUPLING: f64 = 2.0;

/// Margin kept away from horizons and coordinate axes.
pub const DOMAIN_MARGIN: f64 = 0.5;
const AXIS_MARGIN: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionError {
    #[error("unknown solution `{0}`")]
    Unknown(String),
    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParameters { name: String, reason: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolutionFlags {
    pub vacuum: bool,
    pub einstein_maxwell: bool,
    pub flat: bool,
    pub maxwell: bool,
}

/// Open interval constraint on one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub coord: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug)]
pub struct NamedSolution {
    pub name: String,
    pub params: Params,
    pub signature: Signature,
    pub tetrad: Vec<Vec<Expr>>,
    pub potential: Option<Vec<Expr>>,
    pub coupling: Option<f64>,
    pub domain: Vec<Bound>,
    pub flags: SolutionFlags,
}

impl NamedSolution {
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn coframe(&self) -> CoframeField {
        CoframeField::from_exprs(self.signature, self.tetrad.clone(), self.params.clone())
    }

    /// Kaluza configuration, when the solution carries a potential.
    pub fn kaluza(&self) -> Option<KaluzaConfig> {
        let a = self.potential.as_ref()?;
        let k = self.coupling?;
        Some(KaluzaConfig::new(self.coframe(), JetMap::from_exprs(a.clone(), self.params.clone()), k))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.domain.iter().all(|b| x[b.coord] > b.min && x[b.coord] < b.max)
    }

    /// Sampling box for coordinate `c`: the domain bound where one exists, else `[-1, 1]`.
    pub fn sample_range(&self, c: usize) -> (f64, f64) {
        self.domain
            .iter()
            .filter(|b| b.coord == c)
            .fold((-1.0f64, 1.0f64), |_, b| {
                let lo = b.min;
                let hi = if b.max.is_finite() { b.max } else { lo.max(0.0) + 10.0 };
                (lo, hi)
            })
    }

    /// `n` points drawn uniformly from the interior of the sampling box.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..self.dim())
                    .map(|c| {
                        let (lo, hi) = self.sample_range(c);
                        let t: f64 = rng.gen_range(0.05..0.95);
                        lo + t * (hi - lo)
                    })
                    .collect()
            })
            .collect()
    }
}

fn exprs(rows: &[&[&str]], dim: usize) -> Vec<Vec<Expr>> {
    rows.iter()
        .map(|r| r.iter().map(|s| parse(s, dim).expect("built-in expression parses")).collect())
        .collect()
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn identity_rows(m: usize) -> Vec<Vec<Expr>> {
    (0..m)
        .map(|a| (0..m).map(|b| Expr::num(if a == b { 1.0 } else { 0.0 })).collect())
        .collect()
}

/// Flat space in Cartesian coordinates with Lorentzian signature `(1, m−1)`.
pub fn minkowski(m: usize) -> NamedSolution {
    NamedSolution {
        name: "minkowski".into(),
        params: Params::new(),
        signature: Signature::lorentzian(m),
        tetrad: identity_rows(m),
        potential: None,
        coupling: None,
        domain: Vec::new(),
        flags: SolutionFlags { vacuum: true, flat: true, ..Default::default() },
    }
}

/// Flat space in accelerated coordinates: `e¹ = x² dx¹`.
pub fn rindler() -> NamedSolution {
    let mut tetrad = identity_rows(4);
    tetrad[0][0] = Expr::coord(1);
    NamedSolution {
        name: "rindler".into(),
        params: Params::new(),
        signature: Signature::LORENTZ4,
        tetrad,
        potential: None,
        coupling: None,
        domain: vec![Bound { coord: 1, min: 0.1, max: f64::INFINITY }],
        flags: SolutionFlags { vacuum: true, flat: true, ..Default::default() },
    }
}

fn static_spherical_domain(r_min: f64) -> Vec<Bound> {
    vec![
        Bound { coord: 1, min: r_min, max: f64::INFINITY },
        Bound { coord: 2, min: AXIS_MARGIN, max: PI - AXIS_MARGIN },
    ]
}

/// Schwarzschild in the static chart `(t, r, θ, φ) = (x1, x2, x3, x4)`.
pub fn schwarzschild(mass: f64) -> Result<NamedSolution, SolutionError> {
    if !(mass > 0.0) {
        return Err(SolutionError::InvalidParameters { name: "schwarzschild".into(), reason: "M must be positive".into() });
    }
    Ok(NamedSolution {
        name: "schwarzschild".into(),
        params: params(&[("M", mass)]),
        signature: Signature::LORENTZ4,
        tetrad: exprs(
            &[
                &["sqrt(1 - 2*M/x2)", "0", "0", "0"],
                &["0", "1/sqrt(1 - 2*M/x2)", "0", "0"],
                &["0", "0", "x2", "0"],
                &["0", "0", "0", "x2*sin(x3)"],
            ],
            4,
        ),
        potential: None,
        coupling: None,
        domain: static_spherical_domain(2.0 * mass + DOMAIN_MARGIN),
        flags: SolutionFlags { vacuum: true, ..Default::default() },
    })
}

/// Reissner–Nordström with Coulomb potential `A_1 = Q/x²` and coupling [`RN_COUPLING`].
pub fn reissner_nordstrom(mass: f64, charge: f64) -> Result<NamedSolution, SolutionError> {
    reissner_nordstrom_with_coupling(mass, charge, RN_COUPLING)
}

pub fn reissner_nordstrom_with_coupling(mass: f64, charge: f64, k: f64) -> Result<NamedSolution, SolutionError> {
    let invalid = |reason: &str| SolutionError::InvalidParameters { name: "reissner_nordstrom".into(), reason: reason.into() };
    if !(mass > 0.0) {
        return Err(invalid("M must be positive"));
    }
    if charge * charge > mass * mass {
        return Err(invalid("need M² ≥ Q² for an outer horizon"));
    }
    let r_plus = mass + (mass * mass - charge * charge).sqrt();
    Ok(NamedSolution {
        name: "reissner_nordstrom".into(),
        params: params(&[("M", mass), ("Q", charge)]),
        signature: Signature::LORENTZ4,
        tetrad: exprs(
            &[
                &["sqrt(1 - 2*M/x2 + Q^2/x2^2)", "0", "0", "0"],
                &["0", "1/sqrt(1 - 2*M/x2 + Q^2/x2^2)", "0", "0"],
                &["0", "0", "x2", "0"],
                &["0", "0", "0", "x2*sin(x3)"],
            ],
            4,
        ),
        potential: Some(exprs(&[&["Q/x2", "0", "0", "0"]], 4).remove(0)),
        coupling: Some(k),
        domain: static_spherical_domain(r_plus + DOMAIN_MARGIN),
        flags: SolutionFlags { einstein_maxwell: true, maxwell: true, ..Default::default() },
    })
}

/// Minkowski with the uniform field `A_1 = B x²` (so `F_{12} = B`).
/// Solves Maxwell's equations but not the coupled system.
pub fn constant_f(b: f64) -> NamedSolution {
    NamedSolution {
        name: "constant_f".into(),
        params: params(&[("B", b)]),
        signature: Signature::LORENTZ4,
        tetrad: identity_rows(4),
        potential: Some(exprs(&[&["B*x2", "0", "0", "0"]], 4).remove(0)),
        coupling: Some(1.0),
        domain: Vec::new(),
        flags: SolutionFlags { flat: true, maxwell: true, ..Default::default() },
    }
}

/// Static non-vacuum frame `e¹ = (1 + a (x²)²) dx¹`.
pub fn warped_static(a: f64) -> NamedSolution {
    let mut tetrad = identity_rows(4);
    tetrad[0][0] = parse("1 + a*x2^2", 4).unwrap();
    NamedSolution {
        name: "warped_static".into(),
        params: params(&[("a", a)]),
        signature: Signature::LORENTZ4,
        tetrad,
        potential: None,
        coupling: None,
        domain: Vec::new(),
        flags: SolutionFlags::default(),
    }
}

fn random_polynomial_expr(rng: &mut ChaCha8Rng, m: usize, amplitude: f64) -> Expr {
    const TERMS: usize = 4;
    let mut coeffs: Vec<f64> = (0..TERMS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm: f64 = coeffs.iter().map(|c: &f64| c.abs()).sum();
    coeffs.iter_mut().for_each(|c| *c *= amplitude / norm);
    let mut acc: Option<Expr> = None;
    for (t, c) in coeffs.into_iter().enumerate() {
        // degrees 1, 2, 3, 2 keep second derivatives nonzero in every entry
        let degree = [1, 2, 3, 2][t];
        let mut term = Expr::num(c);
        for _ in 0..degree {
            term = term * Expr::coord(rng.gen_range(0..m));
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.unwrap()
}

/// Identity plus bounded polynomial perturbations of degree ≤ 3; on the box
/// `[-1, 1]^m` every perturbation entry is bounded by `amplitude`. In four
/// dimensions a random potential and coupling are attached as well.
pub fn random_polynomial(seed: u64, amplitude: f64, m: usize) -> Result<NamedSolution, SolutionError> {
    if !(amplitude > 0.0 && amplitude * m as f64 <= 0.5) {
        return Err(SolutionError::InvalidParameters {
            name: "random_polynomial".into(),
            reason: format!("amplitude must lie in (0, {}]", 0.5 / m as f64),
        });
    }
    if !(2..=5).contains(&m) {
        return Err(SolutionError::InvalidParameters { name: "random_polynomial".into(), reason: "dimension must be 2..=5".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tetrad = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let p = random_polynomial_expr(&mut rng, m, amplitude);
                    if a == b {
                        Expr::num(1.0) + p
                    } else {
                        p
                    }
                })
                .collect()
        })
        .collect();
    let (potential, coupling) = if m == 4 {
        let a = (0..4).map(|_| random_polynomial_expr(&mut rng, 4, 0.5)).collect();
        (Some(a), Some(rng.gen_range(0.5..2.0)))
    } else {
        (None, None)
    };
    Ok(NamedSolution {
        name: "random_polynomial".into(),
        params: params(&[("seed", seed as f64), ("amplitude", amplitude)]),
        signature: Signature::lorentzian(m),
        tetrad,
        potential,
        coupling,
        domain: (0..m).map(|c| Bound { coord: c, min: -1.0, max: 1.0 }).collect(),
        flags: SolutionFlags::default(),
    })
}

/// Names accepted by [`lookup`], with their parameters.
pub const CATALOGUE: &[(&str, &str)] = &[
    ("minkowski", "dim (default 4)"),
    ("rindler", "-"),
    ("schwarzschild", "M > 0"),
    ("reissner_nordstrom", "M > 0, Q with Q² ≤ M²; optional k (default calibrated)"),
    ("constant_f", "B"),
    ("warped_static", "a"),
    ("random_polynomial", "amplitude, dim (default 4); seed from the job"),
];

/// Resolves a solution by name and parameter map.
pub fn lookup(name: &str, p: &Params, seed: u64) -> Result<NamedSolution, SolutionError> {
    let get = |key: &str, default: Option<f64>| -> Result<f64, SolutionError> {
        p.get(key).copied().or(default).ok_or_else(|| SolutionError::InvalidParameters {
            name: name.into(),
            reason: format!("missing parameter `{key}`"),
        })
    };
    let dim = |default: f64| -> Result<usize, SolutionError> {
        let d = get("dim", Some(default))?;
        if d.fract() != 0.0 || !(3.0..=5.0).contains(&d) {
            return Err(SolutionError::InvalidParameters { name: name.into(), reason: "dim must be 3, 4 or 5".into() });
        }
        Ok(d as usize)
    };
    match name {
        "minkowski" => Ok(minkowski(dim(4.0)?)),
        "rindler" => Ok(rindler()),
        "schwarzschild" => schwarzschild(get("M", None)?),
        "reissner_nordstrom" => reissner_nordstrom_with_coupling(get("M", None)?, get("Q", None)?, get("k", Some(RN_COUPLING))?),
        "constant_f" => Ok(constant_f(get("B", None)?)),
        "warped_static" => Ok(warped_static(get("a", Some(0.1))?)),
        "random_polynomial" => random_polynomial(seed, get("amplitude", Some(0.1))?, dim(4.0)?),
        other => Err(SolutionError::Unknown(other.into())),
    }
}

//! Pointwise frame geometry: metric, spin connection, torsion closure,
//! curvature and the vielbein Einstein density, plus a coordinate oracle.
//!
//! Index conventions (zero-based throughout):
//! - `e[μ][i] = e^μ_i`, `einv[i][μ] = e^i_μ`;
//! - `de[μ][i][j] = ∂_j e^μ_i`, `dde[μ][i][j][k] = ∂_k ∂_j e^μ_i`;
//! - `E[μ][i][j] = ½(∂_j e^μ_i − ∂_i e^μ_j)`;
//! - `ω[i][μ][ν] = ω_i^{μν}` (both frame indices raised with η);
//! - `R[j][i][λ][σ] = R_{ji}^{λσ}`.
//!
//! Latin (coordinate) indices move with `g = η_{μν} e^μ ⊗ e^ν`, Greek
//! (frame) indices with η.

use thiserror::Error;

use crate::expr::EvalError;
use crate::field::CoframeField;
use crate::tensor::linalg::{determinant, inverse};
use crate::tensor::{factorial, for_each_saturated, jet_seed, Dual, Jet2, Scalar, Signature};

/// Relative determinant threshold below which a frame counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("evaluation failed at x = {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("degenerate frame at x = {point:?}: |det e| = {det:e} below {threshold:e} of row-norm scale")]
    Degenerate { point: Vec<f64>, det: f64, threshold: f64 },
    #[error("point has {got} coordinates, field dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("einstein density requires dimension at least 3, got {0}")]
    DimensionTooSmall(usize),
}

#[inline]
pub(crate) fn ix2(m: usize, a: usize, b: usize) -> usize {
    a * m + b
}
#[inline]
pub(crate) fn ix3(m: usize, a: usize, b: usize, c: usize) -> usize {
    (a * m + b) * m + c
}
#[inline]
pub(crate) fn ix4(m: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * m + b) * m + c) * m + d
}

/// Values and first/second partials of a coframe at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct CoframePoint {
    pub signature: Signature,
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub de: Vec<f64>,
    pub dde: Vec<f64>,
    pub einv: Vec<f64>,
    pub big_e: Vec<f64>,
}

impl CoframePoint {
    /// Assembles a point from frame values and derivative blocks, checking
    /// nondegeneracy and filling the inverse and the `E` block.
    pub fn from_blocks(
        signature: Signature,
        x: Vec<f64>,
        e: Vec<f64>,
        de: Vec<f64>,
        dde: Vec<f64>,
    ) -> Result<Self, FrameError> {
        let m = signature.dim();
        assert_eq!(e.len(), m * m);
        assert_eq!(de.len(), m * m * m);
        assert_eq!(dde.len(), m * m * m * m);
        let scale: f64 = (0..m)
            .map(|mu| (0..m).map(|i| e[ix2(m, mu, i)].powi(2)).sum::<f64>().sqrt())
            .product();
        let det = determinant(&e, m);
        let threshold = DEGENERACY_THRESHOLD * scale;
        if !(det.abs() >= threshold) || scale == 0.0 {
            return Err(FrameError::Degenerate { point: x, det, threshold });
        }
        let einv = inverse(&e, m).ok_or(FrameError::Degenerate { point: x.clone(), det, threshold })?;
        let mut big_e = vec![0.0; m * m * m];
        for mu in 0..m {
            for i in 0..m {
                for j in 0..m {
                    big_e[ix3(m, mu, i, j)] = 0.5 * (de[ix3(m, mu, i, j)] - de[ix3(m, mu, j, i)]);
                }
            }
        }
        Ok(Self { signature, x, e, de, dde, einv, big_e })
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    #[inline]
    pub fn e(&self, mu: usize, i: usize) -> f64 {
        self.e[ix2(self.dim(), mu, i)]
    }
    #[inline]
    pub fn einv(&self, i: usize, mu: usize) -> f64 {
        self.einv[ix2(self.dim(), i, mu)]
    }
    /// `∂_j e^μ_i`
    #[inline]
    pub fn de(&self, mu: usize, i: usize, j: usize) -> f64 {
        self.de[ix3(self.dim(), mu, i, j)]
    }
    /// `E^μ_{ij}`
    #[inline]
    pub fn big_e(&self, mu: usize, i: usize, j: usize) -> f64 {
        self.big_e[ix3(self.dim(), mu, i, j)]
    }

    pub fn det(&self) -> f64 {
        determinant(&self.e, self.dim())
    }

    /// `e^μ_i` as first-order duals (value plus gradient).
    pub(crate) fn e_dual(&self) -> Vec<Dual> {
        let m = self.dim();
        (0..m * m)
            .map(|k| Dual::from_parts(self.e[k], &self.de[k * m..(k + 1) * m]))
            .collect()
    }

    /// `∂_j e^μ_i` as first-order duals.
    pub(crate) fn de_dual(&self) -> Vec<Dual> {
        let m = self.dim();
        (0..m * m * m)
            .map(|k| Dual::from_parts(self.de[k], &self.dde[k * m..(k + 1) * m]))
            .collect()
    }
}

/// Evaluates the coframe and its first two derivatives at `point`.
pub fn evaluate_coframe(field: &CoframeField, point: &[f64]) -> Result<CoframePoint, FrameError> {
    let m = field.dim();
    if point.len() != m {
        return Err(FrameError::DimensionMismatch { expected: m, got: point.len() });
    }
    let jets = field
        .eval_jets(&jet_seed(point))
        .map_err(|source| FrameError::Eval { point: point.to_vec(), source })?;
    coframe_point_from_jets(field.signature(), point.to_vec(), &jets)
}

/// Builds a [`CoframePoint`] from `m²` entry jets (`μ` major).
pub fn coframe_point_from_jets(signature: Signature, x: Vec<f64>, jets: &[Jet2]) -> Result<CoframePoint, FrameError> {
    let m = signature.dim();
    let mut e = vec![0.0; m * m];
    let mut de = vec![0.0; m * m * m];
    let mut dde = vec![0.0; m * m * m * m];
    for mu in 0..m {
        for i in 0..m {
            let jet = &jets[ix2(m, mu, i)];
            e[ix2(m, mu, i)] = jet.value;
            for j in 0..m {
                de[ix3(m, mu, i, j)] = jet.grad[j];
                for k in 0..m {
                    dde[ix4(m, mu, i, j, k)] = jet.hess[j][k];
                }
            }
        }
    }
    CoframePoint::from_blocks(signature, x, e, de, dde)
}

/// `g_ij = η_{μν} e^μ_i e^ν_j`.
pub fn metric(cp: &CoframePoint) -> Vec<f64> {
    let m = cp.dim();
    let sig = cp.signature;
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v: f64 = (0..m).map(|mu| sig.diag(mu) * cp.e(mu, i) * cp.e(mu, j)).sum();
            g[ix2(m, i, j)] = v;
            g[ix2(m, j, i)] = v;
        }
    }
    g
}

/// `g^{ij} = η^{μν} e^i_μ e^j_ν`.
pub fn inverse_metric(cp: &CoframePoint) -> Vec<f64> {
    let m = cp.dim();
    let sig = cp.signature;
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v: f64 = (0..m).map(|mu| sig.diag(mu) * cp.einv(i, mu) * cp.einv(j, mu)).sum();
            g[ix2(m, i, j)] = v;
            g[ix2(m, j, i)] = v;
        }
    }
    g
}

/// `Σ^p_{ji} = e^p_λ E^λ_{ij}`, stored as `[p][j][i]`.
pub fn sigma(cp: &CoframePoint) -> Vec<f64> {
    sigma_generic(cp.dim(), &cp.einv, &big_e_generic(cp.dim(), &cp.de))
}

fn big_e_generic<S: Scalar>(m: usize, de: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); m * m * m];
    for mu in 0..m {
        for i in 0..m {
            for j in 0..m {
                out[ix3(m, mu, i, j)] = (de[ix3(m, mu, i, j)] - de[ix3(m, mu, j, i)]).scale(0.5);
            }
        }
    }
    out
}

fn sigma_generic<S: Scalar>(m: usize, einv: &[S], big_e: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); m * m * m];
    for p in 0..m {
        for j in 0..m {
            for i in 0..m {
                let mut acc = S::zero();
                for l in 0..m {
                    acc += einv[ix2(m, p, l)] * big_e[ix3(m, l, i, j)];
                }
                out[ix3(m, p, j, i)] = acc;
            }
        }
    }
    out
}

/// Spin connection `ω_i^{μν}` from the coframe and its first derivatives,
/// following `ω_i^μ_ν = e^μ_p (Σ^p_{ji} − Σ_j^p_i + Σ_{ij}^p) e^j_ν`.
/// Raising/lowering acts on the displayed slots in place.
pub(crate) fn spin_connection_generic<S: Scalar>(sig: Signature, e: &[S], de: &[S]) -> Option<Vec<S>> {
    let m = sig.dim();
    let einv = inverse(e, m)?;
    let mut g = vec![S::zero(); m * m];
    let mut ginv = vec![S::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut a = S::zero();
            let mut b = S::zero();
            for mu in 0..m {
                let s = sig.diag(mu);
                a += (e[ix2(m, mu, i)] * e[ix2(m, mu, j)]).scale(s);
                b += (einv[ix2(m, i, mu)] * einv[ix2(m, j, mu)]).scale(s);
            }
            g[ix2(m, i, j)] = a;
            ginv[ix2(m, i, j)] = b;
        }
    }
    let sig_up = sigma_generic(m, &einv, &big_e_generic(m, de));
    // Σ_{a}{}^{p}{}_{c} = g_{ab} Σ^b_{dc} g^{dp}
    let mut lowered = vec![S::zero(); m * m * m];
    for b in 0..m {
        for d in 0..m {
            for c in 0..m {
                let s = sig_up[ix3(m, b, d, c)];
                for a in 0..m {
                    lowered[ix3(m, a, d, c)] += g[ix2(m, a, b)] * s;
                }
            }
        }
    }
    let mut mixed = vec![S::zero(); m * m * m]; // [a][p][c]
    for a in 0..m {
        for d in 0..m {
            for c in 0..m {
                let s = lowered[ix3(m, a, d, c)];
                for p in 0..m {
                    mixed[ix3(m, a, p, c)] += s * ginv[ix2(m, d, p)];
                }
            }
        }
    }
    // Σ_{ab}{}^p = g_{ac} Σ^c_{bd} g^{dp} = lowered first slot, raised third
    let mut last_up = vec![S::zero(); m * m * m]; // [a][b][p]
    for a in 0..m {
        for b in 0..m {
            for d in 0..m {
                let s = lowered[ix3(m, a, b, d)];
                for p in 0..m {
                    last_up[ix3(m, a, b, p)] += s * ginv[ix2(m, d, p)];
                }
            }
        }
    }
    let mut omega = vec![S::zero(); m * m * m];
    for i in 0..m {
        // bracket[p][j] = Σ^p_{ji} − Σ_j^p_i + Σ_{ij}^p
        let mut bracket = vec![S::zero(); m * m];
        for p in 0..m {
            for j in 0..m {
                bracket[ix2(m, p, j)] =
                    sig_up[ix3(m, p, j, i)] - mixed[ix3(m, j, p, i)] + last_up[ix3(m, i, j, p)];
            }
        }
        let mut w = vec![S::zero(); m * m]; // ω_i^μ_ν
        for mu in 0..m {
            for j in 0..m {
                let mut ep = S::zero();
                for p in 0..m {
                    ep += e[ix2(m, mu, p)] * bracket[ix2(m, p, j)];
                }
                for nu in 0..m {
                    w[ix2(m, mu, nu)] += ep * einv[ix2(m, j, nu)];
                }
            }
        }
        for mu in 0..m {
            for nu in 0..m {
                let a = w[ix2(m, mu, nu)].scale(sig.diag(nu));
                let b = w[ix2(m, nu, mu)].scale(sig.diag(mu));
                omega[ix3(m, i, mu, nu)] = (a - b).scale(0.5);
            }
        }
    }
    Some(omega)
}

/// `ω_i^{μν}` and its partials at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinConnectionPoint {
    pub signature: Signature,
    /// `[i][μ][ν]`
    pub omega: Vec<f64>,
    /// `[i][μ][ν][j] = ∂_j ω_i^{μν}`
    pub domega: Vec<f64>,
}

impl SpinConnectionPoint {
    /// Builds a connection from raw arrays, antisymmetrising in `(μ, ν)`.
    pub fn from_raw(signature: Signature, omega: &[f64], domega: &[f64]) -> Self {
        let m = signature.dim();
        let mut o = vec![0.0; m * m * m];
        let mut d = vec![0.0; m * m * m * m];
        for i in 0..m {
            for mu in 0..m {
                for nu in 0..m {
                    o[ix3(m, i, mu, nu)] = 0.5 * (omega[ix3(m, i, mu, nu)] - omega[ix3(m, i, nu, mu)]);
                    for j in 0..m {
                        d[ix4(m, i, mu, nu, j)] = 0.5 * (domega[ix4(m, i, mu, nu, j)] - domega[ix4(m, i, nu, mu, j)]);
                    }
                }
            }
        }
        Self { signature, omega: o, domega: d }
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    /// `ω_i^{μν}`
    #[inline]
    pub fn omega(&self, i: usize, mu: usize, nu: usize) -> f64 {
        self.omega[ix3(self.dim(), i, mu, nu)]
    }

    /// `ω_i^μ{}_ν = ω_i^{μσ} η_{σν}`
    #[inline]
    pub fn omega_mixed(&self, i: usize, mu: usize, nu: usize) -> f64 {
        self.omega(i, mu, nu) * self.signature.diag(nu)
    }

    /// `∂_j ω_i^{μν}`
    #[inline]
    pub fn domega(&self, j: usize, i: usize, mu: usize, nu: usize) -> f64 {
        self.domega[ix4(self.dim(), i, mu, nu, j)]
    }
}

pub fn spin_connection(cp: &CoframePoint) -> Result<SpinConnectionPoint, FrameError> {
    let m = cp.dim();
    let degenerate = || FrameError::Degenerate { point: cp.x.clone(), det: cp.det(), threshold: DEGENERACY_THRESHOLD };
    let duals = spin_connection_generic(cp.signature, &cp.e_dual(), &cp.de_dual()).ok_or_else(degenerate)?;
    let omega: Vec<f64> = duals.iter().map(|d| d.value).collect();
    let mut domega = vec![0.0; m * m * m * m];
    for (k, d) in duals.iter().enumerate() {
        domega[k * m..(k + 1) * m].copy_from_slice(&d.grad[..m]);
    }
    Ok(SpinConnectionPoint { signature: cp.signature, omega, domega })
}

/// `2E^μ_{ij} − (ω_i^μ_ν e^ν_j − ω_j^μ_ν e^ν_i)`, stored `[μ][i][j]`.
pub fn torsion_residual(cp: &CoframePoint, sp: &SpinConnectionPoint) -> Vec<f64> {
    let m = cp.dim();
    let mut out = vec![0.0; m * m * m];
    for mu in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut rhs = 0.0;
                for nu in 0..m {
                    rhs += sp.omega_mixed(i, mu, nu) * cp.e(nu, j) - sp.omega_mixed(j, mu, nu) * cp.e(nu, i);
                }
                out[ix3(m, mu, i, j)] = 2.0 * cp.big_e(mu, i, j) - rhs;
            }
        }
    }
    out
}

/// Curvature `R_{ji}^{λσ}` in mixed coordinate/frame form.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvaturePoint {
    pub signature: Signature,
    /// `[j][i][λ][σ]`
    pub r: Vec<f64>,
}

impl CurvaturePoint {
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize, l: usize, s: usize) -> f64 {
        self.r[ix4(self.dim(), j, i, l, s)]
    }

    /// Coordinate Riemann tensor `R^k_{l j i} = e^k_λ R_{ji}^λ{}_σ e^σ_l`, stored `[k][l][j][i]`.
    pub fn to_coordinate(&self, cp: &CoframePoint) -> Vec<f64> {
        let m = self.dim();
        let sig = self.signature;
        let mut out = vec![0.0; m * m * m * m];
        for j in 0..m {
            for i in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let mut acc = 0.0;
                        for la in 0..m {
                            for s in 0..m {
                                acc += cp.einv(k, la) * self.get(j, i, la, s) * sig.diag(s) * cp.e(s, l);
                            }
                        }
                        out[ix4(m, k, l, j, i)] = acc;
                    }
                }
            }
        }
        out
    }

    /// `R_{αβ}{}^{λσ}` with all four indices on the frame.
    pub fn to_frame(&self, cp: &CoframePoint) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m * m * m * m];
        for a in 0..m {
            for b in 0..m {
                for l in 0..m {
                    for s in 0..m {
                        let mut acc = 0.0;
                        for j in 0..m {
                            for i in 0..m {
                                acc += cp.einv(j, a) * cp.einv(i, b) * self.get(j, i, l, s);
                            }
                        }
                        out[ix4(m, a, b, l, s)] = acc;
                    }
                }
            }
        }
        out
    }

    /// `R_{αβλσ} R^{αβλσ}`.
    pub fn kretschmann(&self, cp: &CoframePoint) -> f64 {
        let m = self.dim();
        let sig = self.signature;
        let f = self.to_frame(cp);
        let mut k = 0.0;
        for a in 0..m {
            for b in 0..m {
                for l in 0..m {
                    for s in 0..m {
                        let v = f[ix4(m, a, b, l, s)];
                        k += v * v * sig.diag(a) * sig.diag(b) * sig.diag(l) * sig.diag(s);
                    }
                }
            }
        }
        k
    }

    /// Frame Ricci scalar `R_{αβ}{}^{αβ}`.
    pub fn scalar(&self, cp: &CoframePoint) -> f64 {
        let m = self.dim();
        let f = self.to_frame(cp);
        (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| f[ix4(m, a, b, a, b)]).sum()
    }
}

/// `∂_j ω_i + ω_j ω_i` before antisymmetrisation, `[j][i][λ][σ]`.
pub(crate) fn curvature_half(sp: &SpinConnectionPoint) -> Vec<f64> {
    let m = sp.dim();
    let mut x = vec![0.0; m * m * m * m];
    for j in 0..m {
        for i in 0..m {
            for l in 0..m {
                for s in 0..m {
                    let mut v = sp.domega(j, i, l, s);
                    for eta in 0..m {
                        v += sp.omega_mixed(j, l, eta) * sp.omega(i, eta, s);
                    }
                    x[ix4(m, j, i, l, s)] = v;
                }
            }
        }
    }
    x
}

pub fn curvature(sp: &SpinConnectionPoint) -> CurvaturePoint {
    let m = sp.dim();
    let x = curvature_half(sp);
    let raw = |j, i, l, s| x[ix4(m, j, i, l, s)] - x[ix4(m, i, j, l, s)];
    let mut r = vec![0.0; m * m * m * m];
    // mirror the computed representatives so both antisymmetries hold bit for bit
    for j in 0..m {
        for i in j + 1..m {
            for l in 0..m {
                for s in l + 1..m {
                    let v = 0.5 * (raw(j, i, l, s) - raw(j, i, s, l));
                    r[ix4(m, j, i, l, s)] = v;
                    r[ix4(m, i, j, l, s)] = -v;
                    r[ix4(m, j, i, s, l)] = -v;
                    r[ix4(m, i, j, s, l)] = v;
                }
            }
        }
    }
    CurvaturePoint { signature: sp.signature, r }
}

/// `1/((m−3)!·4) ε^{q⋯lij} ε_{μ⋯ρλσ} e^μ_q ⋯ R_{ji}^{λσ}`, stored `[l][ρ]`
/// (upper coordinate index `l`, lower frame index `ρ`).
pub fn einstein_density(cp: &CoframePoint, r: &CurvaturePoint) -> Result<Vec<f64>, FrameError> {
    let m = cp.dim();
    if m < 3 {
        return Err(FrameError::DimensionTooSmall(m));
    }
    let mut out = vec![0.0; m * m];
    for_each_saturated(&cp.e, m, m - 3, |up, lo, w| {
        let (l, i, j) = (up[0], up[1], up[2]);
        let (rho, la, s) = (lo[0], lo[1], lo[2]);
        out[ix2(m, l, rho)] += w * r.get(j, i, la, s);
    });
    let norm = 1.0 / (factorial(m - 3) * 4.0);
    out.iter_mut().for_each(|v| *v *= norm);
    Ok(out)
}

/// Everything derived at one point: coframe, connection, curvature.
#[derive(Clone, Debug)]
pub struct FrameGeometry {
    pub coframe: CoframePoint,
    pub connection: SpinConnectionPoint,
    pub curvature: CurvaturePoint,
}

impl FrameGeometry {
    pub fn at(field: &CoframeField, point: &[f64]) -> Result<Self, FrameError> {
        let coframe = evaluate_coframe(field, point)?;
        Self::from_coframe(coframe)
    }

    pub fn from_coframe(coframe: CoframePoint) -> Result<Self, FrameError> {
        let connection = spin_connection(&coframe)?;
        let curvature = curvature(&connection);
        Ok(Self { coframe, connection, curvature })
    }

    pub fn einstein_density(&self) -> Result<Vec<f64>, FrameError> {
        einstein_density(&self.coframe, &self.curvature)
    }
}

/// Textbook coordinate quantities computed from `g_ij` alone.
#[derive(Clone, Debug)]
pub struct CoordinateOracle {
    pub m: usize,
    pub metric: Vec<f64>,
    pub inverse_metric: Vec<f64>,
    /// `Γ^k_{ij}`, `[k][i][j]`
    pub gamma: Vec<f64>,
    /// `R^ρ_{σμν}`, `[ρ][σ][μ][ν]`
    pub riemann: Vec<f64>,
    /// `R_{σν}`
    pub ricci: Vec<f64>,
    pub scalar: f64,
    /// `G_{ij}`
    pub einstein: Vec<f64>,
    /// `G^l_k`
    pub einstein_mixed: Vec<f64>,
}

/// Levi-Civita connection, Riemann, Ricci and Einstein tensors from the
/// jet-evaluated metric `g_ij = η_{μν} e^μ_i e^ν_j`.
pub fn coordinate_oracle(field: &CoframeField, point: &[f64]) -> Result<CoordinateOracle, FrameError> {
    let m = field.dim();
    if point.len() != m {
        return Err(FrameError::DimensionMismatch { expected: m, got: point.len() });
    }
    let sig = field.signature();
    let jets = field
        .eval_jets(&jet_seed(point))
        .map_err(|source| FrameError::Eval { point: point.to_vec(), source })?;
    let mut gj = vec![Jet2::constant(0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Jet2::constant(0.0);
            for mu in 0..m {
                acc += (jets[ix2(m, mu, i)] * jets[ix2(m, mu, j)]).scale(sig.diag(mu));
            }
            gj[ix2(m, i, j)] = acc;
        }
    }
    let g: Vec<f64> = gj.iter().map(|j| j.value).collect();
    let det = determinant(&g, m);
    let ginv = inverse(&g, m).ok_or(FrameError::Degenerate {
        point: point.to_vec(),
        det,
        threshold: DEGENERACY_THRESHOLD,
    })?;
    let dg = |a: usize, b: usize, k: usize| gj[ix2(m, a, b)].grad[k];
    let ddg = |a: usize, b: usize, k: usize, l: usize| gj[ix2(m, a, b)].hess[k][l];
    // ∂_k g^{ab} = −g^{ac} ∂_k g_{cd} g^{db}
    let mut dginv = vec![0.0; m * m * m];
    for a in 0..m {
        for b in 0..m {
            for k in 0..m {
                let mut acc = 0.0;
                for c in 0..m {
                    for d in 0..m {
                        acc -= ginv[ix2(m, a, c)] * dg(c, d, k) * ginv[ix2(m, d, b)];
                    }
                }
                dginv[ix3(m, a, b, k)] = acc;
            }
        }
    }
    let mut gamma = vec![0.0; m * m * m];
    let mut dgamma = vec![0.0; m * m * m * m]; // [k][i][j][n] = ∂_n Γ^k_{ij}
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut v = 0.0;
                for l in 0..m {
                    let c = dg(l, j, i) + dg(l, i, j) - dg(i, j, l);
                    v += 0.5 * ginv[ix2(m, k, l)] * c;
                }
                gamma[ix3(m, k, i, j)] = v;
                for n in 0..m {
                    let mut d = 0.0;
                    for l in 0..m {
                        let c = dg(l, j, i) + dg(l, i, j) - dg(i, j, l);
                        let dc = ddg(l, j, i, n) + ddg(l, i, j, n) - ddg(i, j, l, n);
                        d += 0.5 * (dginv[ix3(m, k, l, n)] * c + ginv[ix2(m, k, l)] * dc);
                    }
                    dgamma[ix4(m, k, i, j, n)] = d;
                }
            }
        }
    }
    let mut riemann = vec![0.0; m * m * m * m];
    for rho in 0..m {
        for s in 0..m {
            for mu in 0..m {
                for nu in 0..m {
                    let mut v = dgamma[ix4(m, rho, nu, s, mu)] - dgamma[ix4(m, rho, mu, s, nu)];
                    for la in 0..m {
                        v += gamma[ix3(m, rho, mu, la)] * gamma[ix3(m, la, nu, s)]
                            - gamma[ix3(m, rho, nu, la)] * gamma[ix3(m, la, mu, s)];
                    }
                    riemann[ix4(m, rho, s, mu, nu)] = v;
                }
            }
        }
    }
    let mut ricci = vec![0.0; m * m];
    for s in 0..m {
        for nu in 0..m {
            ricci[ix2(m, s, nu)] = (0..m).map(|rho| riemann[ix4(m, rho, s, rho, nu)]).sum();
        }
    }
    let scalar: f64 = (0..m * m).map(|k| ginv[k] * ricci[k]).sum();
    let einstein: Vec<f64> = (0..m * m).map(|k| ricci[k] - 0.5 * g[k] * scalar).collect();
    let mut einstein_mixed = vec![0.0; m * m];
    for l in 0..m {
        for k in 0..m {
            einstein_mixed[ix2(m, l, k)] = (0..m).map(|a| ginv[ix2(m, l, a)] * einstein[ix2(m, a, k)]).sum();
        }
    }
    Ok(CoordinateOracle { m, metric: g, inverse_metric: ginv, gamma, riemann, ricci, scalar, einstein, einstein_mixed })
}

impl CoordinateOracle {
    /// `ω_i^{μν}` from the Christoffels: `e^μ_k (Γ^k_{ij} e^j_ν + ∂_i e^k_ν)`, ν raised with η.
    pub fn spin_connection(&self, cp: &CoframePoint) -> Vec<f64> {
        let m = self.m;
        let sig = cp.signature;
        // ∂_i e^k_ν = −e^k_α ∂_i e^α_l e^l_ν
        let deinv = |k: usize, nu: usize, i: usize| -> f64 {
            let mut acc = 0.0;
            for a in 0..m {
                for l in 0..m {
                    acc -= cp.einv(k, a) * cp.de(a, l, i) * cp.einv(l, nu);
                }
            }
            acc
        };
        let mut out = vec![0.0; m * m * m];
        for i in 0..m {
            for mu in 0..m {
                for nu in 0..m {
                    let mut acc = 0.0;
                    for k in 0..m {
                        let mut inner = deinv(k, nu, i);
                        for j in 0..m {
                            inner += self.gamma[ix3(m, k, i, j)] * cp.einv(j, nu);
                        }
                        acc += cp.e(mu, k) * inner;
                    }
                    out[ix3(m, i, mu, nu)] = acc * sig.diag(nu);
                }
            }
        }
        out
    }

    /// `G^l_ρ = G^l_k e^k_ρ`.
    pub fn einstein_frame(&self, cp: &CoframePoint) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        for l in 0..m {
            for rho in 0..m {
                out[ix2(m, l, rho)] = (0..m).map(|k| self.einstein_mixed[ix2(m, l, k)] * cp.einv(k, rho)).sum();
            }
        }
        out
    }
}

/// Largest absolute entry.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

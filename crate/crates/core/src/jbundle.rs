//! Gauge transformations of coframes and connections, contact forms, the
//! Θ-form density and the two Euler–Lagrange blocks of the vielbein action.

use rand::Rng;
use thiserror::Error;

use crate::expr::EvalError;
use crate::field::JetMap;
use crate::frame::{
    curvature_half, ix2, ix3, ix4, spin_connection, spin_connection_generic, CoframePoint, FrameError,
    SpinConnectionPoint,
};
use crate::tensor::linalg::{determinant, expm, inverse};
use crate::tensor::{factorial, for_each_saturated, jet_seed, Dual, Jet2, Scalar, Signature};

/// `L / (det e · R)` for holonomic sections, any dimension.
pub const THETA_SCALAR_RATIO: f64 = -0.5;

/// `el_residual_b / einstein_density` for holonomic sections.
pub const EL_B_TO_EINSTEIN: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("gauge evaluation failed at x = {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("singular coordinate Jacobian at x = {point:?}")]
    SingularJacobian { point: Vec<f64> },
    #[error("Λ leaves the pseudo-orthogonal group at x = {point:?}: |ΛᵀηΛ − η| = {deviation:e}")]
    NotPseudoOrthogonal { point: Vec<f64>, deviation: f64 },
    #[error("second derivatives of the transformed frame need an affine coordinate map")]
    NonAffineChart,
    #[error("gauge element dimension {gauge} does not match field dimension {field}")]
    DimensionMismatch { gauge: usize, field: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Coordinate change `x ↦ x̄(x)`.
#[derive(Clone, Debug)]
pub enum CoordMap {
    Identity,
    /// `x̄ = A x + b`, `A` row-major.
    Affine { matrix: Vec<f64>, offset: Vec<f64> },
    General(JetMap),
}

impl CoordMap {
    fn image(&self, x: &[Jet2]) -> Result<Vec<Jet2>, EvalError> {
        let m = x.len();
        match self {
            CoordMap::Identity => Ok(x.to_vec()),
            CoordMap::Affine { matrix, offset } => Ok((0..m)
                .map(|a| {
                    let mut acc = Jet2::constant(offset[a]);
                    for b in 0..m {
                        acc += x[b].scale(matrix[ix2(m, a, b)]);
                    }
                    acc
                })
                .collect()),
            CoordMap::General(f) => f.eval(x),
        }
    }

    pub fn is_affine(&self) -> bool {
        !matches!(self, CoordMap::General(_))
    }

    /// Inverse map as `(A⁻¹, −A⁻¹ b)` for affine charts.
    pub fn affine_inverse(&self, m: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            CoordMap::Identity => {
                let id = (0..m * m).map(|k| if k / m == k % m { 1.0 } else { 0.0 }).collect();
                Some((id, vec![0.0; m]))
            }
            CoordMap::Affine { matrix, offset } => {
                let inv = inverse(matrix, m)?;
                let off = (0..m).map(|a| -(0..m).map(|b| inv[ix2(m, a, b)] * offset[b]).sum::<f64>()).collect();
                Some((inv, off))
            }
            CoordMap::General(_) => None,
        }
    }
}

/// A local gauge transformation: a pseudo-orthogonal frame rotation `Λ(x)`
/// together with a change of coordinates.
#[derive(Clone, Debug)]
pub struct GaugeElement {
    pub signature: Signature,
    /// `Λ^μ_ν(x)`, `μ` major.
    pub lambda: JetMap,
    pub coords: CoordMap,
    /// Debug switch: reverses the sign of the inhomogeneous `∂Λ Λ⁻¹` term
    /// in the connection law.
    pub flip_inhomogeneous: bool,
}

/// A gauge element evaluated at one point.
#[derive(Clone, Debug)]
pub struct GaugePoint {
    pub x: Vec<f64>,
    pub xbar: Vec<f64>,
    /// `Λ^μ_ν` as jets.
    pub lambda: Vec<Jet2>,
    /// `∂x̄^a/∂x^b` with first derivatives.
    pub jac: Vec<Dual>,
    /// `∂x^a/∂x̄^b` with first derivatives (in `x`).
    pub jac_inv: Vec<Dual>,
}

impl GaugeElement {
    pub fn identity(signature: Signature) -> Self {
        let m = signature.dim();
        let id = (0..m * m).map(|k| if k / m == k % m { 1.0 } else { 0.0 }).collect();
        Self::new(signature, JetMap::constant(id), CoordMap::Identity)
    }

    pub fn new(signature: Signature, lambda: JetMap, coords: CoordMap) -> Self {
        assert_eq!(lambda.outputs(), signature.dim() * signature.dim());
        Self { signature, lambda, coords, flip_inhomogeneous: false }
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    /// Evaluates `Λ` and the Jacobians at `x`, checking `ΛᵀηΛ = η` and invertibility.
    pub fn at(&self, x: &[f64]) -> Result<GaugePoint, GaugeError> {
        let m = self.dim();
        if x.len() != m {
            return Err(GaugeError::DimensionMismatch { gauge: m, field: x.len() });
        }
        let seeds = jet_seed(x);
        let wrap = |source| GaugeError::Eval { point: x.to_vec(), source };
        let lambda = self.lambda.eval(&seeds).map_err(wrap)?;
        let image = self.coords.image(&seeds).map_err(wrap)?;
        let deviation = pseudo_orthogonality_defect(self.signature, &lambda);
        let scale = lambda.iter().map(|l| l.value * l.value).sum::<f64>().max(1.0);
        if deviation > 1e-12 * scale {
            return Err(GaugeError::NotPseudoOrthogonal { point: x.to_vec(), deviation });
        }
        let mut jac = vec![Dual::constant(0.0); m * m];
        for a in 0..m {
            for b in 0..m {
                jac[ix2(m, a, b)] = image[a].partial(b);
            }
        }
        let singular = || GaugeError::SingularJacobian { point: x.to_vec() };
        if determinant(&jac, m).value.abs() < 1e-12 {
            return Err(singular());
        }
        let jac_inv = inverse(&jac, m).ok_or_else(singular)?;
        Ok(GaugePoint { x: x.to_vec(), xbar: image.iter().map(|j| j.value).collect(), lambda, jac, jac_inv })
    }
}

/// `max |ΛᵀηΛ − η|` entrywise.
pub fn pseudo_orthogonality_defect(sig: Signature, lambda: &[Jet2]) -> f64 {
    let m = sig.dim();
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let mut v = 0.0;
            for mu in 0..m {
                v += lambda[ix2(m, mu, a)].value * sig.diag(mu) * lambda[ix2(m, mu, b)].value;
            }
            let target = if a == b { sig.diag(a) } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}

impl GaugePoint {
    fn dim(&self) -> usize {
        self.xbar.len()
    }

    fn jac_inv_value(&self, a: usize, b: usize) -> f64 {
        self.jac_inv[ix2(self.dim(), a, b)].value
    }

    /// `det(∂x̄/∂x)`.
    pub fn jacobian_determinant(&self) -> f64 {
        determinant(&self.jac.iter().map(|d| d.value).collect::<Vec<_>>(), self.dim())
    }

    /// Converts an `x`-gradient into an `x̄`-gradient.
    fn bar_grad(&self, grad: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m).map(|k| (0..m).map(|h| self.jac_inv_value(h, k) * grad[h]).sum()).collect()
    }
}

/// A point of a section `x ↦ (e, ω)`: frame values, their first partials and
/// a connection that need not be the Levi-Civita one.
#[derive(Clone, Debug)]
pub struct SectionPoint {
    pub signature: Signature,
    pub x: Vec<f64>,
    /// `e^μ_i`
    pub e: Vec<f64>,
    /// `∂_j e^μ_i`, `[μ][i][j]`
    pub de: Vec<f64>,
    pub connection: SpinConnectionPoint,
    pub holonomic: bool,
}

impl SectionPoint {
    /// The holonomic section generated by a coframe.
    pub fn holonomic(cp: &CoframePoint) -> Result<Self, FrameError> {
        Ok(Self {
            signature: cp.signature,
            x: cp.x.clone(),
            e: cp.e.clone(),
            de: cp.de.clone(),
            connection: spin_connection(cp)?,
            holonomic: true,
        })
    }

    pub fn free(signature: Signature, x: Vec<f64>, e: Vec<f64>, de: Vec<f64>, connection: SpinConnectionPoint) -> Self {
        Self { signature, x, e, de, connection, holonomic: false }
    }

    /// Fully random point: frame `I + scale·noise`, arbitrary `∂e`, `ω`, `∂ω`.
    pub fn random(signature: Signature, rng: &mut impl Rng, scale: f64) -> Self {
        let m = signature.dim();
        let mut noise = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let mut e = noise(m * m);
        e.iter_mut().enumerate().for_each(|(k, v)| {
            *v *= scale;
            if k / m == k % m {
                *v += 1.0;
            }
        });
        let de = noise(m * m * m);
        let omega = noise(m * m * m);
        let domega = noise(m * m * m * m);
        let connection = SpinConnectionPoint::from_raw(signature, &omega, &domega);
        Self::free(signature, vec![0.0; m], e, de, connection)
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    #[inline]
    fn e(&self, mu: usize, i: usize) -> f64 {
        self.e[ix2(self.dim(), mu, i)]
    }

    #[inline]
    fn de(&self, mu: usize, i: usize, j: usize) -> f64 {
        self.de[ix3(self.dim(), mu, i, j)]
    }
}

fn jets_from_blocks(m: usize, e: &[f64], de: &[f64], dde: &[f64]) -> Vec<Jet2> {
    (0..m * m)
        .map(|k| {
            let mut j = Jet2::constant(e[k]);
            for a in 0..m {
                j.grad[a] = de[k * m + a];
                for b in 0..m {
                    j.hess[a][b] = dde[(k * m + a) * m + b];
                }
            }
            j
        })
        .collect()
}

/// `ē^μ_j(x̄) = Λ^μ_σ e^σ_i ∂x^i/∂x̄^j` with first and second `x̄`-derivatives.
pub fn gauge_transform_frame(cp: &CoframePoint, g: &GaugeElement) -> Result<CoframePoint, GaugeError> {
    let m = cp.dim();
    if g.dim() != m {
        return Err(GaugeError::DimensionMismatch { gauge: g.dim(), field: m });
    }
    if !g.coords.is_affine() {
        return Err(GaugeError::NonAffineChart);
    }
    let gp = g.at(&cp.x)?;
    let e = jets_from_blocks(m, &cp.e, &cp.de, &cp.dde);
    let mut ebar = vec![0.0; m * m];
    let mut debar = vec![0.0; m * m * m];
    let mut ddebar = vec![0.0; m * m * m * m];
    for mu in 0..m {
        for j in 0..m {
            let mut acc = Jet2::constant(0.0);
            for s in 0..m {
                for i in 0..m {
                    let w = gp.jac_inv_value(i, j);
                    if w != 0.0 {
                        acc += (gp.lambda[ix2(m, mu, s)] * e[ix2(m, s, i)]).scale(w);
                    }
                }
            }
            ebar[ix2(m, mu, j)] = acc.value;
            let grad = gp.bar_grad(&acc.grad[..m]);
            for k in 0..m {
                debar[ix3(m, mu, j, k)] = grad[k];
                for l in 0..m {
                    let mut h = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            h += gp.jac_inv_value(a, k) * gp.jac_inv_value(b, l) * acc.hess[a][b];
                        }
                    }
                    ddebar[ix4(m, mu, j, k, l)] = h;
                }
            }
        }
    }
    Ok(CoframePoint::from_blocks(cp.signature, gp.xbar.clone(), ebar, debar, ddebar)?)
}

/// `Λ⁻¹ = η Λᵀ η` applied entrywise: `(Λ⁻¹)^α_β = η_αα Λ^β_α η_ββ`.
fn lambda_inverse(sig: Signature, lambda: &[Dual]) -> Vec<Dual> {
    let m = sig.dim();
    let mut out = vec![Dual::constant(0.0); m * m];
    for a in 0..m {
        for b in 0..m {
            out[ix2(m, a, b)] = lambda[ix2(m, b, a)].scale(sig.diag(a) * sig.diag(b));
        }
    }
    out
}

/// Transformed connection `ω̄_i^{μν}` as first-order quantities in `x`.
fn omega_bar_duals(sig: Signature, sp: &SpinConnectionPoint, gp: &GaugePoint, flip: bool) -> Vec<Dual> {
    let m = sig.dim();
    let lambda: Vec<Dual> = gp.lambda.iter().map(Jet2::dual).collect();
    let linv = lambda_inverse(sig, &lambda);
    let omega: Vec<Dual> = (0..m * m * m)
        .map(|k| Dual::from_parts(sp.omega[k], &sp.domega[k * m..(k + 1) * m]))
        .collect();
    let sign = if flip { 1.0 } else { -1.0 };
    // Λ ω_j Λᵀ (both indices up) for every j
    let mut rotated = vec![Dual::constant(0.0); m * m * m];
    for j in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                let mut acc = Dual::constant(0.0);
                for s in 0..m {
                    let l_ms = lambda[ix2(m, mu, s)];
                    for c in 0..m {
                        acc += l_ms * lambda[ix2(m, nu, c)] * omega[ix3(m, j, s, c)];
                    }
                }
                rotated[ix3(m, j, mu, nu)] = acc;
            }
        }
    }
    // (∂_h Λ Λ⁻¹)^μ_α η^{αν} for every h
    let mut inhom = vec![Dual::constant(0.0); m * m * m];
    for h in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                let mut acc = Dual::constant(0.0);
                for c in 0..m {
                    acc += gp.lambda[ix2(m, mu, c)].partial(h) * linv[ix2(m, c, nu)];
                }
                inhom[ix3(m, h, mu, nu)] = acc.scale(sig.diag(nu));
            }
        }
    }
    let mut out = vec![Dual::constant(0.0); m * m * m];
    for i in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                let mut acc = Dual::constant(0.0);
                for j in 0..m {
                    let w = gp.jac_inv[ix2(m, j, i)];
                    acc += w * (rotated[ix3(m, j, mu, nu)] + inhom[ix3(m, j, mu, nu)].scale(sign));
                }
                out[ix3(m, i, mu, nu)] = acc;
            }
        }
    }
    out
}

fn omega_bar(sig: Signature, sp: &SpinConnectionPoint, gp: &GaugePoint, flip: bool) -> SpinConnectionPoint {
    let m = sig.dim();
    let duals = omega_bar_duals(sig, sp, gp, flip);
    let omega: Vec<f64> = duals.iter().map(|d| d.value).collect();
    let mut domega = vec![0.0; m * m * m * m];
    for (k, d) in duals.iter().enumerate() {
        domega[k * m..(k + 1) * m].copy_from_slice(&gp.bar_grad(&d.grad[..m]));
    }
    SpinConnectionPoint::from_raw(sig, &omega, &domega)
}

/// `ω̄_i^{μν} = Λ^μ_σ Λ^ν_γ ∂x^j/∂x̄^i ω_j^{σγ} − (∂_h Λ Λ⁻¹)^{μν} ∂x^h/∂x̄^i`,
/// together with its `x̄`-derivatives.
pub fn gauge_transform_omega(
    sp: &SpinConnectionPoint,
    cp: &CoframePoint,
    g: &GaugeElement,
) -> Result<SpinConnectionPoint, GaugeError> {
    if g.dim() != sp.dim() {
        return Err(GaugeError::DimensionMismatch { gauge: g.dim(), field: sp.dim() });
    }
    let gp = g.at(&cp.x)?;
    Ok(omega_bar(sp.signature, sp, &gp, g.flip_inhomogeneous))
}

/// Transformed `E` coordinates `Ē^μ_{jk}`, stored `[μ][j][k]`.
pub fn gauge_transform_e(cp: &CoframePoint, g: &GaugeElement) -> Result<Vec<f64>, GaugeError> {
    let m = cp.dim();
    if g.dim() != m {
        return Err(GaugeError::DimensionMismatch { gauge: g.dim(), field: m });
    }
    let gp = g.at(&cp.x)?;
    let ji = |a, b| gp.jac_inv_value(a, b);
    let mut out = vec![0.0; m * m * m];
    for mu in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut acc = 0.0;
                for s in 0..m {
                    let l = gp.lambda[ix2(m, mu, s)];
                    for i in 0..m {
                        for h in 0..m {
                            acc += l.value * cp.big_e(s, i, h) * ji(i, j) * ji(h, k);
                            acc += 0.5 * cp.e(s, i) * l.grad[h] * (ji(i, j) * ji(h, k) - ji(i, k) * ji(h, j));
                        }
                    }
                }
                out[ix3(m, mu, j, k)] = acc;
            }
        }
    }
    Ok(out)
}

/// Transforms a whole section point; works for any coordinate map since only
/// first derivatives of the frame are carried.
pub fn gauge_transform_section(sec: &SectionPoint, g: &GaugeElement) -> Result<SectionPoint, GaugeError> {
    let m = sec.dim();
    if g.dim() != m {
        return Err(GaugeError::DimensionMismatch { gauge: g.dim(), field: m });
    }
    let gp = g.at(&sec.x)?;
    let e: Vec<Dual> = (0..m * m).map(|k| Dual::from_parts(sec.e[k], &sec.de[k * m..(k + 1) * m])).collect();
    let mut ebar = vec![0.0; m * m];
    let mut debar = vec![0.0; m * m * m];
    for mu in 0..m {
        for j in 0..m {
            let mut acc = Dual::constant(0.0);
            for s in 0..m {
                let l = gp.lambda[ix2(m, mu, s)].dual();
                for i in 0..m {
                    acc += l * e[ix2(m, s, i)] * gp.jac_inv[ix2(m, i, j)];
                }
            }
            ebar[ix2(m, mu, j)] = acc.value;
            let grad = gp.bar_grad(&acc.grad[..m]);
            debar[ix3(m, mu, j, 0)..ix3(m, mu, j, 0) + m].copy_from_slice(&grad);
        }
    }
    let connection = omega_bar(sec.signature, &sec.connection, &gp, g.flip_inhomogeneous);
    Ok(SectionPoint { signature: sec.signature, x: gp.xbar.clone(), e: ebar, de: debar, connection, holonomic: sec.holonomic })
}

/// Max difference between the connection obtained by transforming `E` and
/// converting, and the one obtained by converting and transforming `ω`.
pub fn commuting_diagram_check(cp: &CoframePoint, g: &GaugeElement) -> Result<f64, GaugeError> {
    let m = cp.dim();
    let e_bar_coords = gauge_transform_e(cp, g)?;
    let gp = g.at(&cp.x)?;
    let mut ebar = vec![0.0; m * m];
    for mu in 0..m {
        for j in 0..m {
            for s in 0..m {
                for i in 0..m {
                    ebar[ix2(m, mu, j)] += gp.lambda[ix2(m, mu, s)].value * cp.e(s, i) * gp.jac_inv_value(i, j);
                }
            }
        }
    }
    // any array whose antisymmetric part is Ē serves as ∂ē here
    let via_e = spin_connection_generic(cp.signature, &ebar, &e_bar_coords)
        .ok_or_else(|| FrameError::Degenerate { point: gp.xbar.clone(), det: determinant(&ebar, m), threshold: 0.0 })?;
    let sp = spin_connection(cp)?;
    let via_omega = omega_bar(cp.signature, &sp, &gp, g.flip_inhomogeneous);
    Ok(via_e
        .iter()
        .zip(&via_omega.omega)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Coefficients `c^μ_{ab}` of the pulled-back contact forms,
/// `γ*θ^μ = Σ_{a,b} c^μ_{ab} dx^a ∧ dx^b`, stored `[μ][a][b]`.
pub fn contact_pullback(sec: &SectionPoint) -> Vec<f64> {
    let m = sec.dim();
    let sp = &sec.connection;
    let mut out = vec![0.0; m * m * m];
    for mu in 0..m {
        for a in 0..m {
            for b in 0..m {
                let mut v = sec.de(mu, b, a) - sec.de(mu, a, b);
                for nu in 0..m {
                    v += sp.omega_mixed(a, mu, nu) * sec.e(nu, b) - sp.omega_mixed(b, mu, nu) * sec.e(nu, a);
                }
                out[ix3(m, mu, a, b)] = 0.5 * v;
            }
        }
    }
    out
}

/// Coefficient `L` of `γ*Θ = L ds`.
pub fn theta_density(sec: &SectionPoint) -> f64 {
    let m = sec.dim();
    assert!(m >= 2);
    let x = curvature_half(&sec.connection);
    let mut acc = 0.0;
    for_each_saturated(&sec.e, m, m - 2, |up, lo, w| {
        let (i, j) = (up[0], up[1]);
        let (l, s) = (lo[0], lo[1]);
        acc += w * x[ix4(m, j, i, l, s)];
    });
    acc / (factorial(m - 2) * 2.0)
}

/// `|L̄(x̄)·det(∂x̄/∂x) − L(x)|`.
pub fn theta_gauge_invariance_check(sec: &SectionPoint, g: &GaugeElement) -> Result<f64, GaugeError> {
    let l = theta_density(sec);
    let gp = g.at(&sec.x)?;
    let transformed = gauge_transform_section(sec, g)?;
    Ok((theta_density(&transformed) * gp.jacobian_determinant() - l).abs())
}

fn antisymmetrize_last_pair(m: usize, c: &mut [f64]) {
    for i in 0..m {
        for a in 0..m {
            for b in a..m {
                let v = 0.5 * (c[ix3(m, i, a, b)] - c[ix3(m, i, b, a)]);
                c[ix3(m, i, a, b)] = v;
                c[ix3(m, i, b, a)] = -v;
            }
        }
    }
}

/// Both sides of the `ω dω` identity as coefficient arrays of the vertical
/// differentials `dω_i^{ab}`, stored `[i][a][b]` and antisymmetrised in `(a, b)`.
pub fn omega_identity_sides(sec: &SectionPoint) -> (Vec<f64>, Vec<f64>) {
    let m = sec.dim();
    assert!(m >= 3);
    let sp = &sec.connection;
    let mut lhs = vec![0.0; m * m * m];
    for_each_saturated(&sec.e, m, m - 2, |up, lo, w| {
        let (i, j) = (up[0], up[1]);
        let (la, s) = (lo[0], lo[1]);
        for eta in 0..m {
            lhs[ix3(m, i, eta, s)] += w * sp.omega_mixed(j, la, eta);
        }
    });
    let norm = 1.0 / factorial(m - 2);
    lhs.iter_mut().for_each(|v| *v *= norm);
    let mut rhs = vec![0.0; m * m * m];
    for_each_saturated(&sec.e, m, m - 3, |up, lo, w| {
        let (l, i, j) = (up[0], up[1], up[2]);
        let (tau, la, s) = (lo[0], lo[1], lo[2]);
        let mut contracted = 0.0;
        for rho in 0..m {
            contracted += sec.e(rho, l) * sp.omega_mixed(j, tau, rho);
        }
        rhs[ix3(m, i, la, s)] += w * contracted;
    });
    let norm = -1.0 / (factorial(m - 3) * 2.0);
    rhs.iter_mut().for_each(|v| *v *= norm);
    antisymmetrize_last_pair(m, &mut lhs);
    antisymmetrize_last_pair(m, &mut rhs);
    (lhs, rhs)
}

/// Max-norm of the difference of the two sides of the `ω dω` identity.
pub fn omega_identity_check(sec: &SectionPoint) -> f64 {
    let (l, r) = omega_identity_sides(sec);
    l.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Euler–Lagrange block from variations of `ω`, stored `[i][λ][σ]`.
pub fn el_residual_a(sec: &SectionPoint) -> Vec<f64> {
    let m = sec.dim();
    assert!(m >= 3);
    let sp = &sec.connection;
    let mut out = vec![0.0; m * m * m];
    for_each_saturated(&sec.e, m, m - 3, |up, lo, w| {
        let (l, i, j) = (up[0], up[1], up[2]);
        let (rho, la, s) = (lo[0], lo[1], lo[2]);
        let mut v = sec.de(rho, l, j);
        for tau in 0..m {
            v += sp.omega_mixed(j, rho, tau) * sec.e(tau, l);
        }
        out[ix3(m, i, la, s)] += w * v;
    });
    let norm = 1.0 / factorial(m - 3);
    out.iter_mut().for_each(|v| *v *= norm);
    out
}

/// Euler–Lagrange block from variations of `e`, stored `[l][ρ]`.
pub fn el_residual_b(sec: &SectionPoint) -> Vec<f64> {
    let m = sec.dim();
    assert!(m >= 3);
    let x = curvature_half(&sec.connection);
    let mut out = vec![0.0; m * m];
    for_each_saturated(&sec.e, m, m - 3, |up, lo, w| {
        let (l, i, j) = (up[0], up[1], up[2]);
        let (rho, la, s) = (lo[0], lo[1], lo[2]);
        out[ix2(m, l, rho)] += w * x[ix4(m, j, i, la, s)];
    });
    let norm = 1.0 / (factorial(m - 3) * 2.0);
    out.iter_mut().for_each(|v| *v *= norm);
    out
}

/// Random polynomial generator `S_{αβ}(x) = −S_{βα}(x)` of degree ≤ 2.
fn random_generator_coefficients(m: usize, rng: &mut impl Rng, amplitude: f64) -> Vec<(usize, usize, f64, Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let c0 = amplitude * rng.gen_range(-1.0..1.0);
            let lin: Vec<f64> = (0..m).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect();
            let quad: Vec<f64> = (0..m * m).map(|_| 0.5 * amplitude * rng.gen_range(-1.0..1.0)).collect();
            out.push((a, b, c0, lin, quad));
        }
    }
    out
}

/// `Λ(x) = exp(η⁻¹ S(x))` with `S` antisymmetric and polynomial in `x`.
pub fn random_lorentz_field(sig: Signature, rng: &mut impl Rng, amplitude: f64) -> JetMap {
    let m = sig.dim();
    let coeffs = random_generator_coefficients(m, rng, amplitude);
    JetMap::new(m * m, move |x| {
        let mut gen = vec![Jet2::constant(0.0); m * m];
        for (a, b, c0, lin, quad) in &coeffs {
            let mut s = Jet2::constant(*c0);
            for p in 0..m {
                s += x[p].scale(lin[p]);
                for q in 0..m {
                    s += (x[p] * x[q]).scale(quad[ix2(m, p, q)]);
                }
            }
            gen[ix2(m, *a, *b)] = s.scale(sig.diag(*a));
            gen[ix2(m, *b, *a)] = s.scale(-sig.diag(*b));
        }
        Ok(expm(&gen, m))
    })
}

/// Constant `Λ = exp(η⁻¹ S)` with random antisymmetric `S`.
pub fn random_constant_lorentz(sig: Signature, rng: &mut impl Rng, amplitude: f64) -> JetMap {
    let m = sig.dim();
    let mut gen = vec![0.0; m * m];
    for a in 0..m {
        for b in a + 1..m {
            let s = amplitude * rng.gen_range(-1.0..1.0);
            gen[ix2(m, a, b)] = s * sig.diag(a);
            gen[ix2(m, b, a)] = -s * sig.diag(b);
        }
    }
    JetMap::constant(expm(&gen, m))
}

/// Boost or rotation by `angle` in the `(a, b)` frame plane.
pub fn plane_transformation(sig: Signature, a: usize, b: usize, angle: f64) -> JetMap {
    let m = sig.dim();
    let mut gen = vec![0.0; m * m];
    gen[ix2(m, a, b)] = angle * sig.diag(a);
    gen[ix2(m, b, a)] = -angle * sig.diag(b);
    JetMap::constant(expm(&gen, m))
}

/// Rotation in the `(a, b)` frame plane by the angle `x^c` (spacelike pair).
pub fn coordinate_rotation(m: usize, a: usize, b: usize, c: usize) -> JetMap {
    JetMap::new(m * m, move |x| {
        let mut l: Vec<Jet2> = (0..m * m).map(|k| Jet2::constant(if k / m == k % m { 1.0 } else { 0.0 })).collect();
        let (cos, sin) = (x[c].cos(), x[c].sin());
        l[ix2(m, a, a)] = cos;
        l[ix2(m, a, b)] = -sin;
        l[ix2(m, b, a)] = sin;
        l[ix2(m, b, b)] = cos;
        Ok(l)
    })
}

/// Random invertible affine map `x̄ = (I + scale·N) x + b`.
pub fn random_affine_map(m: usize, rng: &mut impl Rng, scale: f64) -> CoordMap {
    let matrix = (0..m * m)
        .map(|k| (if k / m == k % m { 1.0 } else { 0.0 }) + scale * rng.gen_range(-1.0..1.0))
        .collect();
    let offset = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CoordMap::Affine { matrix, offset }
}

/// Random near-identity quadratic map `x̄^a = x^a + scale·Q^a(x)`.
pub fn random_quadratic_map(m: usize, rng: &mut impl Rng, scale: f64) -> CoordMap {
    let q: Vec<f64> = (0..m * m * m).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    CoordMap::General(JetMap::new(m, move |x| {
        Ok((0..m)
            .map(|a| {
                let mut v = x[a];
                for p in 0..m {
                    for r in p..m {
                        v += (x[p] * x[r]).scale(q[ix3(m, a, p, r)]);
                    }
                }
                v
            })
            .collect())
    }))
}

/// Random gauge element with polynomial `Λ(x)` and the given coordinate map.
pub fn random_gauge_element(sig: Signature, rng: &mut impl Rng, amplitude: f64, coords: CoordMap) -> GaugeElement {
    GaugeElement::new(sig, random_lorentz_field(sig, rng, amplitude), coords)
}

#[cfg(test)]
mod tests;

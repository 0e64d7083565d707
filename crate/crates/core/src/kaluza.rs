//! Five-dimensional Kaluza lift of a tetrad and an electromagnetic potential,
//! the reduction of its spin connection and the reduced Einstein–Maxwell system.
//!
//! The fifth coordinate and frame label sit at index 4. Nothing built here
//! reads `x⁵`, so the cylinder condition holds by construction.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval_jet, EvalError, Expr, Params};
use crate::field::{CoframeField, JetMap};
use crate::frame::{einstein_density, ix2, CoframePoint, FrameError, FrameGeometry};
use rand::Rng;

use crate::jbundle::{
    el_residual_b, gauge_transform_section, random_affine_map, random_lorentz_field, CoordMap, GaugeElement, SectionPoint,
};
use crate::tensor::linalg::{determinant, inverse};
use crate::tensor::{for_each_saturated, jet_seed, Dual, Jet2, Scalar, Signature};

const FIFTH: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KaluzaError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("potential evaluation failed at x = {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("Kaluza configurations need a (1,3) tetrad, got signature {0:?}")]
    Signature(Signature),
    #[error("point has {got} coordinates, expected 4")]
    DimensionMismatch { got: usize },
    #[error("coupling fit is not positive (k² = {0})")]
    Calibration(f64),
    #[error("restricted gauge transformations need an affine chart on spacetime")]
    NonAffineChart,
    #[error("gauge transformation failed: {0}")]
    Gauge(String),
}

/// A tetrad, a potential `A_i` and the coupling `k`.
#[derive(Clone, Debug)]
pub struct KaluzaConfig {
    pub tetrad: CoframeField,
    pub potential: JetMap,
    pub k: f64,
}

impl KaluzaConfig {
    pub fn new(tetrad: CoframeField, potential: JetMap, k: f64) -> Self {
        assert_eq!(potential.outputs(), 4, "potential needs four components");
        Self { tetrad, potential, k }
    }

    fn check(&self) -> Result<(), KaluzaError> {
        if self.tetrad.signature() != Signature::LORENTZ4 {
            return Err(KaluzaError::Signature(self.tetrad.signature()));
        }
        Ok(())
    }

    fn potential_jets(&self, x: &[f64]) -> Result<Vec<Jet2>, KaluzaError> {
        self.potential
            .eval(&jet_seed(x))
            .map_err(|source| KaluzaError::Eval { point: x.to_vec(), source })
    }

    /// Everything needed by the checks below, evaluated at a spacetime point.
    pub fn at(&self, x: &[f64]) -> Result<KaluzaPoint, KaluzaError> {
        self.at_fifth(x, 0.0)
    }

    /// As [`KaluzaConfig::at`], with the lifted frame evaluated at the given `x⁵`.
    pub fn at_fifth(&self, x: &[f64], x5: f64) -> Result<KaluzaPoint, KaluzaError> {
        self.check()?;
        if x.len() != 4 {
            return Err(KaluzaError::DimensionMismatch { got: x.len() });
        }
        let geo4 = FrameGeometry::at(&self.tetrad, x)?;
        let a = self.potential_jets(x)?;
        let mut x5d = x.to_vec();
        x5d.push(x5);
        let geo5 = FrameGeometry::at(&lift_coframe(self), &x5d)?;
        let field = field_strength_from(&geo4.coframe, &a);
        Ok(KaluzaPoint { k: self.k, geo4, geo5, a, field })
    }
}

/// The 5-frame `e^μ = e^μ_i dx^i`, `e⁵ = dx⁵ − k A_i dx^i`.
pub fn lift_coframe(cfg: &KaluzaConfig) -> CoframeField {
    let tetrad = cfg.tetrad.clone();
    let potential = cfg.potential.clone();
    let k = cfg.k;
    let entries = JetMap::new(25, move |x| {
        let base = &x[..4];
        let e = tetrad.eval_jets(base)?;
        let a = potential.eval(base)?;
        let mut out = vec![Jet2::constant(0.0); 25];
        for mu in 0..4 {
            for i in 0..4 {
                out[ix2(5, mu, i)] = e[ix2(4, mu, i)];
            }
        }
        for i in 0..4 {
            out[ix2(5, FIFTH, i)] = a[i].scale(-k);
        }
        out[ix2(5, FIFTH, FIFTH)] = Jet2::constant(1.0);
        Ok(out)
    });
    CoframeField::new(Signature::LORENTZ5, entries)
}

/// Field strength in both charts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldStrengthPoint {
    /// `F_{ab} = ∂_b A_a − ∂_a A_b`
    pub coordinate: Vec<f64>,
    /// `F^{ab}`, raised with the spacetime metric
    pub coordinate_up: Vec<f64>,
    /// `F_{μν} = F_{ab} e^a_μ e^b_ν`
    pub frame: Vec<f64>,
    /// `F^{μν}`
    pub frame_up: Vec<f64>,
}

impl FieldStrengthPoint {
    /// `F^μ_ν`
    pub fn frame_mixed(&self, mu: usize, nu: usize) -> f64 {
        self.frame_up[ix2(4, mu, nu)] * Signature::LORENTZ4.diag(nu)
    }
}

fn field_strength_from(cp: &CoframePoint, a: &[Jet2]) -> FieldStrengthPoint {
    let eta = Signature::LORENTZ4;
    let mut coordinate = vec![0.0; 16];
    for p in 0..4 {
        for q in 0..4 {
            coordinate[ix2(4, p, q)] = a[p].grad[q] - a[q].grad[p];
        }
    }
    let ginv = crate::frame::inverse_metric(cp);
    let mut coordinate_up = vec![0.0; 16];
    let mut frame = vec![0.0; 16];
    let mut frame_up = vec![0.0; 16];
    for p in 0..4 {
        for q in 0..4 {
            let mut up = 0.0;
            let mut fr = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    up += ginv[ix2(4, p, c)] * ginv[ix2(4, q, d)] * coordinate[ix2(4, c, d)];
                    fr += coordinate[ix2(4, c, d)] * cp.einv(c, p) * cp.einv(d, q);
                }
            }
            coordinate_up[ix2(4, p, q)] = up;
            frame[ix2(4, p, q)] = fr;
            frame_up[ix2(4, p, q)] = fr * eta.diag(p) * eta.diag(q);
        }
    }
    FieldStrengthPoint { coordinate, coordinate_up, frame, frame_up }
}

pub fn field_strength(cfg: &KaluzaConfig, x: &[f64]) -> Result<FieldStrengthPoint, KaluzaError> {
    cfg.check()?;
    let cp = crate::frame::evaluate_coframe(&cfg.tetrad, x)?;
    Ok(field_strength_from(&cp, &cfg.potential_jets(x)?))
}

/// `T^l_ρ = ¼ e^l_ρ F_{ij}F^{ij} + F^l_j F^j_i e^i_ρ`, stored `[l][ρ]`.
pub fn em_stress(cp: &CoframePoint, f: &FieldStrengthPoint) -> Vec<f64> {
    let ginv = crate::frame::inverse_metric(cp);
    let square: f64 = (0..16).map(|k| f.coordinate[k] * f.coordinate_up[k]).sum();
    // F^a_b = g^{ac} F_{cb}
    let mut mixed = vec![0.0; 16];
    for a in 0..4 {
        for b in 0..4 {
            mixed[ix2(4, a, b)] = (0..4).map(|c| ginv[ix2(4, a, c)] * f.coordinate[ix2(4, c, b)]).sum();
        }
    }
    let mut t = vec![0.0; 16];
    for l in 0..4 {
        for rho in 0..4 {
            let mut v = 0.25 * cp.einv(l, rho) * square;
            for j in 0..4 {
                for i in 0..4 {
                    v += mixed[ix2(4, l, j)] * mixed[ix2(4, j, i)] * cp.einv(i, rho);
                }
            }
            t[ix2(4, l, rho)] = v;
        }
    }
    t
}

/// Trace `e^ρ_l T^l_ρ`.
pub fn stress_trace(cp: &CoframePoint, t: &[f64]) -> f64 {
    (0..4).flat_map(|l| (0..4).map(move |r| (l, r))).map(|(l, r)| cp.e(r, l) * t[ix2(4, l, r)]).sum()
}

/// Spacetime fields together with the lifted 5-frame at one point.
#[derive(Clone, Debug)]
pub struct KaluzaPoint {
    pub k: f64,
    pub geo4: FrameGeometry,
    pub geo5: FrameGeometry,
    /// `A_i` as jets.
    pub a: Vec<Jet2>,
    pub field: FieldStrengthPoint,
}

impl KaluzaPoint {
    pub fn det4(&self) -> f64 {
        self.geo4.coframe.det()
    }

    pub fn stress(&self) -> Vec<f64> {
        em_stress(&self.geo4.coframe, &self.field)
    }

    /// Einstein block of the reduced system, stored `[l][ρ]`.
    pub fn einstein_maxwell_lhs(&self) -> Vec<f64> {
        einstein_density(&self.geo4.coframe, &self.geo4.curvature).expect("dimension 4")
    }

    /// `LHS + ½ e k² T`.
    pub fn einstein_maxwell_residual(&self) -> Vec<f64> {
        let lhs = self.einstein_maxwell_lhs();
        let t = self.stress();
        let c = 0.5 * self.det4() * self.k * self.k;
        lhs.iter().zip(&t).map(|(l, t)| l + c * t).collect()
    }

    /// Gauge scalars `F_{μν}F^{μν}`, `g_{lk} η^{ρσ} r^l_ρ r^k_σ / e²` and
    /// `η_{αβ} m^α m^β / e²` for the two residual densities `r`, `m`.
    pub fn invariants(&self) -> [f64; 3] {
        let eta = Signature::LORENTZ4;
        let g = crate::frame::metric(&self.geo4.coframe);
        let e2 = self.det4() * self.det4();
        let ff: f64 = (0..16).map(|k| self.field.frame[k] * self.field.frame_up[k]).sum();
        let r = self.einstein_maxwell_residual();
        let mut rr = 0.0;
        for l in 0..4 {
            for kk in 0..4 {
                for rho in 0..4 {
                    rr += g[ix2(4, l, kk)] * eta.diag(rho) * r[ix2(4, l, rho)] * r[ix2(4, kk, rho)];
                }
            }
        }
        let m = self.maxwell_residual();
        let mm: f64 = (0..4).map(|a| eta.diag(a) * m[a] * m[a]).sum();
        [ff, rr / e2, mm / e2]
    }

    /// `F^{αβ}` in the frame as first-order quantities.
    fn frame_field_duals(&self) -> Vec<Dual> {
        let cp = &self.geo4.coframe;
        let eta = Signature::LORENTZ4;
        let einv = inverse(&cp.e_dual(), 4).expect("nondegenerate tetrad");
        let mut f = vec![Dual::constant(0.0); 16];
        for p in 0..4 {
            for q in 0..4 {
                f[ix2(4, p, q)] = self.a[p].partial(q) - self.a[q].partial(p);
            }
        }
        let mut out = vec![Dual::constant(0.0); 16];
        for al in 0..4 {
            for be in 0..4 {
                let mut acc = Dual::constant(0.0);
                for c in 0..4 {
                    for d in 0..4 {
                        acc += f[ix2(4, c, d)] * einv[ix2(4, c, al)] * einv[ix2(4, d, be)];
                    }
                }
                out[ix2(4, al, be)] = acc.scale(eta.diag(al) * eta.diag(be));
            }
        }
        out
    }

    /// `e^i_β (∂_i F^{αβ} + ω̃_i^α_η F^{ηβ} + ω̃_i^β_η F^{αη})`, i.e. `∇_β F^{αβ}`.
    pub fn maxwell_divergence(&self) -> Vec<f64> {
        let cp = &self.geo4.coframe;
        let sp = &self.geo4.connection;
        let f = self.frame_field_duals();
        let mut out = vec![0.0; 4];
        for al in 0..4 {
            let mut acc = 0.0;
            for be in 0..4 {
                for i in 0..4 {
                    let mut v = f[ix2(4, al, be)].grad[i];
                    for eta in 0..4 {
                        v += sp.omega_mixed(i, al, eta) * f[ix2(4, eta, be)].value
                            + sp.omega_mixed(i, be, eta) * f[ix2(4, al, eta)].value;
                    }
                    acc += cp.einv(i, be) * v;
                }
            }
            out[al] = acc;
        }
        out
    }

    /// `½ e k ∇_β F^{αβ}`.
    pub fn maxwell_residual(&self) -> Vec<f64> {
        let c = 0.5 * self.det4() * self.k;
        self.maxwell_divergence().iter().map(|v| c * v).collect()
    }

    fn omega5(&self, i: usize, mu: usize, nu: usize) -> f64 {
        self.geo5.connection.omega(i, mu, nu)
    }

    /// Two-path comparison of the 5D connection with its closed forms.
    pub fn reduction_report(&self) -> ReductionReport {
        let k = self.k;
        let f = &self.field;
        let tilde = &self.geo4.connection;
        let cp = &self.geo4.coframe;
        let mut report = ReductionReport::default();
        for rho in 0..4 {
            report.fifth_fifth = report.fifth_fifth.max(self.omega5(FIFTH, rho, FIFTH).abs());
            for la in 0..4 {
                let expect = -0.5 * k * f.frame_up[ix2(4, rho, la)];
                report.fifth_frame = report.fifth_frame.max((self.omega5(FIFTH, rho, la) - expect).abs());
            }
        }
        for j in 0..4 {
            for nu in 0..4 {
                let expect: f64 = -0.5 * k * (0..4).map(|r| f.frame_mixed(nu, r) * cp.e(r, j)).sum::<f64>();
                report.mixed = report.mixed.max((self.omega5(j, nu, FIFTH) - expect).abs());
            }
            for mu in 0..4 {
                for nu in 0..4 {
                    let expect = tilde.omega(j, mu, nu) + 0.5 * k * k * f.frame_up[ix2(4, mu, nu)] * self.a[j].value;
                    report.spacetime = report.spacetime.max((self.omega5(j, mu, nu) - expect).abs());
                }
            }
        }
        // Ω_{ij} = −2(∂_i e⁵_j − ∂_j e⁵_i) against −2k F_{ij}
        let c5 = &self.geo5.coframe;
        for i in 0..4 {
            for j in 0..4 {
                let omega = -2.0 * (c5.de(FIFTH, j, i) - c5.de(FIFTH, i, j));
                report.vortex = report.vortex.max((omega + 2.0 * k * f.coordinate[ix2(4, i, j)]).abs());
            }
        }
        report
    }

    /// Raw constrained 5D blocks: `[l][ρ]` for `l, ρ ≤ 4` and the `ρ = 5` column.
    pub fn constrained_blocks(&self) -> (Vec<f64>, Vec<f64>) {
        let sec = SectionPoint::holonomic(&self.geo5.coframe).expect("lifted frame is regular");
        let b = el_residual_b(&sec);
        let mut einstein = vec![0.0; 16];
        let mut maxwell = vec![0.0; 4];
        for l in 0..4 {
            for rho in 0..4 {
                einstein[ix2(4, l, rho)] = b[ix2(5, l, rho)];
            }
            maxwell[l] = b[ix2(5, l, FIFTH)];
        }
        (einstein, maxwell)
    }

    /// The intermediate five-term expansion of the Einstein block.
    pub fn expanded_einstein_block(&self) -> Vec<f64> {
        let sp = &self.geo5.connection;
        let c5 = &self.geo5.coframe;
        let e = |mu: usize, i: usize| c5.e(mu, i);
        // ω_j^λ_η ω_i^{ησ} with η summed over spacetime labels only
        let half = |j: usize, i: usize, la: usize, s: usize| {
            let mut v = sp.domega(j, i, la, s);
            for eta in 0..4 {
                v += sp.omega_mixed(j, la, eta) * sp.omega(i, eta, s);
            }
            v
        };
        let mut out = vec![0.0; 16];
        for_each_saturated(&self.geo4.coframe.e, 4, 0, |up, lo, w| {
            let (p, l, i, j) = (up[0], up[1], up[2], up[3]);
            let (nu, rho, la, s) = (lo[0], lo[1], lo[2], lo[3]);
            let mut v = half(j, i, la, s) * e(nu, p);
            v += sp.omega_mixed(j, la, FIFTH) * sp.omega(i, FIFTH, s) * e(nu, p);
            let mut fifth = sp.domega(j, FIFTH, la, s);
            for eta in 0..4 {
                fifth += sp.omega_mixed(j, la, eta) * sp.omega(FIFTH, eta, s);
                fifth -= sp.omega_mixed(FIFTH, la, eta) * sp.omega(j, eta, s);
            }
            v += fifth * e(FIFTH, p) * e(nu, i);
            let mut last = 0.0;
            for eta in 0..4 {
                last += sp.omega_mixed(FIFTH, s, eta) * sp.omega(j, eta, FIFTH);
            }
            v += last * e(nu, p) * e(la, i);
            out[ix2(4, l, rho)] += 0.5 * w * v;
        });
        out
    }

    /// The intermediate two-term expansion of the `ρ = 5` column.
    pub fn expanded_maxwell_block(&self) -> Vec<f64> {
        let sp = &self.geo5.connection;
        let c4 = &self.geo4.coframe;
        let mut out = vec![0.0; 4];
        for_each_saturated(&c4.e, 4, 2, |up, lo, w| {
            let (l, i) = (up[0], up[1]);
            let (la, s) = (lo[0], lo[1]);
            let mut first = sp.domega(i, FIFTH, la, s);
            let mut second = 0.0;
            for eta in 0..4 {
                first += sp.omega_mixed(i, la, eta) * sp.omega(FIFTH, eta, s);
                second += sp.omega_mixed(FIFTH, la, eta) * sp.omega(i, eta, s);
            }
            out[l] += 0.25 * w * (second - first);
        });
        out
    }

    pub fn chain_report(&self) -> ChainReport {
        let (raw_e, raw_m) = self.constrained_blocks();
        let expanded_e = self.expanded_einstein_block();
        let expanded_m = self.expanded_maxwell_block();
        let final_e = self.einstein_maxwell_residual();
        // saturate the column with e^α_l and compare with the frame Maxwell residual
        let cp = &self.geo4.coframe;
        let saturate = |v: &[f64]| -> Vec<f64> {
            (0..4).map(|al| (0..4).map(|l| cp.e(al, l) * v[l]).sum::<f64>() * MAXWELL_CHAIN_FACTOR).collect()
        };
        let final_m = self.maxwell_residual();
        ChainReport {
            einstein_raw_vs_expanded: max_diff(&raw_e, &expanded_e),
            einstein_expanded_vs_final: max_diff(&expanded_e, &final_e),
            einstein_raw_vs_final: max_diff(&raw_e, &final_e),
            maxwell_raw_vs_expanded: max_diff(&raw_m, &expanded_m),
            maxwell_expanded_vs_final: max_diff(&saturate(&expanded_m), &final_m),
            maxwell_raw_vs_final: max_diff(&saturate(&raw_m), &final_m),
            einstein_residual: max_abs(&final_e),
            maxwell_residual: max_abs(&final_m),
        }
    }
}

/// `e^α_l · (ρ = 5 column) = MAXWELL_CHAIN_FACTOR⁻¹ · ½ e k ∇_β F^{αβ}`.
pub const MAXWELL_CHAIN_FACTOR: f64 = 1.0;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Maximum deviations of the 5D connection from its closed forms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ReductionReport {
    /// `ω_5^{ρ5}` against 0
    pub fifth_fifth: f64,
    /// `ω_5^{ρλ}` against `−½ k F^{ρλ}`
    pub fifth_frame: f64,
    /// `ω_j^{ν5}` against `−½ k F^ν_ρ e^ρ_j`
    pub mixed: f64,
    /// `ω_i^{μν}` against `ω̃_i^{μν} + ½ k² F^{μν} A_i`
    pub spacetime: f64,
    /// vortex tensor `−2de⁵` against `−2k F`
    pub vortex: f64,
}

impl ReductionReport {
    pub fn max(&self) -> f64 {
        [self.fifth_fifth, self.fifth_frame, self.mixed, self.spacetime, self.vortex]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Pairwise agreement of the three stages of the reduction of the field equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ChainReport {
    pub einstein_raw_vs_expanded: f64,
    pub einstein_expanded_vs_final: f64,
    pub einstein_raw_vs_final: f64,
    pub maxwell_raw_vs_expanded: f64,
    pub maxwell_expanded_vs_final: f64,
    pub maxwell_raw_vs_final: f64,
    /// size of the final Einstein–Maxwell residual (not a deviation)
    pub einstein_residual: f64,
    /// size of the final Maxwell residual (not a deviation)
    pub maxwell_residual: f64,
}

impl ChainReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.einstein_raw_vs_expanded,
            self.einstein_expanded_vs_final,
            self.einstein_raw_vs_final,
            self.maxwell_raw_vs_expanded,
            self.maxwell_expanded_vs_final,
            self.maxwell_raw_vs_final,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn reduction_check(cfg: &KaluzaConfig, x: &[f64]) -> Result<ReductionReport, KaluzaError> {
    Ok(cfg.at(x)?.reduction_report())
}

pub fn einstein_maxwell_residual(cfg: &KaluzaConfig, x: &[f64]) -> Result<Vec<f64>, KaluzaError> {
    Ok(cfg.at(x)?.einstein_maxwell_residual())
}

pub fn maxwell_residual(cfg: &KaluzaConfig, x: &[f64]) -> Result<Vec<f64>, KaluzaError> {
    Ok(cfg.at(x)?.maxwell_residual())
}

pub fn reduction_chain_check(cfg: &KaluzaConfig, x: &[f64]) -> Result<ChainReport, KaluzaError> {
    Ok(cfg.at(x)?.chain_report())
}

/// Full unconstrained 5D Einstein density of the lifted frame, `[l][ρ]` over 5 × 5.
pub fn lifted_einstein_density(cfg: &KaluzaConfig, x: &[f64]) -> Result<Vec<f64>, KaluzaError> {
    let p = cfg.at(x)?;
    Ok(p.geo5.einstein_density()?)
}

/// Fits `k` so that the Einstein–Maxwell residual of the given configuration
/// vanishes in the least-squares sense at `x` (the configuration's own `k` is ignored).
pub fn calibrate_coupling(cfg: &KaluzaConfig, x: &[f64]) -> Result<f64, KaluzaError> {
    let p = cfg.at(x)?;
    let lhs = p.einstein_maxwell_lhs();
    let source: Vec<f64> = p.stress().iter().map(|t| 0.5 * p.det4() * t).collect();
    let num: f64 = lhs.iter().zip(&source).map(|(l, s)| l * s).sum();
    let den: f64 = source.iter().map(|s| s * s).sum();
    let k2 = -num / den;
    if !(k2 > 0.0) {
        return Err(KaluzaError::Calibration(k2));
    }
    Ok(k2.sqrt())
}

/// Gauge transformation preserving the Kaluza form: a spacetime Lorentz
/// field, an affine spacetime chart and a fibre shift `x̄⁵ = x⁵ + f(x)`.
#[derive(Clone, Debug)]
pub struct RestrictedGauge {
    pub lambda: JetMap,
    pub coords: CoordMap,
    pub shift: Expr,
}

impl RestrictedGauge {
    /// The same transformation as a 5D gauge element with block `Λ ⊕ 1`.
    pub fn to_gauge_element(&self) -> GaugeElement {
        let lambda = self.lambda.clone();
        let lambda5 = JetMap::new(25, move |x| {
            let l = lambda.eval(&x[..4])?;
            let mut out = vec![Jet2::constant(0.0); 25];
            for a in 0..4 {
                for b in 0..4 {
                    out[ix2(5, a, b)] = l[ix2(4, a, b)];
                }
            }
            out[ix2(5, FIFTH, FIFTH)] = Jet2::constant(1.0);
            Ok(out)
        });
        let coords = self.coords.clone();
        let shift = self.shift.clone();
        let map = JetMap::new(5, move |x| {
            let mut out = match &coords {
                CoordMap::Identity => x[..4].to_vec(),
                CoordMap::Affine { matrix, offset } => (0..4)
                    .map(|a| {
                        let mut acc = Jet2::constant(offset[a]);
                        for b in 0..4 {
                            acc += x[b].scale(matrix[ix2(4, a, b)]);
                        }
                        acc
                    })
                    .collect(),
                CoordMap::General(f) => f.eval(&x[..4])?,
            };
            out.push(x[FIFTH] + eval_jet(&shift, &x[..4], &Params::new())?);
            Ok(out)
        });
        GaugeElement::new(Signature::LORENTZ5, lambda5, CoordMap::General(map))
    }

    /// Maps `x` to `x̄` on spacetime.
    pub fn image(&self, x: &[f64]) -> Result<Vec<f64>, KaluzaError> {
        let (a, b) = self.affine()?;
        Ok((0..4).map(|r| b[r] + (0..4).map(|c| a[ix2(4, r, c)] * x[c]).sum::<f64>()).collect())
    }

    fn affine(&self) -> Result<(Vec<f64>, Vec<f64>), KaluzaError> {
        match &self.coords {
            CoordMap::Identity => {
                Ok(((0..16).map(|k| if k / 4 == k % 4 { 1.0 } else { 0.0 }).collect(), vec![0.0; 4]))
            }
            CoordMap::Affine { matrix, offset } => Ok((matrix.clone(), offset.clone())),
            CoordMap::General(_) => Err(KaluzaError::NonAffineChart),
        }
    }
}

/// The transformed configuration as fields of `x̄`:
/// `ē^μ_j = Λ^μ_σ e^σ_i ∂x^i/∂x̄^j`, `Ā_j = (A_i + k⁻¹ ∂_i f) ∂x^i/∂x̄^j`.
pub fn restricted_gauge_transform(cfg: &KaluzaConfig, g: &RestrictedGauge) -> Result<KaluzaConfig, KaluzaError> {
    let (jinv, back) = g.coords.affine_inverse(4).ok_or(KaluzaError::NonAffineChart)?;
    let pullback = move |xbar: &[Jet2]| -> Vec<Jet2> {
        (0..4)
            .map(|r| {
                let mut acc = Jet2::constant(back[r]);
                for c in 0..4 {
                    acc += xbar[c].scale(jinv[ix2(4, r, c)]);
                }
                acc
            })
            .collect()
    };
    let jinv2 = g.coords.affine_inverse(4).unwrap().0;
    let (tetrad, lambda, pb) = (cfg.tetrad.clone(), g.lambda.clone(), pullback.clone());
    let ji = jinv2.clone();
    let frame = JetMap::new(16, move |xbar| {
        let x = pb(xbar);
        let e = tetrad.eval_jets(&x)?;
        let l = lambda.eval(&x)?;
        let mut out = vec![Jet2::constant(0.0); 16];
        for mu in 0..4 {
            for j in 0..4 {
                let mut acc = Jet2::constant(0.0);
                for s in 0..4 {
                    for i in 0..4 {
                        let w = ji[ix2(4, i, j)];
                        if w != 0.0 {
                            acc += (l[ix2(4, mu, s)] * e[ix2(4, s, i)]).scale(w);
                        }
                    }
                }
                out[ix2(4, mu, j)] = acc;
            }
        }
        Ok(out)
    });
    let grad_f: Vec<Expr> = (0..4).map(|i| g.shift.diff(i)).collect();
    let (potential, k) = (cfg.potential.clone(), cfg.k);
    let new_potential = JetMap::new(4, move |xbar| {
        let x = pullback(xbar);
        let a = potential.eval(&x)?;
        let df = grad_f.iter().map(|d| eval_jet(d, &x, &Params::new())).collect::<Result<Vec<_>, _>>()?;
        Ok((0..4)
            .map(|j| {
                let mut acc = Jet2::constant(0.0);
                for i in 0..4 {
                    acc += (a[i] + df[i].scale(1.0 / k)).scale(jinv2[ix2(4, i, j)]);
                }
                acc
            })
            .collect())
    });
    Ok(KaluzaConfig::new(CoframeField::new(Signature::LORENTZ4, frame), new_potential, k))
}

/// Deviations of transformed quantities from the covariantly transported originals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// `F̄_{jk}(x̄)` against `F_{ab} ∂x^a/∂x̄^j ∂x^b/∂x̄^k`
    pub field_strength: f64,
    /// transformed Einstein–Maxwell residual against the transported one
    pub einstein_maxwell: f64,
    /// transformed Maxwell residual against the transported one
    pub maxwell: f64,
    /// `ē⁵_5 = 1`, `ē^μ_5 = 0` on the lifted transformed frame
    pub constraint: f64,
    /// change of the scalar invariants `F_{μν}F^{μν}`, `|res|²` and `|maxwell|²`
    pub invariants: f64,
}

impl CovarianceReport {
    pub fn max(&self) -> f64 {
        [self.field_strength, self.einstein_maxwell, self.maxwell, self.constraint, self.invariants]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn gauge_covariance_check(cfg: &KaluzaConfig, g: &RestrictedGauge, x: &[f64]) -> Result<CovarianceReport, KaluzaError> {
    let before = cfg.at(x)?;
    let transformed = restricted_gauge_transform(cfg, g)?;
    let xbar = g.image(x)?;
    let after = transformed.at(&xbar)?;
    let (a, _) = g.affine()?;
    let jinv = inverse(&a, 4).ok_or(KaluzaError::NonAffineChart)?;
    let det_jinv = determinant(&jinv, 4);
    let lam: Vec<f64> = g.lambda.eval(&jet_seed(x)).map_err(|source| KaluzaError::Eval { point: x.to_vec(), source })?
        .iter()
        .map(|j| j.value)
        .collect();
    let eta = Signature::LORENTZ4;
    let lam_inv = |a: usize, b: usize| lam[ix2(4, b, a)] * eta.diag(a) * eta.diag(b);

    let mut field = 0.0f64;
    for j in 0..4 {
        for kk in 0..4 {
            let mut v = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    v += before.field.coordinate[ix2(4, p, q)] * jinv[ix2(4, p, j)] * jinv[ix2(4, q, kk)];
                }
            }
            field = field.max((after.field.coordinate[ix2(4, j, kk)] - v).abs());
        }
    }

    let r0 = before.einstein_maxwell_residual();
    let r1 = after.einstein_maxwell_residual();
    let mut em = 0.0f64;
    for l in 0..4 {
        for rho in 0..4 {
            let mut v = 0.0;
            for kk in 0..4 {
                for s in 0..4 {
                    v += a[ix2(4, l, kk)] * r0[ix2(4, kk, s)] * lam_inv(s, rho);
                }
            }
            em = em.max((r1[ix2(4, l, rho)] - det_jinv * v).abs());
        }
    }

    let m0 = before.maxwell_residual();
    let m1 = after.maxwell_residual();
    let mut mx = 0.0f64;
    for al in 0..4 {
        let v: f64 = (0..4).map(|b| lam[ix2(4, al, b)] * m0[b]).sum();
        mx = mx.max((m1[al] - det_jinv * v).abs());
    }

    let c5 = &after.geo5.coframe;
    let mut constraint = (c5.e(FIFTH, FIFTH) - 1.0).abs();
    for mu in 0..4 {
        constraint = constraint.max(c5.e(mu, FIFTH).abs());
    }
    let invariants = max_diff(&before.invariants(), &after.invariants());
    Ok(CovarianceReport { field_strength: field, einstein_maxwell: em, maxwell: mx, constraint, invariants })
}

/// Compares the 5D gauge transform of the lifted section with the lift of the
/// transformed configuration (values, first derivatives and connection).
pub fn lift_commutation_check(cfg: &KaluzaConfig, g: &RestrictedGauge, x: &[f64]) -> Result<f64, KaluzaError> {
    let mut x5d = x.to_vec();
    x5d.push(0.0);
    let lifted = crate::frame::evaluate_coframe(&lift_coframe(cfg), &x5d)?;
    let sec = SectionPoint::holonomic(&lifted)?;
    let moved = gauge_transform_section(&sec, &g.to_gauge_element()).map_err(|e| KaluzaError::Gauge(e.to_string()))?;
    let mut xbar = g.image(x)?;
    xbar.push(crate::expr::eval_value(&g.shift, x, &Params::new()).map_err(|source| KaluzaError::Eval { point: x.to_vec(), source })?);
    let direct = crate::frame::evaluate_coframe(&lift_coframe(&restricted_gauge_transform(cfg, g)?), &xbar)?;
    let direct_sec = SectionPoint::holonomic(&direct)?;
    let mut dev = max_diff(&moved.e, &direct_sec.e).max(max_diff(&moved.de, &direct_sec.de));
    for i in 0..5 {
        for mu in 0..5 {
            for nu in 0..5 {
                dev = dev.max((moved.connection.omega(i, mu, nu) - direct_sec.connection.omega(i, mu, nu)).abs());
            }
        }
    }
    Ok(dev)
}

/// Random polynomial-plus-trigonometric fibre shift `f(x)`.
pub fn random_shift(rng: &mut impl Rng, amplitude: f64) -> Expr {
    let mut c = || amplitude * rng.gen_range(-1.0..1.0);
    let text = format!(
        "({}) * x1 + ({}) * x2 * x3 + ({}) * x4^2 + ({}) * sin(x1 + x4) + ({}) * x2^3",
        c(), c(), c(), c(), c()
    );
    crate::expr::parse(&text, 4).expect("generated shift parses")
}

/// Random restricted gauge element with a non-constant Lorentz field.
pub fn random_restricted_gauge(rng: &mut impl Rng, amplitude: f64) -> RestrictedGauge {
    let lambda = random_lorentz_field(Signature::LORENTZ4, rng, amplitude);
    let coords = random_affine_map(4, rng, amplitude);
    let shift = random_shift(rng, amplitude);
    RestrictedGauge { lambda, coords, shift }
}

/// Pure fibre shift `x̄⁵ = x⁵ + f(x)`.
pub fn fibre_shift(shift: Expr) -> RestrictedGauge {
    RestrictedGauge { lambda: identity_lorentz(), coords: CoordMap::Identity, shift }
}

fn identity_lorentz() -> JetMap {
    JetMap::new(16, |_| Ok((0..16).map(|k| Jet2::constant(if k / 4 == k % 4 { 1.0 } else { 0.0 })).collect()))
}

#[cfg(test)]
mod tests;

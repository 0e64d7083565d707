//! Batch jobs: a JSON description of checks over a grid of points, evaluated
//! into a deterministic report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Params};
use crate::frame::{coordinate_oracle, ix3, max_abs, torsion_residual, FrameGeometry};
use crate::jbundle::{
    commuting_diagram_check, omega_identity_check, random_affine_map, random_gauge_element, random_quadratic_map,
    theta_density, theta_gauge_invariance_check, SectionPoint, THETA_SCALAR_RATIO,
};
use crate::kaluza::KaluzaConfig;
use crate::solutions::{lookup, NamedSolution, SolutionFlags};
use crate::tensor::Signature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Vacuum,
    EinsteinMaxwell,
    Identities,
    Reduction,
    ReductionChain,
    ThetaDensity,
}

impl CheckKind {
    pub fn id(self) -> &'static str {
        match self {
            CheckKind::Vacuum => "vacuum",
            CheckKind::EinsteinMaxwell => "einstein-maxwell",
            CheckKind::Identities => "identities",
            CheckKind::Reduction => "reduction",
            CheckKind::ReductionChain => "reduction-chain",
            CheckKind::ThetaDensity => "theta-density",
        }
    }

    fn needs_potential(self) -> bool {
        matches!(self, CheckKind::EinsteinMaxwell | CheckKind::Reduction | CheckKind::ReductionChain)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SolutionRef {
    Named {
        name: String,
        #[serde(default)]
        params: Params,
    },
    Inline {
        /// `[p, q]`: number of timelike (−1) and spacelike (+1) entries of `η`.
        signature: [usize; 2],
        tetrad: Vec<Vec<String>>,
        #[serde(default)]
        potential: Option<Vec<String>>,
        #[serde(default)]
        coupling: Option<f64>,
        #[serde(default)]
        params: Params,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    /// Tensor-product grid, one range per coordinate (count 1 takes `min`).
    Ranges(Vec<Range>),
    Points(Vec<Vec<f64>>),
}

impl Grid {
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            Grid::Points(p) => p.clone(),
            Grid::Ranges(ranges) => {
                let axis = |r: &Range| -> Vec<f64> {
                    if r.count == 1 {
                        return vec![r.min];
                    }
                    (0..r.count).map(|k| r.min + (r.max - r.min) * k as f64 / (r.count - 1) as f64).collect()
                };
                let mut out = vec![Vec::new()];
                for r in ranges {
                    out = out
                        .into_iter()
                        .flat_map(|head| {
                            axis(r).into_iter().map(move |v| {
                                let mut p = head.clone();
                                p.push(v);
                                p
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Directory for `report.json` (and `report.csv`); stdout when absent.
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub csv: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Debug {
    /// Reverses the inhomogeneous term of the connection transformation law.
    #[serde(default)]
    pub flip_omega_sign: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub checks: Vec<CheckKind>,
    pub solution: SolutionRef,
    pub grid: Grid,
    pub tolerance: f64,
    /// Per-check overrides of `tolerance`.
    #[serde(default)]
    pub tolerances: BTreeMap<CheckKind, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub debug: Debug,
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("config: {0}")]
    Config(String),
    #[error("evaluation at x = {point:?} ({check}): {message}")]
    Evaluation { point: Vec<f64>, check: &'static str, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Config(_) | JobError::Io(_) => 2,
            JobError::Evaluation { .. } => 3,
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> JobError {
    JobError::Config(e.to_string())
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, JobError> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), JobError> {
        if self.checks.is_empty() {
            return Err(config_error("no checks requested"));
        }
        let tol_ok = |t: f64| t.is_finite() && t > 0.0;
        if !tol_ok(self.tolerance) || !self.tolerances.values().all(|&t| tol_ok(t)) {
            return Err(config_error("tolerances must be positive"));
        }
        match &self.grid {
            Grid::Points(p) if p.is_empty() => Err(config_error("grid has no points")),
            Grid::Ranges(r) if r.is_empty() || r.iter().any(|r| r.count == 0 || !(r.min <= r.max)) => {
                Err(config_error("grid ranges need count ≥ 1 and min ≤ max"))
            }
            _ => Ok(()),
        }
    }

    pub fn tolerance_for(&self, check: CheckKind) -> f64 {
        self.tolerances.get(&check).copied().unwrap_or(self.tolerance)
    }

    /// Resolves the referenced solution; inline solutions get an unbounded domain.
    pub fn resolve_solution(&self) -> Result<NamedSolution, JobError> {
        match &self.solution {
            SolutionRef::Named { name, params } => lookup(name, params, self.seed).map_err(config_error),
            SolutionRef::Inline { signature, tetrad, potential, coupling, params } => {
                let sig = Signature::new(signature[0], signature[1]);
                let m = sig.dim();
                if !(2..=5).contains(&m) || tetrad.len() != m || tetrad.iter().any(|r| r.len() != m) {
                    return Err(config_error(format!("inline tetrad must be {m}×{m} with 2 ≤ m ≤ 5")));
                }
                let parse_all = |rows: &[String]| -> Result<Vec<_>, JobError> {
                    rows.iter().map(|s| parse(s, m).map_err(|e| config_error(format!("`{s}`: {e}")))).collect()
                };
                let tetrad = tetrad.iter().map(|r| parse_all(r)).collect::<Result<Vec<_>, _>>()?;
                let potential = match potential {
                    Some(p) if m != 4 || p.len() != 4 => return Err(config_error("potential needs a 4D tetrad and 4 entries")),
                    Some(p) => Some(parse_all(p)?),
                    None => None,
                };
                if potential.is_some() && coupling.is_none() {
                    return Err(config_error("inline potential needs a coupling"));
                }
                Ok(NamedSolution {
                    name: "inline".into(),
                    params: params.clone(),
                    signature: sig,
                    tetrad,
                    potential,
                    coupling: *coupling,
                    domain: Vec::new(),
                    flags: SolutionFlags::default(),
                })
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub solution: String,
    pub params: Params,
    pub version: &'static str,
    pub seed: u64,
    pub grid: Grid,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointResult {
    pub index: usize,
    pub x: Vec<f64>,
    pub norm: f64,
    pub components: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: CheckKind,
    pub tolerance: f64,
    pub max: f64,
    pub mean: f64,
    pub pass: bool,
    pub points: Vec<PointResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Long format: `x1..xm,check,component,value`, one `norm` row per point and check.
    pub fn to_csv(&self) -> String {
        let m = self.checks.first().and_then(|c| c.points.first()).map_or(0, |p| p.x.len());
        let mut out = String::new();
        for c in 1..=m {
            let _ = write!(out, "x{c},");
        }
        out.push_str("check,component,value\n");
        for check in &self.checks {
            for p in &check.points {
                let coords: String = p.x.iter().map(|v| format!("{v:e},")).collect();
                for (name, v) in &p.components {
                    let _ = writeln!(out, "{coords}{},{name},{v:e}", check.check.id());
                }
                let _ = writeln!(out, "{coords}{},norm,{:e}", check.check.id(), p.norm);
            }
        }
        out
    }
}

struct Context {
    solution: NamedSolution,
    kaluza: Option<KaluzaConfig>,
    seed: u64,
    flip: bool,
}

fn components(prefix: &str, dims: &[usize], v: &[f64]) -> Vec<(String, f64)> {
    v.iter()
        .enumerate()
        .map(|(k, &val)| {
            let mut rest = k;
            let mut idx = Vec::new();
            for d in dims.iter().rev() {
                idx.push(rest % d + 1);
                rest /= d;
            }
            idx.reverse();
            let tag: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            (format!("{prefix}{}", tag.join("_")), val)
        })
        .collect()
}

fn named(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(n, v)| (n.to_string(), *v)).collect()
}

fn evaluate(ctx: &Context, check: CheckKind, index: usize, x: &[f64]) -> Result<Vec<(String, f64)>, String> {
    let m = ctx.solution.dim();
    let field = ctx.solution.coframe();
    let sig = ctx.solution.signature;
    match check {
        CheckKind::Vacuum => {
            let geo = FrameGeometry::at(&field, x).map_err(|e| e.to_string())?;
            let d = geo.einstein_density().map_err(|e| e.to_string())?;
            Ok(components("E_", &[m, m], &d))
        }
        CheckKind::EinsteinMaxwell => {
            let p = ctx.kaluza.as_ref().expect("validated").at(x).map_err(|e| e.to_string())?;
            let mut out = components("E_", &[4, 4], &p.einstein_maxwell_residual());
            out.extend(components("M_", &[4], &p.maxwell_residual()));
            Ok(out)
        }
        CheckKind::Reduction => {
            let r = ctx.kaluza.as_ref().expect("validated").at(x).map_err(|e| e.to_string())?.reduction_report();
            Ok(named(&[
                ("omega_5_rho5", r.fifth_fifth),
                ("omega_5_rholambda", r.fifth_frame),
                ("omega_j_nu5", r.mixed),
                ("omega_i_munu", r.spacetime),
                ("vortex", r.vortex),
            ]))
        }
        CheckKind::ReductionChain => {
            let c = ctx.kaluza.as_ref().expect("validated").at(x).map_err(|e| e.to_string())?.chain_report();
            Ok(named(&[
                ("einstein_raw_vs_expanded", c.einstein_raw_vs_expanded),
                ("einstein_expanded_vs_final", c.einstein_expanded_vs_final),
                ("einstein_raw_vs_final", c.einstein_raw_vs_final),
                ("maxwell_raw_vs_expanded", c.maxwell_raw_vs_expanded),
                ("maxwell_expanded_vs_final", c.maxwell_expanded_vs_final),
                ("maxwell_raw_vs_final", c.maxwell_raw_vs_final),
            ]))
        }
        CheckKind::ThetaDensity => {
            let geo = FrameGeometry::at(&field, x).map_err(|e| e.to_string())?;
            let sec = SectionPoint::holonomic(&geo.coframe).map_err(|e| e.to_string())?;
            let expected = THETA_SCALAR_RATIO * geo.coframe.det() * geo.curvature.scalar(&geo.coframe);
            Ok(named(&[("proportionality", theta_density(&sec) - expected)]))
        }
        CheckKind::Identities => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            rng.set_stream(index as u64);
            let geo = FrameGeometry::at(&field, x).map_err(|e| e.to_string())?;
            let cp = &geo.coframe;
            let sp = &geo.connection;
            let torsion = max_abs(&torsion_residual(cp, sp));
            let oracle = coordinate_oracle(&field, x).map_err(|e| e.to_string())?.spin_connection(cp);
            let mut connection = 0.0f64;
            for i in 0..m {
                for mu in 0..m {
                    for nu in 0..m {
                        connection = connection.max((oracle[ix3(m, i, mu, nu)] - sp.omega(i, mu, nu)).abs());
                    }
                }
            }
            let identity = omega_identity_check(&SectionPoint::random(sig, &mut rng, 0.3));
            let coords = random_affine_map(m, &mut rng, 0.2);
            let mut g = random_gauge_element(sig, &mut rng, 0.3, coords);
            g.flip_inhomogeneous = ctx.flip;
            let diagram = commuting_diagram_check(cp, &g).map_err(|e| e.to_string())?;
            let coords = random_quadratic_map(m, &mut rng, 0.05);
            let mut g = random_gauge_element(sig, &mut rng, 0.3, coords);
            g.flip_inhomogeneous = ctx.flip;
            let sec = SectionPoint::holonomic(cp).map_err(|e| e.to_string())?;
            let theta = theta_gauge_invariance_check(&sec, &g).map_err(|e| e.to_string())?;
            Ok(named(&[
                ("torsion", torsion),
                ("oracle_connection", connection),
                ("omega_identity", identity),
                ("commuting_diagram", diagram),
                ("theta_invariance", theta),
            ]))
        }
    }
}

/// Evaluates every requested check on every grid point. Points are processed
/// in parallel; the report is ordered by grid index.
pub fn run(cfg: &JobConfig) -> Result<Report, JobError> {
    let solution = cfg.resolve_solution()?;
    let m = solution.dim();
    let points = cfg.grid.points();
    if let Some(bad) = points.iter().find(|p| p.len() != m) {
        return Err(config_error(format!("grid point {bad:?} has {} coordinates, solution has {m}", bad.len())));
    }
    let kaluza = solution.kaluza();
    for &check in &cfg.checks {
        if check.needs_potential() && kaluza.is_none() {
            return Err(config_error(format!("check `{}` needs a solution with a potential", check.id())));
        }
        if check == CheckKind::Vacuum && m < 3 {
            return Err(config_error("vacuum check needs dimension ≥ 3"));
        }
    }
    let ctx = Context { solution, kaluza, seed: cfg.seed, flip: cfg.debug.flip_omega_sign };

    let mut checks = Vec::new();
    for &check in &cfg.checks {
        let results: Vec<Result<PointResult, JobError>> = points
            .par_iter()
            .enumerate()
            .map(|(index, x)| {
                let fail = |message: String| JobError::Evaluation { point: x.clone(), check: check.id(), message };
                if !ctx.solution.contains(x) {
                    return Err(fail(format!("outside the domain of `{}`", ctx.solution.name)));
                }
                let components = evaluate(&ctx, check, index, x).map_err(fail)?;
                let norm = components.iter().fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));
                if !norm.is_finite() {
                    return Err(fail("non-finite residual".into()));
                }
                Ok(PointResult { index, x: x.clone(), norm, components })
            })
            .collect();
        let points: Vec<PointResult> = results.into_iter().collect::<Result<_, _>>()?;
        let max = points.iter().fold(0.0f64, |a, p| a.max(p.norm));
        let mean = points.iter().map(|p| p.norm).sum::<f64>() / points.len() as f64;
        let tolerance = cfg.tolerance_for(check);
        checks.push(CheckReport { check, tolerance, max, mean, pass: max <= tolerance, points });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        provenance: Provenance {
            solution: ctx.solution.name.clone(),
            params: ctx.solution.params.clone(),
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            grid: cfg.grid.clone(),
            points: points.len(),
        },
        checks,
        pass,
    })
}

//! Jet-valued field definitions: coframes, potentials, gauge matrices.

use std::fmt;
use std::sync::Arc;

use crate::expr::{eval_jet, EvalError, Expr, Params};
use crate::tensor::{Jet2, Signature};

type JetFn = dyn Fn(&[Jet2]) -> Result<Vec<Jet2>, EvalError> + Send + Sync;

/// A vector of scalar functions of the base coordinates, evaluated on jets.
#[derive(Clone)]
pub struct JetMap {
    outputs: usize,
    f: Arc<JetFn>,
}

impl fmt::Debug for JetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetMap").field("outputs", &self.outputs).finish_non_exhaustive()
    }
}

impl JetMap {
    pub fn new(outputs: usize, f: impl Fn(&[Jet2]) -> Result<Vec<Jet2>, EvalError> + Send + Sync + 'static) -> Self {
        Self { outputs, f: Arc::new(f) }
    }

    pub fn from_exprs(exprs: Vec<Expr>, params: Params) -> Self {
        let outputs = exprs.len();
        Self::new(outputs, move |x| exprs.iter().map(|e| eval_jet(e, x, &params)).collect())
    }

    pub fn constant(values: Vec<f64>) -> Self {
        Self::new(values.len(), move |_| Ok(values.iter().map(|&v| Jet2::constant(v)).collect()))
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn eval(&self, x: &[Jet2]) -> Result<Vec<Jet2>, EvalError> {
        let out = (self.f)(x)?;
        debug_assert_eq!(out.len(), self.outputs);
        Ok(out)
    }
}

/// Coframe field `e^μ_i(x)`, stored row-major (`μ` major, `i` minor).
#[derive(Clone, Debug)]
pub struct CoframeField {
    signature: Signature,
    entries: JetMap,
}

impl CoframeField {
    pub fn new(signature: Signature, entries: JetMap) -> Self {
        let m = signature.dim();
        assert_eq!(entries.outputs(), m * m, "coframe needs m² entries");
        Self { signature, entries }
    }

    /// Builds the field from `m × m` expressions, rows indexed by the frame label.
    pub fn from_exprs(signature: Signature, rows: Vec<Vec<Expr>>, params: Params) -> Self {
        let m = signature.dim();
        assert_eq!(rows.len(), m);
        assert!(rows.iter().all(|r| r.len() == m));
        Self::new(signature, JetMap::from_exprs(rows.into_iter().flatten().collect(), params))
    }

    /// The constant identity coframe.
    pub fn identity(signature: Signature) -> Self {
        let m = signature.dim();
        let v = (0..m * m).map(|k| if k / m == k % m { 1.0 } else { 0.0 }).collect();
        Self::new(signature, JetMap::constant(v))
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn entries(&self) -> &JetMap {
        &self.entries
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Vec<Jet2>, EvalError> {
        self.entries.eval(x)
    }
}

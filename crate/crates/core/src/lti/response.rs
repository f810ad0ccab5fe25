use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::matrix::{CMatrix, FrequencyResponse, TransferMatrix};
use crate::error::Result;

pub type EvalFn = dyn Fn(Complex64) -> Result<CMatrix> + Send + Sync;

/// A matrix function known either exactly or only through pointwise evaluation.
#[derive(Clone)]
pub enum Response {
    Exact(TransferMatrix),
    Pointwise { rows: usize, cols: usize, f: Arc<EvalFn> },
}

impl Response {
    pub fn pointwise(rows: usize, cols: usize, f: impl Fn(Complex64) -> Result<CMatrix> + Send + Sync + 'static) -> Self {
        Response::Pointwise { rows, cols, f: Arc::new(f) }
    }

    pub fn exact(&self) -> Option<&TransferMatrix> {
        match self {
            Response::Exact(t) => Some(t),
            Response::Pointwise { .. } => None,
        }
    }
}

impl FrequencyResponse for Response {
    fn dims(&self) -> (usize, usize) {
        match self {
            Response::Exact(t) => (t.rows(), t.cols()),
            Response::Pointwise { rows, cols, .. } => (*rows, *cols),
        }
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        match self {
            Response::Exact(t) => t.eval(s),
            Response::Pointwise { f, .. } => f(s),
        }
    }
}

impl fmt::Debug for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Response::Exact(t) => f.debug_tuple("Exact").field(t).finish(),
            Response::Pointwise { rows, cols, .. } => write!(f, "Pointwise({rows}x{cols})"),
        }
    }
}

//! Residuals of identity checks.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar_field::{Backend, Scalar};
use crate::tensor_alg::{SparseOp, SparseVec};

/// Size of LHS − RHS for one identity. In the exact backend only
/// `exact_zero` matters; in the float backend `relative` is compared with the
/// tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub absolute: f64,
    pub relative: f64,
    pub exact_zero: bool,
    pub backend: Backend,
    /// Rendering of the largest entry of the difference ("0" when it vanishes).
    pub value: String,
}

impl Residual {
    pub fn zero(backend: Backend) -> Self {
        Residual {
            absolute: 0.0,
            relative: 0.0,
            exact_zero: true,
            backend,
            value: "0".into(),
        }
    }

    fn from_diff<'a, S: Scalar>(diff: impl Iterator<Item = &'a S>, scale: f64) -> Self {
        let mut worst: Option<&S> = None;
        let mut absolute = 0.0f64;
        let mut nonzero = false;
        for v in diff {
            nonzero = true;
            let m = v.magnitude();
            if worst.is_none() || m > absolute {
                absolute = m;
                worst = Some(v);
            }
        }
        Residual {
            absolute,
            relative: absolute / scale.max(1.0),
            exact_zero: !nonzero,
            backend: S::BACKEND,
            value: worst.map(|v| v.render()).unwrap_or_else(|| "0".into()),
        }
    }

    pub fn of_ops<S: Scalar>(lhs: &SparseOp<S>, rhs: &SparseOp<S>) -> Result<Self> {
        let d = lhs.sub(rhs)?;
        let scale = lhs.max_abs().max(rhs.max_abs());
        Ok(Self::from_diff(d.values(), scale))
    }

    pub fn of_vecs<S: Scalar>(lhs: &SparseVec<S>, rhs: &SparseVec<S>) -> Result<Self> {
        let d = lhs.sub(rhs)?;
        let scale = lhs.max_abs().max(rhs.max_abs());
        Ok(Self::from_diff(d.values(), scale))
    }

    pub fn of_scalars<S: Scalar>(lhs: &S, rhs: &S) -> Self {
        let d = lhs.clone() - rhs.clone();
        let scale = lhs.magnitude().max(rhs.magnitude());
        let vals: Vec<S> = if d.is_zero() { vec![] } else { vec![d] };
        Self::from_diff(vals.iter(), scale)
    }

    /// A float residual from precomputed sizes.
    pub fn float(absolute: f64, relative: f64) -> Self {
        Residual {
            absolute,
            relative,
            exact_zero: absolute == 0.0,
            backend: Backend::Float,
            value: format!("{relative:e}"),
        }
    }

    /// The worse of two residuals.
    pub fn max(self, other: Residual) -> Residual {
        let self_worse = match (self.exact_zero, other.exact_zero) {
            (true, false) => false,
            (false, true) => true,
            _ => self.relative >= other.relative,
        };
        if self_worse {
            self
        } else {
            other
        }
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        match self.backend {
            Backend::Exact => self.exact_zero,
            Backend::Float => self.relative <= tolerance,
        }
    }
}

pub fn max_all(backend: Backend, items: impl IntoIterator<Item = Residual>) -> Residual {
    items
        .into_iter()
        .fold(Residual::zero(backend), Residual::max)
}

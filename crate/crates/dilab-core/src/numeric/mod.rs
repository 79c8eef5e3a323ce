//! Dense complex linear algebra primitives shared by every other module,
//! plus the tolerance policy that all operator identities are audited against.

pub mod matrix;
pub mod spectral;

use thiserror::Error;

/// Errors produced by the numeric layer.
#[derive(Debug, Error)]
pub enum NumericError {
    #[error("matrix entries must be finite (no NaN/Inf)")]
    NonFinite,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e}")]
    NotPsd { eigenvalue: f64 },
    #[error("tolerance out of range: rank_eps and residual_eps must lie in (0, 1)")]
    InvalidTolerance,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

/// Numerical policy: `rank_eps` is the cutoff deciding which singular or
/// eigenvalues count as zero, `residual_eps` is the acceptance threshold for
/// operator identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rank_eps: f64,
    pub residual_eps: f64,
}

impl Tolerance {
    pub fn new(rank_eps: f64, residual_eps: f64) -> Result<Self, NumericError> {
        let ok = |x: f64| x.is_finite() && x > 0.0 && x < 1.0;
        if !(ok(rank_eps) && ok(residual_eps)) {
            return Err(NumericError::InvalidTolerance);
        }
        Ok(Tolerance {
            rank_eps,
            residual_eps,
        })
    }
}

impl Default for Tolerance {
    /// Double-precision headroom for dimensions up to ~64.
    fn default() -> Self {
        Tolerance {
            rank_eps: 1e-9,
            residual_eps: 1e-8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_rejects_out_of_range() {
        assert!(Tolerance::new(0.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-9, 1.0).is_err());
        assert!(Tolerance::new(f64::NAN, 1e-8).is_err());
        assert!(Tolerance::new(1e-9, 1e-8).is_ok());
    }
}

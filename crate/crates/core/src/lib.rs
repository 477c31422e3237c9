//! Exact-rational laboratory for pseudo-physical measures of continuous
//! interval maps.
//!
//! Every map is a continuous piecewise-affine self-map of `[0,1]` with
//! rational nodes, every measure is a finite atomic measure with rational
//! weights, and every certificate is checked with exact arithmetic.

pub mod cascade;
pub mod error;
pub mod horseshoe;
pub mod interval;
pub mod measures;
pub mod pseudo_physical;
pub mod pwa;
pub mod qr_covering;
pub mod rational;
pub mod sampling;
pub mod shadowing;
pub mod shrinking;
pub mod symbolic;

pub use error::{LabError, Result};
pub use interval::Interval;
pub use measures::AtomicMeasure;
pub use pwa::{PwaMap, DEFAULT_PIECE_CAP};
pub use rational::{q, Rational};

/// Outcome of a verifier: either the certified object or a refusal naming
/// the first violated condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<T> {
    Accepted(T),
    Refused(String),
}

impl<T> Verdict<T> {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted(_))
    }

    pub fn accepted(self) -> Option<T> {
        match self {
            Verdict::Accepted(t) => Some(t),
            Verdict::Refused(_) => None,
        }
    }

    pub fn refusal(&self) -> Option<&str> {
        match self {
            Verdict::Accepted(_) => None,
            Verdict::Refused(r) => Some(r),
        }
    }

    /// Unwrap an accepted value or turn the refusal into an internal error.
    pub fn expect_accepted(self, what: &str) -> Result<T> {
        match self {
            Verdict::Accepted(t) => Ok(t),
            Verdict::Refused(r) => Err(LabError::Internal(format!("{what}: {r}"))),
        }
    }
}

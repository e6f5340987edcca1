use thiserror::Error;

use crate::scan::{Quantity, ValidationReport};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },

    #[error("{field} must be nonnegative, got {value}")]
    Negative { field: &'static str, value: f64 },

    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },

    /// Zero (or infinite) linear power asked for a dBm value.
    #[error("{mw} mW has no logarithmic form")]
    NoLogarithmicForm { mw: f64 },

    #[error("efficiency must lie in (0, 1], got {0}")]
    EfficiencyOutOfRange(f64),

    #[error("polarization split must lie in [0, 1], got {0}")]
    PolSplitOutOfRange(f64),

    #[error("grid needs n_theta >= 2 and n_phi >= 3, got ({n_theta}, {n_phi})")]
    GridTooSmall { n_theta: usize, n_phi: usize },

    #[error("cell ({i}, {j}) is outside a ({n_theta}, {n_phi}) grid")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        n_theta: usize,
        n_phi: usize,
    },

    #[error("{what} has {found} values, grid has {expected} directions")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("cell ({i}, {j}) holds {value}, integrand must be finite and nonnegative")]
    InvalidIntegrand { i: usize, j: usize, value: f64 },

    #[error("expected an {expected} scan, got {found}")]
    WrongQuantity { expected: Quantity, found: Quantity },

    #[error("scan failed validation:\n{0}")]
    Validation(ValidationReport),

    #[error("no reception anywhere: every EIS cell is infinite")]
    NoReception,

    #[error("no radiated power: every EIRP cell is zero")]
    NoRadiatedPower,

    #[error("invalid metadata entry {key:?}: {reason}")]
    InvalidMetadata { key: String, reason: &'static str },

    #[error("directivity integrates to {ratio} x 4pi, expected 1 within {tolerance}")]
    DirectivityNotNormalized { ratio: f64, tolerance: f64 },

    #[error("directivity is {value} at theta = {theta} rad, phi = {phi} rad; must be finite and nonnegative")]
    InvalidDirectivity { theta: f64, phi: f64, value: f64 },
}

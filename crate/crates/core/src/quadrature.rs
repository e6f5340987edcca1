//! Discrete sphere integration against the grid's `sin(theta)` weights.
//!
//! Sums run row-major with theta outer, using Neumaier compensation, so a
//! given field always integrates to the same bits.

use crate::error::{Error, Result};
use crate::scan::DirectionGrid;

/// Per-direction scalar samples over a grid, all finite and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalField {
    grid: DirectionGrid,
    values: Vec<f64>,
}

impl SphericalField {
    pub fn new(grid: DirectionGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                what: "field",
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            let (i, j) = grid.cell(k);
            return Err(Error::InvalidIntegrand { i, j, value: values[k] });
        }
        Ok(SphericalField { grid, values })
    }

    /// Samples `f(theta, phi)` (radians) at every grid direction.
    pub fn from_fn(grid: DirectionGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.cells().map(|(i, j)| f(grid.theta(i), grid.phi(j))).collect();
        SphericalField::new(grid, values)
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        self.grid.check_index(i, j)?;
        Ok(self.values[self.grid.index(i, j)])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Weighted sum over the grid for any finite values, signed ones included.
///
/// [`integrate_sphere`] is the entry point for physical fields; this is the
/// underlying kernel, also used for signed test functions.
pub fn integrate_values(grid: &DirectionGrid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            what: "values",
            expected: grid.len(),
            found: values.len(),
        });
    }
    let mut acc = Neumaier::default();
    for i in 0..grid.n_theta() {
        let w = grid.weight(i, 0);
        for j in 0..grid.n_phi() {
            let v = values[grid.index(i, j)];
            if !v.is_finite() {
                return Err(Error::InvalidIntegrand { i, j, value: v });
            }
            acc.add(v * w);
        }
    }
    Ok(acc.total())
}

/// `sum_{i,j} value(i, j) * weight(i, j)`, in field unit times steradian.
pub fn integrate_sphere(field: &SphericalField) -> f64 {
    integrate_values(&field.grid, &field.values).expect("field invariants checked at construction")
}

/// Convenience: sample `f` on `grid` and integrate.
pub fn integrate_fn(grid: &DirectionGrid, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    Ok(integrate_sphere(&SphericalField::from_fn(*grid, f)?))
}

/// Relative error scale below which [`convergence_probe`] calls a level exact.
pub const EXACT_RELATIVE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeOutcome {
    /// Both levels reproduce the reference to rounding.
    Exact,
    Ratio {
        coarse_error: f64,
        fine_error: f64,
        ratio: f64,
    },
}

impl ProbeOutcome {
    pub fn ratio(&self) -> Option<f64> {
        match self {
            ProbeOutcome::Exact => None,
            ProbeOutcome::Ratio { ratio, .. } => Some(*ratio),
        }
    }
}

/// Integrates `f` on the `(n, 2n)` and `(2n, 4n)` grids and returns
/// `error(n) / error(2n)` against the supplied reference value.
pub fn convergence_probe(f: impl Fn(f64, f64) -> f64, n_theta: usize, reference: f64) -> Result<ProbeOutcome> {
    let coarse = DirectionGrid::new(n_theta, 2 * n_theta)?;
    let fine = DirectionGrid::new(2 * n_theta, 4 * n_theta)?;
    let coarse_error = (integrate_fn(&coarse, &f)? - reference).abs();
    let fine_error = (integrate_fn(&fine, &f)? - reference).abs();
    let floor = EXACT_RELATIVE * reference.abs().max(f64::MIN_POSITIVE);
    if coarse_error <= floor && fine_error <= floor {
        return Ok(ProbeOutcome::Exact);
    }
    Ok(ProbeOutcome::Ratio {
        coarse_error,
        fine_error,
        ratio: coarse_error / fine_error,
    })
}

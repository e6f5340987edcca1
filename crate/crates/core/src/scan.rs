//! Sphere sampling grid and dual-polarization scan data.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Angle, Direction, PowerValue};

/// Fraction of directions allowed to be infinite in both EIS polarizations.
pub const DEFAULT_MAX_DUAL_INFINITE_FRACTION: f64 = 0.25;

/// Regular (theta, phi) sampling of the sphere.
///
/// Polar rings sit at midpoints `(i + 1/2) * pi / n_theta`, so no sample lands
/// on a pole. Azimuth columns start at zero. Each cell carries the solid angle
/// `sin(theta_i) * d_theta * d_phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectionGrid {
    n_theta: usize,
    n_phi: usize,
}

/// Builds a grid with `n_theta` polar rings and `n_phi` azimuth columns.
pub fn build_grid(n_theta: usize, n_phi: usize) -> Result<DirectionGrid> {
    DirectionGrid::new(n_theta, n_phi)
}

impl DirectionGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 3 {
            return Err(Error::GridTooSmall { n_theta, n_phi });
        }
        Ok(DirectionGrid { n_theta, n_phi })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta_step(&self) -> f64 {
        PI / self.n_theta as f64
    }

    pub fn phi_step(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.theta_step()
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * self.phi_step()
    }

    pub fn direction(&self, i: usize, j: usize) -> Direction {
        Direction::new(Angle::from_radians(self.theta(i)), Angle::from_radians(self.phi(j)))
    }

    /// Solid angle of cell `(i, j)` in steradians. Independent of `j`.
    pub fn weight(&self, i: usize, _j: usize) -> f64 {
        self.theta(i).sin() * self.theta_step() * self.phi_step()
    }

    /// Row-major flat index, theta outer.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    #[inline]
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.n_phi, index % self.n_phi)
    }

    pub fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n_theta || j >= self.n_phi {
            return Err(Error::IndexOutOfRange {
                i,
                j,
                n_theta: self.n_theta,
                n_phi: self.n_phi,
            });
        }
        Ok(())
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_theta).flat_map(move |i| (0..self.n_phi).map(move |j| (i, j)))
    }

    /// Sum of all cell weights, in the canonical summation order.
    pub fn weight_sum(&self) -> f64 {
        crate::quadrature::integrate_values(self, &vec![1.0; self.len()])
            .expect("unit field is finite")
    }

    /// `|sum(weights) / 4pi - 1|`.
    pub fn quadrature_residual(&self) -> f64 {
        (self.weight_sum() / (4.0 * PI) - 1.0).abs()
    }
}

impl fmt::Display for DirectionGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_theta, self.n_phi)
    }
}

/// What a scan measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// Equivalent isotropic radiated power, polarization components add.
    Eirp,
    /// Equivalent isotropic sensitivity, polarization reciprocals add.
    Eis,
}

impl Quantity {
    pub fn token(self) -> &'static str {
        match self {
            Quantity::Eirp => "eirp",
            Quantity::Eis => "eis",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Eirp => "EIRP",
            Quantity::Eis => "EIS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Theta,
    Phi,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Theta, Polarization::Phi];

    pub fn token(self) -> &'static str {
        match self {
            Polarization::Theta => "theta",
            Polarization::Phi => "phi",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Per-direction theta- and phi-polarization samples of one quantity.
///
/// Both arrays are complete over the grid, stored row-major with theta outer.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedScan {
    quantity: Quantity,
    grid: DirectionGrid,
    theta_pol: Vec<PowerValue>,
    phi_pol: Vec<PowerValue>,
    metadata: BTreeMap<String, String>,
}

const RESERVED_KEYS: [&str; 3] = ["quantity", "n_theta", "n_phi"];

impl PolarizedScan {
    pub fn new(
        quantity: Quantity,
        grid: DirectionGrid,
        theta_pol: Vec<PowerValue>,
        phi_pol: Vec<PowerValue>,
    ) -> Result<Self> {
        for (what, values) in [("theta_pol", &theta_pol), ("phi_pol", &phi_pol)] {
            if values.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    what,
                    expected: grid.len(),
                    found: values.len(),
                });
            }
        }
        Ok(PolarizedScan {
            quantity,
            grid,
            theta_pol,
            phi_pol,
            metadata: BTreeMap::new(),
        })
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    pub fn theta_pol(&self) -> &[PowerValue] {
        &self.theta_pol
    }

    pub fn phi_pol(&self) -> &[PowerValue] {
        &self.phi_pol
    }

    pub fn component(&self, pol: Polarization) -> &[PowerValue] {
        match pol {
            Polarization::Theta => &self.theta_pol,
            Polarization::Phi => &self.phi_pol,
        }
    }

    pub fn get(&self, i: usize, j: usize, pol: Polarization) -> Result<PowerValue> {
        self.grid.check_index(i, j)?;
        Ok(self.component(pol)[self.grid.index(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, pol: Polarization, value: PowerValue) -> Result<()> {
        self.grid.check_index(i, j)?;
        let k = self.grid.index(i, j);
        match pol {
            Polarization::Theta => self.theta_pol[k] = value,
            Polarization::Phi => self.phi_pol[k] = value,
        }
        Ok(())
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Adds a free-form `key: value` entry. Keys must be single tokens so the
    /// scan file header stays unambiguous.
    pub fn insert_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) -> Result<()> {
        let key = key.into();
        let value = value.into();
        let reason = if key.is_empty() {
            Some("empty key")
        } else if key.chars().any(|c| c.is_whitespace() || c == ':' || c == ',') {
            Some("key may not contain whitespace, ':' or ','")
        } else if RESERVED_KEYS.contains(&key.as_str()) {
            Some("reserved key")
        } else if value.contains(['\n', '\r']) {
            Some("value may not span lines")
        } else if value.trim() != value {
            Some("value may not have surrounding whitespace")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidMetadata { key, reason });
        }
        self.metadata.insert(key, value);
        Ok(())
    }

    /// Same scan with every cell multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let scale = |v: &[PowerValue]| v.iter().map(|p| p.scaled(k)).collect::<Result<Vec<_>>>();
        Ok(PolarizedScan {
            theta_pol: scale(&self.theta_pol)?,
            phi_pol: scale(&self.phi_pol)?,
            ..self.clone()
        })
    }

    /// Combined power in direction `(i, j)`; see [`total_power_per_direction`].
    pub fn combined(&self, i: usize, j: usize) -> Result<PowerValue> {
        total_power_per_direction(self, i, j)
    }

    fn combined_at(&self, k: usize) -> PowerValue {
        combine(self.quantity, self.theta_pol[k], self.phi_pol[k])
    }

    /// Combined values for every direction, row-major.
    pub fn combined_values(&self) -> Vec<PowerValue> {
        (0..self.grid.len()).map(|k| self.combined_at(k)).collect()
    }

    /// Directions where both polarizations carry the `+inf` sentinel.
    pub fn dual_infinite_count(&self) -> usize {
        self.theta_pol
            .iter()
            .zip(&self.phi_pol)
            .filter(|(t, p)| t.is_infinite() && p.is_infinite())
            .count()
    }

    /// Cells (direction and polarization) carrying `+inf`.
    pub fn infinite_cell_count(&self) -> usize {
        self.theta_pol
            .iter()
            .chain(&self.phi_pol)
            .filter(|v| v.is_infinite())
            .count()
    }
}

fn combine(quantity: Quantity, theta: PowerValue, phi: PowerValue) -> PowerValue {
    match quantity {
        Quantity::Eirp => PowerValue::from_mw(theta.mw() + phi.mw()).unwrap_or(PowerValue::INFINITE),
        Quantity::Eis => {
            // 1/inf = 0, so a dead polarization drops out; both dead gives inf.
            let reciprocal = theta.mw().recip() + phi.mw().recip();
            PowerValue::from_mw(reciprocal.recip()).unwrap_or(PowerValue::INFINITE)
        }
    }
}

/// Combined power in one direction.
///
/// EIRP components add. EIS components combine through their reciprocals,
/// `1/EIS = 1/EIS_theta + 1/EIS_phi`, with an infinite component contributing
/// nothing.
pub fn total_power_per_direction(scan: &PolarizedScan, i: usize, j: usize) -> Result<PowerValue> {
    scan.grid.check_index(i, j)?;
    Ok(scan.combined_at(scan.grid.index(i, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `+inf` is only meaningful for EIS.
    InfiniteEirp,
    /// Too many directions dead in both EIS polarizations.
    DualInfiniteFraction,
    /// Zero EIS would mean infinite receive gain.
    ZeroEis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellRef {
    pub i: usize,
    pub j: usize,
    pub pol: Polarization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub cell: Option<CellRef>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cell {
            Some(c) => write!(f, "({}, {}, {}): {}", c.i, c.j, c.pol, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Outcome of [`validate_scan`]; empty when every invariant holds.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_clean() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "  {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    pub max_dual_infinite_fraction: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            max_dual_infinite_fraction: DEFAULT_MAX_DUAL_INFINITE_FRACTION,
        }
    }
}

/// Checks the scan invariants under the default configuration.
pub fn validate_scan(scan: &PolarizedScan) -> ValidationReport {
    validate_scan_with(scan, &ValidationConfig::default())
}

pub fn validate_scan_with(scan: &PolarizedScan, config: &ValidationConfig) -> ValidationReport {
    let mut violations = Vec::new();
    let grid = scan.grid;
    match scan.quantity {
        Quantity::Eirp => {
            for k in 0..grid.len() {
                let (i, j) = grid.cell(k);
                for pol in Polarization::BOTH {
                    if scan.component(pol)[k].is_infinite() {
                        violations.push(Violation {
                            rule: Rule::InfiniteEirp,
                            cell: Some(CellRef { i, j, pol }),
                            message: "EIRP may not be infinite".into(),
                        });
                    }
                }
            }
        }
        Quantity::Eis => {
            for k in 0..grid.len() {
                let (i, j) = grid.cell(k);
                for pol in Polarization::BOTH {
                    if scan.component(pol)[k].is_zero() {
                        violations.push(Violation {
                            rule: Rule::ZeroEis,
                            cell: Some(CellRef { i, j, pol }),
                            message: "EIS must be positive".into(),
                        });
                    }
                }
            }
            let dual = scan.dual_infinite_count();
            let fraction = dual as f64 / grid.len() as f64;
            if fraction > config.max_dual_infinite_fraction {
                violations.push(Violation {
                    rule: Rule::DualInfiniteFraction,
                    cell: None,
                    message: format!(
                        "{dual} of {} directions ({:.1}%) have no reception in either polarization, limit is {:.1}%",
                        grid.len(),
                        100.0 * fraction,
                        100.0 * config.max_dual_infinite_fraction
                    ),
                });
            }
        }
    }
    ValidationReport { violations }
}

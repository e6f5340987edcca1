//! TRP, TIS and the receive-side quantities derived from them.
//!
//! Transmit side:
//!
//! ```text
//! TRP = 1/(4pi) * integral (EIRP_theta + EIRP_phi) sin(theta) dtheta dphi
//! ```
//!
//! Receive side, with receiving efficiency `eff' = P_s / TIS`, receive
//! directivity `D_r = TIS / EIS` and receiving intensity
//! `U'_p = TIS^2 / (4pi * EIS_p)`. Integrating `U'` over the sphere must give
//! back `TIS`, which rearranges to
//!
//! ```text
//! TIS = 4pi / integral (1/EIS_theta + 1/EIS_phi) sin(theta) dtheta dphi
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_sphere, integrate_values, SphericalField};
use crate::scan::{
    validate_scan_with, DirectionGrid, Polarization, PolarizedScan, Quantity, ValidationConfig,
};
use crate::synth::{synthesize_scan, AntennaModel, Role};
use crate::units::{Direction, PowerValue};

const FOUR_PI: f64 = 4.0 * PI;

/// Reports whose grid residual reaches this are flagged degraded.
pub const DEGRADED_RESIDUAL: f64 = 0.01;

/// Relative tolerance for closure checks.
///
/// The default applies to the (36, 72) grid. Coarser grids get a tolerance
/// scaled by their quadrature residual relative to that reference grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance { relative: 1e-3 };
    pub const REFERENCE_GRID: (usize, usize) = (36, 72);

    pub fn new(relative: f64) -> Result<Self> {
        if !(relative.is_finite() && relative > 0.0) {
            return Err(Error::NonPositive {
                field: "tolerance",
                value: relative,
            });
        }
        Ok(Tolerance { relative })
    }

    pub fn for_grid(&self, grid: &DirectionGrid) -> f64 {
        let reference = DirectionGrid::new(Self::REFERENCE_GRID.0, Self::REFERENCE_GRID.1)
            .expect("reference grid is valid")
            .quadrature_residual();
        self.relative * (grid.quadrature_residual() / reference).max(1.0)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Trp,
    Tis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: PowerValue,
    pub max: PowerValue,
}

impl Extrema {
    fn of(values: &[PowerValue]) -> Self {
        let mut min = PowerValue::INFINITE;
        let mut max = PowerValue::ZERO;
        for &v in values {
            if v < min {
                min = v;
            }
            if v > max {
                max = v;
            }
        }
        Extrema { min, max }
    }

    /// `(min, max)` in dBm; zero maps to `-inf`, the sentinel to `+inf`.
    pub fn dbm(&self) -> (f64, f64) {
        (self.min.dbm_or_neg_inf(), self.max.dbm_or_neg_inf())
    }
}

/// A computed TRP or TIS with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub metric: Metric,
    pub value: PowerValue,
    pub grid: DirectionGrid,
    /// `|sum(weights) / 4pi - 1|` for the scan's grid.
    pub quadrature_residual: f64,
    pub degraded: bool,
    /// Strongest direction: maximum combined EIRP, or minimum combined EIS.
    pub peak_direction: Direction,
    pub theta_extrema: Extrema,
    pub phi_extrema: Extrema,
    pub infinite_cells: usize,
    pub dual_infinite_cells: usize,
}

fn require_quantity(scan: &PolarizedScan, expected: Quantity) -> Result<()> {
    if scan.quantity() != expected {
        return Err(Error::WrongQuantity {
            expected,
            found: scan.quantity(),
        });
    }
    Ok(())
}

fn require_positive(field: &'static str, p: PowerValue) -> Result<f64> {
    let v = p.mw();
    if !v.is_finite() {
        return Err(Error::NonFinite { field, value: v });
    }
    if v <= 0.0 {
        return Err(Error::NonPositive { field, value: v });
    }
    Ok(v)
}

fn build_report(metric: Metric, value: f64, scan: &PolarizedScan, peak_index: usize) -> Result<MetricsReport> {
    let grid = *scan.grid();
    let residual = grid.quadrature_residual();
    let (i, j) = grid.cell(peak_index);
    Ok(MetricsReport {
        metric,
        value: PowerValue::from_mw(value)?,
        grid,
        quadrature_residual: residual,
        degraded: residual >= DEGRADED_RESIDUAL,
        peak_direction: grid.direction(i, j),
        theta_extrema: Extrema::of(scan.theta_pol()),
        phi_extrema: Extrema::of(scan.phi_pol()),
        infinite_cells: scan.infinite_cell_count(),
        dual_infinite_cells: scan.dual_infinite_count(),
    })
}

/// Total radiated power of an EIRP scan.
pub fn trp(scan: &PolarizedScan) -> Result<MetricsReport> {
    trp_with(scan, &ValidationConfig::default())
}

pub fn trp_with(scan: &PolarizedScan, config: &ValidationConfig) -> Result<MetricsReport> {
    require_quantity(scan, Quantity::Eirp)?;
    validate_scan_with(scan, config).into_result()?;
    let grid = scan.grid();
    let combined: Vec<f64> = scan
        .theta_pol()
        .iter()
        .zip(scan.phi_pol())
        .map(|(t, p)| t.mw() + p.mw())
        .collect();
    let integral = integrate_values(grid, &combined)?;
    if integral <= 0.0 {
        return Err(Error::NoRadiatedPower);
    }
    let mut peak = 0;
    for (k, v) in combined.iter().enumerate() {
        if *v > combined[peak] {
            peak = k;
        }
    }
    build_report(Metric::Trp, integral / FOUR_PI, scan, peak)
}

/// `1/EIS_theta + 1/EIS_phi` per direction; infinite EIS contributes zero.
fn reciprocal_sum(scan: &PolarizedScan) -> Vec<f64> {
    scan.theta_pol()
        .iter()
        .zip(scan.phi_pol())
        .map(|(t, p)| t.mw().recip() + p.mw().recip())
        .collect()
}

/// Total isotropic sensitivity of an EIS scan.
pub fn tis(scan: &PolarizedScan) -> Result<MetricsReport> {
    tis_with(scan, &ValidationConfig::default())
}

pub fn tis_with(scan: &PolarizedScan, config: &ValidationConfig) -> Result<MetricsReport> {
    require_quantity(scan, Quantity::Eis)?;
    validate_scan_with(scan, config).into_result()?;
    let integrand = reciprocal_sum(scan);
    let integral = integrate_values(scan.grid(), &integrand)?;
    if integral <= 0.0 {
        return Err(Error::NoReception);
    }
    // minimum combined EIS is the maximum reciprocal sum
    let mut peak = 0;
    for (k, v) in integrand.iter().enumerate() {
        if *v > integrand[peak] {
            peak = k;
        }
    }
    build_report(Metric::Tis, FOUR_PI / integral, scan, peak)
}

/// An efficiency ratio. Values above one are kept but flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub value: f64,
    pub nonphysical: bool,
}

impl Efficiency {
    fn new(value: f64) -> Self {
        Efficiency {
            value,
            nonphysical: value > 1.0,
        }
    }
}

/// `eff = TRP / P_in`.
pub fn radiated_efficiency(p_in: PowerValue, trp: PowerValue) -> Result<Efficiency> {
    let p_in = require_positive("p_in", p_in)?;
    let trp = require_positive("trp", trp)?;
    Ok(Efficiency::new(trp / p_in))
}

/// `eff' = P_s / TIS`.
pub fn receiving_efficiency(p_s: PowerValue, tis: PowerValue) -> Result<Efficiency> {
    let p_s = require_positive("p_s", p_s)?;
    let tis = require_positive("tis", tis)?;
    Ok(Efficiency::new(p_s / tis))
}

/// Receive pattern `D_r` per direction, with per-polarization parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveDirectivityMap {
    pub grid: DirectionGrid,
    pub values: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ReceiveDirectivityMap {
    /// `|integral(D_r dOmega) / 4pi - 1|`. A diagnostic, not enforced:
    /// measured data need not integrate to exactly 4pi.
    pub fn normalization_deviation(&self) -> f64 {
        let integral = integrate_values(&self.grid, &self.values).unwrap_or(f64::NAN);
        (integral / FOUR_PI - 1.0).abs()
    }

    pub fn component(&self, pol: Polarization) -> &[f64] {
        match pol {
            Polarization::Theta => &self.theta,
            Polarization::Phi => &self.phi,
        }
    }
}

/// Receiving intensity `U'` in mW per steradian, split by polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivingIntensityMap {
    pub grid: DirectionGrid,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ReceivingIntensityMap {
    /// `U' = U'_theta + U'_phi`.
    pub fn combined(&self) -> Vec<f64> {
        self.theta.iter().zip(&self.phi).map(|(t, p)| t + p).collect()
    }

    pub fn to_field(&self) -> Result<SphericalField> {
        SphericalField::new(self.grid, self.combined())
    }

    pub fn component(&self, pol: Polarization) -> &[f64] {
        match pol {
            Polarization::Theta => &self.theta,
            Polarization::Phi => &self.phi,
        }
    }
}

/// `D_r = TIS / EIS` using the combined EIS; infinite EIS gives zero.
pub fn receive_directivity_map(tis: PowerValue, scan: &PolarizedScan) -> Result<ReceiveDirectivityMap> {
    require_quantity(scan, Quantity::Eis)?;
    let tis = require_positive("tis", tis)?;
    let ratio = |eis: PowerValue| tis / eis.mw();
    Ok(ReceiveDirectivityMap {
        grid: *scan.grid(),
        values: scan.combined_values().into_iter().map(ratio).collect(),
        theta: scan.theta_pol().iter().copied().map(ratio).collect(),
        phi: scan.phi_pol().iter().copied().map(ratio).collect(),
    })
}

/// `U'_p = TIS^2 / (4pi * EIS_p)` per polarization; infinite EIS gives zero.
pub fn receiving_intensity_map(tis: PowerValue, scan: &PolarizedScan) -> Result<ReceivingIntensityMap> {
    require_quantity(scan, Quantity::Eis)?;
    let tis = require_positive("tis", tis)?;
    let scale = tis * tis / FOUR_PI;
    let intensity = |eis: &PowerValue| scale / eis.mw();
    Ok(ReceivingIntensityMap {
        grid: *scan.grid(),
        theta: scan.theta_pol().iter().map(intensity).collect(),
        phi: scan.phi_pol().iter().map(intensity).collect(),
    })
}

/// `D_r = 4pi * U' / TIS`.
pub fn receive_directivity_from_intensity(
    tis: PowerValue,
    intensity: &ReceivingIntensityMap,
) -> Result<ReceiveDirectivityMap> {
    let tis = require_positive("tis", tis)?;
    let to_d = |u: f64| FOUR_PI * u / tis;
    Ok(ReceiveDirectivityMap {
        grid: intensity.grid,
        values: intensity.combined().into_iter().map(to_d).collect(),
        theta: intensity.theta.iter().copied().map(to_d).collect(),
        phi: intensity.phi.iter().copied().map(to_d).collect(),
    })
}

/// Transmit directivity `D = 4pi * U / P_r` from radiation intensity.
pub fn directivity_from_intensity(intensity: &SphericalField, p_r: PowerValue) -> Result<SphericalField> {
    let p_r = require_positive("p_r", p_r)?;
    let values = intensity.values().iter().map(|u| FOUR_PI * u / p_r).collect();
    SphericalField::new(*intensity.grid(), values)
}

/// Radiated power `P_r` as the sphere integral of intensity.
pub fn radiated_power(intensity: &SphericalField) -> f64 {
    integrate_sphere(intensity)
}

/// Per-direction check of `TIS * eff' = EIS * G_r`.
///
/// The comparison uses `grid_tis`: the TIS computed against the grid's own
/// total solid angle instead of 4pi. That removes the uniform quadrature bias
/// shared by every direction, so the deviation isolates per-direction
/// disagreement.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityCheck {
    pub tis: PowerValue,
    /// `tis * sum(weights) / 4pi`.
    pub grid_tis: PowerValue,
    /// Largest `|TIS * eff' - EIS * G_r| / P_s` over finite-EIS cells.
    pub max_deviation: f64,
    pub worst_cell: Option<(usize, usize)>,
    /// Cells whose deviation exceeds the tolerance.
    pub flagged: Vec<(usize, usize)>,
    pub tolerance: f64,
    /// Cells skipped because their combined EIS is infinite.
    pub skipped_cells: usize,
}

impl ReciprocityCheck {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Synthesizes the model's receive scan on `grid` and checks reciprocity.
pub fn reciprocity_cross_check(model: &AntennaModel, grid: &DirectionGrid) -> Result<ReciprocityCheck> {
    let scan = synthesize_scan(model, Role::Receive, grid)?;
    reciprocity_check_scan(model, &scan, Tolerance::DEFAULT)
}

/// Checks a (possibly altered) receive scan against the model it claims to
/// come from.
pub fn reciprocity_check_scan(
    model: &AntennaModel,
    scan: &PolarizedScan,
    tolerance: Tolerance,
) -> Result<ReciprocityCheck> {
    let report = tis(scan)?;
    let grid = *scan.grid();
    let grid_tis = report.value.mw() * (grid.weight_sum() / FOUR_PI);
    let eff = model.efficiency();
    let p_s = model.conducted_power().mw();
    let lhs = grid_tis * eff;
    let limit = tolerance.for_grid(&grid);

    let mut max_deviation = 0.0;
    let mut worst_cell = None;
    let mut flagged = Vec::new();
    let mut skipped_cells = 0;
    for (k, eis) in scan.combined_values().into_iter().enumerate() {
        if eis.is_infinite() {
            skipped_cells += 1;
            continue;
        }
        let (i, j) = grid.cell(k);
        let g_r = model.gain(grid.theta(i), grid.phi(j))?;
        let deviation = (lhs - eis.mw() * g_r).abs() / p_s;
        if deviation > max_deviation || worst_cell.is_none() {
            max_deviation = deviation;
            worst_cell = Some((i, j));
        }
        if deviation > limit {
            flagged.push((i, j));
        }
    }
    Ok(ReciprocityCheck {
        tis: report.value,
        grid_tis: PowerValue::from_mw(grid_tis)?,
        max_deviation,
        worst_cell,
        flagged,
        tolerance: limit,
        skipped_cells,
    })
}

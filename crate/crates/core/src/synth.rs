//! Synthetic antennas with analytically known TRP and TIS.
//!
//! A model couples a normalized directivity pattern with a polarization
//! split, an efficiency and a conducted power. In the transmit role those are
//! `D`, `eff` and `P_in`; in the receive role `D_r`, `eff'` and `P_s`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::integrate_fn;
use crate::scan::{DirectionGrid, PolarizedScan, Quantity};
use crate::units::PowerValue;

type AngularFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Dimensionless directivity `D(theta, phi)`, angles in radians.
#[derive(Clone)]
pub struct Directivity(AngularFn);

impl Directivity {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Directivity(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        (self.0)(theta, phi)
    }
}

impl fmt::Debug for Directivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Directivity(..)")
    }
}

/// Isotropic radiator, `D = 1`.
pub fn isotropic_directivity() -> Directivity {
    Directivity::new(|_, _| 1.0)
}

/// Short (Hertzian) dipole along z, `D = 1.5 sin^2(theta)`.
pub fn hertzian_dipole_directivity() -> Directivity {
    Directivity::new(|theta, _| 1.5 * theta.sin().powi(2))
}

/// Fraction of power in the theta polarization, `rho(theta, phi)` in `[0, 1]`.
#[derive(Clone)]
pub struct PolSplit(AngularFn);

impl PolSplit {
    pub fn constant(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::PolSplitOutOfRange(rho));
        }
        Ok(PolSplit(Arc::new(move |_, _| rho)))
    }

    /// Angle-dependent split. Values are range-checked during synthesis.
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        PolSplit(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        (self.0)(theta, phi)
    }

    /// `1 - rho`: the same power with the polarizations exchanged.
    pub fn swapped(&self) -> Self {
        let inner = self.0.clone();
        PolSplit(Arc::new(move |t, p| 1.0 - inner(t, p)))
    }
}

impl fmt::Debug for PolSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PolSplit(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Transmit,
    Receive,
}

#[derive(Debug, Clone)]
pub struct AntennaModel {
    pub directivity: Directivity,
    pub pol_split: PolSplit,
    efficiency: f64,
    conducted_power: PowerValue,
}

/// Grid on which directivity normalization is checked.
pub const NORMALIZATION_GRID: (usize, usize) = (36, 72);
pub const NORMALIZATION_TOLERANCE: f64 = 1e-3;

impl AntennaModel {
    /// Checks the scalar invariants. Pattern normalization is a separate,
    /// numerical check: see [`AntennaModel::check_normalization`].
    pub fn new(
        directivity: Directivity,
        pol_split: PolSplit,
        efficiency: f64,
        conducted_power: PowerValue,
    ) -> Result<Self> {
        check_efficiency(efficiency)?;
        check_positive("conducted_power", conducted_power.mw())?;
        Ok(AntennaModel {
            directivity,
            pol_split,
            efficiency,
            conducted_power,
        })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn conducted_power(&self) -> PowerValue {
        self.conducted_power
    }

    pub fn gain(&self, theta: f64, phi: f64) -> Result<f64> {
        gain_from_directivity(self.directivity.eval(theta, phi), self.efficiency)
    }

    /// `integral(D dOmega) / 4pi` on `grid`.
    pub fn normalization_ratio(&self, grid: &DirectionGrid) -> Result<f64> {
        Ok(integrate_fn(grid, |t, p| self.directivity.eval(t, p))? / (4.0 * PI))
    }

    /// Directivity must integrate to `4pi` within 1e-3 on the (36, 72) grid.
    pub fn check_normalization(&self) -> Result<()> {
        let grid = DirectionGrid::new(NORMALIZATION_GRID.0, NORMALIZATION_GRID.1)?;
        let ratio = self.normalization_ratio(&grid)?;
        if (ratio - 1.0).abs() >= NORMALIZATION_TOLERANCE {
            return Err(Error::DirectivityNotNormalized {
                ratio,
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        Ok(())
    }

    /// Copy with the polarization split replaced by `1 - rho`.
    pub fn with_swapped_polarization(&self) -> Self {
        AntennaModel {
            pol_split: self.pol_split.swapped(),
            ..self.clone()
        }
    }
}

fn check_efficiency(eff: f64) -> Result<()> {
    if !(eff > 0.0 && eff <= 1.0) {
        return Err(Error::EfficiencyOutOfRange(eff));
    }
    Ok(())
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { field, value });
    }
    if value <= 0.0 {
        return Err(Error::NonPositive { field, value });
    }
    Ok(())
}

fn check_nonnegative(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { field, value });
    }
    if value < 0.0 {
        return Err(Error::Negative { field, value });
    }
    Ok(())
}

/// `G = D * eff`.
pub fn gain_from_directivity(directivity: f64, eff: f64) -> Result<f64> {
    check_efficiency(eff)?;
    check_nonnegative("directivity", directivity)?;
    Ok(directivity * eff)
}

/// `EIRP = P_in * G`, milliwatts.
pub fn eirp_from_gain(p_in: f64, gain: f64) -> Result<f64> {
    check_positive("p_in", p_in)?;
    check_nonnegative("gain", gain)?;
    Ok(p_in * gain)
}

/// `EIS = P_s / G_r`, milliwatts; zero gain gives the `+inf` sentinel.
pub fn eis_from_gain(p_s: f64, gain: f64) -> Result<f64> {
    check_positive("p_s", p_s)?;
    check_nonnegative("gain", gain)?;
    if gain == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(p_s / gain)
}

/// Samples the model on `grid` as an EIRP (transmit) or EIS (receive) scan.
///
/// Each polarization sees the partial gain `eff * D * rho` (theta) or
/// `eff * D * (1 - rho)` (phi).
pub fn synthesize_scan(model: &AntennaModel, role: Role, grid: &DirectionGrid) -> Result<PolarizedScan> {
    let p = model.conducted_power.mw();
    let mut theta_pol = Vec::with_capacity(grid.len());
    let mut phi_pol = Vec::with_capacity(grid.len());
    for (i, j) in grid.cells() {
        let (theta, phi) = (grid.theta(i), grid.phi(j));
        let d = model.directivity.eval(theta, phi);
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::InvalidDirectivity { theta, phi, value: d });
        }
        let rho = model.pol_split.eval(theta, phi);
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::PolSplitOutOfRange(rho));
        }
        let gain = gain_from_directivity(d, model.efficiency)?;
        let (g_theta, g_phi) = (gain * rho, gain * (1.0 - rho));
        let (t, f) = match role {
            Role::Transmit => (eirp_from_gain(p, g_theta)?, eirp_from_gain(p, g_phi)?),
            Role::Receive => (eis_from_gain(p, g_theta)?, eis_from_gain(p, g_phi)?),
        };
        theta_pol.push(PowerValue::from_mw(t)?);
        phi_pol.push(PowerValue::from_mw(f)?);
    }
    let quantity = match role {
        Role::Transmit => Quantity::Eirp,
        Role::Receive => Quantity::Eis,
    };
    PolarizedScan::new(quantity, *grid, theta_pol, phi_pol)
}

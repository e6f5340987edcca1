//! Power and angle representations.
//!
//! Linear milliwatts are the canonical internal unit. dBm appears only at
//! I/O boundaries, and every conversion between the two lives here.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, Result};

/// Converts dBm to linear milliwatts: `10^(dbm / 10)`.
pub fn dbm_to_mw(dbm: f64) -> Result<f64> {
    if !dbm.is_finite() {
        return Err(Error::NonFinite {
            field: "dbm",
            value: dbm,
        });
    }
    Ok(10f64.powf(dbm / 10.0))
}

/// Converts linear milliwatts to dBm: `10 * log10(mw)`.
///
/// Zero and negative powers have no logarithmic form.
pub fn mw_to_dbm(mw: f64) -> Result<f64> {
    if mw.is_nan() || mw <= 0.0 {
        return Err(Error::NoLogarithmicForm { mw });
    }
    Ok(10.0 * mw.log10())
}

/// A power in linear milliwatts.
///
/// Any value in `[0, +inf]` is representable. Zero is a perfect pattern null;
/// `+inf` is the no-reception sentinel that only EIS scans may carry.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct PowerValue(f64);

impl PowerValue {
    pub const ZERO: PowerValue = PowerValue(0.0);
    pub const INFINITE: PowerValue = PowerValue(f64::INFINITY);

    /// Builds a power from milliwatts; rejects NaN and negatives.
    pub fn from_mw(mw: f64) -> Result<Self> {
        if mw.is_nan() {
            return Err(Error::NonFinite {
                field: "linear_mw",
                value: mw,
            });
        }
        if mw < 0.0 {
            return Err(Error::Negative {
                field: "linear_mw",
                value: mw,
            });
        }
        Ok(PowerValue(mw))
    }

    pub fn from_dbm(dbm: f64) -> Result<Self> {
        dbm_to_mw(dbm).map(PowerValue)
    }

    #[inline]
    pub fn mw(self) -> f64 {
        self.0
    }

    /// dBm form. `+inf` mW maps to `+inf` dBm; zero has no dBm form.
    pub fn dbm(self) -> Result<f64> {
        if self.is_infinite() {
            return Ok(f64::INFINITY);
        }
        mw_to_dbm(self.0)
    }

    /// dBm form with zero mapped to `-inf`. Used for display and reports.
    pub fn dbm_or_neg_inf(self) -> f64 {
        if self.0 == 0.0 {
            f64::NEG_INFINITY
        } else if self.is_infinite() {
            f64::INFINITY
        } else {
            10.0 * self.0.log10()
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn scaled(self, k: f64) -> Result<Self> {
        PowerValue::from_mw(self.0 * k)
    }
}

impl fmt::Display for PowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dbm = self.dbm_or_neg_inf();
        if dbm.is_finite() {
            write!(f, "{dbm:.2} dBm")
        } else {
            write!(f, "{dbm} dBm")
        }
    }
}

/// An angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub fn from_radians(radians: f64) -> Self {
        Angle(radians)
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Angle(degrees.to_radians())
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Wraps into `[0, 2pi)`.
    pub fn normalized_azimuth(self) -> Self {
        let r = self.0.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        Angle(if r >= TAU { 0.0 } else { r })
    }

    /// Folds into the polar range `[0, pi]`.
    pub fn normalized_polar(self) -> Self {
        let r = self.normalized_azimuth().0;
        Angle(if r > PI { TAU - r } else { r })
    }
}

/// A direction on the unit sphere, polar angle `theta` in `[0, pi]` and
/// azimuth `phi` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: Angle,
    pub phi: Angle,
}

impl Direction {
    /// Normalizes both angles. A polar angle that folds through a pole moves
    /// the azimuth by half a turn so the point on the sphere is unchanged.
    pub fn new(theta: Angle, phi: Angle) -> Self {
        let wrapped = theta.normalized_azimuth().radians();
        let (theta, phi) = if wrapped > PI {
            (Angle(TAU - wrapped), Angle(phi.radians() + PI))
        } else {
            (Angle(wrapped), phi)
        };
        Direction {
            theta,
            phi: phi.normalized_azimuth(),
        }
    }
}

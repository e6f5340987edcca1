//! Total radiated power (TRP) and total isotropic sensitivity (TIS) from
//! full-sphere, dual-polarization EIRP and EIS scans.
//!
//! - [`units`]: dBm and milliwatt conversions, angles.
//! - [`scan`]: the sampling grid and polarized scan data.
//! - [`quadrature`]: `sin(theta)`-weighted sphere integration.
//! - [`synth`]: synthetic antennas with known TRP/TIS.
//! - [`metrics`]: TRP, TIS, efficiencies, receive directivity and intensity.
//! - [`io`]: scan CSV files and JSON reports.
//! - [`cli`]: the `ota` command line.

pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod quadrature;
pub mod scan;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
pub use metrics::{tis, trp, MetricsReport, Tolerance};
pub use scan::{build_grid, validate_scan, DirectionGrid, Polarization, PolarizedScan, Quantity};
pub use synth::{synthesize_scan, AntennaModel, Role};
pub use units::{dbm_to_mw, mw_to_dbm, PowerValue};

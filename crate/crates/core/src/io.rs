//! Scan CSV format and JSON reports.
//!
//! A scan file is UTF-8 with LF line endings:
//!
//! ```text
//! # quantity: eirp
//! # n_theta: 2
//! # n_phi: 3
//! # device: dut-7            (optional metadata, any number)
//! theta_deg,phi_deg,pol,value_dbm
//! 45.0000,0.0000,theta,-3.010300
//! ...
//! ```
//!
//! Angles are degrees with 4 fractional digits, values dBm with 6. A zero
//! EIRP is written `-inf`; the EIS no-reception sentinel is written `inf`.
//! The writer emits records sorted by ring, column, then theta before phi.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::metrics::{Extrema, Metric, MetricsReport};
use crate::scan::{validate_scan, DirectionGrid, Polarization, PolarizedScan, Quantity};
use crate::units::{dbm_to_mw, PowerValue};

pub const COLUMN_LINE: &str = "theta_deg,phi_deg,pol,value_dbm";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How far (degrees) a record angle may sit from its grid position.
const ANGLE_SLACK_DEG: f64 = 1e-3;
/// Missing cells listed individually before summarizing.
const MAX_MISSING_LISTED: usize = 20;

/// One problem found while reading a scan file. `line` and `column` are
/// 1-based; whole-file problems carry no position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ParseIssue {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseIssue {
            line: Some(line),
            column: Some(column),
            message: message.into(),
        }
    }

    fn file(message: impl Into<String>) -> Self {
        ParseIssue {
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ScanFileError {
    pub issues: Vec<ParseIssue>,
}

impl fmt::Display for ScanFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, issue) in self.issues.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:\n{errors}", path.display())]
    Parse { path: PathBuf, errors: ScanFileError },
}

fn header_field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?;
    let (k, v) = rest.split_once(':')?;
    (k.trim() == key).then(|| v.trim())
}

fn parse_count(line: Option<&str>, number: usize, key: &str, issues: &mut Vec<ParseIssue>) -> Option<usize> {
    let Some(line) = line else {
        issues.push(ParseIssue::at(number, 1, format!("missing `# {key}:` header")));
        return None;
    };
    match header_field(line, key) {
        None => {
            issues.push(ParseIssue::at(number, 1, format!("expected `# {key}: <count>`")));
            None
        }
        Some(v) => match v.parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => {
                issues.push(ParseIssue::at(number, line.find(v).unwrap_or(0) + 1, format!("malformed {key} {v:?}")));
                None
            }
        },
    }
}

/// Grid index for a record angle, if it sits on a grid position.
fn locate(deg: f64, step_deg: f64, offset: f64, count: usize) -> Option<usize> {
    let k = (deg / step_deg - offset).round();
    if !(k >= 0.0 && k < count as f64) {
        return None;
    }
    let k = k as usize;
    let expected = (k as f64 + offset) * step_deg;
    ((deg - expected).abs() <= ANGLE_SLACK_DEG).then_some(k)
}

fn describe_cell(grid: &DirectionGrid, i: usize, j: usize, pol: Polarization) -> String {
    format!(
        "(theta {:.4} deg [ring {i}], phi {:.4} deg [column {j}], {pol})",
        grid.theta(i).to_degrees(),
        grid.phi(j).to_degrees()
    )
}

/// Parses and validates a scan file.
pub fn parse_scan(input: &str) -> Result<PolarizedScan, ScanFileError> {
    let mut lines: Vec<&str> = input.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let lines: Vec<&str> = lines.into_iter().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let mut issues = Vec::new();
    let fail = |issues: Vec<ParseIssue>| Err(ScanFileError { issues });

    let quantity = match lines.first().map(|l| (l, header_field(l, "quantity"))) {
        Some((_, Some("eirp"))) => Some(Quantity::Eirp),
        Some((_, Some("eis"))) => Some(Quantity::Eis),
        Some((l, Some(other))) => {
            let col = l.rfind(other).unwrap_or(0) + 1;
            issues.push(ParseIssue::at(1, col, format!("unknown quantity {other:?}, expected eirp or eis")));
            None
        }
        _ => {
            issues.push(ParseIssue::at(1, 1, "expected `# quantity: eirp|eis`"));
            None
        }
    };
    let n_theta = parse_count(lines.get(1).copied(), 2, "n_theta", &mut issues);
    let n_phi = parse_count(lines.get(2).copied(), 3, "n_phi", &mut issues);
    let (Some(quantity), Some(n_theta), Some(n_phi)) = (quantity, n_theta, n_phi) else {
        return fail(issues);
    };
    let grid = match DirectionGrid::new(n_theta, n_phi) {
        Ok(g) => g,
        Err(e) => {
            issues.push(ParseIssue::at(2, 1, e.to_string()));
            return fail(issues);
        }
    };

    let mut cursor = 3;
    let mut metadata = BTreeMap::new();
    while let Some(line) = lines.get(cursor).filter(|l| l.starts_with('#')) {
        let number = cursor + 1;
        match line[1..].split_once(':') {
            Some((k, v)) => {
                let (k, v) = (k.trim().to_string(), v.trim().to_string());
                match metadata.entry(k) {
                    Entry::Occupied(e) => {
                        issues.push(ParseIssue::at(number, 1, format!("duplicate metadata key {:?}", e.key())))
                    }
                    Entry::Vacant(e) => {
                        e.insert((number, v));
                    }
                }
            }
            None => issues.push(ParseIssue::at(number, 1, "expected `# key: value`")),
        }
        cursor += 1;
    }

    match lines.get(cursor) {
        Some(&COLUMN_LINE) => cursor += 1,
        Some(_) => {
            issues.push(ParseIssue::at(cursor + 1, 1, format!("expected column line `{COLUMN_LINE}`")));
            return fail(issues);
        }
        None => {
            issues.push(ParseIssue::at(cursor + 1, 1, format!("missing column line `{COLUMN_LINE}`")));
            return fail(issues);
        }
    }

    let theta_step = grid.theta_step().to_degrees();
    let phi_step = grid.phi_step().to_degrees();
    let mut slots: [Vec<Option<(usize, PowerValue)>>; 2] = [vec![None; grid.len()], vec![None; grid.len()]];

    for (offset, line) in lines[cursor..].iter().enumerate() {
        let number = cursor + offset + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            issues.push(ParseIssue::at(number, 1, format!("expected 4 fields, found {}", fields.len())));
            continue;
        }
        let mut columns = [1usize; 4];
        for f in 1..4 {
            columns[f] = columns[f - 1] + fields[f - 1].len() + 1;
        }

        let angle = |f: usize, step: f64, off: f64, count: usize, name: &str| -> Result<usize, ParseIssue> {
            let deg: f64 = fields[f]
                .parse()
                .ok()
                .filter(|d: &f64| d.is_finite())
                .ok_or_else(|| ParseIssue::at(number, columns[f], format!("malformed {name} {:?}", fields[f])))?;
            locate(deg, step, off, count)
                .ok_or_else(|| ParseIssue::at(number, columns[f], format!("{name} {deg} is not a grid position")))
        };
        let i = angle(0, theta_step, 0.5, grid.n_theta(), "theta_deg");
        let j = angle(1, phi_step, 0.0, grid.n_phi(), "phi_deg");
        let pol = match fields[2] {
            "theta" => Ok(Polarization::Theta),
            "phi" => Ok(Polarization::Phi),
            other => Err(ParseIssue::at(number, columns[2], format!("unknown polarization {other:?}"))),
        };
        let value = match (fields[3], quantity) {
            ("-inf", Quantity::Eirp) => Ok(PowerValue::ZERO),
            // `-inf` in an EIS file is read as the no-reception sentinel too
            ("inf" | "-inf", Quantity::Eis) => Ok(PowerValue::INFINITE),
            ("inf", Quantity::Eirp) => Err(ParseIssue::at(number, columns[3], "infinite EIRP is not allowed")),
            (text, _) => text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(|v| dbm_to_mw(v).ok())
                .and_then(|mw| PowerValue::from_mw(mw).ok())
                .ok_or_else(|| ParseIssue::at(number, columns[3], format!("malformed value_dbm {text:?}"))),
        };
        let (i, j, pol, value) = match (i, j, pol, value) {
            (Ok(i), Ok(j), Ok(p), Ok(v)) => (i, j, p, v),
            (i, j, p, v) => {
                issues.extend([i.err(), j.err(), p.err(), v.err()].into_iter().flatten());
                continue;
            }
        };
        let slot = &mut slots[pol as usize][grid.index(i, j)];
        match slot {
            Some((first, _)) => issues.push(ParseIssue::at(
                number,
                1,
                format!("duplicate record for {}, first given on line {first}", describe_cell(&grid, i, j, pol)),
            )),
            None => *slot = Some((number, value)),
        }
    }

    let mut missing = 0;
    for (i, j) in grid.cells() {
        for pol in Polarization::BOTH {
            if slots[pol as usize][grid.index(i, j)].is_none() {
                missing += 1;
                if missing <= MAX_MISSING_LISTED {
                    issues.push(ParseIssue::file(format!("missing record for {}", describe_cell(&grid, i, j, pol))));
                }
            }
        }
    }
    if missing > MAX_MISSING_LISTED {
        issues.push(ParseIssue::file(format!(
            "{} more missing records not listed",
            missing - MAX_MISSING_LISTED
        )));
    }
    if !issues.is_empty() {
        return fail(issues);
    }

    let take = |p: Polarization| slots[p as usize].iter().map(|s| s.expect("all cells present").1).collect();
    let mut scan = PolarizedScan::new(quantity, grid, take(Polarization::Theta), take(Polarization::Phi))
        .expect("lengths match grid");
    for (key, (number, value)) in metadata {
        if let Err(e) = scan.insert_metadata(key, value) {
            issues.push(ParseIssue::at(number, 1, e.to_string()));
        }
    }
    for violation in validate_scan(&scan).violations {
        issues.push(ParseIssue::file(violation.to_string()));
    }
    if !issues.is_empty() {
        return fail(issues);
    }
    Ok(scan)
}

pub fn read_scan(path: impl AsRef<Path>) -> Result<PolarizedScan, ReadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_scan(&text).map_err(|errors| ReadError::Parse {
        path: path.to_owned(),
        errors,
    })
}

fn fixed(value: f64, digits: usize) -> String {
    let s = format!("{value:.digits$}");
    // "-0.000000" and "0.000000" are the same number; keep one spelling
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn format_dbm(v: PowerValue) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v.is_zero() {
        "-inf".into()
    } else {
        fixed(v.dbm_or_neg_inf(), 6)
    }
}

fn write_header(out: &mut String, quantity: &str, grid: &DirectionGrid, metadata: &BTreeMap<String, String>) {
    out.push_str(&format!("# quantity: {quantity}\n# n_theta: {}\n# n_phi: {}\n", grid.n_theta(), grid.n_phi()));
    for (k, v) in metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(COLUMN_LINE);
    out.push('\n');
}

fn write_records(out: &mut String, grid: &DirectionGrid, value: impl Fn(usize, Polarization) -> String) {
    for (i, j) in grid.cells() {
        let theta = fixed(grid.theta(i).to_degrees(), 4);
        let phi = fixed(grid.phi(j).to_degrees(), 4);
        for pol in Polarization::BOTH {
            out.push_str(&format!("{theta},{phi},{pol},{}\n", value(grid.index(i, j), pol)));
        }
    }
}

/// Canonical serialization of a scan.
pub fn write_scan(scan: &PolarizedScan) -> String {
    let mut out = String::new();
    write_header(&mut out, scan.quantity().token(), scan.grid(), scan.metadata());
    write_records(&mut out, scan.grid(), |k, pol| format_dbm(scan.component(pol)[k]));
    out
}

pub fn write_scan_file(path: impl AsRef<Path>, scan: &PolarizedScan) -> std::io::Result<()> {
    fs::write(path, write_scan(scan))
}

/// Derived per-direction maps written in the scan layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `D_r`, written in dBi.
    ReceiveDirectivity,
    /// `U'`, written in dBm per steradian.
    ReceivingIntensity,
}

impl MapKind {
    pub fn token(self) -> &'static str {
        match self {
            MapKind::ReceiveDirectivity => "receive_directivity",
            MapKind::ReceivingIntensity => "receiving_intensity",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            MapKind::ReceiveDirectivity => "dBi",
            MapKind::ReceivingIntensity => "dBm/sr",
        }
    }
}

/// Writes a map with per-polarization components in the scan CSV layout.
/// Values are `10 * log10(x)` in the kind's unit; zero is written `-inf`.
pub fn write_map(
    kind: MapKind,
    grid: &DirectionGrid,
    theta: &[f64],
    phi: &[f64],
    extra: &BTreeMap<String, String>,
) -> String {
    let mut metadata = extra.clone();
    metadata.insert("unit".into(), kind.unit().into());
    let mut out = String::new();
    write_header(&mut out, kind.token(), grid, &metadata);
    write_records(&mut out, grid, |k, pol| {
        let v = match pol {
            Polarization::Theta => theta[k],
            Polarization::Phi => phi[k],
        };
        PowerValue::from_mw(v).map(format_dbm).unwrap_or_else(|_| "nan".into())
    });
    out
}

/// A real that serializes to a JSON number when finite and to the strings
/// `"inf"` / `"-inf"` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonReal(pub f64);

impl Serialize for JsonReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else if self.0 < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerJson {
    pub mw: JsonReal,
    pub dbm: JsonReal,
}

impl From<PowerValue> for PowerJson {
    fn from(p: PowerValue) -> Self {
        PowerJson {
            mw: JsonReal(p.mw()),
            dbm: JsonReal(p.dbm_or_neg_inf()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremaJson {
    pub min: PowerJson,
    pub max: PowerJson,
}

impl From<Extrema> for ExtremaJson {
    fn from(e: Extrema) -> Self {
        ExtremaJson {
            min: e.min.into(),
            max: e.max.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridJson {
    pub n_theta: usize,
    pub n_phi: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionJson {
    pub theta_deg: f64,
    pub phi_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizationExtremaJson {
    pub theta: ExtremaJson,
    pub phi: ExtremaJson,
}

/// JSON document for a [`MetricsReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub quantity: Metric,
    pub value: PowerJson,
    pub grid: GridJson,
    pub quadrature_residual: f64,
    pub degraded: bool,
    pub tolerance: f64,
    pub quadrature_within_tolerance: bool,
    pub peak_direction: DirectionJson,
    pub polarization_extrema: PolarizationExtremaJson,
    pub infinite_cells: usize,
    pub dual_infinite_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receive_directivity_deviation: Option<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl ReportFile {
    pub fn new(report: &MetricsReport, tolerance: f64, metadata: &BTreeMap<String, String>) -> Self {
        ReportFile {
            schema_version: REPORT_SCHEMA_VERSION,
            quantity: report.metric,
            value: report.value.into(),
            grid: GridJson {
                n_theta: report.grid.n_theta(),
                n_phi: report.grid.n_phi(),
            },
            quadrature_residual: report.quadrature_residual,
            degraded: report.degraded,
            tolerance,
            quadrature_within_tolerance: report.quadrature_residual <= tolerance,
            peak_direction: DirectionJson {
                theta_deg: report.peak_direction.theta.degrees(),
                phi_deg: report.peak_direction.phi.degrees(),
            },
            polarization_extrema: PolarizationExtremaJson {
                theta: report.theta_extrema.into(),
                phi: report.phi_extrema.into(),
            },
            infinite_cells: report.infinite_cells,
            dual_infinite_cells: report.dual_infinite_cells,
            receive_directivity_deviation: None,
            metadata: metadata.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

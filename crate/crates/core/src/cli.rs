//! The `ota` command line.
//!
//! Exit codes: 0 on success, 1 on validation or compute errors, 2 on usage
//! errors. Diagnostics go to standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::io::{read_scan, write_map, write_scan, MapKind, ReportFile};
use crate::metrics::{
    receive_directivity_map, receiving_intensity_map, tis, trp, MetricsReport, Tolerance,
};
use crate::scan::{DirectionGrid, PolarizedScan};
use crate::synth::{
    hertzian_dipole_directivity, isotropic_directivity, synthesize_scan, AntennaModel, PolSplit, Role,
};
use crate::units::PowerValue;

#[derive(Debug, Parser)]
#[command(name = "ota", about = "TRP and TIS from full-sphere OTA scans", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Total radiated power of an EIRP scan
    Trp {
        scan: PathBuf,
        /// Write a JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = Tolerance::DEFAULT.relative)]
        tolerance: f64,
    },
    /// Total isotropic sensitivity of an EIS scan
    Tis {
        scan: PathBuf,
        /// Write a JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write receive directivity and receiving intensity maps
        /// next to the scan (`<stem>_dr.csv`, `<stem>_uprime.csv`)
        #[arg(long)]
        maps: bool,
        #[arg(long, default_value_t = Tolerance::DEFAULT.relative)]
        tolerance: f64,
    },
    /// Generate a synthetic scan
    Synth {
        #[arg(long, value_enum)]
        pattern: Pattern,
        /// Radiation (transmit) or receiving (receive) efficiency, (0, 1]
        #[arg(long)]
        eff: f64,
        /// Conducted power in dBm: P_in for transmit, P_s for receive
        #[arg(long, allow_negative_numbers = true)]
        power: f64,
        #[arg(long, value_enum)]
        role: RoleArg,
        /// Fraction of power in the theta polarization
        #[arg(long, default_value_t = 0.5)]
        pol_split: f64,
        /// Grid as NxM (theta rings x phi columns)
        #[arg(long, value_parser = parse_grid_spec)]
        grid: (usize, usize),
        /// Output file; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a scan file; exit 0 iff clean
    Check { scan: PathBuf },
    /// Print the version
    Version,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Pattern {
    Isotropic,
    Dipole,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RoleArg {
    Transmit,
    Receive,
}

fn parse_grid_spec(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    let n = n.trim().parse().map_err(|_| format!("bad theta count in {s:?}"))?;
    let m = m.trim().parse().map_err(|_| format!("bad phi count in {s:?}"))?;
    Ok((n, m))
}

type CliResult = Result<(), String>;

/// Runs the CLI and returns the process exit code.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    2
                }
            };
        }
    };
    let result = match cli.command {
        Command::Trp { scan, out, tolerance } => run_trp(&scan, out.as_deref(), tolerance, stdout),
        Command::Tis {
            scan,
            out,
            maps,
            tolerance,
        } => run_tis(&scan, out.as_deref(), maps, tolerance, stdout, stderr),
        Command::Synth {
            pattern,
            eff,
            power,
            role,
            pol_split,
            grid,
            out,
        } => run_synth(pattern, eff, power, role, pol_split, grid, out.as_deref(), stdout, stderr),
        Command::Check { scan } => run_check(&scan, stdout),
        Command::Version => {
            let _ = writeln!(stdout, "ota {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn load(path: &Path) -> Result<PolarizedScan, String> {
    read_scan(path).map_err(|e| e.to_string())
}

fn tolerance(value: f64) -> Result<f64, String> {
    Tolerance::new(value).map(|t| t.relative).map_err(|e| e.to_string())
}

fn print_value(report: &MetricsReport, stdout: &mut dyn Write) -> CliResult {
    writeln!(stdout, "{}", report.value).map_err(|e| e.to_string())
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run_trp(path: &Path, out: Option<&Path>, tol: f64, stdout: &mut dyn Write) -> CliResult {
    let tol = tolerance(tol)?;
    let scan = load(path)?;
    let report = trp(&scan).map_err(|e| e.to_string())?;
    print_value(&report, stdout)?;
    if let Some(out) = out {
        write_file(out, &ReportFile::new(&report, tol, scan.metadata()).to_json())?;
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn run_tis(
    path: &Path,
    out: Option<&Path>,
    maps: bool,
    tol: f64,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let tol = tolerance(tol)?;
    let scan = load(path)?;
    let report = tis(&scan).map_err(|e| e.to_string())?;
    print_value(&report, stdout)?;
    let mut file = ReportFile::new(&report, tol, scan.metadata());

    if maps {
        let grid = scan.grid();
        let dr = receive_directivity_map(report.value, &scan).map_err(|e| e.to_string())?;
        let u = receiving_intensity_map(report.value, &scan).map_err(|e| e.to_string())?;
        let deviation = dr.normalization_deviation();
        file.receive_directivity_deviation = Some(deviation);
        if deviation > tol {
            let _ = writeln!(
                stderr,
                "warning: receive directivity integrates to 4pi x {:.6}, outside tolerance {tol}",
                1.0 + deviation
            );
        }
        let mut extra = BTreeMap::new();
        extra.insert("tis_dbm".to_string(), format!("{:.6}", report.value.dbm_or_neg_inf()));
        let dr_path = sibling(path, "dr");
        let u_path = sibling(path, "uprime");
        write_file(&dr_path, &write_map(MapKind::ReceiveDirectivity, grid, &dr.theta, &dr.phi, &extra))?;
        write_file(&u_path, &write_map(MapKind::ReceivingIntensity, grid, &u.theta, &u.phi, &extra))?;
        let _ = writeln!(stderr, "wrote {} and {}", dr_path.display(), u_path.display());
    }
    if let Some(out) = out {
        write_file(out, &file.to_json())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_synth(
    pattern: Pattern,
    eff: f64,
    power_dbm: f64,
    role: RoleArg,
    pol_split: f64,
    (n_theta, n_phi): (usize, usize),
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let grid = DirectionGrid::new(n_theta, n_phi).map_err(|e| e.to_string())?;
    let (directivity, name) = match pattern {
        Pattern::Isotropic => (isotropic_directivity(), "isotropic"),
        Pattern::Dipole => (hertzian_dipole_directivity(), "dipole"),
    };
    let power = PowerValue::from_dbm(power_dbm).map_err(|e| e.to_string())?;
    let split = PolSplit::constant(pol_split).map_err(|e| e.to_string())?;
    let model = AntennaModel::new(directivity, split, eff, power).map_err(|e| e.to_string())?;
    let role = match role {
        RoleArg::Transmit => Role::Transmit,
        RoleArg::Receive => Role::Receive,
    };
    let mut scan = synthesize_scan(&model, role, &grid).map_err(|e| e.to_string())?;
    for (k, v) in [
        ("pattern", name.to_string()),
        ("efficiency", eff.to_string()),
        ("conducted_power_dbm", power_dbm.to_string()),
        ("pol_split", pol_split.to_string()),
    ] {
        scan.insert_metadata(k, v).map_err(|e| e.to_string())?;
    }
    let text = write_scan(&scan);
    match out {
        Some(path) => {
            write_file(path, &text)?;
            let _ = writeln!(stderr, "wrote {} ({} {} scan)", path.display(), grid, scan.quantity());
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string())?,
    }
    Ok(())
}

fn run_check(path: &Path, stdout: &mut dyn Write) -> CliResult {
    let scan = load(path)?;
    let _ = writeln!(stdout, "ok: {} scan on {} grid", scan.quantity(), scan.grid());
    Ok(())
}

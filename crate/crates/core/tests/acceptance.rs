//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use ota_core::io::{parse_scan, write_scan};
use ota_core::metrics::{
    receive_directivity_from_intensity, receive_directivity_map, receiving_intensity_map, tis, trp,
};
use ota_core::quadrature::{convergence_probe, integrate_fn, integrate_sphere, ProbeOutcome};
use ota_core::scan::{build_grid, DirectionGrid, Polarization, PolarizedScan};
use ota_core::synth::{
    hertzian_dipole_directivity, isotropic_directivity, synthesize_scan, AntennaModel, Directivity, PolSplit,
    Role,
};
use ota_core::units::PowerValue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closure tolerance on the (36, 72) grid: 0.1 % relative.
const REL_TOL: f64 = 1e-3;
/// Cell-wise agreement of the two receive-directivity routes.
const ROUTE_TOL: f64 = 1e-12;
/// Exact +10 dB under x10 scaling.
const LINEARITY_DB_TOL: f64 = 1e-10;
/// dBm drift through a write/parse cycle.
const DRIFT_DB_TOL: f64 = 1e-9;
/// CLI printed values.
const CLI_DB_TOL: f64 = 0.02;
const SECOND_ORDER: (f64, f64) = (3.5, 4.5);
const RANDOM_RECEIVERS: usize = 200;
const P_S: f64 = 1e-9;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn pv(mw: f64) -> PowerValue {
    PowerValue::from_mw(mw).unwrap()
}

fn grid_36() -> DirectionGrid {
    build_grid(36, 72).unwrap()
}

fn model(d: Directivity, rho: f64, eff: f64, p: f64) -> AntennaModel {
    AntennaModel::new(d, PolSplit::constant(rho).unwrap(), eff, pv(p)).unwrap()
}

fn pattern(name: &str) -> Directivity {
    match name {
        "isotropic" => isotropic_directivity(),
        _ => hertzian_dipole_directivity(),
    }
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_isotropic_trp() -> Outcome {
    let start = Instant::now();
    let scan = synthesize_scan(&model(isotropic_directivity(), 0.5, 1.0, 1.0), Role::Transmit, &grid_36()).unwrap();
    let value = trp(&scan).map_err(|e| e.to_string())?.value.mw();
    let elapsed = start.elapsed();
    let err = rel(value, 1.0);
    check(
        err < REL_TOL && elapsed < Duration::from_secs(1),
        format!("TRP = {value:.9} mW, rel err {err:.2e}, {elapsed:?}"),
    )
}

fn c2_dipole_trp() -> Outcome {
    let scan =
        synthesize_scan(&model(hertzian_dipole_directivity(), 0.5, 0.5, 100.0), Role::Transmit, &grid_36()).unwrap();
    let value = trp(&scan).map_err(|e| e.to_string())?.value.mw();
    let err = rel(value, 50.0);
    check(err < REL_TOL, format!("TRP = {value:.9} mW (target 50), rel err {err:.2e}"))
}

fn c3_reciprocity_closure() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_db: f64 = 0.0;
    for name in ["isotropic", "dipole"] {
        for eff in [0.25, 0.5, 1.0] {
            let scan = synthesize_scan(&model(pattern(name), 0.5, eff, P_S), Role::Receive, &grid_36()).unwrap();
            let value = tis(&scan).map_err(|e| e.to_string())?.value;
            let target = pv(P_S / eff);
            worst = worst.max(rel(value.mw(), target.mw()));
            worst_db = worst_db.max((value.dbm().unwrap() - target.dbm().unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < REL_TOL && worst_db < 0.005 && elapsed < Duration::from_secs(5),
        format!("6 cases, worst rel err {worst:.2e} ({worst_db:.2e} dB), {elapsed:?}"),
    )
}

/// Smooth nonnegative pattern: the square of a random combination of
/// constant, dipole and quadrupole terms, normalized on a fine grid.
fn random_receiver(rng: &mut ChaCha8Rng) -> AntennaModel {
    let c0: f64 = rng.gen_range(0.5..2.0);
    let a: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let raw = move |t: f64, p: f64| {
        let (x, y, z) = (t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
        let terms = [x, y, z, x * y, x * z, y * z, x * x - y * y, 3.0 * z * z - 1.0];
        let s: f64 = c0 + terms.iter().zip(&a).map(|(f, c)| f * c).sum::<f64>();
        s * s
    };
    let fine = build_grid(180, 360).unwrap();
    let norm = integrate_fn(&fine, raw).unwrap() / (4.0 * PI);
    let (b1, b2): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let eff = 1.0 - rng.gen::<f64>();
    AntennaModel::new(
        Directivity::new(move |t, p| raw(t, p) / norm),
        PolSplit::new(move |t, p| 0.5 + 0.25 * b1 * t.cos() + 0.25 * b2 * t.sin() * p.cos()),
        eff,
        pv(P_S),
    )
    .unwrap()
}

fn random_receive_scans() -> Vec<(AntennaModel, PolarizedScan)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7115);
    (0..RANDOM_RECEIVERS)
        .map(|_| {
            let m = random_receiver(&mut rng);
            let scan = synthesize_scan(&m, Role::Receive, &grid_36()).unwrap();
            (m, scan)
        })
        .collect()
}

fn c4_tis_at_least_ps(receivers: &[(AntennaModel, PolarizedScan)]) -> Outcome {
    let floor = P_S * (1.0 - 2.0 * REL_TOL);
    let mut min_ratio = f64::INFINITY;
    let mut failures = 0;
    for (_, scan) in receivers {
        let value = tis(scan).map_err(|e| e.to_string())?.value.mw();
        min_ratio = min_ratio.min(value / P_S);
        if value < floor {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!("{} receivers, min TIS/P_s = {min_ratio:.6}, {failures} below floor", receivers.len()),
    )
}

fn all_receive_scans(random: &[(AntennaModel, PolarizedScan)]) -> Vec<PolarizedScan> {
    let mut scans: Vec<PolarizedScan> = random.iter().map(|(_, s)| s.clone()).collect();
    for name in ["isotropic", "dipole"] {
        for eff in [0.25, 0.5, 1.0] {
            for rho in [0.0, 0.5, 1.0] {
                scans.push(synthesize_scan(&model(pattern(name), rho, eff, P_S), Role::Receive, &grid_36()).unwrap());
            }
        }
    }
    scans
}

fn c5_intensity_integrates_to_tis(scans: &[PolarizedScan]) -> Outcome {
    let mut worst: f64 = 0.0;
    for scan in scans {
        let t = tis(scan).map_err(|e| e.to_string())?.value;
        let u = receiving_intensity_map(t, scan).map_err(|e| e.to_string())?;
        let total = integrate_sphere(&u.to_field().map_err(|e| e.to_string())?);
        worst = worst.max(rel(total, t.mw()));
    }
    check(worst < REL_TOL, format!("{} scans, worst rel err {worst:.2e}", scans.len()))
}

fn c6_directivity_routes(scans: &[PolarizedScan]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for scan in scans {
        let t = tis(scan).map_err(|e| e.to_string())?.value;
        let direct = receive_directivity_map(t, scan).map_err(|e| e.to_string())?;
        let u = receiving_intensity_map(t, scan).map_err(|e| e.to_string())?;
        let via_u = receive_directivity_from_intensity(t, &u).map_err(|e| e.to_string())?;
        for (k, eis) in scan.combined_values().iter().enumerate() {
            if eis.is_infinite() {
                continue;
            }
            cells += 1;
            worst = worst.max(rel(via_u.values[k], direct.values[k]));
        }
    }
    check(worst < ROUTE_TOL, format!("{cells} finite cells, worst rel diff {worst:.2e}"))
}

fn c7_linearity() -> Outcome {
    let tx = synthesize_scan(&model(hertzian_dipole_directivity(), 0.3, 0.7, 5.0), Role::Transmit, &grid_36()).unwrap();
    let rx = synthesize_scan(&model(hertzian_dipole_directivity(), 0.3, 0.7, P_S), Role::Receive, &grid_36()).unwrap();
    let db = |s: &PolarizedScan, f: fn(&PolarizedScan) -> ota_core::Result<ota_core::MetricsReport>| {
        f(s).unwrap().value.dbm().unwrap()
    };
    let d_trp = db(&tx.scaled(10.0).unwrap(), trp) - db(&tx, trp);
    let d_tis = db(&rx.scaled(10.0).unwrap(), tis) - db(&rx, tis);
    let e_trp = (d_trp - 10.0).abs();
    let e_tis = (d_tis - 10.0).abs();
    check(
        e_trp < LINEARITY_DB_TOL && e_tis < LINEARITY_DB_TOL,
        format!("TRP +{d_trp:.12} dB, TIS +{d_tis:.12} dB"),
    )
}

fn c8_convergence() -> Outcome {
    let outcome = convergence_probe(|t, _| 1.5 * t.sin().powi(2), 18, 4.0 * PI).map_err(|e| e.to_string())?;
    match outcome {
        ProbeOutcome::Exact => Err("both levels exact; no ratio".into()),
        ProbeOutcome::Ratio {
            coarse_error,
            fine_error,
            ratio,
        } => check(
            (SECOND_ORDER.0..=SECOND_ORDER.1).contains(&ratio),
            format!(
                "dipole error (18,36) {coarse_error:.3e}, (36,72) {fine_error:.3e}, ratio {ratio:.3} (required {}..{})",
                SECOND_ORDER.0, SECOND_ORDER.1
            ),
        ),
    }
}

fn c9_null_handling() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut sentinels = 0;
    for eff in [0.25, 0.5, 1.0] {
        let scan =
            synthesize_scan(&model(hertzian_dipole_directivity(), 1.0, eff, P_S), Role::Receive, &grid_36()).unwrap();
        sentinels += scan.infinite_cell_count();
        let value = tis(&scan).map_err(|e| e.to_string())?.value.mw();
        worst = worst.max(rel(value, P_S / eff));
    }
    check(
        worst < REL_TOL && sentinels > 0,
        format!("{sentinels} inf cells, worst rel err {worst:.2e}"),
    )
}

fn io_corpus() -> Vec<PolarizedScan> {
    let mut corpus = Vec::new();
    for (name, rho, eff, dbm, role, nt, np) in [
        ("isotropic", 0.5, 1.0, 0.0, Role::Transmit, 2, 3),
        ("isotropic", 0.5, 1.0, -90.0, Role::Receive, 12, 24),
        ("dipole", 1.0, 0.5, 20.0, Role::Transmit, 12, 24),
        ("dipole", 1.0, 0.5, -90.0, Role::Receive, 12, 24),
        ("dipole", 0.0, 0.25, -95.5, Role::Receive, 9, 18),
        ("dipole", 0.3, 0.8, 13.7, Role::Transmit, 36, 72),
        ("dipole", 0.5, 0.5, -90.0, Role::Receive, 36, 72),
        ("isotropic", 0.0, 0.33, 30.0, Role::Transmit, 7, 11),
    ] {
        let m = AntennaModel::new(pattern(name), PolSplit::constant(rho).unwrap(), eff, PowerValue::from_dbm(dbm).unwrap())
            .unwrap();
        corpus.push(synthesize_scan(&m, role, &build_grid(nt, np).unwrap()).unwrap());
    }
    // dead directions in both polarizations, under the 25 % cap
    let mut dead = corpus[3].clone();
    for j in 0..dead.grid().n_phi() {
        dead.set(0, j, Polarization::Theta, PowerValue::INFINITE).unwrap();
    }
    dead.insert_metadata("device", "dut-7").unwrap();
    corpus.push(dead);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let m = random_receiver(&mut rng);
        corpus.push(synthesize_scan(&m, Role::Receive, &build_grid(18, 36).unwrap()).unwrap());
    }
    corpus
}

fn c10_io_determinism() -> Outcome {
    let corpus = io_corpus();
    let mut drift: f64 = 0.0;
    let mut sentinel_scans = 0;
    for (n, scan) in corpus.iter().enumerate() {
        let first = write_scan(scan);
        let parsed = parse_scan(&first).map_err(|e| format!("scan {n}: {e}"))?;
        let second = write_scan(&parsed);
        if first != second {
            return Err(format!("scan {n}: write/parse/write not byte-identical"));
        }
        let reparsed = parse_scan(&second).map_err(|e| format!("scan {n}: {e}"))?;
        for pol in Polarization::BOTH {
            for (a, b) in parsed.component(pol).iter().zip(reparsed.component(pol)) {
                let (a, b) = (a.dbm_or_neg_inf(), b.dbm_or_neg_inf());
                if a.is_finite() || b.is_finite() {
                    drift = drift.max((a - b).abs());
                } else if a != b {
                    return Err(format!("scan {n}: sentinel changed"));
                }
            }
        }
        if first.contains(",inf\n") || first.contains(",-inf\n") {
            sentinel_scans += 1;
        }
    }
    check(
        corpus.len() >= 10 && sentinel_scans > 0 && drift < DRIFT_DB_TOL,
        format!("{} scans ({sentinel_scans} with sentinels), max drift {drift:.2e} dB", corpus.len()),
    )
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ota"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "`ota {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn printed_dbm(stdout: &str) -> Result<f64, String> {
    stdout
        .trim()
        .strip_suffix(" dBm")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("unexpected output {stdout:?}"))
}

fn c11_cli_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = dir.path().join("s.csv");
    let r = dir.path().join("r.csv");
    let (s, r) = (s.to_str().unwrap(), r.to_str().unwrap());
    run_cli(&[
        "synth", "--pattern", "isotropic", "--eff", "1.0", "--power", "0", "--role", "transmit", "--pol-split", "0.5",
        "--grid", "36x72", "--out", s,
    ])?;
    let trp_out = run_cli(&["trp", s])?;
    let trp_db = printed_dbm(&trp_out)?;
    run_cli(&[
        "synth", "--pattern", "dipole", "--eff", "0.5", "--power", "-90", "--role", "receive", "--grid", "36x72",
        "--out", r,
    ])?;
    let tis_out = run_cli(&["tis", r])?;
    let tis_db = printed_dbm(&tis_out)?;
    let target = 10.0 * 2e-9f64.log10();
    check(
        trp_db.abs() <= CLI_DB_TOL && (tis_db - target).abs() <= CLI_DB_TOL,
        format!("trp printed {:?}, tis printed {:?} (target {target:.4})", trp_out.trim(), tis_out.trim()),
    )
}

fn main() {
    let receivers = random_receive_scans();
    let receive_scans = all_receive_scans(&receivers);
    let results: Vec<(&str, Outcome)> = vec![
        ("1 isotropic TRP closure", c1_isotropic_trp()),
        ("2 dipole TRP closure", c2_dipole_trp()),
        ("3 reciprocity TIS closure", c3_reciprocity_closure()),
        ("4 TIS >= P_s on random receivers", c4_tis_at_least_ps(&receivers)),
        ("5 receiving intensity integrates to TIS", c5_intensity_integrates_to_tis(&receive_scans)),
        ("6 receive directivity routes agree", c6_directivity_routes(&receive_scans)),
        ("7 x10 scaling is +10 dB", c7_linearity()),
        ("8 second-order quadrature convergence", c8_convergence()),
        ("9 axial null handling", c9_null_handling()),
        ("10 scan I/O determinism", c10_io_determinism()),
        ("11 CLI end to end", c11_cli_end_to_end()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! File formats: profile and initial-data CSVs with a JSON metadata comment
//! line, snapshot CSVs, diagnostics.csv and the run manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::perturbation::{ExponentSet, InitialData};
use crate::profile::ShockProfile;
use crate::solver::SimState;

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Writes `# <json>` followed by a CSV table.
fn write_table<M: Serialize>(path: &Path, meta: &M, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", serde_json::to_string(meta)?)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)?;
    for r in rows {
        csv.write_record(r.iter().map(|x| fmt(*x)))?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads a file written by [`write_table`]: metadata, header and numeric rows.
fn read_table(path: &Path) -> Result<(serde_json::Value, Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta_text = first
        .strip_prefix('#')
        .ok_or_else(|| Error::domain(format!("{}: missing metadata line", path.display())))?;
    let meta: serde_json::Value = serde_json::from_str(meta_text.trim())?;
    let mut csv = csv::Reader::from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::domain(format!("{}: bad number {s:?}: {e}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::domain(format!("{}: ragged row", path.display())));
        }
        rows.push(row);
    }
    Ok((meta, header, rows))
}

fn expect_header(path: &Path, found: &[String], expected: &[&str]) -> Result<()> {
    if found.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(Error::domain(format!(
            "{}: expected columns {expected:?}, found {found:?}",
            path.display()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetadata {
    pub gamma: f64,
    pub mu: f64,
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub s: f64,
    pub delta: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub normalization: f64,
}

impl ProfileMetadata {
    pub fn of(p: &ShockProfile) -> Self {
        Self {
            gamma: p.gas.gamma,
            mu: p.gas.mu,
            v_minus: p.v_minus,
            u_minus: p.u_minus,
            v_plus: p.v_plus,
            u_plus: p.u_plus,
            s: p.s,
            delta: p.delta,
            c_minus: p.c_minus,
            c_plus: p.c_plus,
            normalization: p.normalization,
        }
    }
}

pub const PROFILE_COLUMNS: [&str; 3] = ["xi", "V", "U"];

/// Profile sampled at `points` uniform nodes on `[xi_min, xi_max]`.
pub fn write_profile_csv(path: &Path, profile: &ShockProfile, xi_min: f64, xi_max: f64, points: usize) -> Result<()> {
    if points < 2 || !(xi_max > xi_min) {
        return Err(Error::domain("profile export needs points >= 2 and xi_max > xi_min"));
    }
    let h = (xi_max - xi_min) / (points - 1) as f64;
    let rows = (0..points).map(|j| {
        let xi = xi_min + j as f64 * h;
        let (v, u) = profile.evaluate(xi);
        vec![xi, v, u]
    });
    write_table(path, &ProfileMetadata::of(profile), &PROFILE_COLUMNS, rows)
}

pub fn read_profile_csv(path: &Path) -> Result<(ProfileMetadata, Vec<[f64; 3]>)> {
    let (meta, header, rows) = read_table(path)?;
    expect_header(path, &header, &PROFILE_COLUMNS)?;
    Ok((serde_json::from_value(meta)?, rows.into_iter().map(|r| [r[0], r[1], r[2]]).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialMetadata {
    pub exponents: Option<ExponentSet>,
    pub sigma: f64,
    pub beta: f64,
    pub delta: f64,
    pub length: f64,
    pub cells: usize,
}

pub const INITIAL_COLUMNS: [&str; 5] = ["xi", "v0", "u0", "phi0", "psi0"];

pub fn write_initial_csv(path: &Path, grid: &Grid, data: &InitialData, delta: f64, exponents: Option<ExponentSet>) -> Result<()> {
    let meta = InitialMetadata {
        exponents,
        sigma: data.sigma,
        beta: data.beta,
        delta,
        length: grid.length,
        cells: grid.cells,
    };
    let rows = (0..grid.len()).map(|j| vec![grid.node(j), data.v0[j], data.u0[j], data.phi0[j], data.psi0[j]]);
    write_table(path, &meta, &INITIAL_COLUMNS, rows)
}

/// Columns of an initial-data CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialTable {
    pub meta: InitialMetadata,
    pub xi: Vec<f64>,
    pub v0: Vec<f64>,
    pub u0: Vec<f64>,
    pub phi0: Vec<f64>,
    pub psi0: Vec<f64>,
}

pub fn read_initial_csv(path: &Path) -> Result<InitialTable> {
    let (meta, header, rows) = read_table(path)?;
    expect_header(path, &header, &INITIAL_COLUMNS)?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    Ok(InitialTable {
        meta: serde_json::from_value(meta)?,
        xi: col(0),
        v0: col(1),
        u0: col(2),
        phi0: col(3),
        psi0: col(4),
    })
}

/// `<root>/run_<tag>`, created if missing.
pub fn run_directory(root: &Path, tag: &str) -> Result<PathBuf> {
    let dir = root.join(format!("run_{tag}"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn snapshot_path(run_dir: &Path, index: usize) -> PathBuf {
    run_dir.join(format!("snap_{index:05}.csv"))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct SnapshotMeta {
    index: usize,
    t: f64,
}

pub fn write_snapshot(run_dir: &Path, index: usize, grid: &Grid, state: &SimState) -> Result<PathBuf> {
    let path = snapshot_path(run_dir, index);
    let rows = (0..grid.len()).map(|j| vec![grid.node(j), state.v[j], state.u[j]]);
    write_table(&path, &SnapshotMeta { index, t: state.t }, &["xi", "v", "u"], rows)?;
    Ok(path)
}

pub fn read_snapshot(path: &Path) -> Result<SimState> {
    let (meta, header, rows) = read_table(path)?;
    expect_header(path, &header, &["xi", "v", "u"])?;
    let meta: SnapshotMeta = serde_json::from_value(meta)?;
    Ok(SimState {
        t: meta.t,
        v: rows.iter().map(|r| r[1]).collect(),
        u: rows.iter().map(|r| r[2]).collect(),
    })
}

/// `diagnostics.csv`: a `#` line naming the columns, then one row per snapshot.
pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let header = DiagnosticsRecord::csv_header();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# one row per snapshot; int_abs_* are running time integrals of the boundary traces at xi = 0; columns: {}",
        header.join(" ")
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&header)?;
    for r in records {
        csv.write_record(r.csv_row())?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasParams;
    use crate::profile::{build_shock_profile, ProfileOptions};

    fn profile() -> ShockProfile {
        build_shock_profile(1.0, 0.5, 2.0, &GasParams::new(2.0, 1.0).unwrap(), &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn profile_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = profile();
        write_profile_csv(&path, &p, -10.0, 10.0, 101).unwrap();
        let (meta, rows) = read_profile_csv(&path).unwrap();
        assert_eq!(meta, ProfileMetadata::of(&p));
        assert_eq!(rows.len(), 101);
        let (v, u) = p.evaluate(rows[37][0]);
        assert!((rows[37][1] - v).abs() < 1e-14 && (rows[37][2] - u).abs() < 1e-14);
        assert!(write_profile_csv(&path, &p, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn snapshot_round_trip_and_naming() {
        let dir = tempfile::tempdir().unwrap();
        let run = run_directory(dir.path(), "abc").unwrap();
        let grid = Grid::new(1.0, 4).unwrap();
        let st = SimState { t: 0.25, v: vec![1.0, 1.1, 1.2, 1.3, 1.4], u: vec![0.5; 5] };
        let path = write_snapshot(&run, 3, &grid, &st).unwrap();
        assert!(path.ends_with("run_abc/snap_00003.csv"));
        assert_eq!(read_snapshot(&path).unwrap(), st);
    }

    #[test]
    fn wrong_columns_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "# {}\na,b\n1,2\n").unwrap();
        assert!(read_initial_csv(&path).is_err());
        std::fs::write(&path, "xi,V,U\n1,2,3\n").unwrap();
        assert!(read_profile_csv(&path).is_err());
    }

    #[test]
    fn hashes_are_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

//! Run artifacts: diagnostics CSV, snapshot matrices and the resolved config.
//!
//! Matrices are stored as text: a `rows cols` header line followed by the
//! row-major values, one row per line, at 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::diagnostics::{DiagnosticsRecord, CSV_HEADER};
use crate::dlra::LowRankState;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mesh::Mesh;

pub fn matrix_to_text(m: &DenseMatrix) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn matrix_from_text(text: &str) -> Result<DenseMatrix> {
    let mut tokens = text.split_whitespace();
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing or invalid {what}"),
            })
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let data: Vec<f64> = text
        .lines()
        .skip(1)
        .flat_map(|l| l.split_whitespace())
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                line: 0,
                message: format!("cannot parse `{t}`"),
            })
        })
        .collect::<Result<_>>()?;
    DenseMatrix::from_row_major(rows, cols, data)
}

/// SHA-256 of the vertex coordinates and connectivity.
pub fn mesh_hash(mesh: &Mesh) -> String {
    let mut h = Sha256::new();
    for v in mesh.vertices() {
        h.update(v[0].to_le_bytes());
        h.update(v[1].to_le_bytes());
    }
    for e in 0..mesh.n_elements() {
        for &i in mesh.element(e) {
            h.update((i as u64).to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

/// Directory name of the snapshot at time `t`.
pub fn snapshot_dir(out_dir: &Path, t: f64) -> PathBuf {
    out_dir.join(format!("snapshot_t{t:.6}"))
}

pub fn write_snapshot(dir: &Path, state: &LowRankState, x_mesh: &Mesh, v_mesh: &Mesh) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("X.mat"), &matrix_to_text(&state.x))?;
    write(&dir.join("S.mat"), &matrix_to_text(&state.s))?;
    write(&dir.join("V.mat"), &matrix_to_text(&state.v))?;
    let meta = format!(
        "time = {:?}\nrank = {}\nx_mesh_sha256 = {}\nv_mesh_sha256 = {}\n",
        state.t,
        state.rank(),
        mesh_hash(x_mesh),
        mesh_hash(v_mesh)
    );
    write(&dir.join("meta.txt"), &meta)
}

pub fn read_snapshot(dir: &Path) -> Result<LowRankState> {
    let read = |name: &str| -> Result<DenseMatrix> {
        let p = dir.join(name);
        matrix_from_text(&fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?)
    };
    let meta_path = dir.join("meta.txt");
    let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let t = meta
        .lines()
        .find_map(|l| l.strip_prefix("time = "))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "meta.txt has no time".into(),
        })?;
    LowRankState::new(read("X.mat")?, read("S.mat")?, read("V.mat")?, t)
}

/// Write `diagnostics.csv` and `scenario.resolved.txt` into `out_dir`.
pub fn write_outputs(out_dir: &Path, records: &[DiagnosticsRecord], resolved: &str) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write(&out_dir.join("diagnostics.csv"), &diagnostics_csv(records))?;
    write(&out_dir.join("scenario.resolved.txt"), resolved)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        assert_eq!(diagnostics_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = crate::mesh::build_interval_mesh(0.0, 1.0, 3, true).unwrap();
        let x = DenseMatrix::from_fn(3, 2, |i, j| (i as f64 + 0.1).ln() / (j as f64 + 3.0));
        let s = DenseMatrix::from_fn(2, 2, |i, j| 1.0 / 3.0 + (i * j) as f64 * 1e-300);
        let st = LowRankState::new(x.clone(), s, x.scale(-std::f64::consts::PI), 0.1 + 0.2).unwrap();
        let d = snapshot_dir(dir.path(), st.t);
        write_snapshot(&d, &st, &m, &m).unwrap();
        assert_eq!(read_snapshot(&d).unwrap(), st);
    }
}

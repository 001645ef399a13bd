//! On-disk kernel tables.
//!
//! Layout: one text header line
//! `KDVKERN1 kind=<kind> lambda=<f64> L=<f64> M=<int> version=<tag>`, then the
//! node values in storage order and `K_yy(x_i, L)` for `i = 0..=M`, all as
//! little-endian `f64`, then the residual report as `key=value` lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::grid::TriangleGrid;
use super::table::{KernelKind, KernelTable, ResidualReport, SOLVER_VERSION};
use crate::error::{Error, Result};

const MAGIC: &str = "KDVKERN1";

/// File a table with these parameters is stored under.
pub fn cache_path(dir: &Path, kind: KernelKind, lambda: f64, length: f64, m: usize) -> PathBuf {
    dir.join(format!("{kind}-lambda{lambda:?}-L{length:?}-M{m}-{SOLVER_VERSION}.kdvk"))
}

fn header(kind: KernelKind, lambda: f64, length: f64, m: usize) -> String {
    format!("{MAGIC} kind={kind} lambda={lambda:?} L={length:?} M={m} version={SOLVER_VERSION}\n")
}

pub fn encode(table: &KernelTable) -> Vec<u8> {
    let g = &table.grid;
    let mut out = header(table.kind, table.lambda, g.length(), g.subdivisions()).into_bytes();
    for v in table.values.iter().chain(&table.d_yy_at_l) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(format!("h={:?}\n", table.residual_report.spacing).as_bytes());
    for (k, v) in &table.residual_report.entries {
        out.extend_from_slice(format!("{k}={v:?}\n").as_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<KernelTable> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let head = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let mut fields = head.split(' ');
    if fields.next() != Some(MAGIC) {
        return Err(Error::Format("bad magic".into()));
    }
    let mut kind = None;
    let mut lambda = None;
    let mut length = None;
    let mut m = None;
    for field in fields {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field `{field}`")))?;
        let bad = |_| Error::Format(format!("bad value in `{field}`"));
        match k {
            "kind" => kind = Some(v.parse::<KernelKind>()?),
            "lambda" => lambda = Some(v.parse::<f64>().map_err(bad)?),
            "L" => length = Some(v.parse::<f64>().map_err(bad)?),
            "M" => m = Some(v.parse::<usize>().map_err(|_| Error::Format(format!("bad value in `{field}`")))?),
            "version" => {
                if v != SOLVER_VERSION {
                    return Err(Error::Format(format!("solver version `{v}` not supported")));
                }
            }
            _ => return Err(Error::Format(format!("unknown header key `{k}`"))),
        }
    }
    let missing = || Error::Format("incomplete header".into());
    let (kind, lambda, length, m) = (
        kind.ok_or_else(missing)?,
        lambda.ok_or_else(missing)?,
        length.ok_or_else(missing)?,
        m.ok_or_else(missing)?,
    );
    let grid = TriangleGrid::new(length, m).map_err(|e| Error::Format(e.to_string()))?;

    let n_values = grid.node_count();
    let n_floats = n_values + m + 1;
    let payload = &bytes[nl + 1..];
    if payload.len() < 8 * n_floats {
        return Err(Error::Format(format!(
            "payload holds {} bytes, expected at least {}",
            payload.len(),
            8 * n_floats
        )));
    }
    let floats: Vec<f64> = payload[..8 * n_floats]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();

    let text = std::str::from_utf8(&payload[8 * n_floats..])
        .map_err(|_| Error::Format("residual section is not UTF-8".into()))?;
    let mut report = ResidualReport::default();
    let mut saw_h = false;
    for line in text.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad residual line `{line}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Format(format!("bad residual line `{line}`")))?;
        if k == "h" {
            report.spacing = v;
            saw_h = true;
        } else {
            report.push(k, v);
        }
    }
    if !saw_h {
        return Err(Error::Format("residual section missing `h`".into()));
    }

    Ok(KernelTable {
        kind,
        grid,
        lambda,
        values: floats[..n_values].to_vec(),
        d_yy_at_l: floats[n_values..].to_vec(),
        residual_report: report,
    })
}

/// Write `table` under `dir`, atomically replacing any previous entry.
pub fn cache_write(dir: &Path, table: &KernelTable) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let g = &table.grid;
    let path = cache_path(dir, table.kind, table.lambda, g.length(), g.subdivisions());
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(table))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

pub fn cache_read(dir: &Path, kind: KernelKind, lambda: f64, length: f64, m: usize) -> Result<KernelTable> {
    let path = cache_path(dir, kind, lambda, length, m);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::NotFound(path)),
        Err(e) => return Err(e.into()),
    };
    let table = decode(&bytes)?;
    if table.kind != kind
        || table.lambda.to_bits() != lambda.to_bits()
        || table.grid.length().to_bits() != length.to_bits()
        || table.grid.subdivisions() != m
    {
        return Err(Error::Format(format!("{} holds a different table", path.display())));
    }
    Ok(table)
}

//! Plain-text matrix dump format.
//!
//! A file holds any number of matrices. Each starts with a header line
//! `matrix <name> <rows> <cols>` followed by `rows` lines of `cols` whitespace-separated
//! entries in row-major order (no row lines when `cols` is 0). An entry is
//! `<re><sign><im>i`, e.g. `1.5e0-2.5e-1i`, with shortest round-trip decimal digits, so
//! reading back reproduces every bit. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64};
use crate::schemes::LinearDesign;

fn format_entry(z: C64) -> String {
    format!("{:e}{:+e}i", z.re, z.im)
}

fn parse_entry(token: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("malformed complex entry {token:?}"));
    let body = token.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

/// Appends one matrix block to `out`.
pub fn write_matrix(out: &mut String, name: &str, m: &CMatrix) {
    let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
    for r in (0..m.rows()).filter(|_| m.cols() > 0) {
        let row: Vec<String> = (0..m.cols()).map(|c| format_entry(m.get(r, c))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Parses every matrix block in `text`, in file order.
pub fn read_matrices(text: &str) -> Result<Vec<(String, CMatrix)>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut out = Vec::new();
    while let Some(header) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [tag, name, rows, cols] = parts[..] else {
            return Err(Error::Parse(format!("bad header {header:?}")));
        };
        if tag != "matrix" {
            return Err(Error::Parse(format!(
                "expected a matrix header, got {header:?}"
            )));
        }
        let rows: usize = rows
            .parse()
            .map_err(|_| Error::Parse(format!("bad row count in {header:?}")))?;
        let cols: usize = cols
            .parse()
            .map_err(|_| Error::Parse(format!("bad column count in {header:?}")))?;
        let mut entries = Vec::with_capacity(rows * cols);
        for r in (0..rows).filter(|_| cols > 0) {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("matrix {name}: missing row {r}")))?;
            let row: Vec<C64> = line
                .split_whitespace()
                .map(parse_entry)
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::Parse(format!(
                    "matrix {name}: row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        out.push((
            name.to_string(),
            CMatrix::from_row_slice(rows, cols, &entries)?,
        ));
    }
    Ok(out)
}

/// Every precoder (`T_<cell>_<user>`) and combiner (`P_<cell>`), 1-based.
pub fn dump_design(design: &LinearDesign) -> String {
    let mut out = format!(
        "# scheme {} L={} K={} beta={}\n",
        design.scheme_id, design.cells, design.users_per_cell, design.streams_per_user
    );
    for l in 0..design.cells {
        for k in 0..design.users_per_cell {
            write_matrix(
                &mut out,
                &format!("T_{}_{}", l + 1, k + 1),
                design.precoder(l, k),
            );
        }
    }
    for m in 0..design.cells {
        write_matrix(&mut out, &format!("P_{}", m + 1), design.combiner(m));
    }
    out
}

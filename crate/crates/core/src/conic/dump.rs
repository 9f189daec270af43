//! Plain-text sparse-triplet program files.
//!
//! ```text
//! conic-dump 1
//! dims <n_vars> <n_rows> <nnz>
//! cone zero <dim>          one line per block, in order
//! cone nonneg <dim>
//! cone soc <dim>
//! cone psd <side>          scaled lower-triangular, column-wise
//! c <col> <value>          nonzero objective entries
//! b <row> <value>          nonzero offsets
//! a <row> <col> <value>    nonzero constraint entries
//! name <col> <json>        optional variable labels
//! ```
//!
//! Indices are 0-based; the program is `min cᵀx  s.t.  b − A·x ∈ K`. Lines
//! starting with `#` are ignored. Values are written with shortest
//! round-trip formatting, so a dump reads back bit-exactly.

use std::fmt::Write as _;

use super::{ConeBlock, ConeSpec, ConicProgram, SparseMatrix, VarName};
use crate::error::{Error, Result};

pub fn write_dump(p: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conic-dump 1");
    let _ = writeln!(out, "dims {} {} {}", p.num_vars(), p.num_rows(), p.a.nnz());
    for b in &p.cone.blocks {
        let _ = match b {
            ConeBlock::Zero(d) => writeln!(out, "cone zero {d}"),
            ConeBlock::Nonneg(d) => writeln!(out, "cone nonneg {d}"),
            ConeBlock::SecondOrder(d) => writeln!(out, "cone soc {d}"),
            ConeBlock::PsdReal(s) => writeln!(out, "cone psd {s}"),
        };
    }
    for (j, v) in p.c.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(out, "c {j} {v:?}");
    }
    for (i, v) in p.b.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(out, "b {i} {v:?}");
    }
    for (i, j, v) in p.a.triplets() {
        let _ = writeln!(out, "a {i} {j} {v:?}");
    }
    for (j, name) in p.names.iter().enumerate() {
        let _ = writeln!(out, "name {j} {}", serde_json::to_string(name).unwrap_or_default());
    }
    out
}

pub fn read_dump(text: &str) -> Result<ConicProgram> {
    let bad = |line: usize, msg: &str| Error::Invalid(format!("dump line {line}: {msg}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    match lines.next() {
        Some((_, l)) if l.trim() == "conic-dump 1" => {}
        _ => return Err(bad(1, "expected header `conic-dump 1`")),
    }
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut blocks = Vec::new();
    let mut c = Vec::new();
    let mut b = Vec::new();
    let mut trips = Vec::new();
    let mut names: Vec<Option<VarName>> = Vec::new();
    for (ln, line) in lines {
        let ln = ln + 1;
        let mut tok = line.split_whitespace();
        let kind = tok.next().unwrap_or_default();
        let mut num = |what: &str| -> Result<&str> { tok.next().ok_or_else(|| bad(ln, &format!("missing {what}"))) };
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, &format!("bad index `{s}`")));
        let val = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, &format!("bad value `{s}`")));
        match kind {
            "dims" => {
                let d = (idx(num("n_vars")?)?, idx(num("n_rows")?)?, idx(num("nnz")?)?);
                c = vec![0.0; d.0];
                b = vec![0.0; d.1];
                names = vec![None; d.0];
                dims = Some(d);
            }
            _ if dims.is_none() => return Err(bad(ln, "`dims` must precede data")),
            "cone" => {
                let k = num("cone kind")?;
                let d = idx(num("cone size")?)?;
                blocks.push(match k {
                    "zero" => ConeBlock::Zero(d),
                    "nonneg" => ConeBlock::Nonneg(d),
                    "soc" => ConeBlock::SecondOrder(d),
                    "psd" => ConeBlock::PsdReal(d),
                    other => return Err(bad(ln, &format!("unknown cone `{other}`"))),
                });
            }
            "c" => {
                let j = idx(num("column")?)?;
                let v = val(num("value")?)?;
                *c.get_mut(j).ok_or_else(|| bad(ln, "column out of range"))? = v;
            }
            "b" => {
                let i = idx(num("row")?)?;
                let v = val(num("value")?)?;
                *b.get_mut(i).ok_or_else(|| bad(ln, "row out of range"))? = v;
            }
            "a" => {
                let i = idx(num("row")?)?;
                let j = idx(num("column")?)?;
                trips.push((i, j, val(num("value")?)?));
            }
            "name" => {
                let j = idx(num("column")?)?;
                let rest = line.splitn(3, char::is_whitespace).nth(2).unwrap_or_default();
                let name: VarName = serde_json::from_str(rest.trim()).map_err(|e| bad(ln, &e.to_string()))?;
                *names.get_mut(j).ok_or_else(|| bad(ln, "column out of range"))? = Some(name);
            }
            other => return Err(bad(ln, &format!("unknown record `{other}`"))),
        }
    }
    let (n, m, nnz) = dims.ok_or_else(|| bad(1, "missing `dims`"))?;
    if trips.len() != nnz {
        return Err(Error::Invalid(format!("dump declares {nnz} entries but lists {}", trips.len())));
    }
    let a = SparseMatrix::from_triplets(m, n, &trips)?;
    let names = names.into_iter().enumerate().map(|(j, nm)| nm.unwrap_or(VarName::Other(format!("x{j}")))).collect();
    let p = ConicProgram { c, a, b, cone: ConeSpec { blocks }, names };
    p.validate()?;
    Ok(p)
}

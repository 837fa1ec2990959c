//! Binary field dumps: one JSON header line `{N, L, M, X_max, P, degree}`
//! followed by little-endian `f64` pairs `(re, im)` in C order (normal index
//! outermost). Form components follow each other in canonical multi-index
//! order. Boundary fields are written as a single layer with `P = 1`.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{BoundaryField, ScalarField, StripGrid};
use crate::error::{Error, Result};
use crate::exterior::{FormField, MultiIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub period: f64,
    #[serde(rename = "M")]
    pub points: usize,
    #[serde(rename = "X_max")]
    pub depth: f64,
    #[serde(rename = "P")]
    pub nodes: usize,
    pub degree: usize,
}

impl DumpHeader {
    fn for_grid(g: &StripGrid, nodes: usize, degree: usize) -> Self {
        DumpHeader {
            dim: g.dim,
            period: g.period,
            points: g.points,
            depth: g.depth,
            nodes,
            degree,
        }
    }
}

fn write_values<W: Write>(w: &mut W, values: &[C64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn write_header<W: Write>(w: &mut W, h: &DumpHeader) -> Result<()> {
    let line = serde_json::to_string(h).map_err(|e| Error::Dump(e.to_string()))?;
    writeln!(w, "{line}")?;
    Ok(())
}

pub fn write_form<W: Write>(w: &mut W, form: &FormField) -> Result<()> {
    write_header(w, &DumpHeader::for_grid(form.grid(), form.grid().nodes, form.degree()))?;
    for c in form.components() {
        write_values(w, c.values())?;
    }
    Ok(())
}

pub fn write_scalar<W: Write>(w: &mut W, f: &ScalarField) -> Result<()> {
    write_header(w, &DumpHeader::for_grid(f.grid(), f.grid().nodes, 0))?;
    write_values(w, f.values())
}

pub fn write_boundary<W: Write>(w: &mut W, v: &BoundaryField) -> Result<()> {
    write_header(w, &DumpHeader::for_grid(v.grid(), 1, 0))?;
    write_values(w, v.values())
}

fn read_header<R: BufRead>(r: &mut R) -> Result<DumpHeader> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    serde_json::from_str(line.trim_end()).map_err(|e| Error::Dump(format!("header: {e}")))
}

fn read_values<R: Read>(r: &mut R, count: usize) -> Result<Vec<C64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf).map_err(|e| Error::Dump(format!("payload: {e}")))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Dump(format!("{} trailing bytes", rest.len())));
    }
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect())
}

pub fn read_form<R: BufRead>(r: &mut R) -> Result<FormField> {
    let h = read_header(r)?;
    let grid = StripGrid::new(h.dim, h.period, h.points, h.depth, h.nodes)?;
    if h.degree > h.dim + 1 {
        return Err(Error::Dump(format!("degree {} exceeds N + 1", h.degree)));
    }
    let count = MultiIndex::count(h.dim, h.degree);
    let values = read_values(r, count * grid.len())?;
    let comps = values
        .chunks(grid.len())
        .map(|c| ScalarField::new(grid.clone(), c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    FormField::new(h.degree, &grid, comps)
}

/// Reads a boundary dump; the grid's normal parameters come from `grid`.
pub fn read_boundary<R: BufRead>(r: &mut R, grid: &Arc<StripGrid>) -> Result<BoundaryField> {
    let h = read_header(r)?;
    if h.dim != grid.dim || h.points != grid.points || h.period != grid.period || h.nodes != 1 {
        return Err(Error::Dump("boundary dump does not match the grid".into()));
    }
    let values = read_values(r, grid.layer_len())?;
    BoundaryField::new(grid.clone(), values)
}

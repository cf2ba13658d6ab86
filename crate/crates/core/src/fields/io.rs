//! Snapshot dumps.
//!
//! CSV layout (RFC-4180, numbers only):
//!
//! ```text
//! # bvlaw-field v1
//! # time=0.5
//! # dimension=2
//! # spacing=0.015625
//! # origin=-1,-1
//! # cells=128,128
//! x0,x1,value
//! -0.9921875,-0.9921875,0
//! ...
//! ```
//!
//! Rows are cell centers in row-major order. `time` is optional.
//!
//! Binary layout (little endian): magic `BVFD`, `u32` version (1), `u32`
//! dimension N, `f64` time, `f64` spacing, N × `f64` origin, N × `u64` cells,
//! then one `f64` per cell in row-major order.

use std::io::{BufRead, Read, Write};

use super::{Grid, ScalarField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"BVFD";
const VERSION: u32 = 1;

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_csv<W: Write>(field: &ScalarField, time: Option<f64>, mut out: W) -> Result<()> {
    let grid = field.grid();
    writeln!(out, "# bvlaw-field v1")?;
    if let Some(t) = time {
        writeln!(out, "# time={t}")?;
    }
    writeln!(out, "# dimension={}", grid.dimension())?;
    writeln!(out, "# spacing={}", grid.spacing())?;
    writeln!(out, "# origin={}", join(grid.origin()))?;
    writeln!(out, "# cells={}", join(grid.cells()))?;
    let header: Vec<String> = (0..grid.dimension()).map(|d| format!("x{d}")).collect();
    writeln!(out, "{},value", header.join(","))?;
    let mut x = vec![0.0; grid.dimension()];
    for (k, v) in field.values().iter().enumerate() {
        grid.center_of(k, &mut x);
        writeln!(out, "{},{}", join(&x), v)?;
    }
    out.flush()?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad `{key}` entry `{p}`")))
        })
        .collect()
}

/// Reads a CSV dump; returns the field and the optional snapshot time.
pub fn read_csv<R: BufRead>(input: R) -> Result<(ScalarField, Option<f64>)> {
    let mut time = None;
    let mut dimension = None;
    let mut spacing = None;
    let mut origin: Option<Vec<f64>> = None;
    let mut cells: Option<Vec<usize>> = None;
    let mut values = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some((key, value)) = meta.split_once('=') {
                match key.trim() {
                    "time" => time = Some(parse_list::<f64>(value, key)?[0]),
                    "dimension" => dimension = Some(parse_list::<usize>(value, key)?[0]),
                    "spacing" => spacing = Some(parse_list::<f64>(value, key)?[0]),
                    "origin" => origin = Some(parse_list(value, key)?),
                    "cells" => cells = Some(parse_list(value, key)?),
                    _ => {}
                }
            }
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let last = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::Format(format!("line {}: empty row", lineno + 1)))?;
        values.push(
            last.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("line {}: bad value `{last}`", lineno + 1)))?,
        );
    }
    let missing = |k: &str| Error::Format(format!("missing `{k}` header"));
    let origin = origin.ok_or_else(|| missing("origin"))?;
    let cells = cells.ok_or_else(|| missing("cells"))?;
    let spacing = spacing.ok_or_else(|| missing("spacing"))?;
    if dimension.is_some_and(|d| d != cells.len()) {
        return Err(Error::Format("dimension header disagrees with cells".into()));
    }
    let grid = Grid::new(origin, spacing, cells)?;
    Ok((ScalarField::from_values(grid, values)?, time))
}

pub fn write_binary<W: Write>(field: &ScalarField, time: f64, mut out: W) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dimension() as u32).to_le_bytes())?;
    out.write_all(&time.to_le_bytes())?;
    out.write_all(&grid.spacing().to_le_bytes())?;
    for o in grid.origin() {
        out.write_all(&o.to_le_bytes())?;
    }
    for &n in grid.cells() {
        out.write_all(&(n as u64).to_le_bytes())?;
    }
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_array<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<(ScalarField, f64)> {
    if &read_array::<4, _>(&mut input)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dimension = u32::from_le_bytes(read_array(&mut input)?) as usize;
    if dimension == 0 || dimension > 16 {
        return Err(Error::Format(format!("implausible dimension {dimension}")));
    }
    let time = f64::from_le_bytes(read_array(&mut input)?);
    let spacing = f64::from_le_bytes(read_array(&mut input)?);
    let origin = (0..dimension)
        .map(|_| Ok(f64::from_le_bytes(read_array(&mut input)?)))
        .collect::<Result<Vec<_>>>()?;
    let cells = (0..dimension)
        .map(|_| Ok(u64::from_le_bytes(read_array(&mut input)?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(origin, spacing, cells)?;
    let values = (0..grid.len())
        .map(|_| Ok(f64::from_le_bytes(read_array(&mut input)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((ScalarField::from_values(grid, values)?, time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field_strategy() -> impl Strategy<Value = ScalarField> {
        (1usize..=2, 1usize..6, -3.0f64..3.0, 0.01f64..2.0).prop_flat_map(|(dim, n, o, h)| {
            let len = n.pow(dim as u32);
            proptest::collection::vec(-1e6f64..1e6, len).prop_map(move |vals| {
                let grid = Grid::new(vec![o; dim], h, vec![n; dim]).unwrap();
                ScalarField::from_values(grid, vals).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn csv_and_binary_round_trip(field in field_strategy(), t in 0.0f64..10.0) {
            let mut buf = Vec::new();
            write_csv(&field, Some(t), &mut buf).unwrap();
            let (back, time) = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &field);
            prop_assert_eq!(time, Some(t));

            let mut bin = Vec::new();
            write_binary(&field, t, &mut bin).unwrap();
            let (back, time) = read_binary(bin.as_slice()).unwrap();
            prop_assert_eq!(&back, &field);
            prop_assert_eq!(time, t);
        }
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let grid = Grid::new(vec![0.0], 1.0, vec![4]).unwrap();
        let field = ScalarField::zeros(grid);
        let mut bin = Vec::new();
        write_binary(&field, 0.0, &mut bin).unwrap();
        bin.truncate(bin.len() - 3);
        assert!(read_binary(bin.as_slice()).is_err());
    }
}

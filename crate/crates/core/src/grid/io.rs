//! Plain-text dump of a velocity field and pressure.
//!
//! Values use Rust's shortest round-trip float formatting, so reading a dump
//! back reproduces the interior values bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Array2, GridSpec, StaggeredField};
use crate::error::{Error, Result};

pub fn write_fields<W: Write>(mut w: W, spec: &GridSpec, vel: &StaggeredField, p: &Array2) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "ifed-field 1").unwrap();
    writeln!(s, "cells {} {}", spec.nx(), spec.ny()).unwrap();
    writeln!(s, "h {}", spec.h).unwrap();
    writeln!(s, "origin {} {}", spec.origin[0], spec.origin[1]).unwrap();
    writeln!(s, "ghost {}", spec.ghost).unwrap();
    writeln!(s, "layout row-major j-outer").unwrap();
    for (name, a) in [("u", &vel.u), ("v", &vel.v), ("p", p)] {
        writeln!(s, "array {name} {} {}", a.nx(), a.ny()).unwrap();
        for j in 0..a.ny() as isize {
            let row: Vec<String> = (0..a.nx() as isize).map(|i| a[(i, j)].to_string()).collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Header information recovered from a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHeader {
    pub cells: [usize; 2],
    pub h: f64,
    pub origin: [f64; 2],
    pub ghost: usize,
}

/// Read a dump written by [`write_fields`]. Ghost layers come back zeroed.
pub fn read_fields<R: BufRead>(r: R) -> Result<(FieldHeader, StaggeredField, Array2)> {
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of field dump".into()))?
            .map_err(Error::from)
    };
    let bad = |m: &str| Error::Parse(m.to_string());
    let num = |t: Option<&str>| -> Result<f64> {
        t.ok_or_else(|| bad("missing number"))?
            .parse::<f64>()
            .map_err(|e| Error::Parse(e.to_string()))
    };
    let int = |t: Option<&str>| -> Result<usize> {
        t.ok_or_else(|| bad("missing integer"))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(e.to_string()))
    };

    if next()?.trim() != "ifed-field 1" {
        return Err(bad("not a field dump"));
    }
    let l = next()?;
    let mut t = l.split_whitespace();
    if t.next() != Some("cells") {
        return Err(bad("expected cells"));
    }
    let cells = [int(t.next())?, int(t.next())?];
    let l = next()?;
    let mut t = l.split_whitespace();
    if t.next() != Some("h") {
        return Err(bad("expected h"));
    }
    let h = num(t.next())?;
    let l = next()?;
    let mut t = l.split_whitespace();
    if t.next() != Some("origin") {
        return Err(bad("expected origin"));
    }
    let origin = [num(t.next())?, num(t.next())?];
    let l = next()?;
    let mut t = l.split_whitespace();
    if t.next() != Some("ghost") {
        return Err(bad("expected ghost"));
    }
    let ghost = int(t.next())?;
    next()?; // layout line

    let mut arrays = Vec::new();
    for expect in ["u", "v", "p"] {
        let l = next()?;
        let mut t = l.split_whitespace();
        if t.next() != Some("array") || t.next() != Some(expect) {
            return Err(Error::Parse(format!("expected array {expect}")));
        }
        let (nx, ny) = (int(t.next())?, int(t.next())?);
        let mut a = Array2::new(nx, ny, ghost);
        for j in 0..ny as isize {
            let l = next()?;
            let vals: Vec<&str> = l.split_whitespace().collect();
            if vals.len() != nx {
                return Err(Error::Parse(format!("row {j} of {expect} has {} values", vals.len())));
            }
            for (i, v) in vals.into_iter().enumerate() {
                a[(i as isize, j)] = num(Some(v))?;
            }
        }
        arrays.push(a);
    }
    let p = arrays.pop().unwrap();
    let v = arrays.pop().unwrap();
    let u = arrays.pop().unwrap();
    if u.nx() != cells[0] + 1 || u.ny() != cells[1] || v.nx() != cells[0] || v.ny() != cells[1] + 1 {
        return Err(bad("array extents do not match cells"));
    }
    Ok((
        FieldHeader {
            cells,
            h,
            origin,
            ghost,
        },
        StaggeredField { u, v },
        p,
    ))
}

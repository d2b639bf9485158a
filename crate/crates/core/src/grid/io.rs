//! CSV and binary serialization of grid data.
//!
//! Binary layout: a 32-byte header followed by little-endian `f64` values,
//! one block of `N^d` values per stored slice, row-major (axis 0 slowest).
//!
//! ```text
//! 0..6   magic "TCMFG1"
//! 6      d (u8)
//! 7      reserved, 0
//! 8..12  N (u32)
//! 12..20 R (f64)
//! 20..28 T (f64)
//! 28..32 M (u32)
//! ```

use std::io::{BufRead, Read, Write};

use super::{GridFunction, GridSpec};
use crate::{Error, Result};

const MAGIC: &[u8; 6] = b"TCMFG1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryHeader {
    pub grid: GridSpec,
}

impl BinaryHeader {
    fn to_bytes(self) -> [u8; 32] {
        let g = self.grid;
        let mut b = [0u8; 32];
        b[..6].copy_from_slice(MAGIC);
        b[6] = g.dim as u8;
        b[8..12].copy_from_slice(&(g.points as u32).to_le_bytes());
        b[12..20].copy_from_slice(&g.half_width.to_le_bytes());
        b[20..28].copy_from_slice(&g.horizon.to_le_bytes());
        b[28..32].copy_from_slice(&(g.steps as u32).to_le_bytes());
        b
    }

    fn from_bytes(b: &[u8; 32]) -> Result<Self> {
        if &b[..6] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let points = u32::from_le_bytes(b[8..12].try_into().unwrap()) as usize;
        let half_width = f64::from_le_bytes(b[12..20].try_into().unwrap());
        let horizon = f64::from_le_bytes(b[20..28].try_into().unwrap());
        let steps = u32::from_le_bytes(b[28..32].try_into().unwrap()) as usize;
        let grid = GridSpec::new(b[6] as usize, half_width, points, horizon, steps)?;
        Ok(BinaryHeader { grid })
    }
}

/// Writes the header and the given slices (each of length `N^d`).
pub fn write_binary<W: Write>(w: &mut W, grid: &GridSpec, slices: &[&[f64]]) -> Result<()> {
    w.write_all(&BinaryHeader { grid: *grid }.to_bytes())?;
    let mut buf = Vec::with_capacity(grid.len() * 8);
    for s in slices {
        if s.len() != grid.len() {
            return Err(Error::GridMismatch(format!("slice of length {} for grid of {}", s.len(), grid.len())));
        }
        buf.clear();
        for v in s.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a binary block; returns the grid and the stored slices.
pub fn read_binary<R: Read>(r: &mut R) -> Result<(GridSpec, Vec<Vec<f64>>)> {
    let mut head = [0u8; 32];
    r.read_exact(&mut head)?;
    let header = BinaryHeader::from_bytes(&head)?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    let block = header.grid.len() * 8;
    if rest.len() % block != 0 {
        return Err(Error::Format(format!("payload of {} bytes is not a multiple of {block}", rest.len())));
    }
    let slices = rest
        .chunks_exact(block)
        .map(|c| c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
        .collect();
    Ok((header.grid, slices))
}

/// CSV rows `index,x[,y],value`.
pub fn write_csv<W: Write>(w: &mut W, f: &GridFunction) -> Result<()> {
    let g = f.grid;
    if g.dim == 1 {
        writeln!(w, "index,x,value")?;
    } else {
        writeln!(w, "index,x,y,value")?;
    }
    for (i, v) in f.values.iter().enumerate() {
        let c = g.coord(i);
        if g.dim == 1 {
            writeln!(w, "{i},{},{v}", c[0])?;
        } else {
            writeln!(w, "{i},{},{},{v}", c[0], c[1])?;
        }
    }
    Ok(())
}

/// Reads values written by [`write_csv`] onto `grid`.
pub fn read_csv<R: BufRead>(r: R, grid: GridSpec) -> Result<GridFunction> {
    let mut values = vec![f64::NAN; grid.len()];
    for (ln, line) in r.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != grid.dim + 2 {
            return Err(Error::Format(format!("line {}: expected {} columns", ln + 1, grid.dim + 2)));
        }
        let idx: usize = cols[0]
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad index", ln + 1)))?;
        let v: f64 = cols[grid.dim + 1]
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad value", ln + 1)))?;
        if idx >= grid.len() {
            return Err(Error::Format(format!("line {}: index out of range", ln + 1)));
        }
        values[idx] = v;
    }
    GridFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = GridSpec::new(2, 3.0, 8, 0.5, 7).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0] * 1.5 - x[1].sin());
        let z = GridFunction::zeros(g);
        let mut buf = Vec::new();
        write_binary(&mut buf, &g, &[&f.values, &z.values]).unwrap();
        assert_eq!(buf.len(), 32 + 2 * 64 * 8);
        assert_eq!(&buf[..6], b"TCMFG1");
        let (g2, s) = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(g2, g);
        assert_eq!(s[0], f.values);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let g = GridSpec::new(1, 2.0, 16, 1.0, 1).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0].exp() / 3.0);
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let back = read_csv(buf.as_slice(), g).unwrap();
        assert_eq!(back, f);
    }
}

//! Little-endian binary dump of a [`SpacetimeField`].
//!
//! Layout: `b"SXD1"`, `N: u32`, `L: f64`, `M: u32`, `T: f64`, then
//! `(M+1) * N` pairs `(re: f64, im: f64)` in spectral FFT ordering, frame by
//! frame. Frames are assumed to start at `t = 0`.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Representation, SpacetimeField};
use crate::grid::make_grid;

pub const MAGIC: &[u8; 4] = b"SXD1";

pub fn write_dump<W: Write>(out: &mut W, u: &SpacetimeField) -> Result<()> {
    let grid = u.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(grid.len() as u32).to_le_bytes())?;
    out.write_all(&grid.half_length().to_le_bytes())?;
    out.write_all(&(u.intervals() as u32).to_le_bytes())?;
    out.write_all(&u.duration().to_le_bytes())?;
    for frame in u.frames() {
        for v in frame.values() {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_dump<R: Read>(input: &mut R) -> Result<SpacetimeField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let n = read_u32(input)? as usize;
    let half_length = read_f64(input)?;
    let m = read_u32(input)? as usize;
    let duration = read_f64(input)?;
    if m == 0 {
        return Err(Error::Format("zero time intervals".into()));
    }
    let grid = make_grid(half_length, n)?;
    let mut frames = Vec::with_capacity(m + 1);
    for _ in 0..=m {
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let re = read_f64(input)?;
            let im = read_f64(input)?;
            values.push(Complex64::new(re, im));
        }
        frames.push(Field::new(grid.clone(), values, Representation::Spectral)?);
    }
    let times = SpacetimeField::uniform_times(0.0, duration, m);
    SpacetimeField::new(grid, times, frames)
}

//! Snapshot formats.
//!
//! `WPS1` dump, little-endian: the 4 magic bytes `WPS1`, `n_x: u64`,
//! `n_y: u64`, then `n_x * n_y` coefficients as interleaved `re, im` f64
//! pairs with the x mode index fastest.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{BipartiteState, BoxBasis};
use crate::qcore::{fmt_num, Grid1D};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"WPS1";

pub fn write_wps1<W: Write>(state: &BipartiteState, out: &mut W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(state.basis.n_x() as u64).to_le_bytes())?;
    out.write_all(&(state.basis.n_y() as u64).to_le_bytes())?;
    for c in &state.coeffs {
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a dump back; the box geometry is not stored, so the caller supplies
/// the basis and time, and the dimensions must match.
pub fn read_wps1<R: Read>(input: &mut R, basis: BoxBasis, t: f64) -> Result<BipartiteState> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let nx = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let ny = u64::from_le_bytes(word) as usize;
    if nx != basis.n_x() || ny != basis.n_y() {
        return Err(Error::Format(format!(
            "dump is {nx}x{ny}, basis is {}x{}",
            basis.n_x(),
            basis.n_y()
        )));
    }
    let mut coeffs = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        coeffs.push(Complex64::new(re, f64::from_le_bytes(word)));
    }
    if input.read(&mut word)? != 0 {
        return Err(Error::Format("trailing bytes after coefficients".into()));
    }
    BipartiteState::new(basis, coeffs, t)
}

/// `<axis>,density` rows, preceded by `#` comments.
pub fn write_marginal_csv<W: Write>(
    axis: &str,
    grid: &Grid1D,
    density: &[f64],
    comments: &[String],
    out: &mut W,
) -> Result<()> {
    if density.len() != grid.n_points {
        return Err(Error::Mismatch("density length differs from grid".into()));
    }
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{axis},density")?;
    for (x, d) in grid.points().zip(density) {
        writeln!(out, "{},{}", fmt_num(x), fmt_num(*d))?;
    }
    Ok(())
}

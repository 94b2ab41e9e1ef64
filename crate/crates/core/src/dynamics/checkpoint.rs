//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    5 bytes  "DBHM1" (u and B) or "DBHMB" (B only)
//! n        u32
//! t, nu, eta, hall   f64 each
//! arrays   u_x, u_y, u_z, B_x, B_y, B_z  (B-only files omit u)
//! ```
//!
//! Each array holds `n^3` complex coefficients as interleaved `(re, im)`
//! pairs in storage order: row-major over the axis indices `(i1, i2, i3)`,
//! `i3` fastest, where index `i` carries wavenumber `i` for `i < n/2` and
//! `i - n` otherwise.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::rhs::{PhysicalParams, SimState};
use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralVectorField};

pub const MAGIC_FULL: &[u8; 5] = b"DBHM1";
pub const MAGIC_B_ONLY: &[u8; 5] = b"DBHMB";

/// Contents of a checkpoint file; `u` is absent for B-only files.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub params: PhysicalParams,
    pub u: Option<SpectralVectorField>,
    pub b: SpectralVectorField,
}

impl Checkpoint {
    pub fn grid(&self) -> GridSpec {
        self.b.grid()
    }

    /// Full state; a B-only file gets `u = 0`.
    pub fn into_state(self) -> Result<SimState> {
        let u = self
            .u
            .unwrap_or_else(|| SpectralVectorField::zeros(self.b.grid()));
        SimState::new(self.t, u, self.b, self.params)
    }
}

fn write_header<W: Write>(
    w: &mut W,
    magic: &[u8; 5],
    grid: GridSpec,
    t: f64,
    p: PhysicalParams,
) -> Result<()> {
    w.write_all(magic)?;
    let n = u32::try_from(grid.n()).map_err(|_| Error::Checkpoint("grid too large".into()))?;
    w.write_all(&n.to_le_bytes())?;
    for v in [t, p.nu, p.eta, p.hall] {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn write_field<W: Write>(w: &mut W, f: &SpectralVectorField) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * f.grid().len());
    for c in f.components() {
        buf.clear();
        for z in c {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn write_checkpoint<W: Write>(mut w: W, state: &SimState) -> Result<()> {
    write_header(&mut w, MAGIC_FULL, state.grid(), state.t, state.params)?;
    write_field(&mut w, &state.u)?;
    write_field(&mut w, &state.b)?;
    w.flush()?;
    Ok(())
}

pub fn write_b_only<W: Write>(
    mut w: W,
    b: &SpectralVectorField,
    t: f64,
    params: PhysicalParams,
) -> Result<()> {
    write_header(&mut w, MAGIC_B_ONLY, b.grid(), t, params)?;
    write_field(&mut w, b)?;
    w.flush()?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated while reading {what}: {e}")))?;
    Ok(b)
}

fn read_field<R: Read>(r: &mut R, grid: GridSpec) -> Result<SpectralVectorField> {
    let len = grid.len();
    let mut raw = vec![0u8; 16 * len];
    let mut comps: [Vec<Complex64>; 3] = Default::default();
    for c in comps.iter_mut() {
        r.read_exact(&mut raw)
            .map_err(|e| Error::Checkpoint(format!("truncated coefficient array: {e}")))?;
        *c = raw
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
    }
    SpectralVectorField::from_components(grid, comps)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let magic: [u8; 5] = read_exact(&mut r, "magic")?;
    let full = match &magic {
        m if m == MAGIC_FULL => true,
        m if m == MAGIC_B_ONLY => false,
        m => return Err(Error::Checkpoint(format!("bad magic {m:?}"))),
    };
    let n = u32::from_le_bytes(read_exact(&mut r, "n")?) as usize;
    let grid = GridSpec::new(n).map_err(|_| Error::Checkpoint(format!("invalid grid size {n}")))?;
    let mut vals = [0.0; 4];
    for v in vals.iter_mut() {
        *v = f64::from_le_bytes(read_exact(&mut r, "header")?);
    }
    let params = PhysicalParams::new(vals[1], vals[2], vals[3])
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    let u = if full {
        Some(read_field(&mut r, grid)?)
    } else {
        None
    };
    let b = read_field(&mut r, grid)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Checkpoint(
            "trailing bytes after coefficient arrays".into(),
        ));
    }
    Ok(Checkpoint {
        t: vals[0],
        params,
        u,
        b,
    })
}

pub fn save_checkpoint(path: &Path, state: &SimState) -> Result<()> {
    write_checkpoint(BufWriter::new(File::create(path)?), state)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::random_solenoidal;

    fn state() -> SimState {
        let g = GridSpec::new(8).unwrap();
        let u = random_solenoidal(g, 4, 1).unwrap().scale(1.0 / 3.0);
        let b = random_solenoidal(g, 4, 2).unwrap();
        SimState::new(0.125, u, b, PhysicalParams::new(0.05, 0.04, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let s = state();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &s).unwrap();
        assert_eq!(buf.len(), 5 + 4 + 32 + 6 * 16 * 512);
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back.clone().into_state().unwrap(), s);
        let mut again = Vec::new();
        write_checkpoint(&mut again, &back.into_state().unwrap()).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn header_layout() {
        let s = state();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &s).unwrap();
        assert_eq!(&buf[..5], b"DBHM1");
        assert_eq!(u32::from_le_bytes(buf[5..9].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[9..17].try_into().unwrap()), 0.125);
        assert_eq!(f64::from_le_bytes(buf[25..33].try_into().unwrap()), 0.04);
        // first coefficient is the mean of u_x
        let re = f64::from_le_bytes(buf[41..49].try_into().unwrap());
        assert_eq!(re, s.u.component(0)[0].re);
        // second stored mode is k = (0, 0, 1)
        let g = s.grid();
        assert_eq!(g.wavevector(1), [0, 0, 1]);
        let re1 = f64::from_le_bytes(buf[57..65].try_into().unwrap());
        assert_eq!(re1, s.u.at([0, 0, 1])[0].re);
    }

    #[test]
    fn b_only_variant() {
        let s = state();
        let mut buf = Vec::new();
        write_b_only(&mut buf, &s.b, s.t, s.params).unwrap();
        assert_eq!(&buf[..5], b"DBHMB");
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert!(back.u.is_none());
        assert_eq!(back.b, s.b);
        assert_eq!(back.into_state().unwrap().u.norm_l2(), 0.0);
    }

    #[test]
    fn corrupt_files_rejected() {
        let s = state();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &s).unwrap();
        assert!(matches!(
            read_checkpoint(&buf[..100]),
            Err(Error::Checkpoint(_))
        ));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_checkpoint(bad.as_slice()),
            Err(Error::Checkpoint(_))
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            read_checkpoint(long.as_slice()),
            Err(Error::Checkpoint(_))
        ));
        let mut odd = buf;
        odd[5..9].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            read_checkpoint(odd.as_slice()),
            Err(Error::Checkpoint(_))
        ));
    }
}

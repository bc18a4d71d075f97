//! Portable checkpoint format.
//!
//! ```text
//! "TERO"  u32 version  u32 n_e  u32 n_r  u32 n_τ  u32 k  u8 dual  u8 p
//! f32[n_e·k] entity re, f32[n_e·k] entity im,
//! f32[n_r·k] rel_b re,  f32[n_r·k] rel_b im,
//! f32[n_r·k] rel_e re,  f32[n_r·k] rel_e im   (dual only)
//! f32[n_τ·k] phases
//! u32 len, utf-8 bytes: path of the vocabulary / binning sidecar directory
//! ```
//!
//! All integers and floats are little-endian. Optimizer state is not stored.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use super::{ModelParams, Norm, Real, Shape};
use crate::error::{Result, TeroError};

const MAGIC: &[u8; 4] = b"TERO";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<F> {
    pub params: ModelParams<F>,
    /// Directory holding the vocabulary tables and binning manifest.
    pub sidecar: String,
}

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| TeroError::Checkpoint(format!("{v} exceeds u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_floats<W: Write, F: Real>(w: &mut W, values: impl Iterator<Item = F>) -> Result<()> {
    for v in values {
        let x = v.to_f32().unwrap_or(f32::NAN);
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_checkpoint<F: Real, W: Write>(
    params: &ModelParams<F>,
    sidecar: &str,
    w: &mut W,
) -> Result<()> {
    let sh = params.shape();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for v in [sh.n_entities, sh.n_relations, sh.n_steps, sh.dim] {
        put_u32(w, v)?;
    }
    w.write_all(&[u8::from(sh.dual), sh.norm.p()])?;
    let complex_table = |w: &mut W, t: &[Complex<F>]| -> Result<()> {
        put_floats(w, t.iter().map(|z| z.re))?;
        put_floats(w, t.iter().map(|z| z.im))
    };
    complex_table(w, &params.entity)?;
    complex_table(w, &params.relation_begin)?;
    if sh.dual {
        complex_table(w, &params.relation_end)?;
    }
    put_floats(w, params.phase.iter().copied())?;
    put_u32(w, sidecar.len())?;
    w.write_all(sidecar.as_bytes())?;
    Ok(())
}

fn take<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| TeroError::Checkpoint(format!("truncated file: {e}")))?;
    Ok(buf)
}

fn take_u32<R: Read>(r: &mut R) -> Result<usize> {
    Ok(u32::from_le_bytes(take::<R, 4>(r)?) as usize)
}

fn take_floats<R: Read, F: Real>(r: &mut R, n: usize) -> Result<Vec<F>> {
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes)
        .map_err(|e| TeroError::Checkpoint(format!("truncated tables: {e}")))?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| F::lit(f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))))
        .collect())
}

pub fn read_checkpoint<F: Real, R: Read>(r: &mut R) -> Result<Checkpoint<F>> {
    if &take::<R, 4>(r)? != MAGIC {
        return Err(TeroError::Checkpoint("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(take::<R, 4>(r)?);
    if version != FORMAT_VERSION {
        return Err(TeroError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let n_entities = take_u32(r)?;
    let n_relations = take_u32(r)?;
    let n_steps = take_u32(r)?;
    let dim = take_u32(r)?;
    let [dual, p] = take::<R, 2>(r)?;
    let dual = match dual {
        0 => false,
        1 => true,
        other => return Err(TeroError::Checkpoint(format!("bad dual flag {other}"))),
    };
    let shape = Shape {
        n_entities,
        n_relations,
        n_steps,
        dim,
        dual,
        norm: Norm::from_p(p).map_err(|e| TeroError::Checkpoint(e.to_string()))?,
    };
    let complex_table = |r: &mut R, rows: usize| -> Result<Vec<Complex<F>>> {
        let re = take_floats::<R, F>(r, rows * dim)?;
        let im = take_floats::<R, F>(r, rows * dim)?;
        Ok(re
            .into_iter()
            .zip(im)
            .map(|(a, b)| Complex::new(a, b))
            .collect())
    };
    let entity = complex_table(r, n_entities)?;
    let relation_begin = complex_table(r, n_relations)?;
    let relation_end = if dual {
        complex_table(r, n_relations)?
    } else {
        Vec::new()
    };
    let phase = take_floats(r, n_steps * dim)?;
    let len = take_u32(r)?;
    let mut path = vec![0u8; len];
    r.read_exact(&mut path)
        .map_err(|e| TeroError::Checkpoint(format!("truncated sidecar path: {e}")))?;
    let sidecar = String::from_utf8(path)
        .map_err(|_| TeroError::Checkpoint("sidecar path is not UTF-8".into()))?;
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(TeroError::Checkpoint("trailing bytes".into()));
    }
    let params = ModelParams::from_tables(shape, entity, relation_begin, relation_end, phase)?;
    Ok(Checkpoint { params, sidecar })
}

pub fn save_checkpoint<F: Real>(params: &ModelParams<F>, sidecar: &str, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(TeroError::file(path))?);
    write_checkpoint(params, sidecar, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint<F: Real>(path: &Path) -> Result<Checkpoint<F>> {
    read_checkpoint(&mut BufReader::new(
        fs::File::open(path).map_err(TeroError::file(path))?,
    ))
}

//! `DEGLI1` model container.
//!
//! All integers and reals are little-endian.
//!
//! ```text
//! magic        6 bytes  "DEGLI1"
//! layers       u32
//! per layer    u8 kind (0 = conv, 1 = conv + GLU), u32 in_channels,
//!              u32 out_channels (after the activation), u32 kernel_freq,
//!              u32 kernel_time
//! skips        u32
//! per skip     u32 from, u32 to
//! params       u64 count
//! values       count x f64, layer by layer: weight [conv_out][in][kf][kt],
//!              then the conv_out biases
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::model::{Activation, Architecture, DenoiserModel, LayerSpec, Skip};

pub const MAGIC: &[u8; 6] = b"DEGLI1";

fn bad(reason: impl Into<String>) -> Error {
    Error::Format { what: "DEGLI1 checkpoint", reason: reason.into() }
}

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| bad(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => bad("truncated"),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize> {
    Ok(u32::from_le_bytes(get(r)?) as usize)
}

pub fn write_checkpoint<T: Real, W: Write>(model: &DenoiserModel<T>, mut w: W) -> Result<()> {
    let arch = model.architecture();
    w.write_all(MAGIC)?;
    put_u32(&mut w, arch.layers.len())?;
    for l in &arch.layers {
        let kind: u8 = match l.activation {
            Activation::Linear => 0,
            Activation::Glu => 1,
        };
        w.write_all(&[kind])?;
        for v in [l.in_channels, l.out_channels, l.kernel_freq, l.kernel_time] {
            put_u32(&mut w, v)?;
        }
    }
    put_u32(&mut w, arch.skips.len())?;
    for s in &arch.skips {
        put_u32(&mut w, s.from)?;
        put_u32(&mut w, s.to)?;
    }
    w.write_all(&(model.param_count() as u64).to_le_bytes())?;
    for p in model.params() {
        w.write_all(&p.to_f64_lossy().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<T: Real, R: Read>(mut r: R) -> Result<DenoiserModel<T>> {
    if &get::<6, _>(&mut r)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let n_layers = get_u32(&mut r)?;
    if n_layers > 4096 {
        return Err(bad(format!("implausible layer count {n_layers}")));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for i in 0..n_layers {
        let activation = match get::<1, _>(&mut r)?[0] {
            0 => Activation::Linear,
            1 => Activation::Glu,
            k => return Err(bad(format!("layer {i}: unknown kind {k}"))),
        };
        layers.push(LayerSpec {
            activation,
            in_channels: get_u32(&mut r)?,
            out_channels: get_u32(&mut r)?,
            kernel_freq: get_u32(&mut r)?,
            kernel_time: get_u32(&mut r)?,
        });
    }
    let n_skips = get_u32(&mut r)?;
    if n_skips > 4096 {
        return Err(bad(format!("implausible skip count {n_skips}")));
    }
    let mut skips = Vec::with_capacity(n_skips);
    for _ in 0..n_skips {
        skips.push(Skip { from: get_u32(&mut r)?, to: get_u32(&mut r)? });
    }
    let arch = Architecture { layers, skips };
    arch.validate().map_err(|e| bad(e.to_string()))?;
    let count = u64::from_le_bytes(get(&mut r)?);
    if count != arch.param_count() as u64 {
        return Err(bad(format!(
            "architecture needs {} parameters, file declares {count}",
            arch.param_count()
        )));
    }
    let mut params = Vec::with_capacity(arch.param_count());
    for _ in 0..count {
        let v = f64::from_le_bytes(get(&mut r)?);
        if !v.is_finite() {
            return Err(bad("non-finite weight"));
        }
        params.push(T::from_f64_lossy(v));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    DenoiserModel::from_params(arch, params)
}

//! `AMPL1` amplitude-spectrogram container.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic          5 bytes "AMPL1"
//! bins           u32
//! frames         u32
//! signal_length  u64   samples of the signal the spectrogram describes
//! sample_rate    u32
//! window_length  u32   periodic Hann window, in samples
//! hop_length     u32
//! values         bins * frames x f64, frame after frame
//! ```
//!
//! The FFT size is `2 * (bins - 1)`.

use std::io::{Read, Write};

use degli_core::{make_hann, Amplitude, Error, Params, Result};

pub const MAGIC: &[u8; 5] = b"AMPL1";

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeFile {
    pub amplitude: Amplitude,
    pub signal_length: usize,
    pub params: Params,
}

fn bad(reason: impl Into<String>) -> Error {
    Error::Format { what: "AMPL1 container", reason: reason.into() }
}

fn u32_of(v: usize) -> Result<[u8; 4]> {
    u32::try_from(v).map(u32::to_le_bytes).map_err(|_| bad(format!("{v} does not fit in u32")))
}

pub fn write_amplitude<W: Write>(file: &AmplitudeFile, mut w: W) -> Result<()> {
    let a = &file.amplitude;
    if a.bins() != file.params.bins() {
        return Err(bad("amplitude bins do not match the framing"));
    }
    w.write_all(MAGIC)?;
    w.write_all(&u32_of(a.bins())?)?;
    w.write_all(&u32_of(a.frames())?)?;
    w.write_all(&(file.signal_length as u64).to_le_bytes())?;
    w.write_all(&file.params.sample_rate().to_le_bytes())?;
    w.write_all(&u32_of(file.params.window_length())?)?;
    w.write_all(&u32_of(file.params.hop_length())?)?;
    for v in a.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => bad("truncated"),
        _ => Error::Io(e),
    })?;
    Ok(b)
}

pub fn read_amplitude<R: Read>(mut r: R) -> Result<AmplitudeFile> {
    if &get::<5, _>(&mut r)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let bins = u32::from_le_bytes(get(&mut r)?) as usize;
    let frames = u32::from_le_bytes(get(&mut r)?) as usize;
    let signal_length = u64::from_le_bytes(get(&mut r)?) as usize;
    let sample_rate = u32::from_le_bytes(get(&mut r)?);
    let window_length = u32::from_le_bytes(get(&mut r)?) as usize;
    let hop_length = u32::from_le_bytes(get(&mut r)?) as usize;
    if bins < 2 {
        return Err(bad(format!("{bins} bins")));
    }
    let params = Params::new(make_hann(window_length)?, hop_length, 2 * (bins - 1), sample_rate)
        .map_err(|e| bad(e.to_string()))?;
    if signal_length == 0 || params.frames_for(signal_length) != frames {
        return Err(bad(format!("{frames} frames do not describe {signal_length} samples")));
    }
    let n = bins.checked_mul(frames).ok_or_else(|| bad("dimensions overflow"))?;
    let mut data = Vec::with_capacity(n.min(1 << 26));
    for _ in 0..n {
        data.push(f64::from_le_bytes(get(&mut r)?));
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(bad("trailing bytes"));
    }
    let amplitude = Amplitude::from_vec(bins, frames, data).map_err(|e| bad(e.to_string()))?;
    Ok(AmplitudeFile { amplitude, signal_length, params })
}

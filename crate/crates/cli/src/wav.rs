//! Mono 16 kHz WAV input and float32 output.

use std::path::Path;

use degli_core::{Error, Result, Signal};
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

/// The only sample rate accepted on input.
pub const SAMPLE_RATE: u32 = 16_000;

fn wav_err(path: &Path, reason: impl std::fmt::Display) -> Error {
    Error::Format { what: "WAV", reason: format!("{}: {reason}", path.display()) }
}

/// Reads a mono 16 kHz file stored as 16-bit PCM (scaled by 1/32768) or
/// 32-bit float.
pub fn load_wav(path: &Path) -> Result<Signal> {
    let mut reader = WavReader::open(path).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(wav_err(path, format!("expected 1 channel, found {}", spec.channels)));
    }
    if spec.sample_rate != SAMPLE_RATE {
        return Err(wav_err(
            path,
            format!("sample rate {} Hz is not supported (expected {SAMPLE_RATE} Hz, no resampling)", spec.sample_rate),
        ));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (fmt, bits) => {
            return Err(wav_err(path, format!("unsupported encoding {fmt:?} {bits}-bit (need PCM16 or float32)")))
        }
    };
    Signal::new(samples, spec.sample_rate).map_err(|e| wav_err(path, e))
}

/// Writes a mono float32 file, clipping to `[-1, 1]`. Returns how many
/// samples were clipped.
pub fn save_wav(signal: &Signal, path: &Path) -> Result<usize> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_err(path, e))?;
    let mut clipped = 0;
    for &v in signal.samples() {
        let c = v.clamp(-1.0, 1.0);
        if c != v {
            clipped += 1;
        }
        writer.write_sample(c as f32).map_err(|e| wav_err(path, e))?;
    }
    writer.finalize().map_err(|e| wav_err(path, e))?;
    if clipped > 0 {
        log::warn!("{}: clipped {clipped} samples to [-1, 1]", path.display());
    }
    Ok(clipped)
}

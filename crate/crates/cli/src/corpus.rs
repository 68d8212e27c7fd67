//! Corpus listing, file-level train/validation split and fixed-length
//! segmentation.

use std::path::{Path, PathBuf};

use degli_core::{Error, Result, Segment, Signal};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::wav::load_wav;

/// `*.wav` files directly inside `dir`, in lexicographic order.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_wav = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if is_wav && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!("no WAV files in {}", dir.display())));
    }
    Ok(files)
}

/// Scales to unit RMS; silent signals are returned unchanged with scale 1.
pub fn normalize_rms(signal: &Signal) -> (Signal, f64) {
    let n = signal.len().max(1) as f64;
    let rms = (signal.energy() / n).sqrt();
    if rms == 0.0 {
        return (signal.clone(), 1.0);
    }
    let scaled = signal.samples().iter().map(|v| v / rms).collect();
    (Signal::new(scaled, signal.sample_rate()).expect("finite after scaling"), rms)
}

/// Non-overlapping `segment_length` slices; the tail is zero-padded and
/// recorded through `valid_length`.
pub fn segment_signal(source: &str, signal: &Signal, segment_length: usize) -> Vec<Segment<f64>> {
    signal
        .samples()
        .chunks(segment_length)
        .enumerate()
        .map(|(i, chunk)| {
            let mut samples = chunk.to_vec();
            samples.resize(segment_length, 0.0);
            Segment {
                signal: Signal::new(samples, signal.sample_rate()).expect("finite input"),
                valid_length: chunk.len(),
                source: format!("{source}#{i}"),
            }
        })
        .collect()
}

/// Loads, unit-RMS normalizes and segments `files` in the given order.
pub fn segment_files(files: &[PathBuf], segment_length: usize) -> Result<Vec<Segment<f64>>> {
    let mut out = Vec::new();
    for f in files {
        let (sig, _) = normalize_rms(&load_wav(f)?);
        out.extend(segment_signal(&f.display().to_string(), &sig, segment_length));
    }
    Ok(out)
}

/// Every segment of every WAV in `dir`, files in lexicographic order.
pub fn segment_corpus(dir: &Path, segment_length: usize) -> Result<Vec<Segment<f64>>> {
    segment_files(&list_wavs(dir)?, segment_length)
}

/// Seeded shuffle of the files, then `round(fraction * n)` of them (at
/// least one when `n >= 2`) go to validation. Both halves keep
/// lexicographic order.
pub fn split_files(files: &[PathBuf], validation_fraction: f64, seed: u64) -> (Vec<PathBuf>, Vec<PathBuf>) {
    let mut order: Vec<usize> = (0..files.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut n_val = (validation_fraction * files.len() as f64).round() as usize;
    if files.len() >= 2 {
        n_val = n_val.clamp(1, files.len() - 1);
    } else {
        n_val = 0;
    }
    let mut val: Vec<usize> = order[..n_val].to_vec();
    let mut train: Vec<usize> = order[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train.into_iter().map(|i| files[i].clone()).collect(), val.into_iter().map(|i| files[i].clone()).collect())
}

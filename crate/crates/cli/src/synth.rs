//! Synthetic speech-like utterances for desk-scale experiments.
//!
//! A source-filter model: a jittered glottal pulse train with spectral tilt
//! drives a cascade of four formant resonators that glide between vowel
//! targets, noise through a band resonator makes fricatives and stop
//! bursts, and words are separated by pauses over a faint noise floor.

use std::f64::consts::PI;
use std::path::Path;

use degli_core::{Result, Signal};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::wav::{save_wav, SAMPLE_RATE};

const FS: f64 = SAMPLE_RATE as f64;
/// Samples between control-parameter updates.
const CONTROL: usize = 32;

/// Formant targets (F1, F2, F3) of ten vowels for an adult male voice.
const VOWELS: [[f64; 3]; 10] = [
    [270.0, 2290.0, 3010.0],
    [390.0, 1990.0, 2550.0],
    [530.0, 1840.0, 2480.0],
    [660.0, 1720.0, 2410.0],
    [730.0, 1090.0, 2440.0],
    [570.0, 840.0, 2410.0],
    [440.0, 1020.0, 2240.0],
    [300.0, 870.0, 2240.0],
    [640.0, 1190.0, 2390.0],
    [490.0, 1350.0, 1690.0],
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthOptions {
    pub min_seconds: f64,
    pub max_seconds: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { min_seconds: 2.0, max_seconds: 4.0 }
    }
}

/// Second-order resonator with unit gain at DC.
#[derive(Clone, Copy, Default)]
struct Resonator {
    a: f64,
    b: f64,
    c: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn tune(&mut self, freq: f64, bw: f64) {
        let r = (-PI * bw / FS).exp();
        self.c = -r * r;
        self.b = 2.0 * r * (2.0 * PI * freq / FS).cos();
        self.a = 1.0 - self.b - self.c;
    }

    fn tick(&mut self, x: f64) -> f64 {
        let y = self.a * x + self.b * self.y1 + self.c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

#[derive(Clone, Copy, Debug)]
enum Unit {
    Vowel { formants: [f64; 3], amp: f64 },
    Fricative { center: f64, bw: f64, amp: f64, voiced: bool },
    Closure,
    Burst { center: f64, amp: f64 },
    Pause,
}

fn ms(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> usize {
    (rng.random_range(lo..hi) * FS / 1000.0) as usize
}

fn consonant(rng: &mut ChaCha8Rng, plan: &mut Vec<(Unit, usize)>) {
    if rng.random_bool(0.55) {
        let unit = Unit::Fricative {
            center: rng.random_range(2500.0..7000.0),
            bw: rng.random_range(800.0..3000.0),
            amp: rng.random_range(0.08..0.3),
            voiced: rng.random_bool(0.3),
        };
        plan.push((unit, ms(rng, 60.0, 180.0)));
    } else {
        plan.push((Unit::Closure, ms(rng, 30.0, 80.0)));
        let unit = Unit::Burst { center: rng.random_range(1200.0..5000.0), amp: rng.random_range(0.15..0.5) };
        plan.push((unit, ms(rng, 8.0, 25.0)));
    }
}

fn plan_units(rng: &mut ChaCha8Rng, total: usize, formant_scale: f64) -> Vec<(Unit, usize)> {
    let mut plan = vec![(Unit::Pause, ms(rng, 100.0, 250.0))];
    let mut used = plan[0].1;
    while used < total {
        for _ in 0..rng.random_range(1..=4) {
            if rng.random_bool(0.6) {
                consonant(rng, &mut plan);
            }
            let v = VOWELS[rng.random_range(0..VOWELS.len())];
            let formants = v.map(|f| f * formant_scale * rng.random_range(0.92..1.08));
            plan.push((Unit::Vowel { formants, amp: rng.random_range(0.6..1.0) }, ms(rng, 90.0, 280.0)));
            if rng.random_bool(0.3) {
                consonant(rng, &mut plan);
            }
        }
        plan.push((Unit::Pause, ms(rng, 80.0, 300.0)));
        used = plan.iter().map(|u| u.1).sum();
    }
    plan
}

/// One utterance, deterministic in `seed`, peak-normalized to 0.7.
pub fn synth_utterance(seed: u64, opts: &SynthOptions) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seconds = if opts.max_seconds > opts.min_seconds {
        rng.random_range(opts.min_seconds..opts.max_seconds)
    } else {
        opts.min_seconds
    };
    let total = (seconds * FS) as usize;
    let f0_base: f64 = rng.random_range(85.0..230.0);
    let formant_scale = 1.0 + ((f0_base - 100.0) / 600.0).max(0.0);
    let tilt = rng.random_range(0.9..0.97);
    let (vib_rate, vib_phase) = (rng.random_range(0.4..1.2), rng.random_range(0.0..2.0 * PI));
    let (drift_rate, drift_phase) = (rng.random_range(1.5..3.5), rng.random_range(0.0..2.0 * PI));
    let plan = plan_units(&mut rng, total, formant_scale);

    let mut formants = [500.0 * formant_scale, 1500.0 * formant_scale, 2500.0 * formant_scale, 3500.0];
    let bandwidths = [rng.random_range(60.0..90.0), rng.random_range(90.0..120.0), rng.random_range(120.0..175.0), 250.0];
    let mut cascade = [Resonator::default(); 4];
    let mut noise_filter = Resonator::default();
    let (mut noise_center, mut noise_bw) = (4000.0, 2000.0);
    let (mut voice_amp, mut noise_amp) = (0.0f64, 0.0f64);
    let (mut phase, mut tilt_state, mut prev_noise) = (0.0f64, 0.0f64, 0.0f64);

    let mut out = Vec::with_capacity(total + plan.iter().map(|u| u.1).sum::<usize>());
    for &(unit, len) in &plan {
        let (f_target, v_target, n_target, nc_target, nbw_target) = match unit {
            Unit::Vowel { formants: f, amp } => (Some(f), amp, 0.0, noise_center, noise_bw),
            Unit::Fricative { center, bw, amp, voiced } => {
                (None, if voiced { 0.25 } else { 0.0 }, amp, center, bw)
            }
            Unit::Closure | Unit::Pause => (None, 0.0, 0.0, noise_center, noise_bw),
            Unit::Burst { center, amp } => (None, 0.0, amp, center, 2500.0),
        };
        for n in 0..len {
            if n % CONTROL == 0 {
                // One-pole glides: ~25 ms for formants, ~8 ms for gains.
                let slow = 1.0 - (-(CONTROL as f64) / (0.025 * FS)).exp();
                let fast = 1.0 - (-(CONTROL as f64) / (0.008 * FS)).exp();
                if let Some(f) = f_target {
                    for (cur, &tgt) in formants.iter_mut().zip(&f) {
                        *cur += (tgt - *cur) * slow;
                    }
                }
                voice_amp += (v_target - voice_amp) * fast;
                noise_amp += (n_target - noise_amp) * fast;
                noise_center += (nc_target - noise_center) * fast;
                noise_bw += (nbw_target - noise_bw) * fast;
                for (r, (&f, &bw)) in cascade.iter_mut().zip(formants.iter().zip(&bandwidths)) {
                    r.tune(f.min(0.45 * FS), bw);
                }
                noise_filter.tune(noise_center.min(0.45 * FS), noise_bw);
            }
            let t = out.len() as f64 / FS;
            let f0 = f0_base
                * (1.0 - 0.15 * t / seconds.max(1.0))
                * (1.0 + 0.06 * (2.0 * PI * vib_rate * t + vib_phase).sin()
                    + 0.03 * (2.0 * PI * drift_rate * t + drift_phase).sin());
            let jitter: f64 = 1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal);
            phase += f0 * jitter / FS;
            let mut pulse = 0.0;
            if phase >= 1.0 {
                phase -= 1.0;
                pulse = 1.0 + 0.05 * rng.sample::<f64, _>(StandardNormal);
            }
            tilt_state = pulse + tilt * tilt_state;
            let white: f64 = rng.sample(StandardNormal);
            let breath = 0.02 * white;
            let mut voiced = (tilt_state - 1.0 / (1.0 - tilt) * f0 / FS) * voice_amp + breath * voice_amp;
            for r in &mut cascade {
                voiced = r.tick(voiced);
            }
            let hp = white - prev_noise;
            prev_noise = white;
            let fric = noise_filter.tick(hp) * noise_amp;
            let floor: f64 = 1e-4 * rng.sample::<f64, _>(StandardNormal);
            out.push(voiced + fric + floor);
        }
    }
    out.truncate(total.max(1));
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for v in &mut out {
            *v *= 0.7 / peak;
        }
    }
    Signal::new(out, SAMPLE_RATE).expect("synthesis produces finite samples")
}

/// Seed of utterance `index` in a corpus generated with `corpus_seed`.
pub fn utterance_seed(corpus_seed: u64, index: usize) -> u64 {
    corpus_seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

pub fn utterance_name(index: usize) -> String {
    format!("utt_{index:05}.wav")
}

/// Writes `count` utterances into `dir` as `utt_00000.wav`, ...; returns
/// the total number of samples.
pub fn write_corpus(dir: &Path, count: usize, corpus_seed: u64, opts: &SynthOptions) -> Result<usize> {
    std::fs::create_dir_all(dir)?;
    let mut total = 0;
    for i in 0..count {
        let sig = synth_utterance(utterance_seed(corpus_seed, i), opts);
        total += sig.len();
        save_wav(&sig, &dir.join(utterance_name(i)))?;
    }
    Ok(total)
}

//! Metric projections onto the consistent set `C` and the amplitude set `A`.

use num_complex::Complex;

use crate::error::{invalid_input, Result};
use crate::scalar::Real;
use crate::spectrogram::{AmplitudeSpectrogram, ComplexSpectrogram};
use crate::stft::Stft;

/// `P_C(X) = G G^+ X`: the closest spectrogram that is the STFT of a real
/// signal of `signal_length` samples.
pub fn project_consistent<T: Real>(
    x: &ComplexSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
) -> Result<ComplexSpectrogram<T>> {
    let signal = stft.inverse(x, signal_length)?;
    stft.forward(signal.samples())
}

/// `P_A(X) = A * X / |X|`, with entries where `|X| = 0` mapped to zero.
pub fn project_amplitude<T: Real>(
    x: &ComplexSpectrogram<T>,
    a: &AmplitudeSpectrogram<T>,
) -> Result<ComplexSpectrogram<T>> {
    if x.shape() != a.shape() {
        return Err(invalid_input(format!(
            "amplitude projection: spectrogram {:?} vs amplitude {:?}",
            x.shape(),
            a.shape()
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let data = x
        .data()
        .iter()
        .zip(a.data())
        .map(|(&c, &target)| {
            let mag = c.norm();
            if mag == T::zero() {
                zero
            } else {
                c.scale(target / mag)
            }
        })
        .collect();
    Ok(ComplexSpectrogram::from_raw(x.bins(), x.frames(), data))
}

/// `||X - P_C(X)||^2`, the energy of the inconsistent component.
pub fn inconsistency_energy<T: Real>(
    x: &ComplexSpectrogram<T>,
    stft: &Stft<T>,
    signal_length: usize,
) -> Result<T> {
    let pc = project_consistent(x, stft, signal_length)?;
    Ok(x.distance_sqr(&pc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrogram::bin_weight;
    use crate::stft::StftParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spec(rng: &mut ChaCha8Rng, bins: usize, frames: usize) -> ComplexSpectrogram<f64> {
        let data = (0..bins * frames)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexSpectrogram::from_vec(bins, frames, data).unwrap()
    }

    fn small() -> Stft<f64> {
        Stft::new(StftParams::hann(32, 16, 8000).unwrap())
    }

    #[test]
    fn amplitude_projection_scales_entry() {
        let x = ComplexSpectrogram::from_vec(1, 1, vec![Complex::new(3.0, 4.0)]).unwrap();
        let a = AmplitudeSpectrogram::from_vec(1, 1, vec![10.0]).unwrap();
        let y = project_amplitude(&x, &a).unwrap();
        assert_eq!(y.get(0, 0), Complex::new(6.0, 8.0));
    }

    #[test]
    fn amplitude_projection_zero_entry_stays_zero() {
        let x = ComplexSpectrogram::from_vec(2, 1, vec![Complex::new(0.0, 0.0), Complex::new(0.0, -2.0)])
            .unwrap();
        let a = AmplitudeSpectrogram::from_vec(2, 1, vec![7.0, 1.0]).unwrap();
        let y = project_amplitude(&x, &a).unwrap();
        assert_eq!(y.get(0, 0), Complex::new(0.0, 0.0));
        assert_eq!(y.get(1, 0), Complex::new(0.0, -1.0));
    }

    #[test]
    fn amplitude_projection_identity_when_magnitudes_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_spec(&mut rng, 9, 4);
        let y = project_amplitude(&x, &x.amplitude()).unwrap();
        for (a, b) in x.data().iter().zip(y.data()) {
            assert!((a - b).norm() <= 1e-15 * a.norm());
        }
    }

    #[test]
    fn amplitude_projection_handles_tiny_magnitudes() {
        let x = ComplexSpectrogram::from_vec(1, 1, vec![Complex::new(3e-300, -4e-300)]).unwrap();
        let a = AmplitudeSpectrogram::from_vec(1, 1, vec![5.0]).unwrap();
        let y = project_amplitude(&x, &a).unwrap();
        assert!((y.get(0, 0) - Complex::new(3.0, -4.0)).norm() < 1e-14);
    }

    #[test]
    fn amplitude_projection_shape_mismatch() {
        let x = ComplexSpectrogram::<f64>::zeros(2, 2);
        let a = AmplitudeSpectrogram::zeros(2, 3);
        assert!(project_amplitude(&x, &a).is_err());
    }

    #[test]
    fn consistent_input_is_fixed_point() {
        let stft = small();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = stft.forward(&x).unwrap();
        let p = project_consistent(&s, &stft, 200).unwrap();
        assert!(p.distance_sqr(&s).sqrt() <= 1e-10 * s.norm());
        assert!(inconsistency_energy(&s, &stft, 200).unwrap() <= 1e-18 * s.norm_sqr().max(1.0));
    }

    #[test]
    fn zero_input() {
        let stft = small();
        let z = ComplexSpectrogram::zeros(17, stft.frames_for(100));
        let p = project_consistent(&z, &stft, 100).unwrap();
        assert!(p.data().iter().all(|c| c.norm() == 0.0));
        assert_eq!(inconsistency_energy(&z, &stft, 100).unwrap(), 0.0);
    }

    #[test]
    fn consistent_projection_idempotent() {
        let stft = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_spec(&mut rng, 17, stft.frames_for(300));
        let once = project_consistent(&x, &stft, 300).unwrap();
        let twice = project_consistent(&once, &stft, 300).unwrap();
        assert!(once.distance_sqr(&twice).sqrt() <= 1e-10 * x.norm());
    }

    #[test]
    fn inconsistency_matches_explicit_loop() {
        let stft = small();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let len = 250;
        let x = random_spec(&mut rng, 17, stft.frames_for(len));
        let consistent = stft.forward(stft.inverse(&x, len).unwrap().samples()).unwrap();
        let mut oracle = 0.0;
        for t in 0..x.frames() {
            for k in 0..x.bins() {
                let d = x.get(k, t) - consistent.get(k, t);
                oracle += bin_weight::<f64>(k, x.bins()) * (d.re * d.re + d.im * d.im);
            }
        }
        let e = inconsistency_energy(&x, &stft, len).unwrap();
        assert!((e - oracle).abs() <= 1e-12 * oracle);
        assert!(e > 0.0);
    }

    #[test]
    fn residual_is_orthogonal_to_consistent_set() {
        // Pythagoras: ||X||^2 = ||P_C X||^2 + ||X - P_C X||^2.
        let stft = small();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_spec(&mut rng, 17, stft.frames_for(180));
        let pc = project_consistent(&x, &stft, 180).unwrap();
        let residual = &x - &pc;
        assert!(residual.inner(&pc).abs() <= 1e-10 * x.norm_sqr());
    }
}

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Adam with bias-corrected moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T> {
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Real> Adam<T> {
    /// `beta1 = 0.9`, `beta2 = 0.999`, `epsilon = 1e-8`.
    pub fn new(len: usize) -> Self {
        Self {
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[T] {
        &self.m
    }

    pub fn second_moment(&self) -> &[T] {
        &self.v
    }

    /// One update of `params` along `grads`. Non-finite gradients abort
    /// before anything is modified.
    pub fn step(&mut self, params: &mut [T], grads: &[T], lr: T) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::InvalidInput(format!(
                "optimizer tracks {} parameters, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::TrainingDiverged(format!("non-finite gradient at parameter {i}")));
        }
        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (T::one() - self.beta1) * g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_signed_learning_rate() {
        let mut opt = Adam::<f64>::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        let g = [0.3, -7.0, 1e-3];
        opt.step(&mut p, &g, 0.01).unwrap();
        for ((after, before), gi) in p.iter().zip([1.0, -2.0, 0.5]).zip(g) {
            let expected = -0.01 * gi / (gi.abs() + 1e-8);
            assert!((after - before - expected).abs() < 1e-12);
            assert!(((after - before) + 0.01 * gi.signum()).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_gradient() {
        let mut opt = Adam::<f64>::new(2);
        let mut p = vec![0.25, -4.0];
        opt.step(&mut p, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(p, vec![0.25, -4.0]);
        assert!(opt.first_moment().iter().chain(opt.second_moment()).all(|&v| v == 0.0));

        opt.step(&mut p, &[1.0, -2.0], 0.1).unwrap();
        let (m, v) = (opt.first_moment().to_vec(), opt.second_moment().to_vec());
        opt.step(&mut p, &[0.0, 0.0], 0.1).unwrap();
        for i in 0..2 {
            assert_eq!(opt.first_moment()[i], 0.9 * m[i]);
            assert_eq!(opt.second_moment()[i], 0.999 * v[i]);
        }
        assert_eq!(opt.steps(), 3);
    }

    #[test]
    fn quadratic_matches_scalar_reference() {
        // f(w) = 1.5 (w - 2)^2
        let grad = |w: f64| 3.0 * (w - 2.0);
        let (mut w_ref, mut m, mut v) = (-1.0f64, 0.0f64, 0.0f64);
        let mut opt = Adam::<f64>::new(1);
        let mut w = [-1.0f64];
        let lr = 0.05;
        for step in 1..=100 {
            let g = grad(w_ref);
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(step));
            let vh = v / (1.0 - 0.999f64.powi(step));
            w_ref -= lr * mh / (vh.sqrt() + 1e-8);

            let g = [grad(w[0])];
            opt.step(&mut w, &g, lr).unwrap();
            assert!((w[0] - w_ref).abs() <= 1e-12, "step {step}: {} vs {w_ref}", w[0]);
        }
        assert!((w[0] - 2.0).abs() < 0.5);
    }

    #[test]
    fn nan_gradient_diverges_without_mutation() {
        let mut opt = Adam::<f64>::new(2);
        let mut p = vec![1.0, 2.0];
        let err = opt.step(&mut p, &[0.1, f64::NAN], 0.1).unwrap_err();
        assert!(matches!(err, Error::TrainingDiverged(_)));
        assert_eq!(p, vec![1.0, 2.0]);
        assert_eq!(opt.steps(), 0);
    }

    #[test]
    fn length_mismatch() {
        let mut opt = Adam::<f64>::new(2);
        assert!(opt.step(&mut [0.0; 3], &[0.0; 3], 0.1).is_err());
    }
}

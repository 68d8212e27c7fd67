//! Convolutional residual estimator: stacked conv + GLU blocks with additive
//! skip connections and a final linear projection to two channels.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::conv::{conv_backward, conv_forward, ConvGeometry};
use super::tensor::Tensor;

/// Real and imaginary parts of `X`, `Y` and `Z`.
pub const INPUT_CHANNELS: usize = 6;
/// Real and imaginary parts of the residual.
pub const OUTPUT_CHANNELS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    /// Splits the convolution output into halves `a`, `b` and emits
    /// `a * sigmoid(b)`.
    Glu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub activation: Activation,
    pub in_channels: usize,
    /// Channels after the activation.
    pub out_channels: usize,
    pub kernel_freq: usize,
    pub kernel_time: usize,
}

impl LayerSpec {
    pub fn conv_channels(&self) -> usize {
        match self.activation {
            Activation::Linear => self.out_channels,
            Activation::Glu => 2 * self.out_channels,
        }
    }

    pub fn weight_len(&self) -> usize {
        self.conv_channels() * self.in_channels * self.kernel_freq * self.kernel_time
    }

    pub fn param_len(&self) -> usize {
        self.weight_len() + self.conv_channels()
    }

    fn geometry(&self, height: usize, width: usize) -> ConvGeometry {
        ConvGeometry {
            in_channels: self.in_channels,
            out_channels: self.conv_channels(),
            kernel_h: self.kernel_freq,
            kernel_w: self.kernel_time,
            height,
            width,
        }
    }
}

/// The output of layer `from` is added to the input of layer `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Skip {
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub layers: Vec<LayerSpec>,
    pub skips: Vec<Skip>,
}

impl Architecture {
    /// Four conv+GLU blocks (5x3 kernels, 32 channels), a skip from the
    /// first block's output to the third block's input, and a 1x1 linear
    /// projection to two channels.
    pub fn default_denoiser() -> Self {
        Self::conv_glu(32, 4, 5, 3, vec![Skip { from: 0, to: 2 }])
    }

    /// `blocks` conv+GLU layers of width `hidden` followed by a 1x1 linear
    /// output layer.
    pub fn conv_glu(
        hidden: usize,
        blocks: usize,
        kernel_freq: usize,
        kernel_time: usize,
        skips: Vec<Skip>,
    ) -> Self {
        let mut layers: Vec<LayerSpec> = (0..blocks)
            .map(|i| LayerSpec {
                activation: Activation::Glu,
                in_channels: if i == 0 { INPUT_CHANNELS } else { hidden },
                out_channels: hidden,
                kernel_freq,
                kernel_time,
            })
            .collect();
        layers.push(LayerSpec {
            activation: Activation::Linear,
            in_channels: if blocks == 0 { INPUT_CHANNELS } else { hidden },
            out_channels: OUTPUT_CHANNELS,
            kernel_freq: 1,
            kernel_time: 1,
        });
        Self { layers, skips }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("architecture: {msg}")));
        let (Some(first), Some(last)) = (self.layers.first(), self.layers.last()) else {
            return bad("no layers".into());
        };
        if first.in_channels != INPUT_CHANNELS {
            return bad(format!("input must have {INPUT_CHANNELS} channels, got {}", first.in_channels));
        }
        if last.out_channels != OUTPUT_CHANNELS {
            return bad(format!("output must have {OUTPUT_CHANNELS} channels, got {}", last.out_channels));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.kernel_freq % 2 == 0 || l.kernel_time % 2 == 0 {
                return bad(format!("layer {i}: kernels must be odd to keep the input size"));
            }
            if l.in_channels == 0 || l.out_channels == 0 {
                return bad(format!("layer {i}: empty channel count"));
            }
            if i > 0 && self.layers[i - 1].out_channels != l.in_channels {
                return bad(format!("layer {i}: expects {} channels, previous emits {}",
                    l.in_channels, self.layers[i - 1].out_channels));
            }
        }
        for s in &self.skips {
            if s.to >= self.layers.len() || s.to < s.from + 2 {
                return bad(format!("skip {} -> {} must jump forward past at least one layer", s.from, s.to));
            }
            if self.layers[s.from].out_channels != self.layers[s.to].in_channels {
                return bad(format!("skip {} -> {} joins mismatched channel counts", s.from, s.to));
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::param_len).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        self.layers
            .iter()
            .scan(0, |acc, l| {
                let start = *acc;
                *acc += l.param_len();
                Some(start)
            })
            .collect()
    }

    /// Human-readable layer list.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (i, l) in self.layers.iter().enumerate() {
            let kind = match l.activation {
                Activation::Linear => "conv",
                Activation::Glu => "conv+glu",
            };
            let _ = writeln!(
                s,
                "layer {i}: {kind} {} -> {} kernel {}x{} (freq x time), {} parameters",
                l.in_channels,
                l.out_channels,
                l.kernel_freq,
                l.kernel_time,
                l.param_len()
            );
        }
        for k in &self.skips {
            let _ = writeln!(s, "skip: layer {} output added to layer {} input", k.from, k.to);
        }
        let _ = write!(s, "total parameters: {}", self.param_count());
        s
    }
}

#[inline]
fn sigmoid<T: Real>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

struct LayerCache<T> {
    geometry: ConvGeometry,
    padded_input: Vec<T>,
    /// Convolution output before the gate, kept for GLU layers only.
    pre_activation: Option<Tensor<T>>,
}

/// Intermediates recorded by [`DenoiserModel::forward_cached`].
pub struct ForwardCache<T> {
    layers: Vec<LayerCache<T>>,
    input_shape: (usize, usize, usize),
}

/// Gradients in the model's flat parameter layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub params: Vec<T>,
    pub input: Option<Tensor<T>>,
}

/// Weights of the residual estimator, stored flat: for each layer the
/// convolution weight `[conv_out][in][kernel_freq][kernel_time]` followed
/// by its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoiserModel<T> {
    arch: Architecture,
    params: Vec<T>,
    offsets: Vec<usize>,
}

impl<T: Real> DenoiserModel<T> {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        let n = arch.param_count();
        Self::from_params(arch, vec![T::zero(); n])
    }

    /// Uniform weights in `+-sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn initialized(arch: Architecture, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..model.arch.layers.len() {
            let l = model.arch.layers[i];
            let taps = l.kernel_freq * l.kernel_time;
            let limit = (6.0 / ((l.in_channels + l.conv_channels()) * taps) as f64).sqrt();
            let start = model.offsets[i];
            for w in &mut model.params[start..start + l.weight_len()] {
                *w = T::from_f64_lossy(rng.random_range(-limit..=limit));
            }
        }
        Ok(model)
    }

    /// [`initialized`](Self::initialized) with the output layer's weights
    /// zeroed: the untrained network predicts an all-zero residual.
    pub fn initialized_residual(arch: Architecture, seed: u64) -> Result<Self> {
        let mut model = Self::initialized(arch, seed)?;
        let last = model.arch.layers.len() - 1;
        let start = model.offsets[last];
        let n = model.arch.layers[last].weight_len();
        model.params[start..start + n].fill(T::zero());
        Ok(model)
    }

    pub fn from_params(arch: Architecture, params: Vec<T>) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::InvalidInput(format!(
                "architecture needs {} parameters, got {}",
                arch.param_count(),
                params.len()
            )));
        }
        let offsets = arch.offsets();
        Ok(Self { arch, params, offsets })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn layer_weight(&self, i: usize) -> &[T] {
        let l = &self.arch.layers[i];
        &self.params[self.offsets[i]..self.offsets[i] + l.weight_len()]
    }

    pub fn layer_bias(&self, i: usize) -> &[T] {
        let l = &self.arch.layers[i];
        let start = self.offsets[i] + l.weight_len();
        &self.params[start..start + l.conv_channels()]
    }

    pub fn layer_bias_mut(&mut self, i: usize) -> &mut [T] {
        let l = self.arch.layers[i];
        let start = self.offsets[i] + l.weight_len();
        &mut self.params[start..start + l.conv_channels()]
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        self.run(input, false).map(|(out, _)| out)
    }

    pub fn forward_cached(&self, input: &Tensor<T>) -> Result<(Tensor<T>, ForwardCache<T>)> {
        self.run(input, true)
    }

    fn run(&self, input: &Tensor<T>, keep: bool) -> Result<(Tensor<T>, ForwardCache<T>)> {
        if input.channels != INPUT_CHANNELS || input.height == 0 || input.width == 0 {
            return Err(Error::InvalidInput(format!(
                "network input must be {INPUT_CHANNELS} x H x W, got {:?}",
                input.shape()
            )));
        }
        let (h, w) = (input.height, input.width);
        let mut caches = Vec::with_capacity(self.arch.layers.len());
        // acts[i] is the output of layer i - 1 (acts[0] is the input).
        let mut acts: Vec<Option<Tensor<T>>> = vec![None; self.arch.layers.len() + 1];
        acts[0] = Some(input.clone());
        for (i, spec) in self.arch.layers.iter().enumerate() {
            let mut layer_in = acts[i].clone().expect("previous activation present");
            for s in self.arch.skips.iter().filter(|s| s.to == i) {
                layer_in.add_assign(acts[s.from + 1].as_ref().expect("skip source computed"));
            }
            let geometry = spec.geometry(h, w);
            let (pre, padded_input) =
                conv_forward(&geometry, self.layer_weight(i), self.layer_bias(i), &layer_in);
            let (out, pre_activation) = match spec.activation {
                Activation::Linear => (pre, None),
                Activation::Glu => {
                    let c = spec.out_channels;
                    let mut out = Tensor::zeros(c, h, w);
                    for (o, p) in out.data.chunks_mut(c).zip(pre.data.chunks(2 * c)) {
                        let (a, b) = p.split_at(c);
                        for ((o, &av), &bv) in o.iter_mut().zip(a).zip(b) {
                            *o = av * sigmoid(bv);
                        }
                    }
                    (out, keep.then_some(pre))
                }
            };
            if keep {
                caches.push(LayerCache {
                    geometry,
                    padded_input,
                    pre_activation,
                });
            }
            // Drop activations nobody reads again.
            if i > 0 && !self.arch.skips.iter().any(|s| s.from + 1 == i && s.to > i) {
                acts[i] = None;
            }
            acts[i + 1] = Some(out);
        }
        let out = acts.pop().flatten().expect("network output");
        Ok((out, ForwardCache { layers: caches, input_shape: input.shape() }))
    }

    /// Reverse-mode gradients of `<output, grad_output>` with respect to
    /// every parameter and, when `need_input` is set, the input.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        grad_output: &Tensor<T>,
        need_input: bool,
    ) -> Result<Gradients<T>> {
        let n_layers = self.arch.layers.len();
        if cache.layers.len() != n_layers {
            return Err(Error::ContractViolation(
                "backward needs the cache of a forward_cached call on this model".into(),
            ));
        }
        let (_, h, w) = cache.input_shape;
        if grad_output.shape() != (OUTPUT_CHANNELS, h, w) {
            return Err(Error::InvalidInput(format!(
                "output gradient has shape {:?}, expected {:?}",
                grad_output.shape(),
                (OUTPUT_CHANNELS, h, w)
            )));
        }
        let mut grads = vec![T::zero(); self.params.len()];
        let mut grad_acts: Vec<Option<Tensor<T>>> = vec![None; n_layers + 1];
        grad_acts[n_layers] = Some(grad_output.clone());
        for i in (0..n_layers).rev() {
            let spec = self.arch.layers[i];
            let lc = &cache.layers[i];
            let g_out = grad_acts[i + 1].take().expect("gradient reaches every layer");
            let g_pre = match spec.activation {
                Activation::Linear => g_out,
                Activation::Glu => {
                    let pre = lc.pre_activation.as_ref().ok_or_else(|| {
                        Error::ContractViolation("GLU cache missing pre-activation".into())
                    })?;
                    let c = spec.out_channels;
                    let mut g = Tensor::zeros(2 * c, h, w);
                    let pixels = g.data.chunks_mut(2 * c).zip(pre.data.chunks(2 * c)).zip(g_out.data.chunks(c));
                    for ((gp, p), up) in pixels {
                        let (a, b) = p.split_at(c);
                        let (ga, gb) = gp.split_at_mut(c);
                        for j in 0..c {
                            let s = sigmoid(b[j]);
                            ga[j] = up[j] * s;
                            gb[j] = up[j] * a[j] * s * (T::one() - s);
                        }
                    }
                    g
                }
            };
            let start = self.offsets[i];
            let (gw, gb) = grads[start..start + spec.param_len()].split_at_mut(spec.weight_len());
            let g_in = conv_backward(
                &lc.geometry,
                self.layer_weight(i),
                &lc.padded_input,
                &g_pre,
                gw,
                gb,
                i > 0 || need_input,
            );
            if let Some(g_in) = g_in {
                for s in self.arch.skips.iter().filter(|s| s.to == i) {
                    accumulate(&mut grad_acts[s.from + 1], &g_in);
                }
                accumulate(&mut grad_acts[i], &g_in);
            }
        }
        Ok(Gradients { params: grads, input: if need_input { grad_acts[0].take() } else { None } })
    }
}

fn accumulate<T: Real>(slot: &mut Option<Tensor<T>>, g: &Tensor<T>) {
    match slot {
        Some(t) => t.add_assign(g),
        None => *slot = Some(g.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_input(seed: u64, h: usize, w: usize) -> Tensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::from_vec(
            INPUT_CHANNELS,
            h,
            w,
            (0..INPUT_CHANNELS * h * w).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
    }

    /// Independent forward pass: nested loops over a plain `[c][y][x]`
    /// layout, same wiring as the model.
    fn naive_forward(model: &DenoiserModel<f64>, input: &Tensor<f64>) -> Vec<Vec<Vec<f64>>> {
        let (c0, h, w) = input.shape();
        let mut acts: Vec<Vec<Vec<Vec<f64>>>> = vec![(0..c0)
            .map(|c| (0..h).map(|y| (0..w).map(|x| input.at(c, y, x)).collect()).collect())
            .collect()];
        let arch = model.architecture();
        for (i, l) in arch.layers.iter().enumerate() {
            let mut inp = acts[i].clone();
            for s in arch.skips.iter().filter(|s| s.to == i) {
                for c in 0..l.in_channels {
                    for y in 0..h {
                        for x in 0..w {
                            inp[c][y][x] += acts[s.from + 1][c][y][x];
                        }
                    }
                }
            }
            let (wt, b) = (model.layer_weight(i), model.layer_bias(i));
            let (kh, kw) = (l.kernel_freq as isize, l.kernel_time as isize);
            let conv: Vec<Vec<Vec<f64>>> = (0..l.conv_channels())
                .map(|o| {
                    (0..h as isize)
                        .map(|y| {
                            (0..w as isize)
                                .map(|x| {
                                    let mut acc = b[o];
                                    for c in 0..l.in_channels {
                                        for dy in 0..kh {
                                            for dx in 0..kw {
                                                let (iy, ix) = (y + dy - kh / 2, x + dx - kw / 2);
                                                if iy >= 0 && ix >= 0 && iy < h as isize && ix < w as isize {
                                                    let wi = ((o * l.in_channels + c) as isize * kh + dy) * kw + dx;
                                                    acc += wt[wi as usize] * inp[c][iy as usize][ix as usize];
                                                }
                                            }
                                        }
                                    }
                                    acc
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            let out = match l.activation {
                Activation::Linear => conv,
                Activation::Glu => (0..l.out_channels)
                    .map(|o| {
                        (0..h)
                            .map(|y| {
                                (0..w)
                                    .map(|x| {
                                        let gate = conv[o + l.out_channels][y][x];
                                        conv[o][y][x] / (1.0 + (-gate).exp())
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            };
            acts.push(out);
        }
        acts.pop().unwrap()
    }

    #[test]
    fn forward_matches_naive_network() {
        for seed in 0..4 {
            let arch = if seed % 2 == 0 {
                Architecture::default_denoiser()
            } else {
                Architecture::conv_glu(5, 3, 3, 5, vec![Skip { from: 0, to: 2 }, Skip { from: 0, to: 3 }])
            };
            let mut model = DenoiserModel::<f64>::initialized(arch.clone(), seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            for i in 0..arch.layers.len() {
                for b in model.layer_bias_mut(i) {
                    *b = rng.random_range(-0.5..0.5);
                }
            }
            let input = random_input(seed, 8, 5);
            let fast = model.forward(&input).unwrap();
            let slow = naive_forward(&model, &input);
            for o in 0..2 {
                for y in 0..8 {
                    for x in 0..5 {
                        let (p, q) = (fast.at(o, y, x), slow[o][y][x]);
                        assert!((p - q).abs() <= 1e-12, "seed {seed} ({o},{y},{x}): {p} vs {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn time_shift_equivariance() {
        let model = DenoiserModel::<f64>::initialized(Architecture::default_denoiser(), 9).unwrap();
        let (h, w) = (10, 24);
        let base = random_input(9, h, w);
        let mut shifted = Tensor::zeros(INPUT_CHANNELS, h, w);
        for c in 0..INPUT_CHANNELS {
            for y in 0..h {
                for x in 1..w {
                    *shifted.at_mut(c, y, x) = base.at(c, y, x - 1);
                }
            }
        }
        let (a, b) = (model.forward(&base).unwrap(), model.forward(&shifted).unwrap());
        // Four 3-wide layers see two frames beyond each edge.
        let reach = 4;
        for o in 0..2 {
            for y in 0..h {
                for x in reach + 1..w - reach - 1 {
                    assert!((a.at(o, y, x) - b.at(o, y, x + 1)).abs() < 1e-12);
                }
            }
        }
    }

    /// Sum over pixels of `upstream[o] * padded_input[c]` at each tap.
    fn correlation(input: &Tensor<f64>, up: &Tensor<f64>, o: usize, c: usize, dy: isize, dx: isize) -> f64 {
        let (h, w) = (input.height as isize, input.width as isize);
        let mut acc = 0.0;
        for y in 0..h {
            for x in 0..w {
                let (iy, ix) = (y + dy, x + dx);
                if iy >= 0 && ix >= 0 && iy < h && ix < w {
                    acc += up.at(o, y as usize, x as usize) * input.at(c, iy as usize, ix as usize);
                }
            }
        }
        acc
    }

    #[test]
    fn linear_gradients_are_correlations() {
        let linear = Architecture {
            layers: vec![LayerSpec {
                activation: Activation::Linear,
                in_channels: INPUT_CHANNELS,
                out_channels: OUTPUT_CHANNELS,
                kernel_freq: 3,
                kernel_time: 3,
            }],
            skips: vec![],
        };
        let mut gated = linear.clone();
        gated.layers[0].activation = Activation::Glu;
        for arch in [linear, gated] {
            let mut model = DenoiserModel::<f64>::initialized(arch.clone(), 2).unwrap();
            if arch.layers[0].activation == Activation::Glu {
                // Gate weights zero and bias +40: sigmoid(40) rounds to 1.
                let wl = model.layer_weight(0).len();
                let start = wl / 2;
                model.params_mut()[start..wl].fill(0.0);
                model.layer_bias_mut(0)[2..].fill(40.0);
            }
            let input = random_input(12, 7, 6);
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let up = Tensor::from_vec(2, 7, 6, (0..84).map(|_| rng.random_range(-1.0..1.0)).collect());
            let (_, cache) = model.forward_cached(&input).unwrap();
            let g = model.backward(&cache, &up, true).unwrap();
            for o in 0..2 {
                for c in 0..INPUT_CHANNELS {
                    for dy in 0..3 {
                        for dx in 0..3 {
                            let expected = correlation(&input, &up, o, c, dy as isize - 1, dx as isize - 1);
                            let got = g.params[((o * INPUT_CHANNELS + c) * 3 + dy) * 3 + dx];
                            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
                        }
                    }
                }
                let bias_grad = g.params[model.layer_weight(0).len() + o];
                let sum: f64 = (0..7).flat_map(|y| (0..6).map(move |x| (y, x))).map(|(y, x)| up.at(o, y, x)).sum();
                assert!((bias_grad - sum).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn default_architecture_shape() {
        let arch = Architecture::default_denoiser();
        arch.validate().unwrap();
        assert_eq!(arch.layers.len(), 5);
        assert_eq!(arch.layers[0].in_channels, 6);
        assert_eq!(arch.layers[4].out_channels, 2);
        assert!(arch.layers[..4].iter().all(|l| l.activation == Activation::Glu
            && (l.kernel_freq, l.kernel_time) == (5, 3)
            && l.out_channels == 32));
        let expected = (64 * 6 * 15 + 64) + 3 * (64 * 32 * 15 + 64) + (2 * 32 + 2);
        assert_eq!(arch.param_count(), expected);
        assert!(arch.describe().contains("skip: layer 0 output added to layer 2 input"));
    }

    #[test]
    fn invalid_architectures() {
        let mut a = Architecture::default_denoiser();
        a.layers[0].in_channels = 5;
        assert!(a.validate().is_err());
        let mut a = Architecture::default_denoiser();
        a.layers[1].kernel_freq = 4;
        assert!(a.validate().is_err());
        let mut a = Architecture::default_denoiser();
        a.skips.push(Skip { from: 2, to: 3 });
        assert!(a.validate().is_err());
        let mut a = Architecture::default_denoiser();
        a.skips.push(Skip { from: 3, to: 4 });
        assert!(a.validate().is_err());
        assert!(Architecture { layers: vec![], skips: vec![] }.validate().is_err());
    }

    #[test]
    fn zero_model_outputs_zero() {
        let model = DenoiserModel::<f64>::zeros(Architecture::default_denoiser()).unwrap();
        let out = model.forward(&random_input(1, 9, 5)).unwrap();
        assert_eq!(out.shape(), (2, 9, 5));
        assert!(out.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closed_gates_silence_output() {
        let arch = Architecture::default_denoiser();
        let mut model = DenoiserModel::<f64>::initialized(arch.clone(), 3).unwrap();
        for w in model.params_mut() {
            *w *= 1e-3;
        }
        for i in 0..4 {
            let c = arch.layers[i].out_channels;
            model.layer_bias_mut(i)[c..].fill(-40.0);
        }
        let input = random_input(2, 11, 6);
        let scale = input.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let out = model.forward(&input).unwrap();
        assert!(out.data.iter().all(|v| v.abs() <= 1e-12 * scale));
    }

    #[test]
    fn rejects_wrong_input_channels() {
        let model = DenoiserModel::<f64>::zeros(Architecture::default_denoiser()).unwrap();
        assert!(model.forward(&Tensor::zeros(4, 3, 3)).is_err());
    }

    #[test]
    fn initialization_is_seeded_and_bounded() {
        let arch = Architecture::default_denoiser();
        let a = DenoiserModel::<f64>::initialized(arch.clone(), 7).unwrap();
        let b = DenoiserModel::<f64>::initialized(arch.clone(), 7).unwrap();
        let c = DenoiserModel::<f64>::initialized(arch.clone(), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let limit = (6.0f64 / ((6 + 64) * 15) as f64).sqrt();
        assert!(a.layer_weight(0).iter().all(|w| w.abs() <= limit));
        assert!(a.layer_bias(0).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn residual_init_outputs_zero_but_keeps_hidden_weights() {
        let arch = Architecture::default_denoiser();
        let full = DenoiserModel::<f64>::initialized(arch.clone(), 7).unwrap();
        let res = DenoiserModel::<f64>::initialized_residual(arch.clone(), 7).unwrap();
        let last = arch.layers.len() - 1;
        assert!(res.layer_weight(last).iter().all(|&w| w == 0.0));
        assert_eq!(res.layer_weight(0), full.layer_weight(0));
        let out = res.forward(&random_input(6, 9, 5)).unwrap();
        assert!(out.data.iter().all(|&v| v == 0.0));
        let (_, cache) = res.forward_cached(&random_input(6, 9, 5)).unwrap();
        let g = res.backward(&cache, &Tensor::from_vec(2, 9, 5, vec![1.0; 90]), false).unwrap();
        let off = res.param_count() - arch.layers[last].param_len();
        assert!(g.params[off..].iter().any(|&v| v != 0.0));
    }

    #[test]
    fn backward_rejects_foreign_cache() {
        let small = Architecture::conv_glu(4, 1, 3, 3, vec![]);
        let big = Architecture::conv_glu(4, 2, 3, 3, vec![]);
        let m1 = DenoiserModel::<f64>::initialized(small, 1).unwrap();
        let m2 = DenoiserModel::<f64>::initialized(big, 1).unwrap();
        let (_, cache) = m1.forward_cached(&random_input(3, 4, 4)).unwrap();
        let g = Tensor::zeros(2, 4, 4);
        assert!(matches!(m2.backward(&cache, &g, false), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let model = DenoiserModel::<f64>::initialized(Architecture::default_denoiser(), 5).unwrap();
        let (_, cache) = model.forward_cached(&random_input(4, 7, 4)).unwrap();
        let g = model.backward(&cache, &Tensor::zeros(2, 7, 4), true).unwrap();
        assert!(g.params.iter().all(|&v| v == 0.0));
        assert!(g.input.unwrap().data.iter().all(|&v| v == 0.0));
    }
}

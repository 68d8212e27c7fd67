//! Same-size 2-D convolution (stride 1, zero padding) as blocked im2col
//! matrix products on channels-last maps.
//!
//! The input is copied into a zero-padded plane of width `Wp = W + kw - 1`.
//! Output pixel `(y, x)` lives at flat position `j = y * Wp + x`, and kernel
//! tap `(dy, dx)` reads position `j + dy * Wp + dx`, so the im2col row of
//! position `j` is `kernel_h` contiguous runs of `kernel_w * in_channels`
//! values. Positions with `x >= W` are scratch and discarded.

use crate::scalar::Real;

use super::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvGeometry {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub height: usize,
    pub width: usize,
}

impl ConvGeometry {
    pub fn padded_h(&self) -> usize {
        self.height + self.kernel_h - 1
    }

    pub fn padded_w(&self) -> usize {
        self.width + self.kernel_w - 1
    }

    pub fn padded_plane(&self) -> usize {
        self.padded_h() * self.padded_w()
    }

    /// Flat extent of the extended output (last valid pixel + 1).
    pub fn extended_len(&self) -> usize {
        (self.height - 1) * self.padded_w() + self.width
    }

    fn taps(&self) -> usize {
        self.kernel_h * self.kernel_w
    }
}

/// Zero-padded, channels-last copy of `input`.
/// Zero-padded copy of `input`.
pub(crate) fn pad_input<T: Real>(g: &ConvGeometry, input: &Tensor<T>) -> Vec<T> {
    let (ph, pw) = ((g.kernel_h - 1) / 2, (g.kernel_w - 1) / 2);
    let wp = g.padded_w();
    let run = g.width * g.in_channels;
    let mut out = vec![T::zero(); g.in_channels * g.padded_plane()];
    for y in 0..g.height {
        let dst = ((y + ph) * wp + pw) * g.in_channels;
        out[dst..dst + run].copy_from_slice(&input.data[y * run..(y + 1) * run]);
    }
    out
}

/// Output positions per im2col block.
const BLOCK: usize = 256;

/// Row `p` of the block: `kernel_h` runs copied from the padded input.
fn fill_columns<T: Real>(g: &ConvGeometry, padded: &[T], j0: usize, n: usize, cols: &mut [T]) {
    let wp = g.padded_w();
    let run = g.kernel_w * g.in_channels;
    let k = run * g.kernel_h;
    for p in 0..n {
        let row = &mut cols[p * k..(p + 1) * k];
        for dy in 0..g.kernel_h {
            let src = (j0 + p + dy * wp) * g.in_channels;
            row[dy * run..(dy + 1) * run].copy_from_slice(&padded[src..src + run]);
        }
    }
}

/// Weights as a `(taps * in) x out` matrix in the column order of
/// [`fill_columns`].
fn weight_matrix<T: Real>(g: &ConvGeometry, weight: &[T]) -> Vec<T> {
    let taps = g.taps();
    let (c_in, c_out) = (g.in_channels, g.out_channels);
    let mut wt = vec![T::zero(); taps * c_in * c_out];
    for o in 0..c_out {
        for c in 0..c_in {
            for tap in 0..taps {
                wt[(tap * c_in + c) * c_out + o] = weight[(o * c_in + c) * taps + tap];
            }
        }
    }
    wt
}

/// Forward pass; returns the output map and the padded input for reuse in
/// the backward pass.
pub(crate) fn conv_forward<T: Real>(
    g: &ConvGeometry,
    weight: &[T],
    bias: &[T],
    input: &Tensor<T>,
) -> (Tensor<T>, Vec<T>) {
    debug_assert_eq!(input.shape(), (g.in_channels, g.height, g.width));
    let padded = pad_input(g, input);
    let ext = g.extended_len();
    let wp = g.padded_w();
    let c_out = g.out_channels;
    let k = g.in_channels * g.taps();
    let wt = weight_matrix(g, weight);
    let mut out_ext = vec![T::zero(); ext * c_out];
    for row in out_ext.chunks_mut(c_out) {
        row.copy_from_slice(bias);
    }
    let mut cols = vec![T::zero(); k * BLOCK.min(ext)];
    for j0 in (0..ext).step_by(BLOCK) {
        let n = BLOCK.min(ext - j0);
        fill_columns(g, &padded, j0, n, &mut cols);
        T::gemm(
            n,
            k,
            c_out,
            T::one(),
            (&cols, k as isize, 1),
            (&wt, c_out as isize, 1),
            T::one(),
            (&mut out_ext[j0 * c_out..], c_out as isize, 1),
        );
    }
    let run = g.width * c_out;
    let mut out = Tensor::zeros(c_out, g.height, g.width);
    for y in 0..g.height {
        out.data[y * run..(y + 1) * run].copy_from_slice(&out_ext[y * wp * c_out..][..run]);
    }
    (out, padded)
}

/// Backward pass. Accumulates into `grad_weight` / `grad_bias` and returns
/// the input gradient when `need_input` is set.
pub(crate) fn conv_backward<T: Real>(
    g: &ConvGeometry,
    weight: &[T],
    padded_input: &[T],
    grad_out: &Tensor<T>,
    grad_weight: &mut [T],
    grad_bias: &mut [T],
    need_input: bool,
) -> Option<Tensor<T>> {
    let ext = g.extended_len();
    let wp = g.padded_w();
    let (c_in, c_out) = (g.in_channels, g.out_channels);
    let taps = g.taps();
    let k = c_in * taps;
    let out_run = g.width * c_out;
    let mut g_ext = vec![T::zero(); ext * c_out];
    for y in 0..g.height {
        g_ext[y * wp * c_out..][..out_run].copy_from_slice(&grad_out.data[y * out_run..(y + 1) * out_run]);
    }
    for pixel in grad_out.data.chunks(c_out) {
        for (b, &v) in grad_bias.iter_mut().zip(pixel) {
            *b = *b + v;
        }
    }
    let wt = if need_input { weight_matrix(g, weight) } else { Vec::new() };
    let mut grad_wt = vec![T::zero(); k * c_out];
    let mut cols = vec![T::zero(); k * BLOCK.min(ext)];
    let mut grad_padded = if need_input { vec![T::zero(); c_in * g.padded_plane()] } else { Vec::new() };
    let run = g.kernel_w * c_in;
    for j0 in (0..ext).step_by(BLOCK) {
        let n = BLOCK.min(ext - j0);
        let g_blk = &g_ext[j0 * c_out..];
        fill_columns(g, padded_input, j0, n, &mut cols);
        // dWt += cols^T * G
        T::gemm(
            k,
            n,
            c_out,
            T::one(),
            (&cols, 1, k as isize),
            (g_blk, c_out as isize, 1),
            T::one(),
            (&mut grad_wt, c_out as isize, 1),
        );
        if need_input {
            // dcols = G * Wt^T, scattered back onto the padded plane.
            T::gemm(
                n,
                c_out,
                k,
                T::one(),
                (g_blk, c_out as isize, 1),
                (&wt, 1, c_out as isize),
                T::zero(),
                (&mut cols, k as isize, 1),
            );
            for p in 0..n {
                let row = &cols[p * k..(p + 1) * k];
                for dy in 0..g.kernel_h {
                    let dst = (j0 + p + dy * wp) * c_in;
                    for (d, &v) in grad_padded[dst..dst + run].iter_mut().zip(&row[dy * run..(dy + 1) * run]) {
                        *d = *d + v;
                    }
                }
            }
        }
    }
    for o in 0..c_out {
        for c in 0..c_in {
            for tap in 0..taps {
                let gw = &mut grad_weight[(o * c_in + c) * taps + tap];
                *gw = *gw + grad_wt[(tap * c_in + c) * c_out + o];
            }
        }
    }
    if !need_input {
        return None;
    }
    let (ph, pw) = ((g.kernel_h - 1) / 2, (g.kernel_w - 1) / 2);
    let in_run = g.width * c_in;
    let mut grad_in = Tensor::zeros(c_in, g.height, g.width);
    for y in 0..g.height {
        let src = ((y + ph) * wp + pw) * c_in;
        grad_in.data[y * in_run..(y + 1) * in_run].copy_from_slice(&grad_padded[src..src + in_run]);
    }
    Some(grad_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct six-fold loop over (o, y, x, c, dy, dx).
    fn naive_conv(g: &ConvGeometry, w: &[f64], b: &[f64], input: &Tensor<f64>) -> Tensor<f64> {
        let (ph, pw) = ((g.kernel_h - 1) as isize / 2, (g.kernel_w - 1) as isize / 2);
        let mut out = Tensor::zeros(g.out_channels, g.height, g.width);
        for o in 0..g.out_channels {
            for y in 0..g.height {
                for x in 0..g.width {
                    let mut acc = b[o];
                    for c in 0..g.in_channels {
                        for dy in 0..g.kernel_h {
                            for dx in 0..g.kernel_w {
                                let iy = y as isize + dy as isize - ph;
                                let ix = x as isize + dx as isize - pw;
                                if iy < 0 || ix < 0 || iy >= g.height as isize || ix >= g.width as isize {
                                    continue;
                                }
                                let wi = ((o * g.in_channels + c) * g.kernel_h + dy) * g.kernel_w + dx;
                                acc += w[wi] * input.at(c, iy as usize, ix as usize);
                            }
                        }
                    }
                    *out.at_mut(o, y, x) = acc;
                }
            }
        }
        out
    }

    fn random_case(seed: u64, g: &ConvGeometry) -> (Vec<f64>, Vec<f64>, Tensor<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = (0..g.out_channels * g.in_channels * g.kernel_h * g.kernel_w)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let b = (0..g.out_channels).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Tensor::from_vec(
            g.in_channels,
            g.height,
            g.width,
            (0..g.in_channels * g.height * g.width).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        (w, b, x)
    }

    #[test]
    fn forward_matches_direct_loop() {
        for (seed, (ci, co, kh, kw, h, w)) in
            [(3, 4, 5, 3, 8, 5), (2, 3, 1, 1, 4, 4), (1, 2, 3, 5, 3, 7), (6, 2, 5, 3, 1, 1)]
                .into_iter()
                .enumerate()
        {
            let g = ConvGeometry {
                in_channels: ci,
                out_channels: co,
                kernel_h: kh,
                kernel_w: kw,
                height: h,
                width: w,
            };
            let (wt, b, x) = random_case(seed as u64, &g);
            let (fast, _) = conv_forward(&g, &wt, &b, &x);
            let slow = naive_conv(&g, &wt, &b, &x);
            for (p, q) in fast.data.iter().zip(&slow.data) {
                assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn backward_is_adjoint_of_forward() {
        // <conv(x) - b, g> = <x, dX> and = <w, dW> for a linear map.
        let g = ConvGeometry { in_channels: 3, out_channels: 4, kernel_h: 5, kernel_w: 3, height: 7, width: 6 };
        let (w, _, x) = random_case(9, &g);
        let zero_bias = vec![0.0; 4];
        let (y, padded) = conv_forward(&g, &w, &zero_bias, &x);
        let (_, _, grad) = random_case(10, &ConvGeometry { in_channels: 4, ..g });
        let mut gw = vec![0.0; w.len()];
        let mut gb = vec![0.0; 4];
        let gx = conv_backward(&g, &w, &padded, &grad, &mut gw, &mut gb, true).unwrap();
        let lhs: f64 = y.data.iter().zip(&grad.data).map(|(a, b)| a * b).sum();
        let via_x: f64 = x.data.iter().zip(&gx.data).map(|(a, b)| a * b).sum();
        let via_w: f64 = w.iter().zip(&gw).map(|(a, b)| a * b).sum();
        assert!((lhs - via_x).abs() < 1e-11);
        assert!((lhs - via_w).abs() < 1e-11);
        let total: Vec<f64> =
            (0..4).map(|o| (0..7).flat_map(|y| (0..6).map(move |x| (y, x))).map(|(y, x)| grad.at(o, y, x)).sum()).collect();
        for (p, q) in gb.iter().zip(total) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}

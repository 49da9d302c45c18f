//! Fully convolutional estimator with hand-written reverse mode.
//!
//! Every layer is a 3×3 convolution with zero padding equal to its dilation,
//! so the spatial size is preserved. Convolutions are lowered to matrix
//! products over an im2col buffer.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::seed;

const KERNEL: usize = 3;
const TAPS: usize = KERNEL * KERNEL;
const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    LeakyRelu,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub dilation: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn weight_count(&self) -> usize {
        self.out_channels * self.in_channels * TAPS
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.out_channels
    }
}

/// Text form: `3>32@1:leaky` (in, out, dilation, activation).
impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let act = match self.activation {
            Activation::LeakyRelu => "leaky",
            Activation::Identity => "identity",
        };
        write!(f, "{}>{}@{}:{}", self.in_channels, self.out_channels, self.dilation, act)
    }
}

impl FromStr for LayerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("bad layer spec '{s}'"));
        let (shape, act) = s.trim().split_once(':').ok_or_else(bad)?;
        let (io, dilation) = shape.split_once('@').ok_or_else(bad)?;
        let (i, o) = io.split_once('>').ok_or_else(bad)?;
        let activation = match act {
            "leaky" => Activation::LeakyRelu,
            "identity" => Activation::Identity,
            _ => return Err(bad()),
        };
        let spec = LayerSpec {
            in_channels: i.parse().map_err(|_| bad())?,
            out_channels: o.parse().map_err(|_| bad())?,
            dilation: dilation.parse().map_err(|_| bad())?,
            activation,
        };
        if spec.in_channels == 0 || spec.out_channels == 0 || spec.dilation == 0 {
            return Err(bad());
        }
        Ok(spec)
    }
}

pub fn format_architecture(layers: &[LayerSpec]) -> String {
    layers.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_architecture(s: &str) -> Result<Vec<LayerSpec>> {
    let layers = s.split(',').map(str::parse).collect::<Result<Vec<LayerSpec>>>()?;
    validate_architecture(&layers)?;
    Ok(layers)
}

pub fn validate_architecture(layers: &[LayerSpec]) -> Result<()> {
    let first = layers.first().ok_or_else(|| Error::InvalidArgument("empty architecture".into()))?;
    if first.in_channels != INPUT_CHANNELS {
        return Err(Error::InvalidArgument(format!("first layer must take {INPUT_CHANNELS} channels")));
    }
    if layers.last().unwrap().out_channels != OUTPUT_CHANNELS {
        return Err(Error::InvalidArgument(format!("last layer must emit {OUTPUT_CHANNELS} channels")));
    }
    for w in layers.windows(2) {
        if w[0].out_channels != w[1].in_channels {
            return Err(Error::InvalidArgument(format!("layer {} does not feed layer {}", w[0], w[1])));
        }
    }
    Ok(())
}

pub const INPUT_CHANNELS: usize = 3;
pub const OUTPUT_CHANNELS: usize = 8;

/// Four 3×3 layers, `3 → 32 → 32 → 32 → 8`, leaky rectifiers on the hidden
/// layers, with the given per-layer dilations.
pub fn default_architecture_with_dilations(dilations: [usize; 4]) -> Vec<LayerSpec> {
    let widths = [INPUT_CHANNELS, 32, 32, 32, OUTPUT_CHANNELS];
    (0..4)
        .map(|n| LayerSpec {
            in_channels: widths[n],
            out_channels: widths[n + 1],
            dilation: dilations[n],
            activation: if n == 3 { Activation::Identity } else { Activation::LeakyRelu },
        })
        .collect()
}

pub fn default_architecture() -> Vec<LayerSpec> {
    default_architecture_with_dilations(DEFAULT_DILATIONS)
}

pub const DEFAULT_DILATIONS: [usize; 4] = [1, 3, 6, 1];

/// Network weights, flattened: for each layer its `[out][in][3][3]` kernel
/// followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<LayerSpec>,
    values: Vec<f64>,
    seed: u64,
}

impl ModelParams {
    /// He-normal kernels (unit-gain for the output layer) and zero biases.
    pub fn init(layers: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        validate_architecture(&layers)?;
        let mut rng = seed::rng(seed, &[0x1417]);
        let mut values = Vec::with_capacity(layers.iter().map(LayerSpec::param_count).sum());
        for spec in &layers {
            let fan_in = (spec.in_channels * TAPS) as f64;
            let gain = match spec.activation {
                Activation::LeakyRelu => 2.0,
                Activation::Identity => 1.0,
            };
            let std = (gain / fan_in).sqrt();
            for _ in 0..spec.weight_count() {
                let z: f64 = rng.sample(StandardNormal);
                values.push(std * z);
            }
            values.extend(std::iter::repeat_n(0.0, spec.out_channels));
        }
        Ok(Self { layers, values, seed })
    }

    pub fn from_values(layers: Vec<LayerSpec>, values: Vec<f64>, seed: u64) -> Result<Self> {
        validate_architecture(&layers)?;
        let expected: usize = layers.iter().map(LayerSpec::param_count).sum();
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, actual: values.len() });
        }
        Ok(Self { layers, values, seed })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(weight range, bias range)` of layer `n` inside the flat vector.
    pub fn layer_ranges(&self, n: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let start: usize = self.layers[..n].iter().map(LayerSpec::param_count).sum();
        let spec = &self.layers[n];
        let w_end = start + spec.weight_count();
        (start..w_end, w_end..w_end + spec.out_channels)
    }
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    height: usize,
    width: usize,
    cols: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
}

fn im2col(input: &[f64], channels: usize, h: usize, w: usize, d: usize, cols: &mut [f64]) {
    let p = h * w;
    for c in 0..channels {
        let plane = &input[c * p..(c + 1) * p];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &mut cols[(c * TAPS + ky * KERNEL + kx) * p..][..p];
                let dy = (ky as isize - 1) * d as isize;
                let dx = (kx as isize - 1) * d as isize;
                for y in 0..h {
                    let sy = y as isize + dy;
                    let out = &mut row[y * w..(y + 1) * w];
                    if sy < 0 || sy >= h as isize {
                        out.fill(0.0);
                        continue;
                    }
                    let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                    let x0 = (-dx).max(0) as usize;
                    let x1 = ((w as isize - dx).min(w as isize)).max(0) as usize;
                    out[..x0.min(w)].fill(0.0);
                    if x1 > x0 {
                        let s0 = (x0 as isize + dx) as usize;
                        out[x0..x1].copy_from_slice(&src[s0..s0 + (x1 - x0)]);
                    }
                    out[x1.max(x0.min(w))..].fill(0.0);
                }
            }
        }
    }
}

fn col2im(cols: &[f64], channels: usize, h: usize, w: usize, d: usize, out: &mut [f64]) {
    let p = h * w;
    out.fill(0.0);
    for c in 0..channels {
        let plane = &mut out[c * p..(c + 1) * p];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &cols[(c * TAPS + ky * KERNEL + kx) * p..][..p];
                let dy = (ky as isize - 1) * d as isize;
                let dx = (kx as isize - 1) * d as isize;
                for y in 0..h {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let x0 = (-dx).max(0) as usize;
                    let x1 = ((w as isize - dx).min(w as isize)).max(0) as usize;
                    if x1 <= x0 {
                        continue;
                    }
                    let s0 = (x0 as isize + dx) as usize;
                    let dst = &mut plane[sy as usize * w + s0..sy as usize * w + s0 + (x1 - x0)];
                    for (t, v) in dst.iter_mut().zip(&row[y * w + x0..y * w + x1]) {
                        *t += v;
                    }
                }
            }
        }
    }
}

/// `C[m×n] = A[m×k] · B[k×n]` with explicit strides, overwriting `C`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    debug_assert!(a.len() > (m - 1) * rsa + (k - 1) * csa);
    debug_assert!(b.len() > (k - 1) * rsb + (n - 1) * csb);
    // SAFETY: bounds of every operand are checked above for the given strides,
    // and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Shape check for an input of `INPUT_CHANNELS × I × J`.
fn check_input(grid: &Grid, input: &[f64]) -> Result<()> {
    let expected = INPUT_CHANNELS * grid.len();
    if input.len() != expected {
        return Err(Error::ShapeMismatch { expected, actual: input.len() });
    }
    Ok(())
}

/// Runs the network; returns `8 × I × J` outputs and the cache for [`backward`].
pub fn forward(params: &ModelParams, grid: &Grid, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    check_input(grid, input)?;
    let (h, w) = (grid.rows(), grid.cols());
    let p = h * w;
    let mut cache = ForwardCache { height: h, width: w, cols: Vec::new(), pre_activations: Vec::new() };
    let mut act = input.to_vec();
    for (n, spec) in params.layers.iter().enumerate() {
        let (wr, br) = params.layer_ranges(n);
        let kdim = spec.in_channels * TAPS;
        let mut cols = vec![0.0; kdim * p];
        im2col(&act, spec.in_channels, h, w, spec.dilation, &mut cols);
        let mut z = vec![0.0; spec.out_channels * p];
        gemm(spec.out_channels, kdim, p, &params.values[wr], kdim, 1, &cols, p, 1, &mut z);
        for (o, b) in params.values[br].iter().enumerate() {
            z[o * p..(o + 1) * p].iter_mut().for_each(|v| *v += b);
        }
        act = match spec.activation {
            Activation::LeakyRelu => z.iter().map(|&v| if v > 0.0 { v } else { LEAKY_SLOPE * v }).collect(),
            Activation::Identity => z.clone(),
        };
        cache.cols.push(cols);
        cache.pre_activations.push(z);
    }
    Ok((act, cache))
}

/// Gradient of a scalar loss with respect to every parameter, given the
/// loss gradient `output_grad` with respect to the network output.
pub fn backward(params: &ModelParams, cache: &ForwardCache, output_grad: &[f64]) -> Vec<f64> {
    let (h, w) = (cache.height, cache.width);
    let p = h * w;
    let mut grads = vec![0.0; params.values.len()];
    let mut upstream = output_grad.to_vec();
    for n in (0..params.layers.len()).rev() {
        let spec = params.layers[n];
        let z = &cache.pre_activations[n];
        if spec.activation == Activation::LeakyRelu {
            for (g, &v) in upstream.iter_mut().zip(z) {
                if v <= 0.0 {
                    *g *= LEAKY_SLOPE;
                }
            }
        }
        let (wr, br) = params.layer_ranges(n);
        let kdim = spec.in_channels * TAPS;
        let cols = &cache.cols[n];
        // dW = dZ · colsᵀ
        gemm(spec.out_channels, p, kdim, &upstream, p, 1, cols, 1, p, &mut grads[wr.clone()]);
        for (o, g) in grads[br].iter_mut().enumerate() {
            *g = upstream[o * p..(o + 1) * p].iter().sum();
        }
        if n > 0 {
            // dCols = Wᵀ · dZ
            let mut dcols = vec![0.0; kdim * p];
            gemm(kdim, spec.out_channels, p, &params.values[wr], 1, kdim, &upstream, p, 1, &mut dcols);
            let mut down = vec![0.0; spec.in_channels * p];
            col2im(&dcols, spec.in_channels, h, w, spec.dilation, &mut down);
            upstream = down;
        }
    }
    grads
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct convolution used to check the im2col lowering.
    fn naive_conv(input: &[f64], weights: &[f64], bias: &[f64], spec: &LayerSpec, h: usize, w: usize) -> Vec<f64> {
        let d = spec.dilation as isize;
        let mut out = vec![0.0; spec.out_channels * h * w];
        for o in 0..spec.out_channels {
            for y in 0..h as isize {
                for x in 0..w as isize {
                    let mut s = bias[o];
                    for c in 0..spec.in_channels {
                        for ky in 0..3isize {
                            for kx in 0..3isize {
                                let (sy, sx) = (y + (ky - 1) * d, x + (kx - 1) * d);
                                if sy < 0 || sx < 0 || sy >= h as isize || sx >= w as isize {
                                    continue;
                                }
                                let wv = weights[((o * spec.in_channels + c) * 3 + ky as usize) * 3 + kx as usize];
                                s += wv * input[(c * h + sy as usize) * w + sx as usize];
                            }
                        }
                    }
                    out[(o * h + y as usize) * w + x as usize] = s;
                }
            }
        }
        out
    }

    #[test]
    fn lowering_matches_direct_convolution() {
        for dilation in [1, 2, 3] {
            let layers = vec![LayerSpec { in_channels: 3, out_channels: 8, dilation, activation: Activation::Identity }];
            let params = ModelParams::init(layers.clone(), 5).unwrap();
            let grid = Grid::new(5, 7, 0.1).unwrap();
            let input: Vec<f64> = (0..3 * 35).map(|n| ((n * 7 % 11) as f64 - 5.0) / 3.0).collect();
            let (out, _) = forward(&params, &grid, &input).unwrap();
            let (wr, br) = params.layer_ranges(0);
            let expected = naive_conv(&input, &params.values()[wr], &params.values()[br], &layers[0], 5, 7);
            for (a, b) in out.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "dilation {dilation}");
            }
        }
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let (c, h, w, d) = (2, 4, 6, 2);
        let x: Vec<f64> = (0..c * h * w).map(|n| (n as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..c * TAPS * h * w).map(|n| (n as f64 * 0.11).cos()).collect();
        let mut cols = vec![0.0; c * TAPS * h * w];
        im2col(&x, c, h, w, d, &mut cols);
        let mut back = vec![0.0; c * h * w];
        col2im(&y, c, h, w, d, &mut back);
        let lhs: f64 = cols.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn architecture_text_round_trip() {
        let arch = default_architecture();
        let text = format_architecture(&arch);
        assert_eq!(parse_architecture(&text).unwrap(), arch);
        assert!(parse_architecture("3>8@1:relu").is_err());
        assert!(parse_architecture("2>8@1:identity").is_err());
        assert!(parse_architecture("3>4@1:leaky,5>8@1:identity").is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let params = ModelParams::init(default_architecture(), 1).unwrap();
        let grid = Grid::new(4, 4, 0.1).unwrap();
        assert!(matches!(forward(&params, &grid, &[0.0; 10]), Err(Error::ShapeMismatch { .. })));
    }
}

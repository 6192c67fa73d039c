//! Multiscale Hessian tubularity filter for dark vessels on a bright background.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::image::{GrayImage, ScalarMap};
use crate::{Error, Result};

pub const DEFAULT_SCALES: [f64; 3] = [1.5, 2.5, 3.5];
pub const DEFAULT_BETA: f64 = 0.5;
pub const MIN_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct VesselnessParams {
    pub scales: Vec<f64>,
    /// Blob suppression weight on `lambda1 / lambda2`.
    pub beta: f64,
}

impl Default for VesselnessParams {
    fn default() -> Self {
        VesselnessParams { scales: DEFAULT_SCALES.to_vec(), beta: DEFAULT_BETA }
    }
}

/// Vesselness with the default blob weight.
pub fn vesselness(img: &GrayImage, scales: &[f64]) -> Result<ScalarMap> {
    vesselness_with(img, &VesselnessParams { scales: scales.to_vec(), beta: DEFAULT_BETA })
}

/// Maximum over scales of the tubularity response, normalized so the image
/// maximum is 1 (an all-zero response stays all zero).
///
/// At each scale the structureness constant `c` is half the largest
/// Frobenius norm of the scale-normalized Hessian in the image.
pub fn vesselness_with(img: &GrayImage, params: &VesselnessParams) -> Result<ScalarMap> {
    if params.scales.is_empty() {
        return Err(Error::EmptyScales);
    }
    if let Some(&s) = params.scales.iter().find(|&&s| !(s >= MIN_SCALE)) {
        return Err(Error::InvalidParameter(alloc::format!("vesselness scale {s} is below {MIN_SCALE}")));
    }
    let (w, h) = (img.width(), img.height());
    let src: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let mut best = vec![0.0f64; w * h];
    let two_beta2 = 2.0 * params.beta * params.beta;

    for &sigma in &params.scales {
        let k = Kernels::new(sigma);
        // Hxx: smooth along y, second derivative along x; Hyy likewise; Hxy: first derivatives.
        let sy = convolve_cols(&src, w, h, &k.smooth, Taps::Even);
        let hxx = convolve_rows(&sy, w, h, &k.second, Taps::Second);
        let sx = convolve_rows(&src, w, h, &k.smooth, Taps::Even);
        let hyy = convolve_cols(&sx, w, h, &k.second, Taps::Second);
        let dx = convolve_rows(&src, w, h, &k.first, Taps::Odd);
        let hxy = convolve_cols(&dx, w, h, &k.first, Taps::Odd);

        let norm = sigma * sigma;
        let mut eig = Vec::with_capacity(w * h);
        let mut max_s = 0.0f64;
        for i in 0..w * h {
            let (l1, l2) = eigen_sorted(hxx[i] * norm, hxy[i] * norm, hyy[i] * norm);
            let s = (l1 * l1 + l2 * l2).sqrt();
            max_s = max_s.max(s);
            eig.push((l1, l2, s));
        }
        if !(max_s > 0.0) {
            continue;
        }
        let c = 0.5 * max_s;
        let two_c2 = 2.0 * c * c;
        for (i, &(l1, l2, s)) in eig.iter().enumerate() {
            // Dark tube: intensity minimum across the vessel, so lambda2 > 0.
            if l2 <= 0.0 {
                continue;
            }
            let rb = l1 / l2;
            let v = (-(rb * rb) / two_beta2).exp() * (1.0 - (-(s * s) / two_c2).exp());
            if v > best[i] {
                best[i] = v;
            }
        }
    }
    let max = best.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in &mut best {
            *v /= max;
        }
    }
    ScalarMap::new(w, h, best)
}

/// Eigenvalues of `[[a, b], [b, c]]` ordered by magnitude, `|l1| <= |l2|`.
fn eigen_sorted(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let d = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (m1, m2) = (mean + d, mean - d);
    if m1.abs() <= m2.abs() {
        (m1, m2)
    } else {
        (m2, m1)
    }
}

/// Half-kernels indexed by offset `0..=radius`.
struct Kernels {
    smooth: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Kernels {
    fn new(sigma: f64) -> Self {
        let radius = (3.0 * sigma).ceil() as usize;
        let g: Vec<f64> = (0..=radius).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
        let total = g[0] + 2.0 * g[1..].iter().sum::<f64>();
        let smooth: Vec<f64> = g.iter().map(|v| v / total).collect();
        let s2 = sigma * sigma;
        // d/dx G at +i is -i/s2 * G; stored as the weight of (I(x+i) - I(x-i)).
        let first: Vec<f64> = smooth.iter().enumerate().map(|(i, v)| -(i as f64) / s2 * v).collect();
        let mut second: Vec<f64> =
            smooth.iter().enumerate().map(|(i, v)| ((i * i) as f64 - s2) / (s2 * s2) * v).collect();
        // Zero-sum second-derivative kernel: center tap balances the pairs.
        second[0] = -2.0 * second[1..].iter().sum::<f64>();
        Kernels { smooth, first, second }
    }
}

#[derive(Clone, Copy)]
enum Taps {
    /// `k0 I(x) + sum k_i (I(x+i) + I(x-i))`
    Even,
    /// `-sum k_i (I(x+i) - I(x-i))`, so `k_i` holds the weight at `+i`.
    Odd,
    /// `sum k_i (I(x+i) + I(x-i) - 2 I(x))`; exact zero on constant input.
    Second,
}

fn tap(line: &dyn Fn(i64) -> f64, k: &[f64], taps: Taps) -> f64 {
    let c = line(0);
    match taps {
        Taps::Even => {
            let mut acc = k[0] * c;
            for (i, &ki) in k.iter().enumerate().skip(1) {
                acc += ki * (line(i as i64) + line(-(i as i64)));
            }
            acc
        }
        Taps::Odd => {
            let mut acc = 0.0;
            for (i, &ki) in k.iter().enumerate().skip(1) {
                acc += ki * (line(i as i64) - line(-(i as i64)));
            }
            acc
        }
        Taps::Second => {
            let mut acc = 0.0;
            for (i, &ki) in k.iter().enumerate().skip(1) {
                acc += ki * ((line(i as i64) - c) + (line(-(i as i64)) - c));
            }
            acc
        }
    }
}

fn convolve_rows(src: &[f64], w: usize, h: usize, k: &[f64], taps: Taps) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let f = |d: i64| row[(x as i64 + d).clamp(0, w as i64 - 1) as usize];
            out[y * w + x] = tap(&f, k, taps);
        }
    }
    out
}

fn convolve_cols(src: &[f64], w: usize, h: usize, k: &[f64], taps: Taps) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let f = |d: i64| src[(y as i64 + d).clamp(0, h as i64 - 1) as usize * w + x];
            out[y * w + x] = tap(&f, k, taps);
        }
    }
    out
}

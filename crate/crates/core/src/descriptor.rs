//! Upright gradient-orientation histogram descriptor over a fixed 32x32 patch.
//!
//! 4x4 spatial cells of 8x8 pixels, 8 orientation bins per cell, Gaussian
//! weighting with sigma 16 px, trilinear binning, L2 normalization with
//! clamping at 0.2 followed by renormalization. Reads outside the frame use
//! edge replication, so any in-frame pixel has a descriptor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::geom::Pixel;
use crate::image::GrayImage;

pub const DESCRIPTOR_LEN: usize = 128;
pub const PATCH_SIZE: i32 = 32;
const CELLS: usize = 4;
const BINS: usize = 8;
const CELL_SIZE: f64 = 8.0;
const WEIGHT_SIGMA: f64 = 16.0;
const CLAMP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: [f32; DESCRIPTOR_LEN],
}

impl Descriptor {
    pub fn from_values(values: [f32; DESCRIPTOR_LEN]) -> Self {
        Descriptor { values }
    }

    pub fn zero() -> Self {
        Descriptor { values: [0.0; DESCRIPTOR_LEN] }
    }

    pub fn values(&self) -> &[f32; DESCRIPTOR_LEN] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
    }
}

/// Euclidean distance between two descriptors.
pub fn descriptor_distance(a: &Descriptor, b: &Descriptor) -> f64 {
    a.values
        .iter()
        .zip(b.values.iter())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Descriptor of `img` at `p`.
pub fn descriptor(img: &GrayImage, p: Pixel) -> Descriptor {
    PatchLayout::new().build(p, |q| gradient(img, q))
}

/// Gradient magnitude and orientation (in bin units, `[0, 8)`) at `q`.
fn gradient(img: &GrayImage, q: Pixel) -> (f32, f32) {
    let gx = (img.get_clamped(q.x + 1, q.y) as f64 - img.get_clamped(q.x - 1, q.y) as f64) * 0.5;
    let gy = (img.get_clamped(q.x, q.y + 1) as f64 - img.get_clamped(q.x, q.y - 1) as f64) * 0.5;
    let mag = gx.hypot(gy);
    if mag == 0.0 {
        return (0.0, 0.0);
    }
    let mut angle = gy.atan2(gx);
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    let mut bin = (angle * BINS as f64 / (2.0 * PI)) as f32;
    if bin >= BINS as f32 {
        bin = 0.0;
    }
    (mag as f32, bin)
}

/// One patch pixel and the histogram cells it votes into, with the spatial
/// Gaussian and bilinear cell weights folded together.
#[derive(Debug, Clone, Copy)]
struct Sample {
    offset: Pixel,
    taps: [(usize, f64); 4],
    n_taps: usize,
}

/// Per-pixel geometry of the patch, shared by every descriptor.
#[derive(Debug, Clone)]
struct PatchLayout {
    samples: Vec<Sample>,
}

impl PatchLayout {
    fn new() -> Self {
        let half = PATCH_SIZE / 2;
        let mut samples = Vec::with_capacity((PATCH_SIZE * PATCH_SIZE) as usize);
        for v in -half..half {
            for u in -half..half {
                let (du, dv) = (u as f64 + 0.5, v as f64 + 0.5);
                let weight = (-(du * du + dv * dv) / (2.0 * WEIGHT_SIGMA * WEIGHT_SIGMA)).exp();
                let cell_x = (du + half as f64) / CELL_SIZE - 0.5;
                let cell_y = (dv + half as f64) / CELL_SIZE - 0.5;
                let (cx0, cy0) = (cell_x.floor(), cell_y.floor());
                let (fx, fy) = (cell_x - cx0, cell_y - cy0);
                let mut sample = Sample { offset: Pixel::new(u, v), taps: [(0, 0.0); 4], n_taps: 0 };
                for (cy, wy) in [(cy0 as i32, 1.0 - fy), (cy0 as i32 + 1, fy)] {
                    for (cx, wx) in [(cx0 as i32, 1.0 - fx), (cx0 as i32 + 1, fx)] {
                        if cx < 0 || cy < 0 || cx >= CELLS as i32 || cy >= CELLS as i32 {
                            continue;
                        }
                        sample.taps[sample.n_taps] = ((cy as usize * CELLS + cx as usize) * BINS, weight * wx * wy);
                        sample.n_taps += 1;
                    }
                }
                samples.push(sample);
            }
        }
        PatchLayout { samples }
    }

    fn build(&self, p: Pixel, mut grad: impl FnMut(Pixel) -> (f32, f32)) -> Descriptor {
        let mut hist = [0.0f64; DESCRIPTOR_LEN];
        for s in &self.samples {
            let (mag, ori) = grad(p + s.offset);
            if mag == 0.0 {
                continue;
            }
            let ori = ori as f64;
            // Orientation is non-negative, so truncation is the floor.
            let o0 = ori as usize;
            let fo = ori - o0 as f64;
            let o0 = o0 % BINS;
            let o1 = (o0 + 1) % BINS;
            let m = mag as f64;
            for &(base, w) in &s.taps[..s.n_taps] {
                let w = m * w;
                hist[base + o0] += w * (1.0 - fo);
                hist[base + o1] += w * fo;
            }
        }
        normalize(&mut hist);
        let mut values = [0.0f32; DESCRIPTOR_LEN];
        for (v, h) in values.iter_mut().zip(hist.iter()) {
            *v = *h as f32;
        }
        Descriptor { values }
    }
}

fn normalize(hist: &mut [f64; DESCRIPTOR_LEN]) {
    let scale = |hist: &mut [f64; DESCRIPTOR_LEN]| {
        let n = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            hist.iter_mut().for_each(|v| *v /= n);
        }
        n > 0.0
    };
    if scale(hist) {
        hist.iter_mut().for_each(|v| *v = v.min(CLAMP));
        scale(hist);
    }
}

/// Lazily filled descriptor table for one frame. Gradients are computed once
/// per pixel; descriptors are computed on first request and kept.
pub struct DescriptorCache<'a> {
    img: &'a GrayImage,
    layout: PatchLayout,
    grad: Vec<(f32, f32)>,
    slot: Vec<u32>,
    store: Vec<Descriptor>,
}

impl<'a> DescriptorCache<'a> {
    pub fn new(img: &'a GrayImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let mut grad = Vec::with_capacity(w * h);
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                grad.push(gradient(img, Pixel::new(x, y)));
            }
        }
        DescriptorCache { img, layout: PatchLayout::new(), grad, slot: vec![u32::MAX; w * h], store: Vec::new() }
    }

    pub fn image(&self) -> &GrayImage {
        self.img
    }

    /// Number of distinct descriptors computed so far.
    pub fn computed(&self) -> usize {
        self.store.len()
    }

    /// Descriptor at an in-frame pixel; identical to [`descriptor`].
    pub fn get(&mut self, p: Pixel) -> &Descriptor {
        let (w, h) = (self.img.width(), self.img.height());
        debug_assert!(p.in_bounds(w, h));
        let i = p.index(w);
        if self.slot[i] == u32::MAX {
            let grad = &self.grad;
            let img = self.img;
            let d = self.layout.build(p, |q| {
                if q.in_bounds(w, h) {
                    grad[q.index(w)]
                } else {
                    gradient(img, q)
                }
            });
            self.slot[i] = self.store.len() as u32;
            self.store.push(d);
        }
        &self.store[self.slot[i] as usize]
    }
}

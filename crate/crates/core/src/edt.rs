//! Exact Euclidean distance transform (separable lower-envelope method).

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::geom::Pixel;
use crate::image::{Mask, ScalarMap};
use crate::{Error, Result};

/// Distance from every pixel to the nearest seed pixel of `seeds`.
pub fn distance_transform(seeds: &Mask) -> Result<ScalarMap> {
    let mut sq = squared_distance_transform(seeds)?;
    for v in sq.data_mut() {
        *v = v.sqrt();
    }
    Ok(sq)
}

/// Seeds given as a pixel list on a `width x height` frame.
pub fn distance_transform_from_pixels(seeds: &[Pixel], width: usize, height: usize) -> Result<ScalarMap> {
    distance_transform(&Mask::from_pixels(width, height, seeds))
}

/// Squared distances; exact in `f64` for any realistic frame size.
pub fn squared_distance_transform(seeds: &Mask) -> Result<ScalarMap> {
    if seeds.is_empty() {
        return Err(Error::NoTargetShape);
    }
    let (w, h) = (seeds.width(), seeds.height());
    let mut grid = vec![f64::INFINITY; w * h];
    for (i, &s) in seeds.data().iter().enumerate() {
        if s {
            grid[i] = 0.0;
        }
    }
    let mut buf = vec![0.0; w.max(h)];
    let mut out = vec![0.0; w.max(h)];
    let mut env = Envelope::with_capacity(w.max(h));
    for x in 0..w {
        for y in 0..h {
            buf[y] = grid[y * w + x];
        }
        env.transform(&buf[..h], &mut out[..h]);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        buf[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        env.transform(&buf[..w], &mut out[..w]);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    ScalarMap::new(w, h, grid)
}

struct Envelope {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope { v: vec![0; n], z: vec![0.0; n + 1] }
    }

    /// `out[q] = min_p (q - p)^2 + f[p]` over finite `f[p]`.
    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let mut k: isize = -1;
        for q in 0..n {
            if !f[q].is_finite() {
                continue;
            }
            let fq = f[q] + (q * q) as f64;
            loop {
                if k < 0 {
                    k = 0;
                    self.v[0] = q;
                    self.z[0] = f64::NEG_INFINITY;
                    self.z[1] = f64::INFINITY;
                    break;
                }
                let p = self.v[k as usize];
                let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                if s <= self.z[k as usize] {
                    k -= 1;
                    continue;
                }
                k += 1;
                self.v[k as usize] = q;
                self.z[k as usize] = s;
                self.z[k as usize + 1] = f64::INFINITY;
                break;
            }
        }
        if k < 0 {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
        let mut j = 0usize;
        for (q, o) in out.iter_mut().enumerate() {
            while self.z[j + 1] < q as f64 {
                j += 1;
            }
            let p = self.v[j];
            let d = q as f64 - p as f64;
            *o = d * d + f[p];
        }
    }
}

//! Raster containers: 8-bit frames, real-valued maps and binary masks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Pixel;
use crate::{Error, Result};

/// Smallest accepted frame side, in pixels.
pub const MIN_SIDE: usize = 16;

/// Row-major 8-bit grayscale frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} is smaller than {MIN_SIDE}x{MIN_SIDE}"
            )));
        }
        if width * height != data.len() {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Reads with edge replication outside the frame.
    pub fn get_clamped(&self, x: i32, y: i32) -> u8 {
        let x = x.clamp(0, self.width as i32 - 1) as usize;
        let y = y.clamp(0, self.height as i32 - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.in_bounds(self.width, self.height)
    }
}

/// Row-major real-valued map (vesselness, distance transform, speed).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width * height != data.len() {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} map needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(ScalarMap { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        ScalarMap { width, height, data: vec![value; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn at(&self, p: Pixel) -> f64 {
        self.data[p.index(self.width)]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn get_clamped(&self, x: i32, y: i32) -> f64 {
        let x = x.clamp(0, self.width as i32 - 1) as usize;
        let y = y.clamp(0, self.height as i32 - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copies the window `[x0, x0 + w) x [y0, y0 + h)`; the window must be in bounds.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> ScalarMap {
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        ScalarMap { width: w, height: h, data }
    }
}

/// Binary mask, also used as a pixel set over a fixed frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Self {
        Mask { width, height, data: vec![false; width * height] }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Mask { width, height, data: vec![true; width * height] }
    }

    /// Builds a mask from pixels; out-of-bounds pixels are ignored.
    pub fn from_pixels<'a>(width: usize, height: usize, pixels: impl IntoIterator<Item = &'a Pixel>) -> Self {
        let mut m = Mask::empty(width, height);
        for &p in pixels {
            m.insert(p);
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// False outside the frame.
    pub fn contains(&self, p: Pixel) -> bool {
        p.in_bounds(self.width, self.height) && self.data[p.index(self.width)]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn insert(&mut self, p: Pixel) {
        if p.in_bounds(self.width, self.height) {
            self.data[p.index(self.width)] = true;
        }
    }

    pub fn remove(&mut self, p: Pixel) {
        if p.in_bounds(self.width, self.height) {
            self.data[p.index(self.width)] = false;
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Set pixels in raster order.
    pub fn pixels(&self) -> Vec<Pixel> {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Pixel::new((i % w) as i32, (i / w) as i32))
            .collect()
    }

    pub fn invert(&self) -> Mask {
        Mask { width: self.width, height: self.height, data: self.data.iter().map(|b| !b).collect() }
    }
}

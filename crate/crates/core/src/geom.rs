//! Integer pixel coordinates.

use core::ops::{Add, Neg, Sub};
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

/// Pixel coordinate in image space, origin top-left, `y` pointing down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub const ZERO: Pixel = Pixel { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Pixel { x, y }
    }

    /// Rounds a real coordinate to the nearest pixel.
    pub fn round(x: f64, y: f64) -> Self {
        Pixel::new(x.round() as i32, y.round() as i32)
    }

    pub fn norm2(self) -> i64 {
        let (x, y) = (self.x as i64, self.y as i64);
        x * x + y * y
    }

    pub fn norm(self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn dist2(self, other: Pixel) -> i64 {
        (self - other).norm2()
    }

    pub fn dist(self, other: Pixel) -> f64 {
        (self - other).norm()
    }

    /// Row-major index; caller guarantees the pixel is in bounds.
    pub fn index(self, width: usize) -> usize {
        self.y as usize * width + self.x as usize
    }

    pub fn in_bounds(self, width: usize, height: usize) -> bool {
        self.x >= 0 && self.y >= 0 && (self.x as usize) < width && (self.y as usize) < height
    }

    pub fn clamp_to(self, width: usize, height: usize) -> Pixel {
        Pixel::new(
            self.x.clamp(0, width as i32 - 1),
            self.y.clamp(0, height as i32 - 1),
        )
    }
}

impl Add for Pixel {
    type Output = Pixel;
    fn add(self, rhs: Pixel) -> Pixel {
        Pixel::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Pixel {
    type Output = Pixel;
    fn sub(self, rhs: Pixel) -> Pixel {
        Pixel::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Pixel {
    type Output = Pixel;
    fn neg(self) -> Pixel {
        Pixel::new(-self.x, -self.y)
    }
}

/// 8-neighborhood offsets, clockwise from east.
pub const NEIGHBORS_8: [Pixel; 8] = [
    Pixel::new(1, 0),
    Pixel::new(1, 1),
    Pixel::new(0, 1),
    Pixel::new(-1, 1),
    Pixel::new(-1, 0),
    Pixel::new(-1, -1),
    Pixel::new(0, -1),
    Pixel::new(1, -1),
];

/// Pixels of a digital line from `a` to `b` inclusive (Bresenham).
pub fn line(a: Pixel, b: Pixel) -> alloc::vec::Vec<Pixel> {
    let mut out = alloc::vec::Vec::new();
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    let sx = if a.x < b.x { 1 } else { -1 };
    let sy = if a.y < b.y { 1 } else { -1 };
    let mut err = dx + dy;
    let mut p = a;
    loop {
        out.push(p);
        if p == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            p.x += sx;
        }
        if e2 <= dx {
            err += dx;
            p.y += sy;
        }
    }
    out
}

/// Sum of step lengths along a pixel path.
pub fn path_length(path: &[Pixel]) -> f64 {
    path.windows(2).map(|w| w[0].dist(w[1])).sum()
}

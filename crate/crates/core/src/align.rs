//! Global translation search: chamfer matching of the source vessel points
//! against the distance transform of the destination's skeletonized vessels.

use crate::geom::Pixel;
use crate::image::{GrayImage, Mask, ScalarMap};
use crate::morphology::{binarize, skeletonize};
use crate::vesselness::{vesselness_with, VesselnessParams};
use crate::{Error, Result};

pub const DEFAULT_SEARCH_RADIUS: i32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalShift {
    pub dx: i32,
    pub dy: i32,
    /// Mean distance-transform value over the shifted template.
    pub cost: f64,
}

impl GlobalShift {
    pub fn zero() -> Self {
        GlobalShift { dx: 0, dy: 0, cost: 0.0 }
    }

    pub fn offset(&self) -> Pixel {
        Pixel::new(self.dx, self.dy)
    }
}

/// Exhaustive search over `[-radius, radius]^2` for the shift minimizing the
/// summed distance-transform value of the shifted template. Reads outside
/// the map are clamped to the border. Ties go to the smallest shift norm,
/// then the smallest `dy`, then the smallest `dx`.
pub fn chamfer_match(template: &[Pixel], target_dt: &ScalarMap, radius: i32) -> Result<GlobalShift> {
    if template.is_empty() {
        return Err(Error::EmptyTemplate);
    }
    if radius < 0 {
        return Err(Error::InvalidParameter(alloc::format!("chamfer radius {radius} is negative")));
    }
    let mut best: Option<(f64, (i64, i32, i32))> = None;
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let sum: f64 = template.iter().map(|p| target_dt.get_clamped(p.x + dx, p.y + dy)).sum();
            let key = ((dx as i64).pow(2) + (dy as i64).pow(2), dy, dx);
            let better = match best {
                None => true,
                Some((s, k)) => sum < s || (sum == s && key < k),
            };
            if better {
                best = Some((sum, key));
            }
        }
    }
    let (sum, (_, dy, dx)) = best.unwrap();
    Ok(GlobalShift { dx, dy, cost: sum / template.len() as f64 })
}

/// Skeleton of the thresholded vesselness of `dst`.
pub fn build_target_shape(dst: &GrayImage, params: &VesselnessParams, threshold: f64) -> Result<Mask> {
    let v = vesselness_with(dst, params)?;
    target_shape_from_vesselness(&v, threshold)
}

/// Same as [`build_target_shape`] for a precomputed vesselness map.
pub fn target_shape_from_vesselness(vesselness: &ScalarMap, threshold: f64) -> Result<Mask> {
    let skeleton = skeletonize(&binarize(vesselness, threshold));
    if skeleton.is_empty() {
        return Err(Error::NoVesselsDetected);
    }
    Ok(skeleton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edt::distance_transform_from_pixels;
    use alloc::vec::Vec;

    fn shape() -> Vec<Pixel> {
        let mut v: Vec<Pixel> = (20..60).map(|x| Pixel::new(x, 40)).collect();
        v.extend((41..70).map(|y| Pixel::new(45, y)));
        v.extend((0..15).map(|k| Pixel::new(25 + k, 55 + k)));
        v
    }

    #[test]
    fn self_match_is_zero_shift() {
        let t = shape();
        let dt = distance_transform_from_pixels(&t, 100, 100).unwrap();
        let s = chamfer_match(&t, &dt, 10).unwrap();
        assert_eq!((s.dx, s.dy, s.cost), (0, 0, 0.0));
    }

    #[test]
    fn recovers_exact_translation() {
        let t = shape();
        let target: Vec<Pixel> = t.iter().map(|&p| p + Pixel::new(6, -4)).collect();
        let dt = distance_transform_from_pixels(&target, 100, 100).unwrap();
        let s = chamfer_match(&t, &dt, 10).unwrap();
        assert_eq!((s.dx, s.dy, s.cost), (6, -4, 0.0));
    }

    #[test]
    fn tie_prefers_smallest_shift() {
        // Flat map: every shift costs the same.
        let dt = ScalarMap::filled(32, 32, 1.0);
        let s = chamfer_match(&[Pixel::new(10, 10)], &dt, 4).unwrap();
        assert_eq!((s.dx, s.dy), (0, 0));
    }

    #[test]
    fn empty_template_rejected() {
        let dt = ScalarMap::filled(16, 16, 0.0);
        assert_eq!(chamfer_match(&[], &dt, 3).unwrap_err(), Error::EmptyTemplate);
    }

    #[test]
    fn constant_frame_has_no_vessels() {
        let img = GrayImage::filled(32, 32, 128).unwrap();
        assert_eq!(
            build_target_shape(&img, &VesselnessParams::default(), 0.15).unwrap_err(),
            Error::NoVesselsDetected
        );
    }
}

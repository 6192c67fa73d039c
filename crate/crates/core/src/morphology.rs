//! Thresholding, thinning, connected components and dilation on binary masks.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{Pixel, NEIGHBORS_8};
use crate::image::{Mask, ScalarMap};

/// Default threshold on max-normalized vesselness.
pub const DEFAULT_THRESHOLD: f64 = 0.15;

/// Pixels whose value is at least `threshold`.
pub fn binarize(map: &ScalarMap, threshold: f64) -> Mask {
    let mut m = Mask::empty(map.width(), map.height());
    for y in 0..map.height() {
        for x in 0..map.width() {
            if map.get(x, y) >= threshold {
                m.set(x, y, true);
            }
        }
    }
    m
}

/// Neighborhood bits in the order of [`NEIGHBORS_8`] (E, SE, S, SW, W, NW, N, NE).
fn neighborhood(mask: &Mask, p: Pixel) -> [bool; 8] {
    let mut n = [false; 8];
    for (k, d) in NEIGHBORS_8.iter().enumerate() {
        n[k] = mask.contains(p + *d);
    }
    n
}

/// 8-connectivity number (Yokoi). A border pixel is simple iff it equals 1.
fn connectivity_number(n: &[bool; 8]) -> u32 {
    let bg = |k: usize| !n[k % 8] as u32;
    // 4-neighbors sit at even positions (E, S, W, N).
    [0usize, 2, 4, 6].iter().map(|&k| bg(k) - bg(k) * bg(k + 1) * bg(k + 2)).sum()
}

/// Topology-preserving thinning to a one-pixel-wide 8-connected skeleton.
///
/// Border pixels facing each of the four directions are visited in turn and
/// deleted one at a time when they are simple and not line ends, so every
/// 8-connected component stays connected and no component vanishes.
pub fn skeletonize(mask: &Mask) -> Mask {
    let mut out = mask.clone();
    // Direction whose background neighbor marks a border pixel: N, S, E, W.
    let sides = [Pixel::new(0, -1), Pixel::new(0, 1), Pixel::new(1, 0), Pixel::new(-1, 0)];
    let mut active = out.pixels();
    loop {
        let mut changed = false;
        for side in sides {
            let candidates: Vec<Pixel> =
                active.iter().copied().filter(|&p| out.contains(p) && !out.contains(p + side)).collect();
            for p in candidates {
                let n = neighborhood(&out, p);
                let count = n.iter().filter(|&&b| b).count();
                if count >= 2 && connectivity_number(&n) == 1 {
                    out.remove(p);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        active.retain(|&p| out.contains(p));
    }
    out
}

/// 8-connected component labels (0 = background, components numbered from 1
/// in raster order of their first pixel) and the component count.
pub fn label_components(mask: &Mask) -> (Vec<u32>, u32) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in mask.pixels() {
        if labels[start.index(w)] != 0 {
            continue;
        }
        next += 1;
        labels[start.index(w)] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            for d in NEIGHBORS_8 {
                let q = p + d;
                if q.in_bounds(w, h) && mask.contains(q) && labels[q.index(w)] == 0 {
                    labels[q.index(w)] = next;
                    stack.push(q);
                }
            }
        }
    }
    (labels, next)
}

pub fn count_components(mask: &Mask) -> u32 {
    label_components(mask).1
}

/// Dilation by a Euclidean disk of the given radius.
pub fn dilate(mask: &Mask, radius: i32) -> Mask {
    let mut out = mask.clone();
    let r2 = (radius * radius) as i64;
    for p in mask.pixels() {
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let d = Pixel::new(dx, dy);
                if d.norm2() <= r2 {
                    out.insert(p + d);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_cases() {
        let zeros = ScalarMap::filled(16, 16, 0.0);
        assert!(binarize(&zeros, 0.5).is_empty());
        let ones = ScalarMap::filled(16, 16, 1.0);
        assert_eq!(binarize(&ones, 0.5).count(), 256);
        let mut checker = ScalarMap::filled(16, 16, 0.0);
        for y in 0..16 {
            for x in 0..16 {
                if (x + y) % 2 == 0 {
                    checker.set(x, y, 1.0);
                }
            }
        }
        let m = binarize(&checker, 0.5);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(m.get(x, y), (x + y) % 2 == 0);
            }
        }
    }

    #[test]
    fn empty_mask_skeleton_is_empty() {
        assert!(skeletonize(&Mask::empty(20, 20)).is_empty());
    }

    #[test]
    fn bar_thins_to_center_row() {
        let mut m = Mask::empty(120, 20);
        for y in 8..11 {
            for x in 10..110 {
                m.set(x, y, true);
            }
        }
        let s = skeletonize(&m);
        assert!(!s.is_empty());
        for p in s.pixels() {
            assert!((p.y - 9).abs() <= 1);
            assert!(m.contains(p));
        }
        assert_eq!(count_components(&s), 1);
        // One pixel per column.
        for x in 10..110 {
            assert!((0..20).filter(|&y| s.get(x, y)).count() <= 1);
        }
    }

    #[test]
    fn filled_square_stays_one_component() {
        let mut m = Mask::empty(40, 40);
        for y in 10..31 {
            for x in 10..31 {
                m.set(x, y, true);
            }
        }
        let s = skeletonize(&m);
        assert!(!s.is_empty());
        assert!(s.pixels().iter().all(|&p| m.contains(p)));
        assert_eq!(count_components(&s), 1);
    }

    #[test]
    fn two_by_two_block_survives() {
        let mut m = Mask::empty(16, 16);
        for (x, y) in [(5, 5), (6, 5), (5, 6), (6, 6)] {
            m.set(x, y, true);
        }
        assert_eq!(count_components(&skeletonize(&m)), 1);
    }

    #[test]
    fn dilate_disk() {
        let mut m = Mask::empty(16, 16);
        m.set(8, 8, true);
        let d = dilate(&m, 2);
        assert_eq!(d.count(), 13);
    }
}

//! Fast marching on the pixel grid.
//!
//! Each pixel is updated from two first-order upwind stencils, one on the
//! axis neighbors (spacing 1) and one on the diagonal neighbors (spacing
//! sqrt 2), and keeps the smaller solution. Fronts propagate through all 8
//! neighbors.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::geom::{Pixel, NEIGHBORS_8};
use crate::image::{Mask, ScalarMap};
use crate::{Error, Result};

/// Arrival times from a seed set; `+inf` where unreachable.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalMap {
    times: ScalarMap,
    seeds: Vec<Pixel>,
}

impl ArrivalMap {
    pub fn times(&self) -> &ScalarMap {
        &self.times
    }

    pub fn seeds(&self) -> &[Pixel] {
        &self.seeds
    }

    pub fn width(&self) -> usize {
        self.times.width()
    }

    pub fn height(&self) -> usize {
        self.times.height()
    }

    /// `+inf` outside the grid.
    pub fn at(&self, p: Pixel) -> f64 {
        if p.in_bounds(self.width(), self.height()) {
            self.times.at(p)
        } else {
            f64::INFINITY
        }
    }

    /// Pixel of largest finite arrival inside `mask`; ties go to raster order.
    pub fn latest_in(&self, mask: &Mask) -> Option<(Pixel, f64)> {
        let mut best: Option<(Pixel, f64)> = None;
        for p in mask.pixels() {
            let t = self.at(p);
            if t.is_finite() && best.is_none_or(|(_, b)| t > b) {
                best = Some((p, t));
            }
        }
        best
    }
}

const AXIS: [[Pixel; 2]; 2] = [[Pixel::new(-1, 0), Pixel::new(1, 0)], [Pixel::new(0, -1), Pixel::new(0, 1)]];
const DIAG: [[Pixel; 2]; 2] = [[Pixel::new(-1, -1), Pixel::new(1, 1)], [Pixel::new(1, -1), Pixel::new(-1, 1)]];

#[derive(PartialEq)]
struct Entry {
    time: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Min-heap on (time, index).
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Arrival times of fronts leaving `seeds` with local speed `speed`.
pub fn fast_march(speed: &ScalarMap, seeds: &[Pixel]) -> Result<ArrivalMap> {
    fast_march_until(speed, seeds, None)
}

/// As [`fast_march`], but stops once `target` is frozen. Pixels not yet
/// frozen at that point stay `+inf`.
pub fn fast_march_until(speed: &ScalarMap, seeds: &[Pixel], target: Option<Pixel>) -> Result<ArrivalMap> {
    let (w, h) = (speed.width(), speed.height());
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    if let Some(bad) = seeds.iter().find(|p| !p.in_bounds(w, h)) {
        return Err(Error::InvalidParameter(format!("seed ({}, {}) outside the grid", bad.x, bad.y)));
    }
    if speed.data().iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("speed must be non-negative".into()));
    }
    let mut times = vec![f64::INFINITY; w * h];
    let mut frozen = vec![false; w * h];
    let mut heap = BinaryHeap::new();
    let mut seed_list: Vec<Pixel> = seeds.to_vec();
    seed_list.sort_by_key(|p| (p.y, p.x));
    seed_list.dedup();
    for p in &seed_list {
        let i = p.index(w);
        times[i] = 0.0;
        heap.push(Entry { time: 0.0, index: i });
    }
    let target_index = target.filter(|p| p.in_bounds(w, h)).map(|p| p.index(w));
    while let Some(Entry { time, index }) = heap.pop() {
        if frozen[index] || time > times[index] {
            continue;
        }
        frozen[index] = true;
        if Some(index) == target_index {
            break;
        }
        let p = Pixel::new((index % w) as i32, (index / w) as i32);
        for d in NEIGHBORS_8 {
            let q = p + d;
            if !q.in_bounds(w, h) {
                continue;
            }
            let qi = q.index(w);
            if frozen[qi] {
                continue;
            }
            let s = speed.at(q);
            if s <= 0.0 {
                continue;
            }
            let t = update(&times, &frozen, w, h, q, 1.0 / s);
            if t < times[qi] {
                times[qi] = t;
                heap.push(Entry { time: t, index: qi });
            }
        }
    }
    for (t, f) in times.iter_mut().zip(&frozen) {
        if !f {
            *t = f64::INFINITY;
        }
    }
    Ok(ArrivalMap { times: ScalarMap::new(w, h, times)?, seeds: seed_list })
}

fn frozen_min(times: &[f64], frozen: &[bool], w: usize, h: usize, p: Pixel, pair: &[Pixel; 2]) -> f64 {
    pair.iter()
        .map(|d| p + *d)
        .filter(|q| q.in_bounds(w, h) && frozen[q.index(w)])
        .map(|q| times[q.index(w)])
        .fold(f64::INFINITY, f64::min)
}

fn update(times: &[f64], frozen: &[bool], w: usize, h: usize, p: Pixel, slowness: f64) -> f64 {
    let axis = [frozen_min(times, frozen, w, h, p, &AXIS[0]), frozen_min(times, frozen, w, h, p, &AXIS[1])];
    let diag = [frozen_min(times, frozen, w, h, p, &DIAG[0]), frozen_min(times, frozen, w, h, p, &DIAG[1])];
    solve_stencil(axis, slowness).min(solve_stencil(diag, slowness * core::f64::consts::SQRT_2))
}

/// Upwind solution of `sum (t - v_k)^2 = step^2` over the finite `v_k` below `t`.
fn solve_stencil(mut v: [f64; 2], step: f64) -> f64 {
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if !v[0].is_finite() {
        return f64::INFINITY;
    }
    let one = v[0] + step;
    if one <= v[1] {
        return one;
    }
    let diff = v[0] - v[1];
    let disc = 2.0 * step * step - diff * diff;
    0.5 * (v[0] + v[1] + disc.max(0.0).sqrt())
}

/// Steepest 8-neighbor descent from `start` until a seed is reached.
pub fn backtrace(arrival: &ArrivalMap, start: Pixel) -> Result<Vec<Pixel>> {
    let t0 = arrival.at(start);
    if !t0.is_finite() {
        return Err(Error::Unreachable(start.x, start.y));
    }
    let mut path = vec![start];
    let mut cur = start;
    let mut t = t0;
    while t > 0.0 {
        let mut next = None;
        let mut best = t;
        for d in NEIGHBORS_8 {
            let q = cur + d;
            let tq = arrival.at(q);
            if tq < best {
                best = tq;
                next = Some(q);
            }
        }
        match next {
            Some(q) => {
                path.push(q);
                cur = q;
                t = best;
            }
            None => return Err(Error::Unreachable(cur.x, cur.y)),
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_seeds_rejected() {
        let s = ScalarMap::filled(20, 20, 1.0);
        assert_eq!(fast_march(&s, &[]).unwrap_err(), Error::EmptySeeds);
    }

    #[test]
    fn seeds_are_zero_and_axis_is_exact() {
        let s = ScalarMap::filled(30, 20, 1.0);
        let a = fast_march(&s, &[Pixel::new(5, 10)]).unwrap();
        assert_eq!(a.at(Pixel::new(5, 10)), 0.0);
        for x in 6..30 {
            assert!((a.at(Pixel::new(x, 10)) - (x - 5) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_is_exact() {
        let s = ScalarMap::filled(30, 30, 1.0);
        let a = fast_march(&s, &[Pixel::new(0, 0)]).unwrap();
        for k in 1..30 {
            assert!((a.at(Pixel::new(k, k)) - k as f64 * core::f64::consts::SQRT_2).abs() < 1e-9);
        }
    }

    #[test]
    fn speed_scales_time() {
        let s = ScalarMap::filled(25, 25, 2.0);
        let a = fast_march(&s, &[Pixel::new(12, 12)]).unwrap();
        assert!((a.at(Pixel::new(22, 12)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_speed_wall_blocks() {
        let mut s = ScalarMap::filled(20, 20, 1.0);
        for y in 0..20 {
            s.set(10, y, 0.0);
        }
        let a = fast_march(&s, &[Pixel::new(2, 5)]).unwrap();
        assert!(a.at(Pixel::new(10, 3)).is_infinite());
        assert!(a.at(Pixel::new(15, 3)).is_infinite());
        assert!(a.at(Pixel::new(9, 3)).is_finite());
        assert!(matches!(backtrace(&a, Pixel::new(15, 3)), Err(Error::Unreachable(15, 3))));
    }

    #[test]
    fn early_stop_freezes_target() {
        let s = ScalarMap::filled(40, 40, 1.0);
        let full = fast_march(&s, &[Pixel::new(0, 0)]).unwrap();
        let part = fast_march_until(&s, &[Pixel::new(0, 0)], Some(Pixel::new(5, 5))).unwrap();
        assert_eq!(part.at(Pixel::new(5, 5)), full.at(Pixel::new(5, 5)));
        assert!(part.at(Pixel::new(39, 39)).is_infinite());
    }

    #[test]
    fn backtrace_on_seed_is_single_pixel() {
        let s = ScalarMap::filled(20, 20, 1.0);
        let a = fast_march(&s, &[Pixel::new(4, 4)]).unwrap();
        assert_eq!(backtrace(&a, Pixel::new(4, 4)).unwrap(), vec![Pixel::new(4, 4)]);
    }

    #[test]
    fn backtrace_descends_to_seed() {
        let s = ScalarMap::filled(60, 60, 1.0);
        let seed = Pixel::new(10, 50);
        let a = fast_march(&s, &[seed]).unwrap();
        let start = Pixel::new(50, 13);
        let path = backtrace(&a, start).unwrap();
        assert_eq!(*path.last().unwrap(), seed);
        assert!(path.windows(2).all(|w| a.at(w[1]) < a.at(w[0])));
        let len = crate::geom::path_length(&path);
        assert!((len - start.dist(seed)).abs() <= 2.0, "{len}");
    }

    #[test]
    fn latest_in_mask() {
        let s = ScalarMap::filled(20, 20, 1.0);
        let a = fast_march(&s, &[Pixel::new(0, 0)]).unwrap();
        let m = Mask::from_pixels(20, 20, &[Pixel::new(3, 3), Pixel::new(10, 1), Pixel::new(2, 2)]);
        assert_eq!(a.latest_in(&m).unwrap().0, Pixel::new(10, 1));
        assert!(a.latest_in(&Mask::empty(20, 20)).is_none());
    }
}

//! Centerline scores, landmark error and run length.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::geom::Pixel;
use crate::{Error, Result};

/// Radius used for true-positive matching unless configured otherwise.
pub const DEFAULT_MATCH_RADIUS: f64 = 2.0;
pub const DEFAULT_SUFFICIENCY_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionScore {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub tre: Option<f64>,
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn disk_offsets(radius: f64) -> Vec<Pixel> {
    let r = radius.floor() as i32;
    let r2 = radius * radius;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx * dx + dy * dy) as f64 <= r2 {
                out.push(Pixel::new(dx, dy));
            }
        }
    }
    out
}

fn covered_fraction(from: &BTreeSet<Pixel>, to: &BTreeSet<Pixel>, offsets: &[Pixel]) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    let hits = from.iter().filter(|&&p| offsets.iter().any(|&d| to.contains(&(p + d)))).count();
    hits as f64 / from.len() as f64
}

/// Precision is the share of extracted pixels within `radius` of a truth
/// pixel; recall is the share of truth pixels within `radius` of an
/// extracted pixel. Inputs are treated as sets.
pub fn score_centerline(extracted: &[Pixel], truth: &[Pixel], radius: f64) -> Result<ExtractionScore> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("match radius {radius} must be positive")));
    }
    let ext: BTreeSet<Pixel> = extracted.iter().copied().collect();
    let tru: BTreeSet<Pixel> = truth.iter().copied().collect();
    let offsets = disk_offsets(radius);
    let precision = covered_fraction(&ext, &tru, &offsets);
    let recall = covered_fraction(&tru, &ext, &offsets);
    Ok(ExtractionScore { precision, recall, f_measure: f_measure(precision, recall), tre: None })
}

/// Mean Euclidean distance over ids present in both maps.
pub fn tre(estimated: &BTreeMap<u32, (f64, f64)>, truth: &BTreeMap<u32, (f64, f64)>) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (id, e) in estimated {
        if let Some(t) = truth.get(id) {
            sum += ((e.0 - t.0).powi(2) + (e.1 - t.1).powi(2)).sqrt();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoSharedIds);
    }
    Ok(sum / n as f64)
}

/// Number of leading frames whose F-measure exceeds `threshold`.
pub fn sufficiency_run_length(f_measures: &[f64], threshold: f64) -> usize {
    f_measures.iter().take_while(|&&f| f > threshold).count()
}

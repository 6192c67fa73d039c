//! Turns matched points into a connected centerline and grows branches that
//! appear only in the destination frame.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::edt::distance_transform;
use crate::fmm::{backtrace, fast_march, fast_march_until};
use crate::geom::{path_length, Pixel};
use crate::graph::{PathGraphBuilder, VesselGraph};
use crate::image::{Mask, ScalarMap};
use crate::morphology::{binarize, dilate, label_components, DEFAULT_THRESHOLD};
use crate::mrf::MatchedPoint;
use crate::{Error, Result};

pub const DEFAULT_SPEED_EPSILON: f64 = 1e-3;
pub const DEFAULT_MAX_RADIUS: f64 = 8.0;
pub const DEFAULT_MAX_NEW_BRANCHES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectParams {
    /// Added to vesselness so minimal paths can cross weak gaps.
    pub speed_epsilon: f64,
    /// Minimum crop margin around a connection, in pixels.
    pub min_margin: i32,
    /// Crop margin as a fraction of the endpoint distance.
    pub margin_ratio: f64,
}

impl Default for ConnectParams {
    fn default() -> Self {
        ConnectParams { speed_epsilon: DEFAULT_SPEED_EPSILON, min_margin: 10, margin_ratio: 0.5 }
    }
}

/// Minimal path from `from` to `to` under `speed`, computed on a crop that
/// contains both points plus a margin. Both endpoints are included.
pub fn minimal_path(speed: &ScalarMap, from: Pixel, to: Pixel, params: &ConnectParams) -> Result<Vec<Pixel>> {
    let (w, h) = (speed.width() as i32, speed.height() as i32);
    let from = from.clamp_to(w as usize, h as usize);
    let to = to.clamp_to(w as usize, h as usize);
    if from == to {
        return Ok(vec![from]);
    }
    let margin = (params.margin_ratio * from.dist(to)).ceil().max(params.min_margin as f64) as i32;
    let x0 = (from.x.min(to.x) - margin).max(0);
    let y0 = (from.y.min(to.y) - margin).max(0);
    let x1 = (from.x.max(to.x) + margin).min(w - 1);
    let y1 = (from.y.max(to.y) + margin).min(h - 1);
    let crop = speed.crop(x0 as usize, y0 as usize, (x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    let origin = Pixel::new(x0, y0);
    let arrival = fast_march_until(&crop, &[from - origin], Some(to - origin))?;
    let mut path = backtrace(&arrival, to - origin)?;
    path.reverse();
    Ok(path.into_iter().map(|p| p + origin).collect())
}

/// Speed map for reconnection: vesselness plus a small floor.
pub fn connection_speed(vesselness: &ScalarMap, epsilon: f64) -> ScalarMap {
    let mut s = vesselness.clone();
    for v in s.data_mut() {
        *v = v.max(0.0) + epsilon;
    }
    s
}

/// Pairs of surviving source ids whose destinations get joined.
///
/// Source edges with both ends surviving are kept. Each connected cluster
/// of dropped points is replaced by a Euclidean minimum spanning tree over
/// the surviving points bordering it, so survivors that were connected in
/// the source stay connected.
pub fn connection_plan(source: &VesselGraph, targets: &BTreeMap<u32, Pixel>) -> Vec<(u32, u32)> {
    let mut plan = BTreeSet::new();
    for &(a, b) in source.edges() {
        if targets.contains_key(&a) && targets.contains_key(&b) {
            plan.insert((a, b));
        }
    }
    let mut seen = BTreeSet::new();
    for p in source.points() {
        if targets.contains_key(&p.id) || seen.contains(&p.id) {
            continue;
        }
        let mut stack = vec![p.id];
        seen.insert(p.id);
        let mut border = BTreeSet::new();
        while let Some(id) = stack.pop() {
            for n in source.neighbors(id) {
                if targets.contains_key(&n) {
                    border.insert(n);
                } else if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        let border: Vec<u32> = border.into_iter().collect();
        for (a, b) in euclidean_mst(&border, targets) {
            plan.insert((a.min(b), a.max(b)));
        }
    }
    plan.into_iter().collect()
}

/// Prim's algorithm from the smallest id; ties go to the smaller index.
fn euclidean_mst(ids: &[u32], targets: &BTreeMap<u32, Pixel>) -> Vec<(u32, u32)> {
    if ids.len() < 2 {
        return Vec::new();
    }
    let pos: Vec<Pixel> = ids.iter().map(|id| targets[id]).collect();
    let mut in_tree = vec![false; ids.len()];
    let mut best = vec![(i64::MAX, 0usize); ids.len()];
    in_tree[0] = true;
    for j in 1..ids.len() {
        best[j] = (pos[0].dist2(pos[j]), 0);
    }
    let mut out = Vec::with_capacity(ids.len() - 1);
    for _ in 1..ids.len() {
        let mut pick = None;
        for j in 0..ids.len() {
            if !in_tree[j] && pick.is_none_or(|k: usize| best[j].0 < best[k].0) {
                pick = Some(j);
            }
        }
        let j = pick.unwrap();
        in_tree[j] = true;
        out.push((ids[best[j].1], ids[j]));
        for k in 0..ids.len() {
            if !in_tree[k] {
                let d = pos[j].dist2(pos[k]);
                if d < best[k].0 {
                    best[k] = (d, j);
                }
            }
        }
    }
    out
}

/// Connects the matched destination points along minimal paths on the
/// vesselness map. Matched points keep their source ids (a point landing on
/// a pixel already taken reuses that pixel's id); path pixels get fresh ids.
pub fn connect_points(
    source: &VesselGraph,
    matched: &[MatchedPoint],
    vesselness: &ScalarMap,
    params: &ConnectParams,
) -> Result<VesselGraph> {
    if matched.len() < 2 {
        return Err(Error::DegenerateResult);
    }
    let (w, h) = (vesselness.width(), vesselness.height());
    let targets: BTreeMap<u32, Pixel> = matched.iter().map(|m| (m.id, m.target.clamp_to(w, h))).collect();
    let speed = connection_speed(vesselness, params.speed_epsilon);
    let mut builder = PathGraphBuilder::default();
    let mut next = source.points().iter().map(|p| p.id + 1).max().unwrap_or(0);
    next = next.max(matched.iter().map(|m| m.id + 1).max().unwrap_or(0));
    let mut alias = BTreeMap::new();
    for (&id, &p) in &targets {
        alias.insert(id, builder.add_point_with_id(p, id));
    }
    for (a, b) in connection_plan(source, &targets) {
        let path = minimal_path(&speed, targets[&a], targets[&b], params)?;
        builder.add_path(&path, &mut next);
        // Endpoints are already present, so the path starts and ends on them.
        debug_assert_eq!(builder.id_at(targets[&a]), Some(alias[&a]));
    }
    builder.build()
}

/// How the maximum vessel radius is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusPolicy {
    Fixed(f64),
    /// 95th percentile of the in-mask distance transform along the centerline.
    Percentile95,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthParams {
    pub threshold: f64,
    pub max_radius: RadiusPolicy,
    pub max_new_branches: usize,
    /// Mask components within this distance of the centerline are kept.
    pub attach_radius: i32,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams {
            threshold: DEFAULT_THRESHOLD,
            max_radius: RadiusPolicy::Fixed(DEFAULT_MAX_RADIUS),
            max_new_branches: DEFAULT_MAX_NEW_BRANCHES,
            attach_radius: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub graph: VesselGraph,
    /// Added paths, each running from the new tip back to the centerline.
    /// Tips sit on the medial axis; the end cap of the vessel is trimmed.
    pub branches: Vec<Vec<Pixel>>,
    pub max_radius: f64,
}

/// Mask pixels in components that touch the dilated centerline.
pub fn attached_mask(mask: &Mask, centerline: &[Pixel], attach_radius: i32) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let near = dilate(&Mask::from_pixels(w, h, centerline), attach_radius);
    let (labels, n) = label_components(mask);
    let mut keep = vec![false; n as usize + 1];
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 && near.data()[i] {
            keep[l as usize] = true;
        }
    }
    let mut out = Mask::empty(w, h);
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 && keep[l as usize] {
            out.set(i % w, i / w, true);
        }
    }
    out
}

fn percentile95(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let rank = (0.95 * (values.len() - 1) as f64).round() as usize;
    Some(values[rank])
}

/// Number of leading path pixels on the vessel's end cap: the distance to
/// the background rises strictly from the boundary pixel up to the medial
/// axis, where the branch really ends.
fn cap_length(path: &[Pixel], depth: &ScalarMap) -> usize {
    let mut k = 0;
    while k + 1 < path.len() && depth.at(path[k + 1]) > depth.at(path[k]) {
        k += 1;
    }
    k
}

/// Repeatedly adds the minimal path from the latest-arriving vessel pixel
/// back to the centerline, while that path is longer than the maximum vessel
/// radius. Fronts travel at the in-mask distance-to-background speed.
pub fn extract_new_branches(v: &VesselGraph, vesselness: &ScalarMap, params: &GrowthParams) -> Result<Growth> {
    let (w, h) = (vesselness.width(), vesselness.height());
    let mut seeds: Vec<Pixel> = v.rasterize().into_iter().filter(|p| p.in_bounds(w, h)).collect();
    let unchanged = |r: f64| Growth { graph: v.clone(), branches: Vec::new(), max_radius: r };
    let fixed = match params.max_radius {
        RadiusPolicy::Fixed(r) => r,
        RadiusPolicy::Percentile95 => DEFAULT_MAX_RADIUS,
    };
    if seeds.is_empty() {
        return Ok(unchanged(fixed));
    }
    let mask = attached_mask(&binarize(vesselness, params.threshold), &seeds, params.attach_radius);
    if mask.is_empty() {
        return Ok(unchanged(fixed));
    }
    let speed = distance_transform(&mask.invert()).unwrap_or_else(|_| ScalarMap::filled(w, h, 1.0));
    let max_radius = match params.max_radius {
        RadiusPolicy::Fixed(r) => r,
        RadiusPolicy::Percentile95 => {
            percentile95(seeds.iter().filter(|p| mask.contains(**p)).map(|p| speed.at(*p)).collect()).unwrap_or(fixed)
        }
    };
    let mut builder = PathGraphBuilder::default();
    let mut next = v.points().iter().map(|p| p.id + 1).max().unwrap_or(0);
    for p in v.points() {
        builder.add_point_with_id(p.pos, p.id);
    }
    for &(a, b) in v.edges() {
        builder.connect(a, b);
    }
    let mut branches = Vec::new();
    for _ in 0..params.max_new_branches {
        let arrival = fast_march(&speed, &seeds)?;
        let Some((tip, _)) = arrival.latest_in(&mask) else { break };
        let mut path = backtrace(&arrival, tip)?;
        if path_length(&path) <= max_radius {
            break;
        }
        path.drain(..cap_length(&path, &speed));
        let first_new = builder.id_at(*path.last().unwrap()).is_none();
        if first_new {
            // The path ends on a seed pixel that lies on an edge between
            // points; attach it to the nearest existing point.
            let end = *path.last().unwrap();
            let nearest = v.points().iter().min_by_key(|p| (p.pos.dist2(end), p.id)).map(|p| p.id);
            let end_id = builder.ensure(end, &mut next);
            if let Some(n) = nearest {
                builder.connect(end_id, n);
            }
        }
        builder.add_path(&path, &mut next);
        seeds.extend(path.iter().copied());
        branches.push(path);
    }
    if branches.is_empty() {
        return Ok(unchanged(max_radius));
    }
    Ok(Growth { graph: builder.build()?, branches, max_radius })
}

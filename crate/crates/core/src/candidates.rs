//! Keypoint, branch and point searches that produce the correspondence
//! candidates (MRF labels) for every source vessel point.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::align::GlobalShift;
use crate::descriptor::{descriptor_distance, Descriptor, DescriptorCache};
use crate::geom::Pixel;
use crate::graph::{Branch, VesselGraph};

/// Search-window and count parameters of the hierarchical search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Matches kept per keypoint.
    pub n_k: usize,
    pub w_k: usize,
    pub h_k: usize,
    /// Candidates kept per point window.
    pub n_l: usize,
    pub w_p: usize,
    pub h_p: usize,
    pub nms_radius: f64,
    /// Side of the single window used when the hierarchy is disabled.
    pub flat_window: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { n_k: 2, w_k: 101, h_k: 101, n_l: 5, w_p: 21, h_p: 21, nms_radius: 3.0, flat_window: 81 }
    }
}

impl SearchParams {
    /// Maximum candidate count per point, `n_l * (2 n_k + 1)`.
    pub fn n_p(&self) -> usize {
        self.n_l * (2 * self.n_k + 1)
    }
}

/// A destination pixel and its descriptor distance to the source point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub pos: Pixel,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointMatch {
    pub keypoint_id: u32,
    /// Ascending by distance, at most `n_k` entries.
    pub matches: Vec<Match>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchCandidates {
    pub branch_index: usize,
    /// Offsets applied on top of the global shift; the zero vector is last.
    pub displacements: Vec<Pixel>,
}

/// Per-point candidate lists, indexed like the graph's points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub lists: Vec<Vec<Match>>,
}

impl CandidateSet {
    pub fn total(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

/// Dense scan of the `w x h` window centered at `center` (clipped to the
/// frame), then greedy non-max suppression: candidates are taken in order of
/// increasing distance and rejected when closer than `nms_radius` to an
/// accepted one. Returns at most `keep` matches, best first.
pub fn window_search(
    dst: &mut DescriptorCache<'_>,
    reference: &Descriptor,
    center: Pixel,
    w: usize,
    h: usize,
    nms_radius: f64,
    keep: usize,
) -> Vec<Match> {
    let (iw, ih) = (dst.image().width() as i32, dst.image().height() as i32);
    let (hw, hh) = ((w / 2) as i32, (h / 2) as i32);
    let x0 = (center.x - hw).max(0);
    let x1 = (center.x - hw + w as i32 - 1).min(iw - 1);
    let y0 = (center.y - hh).max(0);
    let y1 = (center.y - hh + h as i32 - 1).min(ih - 1);
    let mut scored = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = Pixel::new(x, y);
            let d = descriptor_distance(reference, dst.get(p));
            scored.push(Match { pos: p, distance: d });
        }
    }
    scored.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.pos.y.cmp(&b.pos.y)).then(a.pos.x.cmp(&b.pos.x)));
    let r2 = nms_radius * nms_radius;
    let mut kept: Vec<Match> = Vec::with_capacity(keep);
    for m in scored {
        if kept.len() >= keep {
            break;
        }
        if kept.iter().all(|k| (k.pos.dist2(m.pos) as f64) >= r2) {
            kept.push(m);
        }
    }
    kept
}

/// Up to `n_k` matches per keypoint inside the `w_k x h_k` window centered
/// on the globally shifted keypoint.
pub fn match_keypoints(
    src: &mut DescriptorCache<'_>,
    dst: &mut DescriptorCache<'_>,
    graph: &VesselGraph,
    shift: &GlobalShift,
    params: &SearchParams,
) -> Vec<KeypointMatch> {
    graph
        .keypoints()
        .iter()
        .map(|&k| {
            let p = graph.position(k).expect("keypoint in graph");
            let reference = src.get(p).clone();
            let matches =
                window_search(dst, &reference, p + shift.offset(), params.w_k, params.h_k, params.nms_radius, params.n_k);
            KeypointMatch { keypoint_id: k, matches }
        })
        .collect()
}

/// Branch displacement candidates from both endpoint matches plus the zero
/// vector. Displacements are measured from the globally shifted keypoint,
/// so the zero vector stands for "global shift only".
pub fn branch_candidates(
    branch_index: usize,
    branch: &Branch,
    graph: &VesselGraph,
    matches_a: &KeypointMatch,
    matches_b: &KeypointMatch,
    shift: &GlobalShift,
) -> BranchCandidates {
    let pa = graph.position(branch.endpoint_a).expect("endpoint in graph") + shift.offset();
    let pb = graph.position(branch.endpoint_b).expect("endpoint in graph") + shift.offset();
    let mut displacements = Vec::new();
    let raw = matches_a.matches.iter().map(|m| m.pos - pa).chain(matches_b.matches.iter().map(|m| m.pos - pb));
    for d in raw {
        if d != Pixel::ZERO && !displacements.contains(&d) {
            displacements.push(d);
        }
    }
    displacements.push(Pixel::ZERO);
    BranchCandidates { branch_index, displacements }
}

/// Candidates for one point: one `w_p x h_p` window per displacement,
/// `n_l` best per window, merged with duplicates resolved to the smaller
/// distance, sorted best first and capped at `n_p`.
pub fn point_candidates(
    src: &mut DescriptorCache<'_>,
    dst: &mut DescriptorCache<'_>,
    point: Pixel,
    shift: &GlobalShift,
    displacements: &[Pixel],
    params: &SearchParams,
) -> Vec<Match> {
    let reference = src.get(point).clone();
    let mut all: Vec<Match> = Vec::new();
    for &d in displacements {
        let center = point + shift.offset() + d;
        for m in window_search(dst, &reference, center, params.w_p, params.h_p, params.nms_radius, params.n_l) {
            match all.iter_mut().find(|o| o.pos == m.pos) {
                Some(o) => {
                    if m.distance < o.distance {
                        o.distance = m.distance;
                    }
                }
                None => all.push(m),
            }
        }
    }
    sort_matches(&mut all);
    all.truncate(params.n_p());
    all
}

/// Candidates without the keypoint/branch tiers: one enlarged window per
/// point at the globally shifted position, keeping `n_p`.
pub fn flat_point_candidates(
    src: &mut DescriptorCache<'_>,
    dst: &mut DescriptorCache<'_>,
    point: Pixel,
    shift: &GlobalShift,
    params: &SearchParams,
) -> Vec<Match> {
    let reference = src.get(point).clone();
    window_search(
        dst,
        &reference,
        point + shift.offset(),
        params.flat_window,
        params.flat_window,
        params.nms_radius,
        params.n_p(),
    )
}

fn sort_matches(v: &mut [Match]) {
    v.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.pos.y.cmp(&b.pos.y)).then(a.pos.x.cmp(&b.pos.x)));
}

/// Everything the hierarchical search produced for one frame pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchOutcome {
    pub keypoint_matches: Vec<KeypointMatch>,
    pub branch_candidates: Vec<BranchCandidates>,
    pub candidates: CandidateSet,
}

/// Runs the keypoint, branch and point tiers over the whole graph. Points on
/// several branches (keypoints) search the union of those branches'
/// displacements and keep the `n_p` best results.
pub fn hierarchical_search(
    src: &mut DescriptorCache<'_>,
    dst: &mut DescriptorCache<'_>,
    graph: &VesselGraph,
    shift: &GlobalShift,
    params: &SearchParams,
) -> SearchOutcome {
    let keypoint_matches = match_keypoints(src, dst, graph, shift, params);
    let by_id = |id: u32| keypoint_matches.iter().find(|m| m.keypoint_id == id);
    let empty = |id: u32| KeypointMatch { keypoint_id: id, matches: Vec::new() };
    let branch_cands: Vec<BranchCandidates> = graph
        .branches()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let ma = by_id(b.endpoint_a).cloned().unwrap_or_else(|| empty(b.endpoint_a));
            let mb = by_id(b.endpoint_b).cloned().unwrap_or_else(|| empty(b.endpoint_b));
            branch_candidates(i, b, graph, &ma, &mb, shift)
        })
        .collect();

    let mut point_branches: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); graph.len()];
    for (bi, b) in graph.branches().iter().enumerate() {
        for id in &b.point_ids {
            point_branches[graph.index_of(*id).unwrap()].insert(bi);
        }
    }
    let mut lists = Vec::with_capacity(graph.len());
    for (i, p) in graph.points().iter().enumerate() {
        let mut disps: Vec<Pixel> = Vec::new();
        for &bi in &point_branches[i] {
            for &d in &branch_cands[bi].displacements {
                if d != Pixel::ZERO && !disps.contains(&d) {
                    disps.push(d);
                }
            }
        }
        disps.push(Pixel::ZERO);
        lists.push(point_candidates(src, dst, p.pos, shift, &disps, params));
    }
    SearchOutcome { keypoint_matches, branch_candidates: branch_cands, candidates: CandidateSet { lists } }
}

/// Single-tier variant: every point searches one enlarged window.
pub fn flat_search(
    src: &mut DescriptorCache<'_>,
    dst: &mut DescriptorCache<'_>,
    graph: &VesselGraph,
    shift: &GlobalShift,
    params: &SearchParams,
) -> SearchOutcome {
    let lists = graph.points().iter().map(|p| flat_point_candidates(src, dst, p.pos, shift, params)).collect();
    SearchOutcome { candidates: CandidateSet { lists }, ..SearchOutcome::default() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::resample_centerline;
    use crate::image::GrayImage;

    fn textured(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let v = (x as u32).wrapping_mul(2654435761) ^ (y as u32).wrapping_mul(40503);
            (v.wrapping_mul(2246822519) >> 24) as u8
        })
        .unwrap()
    }

    fn branch(a: u32, b: u32) -> Branch {
        Branch { endpoint_a: a, endpoint_b: b, point_ids: vec![a, b] }
    }

    fn two_point_graph() -> VesselGraph {
        resample_centerline(&[vec![(10.0, 10.0), (14.0, 10.0)]], 5.0).unwrap()
    }

    fn km(id: u32, pos: &[(i32, i32)]) -> KeypointMatch {
        KeypointMatch {
            keypoint_id: id,
            matches: pos.iter().map(|&(x, y)| Match { pos: Pixel::new(x, y), distance: 0.1 }).collect(),
        }
    }

    #[test]
    fn branch_candidates_fallback_and_dedup() {
        let g = two_point_graph();
        let b = branch(0, 1);
        let none = branch_candidates(0, &b, &g, &km(0, &[]), &km(1, &[]), &GlobalShift::zero());
        assert_eq!(none.displacements, vec![Pixel::ZERO]);

        let four = branch_candidates(
            0,
            &b,
            &g,
            &km(0, &[(11, 10), (10, 12)]),
            &km(1, &[(17, 10), (14, 7)]),
            &GlobalShift::zero(),
        );
        assert_eq!(four.displacements.len(), 5);
        assert_eq!(*four.displacements.last().unwrap(), Pixel::ZERO);

        let same = branch_candidates(0, &b, &g, &km(0, &[(13, 13)]), &km(1, &[(17, 13)]), &GlobalShift::zero());
        assert_eq!(same.displacements, vec![Pixel::new(3, 3), Pixel::ZERO]);
    }

    #[test]
    fn self_match_ranks_own_pixel_first() {
        let img = textured(64, 64);
        let mut src = DescriptorCache::new(&img);
        let mut dst = DescriptorCache::new(&img);
        let c = point_candidates(&mut src, &mut dst, Pixel::new(30, 30), &GlobalShift::zero(), &[Pixel::ZERO], &SearchParams::default());
        assert_eq!(c[0].pos, Pixel::new(30, 30));
        assert_eq!(c[0].distance, 0.0);
        assert!(c.len() <= 5);
    }

    #[test]
    fn candidate_count_bounded_and_unique() {
        let img = textured(80, 80);
        let mut src = DescriptorCache::new(&img);
        let mut dst = DescriptorCache::new(&img);
        let disps = [Pixel::new(3, 0), Pixel::new(-3, 2), Pixel::new(0, 4), Pixel::new(1, 1), Pixel::ZERO];
        let params = SearchParams::default();
        let c = point_candidates(&mut src, &mut dst, Pixel::new(40, 40), &GlobalShift::zero(), &disps, &params);
        assert!(c.len() <= 25);
        let unique: BTreeSet<Pixel> = c.iter().map(|m| m.pos).collect();
        assert_eq!(unique.len(), c.len());
        // Heavily overlapping windows revisit pixels; each appears once.
        assert!(c.len() < 25);
    }

    #[test]
    fn nms_separates_matches() {
        let img = textured(64, 64);
        let mut src = DescriptorCache::new(&img);
        let mut dst = DescriptorCache::new(&img);
        let reference = src.get(Pixel::new(32, 32)).clone();
        let m = window_search(&mut dst, &reference, Pixel::new(32, 32), 21, 21, 3.0, 10);
        assert_eq!(m.len(), 10);
        for (i, a) in m.iter().enumerate() {
            for b in &m[i + 1..] {
                assert!(a.pos.dist(b.pos) >= 3.0);
            }
        }
        assert!(m.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn windows_are_clipped_to_frame() {
        let img = textured(40, 40);
        let mut src = DescriptorCache::new(&img);
        let mut dst = DescriptorCache::new(&img);
        let reference = src.get(Pixel::new(1, 1)).clone();
        let m = window_search(&mut dst, &reference, Pixel::new(-5, 45), 21, 21, 3.0, 5);
        assert!(m.iter().all(|c| img.contains(c.pos)));
        assert!(!m.is_empty());
        let none = window_search(&mut dst, &reference, Pixel::new(-50, -50), 21, 21, 3.0, 5);
        assert!(none.is_empty());
    }
}

//! Vessel centerline structures: sampled points, connectivity, keypoints and branches.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;

use crate::geom::{self, Pixel};
use crate::image::Mask;
use crate::{Error, Result};

/// Endpoints closer than this (in pixels) are merged when assembling chains.
pub const MERGE_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VesselPoint {
    pub id: u32,
    pub pos: Pixel,
}

/// Centerline segment between two keypoints. `point_ids` runs from
/// `endpoint_a` to `endpoint_b`; both ends are equal for self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub endpoint_a: u32,
    pub endpoint_b: u32,
    pub point_ids: Vec<u32>,
}

impl Branch {
    pub fn is_self_loop(&self) -> bool {
        self.endpoint_a == self.endpoint_b
    }
}

/// Undirected graph of centerline points. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VesselGraph {
    points: Vec<VesselPoint>,
    edges: Vec<(u32, u32)>,
    keypoints: Vec<u32>,
    branches: Vec<Branch>,
    index: BTreeMap<u32, usize>,
    adjacency: Vec<Vec<usize>>,
}

impl VesselGraph {
    /// Validates ids and edges. Edges are stored as `(min, max)` pairs;
    /// self-edges and duplicates are rejected.
    pub fn new(points: Vec<VesselPoint>, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.id, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate point id {}", p.id)));
            }
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); points.len()];
        let mut norm_edges = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) references a missing id")));
            };
            if a == b {
                return Err(Error::InvalidGraph(format!("self-edge on {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            norm_edges.push(e);
            adjacency[ia].push(ib);
            adjacency[ib].push(ia);
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&j| points[j].id);
        }
        Ok(VesselGraph { points, edges: norm_edges, keypoints: Vec::new(), branches: Vec::new(), index, adjacency })
    }

    /// Like [`VesselGraph::new`], then detects keypoints and splits branches.
    pub fn with_structure(points: Vec<VesselPoint>, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut g = Self::new(points, edges)?;
        g.compute_structure()?;
        Ok(g)
    }

    /// Recomputes keypoints and branches from the connectivity.
    pub fn compute_structure(&mut self) -> Result<()> {
        self.keypoints = detect_keypoints(self);
        self.branches = split_branches(self)?;
        Ok(())
    }

    /// Installs externally supplied keypoints and branches after checking
    /// them against the connectivity.
    pub fn set_structure(&mut self, keypoints: Vec<u32>, branches: Vec<Branch>) -> Result<()> {
        for k in &keypoints {
            if !self.index.contains_key(k) {
                return Err(Error::InvalidGraph(format!("keypoint {k} is not a point")));
            }
        }
        for b in &branches {
            let (Some(&first), Some(&last)) = (b.point_ids.first(), b.point_ids.last()) else {
                return Err(Error::InvalidGraph("empty branch".into()));
            };
            if first != b.endpoint_a || last != b.endpoint_b {
                return Err(Error::InvalidGraph("branch ends do not match its endpoints".into()));
            }
            for w in b.point_ids.windows(2) {
                if !self.has_edge(w[0], w[1]) {
                    return Err(Error::InvalidGraph(format!("branch step ({}, {}) is not an edge", w[0], w[1])));
                }
            }
        }
        self.keypoints = keypoints;
        self.branches = branches;
        Ok(())
    }

    pub fn points(&self) -> &[VesselPoint] {
        &self.points
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn keypoints(&self) -> &[u32] {
        &self.keypoints
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn position(&self, id: u32) -> Option<Pixel> {
        self.index_of(id).map(|i| self.points[i].pos)
    }

    pub fn degree(&self, id: u32) -> usize {
        self.index_of(id).map_or(0, |i| self.adjacency[i].len())
    }

    /// Neighbor point indices of the point at `idx`, ordered by id.
    pub fn neighbors_of_index(&self, idx: usize) -> &[usize] {
        &self.adjacency[idx]
    }

    pub fn neighbors(&self, id: u32) -> impl Iterator<Item = u32> + '_ {
        let adj: &[usize] = match self.index_of(id) {
            Some(i) => &self.adjacency[i],
            None => &[],
        };
        adj.iter().map(move |&j| self.points[j].id)
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.neighbors(a).any(|n| n == b)
    }

    /// Edges as point-index pairs, in stored edge order.
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (self.index[&a], self.index[&b])).collect()
    }

    /// One real-valued polyline per branch, following `point_ids`.
    pub fn branch_polylines(&self) -> Vec<Vec<(f64, f64)>> {
        self.branches
            .iter()
            .map(|b| {
                b.point_ids
                    .iter()
                    .map(|id| {
                        let p = self.position(*id).unwrap();
                        (p.x as f64, p.y as f64)
                    })
                    .collect()
            })
            .collect()
    }

    /// All pixels covered by the points and by digital lines along the edges.
    pub fn rasterize(&self) -> Vec<Pixel> {
        let mut set = BTreeSet::new();
        for p in &self.points {
            set.insert(p.pos);
        }
        for &(a, b) in &self.edges {
            for q in geom::line(self.position(a).unwrap(), self.position(b).unwrap()) {
                set.insert(q);
            }
        }
        set.into_iter().collect()
    }

    /// Copy where every edge longer than one pixel step is replaced by a
    /// chain through the pixels of its digital line. Existing ids are kept;
    /// new points get fresh ids above the current maximum.
    pub fn densify(&self) -> Result<VesselGraph> {
        let mut builder = PathGraphBuilder::default();
        let mut next = self.points.iter().map(|p| p.id + 1).max().unwrap_or(0);
        for p in &self.points {
            builder.add_point_with_id(p.pos, p.id);
        }
        for &(a, b) in &self.edges {
            let line = geom::line(self.position(a).unwrap(), self.position(b).unwrap());
            let mut prev: Option<u32> = None;
            for q in line {
                let id = builder.ensure(q, &mut next);
                if let Some(pv) = prev {
                    builder.connect(pv, id);
                }
                prev = Some(id);
            }
        }
        builder.build()
    }

    /// Induced subgraph on the given ids, dropping points left without edges.
    pub fn induced(&self, keep: impl Fn(u32) -> bool) -> Result<VesselGraph> {
        let edges: Vec<(u32, u32)> = self.edges.iter().copied().filter(|&(a, b)| keep(a) && keep(b)).collect();
        let used: BTreeSet<u32> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let points = self.points.iter().copied().filter(|p| used.contains(&p.id)).collect();
        VesselGraph::with_structure(points, edges)
    }

    /// Same ids and edges at new positions.
    pub fn with_positions(&self, mut pos: impl FnMut(&VesselPoint) -> Pixel) -> VesselGraph {
        let mut g = self.clone();
        for p in &mut g.points {
            p.pos = pos(p);
        }
        g
    }
}

/// Incremental builder for graphs made of pixel paths, keyed by pixel.
#[derive(Debug, Default)]
pub struct PathGraphBuilder {
    by_pixel: BTreeMap<Pixel, u32>,
    points: Vec<VesselPoint>,
    edges: BTreeSet<(u32, u32)>,
}

impl PathGraphBuilder {
    pub fn add_point_with_id(&mut self, p: Pixel, id: u32) -> u32 {
        if let Some(&existing) = self.by_pixel.get(&p) {
            return existing;
        }
        self.by_pixel.insert(p, id);
        self.points.push(VesselPoint { id, pos: p });
        id
    }

    /// Id of the point at `p`, creating it with `*next` if absent.
    pub fn ensure(&mut self, p: Pixel, next: &mut u32) -> u32 {
        if let Some(&id) = self.by_pixel.get(&p) {
            return id;
        }
        let id = *next;
        *next += 1;
        self.add_point_with_id(p, id)
    }

    pub fn id_at(&self, p: Pixel) -> Option<u32> {
        self.by_pixel.get(&p).copied()
    }

    pub fn connect(&mut self, a: u32, b: u32) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    /// Adds a path, creating points as needed and linking consecutive pixels.
    pub fn add_path(&mut self, path: &[Pixel], next: &mut u32) {
        let mut prev = None;
        for &q in path {
            let id = self.ensure(q, next);
            if let Some(pv) = prev {
                self.connect(pv, id);
            }
            prev = Some(id);
        }
    }

    /// Builds the graph with structure. Isolated points are kept but belong
    /// to no branch.
    pub fn build(self) -> Result<VesselGraph> {
        let mut points = self.points;
        points.sort_by_key(|p| p.id);
        let mut g = VesselGraph::new(points, self.edges.into_iter().collect())?;
        g.keypoints = detect_keypoints(&g);
        if g.adjacency.iter().all(|a| !a.is_empty()) {
            g.branches = split_branches(&g)?;
        } else {
            g.branches = branches_skipping_isolated(&g);
        }
        Ok(g)
    }
}

fn branches_skipping_isolated(g: &VesselGraph) -> Vec<Branch> {
    let keep: BTreeSet<u32> = g.points.iter().filter(|p| g.degree(p.id) > 0).map(|p| p.id).collect();
    match g.induced(|id| keep.contains(&id)) {
        Ok(sub) => sub.branches,
        Err(_) => Vec::new(),
    }
}

/// Ids with degree 1 (endpoints) or degree >= 3 (junctions and crossings).
pub fn detect_keypoints(graph: &VesselGraph) -> Vec<u32> {
    let mut out: Vec<u32> = graph
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let d = graph.adjacency[*i].len();
            d == 1 || d >= 3
        })
        .map(|(_, p)| p.id)
        .collect();
    out.sort_unstable();
    out
}

/// Splits the graph into keypoint-to-keypoint branches. Every edge ends up
/// in exactly one branch. A cycle without keypoints becomes a self-loop
/// anchored at its smallest id.
pub fn split_branches(graph: &VesselGraph) -> Result<Vec<Branch>> {
    for (i, p) in graph.points.iter().enumerate() {
        if graph.adjacency[i].is_empty() {
            return Err(Error::UnbranchablePoint(p.id));
        }
    }
    let keypoints = if graph.keypoints.is_empty() { detect_keypoints(graph) } else { graph.keypoints.clone() };
    let is_key: BTreeSet<usize> = keypoints.iter().filter_map(|&k| graph.index_of(k)).collect();
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let edge_key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut branches = Vec::new();

    let walk = |start: usize, first: usize, used: &mut BTreeSet<(usize, usize)>, stop: &dyn Fn(usize) -> bool| {
        let mut ids = vec![graph.points[start].id];
        let mut cur = first;
        used.insert(edge_key(start, cur));
        loop {
            ids.push(graph.points[cur].id);
            if stop(cur) {
                break;
            }
            let next = graph.adjacency[cur].iter().copied().find(|&n| !used.contains(&edge_key(cur, n)));
            match next {
                Some(n) => {
                    used.insert(edge_key(cur, n));
                    cur = n;
                }
                None => break,
            }
        }
        Branch { endpoint_a: ids[0], endpoint_b: *ids.last().unwrap(), point_ids: ids }
    };

    let mut key_order: Vec<usize> = is_key.iter().copied().collect();
    key_order.sort_by_key(|&i| graph.points[i].id);
    for &k in &key_order {
        for &n in &graph.adjacency[k] {
            if used.contains(&edge_key(k, n)) {
                continue;
            }
            branches.push(walk(k, n, &mut used, &|i| is_key.contains(&i)));
        }
    }
    // Remaining edges form keypoint-free cycles.
    let mut order: Vec<usize> = (0..graph.points.len()).collect();
    order.sort_by_key(|&i| graph.points[i].id);
    for &s in &order {
        for &n in &graph.adjacency[s] {
            if used.contains(&edge_key(s, n)) {
                continue;
            }
            branches.push(walk(s, n, &mut used, &|i| i == s));
        }
    }
    Ok(branches)
}

/// Samples each chain along arc length every `interval` pixels (the last
/// step may be shorter), rounds to pixels, and merges chain endpoints that
/// lie within [`MERGE_TOLERANCE`] of an earlier endpoint.
pub fn resample_centerline(polylines: &[Vec<(f64, f64)>], interval: f64) -> Result<VesselGraph> {
    if polylines.is_empty() {
        return Err(Error::NoCenterline);
    }
    if !(interval > 0.0) || !interval.is_finite() {
        return Err(Error::BadInterval);
    }
    let mut points: Vec<VesselPoint> = Vec::new();
    let mut endpoint_ids: Vec<u32> = Vec::new();
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();

    for chain in polylines {
        if chain.len() < 2 {
            return Err(Error::DegeneratePolyline);
        }
        let samples = sample_chain(chain, interval).ok_or(Error::DegeneratePolyline)?;
        let n = samples.len();
        let mut ids = Vec::with_capacity(n);
        for (k, &(x, y)) in samples.iter().enumerate() {
            let pos = Pixel::round(x, y);
            let is_end = k == 0 || k + 1 == n;
            let merged = if is_end {
                endpoint_ids
                    .iter()
                    .copied()
                    .find(|&id| points[id as usize].pos.dist(pos) <= MERGE_TOLERANCE)
            } else {
                None
            };
            let id = match merged {
                Some(id) => id,
                None => {
                    if let Some(&last) = ids.last() {
                        if points[last as usize].pos == pos {
                            continue;
                        }
                    }
                    let id = points.len() as u32;
                    points.push(VesselPoint { id, pos });
                    id
                }
            };
            if is_end && !endpoint_ids.contains(&id) {
                endpoint_ids.push(id);
            }
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        for w in ids.windows(2) {
            if w[0] != w[1] {
                edges.insert((w[0].min(w[1]), w[0].max(w[1])));
            }
        }
    }
    let used: BTreeSet<u32> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    if used.is_empty() {
        return Err(Error::DegeneratePolyline);
    }
    let points: Vec<VesselPoint> = points.into_iter().filter(|p| used.contains(&p.id)).collect();
    VesselGraph::with_structure(points, edges.into_iter().collect())
}

/// Arc-length samples at multiples of `interval` plus the chain end.
fn sample_chain(chain: &[(f64, f64)], interval: f64) -> Option<Vec<(f64, f64)>> {
    let seg_len: Vec<f64> = chain.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).collect();
    let total: f64 = seg_len.iter().sum();
    if !(total > 1e-9) {
        return None;
    }
    let mut out = vec![chain[0]];
    let mut target = interval;
    let mut acc = 0.0;
    for (i, &len) in seg_len.iter().enumerate() {
        while len > 0.0 && target <= acc + len && total - target > 1e-9 {
            let t = (target - acc) / len;
            let (a, b) = (chain[i], chain[i + 1]);
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
            target += interval;
        }
        acc += len;
    }
    out.push(*chain.last().unwrap());
    Some(out)
}

/// Re-samples an arbitrary graph (e.g. a dense pixel centerline) by running
/// each branch through [`resample_centerline`].
pub fn resample_graph(graph: &VesselGraph, interval: f64) -> Result<VesselGraph> {
    let polylines: Vec<Vec<(f64, f64)>> = graph
        .branch_polylines()
        .into_iter()
        .filter(|pl| pl.len() >= 2 && pl.windows(2).any(|w| w[0] != w[1]))
        .collect();
    resample_centerline(&polylines, interval)
}

/// Pixel-adjacency graph of a thin mask: 4-neighbors are always linked,
/// diagonal neighbors only when no 4-path of length two joins them.
/// Isolated pixels are dropped.
pub fn graph_from_mask(mask: &Mask) -> Result<VesselGraph> {
    let (w, h) = (mask.width(), mask.height());
    let mut builder = PathGraphBuilder::default();
    let mut next = 0u32;
    let on = |x: i32, y: i32| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && mask.get(x as usize, y as usize);
    for p in mask.pixels() {
        let (x, y) = (p.x, p.y);
        let mut links = Vec::new();
        if on(x + 1, y) {
            links.push(Pixel::new(x + 1, y));
        }
        if on(x, y + 1) {
            links.push(Pixel::new(x, y + 1));
        }
        if on(x + 1, y + 1) && !on(x + 1, y) && !on(x, y + 1) {
            links.push(Pixel::new(x + 1, y + 1));
        }
        if on(x - 1, y + 1) && !on(x - 1, y) && !on(x, y + 1) {
            links.push(Pixel::new(x - 1, y + 1));
        }
        for q in links {
            let a = builder.ensure(p, &mut next);
            let b = builder.ensure(q, &mut next);
            builder.connect(a, b);
        }
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
        pts.to_vec()
    }

    fn y_graph() -> VesselGraph {
        resample_centerline(
            &[
                chain(&[(50.0, 50.0), (50.0, 20.0)]),
                chain(&[(50.0, 50.0), (25.0, 75.0)]),
                chain(&[(50.0, 50.0), (75.0, 75.0)]),
            ],
            5.0,
        )
        .unwrap()
    }

    fn brute_degrees(g: &VesselGraph) -> BTreeMap<u32, usize> {
        let mut d = BTreeMap::new();
        for p in g.points() {
            let c = g.edges().iter().filter(|&&(a, b)| a == p.id || b == p.id).count();
            d.insert(p.id, c);
        }
        d
    }

    #[test]
    fn straight_chain_samples_every_interval() {
        let g = resample_centerline(&[chain(&[(10.0, 10.0), (30.0, 10.0)])], 5.0).unwrap();
        let xs: Vec<i32> = g.points().iter().map(|p| p.pos.x).collect();
        assert_eq!(xs, vec![10, 15, 20, 25, 30]);
        assert_eq!(g.edges().len(), 4);
    }

    #[test]
    fn resample_errors() {
        assert_eq!(resample_centerline(&[], 5.0).unwrap_err(), Error::NoCenterline);
        let c = chain(&[(0.0, 0.0), (10.0, 0.0)]);
        assert_eq!(resample_centerline(&[c.clone()], 0.0).unwrap_err(), Error::BadInterval);
        assert_eq!(resample_centerline(&[c], -1.0).unwrap_err(), Error::BadInterval);
        assert_eq!(
            resample_centerline(&[chain(&[(3.0, 3.0), (3.0, 3.0)])], 5.0).unwrap_err(),
            Error::DegeneratePolyline
        );
    }

    #[test]
    fn y_shape_merges_shared_endpoint() {
        let g = y_graph();
        let degrees = brute_degrees(&g);
        let junctions: Vec<_> = degrees.iter().filter(|(_, &d)| d == 3).collect();
        assert_eq!(junctions.len(), 1);
        assert_eq!(g.position(*junctions[0].0).unwrap(), Pixel::new(50, 50));
        assert_eq!(degrees.values().filter(|&&d| d == 1).count(), 3);
    }

    #[test]
    fn keypoints_follow_degree_rule() {
        let g = resample_centerline(&[chain(&[(0.0, 0.0), (20.0, 0.0)])], 5.0).unwrap();
        assert_eq!(detect_keypoints(&g), vec![0, 4]);
        let y = y_graph();
        assert_eq!(detect_keypoints(&y).len(), 4);
        // X: two chains crossing at one shared pixel.
        let x = VesselGraph::with_structure(
            (0..5).map(|i| VesselPoint { id: i, pos: Pixel::new(i as i32 * 3, i as i32) }).collect(),
            vec![(0, 2), (1, 2), (3, 2), (4, 2)],
        )
        .unwrap();
        let degrees = brute_degrees(&x);
        let keys = detect_keypoints(&x);
        assert_eq!(keys.len(), 5);
        assert_eq!(keys.iter().filter(|k| degrees[k] == 4).count(), 1);
        assert_eq!(detect_keypoints(&x), keys);
    }

    #[test]
    fn branches_cover_edges() {
        let line = resample_centerline(&[chain(&[(0.0, 0.0), (40.0, 0.0)])], 5.0).unwrap();
        assert_eq!(line.branches().len(), 1);
        assert_eq!(line.branches()[0].point_ids.len(), line.len());

        let y = y_graph();
        assert_eq!(y.branches().len(), 3);
        let junction = y.keypoints().iter().copied().find(|&k| y.degree(k) == 3).unwrap();
        for b in y.branches() {
            assert!(b.endpoint_a == junction || b.endpoint_b == junction);
        }
        let covered: usize = y.branches().iter().map(|b| b.point_ids.len() - 1).sum();
        assert_eq!(covered, y.edges().len());
    }

    #[test]
    fn lollipop_has_self_loop_branch() {
        // Tail 0-1-2, then 2 is a junction on the cycle 2-3-4-5-2.
        let pts = [(0, 0), (5, 0), (10, 0), (15, 5), (20, 0), (15, -5)];
        let points = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| VesselPoint { id: i as u32, pos: Pixel::new(x, y) })
            .collect();
        let g = VesselGraph::with_structure(points, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 2)]).unwrap();
        assert_eq!(g.branches().len(), 2);
        let loops: Vec<_> = g.branches().iter().filter(|b| b.is_self_loop()).collect();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].endpoint_a, 2);
        assert_eq!(loops[0].point_ids.len(), 5);
    }

    #[test]
    fn pure_cycle_is_anchored_at_smallest_id() {
        let points = (0..4).map(|i| VesselPoint { id: 10 + i, pos: Pixel::new(i as i32, 0) }).collect();
        let g = VesselGraph::with_structure(points, vec![(10, 11), (11, 12), (12, 13), (13, 10)]).unwrap();
        assert_eq!(g.branches().len(), 1);
        assert_eq!(g.branches()[0].endpoint_a, 10);
    }

    #[test]
    fn isolated_point_is_unbranchable() {
        let points = vec![
            VesselPoint { id: 0, pos: Pixel::new(0, 0) },
            VesselPoint { id: 1, pos: Pixel::new(1, 0) },
            VesselPoint { id: 7, pos: Pixel::new(9, 9) },
        ];
        let g = VesselGraph::new(points, vec![(0, 1)]).unwrap();
        assert_eq!(split_branches(&g).unwrap_err(), Error::UnbranchablePoint(7));
    }

    #[test]
    fn invalid_edges_rejected() {
        let points = vec![VesselPoint { id: 0, pos: Pixel::new(0, 0) }, VesselPoint { id: 1, pos: Pixel::new(1, 0) }];
        assert!(VesselGraph::new(points.clone(), vec![(0, 2)]).is_err());
        assert!(VesselGraph::new(points.clone(), vec![(0, 1), (1, 0)]).is_err());
        assert!(VesselGraph::new(points, vec![(0, 0)]).is_err());
    }

    #[test]
    fn mask_graph_of_thin_l_shape() {
        let mut m = Mask::empty(20, 20);
        for x in 2..10 {
            m.set(x, 5, true);
        }
        for y in 6..12 {
            m.set(9, y, true);
        }
        let g = graph_from_mask(&m).unwrap();
        assert_eq!(g.len(), 14);
        assert_eq!(g.edges().len(), 13);
        assert_eq!(g.keypoints().len(), 2);
        assert_eq!(g.branches().len(), 1);
    }

    #[test]
    fn densify_keeps_ids_and_fills_lines() {
        let g = resample_centerline(&[chain(&[(0.0, 0.0), (20.0, 0.0)])], 5.0).unwrap();
        let d = g.densify().unwrap();
        assert_eq!(d.len(), 21);
        for p in g.points() {
            assert_eq!(d.position(p.id), Some(p.pos));
        }
        assert_eq!(d.keypoints().len(), 2);
    }
}

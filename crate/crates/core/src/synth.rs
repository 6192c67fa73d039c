//! Synthetic angiography-like sequences with exact ground truth.
//!
//! A vessel tree is laid out once in reference coordinates. Each frame moves
//! every tree point by a global sinusoidal translation plus a smooth random
//! field scaled by a second sinusoid, then renders the visible part of the
//! tree as dark tubes over a static textured background with fresh noise.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods exist when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geom::Pixel;
use crate::graph::{VesselGraph, VesselPoint};
use crate::image::GrayImage;
use crate::{Error, Result};

/// Real-valued image coordinates `(x, y)`.
pub type Point = (f64, f64);

const STREAM_TREE: u64 = 1;
const STREAM_FIELD: u64 = 2;
const STREAM_BACKGROUND: u64 = 3;
const STREAM_NOISE_BASE: u64 = 1 << 32;

/// Spacing of tree points along each branch, in pixels.
pub const POINT_SPACING: f64 = 5.0;
const FIELD_GRID_STEP: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// Branch generations; 1 gives a single branch.
    pub depth: u32,
    /// Probability that a branch end splits in two.
    pub branch_prob: f64,
    /// Vessel diameter range in pixels; the root gets the upper end.
    pub vessel_width: (f64, f64),
    /// Peak global translation `(x, y)`.
    pub global_amplitude: Point,
    /// Frames per global motion cycle.
    pub global_period: f64,
    /// Peak magnitude of the local displacement field.
    pub local_amplitude: f64,
    /// Gaussian smoothing of the local field, in pixels.
    pub local_sigma: f64,
    /// Frames per local motion cycle.
    pub local_period: f64,
    /// Standard deviation of additive pixel noise (8-bit units).
    pub noise: f64,
    /// Visible fraction of the tree's arc length in the first and last frame,
    /// interpolated linearly in between.
    pub inflow: (f64, f64),
    pub background_level: f64,
    pub background_texture: f64,
    /// Darkening at a vessel's center (8-bit units).
    pub contrast: f64,
    /// Distance kept between the tree and the image border.
    pub border_margin: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            width: 512,
            height: 512,
            depth: 4,
            branch_prob: 0.8,
            vessel_width: (3.0, 7.0),
            global_amplitude: (8.0, 5.0),
            global_period: 12.0,
            local_amplitude: 3.0,
            local_sigma: 40.0,
            local_period: 8.0,
            noise: 4.0,
            inflow: (0.85, 1.0),
            background_level: 170.0,
            background_texture: 15.0,
            contrast: 70.0,
            border_margin: 40.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.width < crate::image::MIN_SIDE || self.height < crate::image::MIN_SIDE {
            return bad("image too small");
        }
        if self.depth == 0 {
            return bad("depth must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.branch_prob) {
            return bad("branch_prob must lie in [0, 1]");
        }
        if !(self.vessel_width.0 > 0.0 && self.vessel_width.0 <= self.vessel_width.1) {
            return bad("vessel width range must be positive and ordered");
        }
        if self.global_amplitude.0.is_nan()
            || self.global_amplitude.1.is_nan()
            || !(self.local_amplitude >= 0.0)
            || !(self.noise >= 0.0)
            || !(self.local_sigma > 0.0)
        {
            return bad("amplitudes, noise and smoothing must be non-negative");
        }
        if !(self.global_period > 0.0 && self.local_period > 0.0) {
            return bad("motion periods must be positive");
        }
        let (a, b) = self.inflow;
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return bad("inflow fractions must lie in [0, 1] and be non-decreasing");
        }
        Ok(())
    }

    /// Visible fraction for `frame` of an `n_frames` sequence.
    pub fn inflow_at(&self, frame: usize, n_frames: usize) -> f64 {
        if n_frames < 2 {
            return self.inflow.1;
        }
        let t = frame as f64 / (n_frames - 1) as f64;
        self.inflow.0 + t * (self.inflow.1 - self.inflow.0)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A vessel tree in reference coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTree {
    /// Point ids per branch in generation order; a branch starts at its
    /// parent's last point.
    pub branches: Vec<Vec<u32>>,
    /// Parent branch index; `None` for the root.
    pub parent: Vec<Option<usize>>,
    pub edges: Vec<(u32, u32)>,
    pub reference: BTreeMap<u32, Point>,
    /// Vessel diameter at each point.
    pub widths: BTreeMap<u32, f64>,
    /// Arc length from the root start.
    pub arclength: BTreeMap<u32, f64>,
}

impl SynthTree {
    pub fn max_arclength(&self) -> f64 {
        self.arclength.values().copied().fold(0.0, f64::max)
    }

    /// Graph at the given positions, restricted to `visible` ids.
    pub fn graph_at(&self, positions: &BTreeMap<u32, Point>, visible: &BTreeSet<u32>) -> Result<VesselGraph> {
        let points = positions
            .iter()
            .filter(|(id, _)| visible.contains(id))
            .map(|(&id, &(x, y))| VesselPoint { id, pos: Pixel::round(x, y) })
            .collect();
        let edges = self.edges.iter().copied().filter(|(a, b)| visible.contains(a) && visible.contains(b)).collect();
        VesselGraph::with_structure(points, edges)
    }

    pub fn graph(&self) -> Result<VesselGraph> {
        self.graph_at(&self.reference, &self.reference.keys().copied().collect())
    }

    /// Ids within `fraction` of the total arc length from the root.
    pub fn visible_ids(&self, fraction: f64) -> BTreeSet<u32> {
        let limit = fraction * self.max_arclength() + 1e-9;
        self.arclength.iter().filter(|(_, &s)| s <= limit).map(|(&id, _)| id).collect()
    }

    /// Branches without children.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.branches.len()).filter(|&b| !self.parent.contains(&Some(b))).collect()
    }

    pub fn branch_length(&self, b: usize) -> f64 {
        self.branches[b].windows(2).map(|w| dist(self.reference[&w[0]], self.reference[&w[1]])).sum()
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn bezier(p0: Point, c: Point, p1: Point, t: f64) -> Point {
    let u = 1.0 - t;
    (u * u * p0.0 + 2.0 * u * t * c.0 + t * t * p1.0, u * u * p0.1 + 2.0 * u * t * c.1 + t * t * p1.1)
}

/// Points along a quadratic curve, spaced evenly by arc length close to
/// [`POINT_SPACING`]. The first point is `p0`.
fn sample_curve(p0: Point, c: Point, p1: Point) -> Vec<Point> {
    const FINE: usize = 400;
    let fine: Vec<Point> = (0..=FINE).map(|i| bezier(p0, c, p1, i as f64 / FINE as f64)).collect();
    let mut cum = vec![0.0];
    for w in fine.windows(2) {
        cum.push(cum.last().unwrap() + dist(w[0], w[1]));
    }
    let total = *cum.last().unwrap();
    let n = ((total / POINT_SPACING).round() as usize).max(1);
    let mut out = vec![p0];
    let mut j = 0;
    for k in 1..=n {
        let target = total * k as f64 / n as f64;
        while j + 1 < FINE && cum[j + 1] < target {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let t = if seg > 0.0 { ((target - cum[j]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (fine[j], fine[j + 1]);
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    out
}

struct Pending {
    parent: Option<usize>,
    start_id: Option<u32>,
    start: Point,
    angle: f64,
    length: f64,
    width: f64,
    generation: u32,
}

const CLEARANCE: f64 = 14.0;
const START_EXCLUSION: f64 = 18.0;
const ATTEMPTS: usize = 12;

/// Random tree of quadratic curves. Each branch end splits in two with
/// probability `branch_prob` until `depth` generations exist; the root always
/// splits when `depth >= 2`. Curves keep a clearance from each other and from
/// the image border.
pub fn generate_tree(cfg: &SynthConfig) -> Result<SynthTree> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, STREAM_TREE);
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let m = cfg.border_margin.min(0.25 * w.min(h));
    let inside = |p: Point| p.0 >= m && p.0 <= w - 1.0 - m && p.1 >= m && p.1 <= h - 1.0 - m;
    let size = (w - 2.0 * m).min(h - 2.0 * m);

    let mut tree = SynthTree {
        branches: Vec::new(),
        parent: Vec::new(),
        edges: Vec::new(),
        reference: BTreeMap::new(),
        widths: BTreeMap::new(),
        arclength: BTreeMap::new(),
    };
    let mut next_id = 0u32;
    let root_start = (m + rng.random_range(0.25..0.75) * (w - 2.0 * m), m + 2.0);
    let root_angle = PI / 2.0 + rng.random_range(-0.35..0.35);
    let mut queue = alloc::collections::VecDeque::new();
    queue.push_back(Pending {
        parent: None,
        start_id: None,
        start: root_start,
        angle: root_angle,
        length: 0.36 * size,
        width: cfg.vessel_width.1,
        generation: 1,
    });
    while let Some(job) = queue.pop_front() {
        let mut placed = None;
        for attempt in 0..ATTEMPTS {
            let length = job.length * if attempt == 0 { 1.0 } else { rng.random_range(0.7..1.0) };
            let angle = job.angle + if attempt == 0 { 0.0 } else { rng.random_range(-0.3..0.3) };
            let end = (job.start.0 + length * angle.cos(), job.start.1 + length * angle.sin());
            let bend = rng.random_range(-0.18..0.18) * length;
            let mid = (0.5 * (job.start.0 + end.0), 0.5 * (job.start.1 + end.1));
            let ctrl = (mid.0 - bend * angle.sin(), mid.1 + bend * angle.cos());
            let pts = sample_curve(job.start, ctrl, end);
            if !pts.iter().all(|&p| inside(p)) {
                continue;
            }
            let clear = pts.iter().all(|&p| {
                dist(p, job.start) < START_EXCLUSION
                    || tree.reference.values().all(|&q| dist(q, job.start) < START_EXCLUSION || dist(p, q) >= CLEARANCE)
            });
            if clear {
                placed = Some((pts, ctrl, end));
                break;
            }
        }
        let Some((pts, ctrl, end)) = placed else { continue };
        let bi = tree.branches.len();
        let mut ids = Vec::with_capacity(pts.len());
        let mut s = match job.start_id {
            Some(id) => {
                ids.push(id);
                tree.arclength[&id]
            }
            None => {
                let id = next_id;
                next_id += 1;
                tree.reference.insert(id, pts[0]);
                tree.widths.insert(id, job.width);
                tree.arclength.insert(id, 0.0);
                ids.push(id);
                0.0
            }
        };
        for k in 1..pts.len() {
            let id = next_id;
            next_id += 1;
            s += dist(pts[k - 1], pts[k]);
            tree.reference.insert(id, pts[k]);
            tree.widths.insert(id, job.width);
            tree.arclength.insert(id, s);
            tree.edges.push((ids[k - 1], id));
            ids.push(id);
        }
        let end_id = *ids.last().unwrap();
        tree.branches.push(ids);
        tree.parent.push(job.parent);

        if job.generation >= cfg.depth {
            continue;
        }
        let must_split = job.parent.is_none();
        if !must_split && rng.random::<f64>() >= cfg.branch_prob {
            continue;
        }
        let heading = (end.1 - ctrl.1).atan2(end.0 - ctrl.0);
        let spread_a = rng.random_range(0.35..0.75);
        let spread_b = rng.random_range(0.35..0.75);
        for (sign, spread) in [(-1.0, spread_a), (1.0, spread_b)] {
            queue.push_back(Pending {
                parent: Some(bi),
                start_id: Some(end_id),
                start: end,
                angle: heading + sign * spread,
                length: job.length * rng.random_range(0.65..0.85),
                width: (job.width * 0.8).max(cfg.vessel_width.0),
                generation: job.generation + 1,
            });
        }
    }
    Ok(tree)
}

/// Smooth random vector field on the image, sampled on a coarse grid,
/// Gaussian-filtered and scaled so its largest vector has unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    cols: usize,
    rows: usize,
    step: f64,
    values: Vec<Point>,
}

impl DisplacementField {
    pub fn generate(cfg: &SynthConfig) -> Self {
        let mut rng = stream(cfg.seed, STREAM_FIELD);
        let step = FIELD_GRID_STEP;
        let cols = (cfg.width as f64 / step).ceil() as usize + 2;
        let rows = (cfg.height as f64 / step).ceil() as usize + 2;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut gx: Vec<f64> = (0..cols * rows).map(|_| normal.sample(&mut rng)).collect();
        let mut gy: Vec<f64> = (0..cols * rows).map(|_| normal.sample(&mut rng)).collect();
        let sigma = cfg.local_sigma / step;
        blur_grid(&mut gx, cols, rows, sigma);
        blur_grid(&mut gy, cols, rows, sigma);
        let peak = gx.iter().zip(&gy).map(|(x, y)| (x * x + y * y).sqrt()).fold(0.0, f64::max);
        let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        let values = gx.iter().zip(&gy).map(|(x, y)| (x * scale, y * scale)).collect();
        DisplacementField { cols, rows, step, values }
    }

    /// Bilinear field value; its length never exceeds 1.
    pub fn at(&self, p: Point) -> Point {
        let fx = (p.0 / self.step).clamp(0.0, (self.cols - 1) as f64);
        let fy = (p.1 / self.step).clamp(0.0, (self.rows - 1) as f64);
        let (x0, y0) = ((fx.floor() as usize).min(self.cols - 2), (fy.floor() as usize).min(self.rows - 2));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let v = |x: usize, y: usize| self.values[y * self.cols + x];
        let (a, b, c, d) = (v(x0, y0), v(x0 + 1, y0), v(x0, y0 + 1), v(x0 + 1, y0 + 1));
        let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
        (
            lerp(lerp(a.0, b.0, tx), lerp(c.0, d.0, tx), ty),
            lerp(lerp(a.1, b.1, tx), lerp(c.1, d.1, tx), ty),
        )
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as i32;
    let k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable Gaussian blur with edge replication.
fn blur_grid(values: &mut [f64], cols: usize, rows: usize, sigma: f64) {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let mut tmp = vec![0.0; values.len()];
    for y in 0..rows {
        for x in 0..cols {
            tmp[y * cols + x] = k
                .iter()
                .enumerate()
                .map(|(i, w)| w * values[y * cols + (x as i64 + i as i64 - r).clamp(0, cols as i64 - 1) as usize])
                .sum();
        }
    }
    for y in 0..rows {
        for x in 0..cols {
            values[y * cols + x] = k
                .iter()
                .enumerate()
                .map(|(i, w)| w * tmp[(y as i64 + i as i64 - r).clamp(0, rows as i64 - 1) as usize * cols + x])
                .sum();
        }
    }
}

/// Motion of one frame: a translation plus a multiple of the shared field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMotion {
    pub global: Point,
    pub local_scale: f64,
}

impl FrameMotion {
    pub fn at(frame: usize, cfg: &SynthConfig) -> Self {
        let t = frame as f64;
        let g = (2.0 * PI * t / cfg.global_period).sin();
        let l = (2.0 * PI * t / cfg.local_period).sin();
        FrameMotion {
            global: (cfg.global_amplitude.0 * g, cfg.global_amplitude.1 * g),
            local_scale: cfg.local_amplitude * l,
        }
    }
}

/// Tree positions in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformed {
    pub positions: BTreeMap<u32, Point>,
    /// Ids whose position was clamped into the image.
    pub clamped: BTreeSet<u32>,
}

pub fn deform_with(tree: &SynthTree, motion: FrameMotion, field: &DisplacementField, cfg: &SynthConfig) -> Deformed {
    let (w, h) = ((cfg.width - 1) as f64, (cfg.height - 1) as f64);
    let mut positions = BTreeMap::new();
    let mut clamped = BTreeSet::new();
    for (&id, &p) in &tree.reference {
        let f = field.at(p);
        let x = p.0 + motion.global.0 + motion.local_scale * f.0;
        let y = p.1 + motion.global.1 + motion.local_scale * f.1;
        let (cx, cy) = (x.clamp(0.0, w), y.clamp(0.0, h));
        if cx != x || cy != y {
            clamped.insert(id);
        }
        positions.insert(id, (cx, cy));
    }
    Deformed { positions, clamped }
}

/// Positions of every tree point in `frame`.
pub fn deform(tree: &SynthTree, frame: usize, cfg: &SynthConfig) -> Deformed {
    deform_with(tree, FrameMotion::at(frame, cfg), &DisplacementField::generate(cfg), cfg)
}

/// Static textured background shared by all frames of a sequence.
pub fn background(cfg: &SynthConfig) -> Vec<f64> {
    let mut rng = stream(cfg.seed, STREAM_BACKGROUND);
    let step = 16.0;
    let cols = (cfg.width as f64 / step).ceil() as usize + 2;
    let rows = (cfg.height as f64 / step).ceil() as usize + 2;
    let mut grid: Vec<f64> = (0..cols * rows).map(|_| rng.random_range(-1.0..1.0)).collect();
    blur_grid(&mut grid, cols, rows, 1.5);
    let peak = grid.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if peak > 0.0 { cfg.background_texture / peak } else { 0.0 };
    let mut out = Vec::with_capacity(cfg.width * cfg.height);
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            let (fx, fy) = (x as f64 / step, y as f64 / step);
            let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
            let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
            let g = |i: usize, j: usize| grid[j * cols + i];
            let top = g(x0, y0) + tx * (g(x0 + 1, y0) - g(x0, y0));
            let bot = g(x0, y0 + 1) + tx * (g(x0 + 1, y0 + 1) - g(x0, y0 + 1));
            out.push(cfg.background_level + scale * (top + ty * (bot - top)));
        }
    }
    out
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0) };
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Per-pixel vessel darkening for the visible edges.
fn vessel_darkening(tree: &SynthTree, positions: &BTreeMap<u32, Point>, visible: &BTreeSet<u32>, cfg: &SynthConfig) -> Vec<f64> {
    let (w, h) = (cfg.width, cfg.height);
    let mut dark = vec![0.0f64; w * h];
    for &(a, b) in &tree.edges {
        if !visible.contains(&a) || !visible.contains(&b) {
            continue;
        }
        let (pa, pb) = (positions[&a], positions[&b]);
        let r = 0.25 * (tree.widths[&a] + tree.widths[&b]);
        let reach = r + 0.5;
        let x0 = (pa.0.min(pb.0) - reach).floor().max(0.0) as usize;
        let y0 = (pa.1.min(pb.1) - reach).floor().max(0.0) as usize;
        let x1 = ((pa.0.max(pb.0) + reach).ceil() as usize).min(w - 1);
        let y1 = ((pa.1.max(pb.1) + reach).ceil() as usize).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d = segment_distance((x as f64, y as f64), pa, pb);
                if d < reach {
                    let q = d / reach;
                    let v = cfg.contrast * (1.0 - q * q).sqrt();
                    let cell = &mut dark[y * w + x];
                    if v > *cell {
                        *cell = v;
                    }
                }
            }
        }
    }
    dark
}

/// Renders the `visible` ids at `positions`; noise comes from the frame's
/// own random stream.
pub fn render_visible(
    tree: &SynthTree,
    positions: &BTreeMap<u32, Point>,
    visible: &BTreeSet<u32>,
    background: &[f64],
    cfg: &SynthConfig,
    frame: usize,
) -> Result<GrayImage> {
    let dark = vessel_darkening(tree, positions, visible, cfg);
    let mut rng = stream(cfg.seed, STREAM_NOISE_BASE + frame as u64);
    let normal = Normal::new(0.0, cfg.noise.max(0.0)).map_err(|_| Error::InvalidParameter("noise".into()))?;
    let data = background
        .iter()
        .zip(&dark)
        .map(|(b, d)| {
            let n = if cfg.noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            (b - d + n).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(cfg.width, cfg.height, data)
}

/// Renders the first `visible_fraction` of the tree's arc length.
pub fn render_frame(
    tree: &SynthTree,
    positions: &BTreeMap<u32, Point>,
    visible_fraction: f64,
    cfg: &SynthConfig,
    frame: usize,
) -> Result<GrayImage> {
    if !(0.0..=1.0).contains(&visible_fraction) {
        return Err(Error::InvalidParameter("visible fraction must lie in [0, 1]".into()));
    }
    render_visible(tree, positions, &tree.visible_ids(visible_fraction), &background(cfg), cfg, frame)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    pub image: GrayImage,
    pub truth: VesselGraph,
    pub positions: BTreeMap<u32, Point>,
    pub visible: BTreeSet<u32>,
    pub clamped: BTreeSet<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub tree: SynthTree,
    pub frames: Vec<SyntheticFrame>,
}

impl SyntheticSequence {
    /// Exact destination coordinates in frame `dst` of every point visible
    /// in both frames.
    pub fn correspondence(&self, src: usize, dst: usize) -> BTreeMap<u32, Point> {
        let (a, b) = (&self.frames[src], &self.frames[dst]);
        b.positions.iter().filter(|(id, _)| a.visible.contains(id) && b.visible.contains(id)).map(|(&id, &p)| (id, p)).collect()
    }
}

/// Renders frame `frame` of an `n_frames` sequence.
pub fn generate_frame(
    tree: &SynthTree,
    field: &DisplacementField,
    background: &[f64],
    cfg: &SynthConfig,
    frame: usize,
    n_frames: usize,
) -> Result<SyntheticFrame> {
    let d = deform_with(tree, FrameMotion::at(frame, cfg), field, cfg);
    let visible = tree.visible_ids(cfg.inflow_at(frame, n_frames));
    let image = render_visible(tree, &d.positions, &visible, background, cfg, frame)?;
    let truth = tree.graph_at(&d.positions, &visible)?;
    Ok(SyntheticFrame { image, truth, positions: d.positions, visible, clamped: d.clamped })
}

pub fn generate_sequence(cfg: &SynthConfig, n_frames: usize) -> Result<SyntheticSequence> {
    if n_frames < 2 {
        return Err(Error::InvalidParameter("a sequence needs at least 2 frames".into()));
    }
    let tree = generate_tree(cfg)?;
    let field = DisplacementField::generate(cfg);
    let bg = background(cfg);
    let frames = (0..n_frames).map(|f| generate_frame(&tree, &field, &bg, cfg, f, n_frames)).collect::<Result<Vec<_>>>()?;
    Ok(SyntheticSequence { tree, frames })
}

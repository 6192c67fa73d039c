//! End-to-end extraction of the destination centerline from a source
//! centerline, and frame-to-frame tracking.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use core::hash::{Hash, Hasher};

use fnv::FnvHasher;

use crate::align::{chamfer_match, target_shape_from_vesselness, GlobalShift};
use crate::candidates::{flat_search, hierarchical_search, CandidateSet, SearchOutcome};
use crate::config::PipelineConfig;
use crate::descriptor::DescriptorCache;
use crate::edt::distance_transform;
use crate::graph::{graph_from_mask, resample_graph, VesselGraph};
use crate::image::{GrayImage, Mask, ScalarMap};
use crate::morphology::skeletonize;
use crate::mrf::{apply_labeling, build_problem, minimize, Labeling, MatchedPoint};
use crate::postprocess::{connect_points, extract_new_branches, Growth};
use crate::vesselness::vesselness_with;
use crate::{Error, Result};

/// Ordered `key = value` record of one extraction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    entries: Vec<(String, String)>,
}

impl RunLog {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

fn fingerprint(f: impl FnOnce(&mut FnvHasher)) -> String {
    let mut h = FnvHasher::default();
    f(&mut h);
    alloc::format!("{:016x}", h.finish())
}

fn hash_graph(g: &VesselGraph, h: &mut FnvHasher) {
    for p in g.points() {
        (p.id, p.pos).hash(h);
    }
    g.edges().hash(h);
}

fn hash_candidates(c: &CandidateSet, h: &mut FnvHasher) {
    for list in &c.lists {
        list.len().hash(h);
        for m in list {
            (m.pos, m.distance.to_bits()).hash(h);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub shift: GlobalShift,
    pub search: SearchOutcome,
    /// Graph indices of the points that entered the MRF.
    pub mrf_nodes: Vec<usize>,
    pub labeling: Labeling,
    pub matched: Vec<MatchedPoint>,
    /// Centerline reconnected from the matched points.
    pub connected: VesselGraph,
    pub growth: Option<Growth>,
    /// Final destination centerline.
    pub graph: VesselGraph,
    pub log: RunLog,
}

/// Runs global alignment, candidate search, MRF labeling, reconnection and
/// (optionally) branch growth.
pub fn extract(src: &GrayImage, dst: &GrayImage, source: &VesselGraph, cfg: &PipelineConfig) -> Result<Extraction> {
    cfg.validate()?;
    if src.width() != dst.width() || src.height() != dst.height() {
        return Err(Error::InvalidImage("source and destination sizes differ".into()));
    }
    if source.is_empty() {
        return Err(Error::InvalidGraph("source graph is empty".into()));
    }
    let mut log = RunLog::default();
    log.push("source_points", source.len());
    log.push("source_keypoints", source.keypoints().len());
    log.push("source_branches", source.branches().len());
    log.push("fingerprint_source", fingerprint(|h| hash_graph(source, h)));

    let vesselness = vesselness_with(dst, &cfg.vesselness_params())?;
    let shape = target_shape_from_vesselness(&vesselness, cfg.vesselness_threshold)?;
    log.push("target_shape_pixels", shape.count());
    log.push("fingerprint_shape", fingerprint(|h| shape.data().hash(h)));

    let dt = distance_transform(&shape)?;
    let template: Vec<_> = source.points().iter().map(|p| p.pos).collect();
    let shift = chamfer_match(&template, &dt, cfg.chamfer_radius)?;
    log.push("shift_dx", shift.dx);
    log.push("shift_dy", shift.dy);
    log.push("shift_cost", shift.cost);

    let mut src_cache = DescriptorCache::new(src);
    let mut dst_cache = DescriptorCache::new(dst);
    let params = cfg.search_params();
    let search = if cfg.hierarchical_search {
        hierarchical_search(&mut src_cache, &mut dst_cache, source, &shift, &params)
    } else {
        flat_search(&mut src_cache, &mut dst_cache, source, &shift, &params)
    };
    let empty_lists = search.candidates.lists.iter().filter(|l| l.is_empty()).count();
    log.push("search_mode", if cfg.hierarchical_search { "hierarchical" } else { "flat" });
    log.push("candidates_total", search.candidates.total());
    log.push("points_without_candidates", empty_lists);
    log.push("descriptors_computed", dst_cache.computed());
    log.push("fingerprint_candidates", fingerprint(|h| hash_candidates(&search.candidates, h)));

    let vco = cfg.vco_params();
    let mrf_nodes: Vec<usize> = if cfg.dummy_label {
        (0..source.len()).collect()
    } else {
        (0..source.len()).filter(|&i| !search.candidates.lists[i].is_empty()).collect()
    };
    if mrf_nodes.len() < 2 {
        return Err(Error::DegenerateResult);
    }
    let (mrf_graph, mrf_cands) = if mrf_nodes.len() == source.len() {
        (source.clone(), search.candidates.clone())
    } else {
        let keep: BTreeSet<u32> = mrf_nodes.iter().map(|&i| source.points()[i].id).collect();
        let points = mrf_nodes.iter().map(|&i| source.points()[i]).collect();
        let edges = source.edges().iter().copied().filter(|(a, b)| keep.contains(a) && keep.contains(b)).collect();
        let cands = CandidateSet { lists: mrf_nodes.iter().map(|&i| search.candidates.lists[i].clone()).collect() };
        (VesselGraph::new(points, edges)?, cands)
    };
    let problem = build_problem(&mrf_graph, &mrf_cands, &vco)?;
    let labeling = minimize(&problem, &cfg.trws_options())?;
    let matched = apply_labeling(&mrf_graph, &mrf_cands, &labeling, &vco);
    let dummies = vco.dummy_label().map_or(0, |d| labeling.labels.iter().filter(|&&l| l == d).count());
    log.push("mrf_mode", if cfg.dummy_label { "dummy" } else { "no_dummy" });
    log.push("mrf_nodes", mrf_nodes.len());
    log.push("mrf_edges", problem.edges().len());
    log.push("mrf_energy", labeling.energy);
    log.push("mrf_lower_bound", labeling.lower_bound);
    log.push("mrf_iterations", labeling.iterations);
    log.push("dummy_count", dummies);
    log.push("matched_points", matched.len());
    log.push("fingerprint_labeling", fingerprint(|h| labeling.labels.hash(h)));

    let connected = connect_points(source, &matched, &vesselness, &cfg.connect_params())?;
    log.push("connected_points", connected.len());
    log.push("fingerprint_connected", fingerprint(|h| hash_graph(&connected, h)));

    let (graph, growth) = if cfg.grow_branches {
        let g = extract_new_branches(&connected, &vesselness, &cfg.growth_params())?;
        log.push("max_radius", g.max_radius);
        log.push("new_branches", g.branches.len());
        (g.graph.clone(), Some(g))
    } else {
        log.push("new_branches", 0);
        (connected.clone(), None)
    };
    log.push("output_points", graph.len());
    log.push("output_edges", graph.edges().len());
    log.push("fingerprint_output", fingerprint(|h| hash_graph(&graph, h)));

    Ok(Extraction { shift, search, mrf_nodes, labeling, matched, connected, growth, graph, log })
}

/// Re-samples an extracted pixel centerline into a source graph for the
/// next frame: rasterize, thin, rebuild the graph and sample every
/// `interval` pixels along each branch.
pub fn prepare_source(graph: &VesselGraph, width: usize, height: usize, interval: f64) -> Result<VesselGraph> {
    let pixels: Vec<_> = graph.rasterize().into_iter().filter(|p| p.in_bounds(width, height)).collect();
    let thin = skeletonize(&Mask::from_pixels(width, height, &pixels));
    let dense = graph_from_mask(&thin)?;
    if dense.is_empty() {
        return Err(Error::DegenerateResult);
    }
    resample_graph(&dense, interval)
}

/// Vesselness of `img` under the configured filter.
pub fn vesselness_map(img: &GrayImage, cfg: &PipelineConfig) -> Result<ScalarMap> {
    vesselness_with(img, &cfg.vesselness_params())
}

/// Result of tracking a sequence; `frames[k]` holds the extraction into
/// frame `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracking {
    pub frames: Vec<Extraction>,
    /// Set when propagation stopped early: the failing destination frame and its error.
    pub failure: Option<(usize, Error)>,
}

/// Feeds each frame's output, re-sampled, as the next frame's source.
pub fn track(frames: &[GrayImage], initial: &VesselGraph, cfg: &PipelineConfig) -> Result<Tracking> {
    if frames.len() < 2 {
        return Err(Error::InvalidParameter("tracking needs at least 2 frames".into()));
    }
    let mut source = initial.clone();
    let mut out = Vec::with_capacity(frames.len() - 1);
    for t in 1..frames.len() {
        let step = extract(&frames[t - 1], &frames[t], &source, cfg).and_then(|e| {
            let next = prepare_source(&e.graph, frames[t].width(), frames[t].height(), cfg.sample_interval)?;
            Ok((e, next))
        });
        match step {
            Ok((e, next)) => {
                out.push(e);
                source = next;
            }
            Err(err) => return Ok(Tracking { frames: out, failure: Some((t, err)) }),
        }
    }
    Ok(Tracking { frames: out, failure: None })
}

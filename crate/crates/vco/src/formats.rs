//! On-disk formats: vessel graphs, correspondences and matched points as
//! JSON, scores as CSV, real-valued maps as a text header plus raw f32.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vco_core::graph::{VesselGraph, VesselPoint};
use vco_core::metrics::ExtractionScore;
use vco_core::mrf::MatchedPoint;
use vco_core::{Pixel, ScalarMap};

use crate::{Failure, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: u32,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub a: u32,
    pub b: u32,
    pub points: Vec<u32>,
}

/// Vessel-graph file. Keypoints and branches are written for readers but
/// recomputed from points and edges on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub points: Vec<PointRecord>,
    pub edges: Vec<[u32; 2]>,
    #[serde(default)]
    pub keypoints: Vec<u32>,
    #[serde(default)]
    pub branches: Vec<BranchRecord>,
}

impl GraphFile {
    pub fn from_graph(g: &VesselGraph) -> Self {
        GraphFile {
            points: g.points().iter().map(|p| PointRecord { id: p.id, x: p.pos.x, y: p.pos.y }).collect(),
            edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
            keypoints: g.keypoints().to_vec(),
            branches: g
                .branches()
                .iter()
                .map(|b| BranchRecord { a: b.endpoint_a, b: b.endpoint_b, points: b.point_ids.clone() })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Outcome<VesselGraph> {
        let points = self.points.iter().map(|p| VesselPoint { id: p.id, pos: Pixel::new(p.x, p.y) }).collect();
        let edges = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = VesselGraph::new(points, edges).map_err(|e| Failure::Input(format!("invalid graph: {e}")))?;
        if g.points().iter().all(|p| g.degree(p.id) > 0) {
            g.compute_structure().map_err(|e| Failure::Input(format!("invalid graph: {e}")))?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub clamped: bool,
}

/// Destination coordinates of source point ids between two frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceFile {
    pub src_frame: usize,
    pub dst_frame: usize,
    pub points: Vec<CorrespondenceRecord>,
}

impl CorrespondenceFile {
    pub fn to_map(&self) -> BTreeMap<u32, (f64, f64)> {
        self.points.iter().map(|p| (p.id, (p.x, p.y))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedRecord {
    pub id: u32,
    pub src_x: i32,
    pub src_y: i32,
    pub x: i32,
    pub y: i32,
    pub label: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedFile {
    /// `input` when ids come from a user-supplied graph, `resampled` when
    /// they come from a graph rebuilt during tracking.
    #[serde(default)]
    pub source_ids: String,
    pub points: Vec<MatchedRecord>,
}

impl MatchedFile {
    pub fn from_points(points: &[MatchedPoint]) -> Self {
        MatchedFile {
            source_ids: String::new(),
            points: points
                .iter()
                .map(|m| MatchedRecord {
                    id: m.id,
                    src_x: m.source.x,
                    src_y: m.source.y,
                    x: m.target.x,
                    y: m.target.y,
                    label: m.label,
                    distance: m.distance,
                })
                .collect(),
        }
    }

    pub fn to_map(&self) -> BTreeMap<u32, (f64, f64)> {
        self.points.iter().map(|p| (p.id, (p.x as f64, p.y as f64))).collect()
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Output(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Outcome<()> {
    fs::write(path, bytes).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

pub fn read_graph(path: &Path) -> Outcome<VesselGraph> {
    read_json::<GraphFile>(path)?.to_graph()
}

pub fn write_graph(path: &Path, g: &VesselGraph) -> Outcome<()> {
    write_json(path, &GraphFile::from_graph(g))
}

/// One CSV row per frame; `tre` is left empty when unavailable.
pub fn scores_csv(rows: &[(usize, ExtractionScore)]) -> String {
    let mut s = String::from("frame,precision,recall,f,tre\n");
    for (frame, sc) in rows {
        let tre = sc.tre.map(|t| format!("{t:.6}")).unwrap_or_default();
        let _ = writeln!(s, "{frame},{:.6},{:.6},{:.6},{tre}", sc.precision, sc.recall, sc.f_measure);
    }
    s
}

/// Text header (`width height`) followed by little-endian f32 samples.
pub fn write_scalar_map(path: &Path, map: &ScalarMap) -> Outcome<()> {
    let mut bytes = Vec::with_capacity(32 + 4 * map.data().len());
    let _ = writeln!(bytes, "SCALARMAP {} {}", map.width(), map.height());
    for v in map.data() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    write_file(path, &bytes)
}

pub fn read_scalar_map(path: &Path) -> Outcome<ScalarMap> {
    let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let bad = || Failure::Input(format!("{}: not a scalar map", path.display()));
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(bad)?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad())?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("SCALARMAP") {
        return Err(bad());
    }
    let w: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let h: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let body = &bytes[nl + 1..];
    if body.len() != 4 * w * h {
        return Err(bad());
    }
    let data = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
    ScalarMap::new(w, h, data).map_err(|_| bad())
}

#[cfg(test)]
mod tests {
    use super::*;
    use vco_core::graph::resample_centerline;

    #[test]
    fn graph_round_trip() {
        let g = resample_centerline(&[vec![(10.0, 10.0), (40.0, 10.0)], vec![(40.0, 10.0), (40.0, 40.0)]], 5.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.json");
        write_graph(&p, &g).unwrap();
        assert_eq!(read_graph(&p).unwrap(), g);
    }

    #[test]
    fn malformed_graph_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.json");
        std::fs::write(&p, "{\"points\": [], \"edges\": [[1, 2]]}").unwrap();
        assert!(matches!(read_graph(&p), Err(Failure::Input(_))));
        assert!(matches!(read_graph(&dir.path().join("missing.json")), Err(Failure::Input(_))));
    }

    #[test]
    fn scalar_map_round_trip() {
        let m = ScalarMap::new(3, 2, vec![0.0, 0.5, 1.0, f64::INFINITY, 2.25, -1.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        write_scalar_map(&p, &m).unwrap();
        assert_eq!(read_scalar_map(&p).unwrap(), m);
    }

    #[test]
    fn csv_layout() {
        let s = ExtractionScore { precision: 1.0, recall: 0.5, f_measure: 2.0 / 3.0, tre: None };
        assert_eq!(scores_csv(&[(1, s)]), "frame,precision,recall,f,tre\n1,1.000000,0.500000,0.666667,\n");
    }
}

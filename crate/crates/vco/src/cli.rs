//! `vco` subcommands: extract, track, synth, eval.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;
use vco_core::config::KEYS;
use vco_core::metrics::{score_centerline, sufficiency_run_length, tre, ExtractionScore};
use vco_core::pipeline::{extract, prepare_source, vesselness_map, Extraction};
use vco_core::synth::{generate_sequence, SynthConfig};
use vco_core::PipelineConfig;

use crate::formats::{
    read_graph, read_json, scores_csv, write_file, write_graph, write_json, write_scalar_map, CorrespondenceFile,
    CorrespondenceRecord, MatchedFile,
};
use crate::imageio::{read_gray, write_gray, write_overlay};
use crate::{Failure, Outcome};

fn path_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("PATH").value_parser(value_parser!(PathBuf)).required(true).help(help)
}

fn pipeline_args(cmd: Command) -> Command {
    let mut cmd = cmd
        .arg(Arg::new("config").long("config").value_name("PATH").value_parser(value_parser!(PathBuf)).help("key = value config file"))
        .arg(Arg::new("seed").long("seed").value_name("N").value_parser(value_parser!(u64)).help("Recorded in the log; the pipeline itself is deterministic"))
        .arg(Arg::new("no-hierarchical").long("no-hierarchical").action(ArgAction::SetTrue).help("Single flat window search per point"))
        .arg(Arg::new("no-dummy").long("no-dummy").action(ArgAction::SetTrue).help("Disable the dummy label"))
        .arg(Arg::new("overlay").long("overlay").action(ArgAction::SetTrue).help("Write overlay PNGs"));
    for key in KEYS {
        cmd = cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").help_heading("Pipeline parameters"));
    }
    cmd
}

fn synth_args(cmd: Command) -> Command {
    let num = |name: &'static str, help: &'static str| Arg::new(name).long(name).value_name("VALUE").help(help);
    cmd.arg(Arg::new("seed").long("seed").value_name("N").value_parser(value_parser!(u64)).default_value("0"))
        .arg(Arg::new("frames").long("frames").value_name("N").value_parser(value_parser!(usize)).default_value("15"))
        .arg(num("width", "Image width"))
        .arg(num("height", "Image height"))
        .arg(num("depth", "Branch generations"))
        .arg(num("branch-prob", "Split probability at branch ends"))
        .arg(num("width-min", "Smallest vessel diameter"))
        .arg(num("width-max", "Root vessel diameter"))
        .arg(num("global-x", "Peak global translation, x"))
        .arg(num("global-y", "Peak global translation, y"))
        .arg(num("global-period", "Frames per global motion cycle"))
        .arg(num("local-amplitude", "Peak local displacement"))
        .arg(num("local-sigma", "Smoothing of the local field"))
        .arg(num("local-period", "Frames per local motion cycle"))
        .arg(num("noise", "Pixel noise standard deviation"))
        .arg(num("inflow-start", "Visible arc-length fraction in the first frame"))
        .arg(num("inflow-end", "Visible arc-length fraction in the last frame"))
}

pub fn command() -> Command {
    let extract = pipeline_args(
        Command::new("extract")
            .about("Register a source centerline onto a destination frame")
            .arg(path_arg("src", "Source frame"))
            .arg(path_arg("dst", "Destination frame"))
            .arg(path_arg("graph", "Source vessel graph"))
            .arg(path_arg("out", "Output directory"))
            .arg(Arg::new("dump").long("dump").action(ArgAction::SetTrue).help("Also write vesselness and candidate lists")),
    );
    let track = pipeline_args(
        Command::new("track")
            .about("Propagate a centerline through a frame sequence")
            .arg(path_arg("frames", "Directory of frame_NNN images"))
            .arg(path_arg("initial", "Vessel graph of the first frame"))
            .arg(path_arg("out", "Output directory"))
            .arg(Arg::new("truth").long("truth").value_name("PATH").value_parser(value_parser!(PathBuf)).help("Directory of truth_NNN graphs")),
    );
    let synth = synth_args(
        Command::new("synth").about("Generate a synthetic sequence with ground truth").arg(path_arg("out", "Output directory")),
    );
    let eval = Command::new("eval")
        .about("Score result graphs against truth graphs")
        .arg(path_arg("results", "Directory of graph_NNN results"))
        .arg(path_arg("truth", "Directory of truth_NNN graphs"))
        .arg(Arg::new("out").long("out").value_name("PATH").value_parser(value_parser!(PathBuf)).help("CSV path (default: RESULTS/scores.csv)"))
        .arg(Arg::new("match_radius").long("match_radius").value_name("PX").value_parser(value_parser!(f64)).default_value("2"));
    Command::new("vco")
        .about("Vessel centerline extraction by correspondence optimization")
        .subcommand_required(true)
        .subcommands([extract, track, synth, eval])
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match matches.subcommand() {
        Some(("extract", m)) => cmd_extract(m),
        Some(("track", m)) => cmd_track(m),
        Some(("synth", m)) => cmd_synth(m),
        Some(("eval", m)) => cmd_eval(m),
        _ => Err(Failure::Input("unknown subcommand".into())),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("vco: {f}");
            f.exit_code()
        }
    }
}

fn path<'a>(m: &'a ArgMatches, name: &str) -> &'a Path {
    m.get_one::<PathBuf>(name).expect("required argument")
}

/// Defaults, then the config file, then per-key flags, then ablation switches.
pub fn pipeline_config(m: &ArgMatches) -> Outcome<PipelineConfig> {
    let mut cfg = match m.get_one::<PathBuf>("config") {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            PipelineConfig::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => PipelineConfig::default(),
    };
    for key in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v).map_err(|e| Failure::Input(e.to_string()))?;
        }
    }
    if m.get_flag("no-hierarchical") {
        cfg.hierarchical_search = false;
    }
    if m.get_flag("no-dummy") {
        cfg.dummy_label = false;
    }
    cfg.validate().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Outcome<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Output(format!("{}: {e}", dir.display())))
}

fn log_text(e: &Extraction, cfg: &PipelineConfig, seed: Option<u64>) -> String {
    let mut s = e.log.to_text();
    if let Some(seed) = seed {
        s.push_str(&format!("seed = {seed}\n"));
    }
    for line in cfg.to_text().lines() {
        s.push_str("config.");
        s.push_str(line);
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct CandidateDump {
    id: u32,
    candidates: Vec<(i32, i32, f64)>,
}

fn cmd_extract(m: &ArgMatches) -> Outcome<()> {
    let cfg = pipeline_config(m)?;
    let src = read_gray(path(m, "src"))?;
    let dst = read_gray(path(m, "dst"))?;
    let source = read_graph(path(m, "graph"))?;
    let out = path(m, "out");
    let e = extract(&src, &dst, &source, &cfg)?;
    ensure_dir(out)?;
    write_graph(&out.join("graph.json"), &e.graph)?;
    let mut matched = MatchedFile::from_points(&e.matched);
    matched.source_ids = "input".into();
    write_json(&out.join("matched.json"), &matched)?;
    write_file(&out.join("log.txt"), log_text(&e, &cfg, m.get_one::<u64>("seed").copied()).as_bytes())?;
    if m.get_flag("overlay") {
        write_overlay(&out.join("overlay.png"), &dst, &e.graph, &e.matched)?;
    }
    if m.get_flag("dump") {
        write_scalar_map(&out.join("vesselness.bin"), &vesselness_map(&dst, &cfg)?)?;
        let dump: Vec<CandidateDump> = source
            .points()
            .iter()
            .zip(&e.search.candidates.lists)
            .map(|(p, l)| CandidateDump { id: p.id, candidates: l.iter().map(|c| (c.pos.x, c.pos.y, c.distance)).collect() })
            .collect();
        write_json(&out.join("candidates.json"), &dump)?;
    }
    Ok(())
}

/// Files `prefix_NNN.ext` in `dir` with one of `exts`, keyed by NNN.
fn numbered(dir: &Path, prefix: &str, exts: &[&str]) -> Outcome<BTreeMap<usize, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let p = entry.map_err(|e| Failure::Input(e.to_string()))?.path();
        let (Some(stem), Some(ext)) = (p.file_stem().and_then(|s| s.to_str()), p.extension().and_then(|s| s.to_str())) else {
            continue;
        };
        if !exts.contains(&ext) {
            continue;
        }
        if let Some(n) = stem.strip_prefix(prefix).and_then(|r| r.strip_prefix('_')).and_then(|n| n.parse().ok()) {
            out.insert(n, p);
        }
    }
    Ok(out)
}

fn score_frame(graph: &vco_core::VesselGraph, truth: &vco_core::VesselGraph, radius: f64) -> Outcome<ExtractionScore> {
    score_centerline(&graph.rasterize(), &truth.rasterize(), radius).map_err(Failure::from)
}

fn cmd_track(m: &ArgMatches) -> Outcome<()> {
    let cfg = pipeline_config(m)?;
    let frame_paths = numbered(path(m, "frames"), "frame", &["png", "pgm"])?;
    if frame_paths.len() < 2 {
        return Err(Failure::Input("tracking needs at least 2 frames".into()));
    }
    let frames = frame_paths.values().map(|p| read_gray(p)).collect::<Outcome<Vec<_>>>()?;
    let numbers: Vec<usize> = frame_paths.keys().copied().collect();
    let initial = read_graph(path(m, "initial"))?;
    let truth = match m.get_one::<PathBuf>("truth") {
        Some(dir) => Some(numbered(dir, "truth", &["json"])?),
        None => None,
    };
    let out = path(m, "out");
    ensure_dir(out)?;
    let seed = m.get_one::<u64>("seed").copied();
    write_graph(&out.join(format!("graph_{:03}.json", numbers[0])), &initial)?;

    let mut rows = Vec::new();
    let mut source = initial;
    let mut failure = None;
    for t in 1..frames.len() {
        let n = numbers[t];
        let e = match extract(&frames[t - 1], &frames[t], &source, &cfg) {
            Ok(e) => e,
            Err(err) => {
                failure = Some((n, Failure::from(err)));
                break;
            }
        };
        write_graph(&out.join(format!("graph_{n:03}.json")), &e.graph)?;
        let mut matched = MatchedFile::from_points(&e.matched);
        matched.source_ids = if t == 1 { "input" } else { "resampled" }.into();
        write_json(&out.join(format!("matched_{n:03}.json")), &matched)?;
        write_file(&out.join(format!("log_{n:03}.txt")), log_text(&e, &cfg, seed).as_bytes())?;
        if m.get_flag("overlay") {
            write_overlay(&out.join(format!("overlay_{n:03}.png")), &frames[t], &e.graph, &e.matched)?;
        }
        if let Some(tp) = truth.as_ref().and_then(|tr| tr.get(&n)) {
            rows.push((n, score_frame(&e.graph, &read_graph(tp)?, cfg.match_radius)?));
        }
        match prepare_source(&e.graph, frames[t].width(), frames[t].height(), cfg.sample_interval) {
            Ok(next) => source = next,
            Err(err) => {
                failure = Some((n + 1, Failure::from(err)));
                break;
            }
        }
    }

    let tracked = frames.len() - 1 - usize::from(failure.is_some()).min(frames.len() - 1);
    let mut summary = String::new();
    if truth.is_some() {
        write_file(&out.join("scores.csv"), scores_csv(&rows).as_bytes())?;
        let fs: Vec<f64> = rows.iter().map(|(_, s)| s.f_measure).collect();
        summary.push_str(&format!("run_length = {}\n", sufficiency_run_length(&fs, cfg.sufficiency_threshold)));
    }
    match &failure {
        Some((n, f)) => {
            let last_good = numbers.iter().copied().filter(|&k| k < *n).max().unwrap_or(numbers[0]);
            summary.push_str(&format!("failed_frame = {n}\nlast_good_frame = {last_good}\n"));
            write_file(&out.join("summary.txt"), summary.as_bytes())?;
            eprintln!("vco: tracking stopped at frame {n}; last good frame {last_good}");
            Err(f.clone())
        }
        None => {
            summary.push_str(&format!("frames_tracked = {tracked}\n"));
            write_file(&out.join("summary.txt"), summary.as_bytes())
        }
    }
}

fn synth_config(m: &ArgMatches) -> Outcome<SynthConfig> {
    let mut c = SynthConfig { seed: *m.get_one::<u64>("seed").unwrap(), ..SynthConfig::default() };
    let get = |name: &str| -> Outcome<Option<f64>> {
        m.get_one::<String>(name)
            .map(|v| v.parse::<f64>().map_err(|_| Failure::Input(format!("--{name}: cannot parse '{v}'"))))
            .transpose()
    };
    let uint = |name: &str| -> Outcome<Option<usize>> {
        m.get_one::<String>(name)
            .map(|v| v.parse::<usize>().map_err(|_| Failure::Input(format!("--{name}: cannot parse '{v}'"))))
            .transpose()
    };
    if let Some(v) = uint("width")? {
        c.width = v;
    }
    if let Some(v) = uint("height")? {
        c.height = v;
    }
    if let Some(v) = uint("depth")? {
        c.depth = v as u32;
    }
    let floats: [(&str, &mut f64); 12] = [
        ("branch-prob", &mut c.branch_prob),
        ("width-min", &mut c.vessel_width.0),
        ("width-max", &mut c.vessel_width.1),
        ("global-x", &mut c.global_amplitude.0),
        ("global-y", &mut c.global_amplitude.1),
        ("global-period", &mut c.global_period),
        ("local-amplitude", &mut c.local_amplitude),
        ("local-sigma", &mut c.local_sigma),
        ("local-period", &mut c.local_period),
        ("noise", &mut c.noise),
        ("inflow-start", &mut c.inflow.0),
        ("inflow-end", &mut c.inflow.1),
    ];
    for (name, slot) in floats {
        if let Some(v) = get(name)? {
            *slot = v;
        }
    }
    c.validate().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(c)
}

fn cmd_synth(m: &ArgMatches) -> Outcome<()> {
    let cfg = synth_config(m)?;
    let n = *m.get_one::<usize>("frames").unwrap();
    let seq = generate_sequence(&cfg, n).map_err(|e| Failure::Input(e.to_string()))?;
    let out = path(m, "out");
    ensure_dir(out)?;
    for (t, f) in seq.frames.iter().enumerate() {
        write_gray(&out.join(format!("frame_{t:03}.png")), &f.image)?;
        write_graph(&out.join(format!("truth_{t:03}.json")), &f.truth)?;
        if t > 0 {
            let corr = CorrespondenceFile {
                src_frame: t - 1,
                dst_frame: t,
                points: seq
                    .correspondence(t - 1, t)
                    .into_iter()
                    .map(|(id, (x, y))| CorrespondenceRecord { id, x, y, clamped: f.clamped.contains(&id) })
                    .collect(),
            };
            write_json(&out.join(format!("corr_{:03}_{t:03}.json", t - 1)), &corr)?;
        }
    }
    write_file(&out.join("synth.txt"), format!("{cfg:#?}\nframes = {n}\n").as_bytes())
}

fn cmd_eval(m: &ArgMatches) -> Outcome<()> {
    let results_dir = path(m, "results");
    let truth_dir = path(m, "truth");
    let radius = *m.get_one::<f64>("match_radius").unwrap();
    let mut results = numbered(results_dir, "graph", &["json"])?;
    if results.is_empty() {
        results = numbered(results_dir, "truth", &["json"])?;
    }
    let truth = numbered(truth_dir, "truth", &["json"])?;
    if truth.is_empty() {
        return Err(Failure::Input(format!("{}: no truth_NNN.json files", truth_dir.display())));
    }
    if results.len() != truth.len() || results.keys().ne(truth.keys()) {
        return Err(Failure::Input(format!("{} result frames vs {} truth frames", results.len(), truth.len())));
    }
    let mut rows = Vec::new();
    for (&n, rp) in &results {
        let mut score = score_frame(&read_graph(rp)?, &read_graph(&truth[&n])?, radius)?;
        if n > 0 {
            score.tre = frame_tre(results_dir, truth_dir, n)?;
        }
        rows.push((n, score));
    }
    let out = m.get_one::<PathBuf>("out").cloned().unwrap_or_else(|| results_dir.join("scores.csv"));
    write_file(&out, scores_csv(&rows).as_bytes())
}

/// TRE of frame `n` when both an estimate keyed by truth ids and the truth
/// correspondence into `n` are available.
fn frame_tre(results_dir: &Path, truth_dir: &Path, n: usize) -> Outcome<Option<f64>> {
    let corr_name = format!("corr_{:03}_{n:03}.json", n - 1);
    let truth_corr = truth_dir.join(&corr_name);
    if !truth_corr.exists() {
        return Ok(None);
    }
    let truth = read_json::<CorrespondenceFile>(&truth_corr)?.to_map();
    let matched = results_dir.join(format!("matched_{n:03}.json"));
    let estimate = if matched.exists() {
        let f: MatchedFile = read_json(&matched)?;
        if f.source_ids != "input" {
            return Ok(None);
        }
        f.to_map()
    } else if results_dir.join(&corr_name).exists() {
        read_json::<CorrespondenceFile>(&results_dir.join(&corr_name))?.to_map()
    } else {
        return Ok(None);
    };
    Ok(tre(&estimate, &truth).ok())
}

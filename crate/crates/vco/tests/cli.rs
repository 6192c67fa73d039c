//! Subcommands driven in-process through `vco::cli::run`.

use std::fs;
use std::path::Path;

use vco::cli::run;
use vco::formats::write_graph;
use vco::imageio::write_gray;
use vco_core::GrayImage;

fn vco(args: &[&str]) -> i32 {
    run(std::iter::once("vco").chain(args.iter().copied()))
}

/// Small three-frame sequence so extraction stays fast in debug builds.
fn synth(dir: &Path, seed: &str) {
    let code = vco(&[
        "synth", "--out", dir.to_str().unwrap(), "--frames", "3", "--seed", seed, "--width", "200", "--height", "200",
        "--depth", "3", "--global-x", "4", "--global-y", "3",
    ]);
    assert_eq!(code, 0);
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_is_reproducible_per_seed() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    synth(a.path(), "7");
    synth(b.path(), "7");
    synth(c.path(), "8");
    for name in ["frame_002.png", "truth_002.json", "corr_001_002.json", "synth.txt"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    assert_ne!(fs::read(a.path().join("frame_000.png")).unwrap(), fs::read(c.path().join("frame_000.png")).unwrap());
}

#[test]
fn extract_writes_outputs_and_is_deterministic() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "3");
    let d = data.path();
    let outs = [d.join("run1"), d.join("run2")];
    for out in &outs {
        let code = vco(&[
            "extract", "--src", s(&d.join("frame_000.png")), "--dst", s(&d.join("frame_001.png")), "--graph",
            s(&d.join("truth_000.json")), "--out", s(out), "--overlay",
        ]);
        assert_eq!(code, 0);
    }
    for name in ["graph.json", "matched.json", "log.txt"] {
        assert_eq!(fs::read(outs[0].join(name)).unwrap(), fs::read(outs[1].join(name)).unwrap(), "{name}");
    }
    assert!(outs[0].join("overlay.png").exists());
    let log = fs::read_to_string(outs[0].join("log.txt")).unwrap();
    assert!(log.contains("mrf_mode = dummy"));
    assert!(log.contains("config.lambda = 0.05"));
}

#[test]
fn no_dummy_flag_disables_the_dummy_label() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "4");
    let d = data.path();
    let out = d.join("out");
    let code = vco(&[
        "extract", "--src", s(&d.join("frame_000.png")), "--dst", s(&d.join("frame_001.png")), "--graph",
        s(&d.join("truth_000.json")), "--out", s(&out), "--no-dummy", "--no-hierarchical", "--dump",
    ]);
    assert_eq!(code, 0);
    let log = fs::read_to_string(out.join("log.txt")).unwrap();
    assert!(log.contains("dummy_count = 0"));
    assert!(log.contains("search_mode = flat"));
    assert!(out.join("vesselness.bin").exists());
    assert!(out.join("candidates.json").exists());
}

#[test]
fn unreadable_input_exits_2() {
    let out = tempfile::tempdir().unwrap();
    let missing = out.path().join("missing.png");
    let code =
        vco(&["extract", "--src", s(&missing), "--dst", s(&missing), "--graph", s(&missing), "--out", s(out.path())]);
    assert_eq!(code, 2);
    assert_eq!(vco(&["extract", "--bogus"]), 2);
}

#[test]
fn blank_destination_exits_3() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "5");
    let d = data.path();
    let blank = d.join("blank.png");
    write_gray(&blank, &GrayImage::filled(200, 200, 128).unwrap()).unwrap();
    let code = vco(&[
        "extract", "--src", s(&d.join("frame_000.png")), "--dst", s(&blank), "--graph", s(&d.join("truth_000.json")),
        "--out", s(&d.join("out")),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn invalid_parameter_exits_2() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "5");
    let d = data.path();
    let code = vco(&[
        "extract", "--src", s(&d.join("frame_000.png")), "--dst", s(&d.join("frame_001.png")), "--graph",
        s(&d.join("truth_000.json")), "--out", s(&d.join("out")), "--w_k", "100",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn eval_of_truth_against_itself_is_perfect() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "6");
    let csv = data.path().join("scores.csv");
    assert_eq!(vco(&["eval", "--results", s(data.path()), "--truth", s(data.path()), "--out", s(&csv)]), 0);
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "frame,precision,recall,f,tre");
    assert_eq!(lines[1], "0,1.000000,1.000000,1.000000,");
    assert_eq!(lines[2], "1,1.000000,1.000000,1.000000,0.000000");
    assert_eq!(lines.len(), 4);
}

#[test]
fn eval_with_mismatched_frames_exits_2() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "6");
    let results = data.path().join("results");
    fs::create_dir(&results).unwrap();
    let g = vco::formats::read_graph(&data.path().join("truth_000.json")).unwrap();
    write_graph(&results.join("graph_000.json"), &g).unwrap();
    assert_eq!(vco(&["eval", "--results", s(&results), "--truth", s(data.path())]), 2);
}

#[test]
fn track_without_truth_writes_graphs_only() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "9");
    let d = data.path();
    let out = d.join("track");
    let code = vco(&["track", "--frames", s(d), "--initial", s(&d.join("truth_000.json")), "--out", s(&out)]);
    assert_eq!(code, 0);
    for name in ["graph_000.json", "graph_001.json", "graph_002.json", "matched_002.json", "log_002.txt"] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert!(!out.join("scores.csv").exists());
    assert_eq!(fs::read_to_string(out.join("summary.txt")).unwrap(), "frames_tracked = 2\n");
}

#[test]
fn track_with_truth_scores_each_frame() {
    let data = tempfile::tempdir().unwrap();
    synth(data.path(), "9");
    let d = data.path();
    let out = d.join("track");
    let code = vco(&[
        "track", "--frames", s(d), "--initial", s(&d.join("truth_000.json")), "--out", s(&out), "--truth", s(d),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("scores.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().starts_with("run_length = "));
    // Matched ids from the first step refer to the input graph, so eval can report TRE.
    assert_eq!(vco(&["eval", "--results", s(&out), "--truth", s(d), "--out", s(&d.join("e.csv"))]), 0);
    let e = fs::read_to_string(d.join("e.csv")).unwrap();
    let row1: Vec<&str> = e.lines().nth(2).unwrap().split(',').collect();
    assert!(!row1[4].is_empty());
}

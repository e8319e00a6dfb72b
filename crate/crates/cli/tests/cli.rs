//! End-to-end tests of the `fuzzyl1` binary: exit codes, emitted files,
//! and round-trips through the on-disk formats.

use fuzzyl1_cli::config::{bundled_config, parse_scenario};
use fuzzyl1_cli::trace_io;
use std::path::Path;
use std::process::{Command, Output};

fn fuzzyl1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzyl1"))
        .args(args)
        .output()
        .expect("spawning fuzzyl1")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A fast scenario document derived from the bundled coldstart-scheduled config: same
/// structure, shorter horizon, fewer substeps.
fn quick_scenario(name: &str, t_end: f64) -> String {
    let mut doc: serde_json::Value =
        serde_json::from_str(bundled_config("coldstart-scheduled").unwrap()).unwrap();
    doc["name"] = serde_json::json!(name);
    doc["integrator"]["t_end"] = serde_json::json!(t_end);
    doc["integrator"]["substeps"] = serde_json::json!(2);
    serde_json::to_string_pretty(&doc).unwrap()
}

#[test]
fn validate_accepts_every_bundled_config() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["case1", "case2", "coldstart-scheduled", "coldstart-fixed", "tuning-ref"] {
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, bundled_config(name).unwrap()).unwrap();
        let out = fuzzyl1(&["validate", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            stderr_of(&out)
        );
        assert!(stdout_of(&out).starts_with("ok:"));
    }
}

#[test]
fn validate_names_the_missing_field_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(bundled_config("case1").unwrap()).unwrap();
    doc["plant"].as_object_mut().unwrap().remove("a1");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = fuzzyl1(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("plant.a1"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_1() {
    let out = fuzzyl1(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");
}

#[test]
fn unknown_flag_exits_1() {
    let out = fuzzyl1(&["simulate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = fuzzyl1(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn missing_config_file_exits_1() {
    let out = fuzzyl1(&["simulate", "/nonexistent/nowhere.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_scenario_name_exits_1() {
    let out = fuzzyl1(&["scenario", "case9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("case9"));
}

#[test]
fn simulate_writes_csv_meta_and_svg_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("quick.json");
    std::fs::write(&cfg_path, quick_scenario("quick", 2.0)).unwrap();
    let out = fuzzyl1(&[
        "simulate",
        cfg_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--plot",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv_path = dir.path().join("quick.csv");
    let rows = trace_io::read_csv(&csv_path).unwrap();
    assert_eq!(rows.len(), 201, "2.0 s at dt = 0.01 plus the initial row");
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with(trace_io::CSV_HEADER));
    // Re-emitting the parsed rows reproduces the file byte for byte.
    let trace = fuzzyl1_core::sim::Trace {
        rows: rows.clone(),
        diverged: false,
    };
    assert_eq!(trace_io::trace_to_csv(&trace), text);

    let meta: trace_io::TraceMeta =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("quick.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta.rows, 201);
    assert!(!meta.diverged);

    let svg = std::fs::read_to_string(dir.path().join("quick.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
}

#[test]
fn simulate_runs_bit_identically_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("rep.json");
    std::fs::write(&cfg_path, quick_scenario("rep", 1.0)).unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("run{run}"));
        let out = fuzzyl1(&[
            "simulate",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read_to_string(out_dir.join("rep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn diverging_simulation_exits_3_unless_expected() {
    let dir = tempfile::tempdir().unwrap();
    // An aggressive constant gain on a coarse grid blows up numerically.
    let mut doc: serde_json::Value =
        serde_json::from_str(bundled_config("coldstart-fixed").unwrap()).unwrap();
    doc["name"] = serde_json::json!("blowup");
    doc["filter"] = serde_json::json!({"type": "constant", "k_diag": [400.0, 400.0]});
    doc["integrator"]["substeps"] = serde_json::json!(1);
    doc["expect_divergence"] = serde_json::json!(false);
    let path = dir.path().join("blowup.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = fuzzyl1(&[
        "simulate",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    let meta: trace_io::TraceMeta = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("blowup.meta.json")).unwrap(),
    )
    .unwrap();
    assert!(meta.diverged);

    // The same run with expect_divergence set reports success.
    doc["expect_divergence"] = serde_json::json!(true);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = fuzzyl1(&[
        "simulate",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
}

#[test]
fn tune_smoke_campaign_emits_files_and_pareto_subcommand_reads_them_back() {
    let dir = tempfile::tempdir().unwrap();
    let scenario: serde_json::Value =
        serde_json::from_str(&quick_scenario("smoke", 1.0)).unwrap();
    let campaign = serde_json::json!({
        "scenario": scenario,
        "swarm": { "population": 2, "generations": 1, "seed": 7 }
    });
    let cfg_path = dir.path().join("campaign.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&campaign).unwrap()).unwrap();

    let out_dir = dir.path().join("outputs");
    let out = fuzzyl1(&[
        "tune",
        cfg_path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let history = std::fs::read_to_string(out_dir.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3, "header plus 2 evaluated pairs");
    assert!(out_dir.join("pareto.csv").exists());
    assert!(out_dir.join("best_compromise.json").exists());

    let front_dir = dir.path().join("front");
    let out = fuzzyl1(&[
        "pareto",
        out_dir.join("history.csv").to_str().unwrap(),
        "--out",
        front_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let front = std::fs::read_to_string(front_dir.join("front.csv")).unwrap();
    assert!(front.starts_with("E,U,generation,particle"));
    assert!(front.lines().count() >= 2, "at least one front row");
    assert!(front_dir.join("compromise.json").exists());
}

#[test]
fn tune_install_updates_scenario_config() {
    let dir = tempfile::tempdir().unwrap();
    let scenario: serde_json::Value =
        serde_json::from_str(&quick_scenario("target", 1.0)).unwrap();
    let campaign = serde_json::json!({
        "scenario": scenario,
        "swarm": { "population": 2, "generations": 1, "seed": 11 }
    });
    let cfg_path = dir.path().join("campaign.json");
    std::fs::write(&cfg_path, serde_json::to_string(&campaign).unwrap()).unwrap();
    let target_path = dir.path().join("target.json");
    std::fs::write(&target_path, quick_scenario("target", 1.0)).unwrap();

    let out = fuzzyl1(&[
        "tune",
        cfg_path.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--install",
        target_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let best: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("o/best_compromise.json")).unwrap(),
    )
    .unwrap();
    let installed = parse_scenario(&std::fs::read_to_string(&target_path).unwrap()).unwrap();
    match installed.filter {
        fuzzyl1_cli::config::FilterConfig::Fuzzy { params, .. } => {
            let want: Vec<f64> = best["params"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            assert_eq!(params, want);
        }
        _ => panic!("expected fuzzy filter after install"),
    }
}

#[test]
fn scenario_subcommand_runs_bundled_case1() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzyl1(&["scenario", "case1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(dir.path().join("case1.csv").exists());
    assert!(dir.path().join("case1.meta.json").exists());
    let meta: trace_io::TraceMeta = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("case1.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta.rows, 2301);
    assert!(!meta.diverged);
}

#[test]
fn pareto_rejects_malformed_history() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.csv");
    std::fs::write(&path, "not,a,history\n1,2,3\n").unwrap();
    let out = fuzzyl1(&["pareto", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

/// The quick scenario must exist for other suites that reference bundled
/// files on disk.
#[test]
fn bundled_files_on_disk_match_embedded_copies() {
    for (name, file) in [
        ("case1", "case1.json"),
        ("case2", "case2.json"),
        ("coldstart-scheduled", "coldstart-scheduled.json"),
        ("coldstart-fixed", "coldstart-fixed.json"),
        ("tuning-ref", "tuning.json"),
    ] {
        let disk = std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/{file}")),
        )
        .unwrap();
        assert_eq!(disk, bundled_config(name).unwrap(), "configs/{file} drifted");
    }
}

//! End-to-end tests of the `dodge` binary: subcommands, JSON output,
//! record files and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use dodge_core::synth;

fn dodge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dodge")).args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn write_defect_dir(dir: &Path) {
    for (i, rows) in [50usize, 60].iter().enumerate() {
        let data = synth::planted_dataset(&format!("rel{i}"), *rows, 4, 0.1, 31 + i as u64);
        data.to_csv(&dir.join(format!("rel-{i}.csv")), "defects", Some("loc")).unwrap();
    }
}

#[test]
fn tune_prints_a_summary_and_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_defect_dir(dir.path());
    let data = dir.path().to_str().unwrap();
    let run = || {
        stdout_json(&dodge(&[
            "tune", "--task", "defect", "--data", data, "--epsilon", "0.2", "--n", "30",
            "--goal", "d2h", "--seed", "1",
        ]))
    };
    let a = run();
    assert_eq!(a["evaluations"], 30);
    let score = a["test_score"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&score));
    let b = run();
    assert_eq!(a["test_score"], b["test_score"]);
}

#[test]
fn fft_and_baselines_run_on_defect_data() {
    let dir = tempfile::tempdir().unwrap();
    write_defect_dir(dir.path());
    let data = dir.path().to_str().unwrap();

    let fft = stdout_json(&dodge(&["fft", "--task", "defect", "--data", data, "--goal", "d2h"]));
    assert_eq!(fft["evaluations"], 16);

    let random = stdout_json(&dodge(&[
        "baseline", "--kind", "random", "--n", "10", "--task", "defect", "--data", data,
        "--goal", "popt20", "--seed", "3",
    ]));
    assert_eq!(random["evaluations"], 10);

    let smotuned = stdout_json(&dodge(&[
        "baseline", "--kind", "smotuned", "--task", "defect", "--data", data, "--goal", "d2h",
        "--seed", "3",
    ]));
    assert!(smotuned["evaluations"].as_u64().unwrap() >= 30);
}

#[test]
fn tune_runs_the_text_task_with_cross_validation() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("issues.csv");
    synth::write_text_fixture(&corpus, 30, 4).unwrap();
    let out = stdout_json(&dodge(&[
        "tune", "--task", "text", "--data", corpus.to_str().unwrap(), "--goal", "d2h",
        "--seed", "2", "--cross-x", "1", "--cross-y", "3", "--n", "8", "--n1", "4",
    ]));
    // 8 evaluations per bin, 3 bins
    assert_eq!(out["evaluations"], 24);
}

#[test]
fn experiment_report_and_cells_round_trip() {
    let data_dir = tempfile::tempdir().unwrap();
    write_defect_dir(data_dir.path());
    let out_dir = tempfile::tempdir().unwrap();
    let config_path = out_dir.path().join("exp.json");
    let config = serde_json::json!({
        "task": "Defect",
        "datasets": [data_dir.path()],
        "treatments": [
            {"kind": "dodge", "epsilon": 0.2, "n": 30},
            {"kind": "untuned", "learner": "DecisionTree"}
        ],
        "goals": ["D2h", "Popt20"],
        "repeats": 3,
        "base_seed": 7,
        "output_dir": out_dir.path().join("runs")
    });
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let exp = dodge(&["experiment", config_path.to_str().unwrap()]);
    assert!(exp.status.success(), "{}", String::from_utf8_lossy(&exp.stderr));
    let records = out_dir.path().join("runs").join("records.jsonl");
    assert!(records.exists());
    // 1 dataset x 2 treatments x 2 goals x 3 repeats
    let lines = std::fs::read_to_string(&records).unwrap().lines().count();
    assert_eq!(lines, 12);

    let report = dodge(&["report", records.to_str().unwrap(), "--goal", "d2h"]);
    assert!(report.status.success());
    let text = String::from_utf8_lossy(&report.stdout).to_string();
    assert!(text.contains("best"));
    assert!(text.contains("evaluations per run"));

    let cells = dodge(&["cells", records.to_str().unwrap(), "--epsilon", "0.2"]);
    assert!(cells.status.success());
    let cell_report: serde_json::Value = serde_json::from_slice(&cells.stdout).unwrap();
    assert_eq!(cell_report["max_cells"], 25);
    assert_eq!(cell_report["p"], 2);
}

#[test]
fn synth_writes_loadable_fixtures() {
    let out = tempfile::tempdir().unwrap();
    let result = dodge(&[
        "synth", "--out", out.path().to_str().unwrap(), "--datasets", "2", "--docs", "12",
    ]);
    assert!(result.status.success());
    assert!(out.path().join("poi").join("poi-3.0.csv").exists());
    assert!(out.path().join("synth-01").join("r0-train.csv").exists());
    assert!(out.path().join("issues.csv").exists());
    // the generated releases drive the tune pipeline directly
    let tune = dodge(&[
        "tune", "--task", "defect", "--data", out.path().join("synth-00").to_str().unwrap(),
        "--goal", "d2h", "--n", "10", "--n1", "5",
    ]);
    assert!(tune.status.success(), "{}", String::from_utf8_lossy(&tune.stderr));
}

#[test]
fn exit_codes_distinguish_config_and_data_errors() {
    // config error: bad epsilon
    let dir = tempfile::tempdir().unwrap();
    write_defect_dir(dir.path());
    let data = dir.path().to_str().unwrap();
    let bad_eps = dodge(&[
        "tune", "--task", "defect", "--data", data, "--epsilon", "1.5", "--goal", "d2h",
    ]);
    assert_eq!(bad_eps.status.code(), Some(1));

    // config error: popt on text
    let corpus = dir.path().join("c.csv");
    synth::write_text_fixture(&corpus, 10, 1).unwrap();
    let bad_goal = dodge(&[
        "tune", "--task", "text", "--data", corpus.to_str().unwrap(), "--goal", "popt20",
    ]);
    assert_eq!(bad_goal.status.code(), Some(1));

    // data error: missing dataset
    let missing = dodge(&[
        "tune", "--task", "defect", "--data", "/nonexistent/nowhere", "--goal", "d2h",
    ]);
    assert_eq!(missing.status.code(), Some(2));

    // data error: malformed CSV cell
    let bad_dir = tempfile::tempdir().unwrap();
    std::fs::write(bad_dir.path().join("a.csv"), "m,defects\n1,1\n").unwrap();
    std::fs::write(bad_dir.path().join("b.csv"), "m,defects\noops,0\n").unwrap();
    let bad_cell = dodge(&[
        "tune", "--task", "defect", "--data", bad_dir.path().to_str().unwrap(), "--goal", "d2h",
        "--loc-column", "",
    ]);
    assert_eq!(bad_cell.status.code(), Some(2));
}

//! Exit-code contract and output-format checks for the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use awlssvm_core::{save_dataset, synth};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_awlssvm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn write_demo_dataset(dir: &Path) -> PathBuf {
    let ds = synth::complementary_views(15, 0.3, 40);
    let path = dir.join("demo");
    save_dataset(&ds, &path).unwrap();
    path
}

#[test]
fn train_writes_a_model_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let model = tmp.path().join("model.json");
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(model.exists());
}

#[test]
fn train_missing_view_file_exits_one_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    fs::remove_file(data.join("view1.csv")).unwrap();
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out",
        tmp.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("view1"), "stderr: {}", stderr(&out));
}

#[test]
fn train_invalid_beta_exits_one_and_names_the_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[train]\nbeta = 1.5\n").unwrap();
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("beta"), "stderr: {}", stderr(&out));
}

#[test]
fn predict_round_trip_reports_perfect_training_accuracy() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let model = tmp.path().join("model.json");
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "[train]\ngamma = 1.0\nkernel = { family = \"rbf\", bandwidth = 2.0 }\n",
    )
    .unwrap();
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let pred = tmp.path().join("pred.csv");
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        pred.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("balanced_accuracy 1.000000"),
        "stdout: {}",
        stdout(&out)
    );
    let body = fs::read_to_string(&pred).unwrap();
    // Header plus one row per sample.
    assert_eq!(body.lines().count(), 1 + 45);
    assert!(body.starts_with("sample_index,predicted_class,score_0,score_1,score_2"));
}

#[test]
fn predict_view_count_mismatch_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let model = tmp.path().join("model.json");
    run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);

    // A dataset with a single view cannot be scored by a two-view model.
    let single = synth::informative_plus_noise(10, 0.3, 1)
        .single_view(0)
        .unwrap();
    let single_dir = tmp.path().join("single");
    save_dataset(&single, &single_dir).unwrap();
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        single_dir.to_str().unwrap(),
        "--out",
        tmp.path().join("p.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tune_writes_the_trial_log() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[search]\nbudget = 3\nseed = 11\n").unwrap();
    let log = tmp.path().join("tune.json");
    let out = run(&[
        "tune",
        "--data",
        data.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--method",
        "aw",
        "--out",
        log.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("best trial"));
    let body: serde_json::Value = serde_json::from_str(&fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(body["trials"].as_array().unwrap().len(), 3);
}

#[test]
fn linear_kernel_config_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "[train]\nkernel = { family = \"linear\" }\n\n[search]\nbudget = 2\n",
    )
    .unwrap();
    let report = tmp.path().join("r.json");
    let out = run(&[
        "benchmark",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "aw",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    // Linear kernels record no bandwidth in the trial log.
    let body = fs::read_to_string(&report).unwrap();
    assert!(body.contains("\"bandwidth\": null"), "report: {body}");
}

#[test]
fn benchmark_rejects_unknown_method() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let out = run(&[
        "benchmark",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "aw,svm",
        "--out",
        tmp.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("method"));
}

#[test]
fn benchmark_table_uses_mean_std_cell_format() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[search]\nbudget = 1\n").unwrap();
    let report = tmp.path().join("r.json");
    let out = run(&[
        "benchmark",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "late",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Late Fusion"), "stdout: {text}");
    // Cell like 85.44(±4.23): two decimals, std in parentheses.
    let has_cell = text.split_whitespace().any(|tok| {
        tok.split_once("(±").is_some_and(|(mean, rest)| {
            rest.ends_with(')')
                && mean.split_once('.').is_some_and(|(_, frac)| frac.len() == 2)
        })
    });
    assert!(has_cell, "no mean(±std) cell in: {text}");
    assert!(report.exists());
}

#[test]
fn compare_identical_reports_yields_t_zero_p_one() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_demo_dataset(tmp.path());
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[search]\nbudget = 1\n").unwrap();
    let report = tmp.path().join("r.json");
    run(&[
        "benchmark",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "late",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let out = run(&[
        "compare",
        "--reports",
        report.to_str().unwrap(),
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("T=0.0 p=1.00000000"),
        "stdout: {}",
        stdout(&out)
    );
}

#[test]
fn compare_nine_datasets_with_uniform_improvement() {
    // Nine paired scores with A uniformly better: T = 0, p = 2/512.
    let tmp = tempfile::tempdir().unwrap();
    let entry = |dataset: &str, method: &str, mean: f64| {
        format!(
            r#"{{"format_version":"1","dataset":"{dataset}","method":"{method}","test_fraction":0.2,
               "folds":3,"tuner_seed":7,"splits":[{{"seed":0,"config":{{"gamma":1.0,"rho":1.0,
               "beta":0.7,"iterations":2,"kernel":{{"family":"linear"}},"standardize":true}},
               "balanced_accuracy":{mean},"trials":[]}}],"mean":{mean},"std":0.0}}"#
        )
    };
    let mut entries_a = Vec::new();
    let mut entries_b = Vec::new();
    for d in 0..9 {
        let name = format!("d{d}");
        entries_a.push(entry(&name, "aw", 0.80 + 0.01 * d as f64));
        entries_b.push(entry(&name, "bsv", 0.70 + 0.005 * d as f64));
    }
    let report_a = tmp.path().join("a.json");
    let report_b = tmp.path().join("b.json");
    fs::write(&report_a, format!("[{}]", entries_a.join(","))).unwrap();
    fs::write(&report_b, format!("[{}]", entries_b.join(","))).unwrap();

    let out = run(&[
        "compare",
        "--reports",
        report_a.to_str().unwrap(),
        report_b.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("aw vs bsv: T=0.0 p=0.00390625 (n=9)"),
        "stdout: {text}"
    );
}

#[test]
fn compare_mismatched_dataset_lists_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let report_a = tmp.path().join("a.json");
    let report_b = tmp.path().join("b.json");
    // Hand-written minimal reports over different dataset sets.
    let entry = |dataset: &str, mean: f64| {
        format!(
            r#"{{"format_version":"1","dataset":"{dataset}","method":"aw","test_fraction":0.2,
               "folds":3,"tuner_seed":7,"splits":[{{"seed":0,"config":{{"gamma":1.0,"rho":1.0,
               "beta":0.7,"iterations":2,"kernel":{{"family":"linear"}},"standardize":true}},
               "balanced_accuracy":{mean},"trials":[]}}],"mean":{mean},"std":0.0}}"#
        )
    };
    fs::write(&report_a, format!("[{}]", entry("x", 0.9))).unwrap();
    fs::write(&report_b, format!("[{}]", entry("y", 0.8))).unwrap();
    let out = run(&[
        "compare",
        "--reports",
        report_a.to_str().unwrap(),
        report_b.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("dataset lists differ"));
}

#[test]
fn gen_data_shaped_writes_a_loadable_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("shaped");
    let out = run(&[
        "gen-data",
        "--out",
        dir.to_str().unwrap(),
        "--flavor",
        "shaped",
        "--samples",
        "30",
        "--classes",
        "3",
        "--dims",
        "4,5",
        "--name",
        "tiny",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let ds = awlssvm_core::load_dataset(&dir).unwrap();
    assert_eq!(ds.name(), "tiny");
    assert_eq!(ds.num_samples(), 30);
    assert_eq!(ds.num_views(), 2);
}

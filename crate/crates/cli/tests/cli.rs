use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn maxnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxnorm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, seed: &str) -> std::path::PathBuf {
    let out = dir.join(name);
    let o = maxnorm(&[
        "synth",
        "--n",
        "4",
        "--class",
        "1:15",
        "--class",
        "2:15",
        "--separation",
        "6",
        "--noise",
        "0.3",
        "--seed",
        seed,
        "-o",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn synth_train_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "train.tsv", "3");
    let text = fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 30);
    assert_eq!(text.lines().next().unwrap().split('\t').count(), 5);

    let weights = dir.path().join("w.json");
    let o = maxnorm(&["train", "--data", p(&data), "-o", p(&weights)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&weights).unwrap()).unwrap();
    assert_eq!(saved["method"], "uniform");
    assert_eq!(saved["alpha"], 0.01);
    assert_eq!(saved["class_labels"], serde_json::json!([1.0, 2.0]));
    assert_eq!(saved["weights"].as_array().unwrap().len(), 4);

    let scored = dir.path().join("score.json");
    let o = maxnorm(&[
        "evaluate",
        "--weights",
        p(&weights),
        "--data",
        p(&data),
        "--out",
        p(&scored),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("accuracy 100.00%"), "{stdout}");
    let scored: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&scored).unwrap()).unwrap();
    assert_eq!(
        scored["confusion"]["counts"],
        serde_json::json!([[15, 0], [0, 15]])
    );
}

#[test]
fn mse_training_with_first_k_subset() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "train.tsv", "4");
    let weights = dir.path().join("w.json");
    let o = maxnorm(&[
        "train",
        "--data",
        p(&data),
        "--method",
        "mse",
        "--first-k",
        "1:5",
        "--first-k",
        "2:5",
        "-o",
        p(&weights),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("trained on 10 samples"));
}

#[test]
fn experiment_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "a.tsv", "5");
    synth(dir.path(), "b.tsv", "5");
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "name = \"cli\"\n[data]\ntrain = \"a.tsv\"\ntest = \"b.tsv\"\n\
         [subset]\nmode = \"random_k\"\ntotal = 8\nseed = 1\nrepetitions = 2\n",
    )
    .unwrap();

    let run = |prefix: &str| {
        let out = dir.path().join(prefix);
        let o = maxnorm(&["experiment", p(&cfg), "-o", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let first = run("r1");
    let second = run("r2");
    let read = |base: &Path, ext: &str| fs::read(format!("{}{ext}", base.display())).unwrap();
    assert_eq!(read(&first, ".json"), read(&second, ".json"));
    assert_eq!(read(&first, ".txt"), read(&second, ".txt"));
    let timing: serde_json::Value = serde_json::from_slice(&read(&first, ".timing.json")).unwrap();
    assert_eq!(timing["uniform_seconds"].as_array().unwrap().len(), 2);

    let o = maxnorm(&[
        "experiment",
        p(&cfg),
        "-o",
        p(&dir.path().join("nested/deeper/u")),
        "--no-mse",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&read(&dir.path().join("nested/deeper/u"), ".json")).unwrap();
    assert!(report.get("mse").is_none());
    assert_eq!(report["uniform"]["accuracies"].as_array().unwrap().len(), 2);
}

#[test]
fn remove_outliers_splits_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.tsv", "6");
    let kept = dir.path().join("kept.tsv");
    let removed = dir.path().join("removed.tsv");
    let report = dir.path().join("rep.json");
    let o = maxnorm(&[
        "remove-outliers",
        "--data",
        p(&data),
        "--top-k",
        "7",
        "--kept",
        p(&kept),
        "--removed",
        p(&removed),
        "--report",
        p(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&kept).unwrap().lines().count(), 23);
    assert_eq!(fs::read_to_string(&removed).unwrap().lines().count(), 7);
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["removed_indices"].as_array().unwrap().len(), 7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");

    assert_eq!(maxnorm(&["train"]).status.code(), Some(2));
    assert_eq!(maxnorm(&["no-such-command"]).status.code(), Some(2));

    let missing = dir.path().join("missing.tsv");
    let o = maxnorm(&["train", "--data", p(&missing), "-o", p(&w)]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.matches("missing.tsv").count(), 1, "{err}");

    let ragged = dir.path().join("ragged.tsv");
    fs::write(&ragged, "1\t0.5\t1\n2\t0.5\n").unwrap();
    let o = maxnorm(&["train", "--data", p(&ragged), "-o", p(&w)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));

    let data = synth(dir.path(), "d.tsv", "7");
    let o = maxnorm(&[
        "train",
        "--data",
        p(&data),
        "--max-iterations",
        "2",
        "-o",
        p(&w),
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    // identical targets and features: every deviation equals the maximum
    let flat = dir.path().join("flat.tsv");
    fs::write(&flat, "1\t0\n2\t0\n1\t0\n2\t0\n").unwrap();
    let kept = dir.path().join("k.tsv");
    let o = maxnorm(&[
        "remove-outliers",
        "--data",
        p(&flat),
        "--tolerance",
        "0",
        "--kept",
        p(&kept),
    ]);
    assert_eq!(
        o.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = maxnorm(&[
        "remove-outliers",
        "--data",
        p(&flat),
        "--tolerance",
        "0",
        "--allow-remove-all",
        "--kept",
        p(&kept),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

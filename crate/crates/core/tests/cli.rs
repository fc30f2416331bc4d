use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use uwbocc::ingest::{cir_file, DatasetManifest};
use uwbocc::radar::{ActivityLabel, ComplexMatrix};

const BIN: &str = env!("CARGO_BIN_EXE_uwbocc");

fn uwbocc(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("UWBOCC_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = uwbocc(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    uwbocc(dir, args).status.code().expect("exit code")
}

fn files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn label_counts(manifest: &Path) -> Vec<usize> {
    let m = DatasetManifest::read(manifest).unwrap();
    ActivityLabel::ALL
        .iter()
        .map(|&l| m.records.iter().filter(|r| r.label == l).count())
        .collect()
}

const SMALL: &[&str] = &["--n-fast", "16", "--m-slow", "40"];
const SPLIT: &[&str] = &[
    "--test-per-class",
    "6",
    "--val-breathing",
    "4",
    "--empty-val",
    "4",
    "--empty-test",
    "6",
];

fn small_dataset(dir: &Path) {
    let mut args = vec![
        "simulate", "--out", "ds", "--breathing", "24", "--talking", "0", "--moving", "0", "--empty", "24",
        "--seed", "11",
    ];
    args.extend_from_slice(SMALL);
    ok(dir, &args);
}

fn train_args<'a>(out: &'a str, epochs: &'a str) -> Vec<&'a str> {
    let mut a = vec![
        "train",
        "--dataset",
        "ds",
        "--seed",
        "5",
        "--out",
        out,
        "--epochs",
        epochs,
        "--patience",
        "100",
        "--batch-size",
        "16",
        "--reuse-occupied",
        "2",
        "--reuse-empty",
        "2",
    ];
    a.extend_from_slice(SPLIT);
    a
}

#[test]
fn simulate_writes_requested_counts_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "simulate", "--breathing", "10", "--talking", "10", "--moving", "10", "--empty", "5", "--seed", "7",
    ];
    for out in ["a", "b"] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--out", out]);
        args.extend_from_slice(SMALL);
        ok(dir.path(), &args);
    }
    let manifest = dir.path().join("a/manifest.json");
    assert_eq!(label_counts(&manifest), vec![10, 10, 10, 5]);
    let a = files(&dir.path().join("a"));
    assert_eq!(a.len(), 36);
    assert_eq!(a, files(&dir.path().join("b")));

    let mut args: Vec<&str> = base.iter().copied().filter(|&x| x != "--seed" && x != "7").collect();
    args.extend_from_slice(&["--out", "c", "--seed", "8"]);
    args.extend_from_slice(SMALL);
    ok(dir.path(), &args);
    assert_ne!(a, files(&dir.path().join("c")));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "n_fast = 16\n[simulate]\nbreathing = 3\ntalking = 0\nmoving = 0\nempty = 2\nm-slow = 40\nout = \"from_file\"\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", "run.toml", "simulate", "--breathing", "4"]);
    let manifest = dir.path().join("from_file/manifest.json");
    assert_eq!(label_counts(&manifest), vec![4, 0, 0, 2]);
    let m = DatasetManifest::read(&manifest).unwrap();
    assert_eq!((m.radar.n_fast, m.radar.m_slow), (16, 40));

    std::fs::write(dir.path().join("bad.toml"), "[simulate]\nbreathin = 3\n").unwrap();
    assert_eq!(code(dir.path(), &["--config", "bad.toml", "simulate", "--out", "x"]), 2);
    std::fs::write(dir.path().join("typed.toml"), "[simulate]\nbreathing = \"many\"\n").unwrap();
    assert_eq!(code(dir.path(), &["--config", "typed.toml", "simulate", "--out", "x"]), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &["frobnicate"]), 2);
    assert_eq!(code(d, &["train", "--dataset", "ds", "--out", "r"]), 2, "missing seed");
    let out = uwbocc(d, &["train", "--dataset", "ds", "--out", "r", "--seed", "1", "--variant", "3D-X"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1D-A") && err.contains("2D-E"), "{err}");
    assert_eq!(code(d, &["train", "--dataset", "nowhere", "--out", "r", "--seed", "1"]), 3);
    assert_eq!(code(d, &["train", "--out", "r", "--seed", "1"]), 2, "no dataset at all");
    assert_eq!(code(d, &["evaluate", "--dataset", "ds", "--out", "e"]), 2, "missing seed");

    std::fs::write(d.join("scene.txt"), "clutter = 1 0\n").unwrap();
    assert_eq!(code(d, &["simulate", "--out", "s", "--scene", "scene.txt"]), 2);
    std::fs::write(d.join("scene.txt"), "n_fast = 0\n").unwrap();
    assert_eq!(code(d, &["simulate", "--out", "s", "--scene", "scene.txt"]), 2);

    small_dataset(d);
    let mut args = vec!["ablate", "--dataset", "ds", "--seed", "1", "--checkpoint-dir", "none", "--out", "a"];
    args.extend_from_slice(SPLIT);
    assert_eq!(code(d, &args), 3);
    let mut args = vec!["evaluate", "--dataset", "ds", "--seed", "1", "--out", "e"];
    args.extend_from_slice(SPLIT);
    assert_eq!(code(d, &args), 3, "resnet without checkpoint");
    args.extend_from_slice(&["--detector", "energy"]);
    assert_eq!(code(d, &args), 3, "talking and moving absent");
    args.extend_from_slice(&["--activity", "breathing", "--energy-window", "0"]);
    assert_eq!(code(d, &args), 2);
}

#[test]
fn dataset_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let mut args = vec!["evaluate", "--seed", "3", "--out", "e", "--detector", "energy", "--activity", "breathing"];
    args.extend_from_slice(SPLIT);
    let out = Command::new(BIN)
        .args(&args)
        .current_dir(dir.path())
        .env("UWBOCC_DATA_DIR", dir.path().join("ds"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("e/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 31);
}

#[test]
fn resumed_training_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    ok(d, &train_args("full", "4"));
    ok(d, &train_args("split", "2"));
    let mut resume = train_args("split", "4");
    resume.push("--resume");
    let log = ok(d, &resume);
    assert!(log.contains("resuming 1D-E after epoch 2"), "{log}");
    for f in ["checkpoint.uwbk", "state.uwbk", "history.csv", "config.json"] {
        assert_eq!(
            std::fs::read(d.join("full").join(f)).unwrap(),
            std::fs::read(d.join("split").join(f)).unwrap(),
            "{f} differs"
        );
    }
    assert_eq!(std::fs::read_to_string(d.join("full/history.csv")).unwrap().lines().count(), 5);

    let mut other_seed = train_args("split", "5");
    other_seed[4] = "6";
    other_seed.push("--resume");
    assert_eq!(code(d, &other_seed), 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    for threads in ["1", "3"] {
        let out = format!("t{threads}");
        let mut args = vec!["--threads", threads];
        args.extend(train_args(&out, "2"));
        ok(d, &args);
        let ckpt = format!("{out}/checkpoint.uwbk");
        let eval_out = format!("{out}/eval");
        let mut args = vec![
            "--threads", threads, "evaluate", "--dataset", "ds", "--seed", "9", "--checkpoint", &ckpt, "--detector",
            "resnet", "--detector", "energy", "--detector", "fft", "--activity", "breathing", "--noise-negatives",
            "3", "--out", &eval_out,
        ];
        args.extend_from_slice(SPLIT);
        ok(d, &args);
    }
    for f in ["checkpoint.uwbk", "history.csv", "eval/sweep.csv", "eval/sweep.json", "eval/sweep_plot.json"] {
        assert_eq!(
            std::fs::read(d.join("t1").join(f)).unwrap(),
            std::fs::read(d.join("t3").join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn ablate_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    ok(d, &train_args("cks/1D-E", "1"));
    let mut args = vec![
        "ablate", "--dataset", "ds", "--seed", "2", "--checkpoint-dir", "cks", "--variant", "1D-E", "--detector",
        "energy", "--activity", "breathing", "--out", "ab",
    ];
    args.extend_from_slice(SPLIT);
    ok(d, &args);
    let csv = std::fs::read_to_string(d.join("ab/ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.contains(",breathing,-20,")));
    let plot = std::fs::read_to_string(d.join("ab/ablation_plot.json")).unwrap();
    assert!(plot.contains("flops"));

    let summary = ok(d, &["report", "--input", "ab/ablation.json", "--input", "ab/ablation.csv"]);
    assert!(summary.contains("0.91") && summary.contains("0.87"));
    assert!(summary.contains("| 2D-A |"));
    assert!(summary.contains("1D-D inference"));
    assert_eq!(code(d, &["report", "--input", "missing.csv"]), 3);
}

#[test]
fn import_segments_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stream = |cols: usize, seed: f64| {
        let data = (0..8 * cols)
            .map(|i| Complex64::new((i as f64 * seed).sin(), (i as f64 * 0.1).cos()))
            .collect();
        ComplexMatrix::from_column_major(8, cols, data).unwrap()
    };
    cir_file::write(&d.join("p1.cir"), &stream(250, 0.3)).unwrap();
    cir_file::write(&d.join("empty.cir"), &stream(130, 0.7)).unwrap();
    let out = ok(
        d,
        &[
            "import", "--dataset", "data", "--input", "p1.cir", "--label", "breathing", "--car", "1",
            "--participant", "p1", "--seat", "driver",
        ],
    );
    assert!(out.contains("imported 2 breathing samples"), "{out}");
    ok(d, &["import", "--dataset", "data", "--input", "empty.cir", "--label", "empty", "--car", "1"]);
    let m = DatasetManifest::read(&d.join("data/manifest.json")).unwrap();
    assert_eq!(m.records.len(), 3);
    assert_eq!(m.radar.m_slow, 100);
    assert_eq!(m.records[0].provenance.recording, "p1");
    assert_eq!(m.records[1].provenance.segment_index, 1);
    assert_eq!(
        code(d, &["import", "--dataset", "data", "--input", "p1.cir", "--label", "sleeping", "--car", "1"]),
        2
    );
}

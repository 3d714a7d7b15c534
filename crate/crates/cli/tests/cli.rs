use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn evocli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evocli"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run evocli")
}

fn synthetic_config(dir: &Path, extra: &str) -> PathBuf {
    let f = fixtures().join("synthetic");
    let text = format!(
        "# synthetic fixture\ncorpus = {}, {}\nlexicon = {}\nout = out\nseed = 3\n{extra}",
        f.join("corpus-a.tsv").display(),
        f.join("corpus-b.tsv").display(),
        f.join("lexicon.tsv").display()
    );
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn plot_data_prints_share_rows() {
    let dir = tempfile::tempdir().unwrap();
    let t = fixtures().join("table2");
    let out = evocli(
        &[
            "plot-data",
            "--synset",
            "a00001",
            "--corpus",
            t.join("corpus.tsv").to_str().unwrap(),
            "--lexicon",
            t.join("lexicon.tsv").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("year,rapturous,ecstatic,rapt,enraptured,rhapsodic")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 201);
    for row in rows {
        let sum: f64 = row
            .split(',')
            .skip(1)
            .map(|v| v.parse::<f64>().unwrap())
            .sum();
        // five values printed with six decimals
        assert!((sum - 1.0).abs() <= 5.0 * 5e-7, "{row}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = evocli(
        &["train", "--lexicon", "missing.tsv", "--corpus", "c.tsv"],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.tsv"));

    assert_eq!(evocli(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        evocli(&["train", "--no-such-flag"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(evocli(&["--help"], dir.path()).status.code(), Some(0));
    // No corpus given.
    assert_eq!(
        evocli(&["train", "--lexicon", "x.tsv"], dir.path())
            .status
            .code(),
        Some(1)
    );

    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(
        evocli(&["ingest", "--config", "bad.cfg"], dir.path())
            .status
            .code(),
        Some(1)
    );

    let cfg = synthetic_config(dir.path(), "");
    let out = evocli(
        &[
            "evaluate",
            "--config",
            cfg.to_str().unwrap(),
            "--cycle",
            "70",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let out = evocli(
        &[
            "plot-data",
            "--config",
            cfg.to_str().unwrap(),
            "--synset",
            "zzz",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let mut trees = Vec::new();
    for workers in ["1", "4", "4"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic_config(dir.path(), "");
        let out = evocli(
            &[
                "sweep",
                "--cycles",
                "30,40,50,60",
                "--config",
                cfg.to_str().unwrap(),
                "--workers",
                workers,
            ],
            dir.path(),
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let files = tree(&dir.path().join("out"));
        let table = String::from_utf8(files["sweep/sweep.csv"].clone()).unwrap();
        assert_eq!(
            table.lines().next(),
            Some("cycle,test,future,nbcp_f,random_f,percent_changed,synsets")
        );
        assert_eq!(table.lines().count(), 1 + 4 + 3 + 2 + 1);
        assert!(table.contains("\n50,Test1,1950,100.0,"));
        trees.push(files);
    }
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[1], trees[2]);
}

#[test]
fn staged_pipeline_matches_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    let ok = |args: &[&str]| {
        let out = evocli(args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    ok(&["build-dataset", "--config", c]);
    ok(&[
        "extract-features",
        "--config",
        c,
        "--dataset",
        "out/datasets/1800-1850-1900.tsv",
        "--with-target",
    ]);
    ok(&[
        "extract-features",
        "--config",
        c,
        "--dataset",
        "out/datasets/1850-1900-1950.tsv",
    ]);
    ok(&[
        "train",
        "--config",
        c,
        "--features",
        "out/features/1800-1850-1900.train.tsv",
    ]);
    ok(&[
        "predict",
        "--config",
        c,
        "--model",
        "out/model.json",
        "--features",
        "out/features/1850-1900-1950.test.tsv",
    ]);
    ok(&[
        "evaluate",
        "--config",
        c,
        "--dataset",
        "out/datasets/1850-1900-1950.tsv",
        "--predictions",
        "out/predictions.tsv",
    ]);
    ok(&["evaluate", "--config", c]);

    let out = dir.path().join("out");
    let read = |p: &str| std::fs::read_to_string(out.join(p)).unwrap();
    assert_eq!(
        read("predictions.tsv"),
        read("nbcp/50/1850-1900-1950/predictions.tsv")
    );
    assert_eq!(
        read("evaluation/1850-1900-1950/outcomes.tsv"),
        read("nbcp/50/1850-1900-1950/outcomes.tsv")
    );
    let staged: serde_json::Value =
        serde_json::from_str(&read("evaluation/1850-1900-1950/report.json")).unwrap();
    let direct: serde_json::Value =
        serde_json::from_str(&read("nbcp/50/1850-1900-1950/report.json")).unwrap();
    for key in ["counts", "metrics", "intervals", "random"] {
        assert_eq!(staged[key], direct[key], "{key}");
    }
    assert_eq!(direct["metrics"]["f_score"], 100.0);
    assert!(read("nbcp/50/table.csv").starts_with("statistic,Test1,Test2\n"));
    assert!(read("datasets/50/summary.csv").contains("Test1,1850,1900,1950,50,"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), "cycle = 40\n");
    let out = evocli(
        &[
            "evaluate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--cycle",
            "50",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report =
        std::fs::read_to_string(dir.path().join("out/nbcp/50/1850-1900-1950/report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["random"]["seed"], 5);
}

#[test]
fn interpret_and_ablate_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    let out = evocli(&["interpret", "--config", c, "--top", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let trigrams =
        std::fs::read_to_string(dir.path().join("out/interpretation/trigrams.csv")).unwrap();
    assert_eq!(trigrams.lines().count(), 6);
    assert!(trigrams.lines().nth(1).unwrap().starts_with("zzz,"));

    let out = evocli(&["ablate", "--config", c], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for name in ["drop_one", "single_only"] {
        let table = std::fs::read_to_string(dir.path().join(format!("out/ablation/50/{name}.csv")))
            .unwrap();
        assert_eq!(table.lines().count(), 9, "{table}");
    }
}

#[test]
fn ingest_filters_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let t = fixtures().join("table2");
    let out = evocli(
        &[
            "ingest",
            "--corpus",
            t.join("corpus.tsv").to_str().unwrap(),
            "--lexicon",
            t.join("lexicon.tsv").to_str().unwrap(),
            "--catvar",
            t.join("catvar.tsv").to_str().unwrap(),
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let corpus = std::fs::read_to_string(dir.path().join("o/corpus.tsv")).unwrap();
    assert!(!corpus.contains("the_DET") && !corpus.contains("rapturous_NOUN"));
    assert!(corpus.contains("ecstaticness_NOUN\t1950\t"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/ingest.json")).unwrap())
            .unwrap();
    assert_eq!(report["rows_skipped"], 0);
    assert!(report["rows_kept"].as_u64().unwrap() < report["rows_read"].as_u64().unwrap());
}

use std::path::Path;
use std::process::{Command, Output};

use diachron::manifest::RunManifest;

const BIN: &str = env!("CARGO_BIN_EXE_diachron");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .env_remove("DIACHRON_OUTPUT")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_toy_corpus(dir: &Path) {
    let periods = [
        ("1900", ["the old king rode a horse to the castle car office new", "a horse and the king went to the old castle car new office"]),
        ("1950", ["the old king drove a car to the castle horse office new", "a car took the king to the new castle horse old office"]),
        ("2000", ["the new king drove a car to the office horse castle old", "a car took the new king to the office old castle horse"]),
    ];
    for (label, lines) in periods {
        let p = dir.join("corpus").join(label);
        std::fs::create_dir_all(&p).unwrap();
        let text: String = (0..4).flat_map(|_| lines.iter().map(|l| format!("{l}\n"))).collect();
        std::fs::write(p.join("docs.txt"), text).unwrap();
    }
}

#[test]
fn toy_chain_writes_every_artifact_and_a_complete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_toy_corpus(d);
    std::fs::write(d.join("run.conf"), "corpus = corpus\nmin_count = 6\nwindow = 2\ndim = 4\noutput = out\n").unwrap();
    for stage in ["ingest", "ppmi", "embed", "simmat", "cluster"] {
        ok(d, &["--config", "run.conf", stage, "--n-clusters", "2", "--words", "king,car"]);
    }
    ok(d, &["heatmap", "--config", "run.conf", "--words", "king"]);
    ok(d, &["explain", "--config", "run.conf", "--explain-word", "king", "--t1", "1900", "--t2", "2000"]);

    let out = d.join("out");
    for f in [
        "corpus.tsv",
        "periods.txt",
        "vocab.tsv",
        "contexts.tsv",
        "ppmi/period_000.mtx",
        "ppmi/period_002.mtx",
        "embeddings.bin",
        "singular_values.txt",
        "simmat.bin",
        "simmat/king.csv",
        "simmat/car.csv",
        "features.csv",
        "clusters.tsv",
        "dendrogram.json",
        "cluster_summary.json",
        "heatmaps/king.svg",
        "explain.tsv",
        "manifest.json",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.tool, "diachron");
    assert_eq!(manifest.stages.len(), 7);
    assert_eq!(manifest.config["min_count"], "6");
    for (name, stage) in &manifest.stages {
        assert!(!stage.outputs.is_empty(), "{name}");
        for a in &stage.outputs {
            let bytes = std::fs::read(out.join(&a.path)).unwrap();
            assert_eq!(diachron::io::sha256_hex(&bytes), a.sha256);
        }
    }
    assert!(manifest.stages["embed"].inputs.iter().any(|a| a.path == "ppmi/period_001.mtx"));

    let explain = std::fs::read_to_string(out.join("explain.tsv")).unwrap();
    assert!(explain.starts_with("word\tt1_label\tt2_label\trank\tcontext\tdelta_ppmi\n"));
    assert!(explain.lines().skip(1).all(|l| l.split('\t').count() == 6));
}

#[test]
fn flags_override_config_file_and_env_sets_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_toy_corpus(d);
    std::fs::write(d.join("a.conf"), "corpus = corpus\nmin_count = 6\n").unwrap();
    let out = Command::new(BIN)
        .current_dir(d)
        .env("DIACHRON_OUTPUT", "from_env")
        .args(["ingest", "--config", "a.conf"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.join("from_env/vocab.tsv").is_file());

    std::fs::write(d.join("b.conf"), "corpus = corpus\nmin_count = 6\noutput = from_file\n").unwrap();
    let out = Command::new(BIN)
        .current_dir(d)
        .env("DIACHRON_OUTPUT", "from_env2")
        .args(["ingest", "--config", "b.conf", "--min-count", "1000"])
        .output()
        .unwrap();
    // The flag wins: nothing occurs 1000 times.
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("min_count = 1000"));
    assert!(!d.join("from_env2").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
    assert_eq!(run(d, &["--version"]).status.code(), Some(0));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(d, &["ingest", "--window", "zero"]).status.code(), Some(1));
    assert_eq!(run(d, &["ingest"]).status.code(), Some(1));

    std::fs::write(d.join("bad.conf"), "window = 5\ndim = -3\n").unwrap();
    let out = run(d, &["ingest", "--config", "bad.conf"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.conf") && err.contains("line 2") && err.contains("`dim`"), "{err}");

    assert_eq!(run(d, &["ingest", "--config", "missing.conf"]).status.code(), Some(2));
    assert_eq!(run(d, &["ingest", "--corpus", "missing_dir"]).status.code(), Some(2));

    let out = run(d, &["embed", "--output", "empty"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run `diachron ingest` first"));
}

#[test]
fn broken_upstream_artifact_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_toy_corpus(d);
    ok(d, &["ingest", "--corpus", "corpus", "--min-count", "6", "--output", "o"]);
    std::fs::write(d.join("o/vocab.tsv"), "garbage\n").unwrap();
    let out = run(d, &["ppmi", "--output", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vocab.tsv"));
}

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use protosample::io::{write_container, EmbeddingContainer};
use protosample::rng::SeededRng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_protosample"))
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn ok(dir: &Path, args: &[&str]) {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

pub fn caption_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/captions.jsonl")
}

/// Image database keyed by the caption fixture ids plus a query row.
pub fn write_database(dir: &Path) {
    let mut rng = SeededRng::new(99);
    let rows: Vec<Vec<f32>> = (0..12).map(|_| (0..8).map(|_| rng.normal() as f32).collect()).collect();
    write_container(&EmbeddingContainer::from_rows(&rows, false).unwrap(), dir.join("db.emb")).unwrap();
    let ids: String = (1..=12).map(|i| format!("c{i:02}\n")).collect();
    std::fs::write(dir.join("db.ids.txt"), ids).unwrap();
    let q: Vec<f32> = (0..8).map(|_| rng.normal() as f32).collect();
    write_container(&EmbeddingContainer::from_rows(&[q], false).unwrap(), dir.join("query.emb")).unwrap();
}

/// Runs every subcommand once, with relative paths inside `dir`.
pub fn pipeline(dir: &Path, threads: &str) {
    std::fs::copy(caption_fixture(), dir.join("captions.jsonl")).unwrap();
    write_database(dir);
    let t = ["--threads", threads];
    let with = |args: &[&str]| {
        let mut v: Vec<&str> = args.to_vec();
        v.extend(t);
        ok(dir, &v);
    };
    with(&["gen-fixtures", "--seed", "7", "--count", "3", "--out", "fx"]);
    with(&[
        "search-captions", "--corpus", "captions.jsonl",
        "--with", "breast", "--with", "tumor|cancer|carcinoma|metastases|metastasis|metastatic",
        "--without", "IHC|immunohistochemical|immunohistochemistry|immunostain",
        "--without", "photomicrograph|photomicrography",
        "--review", "review.tsv", "--out", "hits.jsonl",
    ]);
    with(&[
        "retrieve-prototypes", "--database", "db.emb", "--query", "query.emb", "--k", "5",
        "--out-ids", "top.tsv", "--out", "retrieved.emb",
    ]);
    with(&["build-prototypes", "--from-ids", "hits.jsonl", "--embeddings", "db.emb", "--out", "protos.emb"]);
    with(&[
        "build-map", "--grid", "fx/synth_000.emb", "--prototypes", "fx/prototypes.emb",
        "--tissue-mask", "fx/synth_000.tissue.pgm", "--out", "m.map",
    ]);
    let common = ["--map", "m.map", "--meta", "fx/synth_000.grid.json", "--n", "3", "--l", "2048", "--seed", "17"];
    for s in ["proto-standard", "proto-adaptive"] {
        let out = format!("{s}.jsonl");
        let mut a = vec!["select", "--strategy", s, "--out", &out];
        a.extend(common);
        with(&a);
    }
    with(&[
        "select", "--strategy", "random", "--meta", "fx/synth_000.grid.json", "--tissue-mask",
        "fx/synth_000.tissue.pgm", "--n", "3", "--l", "2048", "--seed", "17", "--out", "random.jsonl",
    ]);
    with(&[
        "select", "--strategy", "diversity", "--grids", "fx/synth_000.emb,fx/synth_001.emb,fx/synth_002.emb",
        "--n", "2", "--l", "2048", "--seed", "17", "--out", "diversity.jsonl",
    ]);
    with(&[
        "evaluate", "--regions", "proto-adaptive.jsonl", "--tissue-mask", "fx/synth_000.tissue.pgm",
        "--gt-mask", "fx/synth_000.class.pgm", "--gt-points", "fx/synth_000.points.csv", "--out", "eval.csv",
    ]);
    with(&["sweep", "--config", "fx/sweep.toml", "--out", "sweep.csv"]);
    with(&["render", "--map", "m.map", "--out", "m.pgm"]);
    with(&["render", "--map", "m.map", "--regions", "proto-standard.jsonl", "--meta", "fx/synth_000.grid.json", "--out", "m.ppm"]);
}

/// Every file under `dir` keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

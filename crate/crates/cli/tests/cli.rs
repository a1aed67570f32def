//! End-to-end runs of the `bookforge` binary on small synthetic corpora.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "articles = 400\nbooks = 4\nmin_components = 8\nmax_components = 14\n\
n_trees = 25\nmin_samples_leaf = 5\npermutations = 49\n";

fn bookforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bookforge"))
        .current_dir(dir)
        .args(args)
        .env_remove("BOOKFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// A workspace with a synthetic corpus and models trained on it.
fn trained() -> (TempDir, String) {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("cfg.toml"), SMALL).unwrap();
    ok(bookforge(dir, &["synth", "--config", "cfg.toml", "--seed", "7", "--out", "data"]));
    ok(bookforge(
        dir,
        &["train", "--config", "cfg.toml", "--corpus", "data/corpus.jsonl", "--gold", "data/goldbooks.json", "--out", "models"],
    ));
    let golds: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("data/goldbooks.json")).unwrap()).unwrap();
    let title = golds[0]["title"].as_str().unwrap().to_string();
    (tmp, title)
}

fn corpus_ids(path: &Path) -> HashSet<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn generated_book_uses_corpus_articles_and_is_reproducible() {
    let (tmp, title) = trained();
    let dir = tmp.path();
    ok(bookforge(dir, &["generate", "--models", "models", "--query", &title, "--out", "a.json"]));
    ok(bookforge(dir, &["generate", "--models", "models", "--query", &title, "--out", "b.json"]));
    let a = std::fs::read(dir.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.join("b.json")).unwrap());
    assert!(dir.join("a.scores.csv").exists());

    let book: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let chapters = book["chapters"].as_array().unwrap();
    assert!(!chapters.is_empty());
    let ids = corpus_ids(&dir.join("data/corpus.jsonl"));
    for c in chapters {
        for id in c["articles"].as_array().unwrap() {
            assert!(ids.contains(id.as_str().unwrap()), "{id} not in corpus");
        }
    }
    for seed in book["provenance"]["seeds"].as_array().unwrap() {
        assert!(chapters.iter().any(|c| c["articles"].as_array().unwrap().contains(seed)));
    }
}

#[test]
fn fixed_chapter_count_and_top_n_are_honoured() {
    let (tmp, title) = trained();
    let dir = tmp.path();
    ok(bookforge(
        dir,
        &[
            "generate", "--models", "models", "--query", &title, "--k_mode", "fixed", "--chapters", "2", "--selection_mode",
            "top_n", "--max_articles", "9", "--out", "fixed.json",
        ],
    ));
    let book: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("fixed.json")).unwrap()).unwrap();
    let chapters = book["chapters"].as_array().unwrap();
    assert_eq!(chapters.len(), 2);
    let n: usize = chapters.iter().map(|c| c["articles"].as_array().unwrap().len()).sum();
    let seeds = book["provenance"]["seeds"].as_array().unwrap().len();
    assert_eq!(n, 9 + seeds);
}

#[test]
fn unknown_query_exits_3_and_missing_models_exit_4() {
    let (tmp, _) = trained();
    let dir = tmp.path();
    let out = bookforge(dir, &["generate", "--models", "models", "--query", "qqqq zzzz"]);
    assert_eq!(out.status.code(), Some(3));
    let out = bookforge(dir, &["generate", "--models", "elsewhere", "--query", "anything"]);
    assert_eq!(out.status.code(), Some(4));
    let out = bookforge(dir, &["evaluate", "--models", "elsewhere"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_configuration_exits_2() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("bad.toml"), "max_hop = 3\n").unwrap();
    assert_eq!(bookforge(dir, &["synth", "--config", "bad.toml"]).status.code(), Some(2));
    assert_eq!(bookforge(dir, &["synth", "--config", "missing.toml"]).status.code(), Some(2));
    assert_eq!(
        bookforge(dir, &["train", "--corpus", "none.jsonl", "--gold", "none.json", "--out", "m"]).status.code(),
        Some(2)
    );
    assert_eq!(bookforge(dir, &["train", "--top_fraction", "2", "--corpus", "x", "--gold", "y"]).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_bookforge"))
        .current_dir(dir)
        .args(["synth", "--articles", "300", "--books", "2"])
        .env("BOOKFORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn evaluate_reports_every_book_and_the_averages() {
    let (tmp, _) = trained();
    let dir = tmp.path();
    let out = Command::new(env!("CARGO_BIN_EXE_bookforge"))
        .current_dir(dir)
        .args(["evaluate", "--models", "models", "--out", "report.json"])
        .env("BOOKFORGE_THREADS", "2")
        .output()
        .unwrap();
    let out = ok(out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("reference"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["books"].as_array().unwrap().len(), 4);
    let averages = report["averages"].as_object().unwrap();
    for key in ["auc", "precision_at_n", "recall_at_n", "ari", "ari_estimated_k", "kendall_articles", "kendall_chapters"] {
        assert!(averages[key].is_number(), "{key}");
    }
    assert_eq!(report["references"]["auc"], 0.9765);
    ok(bookforge(dir, &["metrics", "--report", "report.json"]));
}

#[test]
fn two_books_train_and_evaluate() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = SMALL.replace("books = 4", "books = 2");
    std::fs::write(dir.join("cfg.toml"), cfg).unwrap();
    ok(bookforge(dir, &["synth", "--config", "cfg.toml", "--out", "d"]));
    ok(bookforge(dir, &["train", "--config", "cfg.toml", "--corpus", "d/corpus.jsonl", "--gold", "d/goldbooks.json", "--out", "m"]));
    ok(bookforge(dir, &["evaluate", "--models", "m", "--out", "r.json"]));
    let models: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("m/models.json")).unwrap()).unwrap();
    assert_eq!(models["selection"].as_array().unwrap().len(), 2);
}

#[test]
fn stages_resume_from_cache_and_flags_override_the_file() {
    let (tmp, _) = trained();
    let dir = tmp.path();
    let train = [
        "train", "--config", "cfg.toml", "--corpus", "data/corpus.jsonl", "--gold", "data/goldbooks.json", "--out", "models",
    ];
    let again = ok(bookforge(dir, &train));
    assert!(String::from_utf8_lossy(&again.stderr).contains("up to date"));

    let mut flagged = train.to_vec();
    flagged.extend(["--n_trees", "3"]);
    let out = ok(bookforge(dir, &flagged));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("up to date"));
    let models: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("models/models.json")).unwrap()).unwrap();
    assert_eq!(models["params"]["gbdt"]["n_trees"], 3);
    assert_eq!(models["params"]["permutations"], 49);
}

#[test]
fn ingest_filters_gold_books() {
    let (tmp, _) = trained();
    let dir = tmp.path();
    ok(bookforge(
        dir,
        &["ingest", "--corpus", "data/corpus.jsonl", "--gold", "data/goldbooks.json", "--min_components", "1000", "--out", "clean"],
    ));
    let kept: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("clean/goldbooks.json")).unwrap()).unwrap();
    assert_eq!(kept.as_array().unwrap().len(), 0);
    assert_eq!(corpus_ids(&dir.join("clean/corpus.jsonl")), corpus_ids(&dir.join("data/corpus.jsonl")));
    assert!(PathBuf::from(dir.join("clean/validation.json")).exists());
}

#[test]
fn metrics_scores_a_book_against_its_gold() {
    let (tmp, title) = trained();
    let dir = tmp.path();
    ok(bookforge(dir, &["generate", "--models", "models", "--query", &title, "--out", "g.json"]));
    let out = ok(bookforge(dir, &["metrics", "--book", "g.json", "--gold", "data/goldbooks.json"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("recall"), "{text}");
}

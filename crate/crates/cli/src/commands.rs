//! One function per subcommand.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use bookforge::chaptering::Partition;
use bookforge::corpus::{filter_gold_books, generate_synthetic, load_corpus, load_gold_books, save_corpus, save_gold_books, GoldBook};
use bookforge::metrics::{adjusted_rand, kendall_tau, EvalReport};
use bookforge::ordering::BookDraft;
use bookforge::pipeline::{evaluate as evaluate_books, generate_with, prepare_books, profile_corpus, train_models, ModelSet};
use serde::{Deserialize, Serialize};

use crate::cache::StageKey;
use crate::config::Settings;
use crate::CliError;

pub struct Context {
    pub settings: Settings,
    pub force: bool,
}

const CORPUS_FILE: &str = "corpus.jsonl";
const GOLD_FILE: &str = "goldbooks.json";
const MODELS_FILE: &str = "models.json";
const SOURCES_FILE: &str = "sources.json";

/// Inputs a model set was trained on, so later stages can find them.
#[derive(Serialize, Deserialize)]
struct Sources {
    corpus: PathBuf,
    gold: PathBuf,
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(bookforge::Error::from)? + "\n";
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(serde_json::from_str(&text).map_err(bookforge::Error::from)?)
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => create_dir(dir),
        _ => Ok(()),
    }
}

fn skip_if_fresh(ctx: &Context, key: &StageKey, artifact: &Path) -> bool {
    let fresh = !ctx.force && key.is_fresh(artifact);
    if fresh {
        eprintln!("{} is up to date", artifact.display());
    }
    fresh
}

fn models_dir(ctx: &Context) -> Result<PathBuf, CliError> {
    ctx.settings.require_path(&ctx.settings.models, "models")
}

fn load_models(dir: &Path) -> Result<ModelSet, CliError> {
    let path = dir.join(MODELS_FILE);
    if !path.exists() {
        return Err(bookforge::Error::MissingArtifact(format!("{} (run `bookforge train` first)", path.display())).into());
    }
    Ok(ModelSet::load(&path)?)
}

/// The configured corpus or gold file, else the one the models were trained on.
fn source_path(dir: &Path, explicit: &Option<PathBuf>, pick: fn(Sources) -> PathBuf, key: &str) -> Result<PathBuf, CliError> {
    if let Some(path) = explicit {
        return Ok(path.clone());
    }
    let sources = dir.join(SOURCES_FILE);
    if sources.exists() {
        return Ok(pick(read_json(&sources)?));
    }
    Err(CliError::Config(format!("`{key}` is required")))
}

pub fn ingest(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let input = s.require_path(&s.corpus, "corpus")?;
    let out = s.require_path(&s.out, "out")?;
    create_dir(&out)?;
    let artifact = out.join(CORPUS_FILE);
    let filters = (s.min_views.unwrap_or(0), s.min_components.unwrap_or(1));
    let mut inputs = vec![input.as_path()];
    if let Some(gold) = &s.gold {
        inputs.push(gold);
    }
    let key = StageKey::new("ingest", &filters, &inputs)?;
    if skip_if_fresh(ctx, &key, &artifact) {
        return Ok(());
    }
    let corpus = load_corpus(&input)?;
    let report = corpus.validation_report();
    save_corpus(&corpus, &artifact)?;
    write_json(&out.join("validation.json"), report)?;
    println!(
        "{} articles, {} links, {} dangling links",
        corpus.len(),
        corpus.link_count(),
        report.dangling_links.len()
    );
    if let Some(gold) = &s.gold {
        let books = load_gold_books(gold)?;
        let kept = filter_gold_books(&books, filters.0, filters.1);
        for b in &kept {
            b.validate(&corpus)?;
        }
        save_gold_books(&kept, out.join(GOLD_FILE))?;
        println!("{} of {} gold books kept", kept.len(), books.len());
    }
    key.record(&artifact)
}

pub fn synth(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("."));
    create_dir(&out)?;
    let cfg = s.synth_config()?;
    let seed = s.seed.unwrap_or(0);
    let artifact = out.join(CORPUS_FILE);
    let key = StageKey::new("synth", &(&cfg, seed), &[])?;
    if skip_if_fresh(ctx, &key, &artifact) {
        return Ok(());
    }
    let (corpus, golds) = generate_synthetic(&cfg, seed)?;
    save_corpus(&corpus, &artifact)?;
    save_gold_books(&golds, out.join(GOLD_FILE))?;
    println!("{} articles, {} gold books in {}", corpus.len(), golds.len(), out.display());
    key.record(&artifact)
}

pub fn train(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let corpus_path = s.require_path(&s.corpus, "corpus")?;
    let gold_path = s.require_path(&s.gold, "gold")?;
    let dir = s.out.clone().or_else(|| s.models.clone()).ok_or_else(|| CliError::Config("`out` is required".into()))?;
    let params = s.pipeline_params()?;
    create_dir(&dir)?;
    let artifact = dir.join(MODELS_FILE);
    let key = StageKey::new("train", &params, &[&corpus_path, &gold_path])?;
    if !skip_if_fresh(ctx, &key, &artifact) {
        let corpus = load_corpus(&corpus_path)?;
        let golds = load_gold_books(&gold_path)?;
        let profiles = profile_corpus(&corpus)?;
        let tables = prepare_books(&corpus, &profiles, &golds, &params)?;
        let models = train_models(&tables, &params)?;
        models.save(&artifact)?;
        key.record(&artifact)?;
        println!("trained {} models per stage in {}", models.books.len(), dir.display());
    }
    let absolute = |p: &Path| std::path::absolute(p).map_err(|e| CliError::Io(p.to_path_buf(), e));
    write_json(
        &dir.join(SOURCES_FILE),
        &Sources {
            corpus: absolute(&corpus_path)?,
            gold: absolute(&gold_path)?,
        },
    )
}

pub fn generate(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let query = s.query.clone().ok_or_else(|| CliError::Config("`query` is required".into()))?;
    let dir = models_dir(ctx)?;
    let models = load_models(&dir)?;
    let corpus_path = source_path(&dir, &s.corpus, |x| x.corpus, "corpus")?;
    let mut params = models.params.clone();
    s.apply(&mut params)?;
    let count = s.article_count(&params)?;
    let chapters = s.chapter_count(&params)?;
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("book.json"));
    ensure_parent(&out)?;
    let settings = (&query, &params, &s.selection_mode, &s.k_mode, &s.chapters);
    let key = StageKey::new("generate", &settings, &[&dir.join(MODELS_FILE), &corpus_path])?;
    if skip_if_fresh(ctx, &key, &out) {
        return Ok(());
    }
    let corpus = load_corpus(&corpus_path)?;
    let profiles = profile_corpus(&corpus)?;
    let generated = generate_with(&corpus, &profiles, &query, &models, &params, count, &chapters)?;
    generated.draft.save(&out)?;
    generated.selection.save_scores_csv(out.with_extension("scores.csv"))?;
    let n: usize = generated.draft.chapters.iter().map(|c| c.articles.len()).sum();
    println!("{} articles in {} chapters written to {}", n, generated.draft.chapters.len(), out.display());
    key.record(&out)
}

pub fn evaluate(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let dir = models_dir(ctx)?;
    let models = load_models(&dir)?;
    let corpus_path = source_path(&dir, &s.corpus, |x| x.corpus, "corpus")?;
    let gold_path = source_path(&dir, &s.gold, |x| x.gold, "gold")?;
    let mut params = models.params.clone();
    s.apply(&mut params)?;
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("report.json"));
    ensure_parent(&out)?;
    let key = StageKey::new("evaluate", &params, &[&dir.join(MODELS_FILE), &corpus_path, &gold_path])?;
    if skip_if_fresh(ctx, &key, &out) {
        return Ok(());
    }
    let corpus = load_corpus(&corpus_path)?;
    let golds = load_gold_books(&gold_path)?;
    let titles: Vec<&str> = golds.iter().map(|g| g.title.as_str()).collect();
    if titles != models.books.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(CliError::Config(
            "gold books differ from the books the models were trained on".into(),
        ));
    }
    let profiles = profile_corpus(&corpus)?;
    let tables = prepare_books(&corpus, &profiles, &golds, &params)?;
    let report = evaluate_books(&tables, &models, &params)?;
    std::fs::write(&out, report.to_json()? + "\n").map_err(|e| CliError::Io(out.clone(), e))?;
    print_report(&report);
    key.record(&out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn print_report(r: &EvalReport) {
    println!(
        "{:<32} {:>6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "book", "n", "AUC", "P@n", "R@n", "ARI", "ARI-ap", "tau-a", "tau-c"
    );
    for b in &r.books {
        println!(
            "{:<32} {:>6} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7} {:>7}",
            b.title.chars().take(32).collect::<String>(),
            b.n,
            b.auc,
            b.precision_at_n,
            b.recall_at_n,
            b.ari,
            b.ari_estimated_k,
            fmt_opt(b.kendall_articles),
            fmt_opt(b.kendall_chapters)
        );
    }
    let a = &r.averages;
    let f = &r.references;
    println!(
        "{:<32} {:>6} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7} {:>7}",
        "mean",
        "",
        a.auc,
        a.precision_at_n,
        a.recall_at_n,
        a.ari,
        a.ari_estimated_k,
        fmt_opt(a.kendall_articles),
        fmt_opt(a.kendall_chapters)
    );
    println!(
        "{:<32} {:>6} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
        "reference", "", f.auc, f.precision_at_n, f.recall_at_n, f.ari, f.ari_estimated_k, f.kendall_articles, f.kendall_chapters
    );
}

/// Scores a generated book against the gold book with the same title, on
/// the articles they share.
fn compare_book(book: &BookDraft, gold: &GoldBook) -> Result<(), CliError> {
    let gold_chapter = gold.chapter_of();
    let shared: Vec<&str> = book.articles().filter(|id| gold_chapter.contains_key(id)).collect();
    let gold_n = gold.components();
    let book_n = book.articles().count();
    println!("articles: {book_n} generated, {gold_n} gold, {} shared", shared.len());
    if book_n > 0 {
        println!("precision {:.4}", shared.len() as f64 / book_n as f64);
    }
    println!("recall {:.4}", shared.len() as f64 / gold_n as f64);
    if shared.len() < 2 {
        return Ok(());
    }
    let book_chapter: HashMap<&str, usize> = book
        .chapters
        .iter()
        .enumerate()
        .flat_map(|(c, ch)| ch.articles.iter().map(move |id| (id.as_str(), c)))
        .collect();
    let a = Partition::from_labels(shared.iter().map(|id| book_chapter[id]));
    let b = Partition::from_labels(shared.iter().map(|id| gold_chapter[id]));
    println!("ARI {:.4}", adjusted_rand(&a, &b)?);
    let in_gold_order: Vec<String> = gold
        .articles()
        .filter(|id| shared.contains(id))
        .map(String::from)
        .collect();
    let in_book_order: Vec<String> = shared.iter().map(|id| id.to_string()).collect();
    if let Some(c) = kendall_tau(&in_book_order, &in_gold_order)? {
        println!("Kendall tau {:.4} (p {:.4})", c.statistic, c.pvalue);
    }
    Ok(())
}

pub fn metrics(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    if let Some(path) = &s.report {
        let report: EvalReport = read_json(path)?;
        print_report(&report);
        return Ok(());
    }
    let (Some(book_path), Some(gold_path)) = (&s.book, &s.gold) else {
        return Err(CliError::Config("`metrics` needs `report`, or `book` and `gold`".into()));
    };
    let book = BookDraft::load(book_path)?;
    let golds = load_gold_books(gold_path)?;
    let title = s.query.as_deref().unwrap_or(&book.title);
    let gold = golds
        .iter()
        .find(|g| g.title == title)
        .ok_or_else(|| CliError::Config(format!("no gold book titled `{title}`")))?;
    compare_book(&book, gold)
}

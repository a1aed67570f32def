//! Corpus data model, line-delimited JSON ingestion, gold books, and the
//! synthetic corpus generator.
//!
//! A corpus is a set of [`Article`]s, each with text, out-links,
//! categories and a daily page-view series. Every page-view series in a
//! corpus has the same length (`window_days`); shorter series are padded with
//! zeros on load, since a missing day is recorded as zero views.

mod gold;
pub mod synth;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textfeat::tokenize;

pub use gold::{filter_gold_books, load_gold_books, save_gold_books, GoldBook};
pub use synth::{generate_synthetic, SynthConfig};

/// One corpus document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub text: String,
    /// Outgoing references, in document order, without duplicates.
    #[serde(default, rename = "links")]
    pub out_links: Vec<String>,
    #[serde(default)]
    pub categories: BTreeSet<String>,
    #[serde(default)]
    pub pageviews: Vec<u64>,
}

impl Article {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Article {
            id: id.into(),
            title: title.into(),
            text: String::new(),
            out_links: Vec::new(),
            categories: BTreeSet::new(),
            pageviews: Vec::new(),
        }
    }

    pub fn total_pageviews(&self) -> u64 {
        self.pageviews.iter().sum()
    }
}

/// Problems found while ingesting a corpus that do not prevent loading.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// `(source, target)` pairs whose target is not in the corpus.
    pub dangling_links: Vec<(String, String)>,
    /// Repeated out-links dropped while loading.
    pub duplicate_links_removed: usize,
    /// Links from an article to itself; kept in the corpus, never graph edges.
    pub self_links: usize,
    /// Normalized titles shared by more than one article. The first article
    /// with the title owns the index entry.
    pub duplicate_titles: Vec<String>,
    /// Articles whose page-view series was shorter than the window.
    pub padded_pageviews: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.dangling_links.is_empty()
            && self.duplicate_links_removed == 0
            && self.self_links == 0
            && self.duplicate_titles.is_empty()
            && self.padded_pageviews == 0
    }
}

/// An immutable, indexed collection of articles.
#[derive(Clone, Debug)]
pub struct Corpus {
    articles: Vec<Article>,
    by_id: HashMap<String, usize>,
    by_title: HashMap<String, usize>,
    window_days: usize,
    links: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
    report: ValidationReport,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.window_days == other.window_days && self.articles == other.articles
    }
}

/// Case-folds and collapses a title into the form used by the title index.
pub fn normalize_title(title: &str) -> String {
    tokenize(title).collect::<Vec<_>>().join(" ")
}

impl Corpus {
    /// Builds a corpus, checking id invariants and padding page views.
    pub fn new(mut articles: Vec<Article>) -> Result<Self> {
        let mut report = ValidationReport::default();
        let mut by_id = HashMap::with_capacity(articles.len());
        for (idx, article) in articles.iter().enumerate() {
            if article.id.is_empty() {
                return Err(Error::Schema(format!("article #{} has an empty id", idx + 1)));
            }
            if by_id.insert(article.id.clone(), idx).is_some() {
                return Err(Error::Schema(format!("duplicate article id `{}`", article.id)));
            }
        }

        let window_days = articles.iter().map(|a| a.pageviews.len()).max().unwrap_or(0);
        for article in &mut articles {
            if article.pageviews.len() < window_days {
                report.padded_pageviews += 1;
                article.pageviews.resize(window_days, 0);
            }
            let mut seen = HashSet::with_capacity(article.out_links.len());
            let before = article.out_links.len();
            article.out_links.retain(|l| seen.insert(l.clone()));
            report.duplicate_links_removed += before - article.out_links.len();
        }

        let mut by_title = HashMap::with_capacity(articles.len());
        let mut duplicate_titles = BTreeSet::new();
        for (idx, article) in articles.iter().enumerate() {
            let key = normalize_title(&article.title);
            if key.is_empty() {
                continue;
            }
            if by_title.contains_key(&key) {
                duplicate_titles.insert(key);
            } else {
                by_title.insert(key, idx);
            }
        }
        report.duplicate_titles = duplicate_titles.into_iter().collect();

        let mut links = Vec::with_capacity(articles.len());
        let mut in_degree = vec![0usize; articles.len()];
        for (idx, article) in articles.iter().enumerate() {
            let mut out = Vec::with_capacity(article.out_links.len());
            for target in &article.out_links {
                match by_id.get(target) {
                    Some(&t) if t == idx => report.self_links += 1,
                    Some(&t) => {
                        out.push(t);
                        in_degree[t] += 1;
                    }
                    None => report
                        .dangling_links
                        .push((article.id.clone(), target.clone())),
                }
            }
            links.push(out);
        }

        Ok(Corpus {
            articles,
            by_id,
            by_title,
            window_days,
            links,
            in_degree,
            report,
        })
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn window_days(&self) -> usize {
        self.window_days
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn article(&self, idx: usize) -> &Article {
        &self.articles[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.index_of(id).map(|i| &self.articles[i])
    }

    /// Index lookup that fails with [`Error::UnknownArticle`].
    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownArticle(id.to_string()))
    }

    /// Looks up an article by title, case-folded and whitespace-collapsed.
    pub fn find_title(&self, title: &str) -> Option<usize> {
        self.by_title.get(&normalize_title(title)).copied()
    }

    pub(crate) fn title_index(&self) -> &HashMap<String, usize> {
        &self.by_title
    }

    /// Out-links of `idx` that resolve to other corpus articles.
    pub fn resolved_links(&self, idx: usize) -> &[usize] {
        &self.links[idx]
    }

    /// Number of corpus articles linking to `idx`.
    pub fn in_degree(&self, idx: usize) -> usize {
        self.in_degree[idx]
    }

    /// Total number of resolvable, non-self links.
    pub fn link_count(&self) -> usize {
        self.links.iter().map(Vec::len).sum()
    }

    pub fn validation_report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut articles = Vec::new();
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let article: Article = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            articles.push(article);
        }
        Corpus::new(articles)
    }

    pub fn to_writer<W: Write>(&self, mut writer: W) -> Result<()> {
        for article in &self.articles {
            serde_json::to_writer(&mut writer, article)?;
            writer.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
        }
        Ok(())
    }
}

/// Reads a `corpus.jsonl` file, one article per line.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_reader(file)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    corpus.to_writer(&mut writer)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

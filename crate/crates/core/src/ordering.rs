//! Ordering articles within chapters and chapters within a book. Pair rows
//! are classified as "first precedes second", each class increments one
//! counter, and articles and chapters are sorted by their counters.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::PairDataset;
use crate::error::{Error, Result};
use crate::learners::{GbdtModel, LogisticModel};
use crate::selection::{loo_protocol, score_rows, Calibration};

fn classes_of(probs: &[f64]) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(p >= 0.5)).collect()
}

/// Leave-one-out precedence classes for the pairs of table `i`: 1 when the
/// first article is predicted to come before the second.
pub fn classify_pair_order(datasets: &[PairDataset], models: &[GbdtModel], i: usize) -> Result<Vec<u8>> {
    Ok(classes_of(&loo_protocol(datasets, models, i)?.calibrated_prob))
}

/// Precedence classes for a new pair table with a calibration fitted on
/// training books.
pub fn classify_with_models(pairs: &PairDataset, models: &[&GbdtModel], calibration: &LogisticModel) -> Result<Vec<u8>> {
    Ok(classes_of(&score_rows(&pairs.features, models, Calibration::Pooled(calibration))?.calibrated_prob))
}

/// Precedence counters. Chapter `c` is the `c`-th chapter of the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRanks {
    pub article_rank: BTreeMap<String, usize>,
    pub chapter_rank: Vec<usize>,
    /// Chapter counter divided by the chapter's article count.
    pub chapter_rank_normalized: Vec<f64>,
}

/// Counts, for every pair, the article (same chapter) or chapter (different
/// chapters) that comes second: class 1 credits the pair's second article,
/// class 0 its first.
pub fn ranks_from_pair_classes(pairs: &[(String, String)], classes: &[u8], chapters: &[Vec<String>]) -> Result<OrderRanks> {
    if pairs.len() != classes.len() {
        return Err(Error::DimensionMismatch {
            expected: pairs.len(),
            actual: classes.len(),
        });
    }
    let mut chapter_of: HashMap<&str, usize> = HashMap::new();
    let mut article_rank = BTreeMap::new();
    for (c, members) in chapters.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::invalid(format!("chapter {c} is empty")));
        }
        for id in members {
            if chapter_of.insert(id.as_str(), c).is_some() {
                return Err(Error::invalid(format!("article `{id}` is in two chapters")));
            }
            article_rank.insert(id.clone(), 0usize);
        }
    }
    let mut chapter_rank = vec![0usize; chapters.len()];
    for ((first, second), &class) in pairs.iter().zip(classes) {
        let of = |id: &str| {
            chapter_of
                .get(id)
                .copied()
                .ok_or_else(|| Error::invalid(format!("article `{id}` has no chapter")))
        };
        let (c1, c2) = (of(first)?, of(second)?);
        let later = match class {
            1 => second,
            0 => first,
            other => return Err(Error::invalid(format!("class {other} is not 0 or 1"))),
        };
        if c1 == c2 {
            *article_rank.get_mut(later).expect("registered above") += 1;
        } else {
            chapter_rank[if class == 1 { c2 } else { c1 }] += 1;
        }
    }
    let chapter_rank_normalized = chapter_rank
        .iter()
        .zip(chapters)
        .map(|(&r, members)| r as f64 / members.len() as f64)
        .collect();
    Ok(OrderRanks {
        article_rank,
        chapter_rank,
        chapter_rank_normalized,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chapter {
    pub articles: Vec<String>,
}

/// How a draft was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seeds: Vec<String>,
    pub parameters: serde_json::Value,
}

/// The pipeline's output: ordered chapters of ordered article ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookDraft {
    pub title: String,
    pub chapters: Vec<Chapter>,
    pub provenance: Provenance,
}

impl BookDraft {
    /// Articles in reading order.
    pub fn articles(&self) -> impl Iterator<Item = &str> {
        self.chapters.iter().flat_map(|c| c.articles.iter().map(String::as_str))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Sorts chapters by ascending normalized rank and articles within each by
/// ascending rank. Ties keep chapter input order and ascending article id.
pub fn assemble_book(
    chapters: &[Vec<String>],
    ranks: &OrderRanks,
    title: impl Into<String>,
    provenance: Provenance,
) -> Result<BookDraft> {
    if ranks.chapter_rank_normalized.len() != chapters.len() {
        return Err(Error::DimensionMismatch {
            expected: chapters.len(),
            actual: ranks.chapter_rank_normalized.len(),
        });
    }
    let mut chapter_order: Vec<usize> = (0..chapters.len()).collect();
    chapter_order.sort_by(|&a, &b| {
        ranks.chapter_rank_normalized[a]
            .total_cmp(&ranks.chapter_rank_normalized[b])
            .then(a.cmp(&b))
    });
    let mut out = Vec::with_capacity(chapters.len());
    for c in chapter_order {
        let mut articles = chapters[c].clone();
        for id in &articles {
            if !ranks.article_rank.contains_key(id) {
                return Err(Error::invalid(format!("article `{id}` has no rank")));
            }
        }
        articles.sort_by(|a, b| ranks.article_rank[a].cmp(&ranks.article_rank[b]).then_with(|| a.cmp(b)));
        out.push(Chapter { articles });
    }
    Ok(BookDraft {
        title: title.into(),
        chapters: out,
        provenance,
    })
}

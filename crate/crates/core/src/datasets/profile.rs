//! Per-article attributes and the relative measures between two articles
//! that every dataset builder shares.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::Result;
use crate::stats::{kendall_tau_b, spearman, Correlation};
use crate::textfeat::{cosine, text_stats, DocumentEmbedder, Embedding};

/// Attributes of one article that do not depend on the book being built.
#[derive(Clone, Debug)]
pub struct ArticleProfile {
    pub length: f64,
    pub paragraphs: f64,
    /// Out-link count as listed in the article.
    pub references: f64,
    /// Number of corpus articles linking to this one.
    pub referenced_by: f64,
    pub categories: BTreeSet<String>,
    pub pageviews: Vec<f64>,
    pub total_pageviews: f64,
    pub embedding: Embedding,
}

/// Profiles of every corpus article, indexed like the corpus.
#[derive(Clone, Debug)]
pub struct ArticleProfiles {
    profiles: Vec<ArticleProfile>,
}

impl ArticleProfiles {
    pub fn new(corpus: &Corpus, embedder: &dyn DocumentEmbedder) -> Self {
        let profiles = corpus
            .articles()
            .par_iter()
            .enumerate()
            .map(|(idx, a)| {
                let stats = text_stats(a);
                ArticleProfile {
                    length: stats.length as f64,
                    paragraphs: stats.paragraphs as f64,
                    references: a.out_links.len() as f64,
                    referenced_by: corpus.in_degree(idx) as f64,
                    categories: a.categories.clone(),
                    pageviews: a.pageviews.iter().map(|&v| v as f64).collect(),
                    total_pageviews: a.total_pageviews() as f64,
                    embedding: embedder.embed_article(a),
                }
            })
            .collect();
        ArticleProfiles { profiles }
    }

    pub fn get(&self, idx: usize) -> &ArticleProfile {
        &self.profiles[idx]
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Measures of how article `b` relates to article `a`. Differences are
/// `a - b`. Correlations are `None` when undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Relative {
    pub cosine: f64,
    pub length_diff: f64,
    pub paragraph_diff: f64,
    pub kendall: Option<Correlation>,
    pub spearman: Option<Correlation>,
    pub jaccard: f64,
    pub references_diff: f64,
    pub referenced_by_diff: f64,
    pub categories_diff: f64,
}

/// Shortest series on which page-view correlations are computed.
pub const MIN_CORRELATION_POINTS: usize = 3;

/// Category-set Jaccard coefficient; two empty sets share nothing.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

pub fn relative(a: &ArticleProfile, b: &ArticleProfile) -> Result<Relative> {
    let correlated = a.pageviews.len() >= MIN_CORRELATION_POINTS && a.pageviews.len() == b.pageviews.len();
    Ok(Relative {
        cosine: cosine(&a.embedding, &b.embedding)?,
        length_diff: a.length - b.length,
        paragraph_diff: a.paragraphs - b.paragraphs,
        kendall: correlated.then(|| kendall_tau_b(&a.pageviews, &b.pageviews)).flatten(),
        spearman: correlated.then(|| spearman(&a.pageviews, &b.pageviews)).flatten(),
        jaccard: jaccard(&a.categories, &b.categories),
        references_diff: a.references - b.references,
        referenced_by_diff: a.referenced_by - b.referenced_by,
        categories_diff: a.categories.len() as f64 - b.categories.len() as f64,
    })
}

/// Replaces every NaN in each column by the mean of that column's other
/// values, or by 0 when the whole column is missing. Returns the number of
/// cells filled.
pub fn impute_column_means(rows: &mut [Vec<f64>]) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut filled = 0;
    for j in 0..width {
        let present: Vec<f64> = rows.iter().map(|r| r[j]).filter(|v| !v.is_nan()).collect();
        let fill = crate::stats::mean(&present).unwrap_or(0.0);
        for r in rows.iter_mut() {
            if r[j].is_nan() {
                r[j] = fill;
                filled += 1;
            }
        }
    }
    filled
}

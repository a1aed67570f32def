//! Evaluation measures: AUC, precision and recall at n, the adjusted Rand
//! index with a permutation p-value, and Kendall's tau between orders.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaptering::Partition;
use crate::error::{Error, Result};
use crate::stats::{average_ranks, kendall_tau_b, normal_two_sided, Correlation};

fn check_labels(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    Ok((pos, labels.len() - pos))
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check_labels(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("AUC needs both classes"));
    }
    let ranks = average_ranks(scores);
    let pos_rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l == 1).map(|(r, _)| r).sum();
    let (p, n) = (pos as f64, neg as f64);
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Precision and recall of the `n` best-scored items, higher scores first
/// and ties to the smaller id. `n` is clamped to the item count.
pub fn precision_recall_at_n<K: Ord>(scores: &[f64], labels: &[u8], ids: &[K], n: usize) -> Result<(f64, f64)> {
    let (pos, _) = check_labels(scores, labels)?;
    if ids.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: ids.len(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if pos == 0 {
        return Err(Error::invalid("recall is undefined without positives"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
    let hits = order.iter().take(n).filter(|&&i| labels[i] == 1).count() as f64;
    Ok((hits / n as f64, hits / pos as f64))
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

fn ari_from_assignments(a: &[usize], ka: usize, b: &[usize], kb: usize) -> f64 {
    let mut table = vec![0usize; ka * kb];
    let mut rows = vec![0usize; ka];
    let mut cols = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
        rows[x] += 1;
        cols[y] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.iter().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.iter().map(|&c| choose2(c)).sum();
    let total = choose2(a.len());
    let expected = if total > 0.0 { sum_rows * sum_cols / total } else { 0.0 };
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        // Both partitions trivial in the same way: perfect agreement.
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}

fn check_same_items(a: &Partition, b: &Partition) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Chance-corrected agreement between two partitions of the same items.
/// Two identical trivial partitions score 1.
pub fn adjusted_rand(a: &Partition, b: &Partition) -> Result<f64> {
    check_same_items(a, b)?;
    Ok(ari_from_assignments(a.assignment(), a.k(), b.assignment(), b.k()))
}

/// Fraction of label permutations of `a` whose index against `b` reaches
/// the observed one, counting the observed assignment itself. Permutation
/// `p` draws from stream `p` of a generator seeded with `seed`.
pub fn ari_pvalue(a: &Partition, b: &Partition, permutations: usize, seed: u64) -> Result<f64> {
    check_same_items(a, b)?;
    let observed = adjusted_rand(a, b)?;
    let reached = (0..permutations)
        .into_par_iter()
        .filter(|&p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut shuffled = a.assignment().to_vec();
            shuffled.shuffle(&mut rng);
            ari_from_assignments(&shuffled, a.k(), b.assignment(), b.k()) >= observed - 1e-12
        })
        .count();
    Ok((reached + 1) as f64 / (permutations + 1) as f64)
}

fn positions(order: &[String]) -> Result<HashMap<&str, usize>> {
    let map: HashMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    if map.len() != order.len() {
        return Err(Error::invalid("order lists an item twice"));
    }
    Ok(map)
}

fn aligned_positions(a: &[String], b: &[String]) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let pb = positions(b)?;
    positions(a)?;
    let mut x = Vec::with_capacity(a.len());
    let mut y = Vec::with_capacity(a.len());
    for (i, id) in a.iter().enumerate() {
        let j = pb
            .get(id.as_str())
            .ok_or_else(|| Error::invalid(format!("`{id}` is missing from the second order")))?;
        x.push(i as f64);
        y.push(*j as f64);
    }
    Ok((x, y))
}

/// Kendall's tau-b between two orders of the same items, with a normal
/// approximation p-value. `None` for fewer than two items.
pub fn kendall_tau(a: &[String], b: &[String]) -> Result<Option<Correlation>> {
    let (x, y) = aligned_positions(a, b)?;
    Ok(kendall_tau_b(&x, &y))
}

/// Kendall's tau over the pairs that fall inside one group, pooled across
/// groups. Each entry is (predicted order, reference order) of one group.
/// The p-value sums the per-group concordance statistics and variances.
/// `None` when no group has two items.
pub fn pooled_kendall_tau(groups: &[(Vec<String>, Vec<String>)]) -> Result<Option<Correlation>> {
    let (mut s, mut var, mut pairs) = (0.0, 0.0, 0.0);
    for (predicted, reference) in groups {
        let (x, y) = aligned_positions(predicted, reference)?;
        let n = x.len();
        for i in 0..n {
            for j in (i + 1)..n {
                s += ((x[j] - x[i]) * (y[j] - y[i])).signum();
            }
        }
        let nf = n as f64;
        var += nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
        pairs += choose2(n);
    }
    if pairs == 0.0 {
        return Ok(None);
    }
    Ok(Some(Correlation {
        statistic: s / pairs,
        pvalue: normal_two_sided(s / var.sqrt()),
    }))
}

/// Significance marker: `*` below 0.01, `**` below 0.05, `***` below 0.1.
pub fn stars(pvalue: f64) -> &'static str {
    if pvalue < 0.01 {
        "*"
    } else if pvalue < 0.05 {
        "**"
    } else if pvalue < 0.1 {
        "***"
    } else {
        ""
    }
}

/// Scores of one evaluated book.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookEvaluation {
    pub title: String,
    /// Gold book size, the cut-off for precision and recall.
    pub n: usize,
    pub candidates: usize,
    /// `n / candidates`, the expected precision of a random pick.
    pub chance_precision: f64,
    pub auc: f64,
    pub precision_at_n: f64,
    pub recall_at_n: f64,
    pub gold_k: usize,
    pub ari: f64,
    pub ari_pvalue: f64,
    pub ari_stars: String,
    pub estimated_k: usize,
    pub ari_estimated_k: f64,
    pub ari_estimated_k_pvalue: f64,
    pub ari_estimated_k_stars: String,
    pub kendall_articles: Option<f64>,
    pub kendall_articles_pvalue: Option<f64>,
    pub kendall_chapters: Option<f64>,
    pub kendall_chapters_pvalue: Option<f64>,
    /// Share of ordering pairs whose predicted class matches the gold order.
    pub pair_order_accuracy: f64,
}

/// Means over books; Kendall means skip books where tau is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricAverages {
    pub auc: f64,
    pub precision_at_n: f64,
    pub recall_at_n: f64,
    pub ari: f64,
    pub ari_estimated_k: f64,
    pub kendall_articles: Option<f64>,
    pub kendall_chapters: Option<f64>,
    pub chance_precision: f64,
    pub pair_order_accuracy: f64,
}

/// Published full-scale scores, kept for comparison only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub auc: f64,
    pub precision_at_n: f64,
    pub recall_at_n: f64,
    pub ari: f64,
    pub ari_estimated_k: f64,
    pub kendall_articles: f64,
    pub kendall_chapters: f64,
}

pub const REFERENCE_VALUES: ReferenceValues = ReferenceValues {
    auc: 0.9765,
    precision_at_n: 0.2027,
    recall_at_n: 0.2228,
    ari: 0.4276,
    ari_estimated_k: 0.3716,
    kendall_articles: 0.8566,
    kendall_chapters: 0.7735,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub books: Vec<BookEvaluation>,
    pub averages: MetricAverages,
    /// Share of books whose gold-k ARI p-value is below 0.05.
    pub ari_significant_share: f64,
    pub references: ReferenceValues,
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    crate::stats::mean(&v).unwrap_or(f64::NAN)
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    crate::stats::mean(&v)
}

impl EvalReport {
    pub fn new(books: Vec<BookEvaluation>) -> Result<Self> {
        if books.is_empty() {
            return Err(Error::invalid("a report needs at least one book"));
        }
        let averages = MetricAverages {
            auc: mean_of(books.iter().map(|b| b.auc)),
            precision_at_n: mean_of(books.iter().map(|b| b.precision_at_n)),
            recall_at_n: mean_of(books.iter().map(|b| b.recall_at_n)),
            ari: mean_of(books.iter().map(|b| b.ari)),
            ari_estimated_k: mean_of(books.iter().map(|b| b.ari_estimated_k)),
            kendall_articles: mean_opt(books.iter().map(|b| b.kendall_articles)),
            kendall_chapters: mean_opt(books.iter().map(|b| b.kendall_chapters)),
            chance_precision: mean_of(books.iter().map(|b| b.chance_precision)),
            pair_order_accuracy: mean_of(books.iter().map(|b| b.pair_order_accuracy)),
        };
        let significant = books.iter().filter(|b| b.ari_pvalue < 0.05).count();
        Ok(EvalReport {
            ari_significant_share: significant as f64 / books.len() as f64,
            books,
            averages,
            references: REFERENCE_VALUES,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

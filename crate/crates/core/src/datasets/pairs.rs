//! Pair tables over a book's articles: the chaptering variant (same-chapter
//! labels, relative measures plus same-group indicators from clustering each
//! measure) and the ordering variant (precedence labels).
//!
//! Every unordered pair appears once, with the lexicographically smaller id
//! as the first article.

use std::collections::HashMap;
use std::sync::LazyLock;

use rayon::prelude::*;

use super::profile::{impute_column_means, relative, ArticleProfiles, Relative};
use super::PairDataset;
use crate::chaptering::{affinity_propagation, cluster, AffinityParams, ClusterMethod, Dissimilarity};
use crate::corpus::{Corpus, GoldBook};
use crate::error::{Error, Result};
use crate::graphnet::{compute_centralities, CentralityParams, SubNetwork};
use crate::learners::Matrix;

/// Pairwise measures recomputed between the two articles of a chaptering
/// pair.
pub const CHAPTER_RELATIVE_FEATURES: [&str; 17] = [
    "Dijkstra distance between pair's articles",
    "Cosine similarity between pair's articles",
    "Length difference between pair's articles",
    "Absolute length difference between pair's articles",
    "Paragraph difference between pair's articles",
    "Absolute paragraph difference between pair's articles",
    "Kendall Tau statistic",
    "Kendall Tau p-value",
    "Spearman statistic",
    "Spearman p-value",
    "Jaccard coefficient on categories",
    "References difference between pair's articles",
    "Absolute references difference",
    "References to difference between pair's articles",
    "Absolute references to difference between pair's articles",
    "Categories number difference between pair's articles",
    "Absolute categories number difference between pair's articles",
];

pub const CHAPTER_FEATURE_COUNT: usize = 4 * CHAPTER_RELATIVE_FEATURES.len();

/// Relative measures followed by one same-group indicator per (measure,
/// clustering method), methods in Diana, PAM, Agnes order.
pub static CHAPTER_FEATURES: LazyLock<Vec<String>> = LazyLock::new(|| {
    let mut names: Vec<String> = CHAPTER_RELATIVE_FEATURES.iter().map(|s| s.to_string()).collect();
    for f in CHAPTER_RELATIVE_FEATURES {
        for m in ClusterMethod::ALL {
            names.push(format!("{f} ({m} group)"));
        }
    }
    names
});

pub const ORDER_FEATURE_COUNT: usize = 33;

pub const ORDER_FEATURES: [&str; ORDER_FEATURE_COUNT] = [
    "In-degree 1",
    "In-degree 2",
    "Out-degree 1",
    "Out-degree 2",
    "PageRank 1",
    "PageRank 2",
    "Betweenness 1",
    "Betweenness 2",
    "Closeness 1",
    "Closeness 2",
    "Hub 1",
    "Hub 2",
    "Authority 1",
    "Authority 2",
    "Dijkstra distance between pair's articles",
    "Cosine similarity between pair's articles",
    "Length difference between pair's articles",
    "Absolute length difference between pair's articles",
    "Paragraph difference between pair's articles",
    "Absolute paragraph difference between pair's articles",
    "Kendall Tau statistic",
    "Kendall Tau p-value",
    "Spearman statistic",
    "Spearman p-value",
    "Aggregated page views 1",
    "Aggregated page views 2",
    "Jaccard coefficient on categories",
    "References difference between pair's articles",
    "Absolute references difference",
    "References to difference between pair's articles",
    "Absolute references to difference between pair's articles",
    "Categories number difference between pair's articles",
    "Absolute categories number difference between pair's articles",
];

/// How many groups each per-measure clustering forms.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupCount {
    /// A fixed count, clamped to the number of articles.
    Fixed(usize),
    /// Estimated per measure by affinity propagation.
    Estimated(AffinityParams),
}

fn sorted_unique(articles: &[String]) -> Result<Vec<String>> {
    let mut ids = articles.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::invalid("a pair table needs at least two articles"));
    }
    Ok(ids)
}

fn graph_indices(graph: &SubNetwork, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| {
            graph
                .node_index(id)
                .ok_or_else(|| Error::invalid(format!("article `{id}` is not in the sub-network")))
        })
        .collect()
}

/// Directed hop distances between the listed graph nodes.
fn hop_matrix(graph: &SubNetwork, nodes: &[usize]) -> Vec<Vec<Option<u32>>> {
    nodes
        .par_iter()
        .map(|&s| {
            let d = graph.hop_distances(s);
            nodes.iter().map(|&t| d[t]).collect()
        })
        .collect()
}

fn corr_stat(c: Option<crate::stats::Correlation>) -> [f64; 2] {
    c.map_or([f64::NAN; 2], |c| [c.statistic, c.pvalue])
}

fn relative_values(rel: &Relative) -> [f64; 15] {
    let [ks, kp] = corr_stat(rel.kendall);
    let [ss, sp] = corr_stat(rel.spearman);
    [
        rel.cosine,
        rel.length_diff,
        rel.length_diff.abs(),
        rel.paragraph_diff,
        rel.paragraph_diff.abs(),
        ks,
        kp,
        ss,
        sp,
        rel.jaccard,
        rel.references_diff,
        rel.references_diff.abs(),
        rel.referenced_by_diff,
        rel.referenced_by_diff.abs(),
        rel.categories_diff,
    ]
}

/// Same-group indicators from clustering one measure. A constant measure
/// yields an all-zero dissimilarity, which the clusterers split by index.
fn group_indicators(values: &[f64], pairs: &[(usize, usize)], n: usize, groups: &GroupCount) -> Result<[Vec<f64>; 3]> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lookup = HashMap::with_capacity(pairs.len());
    for (&(i, j), &v) in pairs.iter().zip(values) {
        let d = if hi > lo { 1.0 - (v - lo) / (hi - lo) } else { 0.0 };
        lookup.insert((i, j), d);
    }
    let d = Dissimilarity::from_fn(n, |i, j| lookup[&(i, j)])?;
    let k = match groups {
        GroupCount::Fixed(k) => (*k).min(n),
        GroupCount::Estimated(params) => affinity_propagation(&d, params)?.k(),
    };
    let mut out: [Vec<f64>; 3] = Default::default();
    for (slot, method) in ClusterMethod::ALL.into_iter().enumerate() {
        let p = cluster(&d, k, method)?;
        out[slot] = pairs.iter().map(|&(i, j)| f64::from(u8::from(p.same_cluster(i, j)))).collect();
    }
    Ok(out)
}

/// Chaptering pairs over `articles`. `graph` must contain every article;
/// the pair distance is the shorter of the two directed hop distances.
/// Labels mark pairs sharing a chapter when `chapters` is given.
pub fn build_pair_dataset_chapter(
    corpus: &Corpus,
    profiles: &ArticleProfiles,
    articles: &[String],
    chapters: Option<&[Vec<String>]>,
    graph: &SubNetwork,
    groups: &GroupCount,
) -> Result<PairDataset> {
    if matches!(groups, GroupCount::Fixed(0)) {
        return Err(Error::invalid("group count must be at least 1"));
    }
    let ids = sorted_unique(articles)?;
    let n = ids.len();
    let nodes = graph_indices(graph, &ids)?;
    let hops = hop_matrix(graph, &nodes);
    let corpus_idx: Vec<usize> = ids.iter().map(|id| corpus.require(id)).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();

    let mut rows: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<f64>> {
            let rel = relative(profiles.get(corpus_idx[i]), profiles.get(corpus_idx[j]))?;
            let distance = match (hops[i][j], hops[j][i]) {
                (Some(a), Some(b)) => f64::from(a.min(b)),
                (Some(a), None) | (None, Some(a)) => f64::from(a),
                (None, None) => f64::NAN,
            };
            let mut row = Vec::with_capacity(CHAPTER_FEATURE_COUNT);
            row.push(distance);
            row.extend(relative_values(&rel));
            row.push(rel.categories_diff.abs());
            Ok(row)
        })
        .collect::<Result<_>>()?;
    impute_column_means(&mut rows);

    let r = CHAPTER_RELATIVE_FEATURES.len();
    let indicators: Vec<[Vec<f64>; 3]> = (0..r)
        .into_par_iter()
        .map(|f| {
            let values: Vec<f64> = rows.iter().map(|row| row[f]).collect();
            group_indicators(&values, &pairs, n, groups)
        })
        .collect::<Result<_>>()?;
    for (p, row) in rows.iter_mut().enumerate() {
        for ind in &indicators {
            row.extend(ind.iter().map(|v| v[p]));
        }
    }

    let labels = match chapters {
        Some(chapters) => {
            let chapter_of: HashMap<&str, usize> = chapters
                .iter()
                .enumerate()
                .flat_map(|(c, ids)| ids.iter().map(move |id| (id.as_str(), c)))
                .collect();
            let of = |id: &String| {
                chapter_of
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("article `{id}` has no chapter")))
            };
            let mut labels = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                labels.push(u8::from(of(&ids[i])? == of(&ids[j])?));
            }
            Some(labels)
        }
        None => None,
    };
    let keys = pairs.iter().map(|&(i, j)| (ids[i].clone(), ids[j].clone())).collect();
    PairDataset::new(CHAPTER_FEATURES.clone(), keys, Matrix::from_rows(&rows)?, labels)
}

/// Ordering pairs over `articles`. Structural measures come from `graph`,
/// the pair distance is the directed hop distance from the first article to
/// the second. Labels mark pairs whose first article precedes the second in
/// the gold reading order when `gold` is given.
pub fn build_pair_dataset_order(
    corpus: &Corpus,
    profiles: &ArticleProfiles,
    articles: &[String],
    gold: Option<&GoldBook>,
    graph: &SubNetwork,
    centrality: &CentralityParams,
) -> Result<PairDataset> {
    let ids = sorted_unique(articles)?;
    let n = ids.len();
    let nodes = graph_indices(graph, &ids)?;
    let hops = hop_matrix(graph, &nodes);
    let structure = compute_centralities(graph, centrality)?;
    let corpus_idx: Vec<usize> = ids.iter().map(|id| corpus.require(id)).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();

    let mut rows: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<f64>> {
            let (a, b) = (profiles.get(corpus_idx[i]), profiles.get(corpus_idx[j]));
            let rel = relative(a, b)?;
            let (u, v) = (nodes[i], nodes[j]);
            let mut row = Vec::with_capacity(ORDER_FEATURE_COUNT);
            for measure in [
                &structure.in_degree.iter().map(|&x| x as f64).collect::<Vec<_>>(),
                &structure.out_degree.iter().map(|&x| x as f64).collect::<Vec<_>>(),
                &structure.pagerank,
                &structure.betweenness,
                &structure.closeness,
                &structure.hub,
                &structure.authority,
            ] {
                row.extend([measure[u], measure[v]]);
            }
            row.push(hops[i][j].map_or(f64::NAN, f64::from));
            let values = relative_values(&rel);
            row.extend(&values[..9]);
            row.extend([a.total_pageviews, b.total_pageviews]);
            row.extend(&values[9..]);
            row.push(rel.categories_diff.abs());
            debug_assert_eq!(row.len(), ORDER_FEATURE_COUNT);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    impute_column_means(&mut rows);

    let labels = match gold {
        Some(g) => {
            let position: HashMap<&str, usize> = g.articles().enumerate().map(|(p, id)| (id, p)).collect();
            let of = |id: &String| {
                position
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("article `{id}` is not in the gold book")))
            };
            let mut labels = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                labels.push(u8::from(of(&ids[i])? < of(&ids[j])?));
            }
            Some(labels)
        }
        None => None,
    };
    let keys = pairs.iter().map(|&(i, j)| (ids[i].clone(), ids[j].clone())).collect();
    PairDataset::new(
        ORDER_FEATURES.iter().map(|s| s.to_string()).collect(),
        keys,
        Matrix::from_rows(&rows)?,
        labels,
    )
}

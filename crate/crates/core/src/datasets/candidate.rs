//! Candidate-article feature rows: seven structural measures on the book's
//! sub-network, seed-relative measures aggregated as min/avg/max over the
//! seeds, and the candidate's aggregated page views.

use std::collections::HashSet;
use std::sync::LazyLock;

use rayon::prelude::*;

use super::profile::{impute_column_means, relative, ArticleProfiles, Relative};
use super::{CandidateDataset, SeedSet};
use crate::corpus::{Corpus, GoldBook};
use crate::error::{Error, Result};
use crate::graphnet::{compute_centralities, seed_distances, CentralityParams, SubNetwork};
use crate::learners::Matrix;

pub const CANDIDATE_FEATURE_COUNT: usize = 59;

/// Column names of a candidate row, in order.
pub static CANDIDATE_FEATURES: LazyLock<Vec<String>> = LazyLock::new(|| {
    let mut names: Vec<String> = [
        "In-degree",
        "Out-degree",
        "PageRank",
        "Betweenness",
        "Closeness",
        "Hub",
        "Authority",
        "Min Dijkstra distance from the seed",
        "Average Dijkstra distance from the seed concept",
        "Max Dijkstra distance from the seed",
    ]
    .map(String::from)
    .to_vec();
    let triple = |names: &mut Vec<String>, what: &str| {
        for agg in ["Min", "Average", "Max"] {
            names.push(format!("{agg} {what}"));
        }
    };
    triple(&mut names, "cosine similarity");
    for what in ["length difference", "absolute length difference", "paragraph difference", "absolute paragraph difference"] {
        triple(&mut names, what);
    }
    for what in ["Kendall Tau statistic", "Kendall Tau p-value", "Spearman statistic", "Spearman p-value"] {
        triple(&mut names, what);
    }
    names.push("Aggregated page views".into());
    triple(&mut names, "Jaccard coefficient on categories");
    for what in [
        "references difference",
        "absolute references difference",
        "references to difference",
        "absolute references to difference",
        "categories number difference",
        "absolute categories number difference",
    ] {
        triple(&mut names, what);
    }
    names
});

/// Min, mean and max of the defined values; three NaNs when none is.
fn aggregate(values: impl Iterator<Item = Option<f64>>) -> [f64; 3] {
    let present: Vec<f64> = values.flatten().collect();
    if present.is_empty() {
        return [f64::NAN; 3];
    }
    let min = present.iter().copied().fold(f64::INFINITY, f64::min);
    let max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [min, present.iter().sum::<f64>() / present.len() as f64, max]
}

fn relative_block(rel: &[Relative]) -> Vec<f64> {
    let mut out = Vec::with_capacity(48);
    let mut push = |f: &dyn Fn(&Relative) -> Option<f64>| out.extend(aggregate(rel.iter().map(f)));
    push(&|r| Some(r.cosine));
    push(&|r| Some(r.length_diff));
    push(&|r| Some(r.length_diff.abs()));
    push(&|r| Some(r.paragraph_diff));
    push(&|r| Some(r.paragraph_diff.abs()));
    push(&|r| r.kendall.map(|c| c.statistic));
    push(&|r| r.kendall.map(|c| c.pvalue));
    push(&|r| r.spearman.map(|c| c.statistic));
    push(&|r| r.spearman.map(|c| c.pvalue));
    out
}

fn tail_block(rel: &[Relative]) -> Vec<f64> {
    let mut out = Vec::with_capacity(21);
    let mut push = |f: &dyn Fn(&Relative) -> f64| out.extend(aggregate(rel.iter().map(|r| Some(f(r)))));
    push(&|r| r.jaccard);
    push(&|r| r.references_diff);
    push(&|r| r.references_diff.abs());
    push(&|r| r.referenced_by_diff);
    push(&|r| r.referenced_by_diff.abs());
    push(&|r| r.categories_diff);
    push(&|r| r.categories_diff.abs());
    out
}

/// One row per non-seed node of `graph`, which must span the seeds and
/// their candidates. Rows follow the graph's node order. Labels mark gold
/// membership when `gold` is given. Missing values are replaced by their
/// column mean.
pub fn build_candidate_dataset(
    corpus: &Corpus,
    profiles: &ArticleProfiles,
    seeds: &SeedSet,
    gold: Option<&GoldBook>,
    graph: &SubNetwork,
    centrality: &CentralityParams,
) -> Result<CandidateDataset> {
    let seed_nodes: Vec<usize> = seeds
        .concept_ids
        .iter()
        .map(|id| {
            graph
                .node_index(id)
                .ok_or_else(|| Error::invalid(format!("seed `{id}` is not in the sub-network")))
        })
        .collect::<Result<_>>()?;
    let seed_set: HashSet<usize> = seed_nodes.iter().copied().collect();
    let rows_for: Vec<usize> = (0..graph.len()).filter(|v| !seed_set.contains(v)).collect();
    if rows_for.is_empty() {
        return Err(Error::invalid(format!("query `{}` has no candidates", seeds.query)));
    }

    let structure = compute_centralities(graph, centrality)?;
    let distances = seed_distances(graph, &seed_nodes)?;
    let corpus_idx = |v: usize| corpus.require(&graph.nodes()[v]);
    let seed_profiles: Vec<usize> = seed_nodes.iter().map(|&v| corpus_idx(v)).collect::<Result<_>>()?;

    let mut rows: Vec<Vec<f64>> = rows_for
        .par_iter()
        .map(|&v| -> Result<Vec<f64>> {
            let c = profiles.get(corpus_idx(v)?);
            let rel: Vec<Relative> = seed_profiles
                .iter()
                .map(|&s| relative(profiles.get(s), c))
                .collect::<Result<_>>()?;
            let mut row = Vec::with_capacity(CANDIDATE_FEATURE_COUNT);
            row.extend([
                structure.in_degree[v] as f64,
                structure.out_degree[v] as f64,
                structure.pagerank[v],
                structure.betweenness[v],
                structure.closeness[v],
                structure.hub[v],
                structure.authority[v],
            ]);
            match distances[v] {
                Some(d) => row.extend([d.min, d.avg, d.max]),
                None => row.extend([f64::NAN; 3]),
            }
            row.extend(relative_block(&rel));
            row.push(c.total_pageviews);
            row.extend(tail_block(&rel));
            debug_assert_eq!(row.len(), CANDIDATE_FEATURE_COUNT);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    impute_column_means(&mut rows);

    let keys: Vec<String> = rows_for.iter().map(|&v| graph.nodes()[v].clone()).collect();
    let labels = gold.map(|g| {
        let members: HashSet<&str> = g.articles().collect();
        keys.iter().map(|k| u8::from(members.contains(k.as_str()))).collect()
    });
    CandidateDataset::new(CANDIDATE_FEATURES.clone(), keys, Matrix::from_rows(&rows)?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn there_are_fifty_nine_distinct_names() {
        assert_eq!(CANDIDATE_FEATURES.len(), CANDIDATE_FEATURE_COUNT);
        let unique: HashSet<&String> = CANDIDATE_FEATURES.iter().collect();
        assert_eq!(unique.len(), CANDIDATE_FEATURE_COUNT);
        assert_eq!(CANDIDATE_FEATURES[37], "Aggregated page views");
    }
}

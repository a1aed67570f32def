//! Grouping a book's articles into chapters: the clustering methods, the
//! affinity-propagation estimate of the chapter count, and the conversion of
//! pairwise same-chapter probabilities into a partition.

mod affinity;
mod methods;
mod partition;

use std::collections::{BTreeSet, HashMap};

pub use affinity::{affinity_propagation, affinity_propagation_similarity, AffinityParams, AffinityResult};
pub use methods::{cluster, pam_traced, ClusterMethod};
pub use partition::{Dissimilarity, Partition, PartitionExport};

use crate::datasets::PairDataset;
use crate::error::{Error, Result};
use crate::learners::{foreign_models, predict_each, GbdtModel};

/// Where the number of chapters comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ChapterCount {
    Given(usize),
    Estimated(AffinityParams),
}

/// Articles of a book with their chapter assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct Chaptering {
    /// Article ids, ascending; item `i` of the partition is `ids[i]`.
    pub ids: Vec<String>,
    pub partition: Partition,
    /// Averaged same-chapter probability per pair row.
    pub pair_probs: Vec<f64>,
}

impl Chaptering {
    pub fn export(&self) -> Result<PartitionExport> {
        self.partition.export(&self.ids)
    }
}

/// Distinct article ids named by the pair keys, ascending.
pub fn pair_articles(pairs: &PairDataset) -> Vec<String> {
    let ids: BTreeSet<&String> = pairs.keys.iter().flat_map(|(a, b)| [a, b]).collect();
    ids.into_iter().cloned().collect()
}

/// `1 - p` for every pair of `ids`; pairs may be keyed in either order.
pub fn probs_to_dissimilarity(ids: &[String], avg_probs: &HashMap<(String, String), f64>) -> Result<Dissimilarity> {
    let n = ids.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let p = avg_probs
                .get(&(ids[i].clone(), ids[j].clone()))
                .or_else(|| avg_probs.get(&(ids[j].clone(), ids[i].clone())))
                .copied()
                .ok_or_else(|| Error::invalid(format!("no probability for pair ({}, {})", ids[i], ids[j])))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
            }
            data[i * n + j] = 1.0 - p;
            data[j * n + i] = 1.0 - p;
        }
    }
    Dissimilarity::new(n, data)
}

/// Mean probability over `models` for every pair row.
pub fn average_pair_probabilities(pairs: &PairDataset, models: &[&GbdtModel]) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(Error::invalid("no models to average"));
    }
    let preds = predict_each(models, &pairs.features)?;
    Ok((0..pairs.len())
        .map(|r| preds.iter().map(|p| p[r]).sum::<f64>() / preds.len() as f64)
        .collect())
}

/// Partitions the articles of `pairs` using the given models' averaged
/// same-chapter probabilities.
pub fn chapter_with_models(
    pairs: &PairDataset,
    models: &[&GbdtModel],
    count: &ChapterCount,
    method: ClusterMethod,
) -> Result<Chaptering> {
    let ids = pair_articles(pairs);
    if ids.len() < 2 {
        return Err(Error::invalid("chaptering needs at least two articles"));
    }
    let pair_probs = average_pair_probabilities(pairs, models)?;
    let lookup: HashMap<(String, String), f64> = pairs.keys.iter().cloned().zip(pair_probs.iter().copied()).collect();
    let d = probs_to_dissimilarity(&ids, &lookup)?;
    let k = match count {
        ChapterCount::Given(k) => *k,
        ChapterCount::Estimated(params) => affinity_propagation(&d, params)?.k(),
    };
    let partition = cluster(&d, k, method)?;
    Ok(Chaptering {
        ids,
        partition,
        pair_probs,
    })
}

/// Leave-one-out chaptering of book `i`: its pairs are scored by every model
/// except its own.
pub fn chapter_articles(
    datasets: &[PairDataset],
    models: &[GbdtModel],
    i: usize,
    count: &ChapterCount,
    method: ClusterMethod,
) -> Result<Chaptering> {
    if datasets.len() != models.len() {
        return Err(Error::DimensionMismatch {
            expected: datasets.len(),
            actual: models.len(),
        });
    }
    chapter_with_models(&datasets[i], &foreign_models(models, i)?, count, method)
}

//! Affinity propagation, used to estimate how many clusters a dissimilarity
//! matrix supports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dissimilarity, Partition};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AffinityParams {
    pub damping: f64,
    pub max_iter: usize,
    /// Consecutive iterations with an unchanged exemplar set that count as
    /// convergence.
    pub convergence_iter: usize,
    /// Self-similarity of every item. `None` uses the median off-diagonal
    /// similarity.
    pub preference: Option<f64>,
    /// Seed of the negligible noise that breaks exact ties.
    pub noise_seed: u64,
}

impl Default for AffinityParams {
    fn default() -> Self {
        AffinityParams {
            damping: 0.9,
            max_iter: 1000,
            convergence_iter: 100,
            preference: None,
            noise_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffinityResult {
    /// Exemplar item indices, ascending.
    pub exemplars: Vec<usize>,
    /// Every item assigned to its most similar exemplar.
    pub partition: Partition,
    pub converged: bool,
    pub iterations: usize,
}

impl AffinityResult {
    pub fn k(&self) -> usize {
        self.exemplars.len()
    }
}

/// Runs affinity propagation on the similarity `-d`.
pub fn affinity_propagation(d: &Dissimilarity, params: &AffinityParams) -> Result<AffinityResult> {
    let n = d.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| -d.get(i, j)).collect()).collect();
    affinity_propagation_similarity(&rows, params)
}

/// Runs affinity propagation on a square similarity matrix; the diagonal is
/// replaced by the preference.
pub fn affinity_propagation_similarity(similarity: &[Vec<f64>], params: &AffinityParams) -> Result<AffinityResult> {
    if !(params.damping >= 0.5 && params.damping < 1.0) {
        return Err(Error::Config(format!("damping {} outside [0.5, 1)", params.damping)));
    }
    let n = similarity.len();
    if n == 0 {
        return Err(Error::invalid("affinity propagation needs at least one item"));
    }
    if similarity.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("similarity matrix is not square"));
    }
    if n == 1 {
        return Ok(AffinityResult {
            exemplars: vec![0],
            partition: Partition::from_labels([0]),
            converged: true,
            iterations: 0,
        });
    }
    let off_diagonal: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| similarity[i][j])
        .collect();
    if off_diagonal.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("similarity matrix has a non-finite entry"));
    }
    let preference = params
        .preference
        .unwrap_or_else(|| crate::stats::median(&off_diagonal).expect("n >= 2"));

    let mut s: Vec<Vec<f64>> = similarity.to_vec();
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = preference;
    }
    // All similarities equal (preference included): one cluster.
    if off_diagonal.iter().all(|&v| v == preference) {
        return Ok(single_exemplar(&s, true, 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.noise_seed);
    for row in s.iter_mut() {
        for v in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += (f64::EPSILON * *v + f64::MIN_POSITIVE * 100.0) * z;
        }
    }

    let lambda = params.damping;
    let mut r = vec![vec![0.0; n]; n];
    let mut a = vec![vec![0.0; n]; n];
    let mut previous: Vec<bool> = vec![false; n];
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..params.max_iter {
        iterations = it + 1;
        for i in 0..n {
            let (mut first, mut first_k, mut second) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
            for k in 0..n {
                let v = a[i][k] + s[i][k];
                if v > first {
                    second = first;
                    first = v;
                    first_k = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == first_k { second } else { first };
                r[i][k] = lambda * r[i][k] + (1.0 - lambda) * (s[i][k] - competitor);
            }
        }
        for k in 0..n {
            let positive: f64 = (0..n).filter(|&i| i != k).map(|i| r[i][k].max(0.0)).sum();
            for i in 0..n {
                let target = if i == k {
                    positive
                } else {
                    (r[k][k] + positive - r[i][k].max(0.0)).min(0.0)
                };
                a[i][k] = lambda * a[i][k] + (1.0 - lambda) * target;
            }
        }
        let current: Vec<bool> = (0..n).map(|k| r[k][k] + a[k][k] > 0.0).collect();
        if current == previous && current.iter().any(|&e| e) {
            stable += 1;
        } else {
            stable = 0;
        }
        previous = current;
        if stable >= params.convergence_iter {
            converged = true;
            break;
        }
    }

    let exemplars: Vec<usize> = (0..n).filter(|&k| previous[k]).collect();
    if exemplars.is_empty() {
        return Ok(single_exemplar(&s, converged, iterations));
    }
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if exemplars.contains(&i) {
                return i;
            }
            exemplars
                .iter()
                .copied()
                .fold((exemplars[0], f64::NEG_INFINITY), |b, e| if s[i][e] > b.1 { (e, s[i][e]) } else { b })
                .0
        })
        .collect();
    Ok(AffinityResult {
        exemplars,
        partition: Partition::from_labels(labels),
        converged,
        iterations,
    })
}

/// Fallback when no exemplar emerges: the item with the largest total
/// similarity to the others represents everything.
fn single_exemplar(s: &[Vec<f64>], converged: bool, iterations: usize) -> AffinityResult {
    let n = s.len();
    let best = (0..n)
        .map(|k| (k, (0..n).filter(|&i| i != k).map(|i| s[i][k]).sum::<f64>()))
        .fold((0, f64::NEG_INFINITY), |b, (k, v)| if v > b.1 { (k, v) } else { b })
        .0;
    AffinityResult {
        exemplars: vec![best],
        partition: Partition::from_labels(std::iter::repeat_n(0, n)),
        converged,
        iterations,
    }
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric matrix of pairwise dissimilarities with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissimilarity {
    n: usize,
    data: Vec<f64>,
}

impl Dissimilarity {
    /// Validates a row-major `n x n` matrix.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() {
                    return Err(Error::invalid(format!("entry ({i}, {j}) is not finite")));
                }
                if v != data[j * n + i] {
                    return Err(Error::invalid(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Dissimilarity { n, data })
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Dissimilarity::new(n, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Row-major copy of the matrix.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Same matrix with items reordered: entry `(a, b)` of the result is
    /// entry `(order[a], order[b])` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = order.len();
        let mut data = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                data[a * n + b] = self.get(order[a], order[b]);
            }
        }
        Dissimilarity { n, data }
    }
}

/// Assignment of items to clusters `0..k`, numbered by first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Renumbers arbitrary labels so cluster ids follow first occurrence.
    pub fn from_labels<L: Eq + std::hash::Hash>(labels: impl IntoIterator<Item = L>) -> Self {
        let mut ids = HashMap::new();
        let assignment: Vec<usize> = labels
            .into_iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            k: ids.len(),
            assignment,
        }
    }

    /// Partition whose cluster `c` holds the item indices `groups[c]`.
    pub fn from_groups(n: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::invalid(format!("group {c} is empty")));
            }
            for &i in group {
                if i >= n || labels[i] != usize::MAX {
                    return Err(Error::invalid(format!("item {i} is out of range or assigned twice")));
                }
                labels[i] = c;
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::invalid(format!("item {i} is not assigned")));
        }
        Ok(Partition::from_labels(labels))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, item: usize) -> usize {
        self.assignment[item]
    }

    pub fn same_cluster(&self, a: usize, b: usize) -> bool {
        self.assignment[a] == self.assignment[b]
    }

    /// Member indices of every cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Named export of the partition over `ids`.
    pub fn export(&self, ids: &[String]) -> Result<PartitionExport> {
        if ids.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: ids.len(),
            });
        }
        Ok(PartitionExport {
            k: self.k,
            clusters: self
                .clusters()
                .into_iter()
                .map(|c| c.into_iter().map(|i| ids[i].clone()).collect())
                .collect(),
        })
    }
}

/// File form of a partition: `{"k": int, "clusters": [[id, ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionExport {
    pub k: usize,
    pub clusters: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_renumbered_by_first_occurrence() {
        let p = Partition::from_labels(["x", "y", "x", "z"]);
        assert_eq!(p.assignment(), &[0, 1, 0, 2]);
        assert_eq!(p.k(), 3);
        assert_eq!(p.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
        let ids: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let e = p.export(&ids).unwrap();
        assert_eq!(e.clusters[0], vec!["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn dissimilarity_validation() {
        assert!(Dissimilarity::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(Dissimilarity::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(Dissimilarity::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(Partition::from_groups(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_groups(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }
}

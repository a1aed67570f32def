//! AGNES, DIANA and PAM over a dissimilarity matrix. Every tie goes to the
//! lowest item index.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dissimilarity, Partition};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    #[default]
    Agnes,
    Diana,
    Pam,
}

impl ClusterMethod {
    pub const ALL: [ClusterMethod; 3] = [ClusterMethod::Diana, ClusterMethod::Pam, ClusterMethod::Agnes];

    pub fn name(self) -> &'static str {
        match self {
            ClusterMethod::Agnes => "agnes",
            ClusterMethod::Diana => "diana",
            ClusterMethod::Pam => "pam",
        }
    }
}

impl fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "agnes" => Ok(ClusterMethod::Agnes),
            "diana" => Ok(ClusterMethod::Diana),
            "pam" => Ok(ClusterMethod::Pam),
            other => Err(Error::Config(format!("unknown clustering method `{other}`"))),
        }
    }
}

pub fn cluster(d: &Dissimilarity, k: usize, method: ClusterMethod) -> Result<Partition> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside 1..={n}")));
    }
    Ok(match method {
        ClusterMethod::Agnes => agnes(d, k),
        ClusterMethod::Diana => diana(d, k),
        ClusterMethod::Pam => pam_traced(d, k).0,
    })
}

/// Average-linkage agglomeration until `k` clusters remain.
fn agnes(d: &Dissimilarity, k: usize) -> Partition {
    let n = d.len();
    // Cluster slots are named by their lowest member; merged clusters keep
    // the lower slot.
    let mut dist = d.to_rows();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut label: Vec<usize> = (0..n).collect();
    for _ in 0..(n - k) {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                if dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (_, a, b) = best;
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for c in (0..n).filter(|&c| active[c] && c != a && c != b) {
            let merged = (sa * dist[a][c] + sb * dist[b][c]) / (sa + sb);
            dist[a][c] = merged;
            dist[c][a] = merged;
        }
        size[a] += size[b];
        active[b] = false;
        for l in label.iter_mut().filter(|l| **l == b) {
            *l = a;
        }
    }
    Partition::from_labels(label)
}

/// Divisive analysis: repeatedly split the cluster with the largest diameter
/// using the splinter-group procedure.
fn diana(d: &Dissimilarity, k: usize) -> Partition {
    let n = d.len();
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    while clusters.len() < k {
        let diameter = |c: &Vec<usize>| {
            let mut m = 0.0f64;
            for (x, &i) in c.iter().enumerate() {
                for &j in &c[x + 1..] {
                    m = m.max(d.get(i, j));
                }
            }
            m
        };
        let mut pick: Option<(usize, f64)> = None;
        for (idx, c) in clusters.iter().enumerate() {
            if c.len() < 2 {
                continue;
            }
            let dia = diameter(c);
            if pick.is_none_or(|(_, best)| dia > best) {
                pick = Some((idx, dia));
            }
        }
        let Some((idx, _)) = pick else { break };
        let (rest, splinter) = splinter(d, &clusters[idx]);
        clusters[idx] = rest;
        clusters.push(splinter);
    }
    let mut labels = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    Partition::from_labels(labels)
}

fn mean_to(d: &Dissimilarity, i: usize, group: &[usize]) -> f64 {
    let (sum, count) = group
        .iter()
        .filter(|&&j| j != i)
        .fold((0.0, 0usize), |(s, c), &j| (s + d.get(i, j), c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Splits `members` (size >= 2) into the remaining group and the splinter
/// group.
fn splinter(d: &Dissimilarity, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut rest: Vec<usize> = members.to_vec();
    let mut group = Vec::new();
    let first = rest
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (pos, i)| {
            let m = mean_to(d, i, &rest);
            if m > best.1 {
                (pos, m)
            } else {
                best
            }
        })
        .0;
    group.push(rest.remove(first));
    while rest.len() > 1 {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &i) in rest.iter().enumerate() {
            let gain = mean_to(d, i, &rest) - mean_to(d, i, &group);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((pos, gain));
            }
        }
        match best {
            Some((pos, gain)) if gain > 0.0 => group.push(rest.remove(pos)),
            _ => break,
        }
    }
    group.sort_unstable();
    (rest, group)
}

/// Orders two sums that may differ only by rounding, treating values within
/// a relative 1e-10 as equal.
fn near_cmp(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn pam_cost(d: &Dissimilarity, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|j| medoids.iter().map(|&m| d.get(j, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// k-medoids by BUILD then SWAP. Returns the partition, the medoids and the
/// total cost after BUILD and after every accepted swap.
pub fn pam_traced(d: &Dissimilarity, k: usize) -> (Partition, Vec<usize>, Vec<f64>) {
    let n = d.len();
    let row_sum: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).sum()).collect();
    // Candidate `a` beats `b` on a clearly better score, or on a tied score
    // and a smaller total dissimilarity. Both keys ignore item labels, so
    // the lowest index only decides true symmetries.
    let beats = |a: usize, score_a: f64, b: usize, score_b: f64| match near_cmp(score_a, score_b) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => near_cmp(row_sum[a], row_sum[b]) == Ordering::Less,
    };
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut first = 0;
    for i in 1..n {
        if beats(i, row_sum[i], first, row_sum[first]) {
            first = i;
        }
    }
    medoids.push(first);
    let mut nearest: Vec<f64> = (0..n).map(|j| d.get(j, first)).collect();
    while medoids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|i| !medoids.contains(i)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - d.get(j, i)).max(0.0)).sum();
            if best.is_none_or(|(b, g)| beats(i, -gain, b, -g)) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("k <= n leaves a candidate");
        medoids.push(i);
        for (j, near) in nearest.iter_mut().enumerate() {
            *near = near.min(d.get(j, i));
        }
    }

    let mut cost = pam_cost(d, &medoids);
    let mut trace = vec![cost];
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for h in (0..n).filter(|h| !medoids.contains(h)) {
                let mut trial = medoids.clone();
                trial[slot] = h;
                let c = pam_cost(d, &trial);
                if best.is_none_or(|(_, b, bc)| beats(h, c, b, bc)) {
                    best = Some((slot, h, c));
                }
            }
        }
        match best {
            Some((slot, h, c)) if near_cmp(c, cost) == Ordering::Less => {
                medoids[slot] = h;
                cost = c;
                trace.push(cost);
            }
            _ => break,
        }
    }

    medoids.sort_unstable();
    let labels: Vec<usize> = (0..n)
        .map(|j| {
            if let Some(pos) = medoids.iter().position(|&m| m == j) {
                return pos;
            }
            medoids
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |b, (pos, &m)| {
                    if d.get(j, m) < b.1 {
                        (pos, d.get(j, m))
                    } else {
                        b
                    }
                })
                .0
        })
        .collect();
    (Partition::from_labels(labels), medoids, trace)
}

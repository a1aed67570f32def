//! Brute-force reference implementations and fixtures shared by the
//! integration tests.

#![allow(dead_code)]

pub mod suites;

use std::collections::BTreeSet;

use bookforge::corpus::{Article, Corpus};
use bookforge::graphnet::SubNetwork;
use rand::Rng;

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> SubNetwork {
    SubNetwork::from_edges(ids(n), edges).unwrap()
}

/// Every directed simple graph on `n` nodes, as edge lists.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).filter(move |&d| d != s).map(move |d| (s, d)))
        .collect();
    let count = 1u64 << slots.len();
    (0..count).map(move |mask| {
        slots
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e)
            .collect()
    })
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for s in 0..n {
        for d in 0..n {
            if s != d && rng.random_bool(p) {
                edges.push((s, d));
            }
        }
    }
    edges
}

/// All-pairs hop distances by repeated relaxation.
pub fn all_pairs_distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
    let mut d = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(0);
    }
    for &(s, t) in edges {
        d[s][t] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Every shortest path from `s` to `t`, listed explicitly.
fn shortest_paths(adj: &[Vec<usize>], dist: &[Vec<Option<u32>>], s: usize, t: usize) -> Vec<Vec<usize>> {
    let Some(target) = dist[s][t] else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut stack = vec![vec![s]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if last == t {
            out.push(path);
            continue;
        }
        let depth = path.len() as u32 - 1;
        for &w in &adj[last] {
            if dist[s][w] == Some(depth + 1) && depth < target {
                let mut next = path.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    out
}

/// Betweenness as exact fractions `(numerator, denominator)` summed with a
/// common denominator, then converted once.
pub fn oracle_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(s, t) in edges {
        adj[s].push(t);
    }
    let dist = all_pairs_distances(n, edges);
    // Path counts on graphs this small fit in u64 and their lcm stays small.
    let mut fractions: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = shortest_paths(&adj, &dist, s, t);
            if paths.is_empty() {
                continue;
            }
            for (v, f) in fractions.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count() as u64;
                if through > 0 {
                    f.push((through, paths.len() as u64));
                }
            }
        }
    }
    fractions
        .into_iter()
        .map(|f| {
            let lcm = f.iter().fold(1u64, |acc, &(_, d)| acc / gcd(acc, d) * d);
            let num: u64 = f.iter().map(|&(a, d)| a * (lcm / d)).sum();
            num as f64 / lcm as f64
        })
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(reachable - 1) / sum of distances` over outgoing paths; 0 when nothing
/// else is reachable.
pub fn oracle_closeness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let dist = all_pairs_distances(n, edges);
    (0..n)
        .map(|v| {
            let reached: Vec<u32> = dist[v].iter().flatten().copied().collect();
            let sum: u32 = reached.iter().sum();
            if sum == 0 {
                0.0
            } else {
                (reached.len() - 1) as f64 / sum as f64
            }
        })
        .collect()
}

/// PageRank from the dense Google matrix, iterated to a fixed point.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let nf = n as f64;
    let mut out_deg = vec![0usize; n];
    for &(s, _) in edges {
        out_deg[s] += 1;
    }
    let mut m = vec![vec![0.0; n]; n];
    for (j, &deg) in out_deg.iter().enumerate() {
        if deg == 0 {
            for row in m.iter_mut() {
                row[j] = 1.0 / nf;
            }
        }
    }
    for &(s, t) in edges {
        m[t][s] = 1.0 / out_deg[s] as f64;
    }
    let mut r = vec![1.0 / nf; n];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| (1.0 - damping) / nf + damping * (0..n).map(|j| m[i][j] * r[j]).sum::<f64>())
            .collect();
        let change: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if change < 1e-15 {
            break;
        }
    }
    r
}

/// AUC by counting every positive/negative pair.
pub fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// ARI from the four pair-agreement counts.
pub fn brute_ari(a: &[usize], b: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let denom: f64 = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / denom
}

/// Corpus whose articles `a0..an` link as `edges`; titles are `T<i>`.
pub fn linked_corpus(n: usize, edges: &[(usize, usize)]) -> Corpus {
    let mut articles: Vec<Article> = (0..n).map(|i| Article::new(format!("a{i}"), format!("T{i}"))).collect();
    for &(s, t) in edges {
        let target = format!("a{t}");
        if !articles[s].out_links.contains(&target) {
            articles[s].out_links.push(target);
        }
    }
    Corpus::new(articles).unwrap()
}

/// Candidates by expanding the seed set one level at a time.
pub fn brute_candidates(edges: &[(usize, usize)], seeds: &[usize], max_hops: usize) -> BTreeSet<String> {
    let seed_set: BTreeSet<usize> = seeds.iter().copied().collect();
    let mut seen = seed_set.clone();
    let mut frontier = seed_set.clone();
    let mut found = BTreeSet::new();
    for _ in 0..max_hops {
        let next: BTreeSet<usize> = edges
            .iter()
            .filter(|(s, t)| frontier.contains(s) && !seen.contains(t))
            .map(|&(_, t)| t)
            .collect();
        for &v in &next {
            seen.insert(v);
            found.insert(v);
        }
        frontier = next;
    }
    found.into_iter().map(|v| format!("a{v}")).collect()
}

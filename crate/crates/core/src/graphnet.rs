//! Per-book link sub-networks and their structural measures.
//!
//! Edges are unweighted and directed (`a -> b` when `a` links to `b`), so
//! every shortest-path quantity here is a breadth-first hop count.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Induced link graph over a subset of corpus articles.
#[derive(Clone, Debug)]
pub struct SubNetwork {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl SubNetwork {
    /// Builds a graph directly from node ids and `(src, dst)` index pairs.
    /// Self-loops and repeated edges are dropped.
    pub fn from_edges(nodes: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = nodes.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(format!("node `{id}` listed twice")));
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        for &(s, d) in edges {
            if s >= n || d >= n {
                return Err(Error::invalid(format!("edge ({s}, {d}) outside {n} nodes")));
            }
            if s != d {
                out_adj[s].push(d);
            }
        }
        Ok(Self::from_adjacency(nodes, index, out_adj))
    }

    fn from_adjacency(nodes: Vec<String>, index: HashMap<String, usize>, mut out_adj: Vec<Vec<usize>>) -> Self {
        let mut in_adj = vec![Vec::new(); nodes.len()];
        for (s, outs) in out_adj.iter_mut().enumerate() {
            outs.sort_unstable();
            outs.dedup();
            for &d in outs.iter() {
                in_adj[d].push(s);
            }
        }
        SubNetwork {
            nodes,
            index,
            out_adj,
            in_adj,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, s: usize, d: usize) -> bool {
        self.out_adj[s].binary_search(&d).is_ok()
    }

    /// Hop distance from `source` to every node; `None` when unreachable.
    pub fn hop_distances(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].expect("queued nodes have a distance");
            for &w in &self.out_adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Induced sub-network on `members`: nodes keep the given order (duplicates
/// dropped) and edges are the members' resolvable out-links that stay inside
/// the member set.
pub fn build_subnetwork<'a>(corpus: &Corpus, members: impl IntoIterator<Item = &'a str>) -> Result<SubNetwork> {
    let mut nodes = Vec::new();
    let mut corpus_idx = Vec::new();
    let mut index = HashMap::new();
    for id in members {
        let c = corpus.require(id)?;
        if !index.contains_key(id) {
            index.insert(id.to_string(), nodes.len());
            nodes.push(id.to_string());
            corpus_idx.push(c);
        }
    }
    let mut local = HashMap::with_capacity(corpus_idx.len());
    for (i, &c) in corpus_idx.iter().enumerate() {
        local.insert(c, i);
    }
    let out_adj = corpus_idx
        .iter()
        .map(|&c| {
            corpus
                .resolved_links(c)
                .iter()
                .filter_map(|t| local.get(t).copied())
                .collect()
        })
        .collect();
    Ok(SubNetwork::from_adjacency(nodes, index, out_adj))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CentralityParams {
    pub damping: f64,
    pub tol: f64,
    /// Iteration cap for PageRank.
    pub max_iter: usize,
    /// Iteration cap for HITS, whose convergence rate depends on the gap
    /// between the two largest singular values and can be much slower.
    pub hits_max_iter: usize,
}

impl Default for CentralityParams {
    fn default() -> Self {
        CentralityParams {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
            hits_max_iter: 2000,
        }
    }
}

/// Per-node structural measures, indexed like [`SubNetwork::nodes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralFeatures {
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
    pub pagerank: Vec<f64>,
    /// Raw (unnormalized) directed shortest-path betweenness.
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
}

pub fn compute_centralities(g: &SubNetwork, params: &CentralityParams) -> Result<StructuralFeatures> {
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Error::Config(format!("damping {} outside (0, 1)", params.damping)));
    }
    if params.tol <= 0.0 || params.tol.is_nan() {
        return Err(Error::Config(format!("tolerance {} must be positive", params.tol)));
    }
    let pagerank = pagerank(g, params.damping, params.tol, params.max_iter)?;
    let (hub, authority) = hits(g, params.tol, params.hits_max_iter)?;
    let (betweenness, closeness) = betweenness_closeness(g);
    Ok(StructuralFeatures {
        in_degree: g.in_adj.iter().map(Vec::len).collect(),
        out_degree: g.out_adj.iter().map(Vec::len).collect(),
        pagerank,
        betweenness,
        closeness,
        hub,
        authority,
    })
}

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
pub fn pagerank(g: &SubNetwork, damping: f64, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = g.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&v| g.out_adj[v].is_empty()).map(|v| rank[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = g.in_adj[v]
                .iter()
                .map(|&u| rank[u] / g.out_adj[u].len() as f64)
                .sum();
            *slot = base + damping * inflow;
        }
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < tol {
            let total: f64 = rank.iter().sum();
            rank.iter_mut().for_each(|r| *r /= total);
            return Ok(rank);
        }
    }
    Err(Error::NonConvergence {
        what: "pagerank",
        iterations: max_iter,
        residual,
    })
}

fn normalize_l2(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Alternating hub/authority power iteration, both L2-normalized. A graph
/// without edges gets uniform unit vectors.
pub fn hits(g: &SubNetwork, tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let uniform = vec![1.0 / (n as f64).sqrt(); n];
    if g.edge_count() == 0 {
        return Ok((uniform.clone(), uniform));
    }
    let mut hub = uniform;
    let mut auth = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut new_auth: Vec<f64> = (0..n)
            .map(|v| g.in_adj[v].iter().map(|&u| hub[u]).sum())
            .collect();
        normalize_l2(&mut new_auth);
        let mut new_hub: Vec<f64> = (0..n)
            .map(|u| g.out_adj[u].iter().map(|&v| new_auth[v]).sum())
            .collect();
        normalize_l2(&mut new_hub);
        residual = hub.iter().zip(&new_hub).map(|(a, b)| (a - b).abs()).sum::<f64>()
            + auth.iter().zip(&new_auth).map(|(a, b)| (a - b).abs()).sum::<f64>();
        hub = new_hub;
        auth = new_auth;
        if residual < tol {
            return Ok((hub, auth));
        }
    }
    Err(Error::NonConvergence {
        what: "hits",
        iterations: max_iter,
        residual,
    })
}

/// Single-source pass of Brandes' algorithm. Returns the dependency of the
/// source on every node, plus the reachable count and distance sum used for
/// closeness.
fn brandes_from(g: &SubNetwork, s: usize, dependency: &mut [TwoFloat]) -> (usize, u64) {
    let n = g.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![u32::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    let mut distance_sum = 0u64;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        distance_sum += dist[v] as u64;
        for &w in &g.out_adj[v] {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    let mut delta = vec![TwoFloat::from(0.0); n];
    for &w in order.iter().rev() {
        let carried = delta[w] + 1.0;
        for &v in &g.in_adj[w] {
            if dist[v] != u32::MAX && dist[v] + 1 == dist[w] {
                delta[v] += TwoFloat::new_div(sigma[v], sigma[w]) * carried;
            }
        }
        if w != s {
            dependency[w] += delta[w];
        }
    }
    (order.len(), distance_sum)
}

/// Directed betweenness (raw pair fractions) and out-closeness
/// `(reachable - 1) / sum of distances`. Dependencies are accumulated in
/// double-double precision so betweenness is correctly rounded.
pub fn betweenness_closeness(g: &SubNetwork) -> (Vec<f64>, Vec<f64>) {
    let n = g.len();
    const CHUNK: usize = 64;
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<(Vec<TwoFloat>, Vec<(usize, f64)>)> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut dep = vec![TwoFloat::from(0.0); n];
            let mut close = Vec::with_capacity(chunk.len());
            for &s in chunk {
                let (reached, sum) = brandes_from(g, s, &mut dep);
                let c = if sum == 0 { 0.0 } else { (reached - 1) as f64 / sum as f64 };
                close.push((s, c));
            }
            (dep, close)
        })
        .collect();
    let mut total = vec![TwoFloat::from(0.0); n];
    let mut closeness = vec![0.0; n];
    for (dep, close) in partials {
        for (b, d) in total.iter_mut().zip(dep) {
            *b += d;
        }
        for (s, c) in close {
            closeness[s] = c;
        }
    }
    (total.into_iter().map(f64::from).collect(), closeness)
}

/// Aggregated hop distance from a seed set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedDistance {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
}

/// Min/avg/max hop distance from `seeds` (graph node indices) to every node,
/// aggregated over the seeds that reach it. `None` when no seed does.
pub fn seed_distances(g: &SubNetwork, seeds: &[usize]) -> Result<Vec<Option<SeedDistance>>> {
    if seeds.is_empty() {
        return Err(Error::invalid("seed set is empty"));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= g.len()) {
        return Err(Error::invalid(format!("seed index {bad} outside graph")));
    }
    let per_seed: Vec<Vec<Option<u32>>> = seeds.iter().map(|&s| g.hop_distances(s)).collect();
    Ok((0..g.len())
        .map(|v| {
            let reached: Vec<f64> = per_seed.iter().filter_map(|d| d[v]).map(f64::from).collect();
            if reached.is_empty() {
                return None;
            }
            let min = reached.iter().copied().fold(f64::INFINITY, f64::min);
            let max = reached.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let avg = reached.iter().sum::<f64>() / reached.len() as f64;
            Some(SeedDistance { min, avg, max })
        })
        .collect())
}

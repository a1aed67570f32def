use std::collections::HashSet;

use super::SeedSet;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Articles reachable from the seeds in `1..=max_hops` out-link hops,
/// excluding the seeds, sorted by id.
pub fn find_candidates(corpus: &Corpus, seeds: &SeedSet, max_hops: usize) -> Result<Vec<String>> {
    if max_hops == 0 {
        return Err(Error::Config("max_hops must be at least 1".into()));
    }
    let seed_idx: Vec<usize> = seeds
        .concept_ids
        .iter()
        .map(|id| corpus.require(id))
        .collect::<Result<_>>()?;
    let mut visited: HashSet<usize> = seed_idx.iter().copied().collect();
    let mut frontier = seed_idx;
    let mut found = Vec::new();
    for _ in 0..max_hops {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in corpus.resolved_links(v) {
                if visited.insert(w) {
                    next.push(w);
                }
            }
        }
        found.extend(next.iter().copied());
        frontier = next;
    }
    let mut ids: Vec<String> = found.into_iter().map(|i| corpus.article(i).id.clone()).collect();
    ids.sort();
    Ok(ids)
}

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textfeat::tokenize;

/// Words never matched on their own when resolving a query.
pub const STOP_WORDS: &[&str] = &[
    "a", "an", "and", "as", "at", "by", "for", "from", "in", "into", "of", "on", "or", "the", "to", "vs",
    "with",
];

/// A query and the corpus articles it resolves to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub query: String,
    /// Matched article ids in query order, without duplicates.
    pub concept_ids: Vec<String>,
}

/// Resolves a query to article ids by greedy longest match of its tokens
/// against normalized titles, left to right and without overlap. A lone stop
/// word never starts a match.
pub fn seed_concepts_from_query(corpus: &Corpus, query: &str) -> Result<SeedSet> {
    let tokens: Vec<String> = tokenize(query).collect();
    if tokens.is_empty() {
        return Err(Error::NoSeedFound(query.to_string()));
    }
    let index = corpus.title_index();
    let mut concept_ids: Vec<String> = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let mut matched = None;
        for end in (start + 1..=tokens.len()).rev() {
            if end == start + 1 && STOP_WORDS.contains(&tokens[start].as_str()) {
                continue;
            }
            if let Some(&idx) = index.get(&tokens[start..end].join(" ")) {
                matched = Some((end, idx));
                break;
            }
        }
        match matched {
            Some((end, idx)) => {
                let id = &corpus.article(idx).id;
                if !concept_ids.contains(id) {
                    concept_ids.push(id.clone());
                }
                start = end;
            }
            None => start += 1,
        }
    }
    if concept_ids.is_empty() {
        return Err(Error::NoSeedFound(query.to_string()));
    }
    Ok(SeedSet {
        query: query.to_string(),
        concept_ids,
    })
}

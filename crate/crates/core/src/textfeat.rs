//! Document embeddings, cosine similarity and text-structure statistics.
//!
//! The default embedder is tf-idf over a lowercase, alphanumeric-run
//! tokenization. A [`TableEmbedder`] stands in for any externally trained
//! document model: it returns exactly the vectors it was given.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Corpus};
use crate::error::{Error, Result};

/// Lowercases `text` and splits it on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// A vector in sparse form: sorted indices with their values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Embedding {
    pub fn zeros(dim: usize) -> Self {
        Embedding {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps every coordinate, zeros included, so `to_dense` is bit-exact.
    pub fn from_dense(values: &[f64]) -> Self {
        Embedding {
            dim: values.len(),
            indices: (0..values.len() as u32).collect(),
            values: values.to_vec(),
        }
    }

    /// Builds from `(index, value)` pairs; indices must be unique and `< dim`.
    pub fn from_sparse(dim: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("repeated index in sparse vector"));
        }
        if let Some(&(last, _)) = entries.last() {
            if last as usize >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: last as usize + 1,
                });
            }
        }
        let (indices, values) = entries.into_iter().unzip();
        Ok(Embedding { dim, indices, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i as usize] = v;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.values {
            *v *= factor;
        }
        self
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(u: &Embedding, v: &Embedding) -> Result<f64> {
    let dot = u.dot(v)?;
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Something that turns an article into a vector.
pub trait DocumentEmbedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed_article(&self, article: &Article) -> Embedding;
}

/// tf-idf embedder with smoothed inverse document frequency
/// `ln((1 + N) / (1 + df)) + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TfIdfEmbedder {
    vocabulary: BTreeMap<String, u32>,
    idf: Vec<f64>,
}

/// Fits a tf-idf embedder on every article text in `corpus`.
pub fn fit_embedder(corpus: &Corpus) -> Result<TfIdfEmbedder> {
    TfIdfEmbedder::fit(corpus.articles().iter().map(|a| a.text.as_str()))
}

impl TfIdfEmbedder {
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0usize;
        for doc in docs {
            n_docs += 1;
            let mut terms: Vec<String> = tokenize(doc).collect();
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::invalid("cannot fit an embedder on an empty corpus"));
        }
        if df.is_empty() {
            return Err(Error::invalid("corpus contains no tokens"));
        }
        let n = n_docs as f64;
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::with_capacity(df.len());
        for (i, (term, count)) in df.into_iter().enumerate() {
            vocabulary.insert(term, i as u32);
            idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
        }
        Ok(TfIdfEmbedder { vocabulary, idf })
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, u32> {
        &self.vocabulary
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocabulary.get(term).map(|&i| self.idf[i as usize])
    }

    pub fn dimension(&self) -> usize {
        self.idf.len()
    }

    /// L2-normalized tf-idf vector of `text`. Out-of-vocabulary terms are
    /// ignored; text with no known terms maps to the zero vector.
    pub fn embed(&self, text: &str) -> Embedding {
        let mut tf: HashMap<u32, f64> = HashMap::new();
        for token in tokenize(text) {
            if let Some(&i) = self.vocabulary.get(&token) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let entries: Vec<(u32, f64)> = tf
            .into_iter()
            .map(|(i, count)| (i, count * self.idf[i as usize]))
            .collect();
        let v = Embedding::from_sparse(self.dimension(), entries)
            .expect("vocabulary indices are unique and in range");
        let norm = v.norm();
        if norm == 0.0 {
            v
        } else {
            v.scaled(1.0 / norm)
        }
    }
}

impl DocumentEmbedder for TfIdfEmbedder {
    fn dimension(&self) -> usize {
        self.dimension()
    }

    fn embed_article(&self, article: &Article) -> Embedding {
        self.embed(&article.text)
    }
}

#[derive(Deserialize)]
struct TableRow {
    id: String,
    vector: Vec<f64>,
}

/// Precomputed id → vector table. Articles missing from the table embed to
/// the zero vector.
#[derive(Clone, Debug)]
pub struct TableEmbedder {
    dim: usize,
    vectors: HashMap<String, Embedding>,
}

impl TableEmbedder {
    pub fn new(rows: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (id, v) in rows {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: v.len(),
                    })
                }
                Some(_) => {}
            }
            if vectors.insert(id.clone(), Embedding::from_dense(&v)).is_some() {
                return Err(Error::Schema(format!("duplicate embedding id `{id}`")));
            }
        }
        Ok(TableEmbedder {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    /// Reads a JSONL table of `{"id": ..., "vector": [...]}` rows.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: TableRow = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            rows.push((row.id, row.vector));
        }
        TableEmbedder::new(rows)
    }

    pub fn get(&self, id: &str) -> Option<&Embedding> {
        self.vectors.get(id)
    }
}

impl DocumentEmbedder for TableEmbedder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed_article(&self, article: &Article) -> Embedding {
        self.vectors
            .get(&article.id)
            .cloned()
            .unwrap_or_else(|| Embedding::zeros(self.dim))
    }
}

/// Size of an article's text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TextStats {
    /// Character count.
    pub length: usize,
    /// Maximal runs of non-blank lines.
    pub paragraphs: usize,
}

pub fn text_stats(article: &Article) -> TextStats {
    stats_of(&article.text)
}

pub fn stats_of(text: &str) -> TextStats {
    let mut paragraphs = 0;
    let mut in_paragraph = false;
    for line in text.lines() {
        let blank = line.trim().is_empty();
        if !blank && !in_paragraph {
            paragraphs += 1;
        }
        in_paragraph = !blank;
    }
    TextStats {
        length: text.chars().count(),
        paragraphs,
    }
}

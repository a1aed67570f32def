use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

/// A curated, human-built book: the reference the pipeline learns from and is
/// evaluated against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldBook {
    /// Book title, used as the seed query.
    pub title: String,
    /// Aggregate page views of the book page itself.
    #[serde(default)]
    pub views: u64,
    /// Ordered chapters of ordered article ids.
    pub chapters: Vec<Vec<String>>,
}

impl GoldBook {
    /// Number of articles (components) in the book.
    pub fn components(&self) -> usize {
        self.chapters.iter().map(Vec::len).sum()
    }

    /// Articles in reading order: chapter order, then within-chapter order.
    pub fn articles(&self) -> impl Iterator<Item = &str> {
        self.chapters.iter().flatten().map(String::as_str)
    }

    /// Chapter index of every article, keyed by id.
    pub fn chapter_of(&self) -> std::collections::HashMap<&str, usize> {
        self.chapters
            .iter()
            .enumerate()
            .flat_map(|(c, ids)| ids.iter().map(move |id| (id.as_str(), c)))
            .collect()
    }

    /// Checks the book against a corpus: ids exist, chapters are disjoint and
    /// non-empty, and there is at least one component.
    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        if self.components() == 0 {
            return Err(Error::Schema(format!("book `{}` has no components", self.title)));
        }
        let mut seen = HashSet::new();
        for (c, chapter) in self.chapters.iter().enumerate() {
            if chapter.is_empty() {
                return Err(Error::Schema(format!(
                    "book `{}` has an empty chapter {}",
                    self.title,
                    c + 1
                )));
            }
            for id in chapter {
                corpus.require(id)?;
                if !seen.insert(id.as_str()) {
                    return Err(Error::Schema(format!(
                        "book `{}` lists `{id}` more than once",
                        self.title
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Keeps books with at least `min_views` views and `min_components`
/// articles, preserving input order.
pub fn filter_gold_books(books: &[GoldBook], min_views: u64, min_components: usize) -> Vec<GoldBook> {
    books
        .iter()
        .filter(|b| b.views >= min_views && b.components() >= min_components)
        .cloned()
        .collect()
}

pub fn load_gold_books(path: impl AsRef<Path>) -> Result<Vec<GoldBook>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn save_gold_books(books: &[GoldBook], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, books)?;
    writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book(views: u64, components: usize) -> GoldBook {
        GoldBook {
            title: format!("b{views}-{components}"),
            views,
            chapters: vec![(0..components).map(|i| format!("a{i}")).collect()],
        }
    }

    #[test]
    fn empty_input_gives_empty_output() {
        assert!(filter_gold_books(&[], 1000, 10).is_empty());
    }

    #[test]
    fn view_threshold_keeps_books_at_or_above() {
        // 6700 books of which 490 reach 1000 views.
        let books: Vec<_> = (0..6700u64)
            .map(|i| book(if i % 13 == 0 && i / 13 < 490 { 1000 + i } else { 999 }, 12))
            .collect();
        assert_eq!(filter_gold_books(&books, 1000, 0).len(), 490);
    }

    #[test]
    fn component_threshold_drops_small_books() {
        // 477 resolved books, 70 of them under 10 components.
        let books: Vec<_> = (0..477).map(|i| book(5000, if i < 70 { 9 } else { 10 })).collect();
        assert_eq!(filter_gold_books(&books, 1000, 10).len(), 407);
    }

    #[test]
    fn filter_is_stable_and_idempotent() {
        let books = vec![book(10, 3), book(2000, 30), book(1500, 11), book(900, 50)];
        let once = filter_gold_books(&books, 1000, 10);
        assert_eq!(once, vec![books[1].clone(), books[2].clone()]);
        assert_eq!(filter_gold_books(&once, 1000, 10), once);
    }
}

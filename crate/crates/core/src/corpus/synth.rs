//! Seeded generator for corpora with planted gold books.
//!
//! Each planted book is a run of articles split into consecutive chapters.
//! Book articles share a book category and topic vocabulary, chapter members
//! additionally share a chapter category, chapter vocabulary and a page-view
//! signal, and links are dense inside a chapter, moderate inside a book and
//! sparse elsewhere. Background articles are grouped into decoy topics with
//! the same kind of internal structure, so density alone does not identify a
//! book.
//!
//! Reading order is planted as a soft trend: earlier articles are longer,
//! carry more categories, attract more links and views, and link forward
//! more often than backward. Background articles draw the same attributes
//! from the same marginal distribution.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Article, Corpus, GoldBook};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub articles: usize,
    pub books: usize,
    pub min_components: usize,
    pub max_components: usize,
    pub min_chapters: usize,
    pub max_chapters: usize,
    /// Link probability between two articles of the same chapter.
    pub p_intra_chapter: f64,
    /// Link probability between two articles of one book, different chapters.
    pub p_intra_book: f64,
    /// Link probability between unrelated articles.
    pub p_background: f64,
    /// Weight of the shared book/chapter signal in page-view series, in [0, 1].
    pub pageview_correlation: f64,
    pub window_days: usize,
    /// Fraction of books whose title names two seed articles.
    pub two_seed_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            articles: 2000,
            books: 20,
            min_components: 10,
            max_components: 30,
            min_chapters: 2,
            max_chapters: 4,
            p_intra_chapter: 0.5,
            p_intra_book: 0.1,
            p_background: 0.005,
            pageview_correlation: 0.8,
            window_days: 60,
            two_seed_fraction: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.books == 0 {
            return fail("books must be at least 1".into());
        }
        if self.min_components < 2 || self.min_components > self.max_components {
            return fail(format!(
                "component range {}..={} is empty or below 2",
                self.min_components, self.max_components
            ));
        }
        if self.min_chapters == 0 || self.min_chapters > self.max_chapters {
            return fail(format!(
                "chapter range {}..={} is empty",
                self.min_chapters, self.max_chapters
            ));
        }
        if self.max_chapters > self.min_components {
            return fail(format!(
                "{} chapters cannot fit in a {}-article book",
                self.max_chapters, self.min_components
            ));
        }
        if self.books * self.max_components > self.articles {
            return fail(format!(
                "{} books of up to {} articles do not fit in {} articles",
                self.books, self.max_components, self.articles
            ));
        }
        for (name, p) in [
            ("p_intra_chapter", self.p_intra_chapter),
            ("p_intra_book", self.p_intra_book),
            ("p_background", self.p_background),
            ("pageview_correlation", self.pageview_correlation),
            ("two_seed_fraction", self.two_seed_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is outside [0, 1]"));
            }
        }
        if self.window_days == 0 {
            return fail("window_days must be at least 1".into());
        }
        Ok(())
    }
}

const CONSONANTS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr",
    "st", "pl", "gr", "th", "sh",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou", "ea"];

const GENERAL_WORDS: usize = 3000;
const TOPIC_WORDS: usize = 40;
const CHAPTER_WORDS: usize = 20;
const GENERAL_CATEGORIES: usize = 80;
const DECOY_TOPIC_SIZE: usize = 30;

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    (0..syllables)
        .map(|_| {
            let c = CONSONANTS[rng.random_range(0..CONSONANTS.len())];
            let v = VOWELS[rng.random_range(0..VOWELS.len())];
            format!("{c}{v}")
        })
        .collect()
}

fn unique_words(rng: &mut ChaCha8Rng, count: usize, taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.random_range(2..=4);
        let w = pseudo_word(rng, syllables);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn capitalize(w: &str) -> String {
    let mut chars = w.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Zero-mean, unit-variance AR(1) series.
fn latent_series(rng: &mut ChaCha8Rng, days: usize) -> Vec<f64> {
    let phi: f64 = 0.7;
    let scale = (1.0 - phi * phi).sqrt();
    let mut x = gaussian(rng);
    (0..days)
        .map(|_| {
            let cur = x;
            x = phi * x + scale * gaussian(rng);
            cur
        })
        .collect()
}

/// Where a generated article sits in the planted structure.
#[derive(Clone, Copy)]
enum Role {
    Book {
        book: usize,
        chapter: usize,
        /// Reading position within the book, scaled to [0, 1].
        position: f64,
    },
    Background {
        topic: usize,
        /// Drawn from the same range as `position` for book articles.
        position: f64,
    },
}

impl Role {
    fn position(self) -> f64 {
        match self {
            Role::Book { position, .. } | Role::Background { position, .. } => position,
        }
    }
}

struct Vocabulary {
    general: Vec<String>,
    books: Vec<Vec<String>>,
    chapters: Vec<Vec<Vec<String>>>,
    decoys: Vec<Vec<String>>,
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &'a [String]) -> &'a str {
    &words[rng.random_range(0..words.len())]
}

/// Zipf-like draw from the general vocabulary: low indices are common.
fn pick_general<'a>(rng: &mut ChaCha8Rng, words: &'a [String]) -> &'a str {
    let u: f64 = rng.random();
    let idx = ((u * u * u) * words.len() as f64) as usize;
    &words[idx.min(words.len() - 1)]
}

fn write_text(rng: &mut ChaCha8Rng, role: Role, vocab: &Vocabulary) -> String {
    let position = role.position();
    let words = (420.0 * (-1.2 * position).exp() * (0.04 * gaussian(rng)).exp()).round() as usize;
    let words = words.max(30);
    let per_paragraph = 45;
    let mut text = String::new();
    let mut written = 0;
    while written < words {
        if !text.is_empty() {
            text.push_str("\n\n");
        }
        let target = per_paragraph.min(words - written);
        let mut sentence_len = 0;
        let sentence_target = rng.random_range(8..15);
        for i in 0..target {
            let u: f64 = rng.random();
            let w = match role {
                Role::Book { book, chapter, .. } => {
                    if u < 0.22 {
                        pick(rng, &vocab.books[book])
                    } else if u < 0.45 {
                        pick(rng, &vocab.chapters[book][chapter])
                    } else {
                        pick_general(rng, &vocab.general)
                    }
                }
                Role::Background { topic, .. } => {
                    if u < 0.35 {
                        pick(rng, &vocab.decoys[topic])
                    } else {
                        pick_general(rng, &vocab.general)
                    }
                }
            };
            if sentence_len == 0 {
                text.push_str(&capitalize(w));
            } else {
                text.push_str(w);
            }
            sentence_len += 1;
            if sentence_len >= sentence_target || i + 1 == target {
                text.push('.');
                sentence_len = 0;
            }
            if i + 1 < target {
                text.push(' ');
            }
        }
        written += target;
    }
    text
}

/// Draws `count` distinct indices from `weights` (cumulative sampling),
/// skipping `exclude`.
fn weighted_targets(
    rng: &mut ChaCha8Rng,
    cumulative: &[f64],
    count: usize,
    exclude: usize,
) -> BTreeSet<usize> {
    let total = *cumulative.last().unwrap_or(&0.0);
    let mut out = BTreeSet::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 20 {
        attempts += 1;
        let r = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
        if idx != exclude {
            out.insert(idx);
        }
    }
    out
}

fn split_chapters(rng: &mut ChaCha8Rng, size: usize, chapters: usize) -> Vec<usize> {
    let floor = if size >= 2 * chapters { 2 } else { 1 };
    let mut sizes = vec![floor; chapters];
    for _ in 0..size - floor * chapters {
        let c = rng.random_range(0..chapters);
        sizes[c] += 1;
    }
    sizes
}

/// Generates a corpus with `cfg.books` planted gold books. The same seed
/// always yields the same corpus and books.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<(Corpus, Vec<GoldBook>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.articles;

    // Ids carry no information about structure.
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut rng);
    let ids: Vec<String> = labels.iter().map(|l| format!("w{l:05}")).collect();

    let mut taken = HashSet::new();
    let title_words = unique_words(&mut rng, 2 * n, &mut taken);
    let mut titles = Vec::with_capacity(n);
    let mut seen_titles = HashSet::new();
    for i in 0..n {
        let mut t = format!("{} {}", capitalize(&title_words[2 * i]), capitalize(&title_words[2 * i + 1]));
        while !seen_titles.insert(t.to_lowercase()) {
            let extra = unique_words(&mut rng, 1, &mut taken);
            t = format!("{t} {}", capitalize(&extra[0]));
        }
        titles.push(t);
    }

    // Planted structure over a shuffled slot order.
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut rng);
    let mut roles: Vec<Option<Role>> = vec![None; n];
    let mut book_members: Vec<Vec<Vec<usize>>> = Vec::with_capacity(cfg.books);
    let mut cursor = 0;
    for b in 0..cfg.books {
        let size = rng.random_range(cfg.min_components..=cfg.max_components);
        let chapters = rng.random_range(cfg.min_chapters..=cfg.max_chapters).min(size);
        let sizes = split_chapters(&mut rng, size, chapters);
        let mut members = Vec::with_capacity(chapters);
        let mut t = 0;
        for (c, &len) in sizes.iter().enumerate() {
            let chapter: Vec<usize> = slots[cursor..cursor + len].to_vec();
            for &a in &chapter {
                roles[a] = Some(Role::Book {
                    book: b,
                    chapter: c,
                    position: t as f64 / (size - 1) as f64,
                });
                t += 1;
            }
            cursor += len;
            members.push(chapter);
        }
        book_members.push(members);
    }
    let background = n - cursor;
    let decoy_topics = background.div_ceil(DECOY_TOPIC_SIZE).max(1);
    let mut decoy_members = vec![Vec::new(); decoy_topics];
    for (k, &a) in slots[cursor..].iter().enumerate() {
        let topic = k % decoy_topics;
        decoy_members[topic].push(a);
        roles[a] = Some(Role::Background {
            topic,
            position: rng.random::<f64>(),
        });
    }
    let roles: Vec<Role> = roles.into_iter().map(|r| r.expect("every slot assigned")).collect();

    let vocab = Vocabulary {
        general: unique_words(&mut rng, GENERAL_WORDS, &mut taken),
        books: (0..cfg.books)
            .map(|_| unique_words(&mut rng, TOPIC_WORDS, &mut taken))
            .collect(),
        chapters: book_members
            .iter()
            .map(|chs| {
                chs.iter()
                    .map(|_| unique_words(&mut rng, CHAPTER_WORDS, &mut taken))
                    .collect()
            })
            .collect(),
        decoys: (0..decoy_topics)
            .map(|_| unique_words(&mut rng, TOPIC_WORDS, &mut taken))
            .collect(),
    };

    // Page-view latent signals.
    let days = cfg.window_days;
    let book_signal: Vec<Vec<f64>> = (0..cfg.books).map(|_| latent_series(&mut rng, days)).collect();
    let chapter_signal: Vec<Vec<Vec<f64>>> = book_members
        .iter()
        .map(|chs| chs.iter().map(|_| latent_series(&mut rng, days)).collect())
        .collect();
    let decoy_signal: Vec<Vec<f64>> = (0..decoy_topics).map(|_| latent_series(&mut rng, days)).collect();

    let mut articles: Vec<Article> = (0..n)
        .map(|i| Article::new(ids[i].clone(), titles[i].clone()))
        .collect();

    let rho = cfg.pageview_correlation;
    for (i, article) in articles.iter_mut().enumerate() {
        let role = roles[i];
        let position = role.position();
        article.text = write_text(&mut rng, role, &vocab);

        let extra_general = ((1.0 - position) * 2.0 + 0.6 * gaussian(&mut rng)).round().clamp(0.0, 3.0) as usize;
        let mut cats = BTreeSet::new();
        match role {
            Role::Book { book, chapter, .. } => {
                cats.insert(format!("Book topic {book}"));
                cats.insert(format!("Book topic {book} part {chapter}"));
            }
            Role::Background { topic, .. } => {
                cats.insert(format!("Subject {topic}"));
                if rng.random_bool(0.5) {
                    cats.insert(format!("Subject {topic} detail {}", rng.random_range(0..3)));
                }
            }
        }
        while cats.len() < 2 + extra_general {
            cats.insert(format!("General {}", rng.random_range(0..GENERAL_CATEGORIES)));
        }
        article.categories = cats;

        // Roughly 1% of articles have no recorded views at all.
        if rng.random_bool(0.01) {
            article.pageviews = vec![0; days];
            continue;
        }
        let level = 5.0 - 2.0 * position + 0.1 * gaussian(&mut rng);
        let (shared_a, shared_b): (&[f64], Option<&[f64]>) = match role {
            Role::Book { book, chapter, .. } => (&book_signal[book], Some(&chapter_signal[book][chapter])),
            Role::Background { topic, .. } => (&decoy_signal[topic], None),
        };
        article.pageviews = (0..days)
            .map(|d| {
                let shared = match shared_b {
                    Some(ch) => 0.5 * shared_a[d] + 0.85 * ch[d],
                    None => shared_a[d],
                };
                let noise = gaussian(&mut rng);
                let z = rho * shared + (1.0 - rho * rho).sqrt() * noise;
                (level + 0.5 * z).exp().round() as u64
            })
            .collect();
    }

    // Links.
    let popularity: Vec<f64> = roles.iter().map(|r| (-1.5 * r.position()).exp()).collect();
    let cumulative: Vec<f64> = popularity
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let mut out_links: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];

    let forward = |a_pos: f64, b_pos: f64| if a_pos < b_pos { 1.5 } else { 0.5 };
    for chapters in &book_members {
        let flat: Vec<(usize, usize)> = chapters
            .iter()
            .enumerate()
            .flat_map(|(c, ids)| ids.iter().map(move |&a| (a, c)))
            .collect();
        for &(a, ca) in &flat {
            for &(b, cb) in &flat {
                if a == b {
                    continue;
                }
                let base = if ca == cb { cfg.p_intra_chapter } else { cfg.p_intra_book };
                let p = (base * forward(roles[a].position(), roles[b].position())).min(1.0);
                if rng.random_bool(p) {
                    out_links[a].insert(b);
                }
            }
        }
    }
    for members in &decoy_members {
        for &a in members {
            for &b in members {
                if a != b && rng.random_bool(cfg.p_intra_book) {
                    out_links[a].insert(b);
                }
            }
        }
    }
    let background_links = Binomial::new((n - 1) as u64, cfg.p_background)
        .map_err(|e| Error::Config(format!("p_background: {e}")))?;
    for a in 0..n {
        let count = rng.sample(background_links) as usize;
        let targets = weighted_targets(&mut rng, &cumulative, count, a);
        out_links[a].extend(targets);
    }

    for (a, article) in articles.iter_mut().enumerate() {
        // Document order of links is randomized, as in real text.
        let mut links: Vec<usize> = out_links[a].iter().copied().collect();
        links.shuffle(&mut rng);
        article.out_links = links.into_iter().map(|t| ids[t].clone()).collect();
    }

    let mut books = Vec::with_capacity(cfg.books);
    for members in &book_members {
        let first = members[0][0];
        let flat: Vec<usize> = members.iter().flatten().copied().collect();
        let title = if rng.random_bool(cfg.two_seed_fraction) && flat.len() > 1 {
            format!("{} and {}", titles[flat[0]], titles[flat[1]])
        } else {
            titles[first].clone()
        };
        books.push(GoldBook {
            title,
            views: rng.random_range(1000..50_000),
            chapters: members
                .iter()
                .map(|ch| ch.iter().map(|&a| ids[a].clone()).collect())
                .collect(),
        });
    }

    articles.sort_by(|a, b| a.id.cmp(&b.id));
    let corpus = Corpus::new(articles)?;
    Ok((corpus, books))
}

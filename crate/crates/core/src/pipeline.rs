//! End-to-end flows over a corpus: building every table of a gold book,
//! training one model per book and stage, leave-one-out evaluation against
//! the gold books, and generation of a new book from a query.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaptering::{chapter_articles, chapter_with_models, AffinityParams, ChapterCount, ClusterMethod, Partition};
use crate::corpus::{Corpus, GoldBook};
use crate::datasets::{
    build_candidate_dataset, build_pair_dataset_chapter, build_pair_dataset_order, find_candidates,
    seed_concepts_from_query, ArticleProfiles, CandidateDataset, GroupCount, PairDataset, SeedSet,
};
use crate::error::{Error, Result};
use crate::graphnet::{build_subnetwork, CentralityParams};
use crate::learners::{train_gbdt, GbdtModel, GbdtParams, LogisticModel};
use crate::metrics::{
    adjusted_rand, ari_pvalue, auc, kendall_tau, pooled_kendall_tau, precision_recall_at_n, stars, BookEvaluation,
    EvalReport,
};
use crate::ordering::{assemble_book, classify_pair_order, classify_with_models, ranks_from_pair_classes, BookDraft, Provenance};
use crate::selection::{
    choose_articles, loo_protocol, pooled_calibration, select_loo, select_with_models, ArticleCount, SelectionOutcome,
};
use crate::textfeat::fit_embedder;

/// Version of the model-set file layout.
pub const MODEL_SET_VERSION: u32 = 1;

/// Every tunable of the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub max_hops: usize,
    /// Share of candidates kept for the second selection pass.
    pub top_fraction: f64,
    pub gbdt: GbdtParams,
    pub centrality: CentralityParams,
    pub affinity: AffinityParams,
    pub chapter_method: ClusterMethod,
    /// Cap on articles chosen when generating without a known book size.
    pub max_articles: usize,
    /// Label permutations behind each ARI p-value.
    pub permutations: usize,
    pub seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            max_hops: 3,
            top_fraction: 0.2,
            gbdt: GbdtParams::default(),
            centrality: CentralityParams::default(),
            affinity: AffinityParams::default(),
            chapter_method: ClusterMethod::Agnes,
            max_articles: 200,
            permutations: 999,
            seed: 0,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_hops == 0 {
            return Err(Error::Config("max_hops must be at least 1".into()));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(Error::Config(format!("top_fraction {} outside (0, 1]", self.top_fraction)));
        }
        if self.max_articles == 0 {
            return Err(Error::Config("max_articles must be at least 1".into()));
        }
        if !(self.affinity.damping >= 0.5 && self.affinity.damping < 1.0) {
            return Err(Error::Config(format!("damping {} outside [0.5, 1)", self.affinity.damping)));
        }
        self.gbdt.validate()
    }
}

/// Profiles of every corpus article under the default embedder.
pub fn profile_corpus(corpus: &Corpus) -> Result<ArticleProfiles> {
    let embedder = fit_embedder(corpus)?;
    Ok(ArticleProfiles::new(corpus, &embedder))
}

/// Every table derived from one gold book.
#[derive(Clone, Debug, PartialEq)]
pub struct BookData {
    pub gold: GoldBook,
    pub seeds: SeedSet,
    pub candidates: CandidateDataset,
    /// Chaptering pairs with indicators from gold-k clusterings.
    pub chapter_pairs: PairDataset,
    /// Chaptering pairs with indicators from estimated-k clusterings.
    pub chapter_pairs_estimated: PairDataset,
    pub order_pairs: PairDataset,
}

/// Builds the tables of one gold book: candidates around the seeds its
/// title resolves to, and the pair tables over its own articles.
pub fn prepare_book(corpus: &Corpus, profiles: &ArticleProfiles, gold: &GoldBook, params: &PipelineParams) -> Result<BookData> {
    gold.validate(corpus)?;
    let seeds = seed_concepts_from_query(corpus, &gold.title)?;
    let candidates = find_candidates(corpus, &seeds, params.max_hops)?;
    let members = seeds.concept_ids.iter().chain(&candidates).map(String::as_str);
    let graph = build_subnetwork(corpus, members)?;
    let candidate_table = build_candidate_dataset(corpus, profiles, &seeds, Some(gold), &graph, &params.centrality)?;

    let articles: Vec<String> = gold.articles().map(str::to_string).collect();
    let book_graph = build_subnetwork(corpus, articles.iter().map(String::as_str))?;
    let chapter_pairs = build_pair_dataset_chapter(
        corpus,
        profiles,
        &articles,
        Some(&gold.chapters),
        &book_graph,
        &GroupCount::Fixed(gold.chapters.len()),
    )?;
    let chapter_pairs_estimated = build_pair_dataset_chapter(
        corpus,
        profiles,
        &articles,
        Some(&gold.chapters),
        &book_graph,
        &GroupCount::Estimated(params.affinity.clone()),
    )?;
    let order_pairs = build_pair_dataset_order(corpus, profiles, &articles, Some(gold), &book_graph, &params.centrality)?;
    Ok(BookData {
        gold: gold.clone(),
        seeds,
        candidates: candidate_table,
        chapter_pairs,
        chapter_pairs_estimated,
        order_pairs,
    })
}

/// The tables of several books, one vector per kind, aligned by book.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BookTables {
    pub golds: Vec<GoldBook>,
    pub seeds: Vec<SeedSet>,
    pub candidates: Vec<CandidateDataset>,
    pub chapter_pairs: Vec<PairDataset>,
    pub chapter_pairs_estimated: Vec<PairDataset>,
    pub order_pairs: Vec<PairDataset>,
}

impl BookTables {
    pub fn len(&self) -> usize {
        self.golds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.golds.is_empty()
    }
}

impl FromIterator<BookData> for BookTables {
    fn from_iter<I: IntoIterator<Item = BookData>>(iter: I) -> Self {
        let mut t = BookTables::default();
        for b in iter {
            t.golds.push(b.gold);
            t.seeds.push(b.seeds);
            t.candidates.push(b.candidates);
            t.chapter_pairs.push(b.chapter_pairs);
            t.chapter_pairs_estimated.push(b.chapter_pairs_estimated);
            t.order_pairs.push(b.order_pairs);
        }
        t
    }
}

/// [`prepare_book`] for every book, in parallel, in input order.
pub fn prepare_books(
    corpus: &Corpus,
    profiles: &ArticleProfiles,
    golds: &[GoldBook],
    params: &PipelineParams,
) -> Result<BookTables> {
    let books: Vec<BookData> = golds
        .par_iter()
        .map(|g| prepare_book(corpus, profiles, g, params))
        .collect::<Result<_>>()?;
    Ok(books.into_iter().collect())
}

/// One model per book and stage, plus calibrations pooled over the books'
/// leave-one-out scores for use on books without labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub format_version: u32,
    pub params: PipelineParams,
    pub books: Vec<String>,
    pub selection: Vec<GbdtModel>,
    pub chapter: Vec<GbdtModel>,
    pub chapter_estimated: Vec<GbdtModel>,
    pub order: Vec<GbdtModel>,
    pub selection_calibration: LogisticModel,
    pub order_calibration: LogisticModel,
}

impl ModelSet {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: ModelSet = serde_json::from_str(text)?;
        if set.format_version != MODEL_SET_VERSION {
            return Err(Error::Schema(format!(
                "model set version {} is not {MODEL_SET_VERSION}",
                set.format_version
            )));
        }
        let n = set.books.len();
        for (what, len) in [
            ("selection", set.selection.len()),
            ("chapter", set.chapter.len()),
            ("chapter_estimated", set.chapter_estimated.len()),
            ("order", set.order.len()),
        ] {
            if len != n {
                return Err(Error::Schema(format!("{len} {what} models for {n} books")));
            }
        }
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn refs(models: &[GbdtModel]) -> Vec<&GbdtModel> {
        models.iter().collect()
    }
}

fn train_each<K: crate::datasets::RowKey + Sync>(
    tables: &[crate::datasets::Dataset<K>],
    params: &GbdtParams,
) -> Result<Vec<GbdtModel>> {
    tables
        .par_iter()
        .map(|t| train_gbdt(&t.features, t.require_labels()?, params))
        .collect()
}

/// Trains every per-book model and the pooled calibrations.
pub fn train_models(books: &BookTables, params: &PipelineParams) -> Result<ModelSet> {
    params.validate()?;
    if books.len() < 2 {
        return Err(Error::invalid(format!(
            "leave-one-out training needs at least 2 gold books, got {}",
            books.len()
        )));
    }
    let selection = train_each(&books.candidates, &params.gbdt)?;
    let chapter = train_each(&books.chapter_pairs, &params.gbdt)?;
    let chapter_estimated = train_each(&books.chapter_pairs_estimated, &params.gbdt)?;
    let order = train_each(&books.order_pairs, &params.gbdt)?;

    let selection_scores: Vec<SelectionOutcome> = (0..books.len())
        .into_par_iter()
        .map(|i| select_loo(&books.candidates, &selection, i, params.top_fraction))
        .collect::<Result<_>>()?;
    let stage2_labels: Vec<Vec<u8>> = selection_scores
        .iter()
        .map(|s| {
            let labels = s.labels.as_ref().expect("training tables are labeled");
            s.stage2_rows.iter().map(|&r| labels[r]).collect()
        })
        .collect();
    let pooled: Vec<_> = selection_scores
        .iter()
        .zip(&stage2_labels)
        .map(|(s, l)| (&s.stage2, l.as_slice()))
        .collect();
    let selection_calibration = pooled_calibration(&pooled)?;

    let order_scores: Vec<_> = (0..books.len())
        .into_par_iter()
        .map(|i| loo_protocol(&books.order_pairs, &order, i))
        .collect::<Result<_>>()?;
    let pooled: Vec<_> = order_scores
        .iter()
        .zip(&books.order_pairs)
        .map(|(s, t)| Ok((s, t.require_labels()?)))
        .collect::<Result<_>>()?;
    let order_calibration = pooled_calibration(&pooled)?;

    Ok(ModelSet {
        format_version: MODEL_SET_VERSION,
        params: params.clone(),
        books: books.golds.iter().map(|g| g.title.clone()).collect(),
        selection,
        chapter,
        chapter_estimated,
        order,
        selection_calibration,
        order_calibration,
    })
}

/// Gold partition over `ids`, which must list exactly the book's articles.
fn gold_partition(gold: &GoldBook, ids: &[String]) -> Result<Partition> {
    let chapter_of = gold.chapter_of();
    let labels: Vec<usize> = ids
        .iter()
        .map(|id| {
            chapter_of
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::invalid(format!("article `{id}` is not in the gold book")))
        })
        .collect::<Result<_>>()?;
    Ok(Partition::from_labels(labels))
}

fn per_book_seed(seed: u64, book: usize, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((book as u64) << 8) ^ salt
}

/// Leave-one-out scores of book `i` against its gold book.
pub fn evaluate_book(books: &BookTables, models: &ModelSet, i: usize, params: &PipelineParams) -> Result<BookEvaluation> {
    let gold = &books.golds[i];

    let outcome = select_loo(&books.candidates, &models.selection, i, params.top_fraction)?;
    let labels = books.candidates[i].require_labels()?;
    let scores: Vec<f64> = outcome.stage1.avg_rank.iter().map(|r| -r).collect();
    let auc_value = auc(&scores, labels)?;
    let mut by_ranking = vec![0.0; outcome.keys.len()];
    for (p, r) in outcome.ranking().into_iter().enumerate() {
        by_ranking[r] = -(p as f64);
    }
    let n = gold.components();
    let (precision, recall) = precision_recall_at_n(&by_ranking, labels, &outcome.keys, n)?;

    let gold_k = gold.chapters.len();
    let chaptered = chapter_articles(&books.chapter_pairs, &models.chapter, i, &ChapterCount::Given(gold_k), params.chapter_method)?;
    let truth = gold_partition(gold, &chaptered.ids)?;
    let ari = adjusted_rand(&chaptered.partition, &truth)?;
    let ari_p = ari_pvalue(&chaptered.partition, &truth, params.permutations, per_book_seed(params.seed, i, 1))?;

    let estimated = chapter_articles(
        &books.chapter_pairs_estimated,
        &models.chapter_estimated,
        i,
        &ChapterCount::Estimated(params.affinity.clone()),
        params.chapter_method,
    )?;
    let truth_est = gold_partition(gold, &estimated.ids)?;
    let ari_est = adjusted_rand(&estimated.partition, &truth_est)?;
    let ari_est_p = ari_pvalue(&estimated.partition, &truth_est, params.permutations, per_book_seed(params.seed, i, 2))?;

    let order_pairs = &books.order_pairs[i];
    let classes = classify_pair_order(&books.order_pairs, &models.order, i)?;
    let order_labels = order_pairs.require_labels()?;
    let agree = classes.iter().zip(order_labels).filter(|(a, b)| a == b).count();
    let ranks = ranks_from_pair_classes(&order_pairs.keys, &classes, &gold.chapters)?;
    let draft = assemble_book(&gold.chapters, &ranks, gold.title.clone(), Provenance::default())?;
    let chapter_index: HashMap<&str, usize> = gold.chapter_of();
    let within: Vec<(Vec<String>, Vec<String>)> = draft
        .chapters
        .iter()
        .map(|c| (c.articles.clone(), gold.chapters[chapter_index[c.articles[0].as_str()]].clone()))
        .collect();
    let articles_tau = pooled_kendall_tau(&within)?;
    let predicted_chapters: Vec<String> = draft
        .chapters
        .iter()
        .map(|c| chapter_index[c.articles[0].as_str()].to_string())
        .collect();
    let gold_chapters: Vec<String> = (0..gold_k).map(|c| c.to_string()).collect();
    let chapters_tau = kendall_tau(&predicted_chapters, &gold_chapters)?;

    Ok(BookEvaluation {
        title: gold.title.clone(),
        n,
        candidates: outcome.keys.len(),
        chance_precision: n as f64 / outcome.keys.len() as f64,
        auc: auc_value,
        precision_at_n: precision,
        recall_at_n: recall,
        gold_k,
        ari,
        ari_pvalue: ari_p,
        ari_stars: stars(ari_p).to_string(),
        estimated_k: estimated.partition.k(),
        ari_estimated_k: ari_est,
        ari_estimated_k_pvalue: ari_est_p,
        ari_estimated_k_stars: stars(ari_est_p).to_string(),
        kendall_articles: articles_tau.map(|c| c.statistic),
        kendall_articles_pvalue: articles_tau.map(|c| c.pvalue),
        kendall_chapters: chapters_tau.map(|c| c.statistic),
        kendall_chapters_pvalue: chapters_tau.map(|c| c.pvalue),
        pair_order_accuracy: agree as f64 / classes.len() as f64,
    })
}

/// Leave-one-out evaluation of every book.
pub fn evaluate(books: &BookTables, models: &ModelSet, params: &PipelineParams) -> Result<EvalReport> {
    if books.len() < 2 {
        return Err(Error::invalid("evaluation needs at least 2 gold books"));
    }
    if books.len() != models.books.len() {
        return Err(Error::DimensionMismatch {
            expected: models.books.len(),
            actual: books.len(),
        });
    }
    let rows = (0..books.len())
        .into_par_iter()
        .map(|i| evaluate_book(books, models, i, params))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::new(rows)
}

/// A generated book with the selection scores behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub draft: BookDraft,
    pub selection: SelectionOutcome,
}

/// Builds a new book for `query` with every trained model: seeds and
/// chosen candidates, chaptered with an estimated chapter count and ordered
/// by precedence counts.
pub fn generate(
    corpus: &Corpus,
    profiles: &ArticleProfiles,
    query: &str,
    models: &ModelSet,
    params: &PipelineParams,
) -> Result<Generated> {
    let count = ArticleCount::Threshold { max: params.max_articles };
    let chapters = ChapterCount::Estimated(params.affinity.clone());
    generate_with(corpus, profiles, query, models, params, count, &chapters)
}

/// [`generate`] with an explicit article count and chapter count. A given
/// chapter count uses the models trained on gold-k indicators.
pub fn generate_with(
    corpus: &Corpus,
    profiles: &ArticleProfiles,
    query: &str,
    models: &ModelSet,
    params: &PipelineParams,
    count: ArticleCount,
    chapter_count: &ChapterCount,
) -> Result<Generated> {
    params.validate()?;
    let seeds = seed_concepts_from_query(corpus, query)?;
    let candidates = find_candidates(corpus, &seeds, params.max_hops)?;
    if candidates.is_empty() {
        return Err(Error::invalid(format!("query `{query}` has no candidates")));
    }
    let members = seeds.concept_ids.iter().chain(&candidates).map(String::as_str);
    let graph = build_subnetwork(corpus, members)?;
    let table = build_candidate_dataset(corpus, profiles, &seeds, None, &graph, &params.centrality)?;
    let selection = select_with_models(
        &table,
        &ModelSet::refs(&models.selection),
        params.top_fraction,
        &models.selection_calibration,
    )?;
    let chosen = choose_articles(&selection, count)?;
    let mut articles = seeds.concept_ids.clone();
    articles.extend(chosen);

    let provenance = Provenance {
        seeds: seeds.concept_ids.clone(),
        parameters: serde_json::to_value(params)?,
    };
    let book_graph = build_subnetwork(corpus, articles.iter().map(String::as_str))?;
    let (groups, chapter_models) = match chapter_count {
        ChapterCount::Given(k) => (GroupCount::Fixed((*k).min(articles.len())), &models.chapter),
        ChapterCount::Estimated(ap) => (GroupCount::Estimated(ap.clone()), &models.chapter_estimated),
    };
    let chapter_count = match chapter_count {
        ChapterCount::Given(k) => ChapterCount::Given((*k).min(articles.len())),
        estimated => estimated.clone(),
    };
    let chapter_pairs = build_pair_dataset_chapter(corpus, profiles, &articles, None, &book_graph, &groups)?;
    let chaptered = chapter_with_models(
        &chapter_pairs,
        &ModelSet::refs(chapter_models),
        &chapter_count,
        params.chapter_method,
    )?;
    let chapters = chaptered.export()?.clusters;
    let order_pairs = build_pair_dataset_order(corpus, profiles, &articles, None, &book_graph, &params.centrality)?;
    let classes = classify_with_models(&order_pairs, &ModelSet::refs(&models.order), &models.order_calibration)?;
    let ranks = ranks_from_pair_classes(&order_pairs.keys, &classes, &chapters)?;
    let draft = assemble_book(&chapters, &ranks, query, provenance)?;
    Ok(Generated { draft, selection })
}

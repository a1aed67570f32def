//! Flat TOML configuration. Every key can also be given as a flag of the
//! same name, and flags win over the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bookforge::chaptering::{ChapterCount, ClusterMethod};
use bookforge::corpus::SynthConfig;
use bookforge::pipeline::PipelineParams;
use bookforge::selection::ArticleCount;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every configuration key. Unset keys keep the library defaults, or the
/// parameters stored with a trained model set.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Corpus file (line-delimited JSON).
    #[arg(long = "corpus", global = true)]
    pub corpus: Option<PathBuf>,
    /// Gold books file (JSON array).
    #[arg(long = "gold", global = true)]
    pub gold: Option<PathBuf>,
    /// Model directory written by `train`.
    #[arg(long = "models", global = true)]
    pub models: Option<PathBuf>,
    /// Output file or directory of the subcommand.
    #[arg(long = "out", global = true)]
    pub out: Option<PathBuf>,
    /// Topic of the book to generate.
    #[arg(long = "query", global = true)]
    pub query: Option<String>,
    /// Generated book read by `metrics`.
    #[arg(long = "book", global = true)]
    pub book: Option<PathBuf>,
    /// Evaluation report read by `metrics`.
    #[arg(long = "report", global = true)]
    pub report: Option<PathBuf>,

    /// Seed of the synthetic corpus and of the permutation tests.
    #[arg(long = "seed", global = true)]
    pub seed: Option<u64>,
    #[arg(long = "max_hops", alias = "max-hops", global = true)]
    pub max_hops: Option<usize>,
    /// Share of candidates rescored in the second selection pass.
    #[arg(long = "top_fraction", alias = "top-fraction", global = true)]
    pub top_fraction: Option<f64>,
    #[arg(long = "n_trees", alias = "n-trees", global = true)]
    pub n_trees: Option<usize>,
    #[arg(long = "learning_rate", alias = "learning-rate", global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long = "max_leaves", alias = "max-leaves", global = true)]
    pub max_leaves: Option<usize>,
    #[arg(long = "min_samples_leaf", alias = "min-samples-leaf", global = true)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long = "feature_subsample", alias = "feature-subsample", global = true)]
    pub feature_subsample: Option<f64>,
    #[arg(long = "l2_regularization", alias = "l2-regularization", global = true)]
    pub l2_regularization: Option<f64>,
    #[arg(long = "positive_class_weight", alias = "positive-class-weight", global = true)]
    pub positive_class_weight: Option<f64>,
    #[arg(long = "gbdt_seed", alias = "gbdt-seed", global = true)]
    pub gbdt_seed: Option<u64>,
    /// agnes, diana or pam.
    #[arg(long = "chapter_method", alias = "chapter-method", global = true)]
    pub chapter_method: Option<String>,
    /// Chapter count when generating: `ap` estimates it, `fixed` uses `chapters`.
    #[arg(long = "k_mode", alias = "k-mode", global = true)]
    pub k_mode: Option<String>,
    #[arg(long = "chapters", global = true)]
    pub chapters: Option<usize>,
    /// `threshold` keeps articles scored at least 0.5 (at most
    /// `max_articles`); `top_n` keeps exactly `max_articles`.
    #[arg(long = "selection_mode", alias = "selection-mode", global = true)]
    pub selection_mode: Option<String>,
    #[arg(long = "max_articles", alias = "max-articles", global = true)]
    pub max_articles: Option<usize>,
    #[arg(long = "permutations", global = true)]
    pub permutations: Option<usize>,
    /// Damping of the chapter-count estimate.
    #[arg(long = "ap_damping", alias = "ap-damping", global = true)]
    pub ap_damping: Option<f64>,

    /// Synthetic corpus size.
    #[arg(long = "articles", global = true)]
    pub articles: Option<usize>,
    /// Number of planted books.
    #[arg(long = "books", global = true)]
    pub books: Option<usize>,
    /// Smallest gold book kept (`ingest`) or planted (`synth`).
    #[arg(long = "min_components", alias = "min-components", global = true)]
    pub min_components: Option<usize>,
    #[arg(long = "max_components", alias = "max-components", global = true)]
    pub max_components: Option<usize>,
    #[arg(long = "min_chapters", alias = "min-chapters", global = true)]
    pub min_chapters: Option<usize>,
    #[arg(long = "max_chapters", alias = "max-chapters", global = true)]
    pub max_chapters: Option<usize>,
    /// Least page views of a gold book kept by `ingest`.
    #[arg(long = "min_views", alias = "min-views", global = true)]
    pub min_views: Option<u64>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    /// Keys set in `flags` replace those of `self`.
    pub fn overlay(self, flags: &Settings) -> Result<Self, CliError> {
        let mut base = serde_json::to_value(self).map_err(|e| CliError::Config(e.to_string()))?;
        let top = serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))?;
        if let (Some(base), Some(top)) = (base.as_object_mut(), top.as_object()) {
            for (k, v) in top {
                if !v.is_null() {
                    base.insert(k.clone(), v.clone());
                }
            }
        }
        serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn require_path(&self, value: &Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
        value.clone().ok_or_else(|| CliError::Config(format!("`{key}` is required")))
    }

    /// Writes the set keys over `params`.
    pub fn apply(&self, params: &mut PipelineParams) -> Result<(), CliError> {
        if let Some(v) = self.seed {
            params.seed = v;
        }
        if let Some(v) = self.max_hops {
            params.max_hops = v;
        }
        if let Some(v) = self.top_fraction {
            params.top_fraction = v;
        }
        let g = &mut params.gbdt;
        if let Some(v) = self.n_trees {
            g.n_trees = v;
        }
        if let Some(v) = self.learning_rate {
            g.learning_rate = v;
        }
        if let Some(v) = self.max_leaves {
            g.max_leaves = v;
        }
        if let Some(v) = self.min_samples_leaf {
            g.min_samples_leaf = v;
        }
        if let Some(v) = self.feature_subsample {
            g.feature_subsample = v;
        }
        if let Some(v) = self.l2_regularization {
            g.l2_regularization = v;
        }
        if let Some(v) = self.positive_class_weight {
            g.positive_class_weight = Some(v);
        }
        if let Some(v) = self.gbdt_seed {
            g.rng_seed = v;
        }
        if let Some(m) = &self.chapter_method {
            params.chapter_method = ClusterMethod::from_str(m)?;
        }
        if let Some(v) = self.max_articles {
            params.max_articles = v;
        }
        if let Some(v) = self.permutations {
            params.permutations = v;
        }
        if let Some(v) = self.ap_damping {
            params.affinity.damping = v;
        }
        params.validate()?;
        Ok(())
    }

    pub fn pipeline_params(&self) -> Result<PipelineParams, CliError> {
        let mut params = PipelineParams::default();
        self.apply(&mut params)?;
        Ok(params)
    }

    pub fn synth_config(&self) -> Result<SynthConfig, CliError> {
        let mut cfg = SynthConfig::default();
        if let Some(v) = self.articles {
            cfg.articles = v;
        }
        if let Some(v) = self.books {
            cfg.books = v;
        }
        if let Some(v) = self.min_components {
            cfg.min_components = v;
        }
        if let Some(v) = self.max_components {
            cfg.max_components = v;
        }
        if let Some(v) = self.min_chapters {
            cfg.min_chapters = v;
        }
        if let Some(v) = self.max_chapters {
            cfg.max_chapters = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn article_count(&self, params: &PipelineParams) -> Result<ArticleCount, CliError> {
        match self.selection_mode.as_deref().unwrap_or("threshold") {
            "threshold" => Ok(ArticleCount::Threshold {
                max: params.max_articles,
            }),
            "top_n" => Ok(ArticleCount::TopN(params.max_articles)),
            other => Err(CliError::Config(format!("unknown selection_mode `{other}`"))),
        }
    }

    pub fn chapter_count(&self, params: &PipelineParams) -> Result<ChapterCount, CliError> {
        match self.k_mode.as_deref().unwrap_or("ap") {
            "ap" => Ok(ChapterCount::Estimated(params.affinity.clone())),
            "fixed" => match self.chapters {
                Some(k) if k >= 1 => Ok(ChapterCount::Given(k)),
                _ => Err(CliError::Config("k_mode `fixed` needs `chapters` of at least 1".into())),
            },
            other => Err(CliError::Config(format!("unknown k_mode `{other}`"))),
        }
    }
}

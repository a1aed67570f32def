//! Choosing a book's articles among its candidates. Each candidate table is
//! scored by models trained on other books, per-model probabilities become
//! ranks, ranks are averaged and the average is calibrated into a
//! probability by a one-feature logistic fit. A second pass repeats the
//! scoring on the best-ranked fraction of the rows.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::{CandidateDataset, Dataset, RowKey};
use crate::error::{Error, Result};
use crate::learners::{foreign_models, predict_each, train_logistic, GbdtModel, LogisticModel, Matrix};
use crate::stats::average_ranks;

/// Descending-probability ranks: the most probable row gets rank 1, ties
/// share the mean of their rank span.
pub fn probs_to_ranks(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::invalid("cannot rank an empty probability vector"));
    }
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("probabilities must be finite"));
    }
    let negated: Vec<f64> = probs.iter().map(|p| -p).collect();
    Ok(average_ranks(&negated))
}

/// Scores of one table's rows under a set of models.
#[derive(Clone, Debug, PartialEq)]
pub struct LooScores {
    /// One rank column per scoring model.
    pub rank_table: Vec<Vec<f64>>,
    /// Row mean of the rank table.
    pub avg_rank: Vec<f64>,
    /// Row mean of the models' probabilities.
    pub mean_prob: Vec<f64>,
    pub calibrated_prob: Vec<f64>,
    /// The fitted calibration, absent when it could not be fitted and the
    /// mean probability stands in for it.
    pub calibration: Option<LogisticModel>,
}

impl LooScores {
    pub fn len(&self) -> usize {
        self.avg_rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.avg_rank.is_empty()
    }
}

/// How average ranks become probabilities.
#[derive(Clone, Copy, Debug)]
pub enum Calibration<'a> {
    /// Fit on the scored rows' own labels. Falls back to the mean model
    /// probability when the labels hold a single class.
    OwnLabels(&'a [u8]),
    /// Apply a model fitted by [`pooled_calibration`], whose feature is the
    /// average rank divided by the row count.
    Pooled(&'a LogisticModel),
}

/// Per-model ranks, their average and its calibration.
pub fn score_rows(x: &Matrix, models: &[&GbdtModel], calibration: Calibration<'_>) -> Result<LooScores> {
    if models.is_empty() {
        return Err(Error::invalid("no models to score with"));
    }
    let probs = predict_each(models, x)?;
    let rank_table: Vec<Vec<f64>> = probs.iter().map(|p| probs_to_ranks(p)).collect::<Result<_>>()?;
    let pooled = matches!(calibration, Calibration::Pooled(_));
    let m = models.len() as f64;
    let avg_rank: Vec<f64> = (0..x.rows()).map(|r| rank_table.iter().map(|c| c[r]).sum::<f64>() / m).collect();
    let mean_prob: Vec<f64> = (0..x.rows()).map(|r| probs.iter().map(|c| c[r]).sum::<f64>() / m).collect();
    let calibration = match calibration {
        Calibration::Pooled(model) => Some(*model),
        Calibration::OwnLabels(labels) => {
            if labels.len() != x.rows() {
                return Err(Error::DimensionMismatch {
                    expected: x.rows(),
                    actual: labels.len(),
                });
            }
            let both = labels.contains(&0) && labels.contains(&1);
            let varied = avg_rank.iter().any(|&r| r != avg_rank[0]);
            if both && varied {
                Some(train_logistic(&avg_rank, labels)?)
            } else {
                None
            }
        }
    };
    let rows = x.rows() as f64;
    let calibrated_prob = match (&calibration, pooled) {
        (Some(model), false) => avg_rank.iter().map(|&r| model.predict(r)).collect(),
        (Some(model), true) => avg_rank.iter().map(|&r| model.predict(r / rows)).collect(),
        (None, _) => mean_prob.clone(),
    };
    Ok(LooScores {
        rank_table,
        avg_rank,
        mean_prob,
        calibrated_prob,
        calibration,
    })
}

/// Leave-one-out scoring of table `i` by every other table's model, with
/// the calibration fitted on table `i`'s labels.
pub fn loo_protocol<K: RowKey>(datasets: &[Dataset<K>], models: &[GbdtModel], i: usize) -> Result<LooScores> {
    if datasets.len() != models.len() {
        return Err(Error::DimensionMismatch {
            expected: datasets.len(),
            actual: models.len(),
        });
    }
    let foreign = foreign_models(models, i)?;
    let ds = &datasets[i];
    score_rows(&ds.features, &foreign, Calibration::OwnLabels(ds.require_labels()?))
}

/// Row indices sorted by ascending average rank, ties by key.
fn rank_order<K: Ord>(keys: &[K], avg_rank: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| avg_rank[a].total_cmp(&avg_rank[b]).then_with(|| keys[a].cmp(&keys[b])));
    order
}

/// The best `ceil(fraction * n)` rows by ascending average rank, ties by
/// key, in that order.
pub fn refine_top_fraction<K: Ord>(keys: &[K], scores: &LooScores, fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("top fraction {fraction} outside (0, 1]")));
    }
    if keys.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: keys.len(),
            actual: scores.len(),
        });
    }
    let keep = ((fraction * keys.len() as f64).ceil() as usize).min(keys.len());
    let mut order = rank_order(keys, &scores.avg_rank);
    order.truncate(keep);
    Ok(order)
}

/// Both scoring passes over one candidate table.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionOutcome {
    pub keys: Vec<String>,
    pub labels: Option<Vec<u8>>,
    pub stage1: LooScores,
    /// Rows kept for the second pass, best first.
    pub stage2_rows: Vec<usize>,
    /// Scores of the kept rows, aligned with `stage2_rows`.
    pub stage2: LooScores,
}

impl SelectionOutcome {
    /// Every row, best first: second-pass rows by their second-pass rank,
    /// then the rest by their first-pass rank. Ties go to the smaller key.
    pub fn ranking(&self) -> Vec<usize> {
        let stage2_keys: Vec<&String> = self.stage2_rows.iter().map(|&r| &self.keys[r]).collect();
        let mut order: Vec<usize> = rank_order(&stage2_keys, &self.stage2.avg_rank)
            .into_iter()
            .map(|p| self.stage2_rows[p])
            .collect();
        let mut in_stage2 = vec![false; self.keys.len()];
        for &r in &self.stage2_rows {
            in_stage2[r] = true;
        }
        order.extend(
            rank_order(&self.keys, &self.stage1.avg_rank)
                .into_iter()
                .filter(|&r| !in_stage2[r]),
        );
        order
    }

    /// Second-pass position of every row, if it has one.
    fn stage2_slot(&self) -> Vec<Option<usize>> {
        let mut slot = vec![None; self.keys.len()];
        for (p, &r) in self.stage2_rows.iter().enumerate() {
            slot[r] = Some(p);
        }
        slot
    }

    /// Writes `article_id,avg_rank_stage1,avg_rank_stage2,calibrated_prob`
    /// plus `label` when known. Rows outside the second pass leave the
    /// second-pass rank empty and report their first-pass probability.
    pub fn write_scores_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["article_id", "avg_rank_stage1", "avg_rank_stage2", "calibrated_prob"];
        if self.labels.is_some() {
            header.push("label");
        }
        w.write_record(&header)?;
        let slot = self.stage2_slot();
        for r in self.ranking() {
            let (stage2_rank, prob) = match slot[r] {
                Some(p) => (self.stage2.avg_rank[p].to_string(), self.stage2.calibrated_prob[p]),
                None => (String::new(), self.stage1.calibrated_prob[r]),
            };
            let mut record = vec![
                self.keys[r].clone(),
                self.stage1.avg_rank[r].to_string(),
                stage2_rank,
                prob.to_string(),
            ];
            if let Some(l) = &self.labels {
                record.push(l[r].to_string());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn save_scores_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_scores_csv(std::io::BufWriter::new(file))
    }
}

fn two_pass(
    ds: &CandidateDataset,
    models: &[&GbdtModel],
    fraction: f64,
    calibration: Option<&LogisticModel>,
) -> Result<SelectionOutcome> {
    fn cal<'a>(fixed: Option<&'a LogisticModel>, labels: &'a [u8]) -> Calibration<'a> {
        match fixed {
            Some(m) => Calibration::Pooled(m),
            None => Calibration::OwnLabels(labels),
        }
    }
    let labels = match calibration {
        Some(_) => ds.labels.clone().unwrap_or_else(|| vec![0; ds.len()]),
        None => ds.require_labels()?.to_vec(),
    };
    let stage1 = score_rows(&ds.features, models, cal(calibration, &labels))?;
    let stage2_rows = refine_top_fraction(&ds.keys, &stage1, fraction)?;
    let reduced_labels: Vec<u8> = stage2_rows.iter().map(|&r| labels[r]).collect();
    let stage2 = score_rows(&ds.features.select_rows(&stage2_rows), models, cal(calibration, &reduced_labels))?;
    Ok(SelectionOutcome {
        keys: ds.keys.clone(),
        labels: ds.labels.clone(),
        stage1,
        stage2_rows,
        stage2,
    })
}

/// Leave-one-out selection for candidate table `i`, calibrated on its own
/// labels in both passes.
pub fn select_loo(datasets: &[CandidateDataset], models: &[GbdtModel], i: usize, fraction: f64) -> Result<SelectionOutcome> {
    if datasets.len() != models.len() {
        return Err(Error::DimensionMismatch {
            expected: datasets.len(),
            actual: models.len(),
        });
    }
    two_pass(&datasets[i], &foreign_models(models, i)?, fraction, None)
}

/// Selection for a new candidate table with a calibration fitted on
/// training books.
pub fn select_with_models(
    ds: &CandidateDataset,
    models: &[&GbdtModel],
    fraction: f64,
    calibration: &LogisticModel,
) -> Result<SelectionOutcome> {
    two_pass(ds, models, fraction, Some(calibration))
}

/// How many articles to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticleCount {
    /// The best `n`, clamped to the candidate count.
    TopN(usize),
    /// Second-pass rows whose calibrated probability is at least 0.5, at
    /// most `max`. With none, the best `ceil(sqrt(candidates))`.
    Threshold { max: usize },
}

/// Chosen article ids, best first.
pub fn choose_articles(outcome: &SelectionOutcome, count: ArticleCount) -> Result<Vec<String>> {
    let ranking = outcome.ranking();
    let chosen: Vec<usize> = match count {
        ArticleCount::TopN(0) => return Err(Error::invalid("n must be at least 1")),
        ArticleCount::TopN(n) => ranking.into_iter().take(n).collect(),
        ArticleCount::Threshold { max } => {
            let slot = outcome.stage2_slot();
            let passing: Vec<usize> = ranking
                .iter()
                .copied()
                .filter(|&r| slot[r].is_some_and(|p| outcome.stage2.calibrated_prob[p] >= 0.5))
                .take(max)
                .collect();
            if passing.is_empty() {
                let fallback = (outcome.keys.len() as f64).sqrt().ceil() as usize;
                ranking.into_iter().take(fallback).collect()
            } else {
                passing
            }
        }
    };
    Ok(chosen.into_iter().map(|r| outcome.keys[r].clone()).collect())
}

/// Calibration fitted on pooled `(avg_rank / rows, label)` pairs. Dividing
/// by the table's row count puts tables of different sizes on one scale.
pub fn pooled_calibration(scores: &[(&LooScores, &[u8])]) -> Result<LogisticModel> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (s, labels) in scores {
        let rows = s.len() as f64;
        x.extend(s.avg_rank.iter().map(|r| r / rows));
        y.extend_from_slice(labels);
    }
    train_logistic(&x, &y)
}

//! Model families used by the selection, chaptering and ordering stages: a
//! gradient-boosted tree ensemble with a binary logistic objective, and a
//! one-feature logistic regression used for calibration.

mod gbdt;
mod logistic;
mod matrix;

pub use gbdt::{
    logistic_gradients, logistic_loss, predict_gbdt, train_gbdt, train_gbdt_traced, GbdtModel, GbdtParams, TreeNode,
    MODEL_FORMAT_VERSION,
};
pub use logistic::{predict_logistic, train_logistic, LogisticModel};
pub use matrix::Matrix;

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Every model except the one at `held_out`, which was trained on the data
/// being scored.
pub fn foreign_models(models: &[GbdtModel], held_out: usize) -> crate::Result<Vec<&GbdtModel>> {
    if models.len() < 2 {
        return Err(crate::Error::invalid(format!(
            "leave-one-out scoring needs at least 2 models, got {}",
            models.len()
        )));
    }
    if held_out >= models.len() {
        return Err(crate::Error::invalid(format!("model index {held_out} out of range")));
    }
    Ok(models.iter().enumerate().filter(|&(j, _)| j != held_out).map(|(_, m)| m).collect())
}

/// One probability vector per model over the rows of `x`.
pub fn predict_each(models: &[&GbdtModel], x: &Matrix) -> crate::Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    models.par_iter().map(|m| predict_gbdt(m, x)).collect()
}

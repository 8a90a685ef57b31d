use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model_space::{prune, ModelSpec, PruningVector};
use crate::search::{flops_reduction, AccuracyModel};

use super::config::AccuracyEval;

/// The reference model of the iterative loop together with how much of
/// its pruning has already been recovered by fine-tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningState {
    pub original: ModelSpec,
    pub reference: ModelSpec,
    /// FLOPs reduction (relative to `original`) whose accuracy loss has
    /// been recovered.
    pub recovered_reduction: f64,
}

impl TuningState {
    pub fn new(original: ModelSpec) -> Self {
        TuningState {
            reference: original.clone(),
            original,
            recovered_reduction: 0.0,
        }
    }

    /// Share of the candidate's reduction that is already recovered.
    pub fn recovery_level(&self, candidate: &ModelSpec) -> f64 {
        let rho = flops_reduction(&self.original, candidate);
        if rho <= 0.0 {
            1.0
        } else {
            (self.recovered_reduction / rho).min(1.0)
        }
    }

    pub fn candidate_accuracy(
        &self,
        candidate: &ModelSpec,
        params: &AccuracyModel,
        eval: AccuracyEval,
    ) -> f64 {
        let level = match eval {
            AccuracyEval::PreFineTune => self.recovery_level(candidate),
            AccuracyEval::PostFineTune => 1.0,
        };
        params.of_model(&self.original, candidate, level)
    }

    /// Accuracy of the current reference model.
    pub fn accuracy(&self, params: &AccuracyModel) -> f64 {
        self.candidate_accuracy(&self.reference, params, AccuracyEval::PreFineTune)
    }
}

/// Prunes the reference with `x` and fine-tunes: the whole accumulated
/// reduction is marked as recovered and the result becomes the reference.
pub fn fine_tune_sim(state: &TuningState, x: &PruningVector) -> Result<TuningState> {
    let reference = prune(&state.reference, x)?;
    let rho = flops_reduction(&state.original, &reference);
    Ok(TuningState {
        original: state.original.clone(),
        reference,
        recovered_reduction: rho.max(state.recovered_reduction),
    })
}

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model_space::{flops, prune, ModelSpec, PruningVector};

/// Accuracy stand-in driven by the fraction of FLOPs removed.
///
/// `acc = base * (1 - drop * (1 - recovery * recovery_coeff) * rho^power)`,
/// clamped to `[0, 1]`, where `rho = 1 - flops(pruned) / flops(original)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AccuracyModel {
    pub base_accuracy: f64,
    pub drop_coeff: f64,
    pub drop_power: f64,
    pub recovery_coeff: f64,
}

impl Default for AccuracyModel {
    fn default() -> Self {
        AccuracyModel {
            base_accuracy: 0.9,
            drop_coeff: 0.6,
            drop_power: 2.0,
            recovery_coeff: 0.7,
        }
    }
}

/// Fraction of FLOPs removed from `original`.
pub fn flops_reduction(original: &ModelSpec, pruned: &ModelSpec) -> f64 {
    let base = flops(original);
    if base == 0 {
        return 0.0;
    }
    (1.0 - flops(pruned) as f64 / base as f64).clamp(0.0, 1.0)
}

impl AccuracyModel {
    pub fn at_reduction(&self, rho: f64, recovery_level: f64) -> f64 {
        let recovery = recovery_level.clamp(0.0, 1.0);
        let drop = self.drop_coeff * (1.0 - recovery * self.recovery_coeff) * rho.powf(self.drop_power);
        (self.base_accuracy * (1.0 - drop)).clamp(0.0, 1.0)
    }

    pub fn of_model(&self, original: &ModelSpec, pruned: &ModelSpec, recovery_level: f64) -> f64 {
        self.at_reduction(flops_reduction(original, pruned), recovery_level)
    }
}

/// Simulated accuracy of `prune(model, x)` under the default coefficients.
pub fn simulated_accuracy(model: &ModelSpec, x: &PruningVector, recovery_level: f64) -> Result<f64> {
    simulated_accuracy_with(&AccuracyModel::default(), model, x, recovery_level)
}

pub fn simulated_accuracy_with(
    params: &AccuracyModel,
    model: &ModelSpec,
    x: &PruningVector,
    recovery_level: f64,
) -> Result<f64> {
    let pruned = prune(model, x)?;
    Ok(params.of_model(model, &pruned, recovery_level))
}

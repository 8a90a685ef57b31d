use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::{encode_features, PruningVector};
use crate::scalar::Scalar;
use crate::surrogate::SurrogateSuite;

/// Latency plus an accuracy penalty when the constraint
/// `accuracy >= alpha * base_accuracy` is violated. Lower is better.
#[inline]
pub fn penalized_fitness<T: Scalar>(latency: T, accuracy: T, base_accuracy: T, alpha: T) -> T {
    if accuracy >= alpha * base_accuracy {
        latency
    } else {
        latency + (T::one() - accuracy) / (T::one() - alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    pub fitness: f64,
    pub accuracy: f64,
    /// Surrogate fleet-average estimate in milliseconds.
    pub latency_estimate: f64,
    /// Estimate divided by the estimate of the unpruned reference.
    pub relative_latency: f64,
    pub feasible: bool,
}

type AccuracyOracle<'a> = Box<dyn Fn(&PruningVector) -> f64 + Send + Sync + 'a>;

/// Everything needed to score a pruning vector.
pub struct FitnessContext<'a> {
    suite: &'a SurrogateSuite<f64>,
    accuracy_oracle: AccuracyOracle<'a>,
    base_accuracy: f64,
    alpha: f64,
    reference_latency: f64,
}

impl<'a> FitnessContext<'a> {
    /// The latency reference is the suite estimate at the all-zero vector.
    pub fn new(
        suite: &'a SurrogateSuite<f64>,
        accuracy_oracle: impl Fn(&PruningVector) -> f64 + Send + Sync + 'a,
        base_accuracy: f64,
        alpha: f64,
    ) -> Result<Self> {
        let zeros = vec![0.0; suite.n_features()];
        Self::with_reference(suite, accuracy_oracle, base_accuracy, alpha, &zeros)
    }

    /// Like [`FitnessContext::new`] with an explicit reference feature vector.
    pub fn with_reference(
        suite: &'a SurrogateSuite<f64>,
        accuracy_oracle: impl Fn(&PruningVector) -> f64 + Send + Sync + 'a,
        base_accuracy: f64,
        alpha: f64,
        reference_features: &[f64],
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1], got {alpha}")));
        }
        if alpha == 1.0 {
            return Err(Error::Config(
                "alpha = 1 leaves the accuracy penalty (1 - a) / (1 - alpha) undefined".into(),
            ));
        }
        if !(0.0..=1.0).contains(&base_accuracy) {
            return Err(Error::Config(format!(
                "base accuracy must be in [0, 1], got {base_accuracy}"
            )));
        }
        let reference_latency = suite.estimate_average_latency(reference_features)?;
        Ok(FitnessContext {
            suite,
            accuracy_oracle: Box::new(accuracy_oracle),
            base_accuracy,
            alpha,
            reference_latency,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn base_accuracy(&self) -> f64 {
        self.base_accuracy
    }

    pub fn reference_latency(&self) -> f64 {
        self.reference_latency
    }

    /// Scores precomputed surrogate features and accuracy.
    pub fn score(&self, features: &[f64], accuracy: f64) -> Result<FitnessBreakdown> {
        let latency_estimate = self.suite.estimate_average_latency(features)?;
        let relative_latency = latency_estimate / self.reference_latency;
        Ok(FitnessBreakdown {
            fitness: penalized_fitness(relative_latency, accuracy, self.base_accuracy, self.alpha),
            accuracy,
            latency_estimate,
            relative_latency,
            feasible: accuracy >= self.alpha * self.base_accuracy,
        })
    }

    pub fn breakdown(&self, x: &PruningVector) -> Result<FitnessBreakdown> {
        let accuracy = (self.accuracy_oracle)(x);
        self.score(&encode_features(x), accuracy)
    }

    pub fn fitness(&self, x: &PruningVector) -> Result<f64> {
        self.breakdown(x).map(|b| b.fitness)
    }
}

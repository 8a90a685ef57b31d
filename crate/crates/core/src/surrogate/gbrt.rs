//! Gradient boosting with squared loss over [`RegressionTree`]s.

use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, Presorted, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower clamp on any latency prediction, in milliseconds.
pub const PREDICTION_FLOOR_MS: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbrtParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbrtParams {
    fn default() -> Self {
        GbrtParams {
            n_rounds: 200,
            max_depth: 3,
            learning_rate: 0.05,
            min_leaf: 2,
        }
    }
}

impl GbrtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// Regression rows: feature vectors and positive latency targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet<T> {
    pub features: Vec<Vec<T>>,
    pub targets: Vec<T>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn new(features: Vec<Vec<T>>, targets: Vec<T>) -> Result<Self> {
        let set = TrainingSet { features, targets };
        set.validate()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.targets.len() {
            return Err(Error::Dimension {
                expected: self.features.len(),
                actual: self.targets.len(),
            });
        }
        let dim = self.dim();
        if let Some(bad) = self.features.iter().find(|f| f.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: bad.len(),
            });
        }
        if let Some(t) = self.targets.iter().find(|t| !(**t > T::zero())) {
            return Err(Error::Input(format!("training target {t} is not positive")));
        }
        Ok(())
    }
}

/// `prediction = base + learning_rate * sum(tree(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbrtEnsemble<T> {
    pub base_prediction: T,
    pub learning_rate: T,
    pub n_features: usize,
    pub params: GbrtParams,
    pub trees: Vec<RegressionTree<T>>,
}

impl<T: Scalar> GbrtEnsemble<T> {
    /// Unclamped model output.
    #[inline]
    pub fn predict_raw(&self, x: &[T]) -> T {
        let sum = self
            .trees
            .iter()
            .fold(T::zero(), |acc, t| acc + t.evaluate(x));
        self.base_prediction + self.learning_rate * sum
    }

    /// Latency prediction, clamped below at [`PREDICTION_FLOOR_MS`].
    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features {
            return Err(Error::Dimension {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(self.predict_raw(x).max(T::lit(PREDICTION_FLOOR_MS)))
    }
}

/// Boosted least-squares trees; see [`fit_gbrt_traced`].
pub fn fit_gbrt<T: Scalar>(data: &TrainingSet<T>, params: &GbrtParams) -> Result<GbrtEnsemble<T>> {
    fit_gbrt_traced(data, params).map(|(e, _)| e)
}

/// Fits the ensemble and returns the training MSE before the first tree and
/// after every kept round.
///
/// Boosting stops early once a round no longer lowers the training error,
/// so the returned trace is strictly decreasing after its first entry.
pub fn fit_gbrt_traced<T: Scalar>(
    data: &TrainingSet<T>,
    params: &GbrtParams,
) -> Result<(GbrtEnsemble<T>, Vec<T>)> {
    data.validate()?;
    params.validate()?;
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    let n_features = data.dim();
    let n = T::count(data.len());
    let base = data.targets.iter().fold(T::zero(), |a, &t| a + t) / n;
    let lr = T::lit(params.learning_rate);
    let presorted = Presorted::new(&data.features, n_features);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
    };

    let mut residuals: Vec<T> = data.targets.iter().map(|&t| t - base).collect();
    let sse = |r: &[T]| r.iter().fold(T::zero(), |a, &v| a + v * v);
    let mut current = sse(&residuals);
    let mut trace = vec![current / n];
    let mut trees = Vec::with_capacity(params.n_rounds);

    for _ in 0..params.n_rounds {
        if current == T::zero() {
            break;
        }
        let tree = fit_tree(&presorted, &residuals, tree_params);
        let updated: Vec<T> = residuals
            .iter()
            .zip(&data.features)
            .map(|(&r, x)| r - lr * tree.evaluate(x))
            .collect();
        let next = sse(&updated);
        if !(next < current) {
            break;
        }
        residuals = updated;
        current = next;
        trace.push(current / n);
        trees.push(tree);
    }

    Ok((
        GbrtEnsemble {
            base_prediction: base,
            learning_rate: lr,
            n_features,
            params: *params,
            trees,
        },
        trace,
    ))
}

//! Chain-structured network description, the structured pruning operator
//! and FLOPs accounting.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Upper bound on any per-layer pruning ratio.
pub const X_MAX: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Conv,
    FullyConnected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub layer_id: usize,
    pub kind: LayerKind,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub prunable: bool,
    /// One non-negative score per output filter; larger means more important.
    pub importance: Vec<f64>,
}

impl LayerSpec {
    /// Multiply-add cost of the layer counted as two FLOPs per MAC.
    pub fn flops(&self) -> u64 {
        2 * (self.kernel_h * self.kernel_w) as u64
            * self.in_channels as u64
            * self.out_channels as u64
            * (self.out_h * self.out_w) as u64
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field_err = |field: &str, msg: String| {
            Err(Error::Input(format!("layers[{index}].{field}: {msg}")))
        };
        for (field, value) in [
            ("in_channels", self.in_channels),
            ("out_channels", self.out_channels),
            ("kernel_h", self.kernel_h),
            ("kernel_w", self.kernel_w),
            ("out_h", self.out_h),
            ("out_w", self.out_w),
        ] {
            if value == 0 {
                return field_err(field, "must be positive".into());
            }
        }
        if self.importance.len() != self.out_channels {
            return field_err(
                "importance",
                format!(
                    "length {} does not match out_channels {}",
                    self.importance.len(),
                    self.out_channels
                ),
            );
        }
        if let Some(pos) = self
            .importance
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0)
        {
            return field_err(
                "importance",
                format!("entry {pos} is negative or not finite"),
            );
        }
        Ok(())
    }
}

/// Sequential network: layer `l` feeds layer `l + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    /// Builds a model and checks every invariant.
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>) -> Result<Self> {
        let model = ModelSpec {
            name: name.into(),
            layers,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate(i)?;
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_channels != pair[1].in_channels {
                return Err(Error::Input(format!(
                    "layers[{}].in_channels: {} does not match layers[{i}].out_channels {}",
                    i + 1,
                    pair[1].in_channels,
                    pair[0].out_channels
                )));
            }
        }
        Ok(())
    }

    /// Number of prunable layers (the length of a pruning vector).
    pub fn prunable_count(&self) -> usize {
        self.layers.iter().filter(|l| l.prunable).count()
    }

    pub fn prunable_layers(&self) -> impl Iterator<Item = &LayerSpec> {
        self.layers.iter().filter(|l| l.prunable)
    }

    pub fn flops(&self) -> u64 {
        flops(self)
    }

    /// Stable digest of the layer geometry (importance scores excluded).
    pub fn structure_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.layers.len() * 8 * 8);
        for l in &self.layers {
            for v in [
                l.in_channels,
                l.out_channels,
                l.kernel_h,
                l.kernel_w,
                l.out_h,
                l.out_w,
                l.prunable as usize,
                matches!(l.kind, LayerKind::Conv) as usize,
            ] {
                bytes.extend_from_slice(&(v as u64).to_le_bytes());
            }
        }
        rng::fnv1a(&bytes)
    }

    /// Fraction of filters removed per prunable layer, relative to `original`.
    ///
    /// `self` must have been derived from `original` by [`prune`].
    pub fn cumulative_ratios(&self, original: &ModelSpec) -> Result<Vec<f64>> {
        if self.layers.len() != original.layers.len() {
            return Err(Error::Dimension {
                expected: original.layers.len(),
                actual: self.layers.len(),
            });
        }
        Ok(self
            .layers
            .iter()
            .zip(&original.layers)
            .filter(|(_, o)| o.prunable)
            .map(|(p, o)| 1.0 - p.out_channels as f64 / o.out_channels as f64)
            .collect())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let model: ModelSpec =
            serde_json::from_str(text).map_err(|e| Error::json("model description", e))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: ModelSpec = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        model
            .validate()
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Ok(model)
    }

    /// Builds a plain convolutional chain followed by a classifier.
    ///
    /// Each stage is `(out_channels, spatial_size)` with 3x3 kernels; the
    /// classifier is a non-prunable fully connected layer after global
    /// pooling. Importance scores are drawn deterministically from `seed`.
    pub fn synthetic_chain(
        name: impl Into<String>,
        input_channels: usize,
        stages: &[(usize, usize)],
        classes: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng::stream(&[rng::domain::MODEL, seed]);
        let mut layers = Vec::with_capacity(stages.len() + 1);
        let mut in_ch = input_channels;
        for (i, &(out_ch, spatial)) in stages.iter().enumerate() {
            let importance = (0..out_ch).map(|_| rng.random_range(0.05..1.0)).collect();
            layers.push(LayerSpec {
                layer_id: i,
                kind: LayerKind::Conv,
                in_channels: in_ch,
                out_channels: out_ch,
                kernel_h: 3,
                kernel_w: 3,
                out_h: spatial,
                out_w: spatial,
                prunable: true,
                importance,
            });
            in_ch = out_ch;
        }
        layers.push(LayerSpec {
            layer_id: stages.len(),
            kind: LayerKind::FullyConnected,
            in_channels: in_ch,
            out_channels: classes,
            kernel_h: 1,
            kernel_w: 1,
            out_h: 1,
            out_w: 1,
            prunable: false,
            importance: vec![1.0; classes],
        });
        ModelSpec::new(name, layers)
    }

    /// Eight-conv CIFAR-scale network used as the default workload.
    pub fn vgg_small() -> Self {
        Self::synthetic_chain(
            "vgg-small",
            3,
            &[
                (32, 32),
                (32, 32),
                (64, 16),
                (64, 16),
                (128, 8),
                (128, 8),
                (256, 4),
                (256, 4),
            ],
            10,
            0,
        )
        .expect("built-in model is valid")
    }
}

/// Per-layer pruning ratios, one per prunable layer, each in `[0, X_MAX]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PruningVector {
    values: Vec<f64>,
}

impl PruningVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_bound(values, X_MAX)
    }

    /// Like [`PruningVector::new`] with a tighter upper bound (`<= X_MAX`).
    pub fn with_bound(values: Vec<f64>, upper: f64) -> Result<Self> {
        let upper = upper.min(X_MAX);
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && **v <= upper))
        {
            return Err(Error::Domain(format!(
                "pruning ratio x[{i}] = {v} outside [0, {upper}]"
            )));
        }
        Ok(PruningVector { values })
    }

    pub fn zeros(len: usize) -> Self {
        PruningVector {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Surrogate input encoding: the ratios themselves, in layer order.
pub fn encode_features(x: &PruningVector) -> Vec<f64> {
    x.values.clone()
}

pub fn decode_features(features: &[f64]) -> Result<PruningVector> {
    PruningVector::new(features.to_vec())
}

/// Total FLOPs over all layers.
pub fn flops(model: &ModelSpec) -> u64 {
    model.layers.iter().map(LayerSpec::flops).sum()
}

/// Indices of the filters that survive removing `remove` lowest-importance
/// filters, in ascending index order.
fn surviving_filters(importance: &[f64], remove: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..importance.len()).collect();
    // Stable sort keeps lower indices first among equal scores, so they go first.
    order.sort_by(|&a, &b| importance[a].total_cmp(&importance[b]));
    let mut kept: Vec<usize> = order[remove..].to_vec();
    kept.sort_unstable();
    kept
}

/// Structured pruning: removes `floor(x_l * n_l)` least important filters of
/// every prunable layer and narrows the successor's input accordingly.
pub fn prune(model: &ModelSpec, x: &PruningVector) -> Result<ModelSpec> {
    let expected = model.prunable_count();
    if x.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: x.len(),
        });
    }
    if let Some((i, v)) = x
        .values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && **v <= X_MAX))
    {
        return Err(Error::Domain(format!(
            "pruning ratio x[{i}] = {v} outside [0, {X_MAX}]"
        )));
    }

    let mut layers = model.layers.clone();
    let mut ratios = x.values.iter();
    for idx in 0..layers.len() {
        if !layers[idx].prunable {
            continue;
        }
        let ratio = *ratios.next().expect("length checked above");
        let n = layers[idx].out_channels;
        let remove = ((ratio * n as f64).floor() as usize).min(n.saturating_sub(1));
        if remove == 0 {
            continue;
        }
        let kept = surviving_filters(&layers[idx].importance, remove);
        let layer = &mut layers[idx];
        layer.importance = kept.iter().map(|&k| layer.importance[k]).collect();
        layer.out_channels = kept.len();
        if let Some(next) = layers.get_mut(idx + 1) {
            next.in_channels = kept.len();
        }
    }
    Ok(ModelSpec {
        name: model.name.clone(),
        layers,
    })
}

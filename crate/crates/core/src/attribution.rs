//! Additive per-input-feature attributions for individual models, and their
//! max-abs normalization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaler::Dataset;
use crate::system::{Backend, Instance, Model};

/// Largest model arity [`ExactShapley`] will enumerate by default.
pub const DEFAULT_MAX_FEATURES: usize = 15;

/// Raw attribution of one model's output at an instance, in the units of
/// that output. Entries for inputs the model does not read are `0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelAttribution {
    pub model: String,
    pub phi: Vec<f64>,
    pub base_value: f64,
}

/// Dimensionless attribution, each entry in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAttribution {
    pub model: String,
    pub phi_hat: Vec<f64>,
}

/// Source of signed per-feature attributions for a model.
pub trait AttributionEngine: Sync {
    fn name(&self) -> &'static str;

    fn attribute(&self, model: &Model, instance: &Instance, background: &Dataset) -> Result<ModelAttribution>;
}

/// Interventional Shapley values by full subset enumeration.
#[derive(Clone, Copy, Debug)]
pub struct ExactShapley {
    pub max_features: usize,
}

impl Default for ExactShapley {
    fn default() -> Self {
        Self {
            max_features: DEFAULT_MAX_FEATURES,
        }
    }
}

impl AttributionEngine for ExactShapley {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn attribute(&self, model: &Model, instance: &Instance, background: &Dataset) -> Result<ModelAttribution> {
        let n = model.input_features.len();
        if n > self.max_features {
            return Err(Error::TooManyFeatures {
                model: model.name.clone(),
                count: n,
                limit: self.max_features,
            });
        }
        check_shapes(instance, background)?;
        let (values, base_value) =
            interventional_shapley(&model.input_features, instance.values(), background.rows(), |rows| {
                model.predict_batch(rows)
            })?;
        let mut phi = vec![0.0; instance.len()];
        for (&j, v) in model.input_features.iter().zip(values) {
            phi[j] = v;
        }
        Ok(ModelAttribution {
            model: model.name.clone(),
            phi,
            base_value,
        })
    }
}

/// Closed-form Shapley values of a linear model: `w_j (x_j - mean_j)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearShapley;

impl AttributionEngine for LinearShapley {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn attribute(&self, model: &Model, instance: &Instance, background: &Dataset) -> Result<ModelAttribution> {
        let Backend::Linear(lin) = &model.backend else {
            return Err(Error::BackendMismatch(format!(
                "model `{}` has a {} backend; linear attribution needs a linear one",
                model.name,
                model.backend.kind()
            )));
        };
        check_shapes(instance, background)?;
        let means = background.means();
        let mut phi = vec![0.0; instance.len()];
        let mut base_value = lin.intercept;
        for (w, &j) in lin.coefficients.iter().zip(&model.input_features) {
            phi[j] = w * (instance.values()[j] - means[j]);
            base_value += w * means[j];
        }
        Ok(ModelAttribution {
            model: model.name.clone(),
            phi,
            base_value,
        })
    }
}

pub fn shapley_exact(model: &Model, instance: &Instance, background: &Dataset) -> Result<ModelAttribution> {
    ExactShapley::default().attribute(model, instance, background)
}

pub fn linear_attribution(model: &Model, instance: &Instance, background: &Dataset) -> Result<ModelAttribution> {
    LinearShapley.attribute(model, instance, background)
}

fn check_shapes(instance: &Instance, background: &Dataset) -> Result<()> {
    if background.width() != instance.len() {
        return Err(Error::Dimension {
            expected: instance.len(),
            actual: background.width(),
        });
    }
    if background.is_empty() {
        return Err(Error::Dataset("background is empty".into()));
    }
    Ok(())
}

/// Shapley weights `s! (n-s-1)! / n!` for `s = 0..n`.
pub(crate) fn shapley_weights(n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    if n == 0 {
        return w;
    }
    w.push(1.0 / n as f64);
    for s in 0..n - 1 {
        let next = w[s] * (s + 1) as f64 / (n - s - 1) as f64;
        w.push(next);
    }
    w
}

/// Interventional Shapley values of `eval` for the given `players` (indices
/// into `instance`). The coalition value is the mean of `eval` over the
/// background rows with coalition members replaced by the instance values.
///
/// Returns the values in `players` order and the empty-coalition value. All
/// reductions run in a fixed order, so results do not depend on the thread
/// pool.
pub fn interventional_shapley<F>(
    players: &[usize],
    instance: &[f64],
    background: &[Vec<f64>],
    eval: F,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[Vec<f64>]) -> Result<Vec<f64>> + Sync,
{
    let n = players.len();
    let q = background.len() as f64;
    let coalitions: Vec<f64> = (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let rows: Vec<Vec<f64>> = background
                .iter()
                .map(|b| {
                    let mut z = b.clone();
                    for (bit, &j) in players.iter().enumerate() {
                        if mask & (1 << bit) != 0 {
                            z[j] = instance[j];
                        }
                    }
                    z
                })
                .collect();
            Ok(eval(&rows)?.iter().sum::<f64>() / q)
        })
        .collect::<Result<_>>()?;

    let weights = shapley_weights(n);
    let phi = (0..n)
        .map(|i| {
            let bit = 1usize << i;
            (0..1usize << n)
                .filter(|mask| mask & bit == 0)
                .map(|mask| weights[mask.count_ones() as usize] * (coalitions[mask | bit] - coalitions[mask]))
                .sum()
        })
        .collect();
    Ok((phi, coalitions[0]))
}

/// Divides by the largest absolute entry; all zeros stay all zeros.
pub fn normalize_attribution(attr: &ModelAttribution) -> NormalizedAttribution {
    let max_abs = attr.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let phi_hat = if max_abs == 0.0 {
        vec![0.0; attr.phi.len()]
    } else {
        attr.phi
            .iter()
            .map(|v| {
                let h = v / max_abs;
                if h == 0.0 {
                    0.0
                } else {
                    h
                }
            })
            .collect()
    };
    NormalizedAttribution {
        model: attr.model.clone(),
        phi_hat,
    }
}

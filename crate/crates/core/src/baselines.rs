//! Model-agnostic explainers applied to the whole decision system, treating
//! it as a black box from input features to a numeric outcome.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::attribution::{interventional_shapley, DEFAULT_MAX_FEATURES};
use crate::error::{Error, Result};
use crate::scaler::{Dataset, Scaler};
use crate::system::{DecisionPolicy, DecisionSystem, Instance, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    SystemShapley,
    SystemLime,
}

impl BaselineMethod {
    pub fn label(self) -> &'static str {
        match self {
            Self::SystemShapley => "shap",
            Self::SystemLime => "lime",
        }
    }
}

/// How LIME draws its neighbourhood.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimeSampling {
    /// Each feature is drawn from the reference marginal and encoded as
    /// "falls in the same quartile as the instance".
    #[default]
    Quartile,
    /// Gaussian noise around the scaled instance; regression on the scaled
    /// continuous values.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub num_samples: usize,
    /// Defaults to `0.75 * sqrt(D)`.
    pub kernel_width: Option<f64>,
    /// Only used by [`LimeSampling::Gaussian`], in scaled units.
    pub perturbation_stddev: f64,
    pub sampling: LimeSampling,
    pub ridge_alpha: f64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            num_samples: 5000,
            kernel_width: None,
            perturbation_stddev: 0.25,
            sampling: LimeSampling::Quartile,
            ridge_alpha: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub seed: u64,
    pub background_size: usize,
    pub lime: LimeConfig,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, seed: u64) -> Self {
        Self {
            method,
            seed,
            background_size: 100,
            lime: LimeConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lime.num_samples < 100 {
            return Err(Error::Config(format!(
                "lime.num_samples must be at least 100, got {}",
                self.lime.num_samples
            )));
        }
        if self.background_size < 1 {
            return Err(Error::Config("background_size must be at least 1".into()));
        }
        if let Some(w) = self.lime.kernel_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!("kernel_width must be positive, got {w}")));
            }
        }
        if !(self.lime.perturbation_stddev.is_finite() && self.lime.perturbation_stddev > 0.0) {
            return Err(Error::Config("perturbation_stddev must be positive".into()));
        }
        if !(self.lime.ridge_alpha.is_finite() && self.lime.ridge_alpha >= 0.0) {
            return Err(Error::Config("ridge_alpha must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineAttribution {
    pub method: BaselineMethod,
    /// One value per input feature.
    pub values: Vec<f64>,
    /// Expected outcome over the background for Shapley, the surrogate
    /// intercept for LIME.
    pub base_value: f64,
    /// Set when every LIME label was identical and the values are zeros.
    pub degenerate: bool,
}

/// Numbers standing for each policy outcome. Numeric outcomes map to
/// themselves when all outcomes are numeric; otherwise outcomes are indexed
/// in [`DecisionPolicy::outcomes`] order.
pub fn outcome_values(policy: &DecisionPolicy) -> Vec<(Outcome, f64)> {
    let outcomes = policy.outcomes();
    let all_numeric = outcomes.iter().all(|o| o.as_number().is_some());
    outcomes
        .into_iter()
        .enumerate()
        .map(|(i, o)| {
            let v = if all_numeric { o.as_number().unwrap() } else { i as f64 };
            (o.clone(), v)
        })
        .collect()
}

/// Numeric outcome of the system for each row of input values.
pub fn system_output(system: &DecisionSystem, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let values = outcome_values(system.policy());
    let lookup = |o: &Outcome| values.iter().find(|(k, _)| k == o).map(|(_, v)| *v).unwrap();
    let default = lookup(system.policy().default_outcome());
    let rules: Vec<f64> = system.policy().rules().iter().map(|r| lookup(&r.consequence)).collect();
    Ok(system
        .complete_batch(rows)?
        .iter()
        .map(|c| match system.policy().triggered_index(c) {
            Some(i) => rules[i],
            None => default,
        })
        .collect())
}

pub fn run_baseline(
    system: &DecisionSystem,
    instance: &Instance,
    scaler: &Scaler,
    reference: &Dataset,
    config: &BaselineConfig,
) -> Result<BaselineAttribution> {
    match config.method {
        BaselineMethod::SystemShapley => system_shapley(system, instance, reference, config),
        BaselineMethod::SystemLime => system_lime(system, instance, scaler, reference, config),
    }
}

/// Exact interventional Shapley values of the whole system over its input
/// features, using at most `background_size` reference rows.
pub fn system_shapley(
    system: &DecisionSystem,
    instance: &Instance,
    reference: &Dataset,
    config: &BaselineConfig,
) -> Result<BaselineAttribution> {
    config.validate()?;
    check_instance(system, instance, reference)?;
    let d = system.input_count();
    if d > DEFAULT_MAX_FEATURES {
        return Err(Error::TooManyFeatures {
            model: "system".into(),
            count: d,
            limit: DEFAULT_MAX_FEATURES,
        });
    }
    let background = reference.subsample(config.background_size, config.seed);
    let players: Vec<usize> = (0..d).collect();
    let (values, base_value) = interventional_shapley(&players, instance.values(), background.rows(), |rows| {
        system_output(system, rows)
    })?;
    Ok(BaselineAttribution {
        method: BaselineMethod::SystemShapley,
        values,
        base_value,
        degenerate: false,
    })
}

/// Weighted ridge surrogate fitted on a seeded neighbourhood of the
/// instance. Row 0 of the neighbourhood is the instance itself.
pub fn system_lime(
    system: &DecisionSystem,
    instance: &Instance,
    scaler: &Scaler,
    reference: &Dataset,
    config: &BaselineConfig,
) -> Result<BaselineAttribution> {
    config.validate()?;
    check_instance(system, instance, reference)?;
    let d = system.input_count();
    let lime = &config.lime;
    let width = lime.kernel_width.unwrap_or(0.75 * (d as f64).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let xi = instance.values();

    let (rows, design, distances) = match lime.sampling {
        LimeSampling::Quartile => {
            let quartiles: Vec<[f64; 3]> = (0..d)
                .map(|j| {
                    let mut col: Vec<f64> = reference.rows().iter().map(|r| r[j]).collect();
                    col.sort_by(f64::total_cmp);
                    [percentile(&col, 25.0), percentile(&col, 50.0), percentile(&col, 75.0)]
                })
                .collect();
            let bin = |j: usize, v: f64| quartiles[j].iter().filter(|&&q| q < v).count();
            let home: Vec<usize> = (0..d).map(|j| bin(j, xi[j])).collect();
            let mut rows = vec![xi.to_vec()];
            let mut design = vec![vec![1.0; d]];
            for _ in 1..lime.num_samples {
                let row: Vec<f64> = (0..d)
                    .map(|j| reference.rows()[rng.random_range(0..reference.len())][j])
                    .collect();
                design.push(
                    (0..d)
                        .map(|j| if bin(j, row[j]) == home[j] { 1.0 } else { 0.0 })
                        .collect(),
                );
                rows.push(row);
            }
            let distances: Vec<f64> = design
                .iter()
                .map(|z| z.iter().map(|v| (1.0 - v) * (1.0 - v)).sum::<f64>().sqrt())
                .collect();
            (rows, design, distances)
        }
        LimeSampling::Gaussian => {
            let centre: Vec<f64> = (0..d).map(|j| scaler.scale(j, xi[j])).collect::<Result<_>>()?;
            let mut design = vec![centre.clone()];
            let mut rows = vec![xi.to_vec()];
            for _ in 1..lime.num_samples {
                let z: Vec<f64> = centre
                    .iter()
                    .map(|c| c + lime.perturbation_stddev * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                rows.push((0..d).map(|j| scaler.unscale(j, z[j])).collect::<Result<_>>()?);
                design.push(z);
            }
            let distances: Vec<f64> = design
                .iter()
                .map(|z| {
                    z.iter()
                        .zip(&centre)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            (rows, design, distances)
        }
    };

    let labels = system_output(system, &rows)?;
    if labels.iter().all(|&y| y == labels[0]) {
        return Ok(BaselineAttribution {
            method: BaselineMethod::SystemLime,
            values: vec![0.0; d],
            base_value: labels[0],
            degenerate: true,
        });
    }
    let weights: Vec<f64> = distances
        .iter()
        .map(|dist: &f64| (-(dist * dist) / (width * width)).exp().sqrt())
        .collect();
    let (values, base_value) = weighted_ridge(&design, &labels, &weights, lime.ridge_alpha)?;
    Ok(BaselineAttribution {
        method: BaselineMethod::SystemLime,
        values,
        base_value,
        degenerate: false,
    })
}

fn check_instance(system: &DecisionSystem, instance: &Instance, reference: &Dataset) -> Result<()> {
    let d = system.input_count();
    if instance.len() != d {
        return Err(Error::Dimension {
            expected: d,
            actual: instance.len(),
        });
    }
    if reference.width() != d {
        return Err(Error::Dimension {
            expected: d,
            actual: reference.width(),
        });
    }
    Ok(())
}

/// Linear interpolation between closest ranks on sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Ridge regression with an unpenalized intercept. Returns the slopes and
/// the intercept.
pub fn weighted_ridge(x: &[Vec<f64>], y: &[f64], w: &[f64], alpha: f64) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let total: f64 = w.iter().sum();
    if n == 0 || total <= 0.0 {
        return Err(Error::Config("regression needs positive total weight".into()));
    }
    let x_mean: Vec<f64> = (0..d)
        .map(|j| x.iter().zip(w).map(|(r, wi)| wi * r[j]).sum::<f64>() / total)
        .collect();
    let y_mean = y.iter().zip(w).map(|(yi, wi)| wi * yi).sum::<f64>() / total;
    let xc = DMatrix::from_fn(n, d, |i, j| w[i].sqrt() * (x[i][j] - x_mean[j]));
    let yc = DVector::from_fn(n, |i, _| w[i].sqrt() * (y[i] - y_mean));
    let lhs = xc.transpose() * &xc + DMatrix::identity(d, d) * alpha;
    let rhs = xc.transpose() * yc;
    let beta = match lhs.clone().cholesky() {
        Some(c) => c.solve(&rhs),
        None => lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Config("singular regression system".into()))?,
    };
    let intercept = y_mean - beta.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
    Ok((beta.iter().copied().collect(), intercept))
}

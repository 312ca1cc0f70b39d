//! Overall explanation: rule contributions of the input features plus each
//! model's normalized attribution weighted by the rule contribution of that
//! model's output.

use serde::{Deserialize, Serialize};

use crate::attribution::{normalize_attribution, AttributionEngine};
use crate::error::{Error, Result};
use crate::rules::rule_contributions;
use crate::scaler::{Bounds, Dataset, Scaler};
use crate::system::{DecisionSystem, Instance, Outcome, Rule};

/// Background rows for model attribution, with how they were drawn.
#[derive(Clone, Debug)]
pub struct Background {
    pub rows: Dataset,
    /// Seed of the subsample, `None` when the full reference set is used.
    pub seed: Option<u64>,
}

impl Background {
    pub const DEFAULT_ROWS: usize = 100;

    pub fn full(rows: Dataset) -> Self {
        Self { rows, seed: None }
    }

    /// Subsamples the reference set to `max_rows` when it is larger.
    pub fn sample(reference: &Dataset, max_rows: usize, seed: u64) -> Self {
        if reference.len() <= max_rows {
            Self::full(reference.clone())
        } else {
            Self {
                rows: reference.subsample(max_rows, seed),
                seed: Some(seed),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelExplanation {
    pub model: String,
    pub phi: Vec<f64>,
    pub base_value: f64,
    pub phi_hat: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBounds {
    pub feature: String,
    #[serde(flatten)]
    pub bounds: Bounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub backend: String,
    pub background_rows: usize,
    pub background_seed: Option<u64>,
    pub scaler: Vec<FeatureBounds>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    pub index: usize,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Names of all `D+N` features; the first `D` are inputs.
    pub features: Vec<String>,
    pub instance: Vec<f64>,
    pub completed: Vec<f64>,
    pub rule: String,
    pub outcome: Outcome,
    pub triggered_rule: Option<String>,
    /// Overall contribution of each input feature.
    pub e: Vec<f64>,
    /// Rule contribution of every feature, inputs then model outputs.
    pub r: Vec<f64>,
    pub models: Vec<ModelExplanation>,
    pub metadata: Metadata,
}

/// `e_j = r_j + Σ_k r_{D+k} · φ̂_j^{(k)}`, summed in model order.
pub fn combine(r: &[f64], phi_hat: &[&[f64]], inputs: usize) -> Vec<f64> {
    (0..inputs)
        .map(|j| {
            phi_hat
                .iter()
                .enumerate()
                .fold(r[j], |acc, (k, ph)| acc + r[inputs + k] * ph[j])
        })
        .collect()
}

/// The explicitly named rule, otherwise the triggered rule, otherwise the
/// first rule of the policy.
pub fn select_rule<'a>(
    system: &'a DecisionSystem,
    name: Option<&str>,
    triggered: Option<&'a Rule>,
) -> Result<&'a Rule> {
    match name {
        Some(n) => system
            .policy()
            .rule(n)
            .ok_or_else(|| Error::RuleNotInPolicy(n.to_owned())),
        None => triggered
            .or_else(|| system.policy().rules().first())
            .ok_or_else(|| Error::RuleNotInPolicy("<empty policy>".to_owned())),
    }
}

pub fn explain(
    system: &DecisionSystem,
    scaler: &Scaler,
    instance: &Instance,
    rule: Option<&str>,
    engine: &dyn AttributionEngine,
    background: &Background,
) -> Result<Explanation> {
    if scaler.len() != system.feature_count() {
        return Err(Error::Dimension {
            expected: system.feature_count(),
            actual: scaler.len(),
        });
    }
    if let Some(name) = rule {
        select_rule(system, Some(name), None)?;
    }

    let models = system
        .models()
        .iter()
        .map(|m| {
            let attr = engine.attribute(m, instance, &background.rows)?;
            let phi_hat = normalize_attribution(&attr).phi_hat;
            Ok(ModelExplanation {
                model: attr.model,
                phi: attr.phi,
                base_value: attr.base_value,
                phi_hat,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let completed = system.complete(instance)?;
    let decision = system.evaluate(&completed)?;
    let explained = select_rule(system, rule, decision.triggered)?;
    let r = rule_contributions(explained, &completed, scaler)?.into_vec();

    let phi_hat: Vec<&[f64]> = models.iter().map(|m| m.phi_hat.as_slice()).collect();
    let e = combine(&r, &phi_hat, system.input_count());

    let names: Vec<String> = system.features().iter().map(|f| f.name.clone()).collect();
    Ok(Explanation {
        instance: instance.values().to_vec(),
        completed: completed.values().to_vec(),
        rule: explained.name.clone(),
        outcome: decision.outcome.clone(),
        triggered_rule: decision.triggered.map(|r| r.name.clone()),
        e,
        r,
        models,
        metadata: Metadata {
            backend: engine.name().to_owned(),
            background_rows: background.rows.len(),
            background_seed: background.seed,
            scaler: names
                .iter()
                .zip(scaler.bounds())
                .map(|(n, &b)| FeatureBounds {
                    feature: n.clone(),
                    bounds: b,
                })
                .collect(),
        },
        features: names,
    })
}

impl Explanation {
    pub fn input_count(&self) -> usize {
        self.instance.len()
    }

    /// `e` rebuilt from the stored `r` and `φ̂`.
    pub fn recompute(&self) -> Vec<f64> {
        let phi_hat: Vec<&[f64]> = self.models.iter().map(|m| m.phi_hat.as_slice()).collect();
        combine(&self.r, &phi_hat, self.input_count())
    }

    /// Input features by decreasing `|e_j|`, ties by index.
    pub fn rank(&self) -> Vec<RankedFeature> {
        let mut order: Vec<usize> = (0..self.e.len()).collect();
        order.sort_by(|&a, &b| self.e[b].abs().total_cmp(&self.e[a].abs()).then(a.cmp(&b)));
        order
            .into_iter()
            .map(|i| RankedFeature {
                feature: self.features[i].clone(),
                index: i,
                contribution: self.e[i],
            })
            .collect()
    }
}

//! Domain types of a composite decision system: input features, models whose
//! outputs become internal features, and a first-match rule policy over both.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::{Diagnostic, DiagnosticKind};
use crate::error::{Error, Result};
use crate::external::ExternalModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Input,
    Internal,
}

/// A feature of the completed instance. Inputs occupy `0..D`, model outputs
/// occupy `D..D+N` in model order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureId {
    pub index: usize,
    pub name: String,
    pub kind: FeatureKind,
}

/// Raw, unscaled input values of the instance being explained.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    values: Vec<f64>,
}

impl Instance {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("instance value at position {pos}")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Instance inputs followed by the output of every model.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletedInstance {
    values: Vec<f64>,
    inputs: usize,
}

impl CompletedInstance {
    /// Wraps an already completed vector, e.g. one taken from a report.
    pub fn from_parts(values: Vec<f64>, inputs: usize) -> Result<Self> {
        if inputs > values.len() {
            return Err(Error::Dimension {
                expected: inputs,
                actual: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("completed value at position {pos}")));
        }
        Ok(Self { values, inputs })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn inputs(&self) -> &[f64] {
        &self.values[..self.inputs]
    }

    pub fn internal(&self) -> &[f64] {
        &self.values[self.inputs..]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Consequence of a rule or the policy default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Number(f64),
    Label(String),
}

impl Outcome {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Outcome::Number(v) => Some(*v),
            Outcome::Label(_) => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Number(v) => write!(f, "{v}"),
            Outcome::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Outcome {
    fn from(v: f64) -> Self {
        Outcome::Number(v)
    }
}

impl From<&str> for Outcome {
    fn from(s: &str) -> Self {
        Outcome::Label(s.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Ge => ">=",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Lt => "<",
        }
    }

    /// `Ge`/`Le` are closed, `Gt`/`Lt` strict.
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Op::Ge => value >= threshold,
            Op::Le => value <= threshold,
            Op::Gt => value > threshold,
            Op::Lt => value < threshold,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Threshold test on a single feature of the completed instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    /// Index into the completed instance (`0..D+N`).
    pub feature: usize,
    pub op: Op,
    pub threshold: f64,
}

impl Condition {
    pub fn new(feature: usize, op: Op, threshold: f64) -> Self {
        Self { feature, op, threshold }
    }

    pub fn is_satisfied(&self, value: f64) -> bool {
        self.op.holds(value, self.threshold)
    }
}

/// Conjunction of conditions with a consequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub conditions: Vec<Condition>,
    pub consequence: Outcome,
}

impl Rule {
    pub fn new(name: impl Into<String>, conditions: Vec<Condition>, consequence: impl Into<Outcome>) -> Result<Self> {
        let rule = Self {
            name: name.into(),
            conditions,
            consequence: consequence.into(),
        };
        let problems = rule.check();
        if problems.is_empty() {
            Ok(rule)
        } else {
            Err(Error::InvalidSystem(problems))
        }
    }

    fn check(&self) -> Vec<Diagnostic> {
        let context = format!("rule {}", self.name);
        let mut out = Vec::new();
        if self.conditions.is_empty() {
            out.push(Diagnostic::error(
                DiagnosticKind::Structure,
                &context,
                "a rule needs at least one condition",
            ));
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if !c.threshold.is_finite() {
                out.push(Diagnostic::error(
                    DiagnosticKind::NonNumericThreshold,
                    &context,
                    format!("condition {} has a non-finite threshold", i + 1),
                ));
            }
            if self.conditions[..i].contains(c) {
                out.push(Diagnostic::error(
                    DiagnosticKind::Structure,
                    &context,
                    format!("condition {} repeats an earlier condition", i + 1),
                ));
            }
        }
        out
    }

    pub fn conditions_on(&self, feature: usize) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(move |c| c.feature == feature)
    }

    pub fn holds(&self, values: &[f64]) -> bool {
        self.conditions
            .iter()
            .all(|c| values.get(c.feature).is_some_and(|&v| c.is_satisfied(v)))
    }
}

/// Ordered rule list with first-match semantics and an explicit default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionPolicy {
    rules: Vec<Rule>,
    default_outcome: Outcome,
}

/// Result of running a policy on a completed instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision<'a> {
    pub outcome: &'a Outcome,
    pub triggered: Option<&'a Rule>,
}

impl DecisionPolicy {
    pub fn new(rules: Vec<Rule>, default_outcome: impl Into<Outcome>) -> Result<Self> {
        let mut seen = HashSet::new();
        let dupes: Vec<Diagnostic> = rules
            .iter()
            .filter(|r| !seen.insert(r.name.as_str()))
            .map(|r| {
                Diagnostic::error(
                    DiagnosticKind::DuplicateName,
                    "policy",
                    format!("rule name `{}` is used more than once", r.name),
                )
            })
            .collect();
        if !dupes.is_empty() {
            return Err(Error::InvalidSystem(dupes));
        }
        Ok(Self {
            rules,
            default_outcome: default_outcome.into(),
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn default_outcome(&self) -> &Outcome {
        &self.default_outcome
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Index of the first rule whose conditions all hold.
    pub fn triggered_index(&self, values: &[f64]) -> Option<usize> {
        self.rules.iter().position(|r| r.holds(values))
    }

    pub fn evaluate<'a>(&'a self, completed: &CompletedInstance) -> Decision<'a> {
        match self.triggered_index(completed.values()) {
            Some(i) => Decision {
                outcome: &self.rules[i].consequence,
                triggered: Some(&self.rules[i]),
            },
            None => Decision {
                outcome: &self.default_outcome,
                triggered: None,
            },
        }
    }

    /// Distinct outcomes: the default first, then rule consequences in rule order.
    pub fn outcomes(&self) -> Vec<&Outcome> {
        let mut out = vec![&self.default_outcome];
        for r in &self.rules {
            if !out.contains(&&r.consequence) {
                out.push(&r.consequence);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(coefficients: Vec<f64>, intercept: f64) -> Self {
        Self {
            coefficients,
            intercept,
        }
    }

    pub fn eval(&self, inputs: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(inputs)
            .fold(self.intercept, |acc, (w, x)| acc + w * x)
    }
}

/// Axis-aligned split contributing `below` when the input is `<= threshold`
/// and `above` otherwise. A stump list predicts the sum over its stumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStump {
    /// Position within the model's input features.
    pub input: usize,
    pub threshold: f64,
    pub below: f64,
    pub above: f64,
}

impl TreeStump {
    pub fn eval(&self, inputs: &[f64]) -> f64 {
        if inputs[self.input] <= self.threshold {
            self.below
        } else {
            self.above
        }
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    Linear(LinearModel),
    Stumps(Vec<TreeStump>),
    External(Arc<ExternalModel>),
}

impl Backend {
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::Linear(_) => "linear",
            Backend::Stumps(_) => "stumps",
            Backend::External(_) => "external",
        }
    }
}

/// A model over a subset of the input features.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    /// Input feature indices, in the order the backend expects them.
    pub input_features: Vec<usize>,
    pub backend: Backend,
}

impl Model {
    pub fn new(name: impl Into<String>, input_features: Vec<usize>, backend: Backend) -> Self {
        Self {
            name: name.into(),
            input_features,
            backend,
        }
    }

    pub fn linear(name: impl Into<String>, input_features: Vec<usize>, coefficients: Vec<f64>, intercept: f64) -> Self {
        Self::new(
            name,
            input_features,
            Backend::Linear(LinearModel::new(coefficients, intercept)),
        )
    }

    fn gather(&self, row: &[f64]) -> Vec<f64> {
        self.input_features.iter().map(|&i| row[i]).collect()
    }

    /// Evaluates the model on one full input row (length `D`).
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        Ok(self.predict_batch(std::slice::from_ref(&row.to_vec()))?[0])
    }

    /// Evaluates the model on full input rows (each of length `D`).
    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let out = match &self.backend {
            Backend::Linear(lin) => rows.iter().map(|r| lin.eval(&self.gather(r))).collect(),
            Backend::Stumps(stumps) => rows
                .iter()
                .map(|r| {
                    let x = self.gather(r);
                    stumps.iter().map(|s| s.eval(&x)).sum()
                })
                .collect(),
            Backend::External(ext) => {
                let batch: Vec<Vec<f64>> = rows.iter().map(|r| self.gather(r)).collect();
                ext.predict(&batch).map_err(|source| Error::ExternalModel {
                    model: self.name.clone(),
                    source,
                })?
            }
        };
        if out.iter().any(|v: &f64| !v.is_finite()) {
            return Err(Error::NonFinite(format!("output of model `{}`", self.name)));
        }
        Ok(out)
    }
}

/// Inputs, models and policy bound together. Construction validates every
/// structural constraint, so a `DecisionSystem` is always well formed.
#[derive(Clone, Debug)]
pub struct DecisionSystem {
    features: Vec<FeatureId>,
    inputs: usize,
    models: Vec<Model>,
    policy: DecisionPolicy,
}

impl DecisionSystem {
    pub fn new(input_names: Vec<String>, models: Vec<Model>, policy: DecisionPolicy) -> Result<Self> {
        let problems = check_structure(&input_names, &models, &policy);
        if problems.iter().any(Diagnostic::is_error) {
            return Err(Error::InvalidSystem(problems));
        }
        let inputs = input_names.len();
        let features = input_names
            .into_iter()
            .map(|name| (name, FeatureKind::Input))
            .chain(models.iter().map(|m| (m.name.clone(), FeatureKind::Internal)))
            .enumerate()
            .map(|(index, (name, kind))| FeatureId { index, name, kind })
            .collect();
        Ok(Self {
            features,
            inputs,
            models,
            policy,
        })
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn model_count(&self) -> usize {
        self.models.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    pub fn input_features(&self) -> &[FeatureId] {
        &self.features[..self.inputs]
    }

    pub fn feature(&self, index: usize) -> Option<&FeatureId> {
        self.features.get(index)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }

    pub fn policy(&self) -> &DecisionPolicy {
        &self.policy
    }

    pub fn complete(&self, instance: &Instance) -> Result<CompletedInstance> {
        if instance.len() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                actual: instance.len(),
            });
        }
        let mut values = instance.values().to_vec();
        for m in &self.models {
            values.push(m.predict(instance.values())?);
        }
        Ok(CompletedInstance {
            values,
            inputs: self.inputs,
        })
    }

    /// Completes many rows at once; external models see one request per model.
    pub fn complete_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(bad) = rows.iter().find(|r| r.len() != self.inputs) {
            return Err(Error::Dimension {
                expected: self.inputs,
                actual: bad.len(),
            });
        }
        let mut out: Vec<Vec<f64>> = rows.to_vec();
        for m in &self.models {
            for (row, y) in out.iter_mut().zip(m.predict_batch(rows)?) {
                row.push(y);
            }
        }
        Ok(out)
    }

    pub fn evaluate<'a>(&'a self, completed: &CompletedInstance) -> Result<Decision<'a>> {
        if completed.len() != self.feature_count() {
            return Err(Error::Dimension {
                expected: self.feature_count(),
                actual: completed.len(),
            });
        }
        Ok(self.policy.evaluate(completed))
    }
}

/// Structural checks on system parts: unique names, model inputs restricted
/// to input features, backend arity, finite thresholds, and condition
/// features that exist.
pub fn check_structure(input_names: &[String], models: &[Model], policy: &DecisionPolicy) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let d = input_names.len();
    let total = d + models.len();

    let mut seen = HashSet::new();
    for name in input_names.iter().chain(models.iter().map(|m| &m.name)) {
        if !seen.insert(name.as_str()) {
            out.push(Diagnostic::error(
                DiagnosticKind::DuplicateName,
                "features",
                format!("feature name `{name}` is used more than once"),
            ));
        }
    }

    for m in models {
        let context = format!("model {}", m.name);
        for &i in &m.input_features {
            if i >= total {
                out.push(Diagnostic::error(
                    DiagnosticKind::UnknownFeature,
                    &context,
                    format!("input index {i} does not exist"),
                ));
            } else if i >= d {
                out.push(Diagnostic::error(
                    DiagnosticKind::InternalModelInput,
                    &context,
                    format!(
                        "models may only consume input features, but `{}` is the output of another model",
                        models[i - d].name
                    ),
                ));
            }
        }
        let arity = m.input_features.len();
        match &m.backend {
            Backend::Linear(lin) => {
                if lin.coefficients.len() != arity {
                    out.push(Diagnostic::error(
                        DiagnosticKind::Structure,
                        &context,
                        format!("{} coefficients for {arity} input features", lin.coefficients.len()),
                    ));
                }
                if lin.coefficients.iter().any(|c| !c.is_finite()) || !lin.intercept.is_finite() {
                    out.push(Diagnostic::error(
                        DiagnosticKind::Structure,
                        &context,
                        "coefficients and intercept must be finite",
                    ));
                }
            }
            Backend::Stumps(stumps) => {
                for s in stumps {
                    if s.input >= arity {
                        out.push(Diagnostic::error(
                            DiagnosticKind::Structure,
                            &context,
                            format!("stump refers to input position {} of {arity}", s.input),
                        ));
                    }
                    if !(s.threshold.is_finite() && s.below.is_finite() && s.above.is_finite()) {
                        out.push(Diagnostic::error(
                            DiagnosticKind::Structure,
                            &context,
                            "stump values must be finite",
                        ));
                    }
                }
            }
            Backend::External(_) => {}
        }
    }

    for rule in policy.rules() {
        out.extend(rule.check());
        for c in &rule.conditions {
            if c.feature >= total {
                out.push(Diagnostic::error(
                    DiagnosticKind::UnknownFeature,
                    format!("rule {}", rule.name),
                    format!("condition refers to feature index {} of {total}", c.feature),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hybrid() -> DecisionSystem {
        let m1 = Model::linear("m1", vec![1, 2], vec![2.0, 1.0], 0.0);
        let m2 = Model::linear("m2", vec![0, 1, 2], vec![700.0, 1000.0, -500.0], 0.0);
        let r3 = Rule::new(
            "R3",
            vec![
                Condition::new(0, Op::Le, 0.5),
                Condition::new(1, Op::Ge, 0.6),
                Condition::new(3, Op::Ge, 1.0),
                Condition::new(4, Op::Le, 600.0),
            ],
            1.0,
        )
        .unwrap();
        let policy = DecisionPolicy::new(vec![r3], 0.0).unwrap();
        DecisionSystem::new(vec!["x1".into(), "x2".into(), "x3".into()], vec![m1, m2], policy).unwrap()
    }

    fn r1_system() -> DecisionSystem {
        let r1 = Rule::new(
            "R1",
            vec![
                Condition::new(0, Op::Le, 0.5),
                Condition::new(1, Op::Ge, 0.6),
                Condition::new(2, Op::Ge, 0.2),
            ],
            1.0,
        )
        .unwrap();
        DecisionSystem::new(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec![],
            DecisionPolicy::new(vec![r1], 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn completion_appends_model_outputs() {
        let sys = hybrid();
        let xi = Instance::new(vec![0.6, 0.1, 0.4]).unwrap();
        let done = sys.complete(&xi).unwrap();
        assert_eq!(done.inputs(), xi.values());
        assert!((done.values()[3] - 0.6).abs() < 1e-12);
        assert!((done.values()[4] - 320.0).abs() < 1e-9);
        assert_eq!(sys.complete(&xi).unwrap(), done);
    }

    #[test]
    fn completion_without_models_is_identity() {
        let sys = r1_system();
        let xi = Instance::new(vec![0.6, 0.1, 0.4]).unwrap();
        assert_eq!(sys.complete(&xi).unwrap().values(), &[0.6, 0.1, 0.4]);
    }

    #[test]
    fn completion_at_origin() {
        let done = hybrid().complete(&Instance::new(vec![0.0; 3]).unwrap()).unwrap();
        assert_eq!(done.internal(), &[0.0, 0.0]);
    }

    #[test]
    fn completion_rejects_wrong_length() {
        let err = hybrid().complete(&Instance::new(vec![0.1, 0.2]).unwrap());
        assert!(matches!(err, Err(Error::Dimension { expected: 3, actual: 2 })));
    }

    #[test]
    fn instance_rejects_nan() {
        assert!(Instance::new(vec![0.1, f64::NAN]).is_err());
        assert!(Instance::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn policy_examples() {
        let sys = r1_system();
        let generic = sys.complete(&Instance::new(vec![0.6, 0.1, 0.4]).unwrap()).unwrap();
        let d = sys.evaluate(&generic).unwrap();
        assert_eq!(d.outcome, &Outcome::Number(0.0));
        assert!(d.triggered.is_none());

        let inside = sys.complete(&Instance::new(vec![0.4, 0.7, 0.3]).unwrap()).unwrap();
        let d = sys.evaluate(&inside).unwrap();
        assert_eq!(d.outcome, &Outcome::Number(1.0));
        assert_eq!(d.triggered.map(|r| r.name.as_str()), Some("R1"));

        let hybrid = hybrid();
        let done = hybrid.complete(&Instance::new(vec![0.6, 0.1, 0.4]).unwrap()).unwrap();
        let d = hybrid.evaluate(&done).unwrap();
        assert_eq!(d.outcome, &Outcome::Number(0.0));
        assert!(d.triggered.is_none());
    }

    #[test]
    fn closed_and_strict_operators_on_threshold() {
        assert!(Op::Ge.holds(0.5, 0.5));
        assert!(Op::Le.holds(0.5, 0.5));
        assert!(!Op::Gt.holds(0.5, 0.5));
        assert!(!Op::Lt.holds(0.5, 0.5));
    }

    #[test]
    fn evaluate_checks_dimension() {
        let sys = hybrid();
        let short = CompletedInstance::from_parts(vec![0.1, 0.2, 0.3], 3).unwrap();
        assert!(matches!(sys.evaluate(&short), Err(Error::Dimension { .. })));
    }

    #[test]
    fn first_match_wins() {
        let a = Rule::new("a", vec![Condition::new(0, Op::Ge, 0.0)], "first").unwrap();
        let b = Rule::new("b", vec![Condition::new(0, Op::Ge, 0.5)], "second").unwrap();
        let values = [0.7];
        let p = DecisionPolicy::new(vec![a.clone(), b.clone()], "none").unwrap();
        assert_eq!(p.triggered_index(&values), Some(0));
        let q = DecisionPolicy::new(vec![b, a], "none").unwrap();
        assert_eq!(q.triggered_index(&values), Some(0));
        assert_eq!(q.rules()[0].name, "b");
    }

    #[test]
    fn rejects_structural_violations() {
        assert!(Rule::new("empty", vec![], 1.0).is_err());
        let c = Condition::new(0, Op::Ge, 0.5);
        assert!(Rule::new("dup", vec![c.clone(), c], 1.0).is_err());
        let r = Rule::new("r", vec![Condition::new(0, Op::Ge, 0.5)], 1.0).unwrap();
        assert!(DecisionPolicy::new(vec![r.clone(), r.clone()], 0.0).is_err());

        let policy = DecisionPolicy::new(vec![r], 0.0).unwrap();
        let nested = Model::linear("m2", vec![1], vec![1.0], 0.0);
        let first = Model::linear("m1", vec![0], vec![1.0], 0.0);
        let err = DecisionSystem::new(vec!["x1".into()], vec![first, nested], policy.clone());
        match err {
            Err(Error::InvalidSystem(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].kind, DiagnosticKind::InternalModelInput);
            }
            other => panic!("expected invalid system, got {other:?}"),
        }

        let wrong_arity = Model::linear("m1", vec![0], vec![1.0, 2.0], 0.0);
        assert!(DecisionSystem::new(vec!["x1".into()], vec![wrong_arity], policy).is_err());
    }

    #[test]
    fn stump_backend_sums_leaves() {
        let m = Model::new(
            "s",
            vec![0, 1],
            Backend::Stumps(vec![
                TreeStump {
                    input: 0,
                    threshold: 0.5,
                    below: 1.0,
                    above: 2.0,
                },
                TreeStump {
                    input: 1,
                    threshold: 0.2,
                    below: -1.0,
                    above: 0.0,
                },
            ]),
        );
        assert_eq!(m.predict(&[0.5, 0.3]).unwrap(), 1.0);
        assert_eq!(m.predict(&[0.9, 0.1]).unwrap(), 1.0);
        assert_eq!(m.predict(&[0.9, 0.9]).unwrap(), 2.0);
    }

    #[test]
    fn non_finite_model_output_is_an_error() {
        let m = Model::linear("big", vec![0], vec![f64::MAX], 0.0);
        assert!(matches!(m.predict(&[10.0]), Err(Error::NonFinite(_))));
    }
}

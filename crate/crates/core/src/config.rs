//! JSON system configuration and instance documents.
//!
//! ```json
//! {
//!   "features": [{"name": "x1"}, {"name": "x2"}, {"name": "x3"}],
//!   "models": [
//!     {"name": "m1", "inputs": ["x2", "x3"],
//!      "backend": {"type": "linear", "coefficients": [2, 1], "intercept": 0}}
//!   ],
//!   "policy": {
//!     "rules": [{"name": "R", "dsl": "if x1 <= 0.5 and m1 >= 1 then 1 else 0"}]
//!   },
//!   "dataset": {"path": "data.csv", "format": "csv"}
//! }
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::load_dataset;
use crate::dsl::{parse_rule, Diagnostic, DiagnosticKind, FeatureMap};
use crate::error::{Error, Result};
use crate::external::{ExternalModel, ExternalModelSpec, DEFAULT_TIMEOUT_MS};
use crate::scaler::Dataset;
use crate::system::{
    check_structure, Backend, DecisionPolicy, DecisionSystem, FeatureKind, Instance, LinearModel, Model, Outcome,
    TreeStump,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub features: Vec<FeatureConfig>,
    #[serde(default)]
    pub models: Vec<ModelConfig>,
    pub policy: PolicyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub inputs: Vec<String>,
    pub backend: BackendConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    Linear {
        coefficients: Vec<f64>,
        #[serde(default)]
        intercept: f64,
    },
    Stumps {
        stumps: Vec<StumpConfig>,
    },
    External {
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_ms: u64,
    },
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StumpConfig {
    /// Name of one of the model's inputs.
    pub input: String,
    pub threshold: f64,
    pub below: f64,
    pub above: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub rules: Vec<RuleConfig>,
    /// Overridden by an `else` clause in any rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub name: String,
    pub dsl: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    #[default]
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    /// Relative paths resolve against the configuration file's directory.
    pub path: PathBuf,
    #[serde(default)]
    pub format: DatasetFormat,
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn input_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// All diagnostics, plus the system when there are no errors.
    pub fn resolve(&self) -> (Vec<Diagnostic>, Option<DecisionSystem>) {
        let mut diags = Vec::new();
        let inputs = self.input_names();
        let model_names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        let features = FeatureMap::from_names(&inputs.iter().map(String::as_str).collect::<Vec<_>>(), &model_names);

        let mut models = Vec::with_capacity(self.models.len());
        for mc in &self.models {
            let context = format!("model {}", mc.name);
            let mut input_features = Vec::with_capacity(mc.inputs.len());
            for name in &mc.inputs {
                match features.get(name) {
                    Some(f) if f.kind == FeatureKind::Input => input_features.push(f.index),
                    Some(_) => diags.push(Diagnostic::error(
                        DiagnosticKind::InternalModelInput,
                        &context,
                        format!("`{name}` is the output of a model; models may only consume input features"),
                    )),
                    None => diags.push(Diagnostic::error(
                        DiagnosticKind::UnknownFeature,
                        &context,
                        format!("unknown input feature `{name}`"),
                    )),
                }
            }
            if input_features.len() != mc.inputs.len() {
                continue;
            }
            let backend = match &mc.backend {
                BackendConfig::Linear {
                    coefficients,
                    intercept,
                } => Backend::Linear(LinearModel::new(coefficients.clone(), *intercept)),
                BackendConfig::Stumps { stumps } => {
                    let mut out = Vec::with_capacity(stumps.len());
                    for s in stumps {
                        match mc.inputs.iter().position(|n| *n == s.input) {
                            Some(input) => out.push(TreeStump {
                                input,
                                threshold: s.threshold,
                                below: s.below,
                                above: s.above,
                            }),
                            None => diags.push(Diagnostic::error(
                                DiagnosticKind::Structure,
                                &context,
                                format!("stump input `{}` is not among the model inputs", s.input),
                            )),
                        }
                    }
                    Backend::Stumps(out)
                }
                BackendConfig::External {
                    command,
                    args,
                    timeout_ms,
                } => {
                    if command.trim().is_empty() {
                        diags.push(Diagnostic::error(
                            DiagnosticKind::Structure,
                            &context,
                            "external command is empty",
                        ));
                    }
                    Backend::External(Arc::new(ExternalModel::new(ExternalModelSpec {
                        command: command.clone(),
                        args: args.clone(),
                        timeout_ms: *timeout_ms,
                    })))
                }
            };
            models.push(Model::new(mc.name.clone(), input_features, backend));
        }

        let mut rules = Vec::with_capacity(self.policy.rules.len());
        let mut default = self.policy.default.clone();
        let mut seen = HashSet::new();
        let mut unparsed = false;
        for rc in &self.policy.rules {
            if !seen.insert(rc.name.as_str()) {
                diags.push(Diagnostic::error(
                    DiagnosticKind::DuplicateName,
                    "policy",
                    format!("rule name `{}` is used more than once", rc.name),
                ));
                continue;
            }
            match parse_rule(&rc.name, &rc.dsl, &features) {
                Ok(parsed) => {
                    if parsed.default.is_some() {
                        default = parsed.default;
                    }
                    rules.push(parsed.rule);
                }
                Err(d) => {
                    unparsed = true;
                    diags.extend(d);
                }
            }
        }
        let default = default.unwrap_or_else(|| {
            if !unparsed {
                diags.push(Diagnostic::error(
                    DiagnosticKind::MissingDefault,
                    "policy",
                    "no default outcome: set `policy.default` or add an `else` clause",
                ));
            }
            Outcome::Number(0.0)
        });

        let policy = match DecisionPolicy::new(rules, default) {
            Ok(p) => p,
            Err(Error::InvalidSystem(d)) => {
                diags.extend(d);
                return (diags, None);
            }
            Err(e) => unreachable!("policy construction only reports diagnostics: {e}"),
        };
        if models.len() == self.models.len() {
            diags.extend(check_structure(&inputs, &models, &policy));
        }
        if diags.iter().any(Diagnostic::is_error) {
            return (diags, None);
        }
        match DecisionSystem::new(inputs, models, policy) {
            Ok(system) => (diags, Some(system)),
            Err(Error::InvalidSystem(d)) => {
                diags.extend(d);
                (diags, None)
            }
            Err(e) => unreachable!("system construction only reports diagnostics: {e}"),
        }
    }

    pub fn build(&self) -> Result<DecisionSystem> {
        match self.resolve() {
            (_, Some(system)) => Ok(system),
            (diags, None) => Err(Error::InvalidSystem(diags)),
        }
    }
}

/// A configuration file with its system built and its dataset loaded.
#[derive(Debug)]
pub struct LoadedSystem {
    pub config: SystemConfig,
    pub system: DecisionSystem,
    pub dataset: Option<Dataset>,
}

pub fn read_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    SystemConfig::from_json(&text)
}

pub fn load_system(path: &Path) -> Result<LoadedSystem> {
    let config = read_config(path)?;
    let system = config.build()?;
    let dataset = match &config.dataset {
        Some(r) => {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            Some(load_dataset(&base.join(&r.path), r.format)?)
        }
        None => None,
    };
    Ok(LoadedSystem {
        config,
        system,
        dataset,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InstanceDocument {
    Values(Vec<f64>),
    Wrapped { values: Vec<f64> },
    Named(BTreeMap<String, f64>),
}

/// Accepts `[0.6, 0.1, 0.4]`, `{"values": [...]}` or `{"x1": 0.6, ...}`.
pub fn parse_instance(text: &str, system: &DecisionSystem) -> Result<Instance> {
    let doc: InstanceDocument = serde_json::from_str(text)?;
    let values = match doc {
        InstanceDocument::Values(v) | InstanceDocument::Wrapped { values: v } => v,
        InstanceDocument::Named(mut map) => {
            let values = system
                .input_features()
                .iter()
                .map(|f| {
                    map.remove(&f.name)
                        .ok_or_else(|| Error::Config(format!("instance is missing `{}`", f.name)))
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(extra) = map.keys().next() {
                return Err(Error::UnknownFeature(extra.clone()));
            }
            values
        }
    };
    if values.len() != system.input_count() {
        return Err(Error::Dimension {
            expected: system.input_count(),
            actual: values.len(),
        });
    }
    Instance::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::validate_system;

    const HYBRID: &str = r#"{
        "features": [{"name": "x1"}, {"name": "x2"}, {"name": "x3"}],
        "models": [
            {"name": "m1", "inputs": ["x2", "x3"], "backend": {"type": "linear", "coefficients": [2, 1]}},
            {"name": "m2", "inputs": ["x1", "x2", "x3"],
             "backend": {"type": "linear", "coefficients": [700, 1000, -500], "intercept": 0}}
        ],
        "policy": {"rules": [{"name": "R3", "dsl": "if x1 <= 0.5 and x2 >= 0.6 and m1 >= 1 and m2 <= 600 then 1 else 0"}]}
    }"#;

    fn with(f: impl FnOnce(&mut SystemConfig)) -> SystemConfig {
        let mut c = SystemConfig::from_json(HYBRID).unwrap();
        f(&mut c);
        c
    }

    #[test]
    fn hybrid_config_is_valid() {
        let config = SystemConfig::from_json(HYBRID).unwrap();
        assert!(validate_system(&config).is_empty());
        let system = config.build().unwrap();
        assert_eq!(system.feature_count(), 5);
        assert_eq!(system.policy().default_outcome(), &Outcome::Number(0.0));
        let done = system.complete(&Instance::new(vec![0.6, 0.1, 0.4]).unwrap()).unwrap();
        assert!((done.values()[4] - 320.0).abs() < 1e-9);
    }

    #[test]
    fn model_reading_internal_feature_is_one_error() {
        let c = with(|c| c.models[1].inputs = vec!["x1".into(), "m1".into(), "x3".into()]);
        let d = validate_system(&c);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, DiagnosticKind::InternalModelInput);
    }

    #[test]
    fn textual_threshold_is_one_error() {
        let c = with(|c| c.policy.rules[0].dsl = "if x1 <= high then 1 else 0".into());
        let d = validate_system(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::NonNumericThreshold);
    }

    #[test]
    fn feature_comparison_and_disjunction_are_errors() {
        let c = with(|c| c.policy.rules[0].dsl = "if x1 <= x2 or x3 >= 1 then 1 else 0".into());
        let kinds: Vec<_> = validate_system(&c).iter().map(|d| d.kind).collect();
        assert_eq!(
            kinds,
            vec![DiagnosticKind::FeatureComparison, DiagnosticKind::Disjunction]
        );
    }

    #[test]
    fn structural_problems() {
        let c = with(|c| {
            c.models[0].backend = BackendConfig::Linear {
                coefficients: vec![1.0],
                intercept: 0.0,
            }
        });
        assert_eq!(validate_system(&c)[0].kind, DiagnosticKind::Structure);

        let c = with(|c| c.policy.rules[0].dsl = "if x1 <= 0.5 then 1".into());
        assert_eq!(validate_system(&c)[0].kind, DiagnosticKind::MissingDefault);

        let c = with(|c| c.features.push(FeatureConfig { name: "m1".into() }));
        assert!(validate_system(&c)
            .iter()
            .any(|d| d.kind == DiagnosticKind::DuplicateName));

        let c = with(|c| {
            let r = c.policy.rules[0].clone();
            c.policy.rules.push(r);
        });
        assert_eq!(validate_system(&c)[0].kind, DiagnosticKind::DuplicateName);
    }

    #[test]
    fn else_clause_overrides_policy_default() {
        let c = with(|c| c.policy.default = Some(Outcome::Label("keep".into())));
        assert_eq!(c.build().unwrap().policy().default_outcome(), &Outcome::Number(0.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = HYBRID.replacen("\"features\"", "\"extra\": 1, \"features\"", 1);
        assert!(SystemConfig::from_json(&text).is_err());
        let text = HYBRID.replacen("\"intercept\": 0", "\"intercept\": 0, \"bias\": 2", 1);
        assert!(SystemConfig::from_json(&text).is_err());
    }

    #[test]
    fn instance_documents() {
        let system = SystemConfig::from_json(HYBRID).unwrap().build().unwrap();
        let a = parse_instance("[0.6, 0.1, 0.4]", &system).unwrap();
        let b = parse_instance(r#"{"values": [0.6, 0.1, 0.4]}"#, &system).unwrap();
        let c = parse_instance(r#"{"x3": 0.4, "x1": 0.6, "x2": 0.1}"#, &system).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(parse_instance("[0.6, 0.1]", &system).is_err());
        assert!(parse_instance(r#"{"x1": 0.6, "x2": 0.1}"#, &system).is_err());
        assert!(parse_instance(r#"{"x1": 0.6, "x2": 0.1, "x3": 1, "x4": 2}"#, &system).is_err());
    }
}

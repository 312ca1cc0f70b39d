//! Explanations for decisions made by rule policies over model outputs.
//!
//! A [`DecisionSystem`] feeds input features through models, appends their
//! outputs to the instance, and applies a first-match policy of conjunctive
//! threshold rules. [`explain`] splits a rule's verdict into per-feature
//! contributions and pushes the contributions of model outputs back onto the
//! inputs through the models' normalized Shapley attributions.

pub mod aggregate;
pub mod attribution;
pub mod baselines;
pub mod config;
pub mod dataset;
pub mod dsl;
pub mod error;
pub mod external;
pub mod report;
pub mod reproduce;
pub mod rules;
pub mod scaler;
pub mod system;

pub use aggregate::{combine, explain, Background, Explanation};
pub use attribution::{AttributionEngine, ExactShapley, LinearShapley, ModelAttribution};
pub use config::{load_system, SystemConfig};
pub use dataset::{load_dataset, uniform_dataset};
pub use dsl::{parse_rule, render_rule, validate_system, Diagnostic, DiagnosticKind};
pub use error::{Error, Result};
pub use rules::{rule_contribution, rule_contributions};
pub use scaler::{Bounds, Dataset, Scaler};
pub use system::{
    Backend, CompletedInstance, Condition, DecisionPolicy, DecisionSystem, Instance, Model, Op, Outcome, Rule,
};

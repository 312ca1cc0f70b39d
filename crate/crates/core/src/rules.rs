//! Signed rule contributions from distances to a rule's decision boundaries.
//!
//! Every condition tests one feature against a threshold, so the boundary
//! component along feature `j` is the hyperplane `x_j = τ` and the projection
//! of the instance onto it differs only in coordinate `j`. The distance is
//! therefore `|x'_j - τ'|` in min-max scaled space. A condition contributes
//! `1 - d` when satisfied and `-(1 - d)` when violated: features close to a
//! boundary matter most, and the sign says which side of it the instance is on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaler::Scaler;
use crate::system::{CompletedInstance, Condition, Rule};

/// One value per feature of the completed instance, each in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleContributions {
    values: Vec<f64>,
}

impl RuleContributions {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, feature: usize) -> f64 {
        self.values[feature]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Scaled distance between a value and a condition's threshold, in `[0, 1]`.
pub fn boundary_distance(condition: &Condition, value: f64, scaler: &Scaler) -> Result<f64> {
    let x = scaler.scale(condition.feature, value)?;
    let t = scaler.scale(condition.feature, condition.threshold)?;
    Ok((x - t).abs().clamp(0.0, 1.0))
}

/// Contribution of one feature to `rule` at `completed`.
///
/// With several conditions on the same feature (an interval), a violated
/// condition dominates: the result is `-max(1 - d)` over the violated ones,
/// otherwise `max(1 - d)` over all of them. Features the rule does not
/// mention contribute `0`.
pub fn rule_contribution(rule: &Rule, feature: usize, completed: &CompletedInstance, scaler: &Scaler) -> Result<f64> {
    let value = *completed
        .values()
        .get(feature)
        .ok_or_else(|| Error::UnknownFeature(format!("#{feature}")))?;
    if feature >= scaler.len() {
        return Err(Error::UnscaledFeature(format!("#{feature}")));
    }

    let mut satisfied: Option<f64> = None;
    let mut violated: Option<f64> = None;
    for c in rule.conditions_on(feature) {
        let closeness = 1.0 - boundary_distance(c, value, scaler)?;
        let slot = if c.is_satisfied(value) {
            &mut satisfied
        } else {
            &mut violated
        };
        *slot = Some(slot.map_or(closeness, |m: f64| m.max(closeness)));
    }

    let r = match (violated, satisfied) {
        (Some(m), _) => -m,
        (None, Some(m)) => m,
        (None, None) => 0.0,
    };
    // Collapse -0.0 so reports do not carry a signed zero.
    Ok(if r == 0.0 { 0.0 } else { r })
}

/// [`rule_contribution`] for every feature of the completed instance.
pub fn rule_contributions(rule: &Rule, completed: &CompletedInstance, scaler: &Scaler) -> Result<RuleContributions> {
    let values = (0..completed.len())
        .map(|j| rule_contribution(rule, j, completed, scaler))
        .collect::<Result<_>>()?;
    Ok(RuleContributions { values })
}

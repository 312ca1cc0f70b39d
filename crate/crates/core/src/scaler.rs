//! Min-max normalization over input and internal features.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{Diagnostic, DiagnosticKind};
use crate::error::{Error, Result};
use crate::system::{Backend, DecisionSystem};

/// Reference rows over the input features.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dataset("a dataset needs at least one row".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Dataset(format!(
                    "row {i} has {} values for {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!(
                    "row {i}, column `{}` is not finite",
                    columns[j]
                )));
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Column means, summed in row order.
    pub fn means(&self) -> Vec<f64> {
        let q = self.rows.len() as f64;
        (0..self.width())
            .map(|j| self.rows.iter().map(|r| r[j]).sum::<f64>() / q)
            .collect()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// At most `max_rows` rows drawn without replacement, kept in their
    /// original order. Returns the dataset unchanged when it is small enough.
    pub fn subsample(&self, max_rows: usize, seed: u64) -> Self {
        if self.rows.len() <= max_rows {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, self.rows.len(), max_rows.max(1)).into_vec();
        picked.sort_unstable();
        self.select(&picked)
    }

    fn check_columns(&self, system: &DecisionSystem) -> Result<()> {
        let expected: Vec<&str> = system.input_features().iter().map(|f| f.name.as_str()).collect();
        let actual: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        if expected != actual {
            return Err(Error::Dataset(format!(
                "columns {actual:?} do not match input features {expected:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        debug_assert!(min <= max);
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.max == self.min
    }

    fn extend(self, v: f64) -> Self {
        Self::new(self.min.min(v), self.max.max(v))
    }

    fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut it = values.into_iter();
        let first = it.next()?;
        Some(it.fold(Self::new(first, first), Self::extend))
    }
}

/// Per-feature bounds for all `D+N` features of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    names: Vec<String>,
    bounds: Vec<Bounds>,
}

impl Scaler {
    pub fn from_bounds(names: Vec<String>, bounds: Vec<Bounds>) -> Result<Self> {
        if names.len() != bounds.len() {
            return Err(Error::Dimension {
                expected: names.len(),
                actual: bounds.len(),
            });
        }
        if let Some(i) = bounds
            .iter()
            .position(|b| !(b.min.is_finite() && b.max.is_finite() && b.min <= b.max))
        {
            return Err(Error::Dataset(format!("invalid bounds for `{}`", names[i])));
        }
        Ok(Self { names, bounds })
    }

    /// Input bounds are column extrema of `dataset`; internal bounds are
    /// extrema of each model's predictions over the same rows.
    pub fn fit(system: &DecisionSystem, dataset: &Dataset) -> Result<Self> {
        dataset.check_columns(system)?;
        let mut bounds: Vec<Bounds> = (0..dataset.width())
            .map(|j| Bounds::of(dataset.rows().iter().map(|r| r[j])).expect("dataset is nonempty"))
            .collect();
        for m in system.models() {
            let ys = m.predict_batch(dataset.rows())?;
            bounds.push(Bounds::of(ys).expect("dataset is nonempty"));
        }
        Self::from_bounds(names(system), bounds)
    }

    /// Exact ranges over the box `input_bounds` for linear and stump models.
    pub fn analytic(system: &DecisionSystem, input_bounds: &[Bounds]) -> Result<Self> {
        if input_bounds.len() != system.input_count() {
            return Err(Error::Dimension {
                expected: system.input_count(),
                actual: input_bounds.len(),
            });
        }
        let mut bounds = input_bounds.to_vec();
        for m in system.models() {
            let range = match &m.backend {
                Backend::Linear(lin) => {
                    let (mut lo, mut hi) = (lin.intercept, lin.intercept);
                    for (w, &i) in lin.coefficients.iter().zip(&m.input_features) {
                        let b = input_bounds[i];
                        let (a, c) = (w * b.min, w * b.max);
                        lo += a.min(c);
                        hi += a.max(c);
                    }
                    Bounds::new(lo, hi)
                }
                // Sums per-stump extrema over the reachable leaves; exact when
                // no two stumps split the same input.
                Backend::Stumps(stumps) => stumps.iter().fold(Bounds::new(0.0, 0.0), |acc, s| {
                    let b = input_bounds[m.input_features[s.input]];
                    let mut leaves = Vec::with_capacity(2);
                    if b.min <= s.threshold {
                        leaves.push(s.below);
                    }
                    if b.max > s.threshold {
                        leaves.push(s.above);
                    }
                    let leaf = Bounds::of(leaves).expect("at least one leaf is reachable");
                    Bounds::new(acc.min + leaf.min, acc.max + leaf.max)
                }),
                Backend::External(_) => {
                    return Err(Error::BackendMismatch(format!(
                        "model `{}` is external; analytic bounds need a linear or stump backend",
                        m.name
                    )))
                }
            };
            bounds.push(range);
        }
        Self::from_bounds(names(system), bounds)
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn get(&self, feature: usize) -> Result<Bounds> {
        self.bounds
            .get(feature)
            .copied()
            .ok_or_else(|| Error::UnknownFeature(format!("#{feature}")))
    }

    /// `(value - min) / (max - min)` clamped to `[0, 1]`; `0` for a
    /// degenerate feature.
    pub fn scale(&self, feature: usize, value: f64) -> Result<f64> {
        let b = self.get(feature)?;
        if b.is_degenerate() {
            return Ok(0.0);
        }
        Ok(((value - b.min) / (b.max - b.min)).clamp(0.0, 1.0))
    }

    /// Inverse of the affine part of [`Scaler::scale`], without clamping.
    pub fn unscale(&self, feature: usize, scaled: f64) -> Result<f64> {
        let b = self.get(feature)?;
        Ok(b.min + scaled * (b.max - b.min))
    }

    /// One warning per feature whose reference range is empty.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.names
            .iter()
            .zip(&self.bounds)
            .filter(|(_, b)| b.is_degenerate())
            .map(|(n, b)| {
                Diagnostic::warning(
                    DiagnosticKind::DegenerateFeature,
                    format!("feature {n}"),
                    format!("constant at {} in the reference data; its scaled value is 0", b.min),
                )
            })
            .collect()
    }
}

fn names(system: &DecisionSystem) -> Vec<String> {
    system.features().iter().map(|f| f.name.clone()).collect()
}

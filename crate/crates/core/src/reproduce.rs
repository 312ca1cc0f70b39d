//! Built-in demonstration systems over three uniform inputs, with the
//! expected contributions for each case.

use std::fmt::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::aggregate::{explain, Background, Explanation};
use crate::attribution::ExactShapley;
use crate::baselines::{run_baseline, BaselineConfig, BaselineMethod};
use crate::config::{
    BackendConfig, DatasetFormat, DatasetRef, FeatureConfig, ModelConfig, PolicyConfig, RuleConfig, SystemConfig,
};
use crate::dataset::{uniform_dataset, write_csv};
use crate::error::{Error, Result};
use crate::scaler::{Bounds, Dataset, Scaler};
use crate::system::{Condition, DecisionPolicy, DecisionSystem, Instance, Model, Op, Rule};

pub const SAMPLES: usize = 1000;
pub const ANALYTIC_TOLERANCE: f64 = 1e-9;
pub const EMPIRICAL_TOLERANCE: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    RulesGeneric,
    RulesViolation,
    Hybrid,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::RulesGeneric, Case::RulesViolation, Case::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            Case::RulesGeneric => "rules-generic",
            Case::RulesViolation => "rules-violation",
            Case::Hybrid => "hybrid",
        }
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown case `{s}` (expected rules-generic, rules-violation or hybrid)"
            ))
        })
    }
}

pub fn input_names() -> Vec<String> {
    vec!["x1".into(), "x2".into(), "x3".into()]
}

/// `1000 x 3` uniform draws in `[0, 1)`.
pub fn reference_data(seed: u64) -> Dataset {
    uniform_dataset(input_names(), &[Bounds::unit(); 3], SAMPLES, seed).expect("unit bounds are valid")
}

/// `R1: x1 <= 0.5 and x2 >= 0.6 and x3 >= 0.2 -> 1`, default `0`.
pub fn rules_system() -> DecisionSystem {
    let r1 = Rule::new(
        "R1",
        vec![
            Condition::new(0, Op::Le, 0.5),
            Condition::new(1, Op::Ge, 0.6),
            Condition::new(2, Op::Ge, 0.2),
        ],
        1.0,
    )
    .expect("valid rule");
    DecisionSystem::new(
        input_names(),
        vec![],
        DecisionPolicy::new(vec![r1], 0.0).expect("valid policy"),
    )
    .expect("valid system")
}

/// `m1 = 2 x2 + x3`, `m2 = 700 x1 + 1000 x2 - 500 x3` and
/// `R3: x1 <= 0.5 and x2 >= 0.6 and m1 >= 1 and m2 <= 600 -> 1`, default `0`.
pub fn hybrid_system() -> DecisionSystem {
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
    .expect("valid rule");
    DecisionSystem::new(
        input_names(),
        vec![m1, m2],
        DecisionPolicy::new(vec![r3], 0.0).expect("valid policy"),
    )
    .expect("valid system")
}

/// The same system as [`setup`] builds, as a configuration document that
/// reads its data from `data.csv` next to it.
pub fn case_config(case: Case) -> SystemConfig {
    let linear = |name: &str, inputs: &[&str], coefficients: Vec<f64>| ModelConfig {
        name: name.into(),
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        backend: BackendConfig::Linear {
            coefficients,
            intercept: 0.0,
        },
    };
    let (models, rule) = match case {
        Case::RulesGeneric | Case::RulesViolation => (
            vec![],
            RuleConfig {
                name: "R1".into(),
                dsl: "if x1 <= 0.5 and x2 >= 0.6 and x3 >= 0.2 then 1 else 0".into(),
            },
        ),
        Case::Hybrid => (
            vec![
                linear("m1", &["x2", "x3"], vec![2.0, 1.0]),
                linear("m2", &["x1", "x2", "x3"], vec![700.0, 1000.0, -500.0]),
            ],
            RuleConfig {
                name: "R3".into(),
                dsl: "if x1 <= 0.5 and x2 >= 0.6 and m1 >= 1 and m2 <= 600 then 1 else 0".into(),
            },
        ),
    };
    SystemConfig {
        features: input_names().into_iter().map(|name| FeatureConfig { name }).collect(),
        models,
        policy: PolicyConfig {
            rules: vec![rule],
            default: None,
        },
        dataset: Some(DatasetRef {
            path: "data.csv".into(),
            format: DatasetFormat::Csv,
        }),
    }
}

/// Writes `system.json`, `instance.json` and `data.csv` for a case.
pub fn export(case: Case, seed: u64, dir: &Path) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| Error::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let system = dir.join("system.json");
    std::fs::write(&system, case_config(case).to_json() + "\n").map_err(io(&system))?;
    let instance = dir.join("instance.json");
    let values = serde_json::to_string(setup(case).instance.values())?;
    std::fs::write(&instance, values + "\n").map_err(io(&instance))?;
    let data = dir.join("data.csv");
    let file = std::fs::File::create(&data).map_err(io(&data))?;
    write_csv(&reference_data(seed), std::io::BufWriter::new(file))
}

pub struct CaseSetup {
    pub system: DecisionSystem,
    pub instance: Instance,
    pub rule: &'static str,
}

pub fn setup(case: Case) -> CaseSetup {
    let (system, values, rule) = match case {
        Case::RulesGeneric => (rules_system(), vec![0.6, 0.1, 0.4], "R1"),
        Case::RulesViolation => (rules_system(), vec![0.51, 0.6, 0.2], "R1"),
        Case::Hybrid => (hybrid_system(), vec![0.6, 0.1, 0.4], "R3"),
    };
    CaseSetup {
        system,
        instance: Instance::new(values).expect("finite instance"),
        rule,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub quantity: String,
    pub actual: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(quantity: impl Into<String>, actual: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            quantity: quantity.into(),
            actual,
            expected,
            tolerance,
            pass: (actual - expected).abs() <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub method: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reproduction {
    pub case: Case,
    pub analytic_bounds: bool,
    pub seed: u64,
    pub explanation: Explanation,
    pub baselines: Vec<Column>,
    /// Values published for this case, for side-by-side reading only.
    pub published: Vec<Column>,
    pub checks: Vec<Check>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn scaler_for(system: &DecisionSystem, data: &Dataset, analytic: bool) -> Result<Scaler> {
    if analytic {
        Scaler::analytic(system, &[Bounds::unit(); 3])
    } else {
        Scaler::fit(system, data)
    }
}

pub fn reproduce(case: Case, analytic_bounds: bool, seed: u64) -> Result<Reproduction> {
    let CaseSetup { system, instance, rule } = setup(case);
    let data = reference_data(seed);
    let scaler = scaler_for(&system, &data, analytic_bounds)?;
    let background = Background::sample(&data, Background::DEFAULT_ROWS, seed);
    let explanation = explain(
        &system,
        &scaler,
        &instance,
        Some(rule),
        &ExactShapley::default(),
        &background,
    )?;

    let mut baselines = Vec::new();
    for method in [BaselineMethod::SystemShapley, BaselineMethod::SystemLime] {
        let attr = run_baseline(&system, &instance, &scaler, &data, &BaselineConfig::new(method, seed))?;
        baselines.push(Column {
            method: method.label().into(),
            values: attr.values,
        });
    }

    let tol = if analytic_bounds {
        ANALYTIC_TOLERANCE
    } else {
        EMPIRICAL_TOLERANCE
    };
    let col = |method: &str, values: &[f64]| Column {
        method: method.into(),
        values: values.to_vec(),
    };
    let mut checks = Vec::new();
    let published = match case {
        Case::RulesGeneric | Case::RulesViolation => {
            let expected = if case == Case::RulesGeneric {
                [-0.9, -0.5, 0.8]
            } else {
                [-0.99, 1.0, 1.0]
            };
            for (j, &x) in expected.iter().enumerate() {
                checks.push(Check::new(format!("e[x{}]", j + 1), explanation.e[j], x, tol));
            }
            if case == Case::RulesGeneric {
                vec![
                    col("smace", &[-0.9, -0.5, 0.8]),
                    col("shap", &[-0.08, -0.08, 0.02]),
                    col("lime", &[-0.21, -0.21, 0.04]),
                ]
            } else {
                vec![col("smace", &[-0.99, 1.0, 1.0])]
            }
        }
        Case::Hybrid => {
            let expected: [f64; 5] = if analytic_bounds {
                [
                    -0.9,
                    -0.5,
                    0.0,
                    -(1.0 - (1.0 / 3.0 - 0.2)),
                    1.0 - (0.5 - 820.0 / 2200.0),
                ]
            } else {
                [-0.90, -0.50, 0.00, -0.87, 0.86]
            };
            for (j, &x) in expected.iter().enumerate() {
                checks.push(Check::new(
                    format!("r[{}]", explanation.features[j]),
                    explanation.r[j],
                    x,
                    tol,
                ));
            }
            vec![col("smace", &[-0.82, -0.55, 0.07])]
        }
    };
    Ok(Reproduction {
        case,
        analytic_bounds,
        seed,
        explanation,
        baselines,
        published,
        checks,
    })
}

fn num(v: f64) -> String {
    format!("{:.4}", if v == 0.0 { 0.0 } else { v })
}

pub fn render(rep: &Reproduction) -> String {
    let ex = &rep.explanation;
    let d = ex.instance.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "case {} (rule {}, {} bounds, seed {})",
        rep.case.name(),
        ex.rule,
        if rep.analytic_bounds { "analytic" } else { "empirical" },
        rep.seed
    );
    let _ = writeln!(out, "instance {:?}, outcome {}", ex.instance, ex.outcome);
    out.push('\n');
    let mut header = format!("{:<8} {:>10} {:>10}", "feature", "value", "r");
    for b in &rep.baselines {
        let _ = write!(header, " {:>10}", b.method);
    }
    let _ = write!(header, " {:>10}", "smace");
    let _ = writeln!(out, "{header}");
    for j in 0..ex.features.len() {
        let _ = write!(
            out,
            "{:<8} {:>10} {:>10}",
            ex.features[j],
            num(ex.completed[j]),
            num(ex.r[j])
        );
        for b in &rep.baselines {
            let _ = write!(out, " {:>10}", if j < d { num(b.values[j]) } else { String::new() });
        }
        let _ = writeln!(out, " {:>10}", if j < d { num(ex.e[j]) } else { String::new() });
    }
    if !rep.published.is_empty() {
        out.push_str("\npublished:");
        for c in &rep.published {
            let vals: Vec<String> = c.values.iter().map(|v| format!("{v:.2}")).collect();
            let _ = write!(out, " {} ({})", c.method, vals.join(", "));
        }
        out.push('\n');
    }
    out.push('\n');
    for c in &rep.checks {
        let _ = writeln!(
            out,
            "{} {:<8} {:>10} expected {:>8} +/- {:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.quantity,
            num(c.actual),
            num(c.expected),
            c.tolerance
        );
    }
    let _ = writeln!(out, "{}", if rep.passed() { "PASS" } else { "FAIL" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_cases_pass() {
        for case in Case::ALL {
            let rep = reproduce(case, true, 0).unwrap();
            assert!(rep.passed(), "{}", render(&rep));
        }
    }

    #[test]
    fn empirical_cases_pass() {
        for case in Case::ALL {
            let rep = reproduce(case, false, 0).unwrap();
            assert!(rep.passed(), "{}", render(&rep));
        }
    }

    #[test]
    fn configs_match_built_systems() {
        for case in Case::ALL {
            let built = case_config(case).build().unwrap();
            let direct = setup(case).system;
            assert_eq!(built.features(), direct.features());
            assert_eq!(built.policy(), direct.policy());
            let x = [vec![0.3, 0.7, 0.2], vec![0.6, 0.1, 0.4]];
            assert_eq!(built.complete_batch(&x).unwrap(), direct.complete_batch(&x).unwrap());
        }
    }

    #[test]
    fn case_names_round_trip() {
        for c in Case::ALL {
            assert_eq!(c.name().parse::<Case>().unwrap(), c);
        }
        assert!("table-9".parse::<Case>().is_err());
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hybrid_explain::attribution::{AttributionEngine, ExactShapley, LinearShapley};
use hybrid_explain::baselines::{run_baseline, BaselineConfig, BaselineMethod, LimeSampling};
use hybrid_explain::config::{load_system, parse_instance, read_config, LoadedSystem};
use hybrid_explain::dsl::validate_system;
use hybrid_explain::report::{comparison_table, explanation_table, to_json, Comparison, MethodColumn};
use hybrid_explain::reproduce::{render, reproduce, Case};
use hybrid_explain::{explain, load_dataset, Background, Dataset, Error, Instance, Scaler};

#[derive(Parser)]
#[command(
    name = "hybrid-explain",
    version,
    about = "Explain decisions of rule policies over model outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a system configuration and print its diagnostics.
    Validate {
        #[arg(long)]
        system: PathBuf,
    },
    /// Explain one decision.
    Explain {
        #[command(flatten)]
        input: InputArgs,
        /// Rule to explain; defaults to the triggered rule, then the first rule.
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
        backend: EngineArg,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Compare against whole-system Shapley and LIME.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_value = "smace,shap,lime")]
        methods: Vec<MethodArg>,
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, value_enum, default_value_t = LimeArg::Quartile)]
        lime_sampling: LimeArg,
        #[arg(long, default_value_t = 5000)]
        lime_samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Rebuild a demonstration system and check its contributions.
    Reproduce {
        #[arg(long, value_parser = parse_case)]
        case: Case,
        /// Scale with the exact feature ranges instead of the sampled data.
        #[arg(long)]
        analytic_bounds: bool,
        #[arg(long, env = "SMACE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Also write `system.json`, `instance.json` and `data.csv` here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct InputArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    /// Reference data; overrides the dataset named in the configuration.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, env = "SMACE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Background::DEFAULT_ROWS)]
    background_size: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Linear,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Smace,
    Shap,
    Lime,
}

#[derive(Clone, Copy, ValueEnum)]
enum LimeArg {
    Quartile,
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn parse_case(s: &str) -> Result<Case, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Loaded {
    system: LoadedSystem,
    instance: Instance,
    data: Dataset,
    scaler: Scaler,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let system = load_system(&input.system).with_context(|| format!("loading {}", input.system.display()))?;
    let text =
        std::fs::read_to_string(&input.instance).with_context(|| format!("reading {}", input.instance.display()))?;
    let instance =
        parse_instance(&text, &system.system).with_context(|| format!("parsing {}", input.instance.display()))?;
    let data = match (&input.dataset, &system.dataset) {
        (Some(path), _) => load_dataset(path, Default::default())?,
        (None, Some(d)) => d.clone(),
        (None, None) => bail!("no reference data: add `dataset` to the configuration or pass --dataset"),
    };
    let scaler = Scaler::fit(&system.system, &data)?;
    for d in scaler.diagnostics() {
        eprintln!("{d}");
    }
    Ok(Loaded {
        system,
        instance,
        data,
        scaler,
    })
}

fn write_out(text: &str) {
    print!("{text}");
}

fn validate(path: &Path) -> Result<bool> {
    let config = read_config(path).with_context(|| format!("loading {}", path.display()))?;
    let diags = validate_system(&config);
    for d in &diags {
        println!("{d}");
    }
    let ok = !diags.iter().any(|d| d.is_error());
    if diags.is_empty() {
        println!("ok");
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { system } => Ok(if validate(&system)? {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }),
        Command::Explain {
            input,
            rule,
            backend,
            format,
        } => {
            let l = load(&input)?;
            let engine: &dyn AttributionEngine = match backend {
                EngineArg::Exact => &ExactShapley::default(),
                EngineArg::Linear => &LinearShapley,
            };
            let background = Background::sample(&l.data, input.background_size.max(1), input.seed);
            let ex = explain(
                &l.system.system,
                &l.scaler,
                &l.instance,
                rule.as_deref(),
                engine,
                &background,
            )?;
            write_out(&match format {
                Format::Table => explanation_table(&ex),
                Format::Json => to_json(&ex),
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            input,
            methods,
            rule,
            lime_sampling,
            lime_samples,
            format,
        } => {
            let l = load(&input)?;
            let sys = &l.system.system;
            let mut columns = Vec::new();
            for m in methods {
                let column = match m {
                    MethodArg::Smace => {
                        let background = Background::sample(&l.data, input.background_size.max(1), input.seed);
                        let ex = explain(
                            sys,
                            &l.scaler,
                            &l.instance,
                            rule.as_deref(),
                            &ExactShapley::default(),
                            &background,
                        )?;
                        MethodColumn {
                            method: "smace".into(),
                            values: ex.e,
                            degenerate: false,
                        }
                    }
                    MethodArg::Shap | MethodArg::Lime => {
                        let method = if m == MethodArg::Shap {
                            BaselineMethod::SystemShapley
                        } else {
                            BaselineMethod::SystemLime
                        };
                        let mut cfg = BaselineConfig::new(method, input.seed);
                        cfg.background_size = input.background_size;
                        cfg.lime.num_samples = lime_samples;
                        cfg.lime.sampling = match lime_sampling {
                            LimeArg::Quartile => LimeSampling::Quartile,
                            LimeArg::Gaussian => LimeSampling::Gaussian,
                        };
                        let a = run_baseline(sys, &l.instance, &l.scaler, &l.data, &cfg)?;
                        MethodColumn {
                            method: method.label().into(),
                            values: a.values,
                            degenerate: a.degenerate,
                        }
                    }
                };
                columns.push(column);
            }
            let cmp = Comparison {
                features: sys.input_features().iter().map(|f| f.name.clone()).collect(),
                instance: l.instance.values().to_vec(),
                seed: input.seed,
                methods: columns,
            };
            write_out(&match format {
                Format::Table => comparison_table(&cmp),
                Format::Json => to_json(&cmp),
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Reproduce {
            case,
            analytic_bounds,
            seed,
            format,
            export,
        } => {
            if let Some(dir) = export {
                hybrid_explain::reproduce::export(case, seed, &dir)?;
            }
            let rep = reproduce(case, analytic_bounds, seed)?;
            write_out(&match format {
                Format::Table => render(&rep),
                Format::Json => to_json(&rep),
            });
            Ok(if rep.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<Error>() {
                Some(Error::RuleNotInPolicy(_)) => 2,
                Some(Error::InvalidSystem(_)) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

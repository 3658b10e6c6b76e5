//! Batch command-line surface over the causal-logic kernel.
//!
//! Exit codes: 0 success / query true, 1 query false or validity
//! violation, 2 usage or parse errors, 3 internal invariant breach.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stacl_cli::driver;
use stacl_cli::model::{distribution_json, ModelFile};
use stacl_cli::prooffile::load_proof;
use stacl_cli::simpson;
use stacl_core::fuzz::{invalid_schemas, valid_schemas, FuzzConfig};
use stacl_core::graph::{self, DsepQuery};
use stacl_core::parse::{parse_assignments, parse_formula};
use stacl_core::proof::check_derivation;
use stacl_core::syntax::{CausalPred, Mode, VarTuple};
use stacl_core::world::World;

#[derive(Parser)]
#[command(name = "stacl", version, about = "Exact causal-logic kernel: model checking, graph queries, proof checking, soundness fuzzing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model file's generator (finite, closed, acyclic).
    Validate { model: PathBuf },
    /// Decide d-separation on the model's causal diagram.
    Dsep {
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// Conditioning variables; pass "" for the empty tuple.
        #[arg(long, default_value = "", value_delimiter = ',')]
        z: Vec<String>,
    },
    /// Evaluate a causal predicate (pa, npa, anc, nanc, allnanc, dsep).
    Pred {
        model: PathBuf,
        #[arg(long)]
        pred: String,
        #[arg(long, value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        c: Option<Vec<String>>,
    },
    /// Apply an intervention to the model's generator and write the result.
    Intervene {
        model: PathBuf,
        #[arg(long, value_parser = ["eager", "lazy"])]
        mode: String,
        /// Assignment like x=c1; repeatable.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Post-intervention distribution of a variable tuple.
    Effect {
        model: PathBuf,
        /// Assignment like x=c1; repeatable.
        #[arg(long = "do", required = true)]
        dos: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        on: Vec<String>,
    },
    /// Check a formula against the model's base world.
    Check {
        model: PathBuf,
        #[arg(short = 'f', long)]
        formula: PathBuf,
    },
    /// Check a derivation file.
    Prove { proof: PathBuf },
    /// Run the soundness harness for one schema (or `all`).
    Fuzz {
        #[arg(long)]
        schema: String,
        #[arg(long, default_value_t = 500)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minimum non-vacuous trials before targeted top-up stops.
        #[arg(long, default_value_t = 100)]
        min_nonvacuous: u32,
    },
    /// Reproduce the drug-efficacy walkthrough end to end.
    Simpson {
        /// Model file (defaults to the bundled drug model next to the binary's fixtures).
        #[arg(default_value = "fixtures/drug.json")]
        model: PathBuf,
    },
}

#[derive(Args)]
struct Empty {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn tuple_of(parts: &[String]) -> anyhow::Result<VarTuple> {
    let cleaned: Vec<String> = parts
        .iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    VarTuple::new(cleaned).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Accepts `x=c1` (a declared constant) or `x=1` (a raw domain value,
/// resolved to the first declared constant with that value).
fn assigns_of(sets: &[String], file: &ModelFile) -> anyhow::Result<stacl_core::syntax::Assignments> {
    let sig = file.signature();
    let resolve = |s: &str| -> anyhow::Result<String> {
        let Some((var, val)) = s.split_once('=') else {
            anyhow::bail!("malformed assignment `{s}`: expected var=const");
        };
        let val = val.trim();
        if file.constants.contains_key(val) {
            return Ok(format!("{var}:={val}"));
        }
        if let Ok(v) = val.parse::<u8>() {
            if let Some((name, _)) = file.constants.iter().find(|(_, &cv)| cv == v) {
                return Ok(format!("{var}:={name}"));
            }
        }
        anyhow::bail!("`{val}` is neither a declared constant nor a domain value with one")
    };
    let joined = format!(
        "[{}]",
        sets.iter()
            .map(|s| resolve(s))
            .collect::<anyhow::Result<Vec<_>>>()?
            .join(",")
    );
    parse_assignments(&joined, &sig).map_err(|e| anyhow::anyhow!("{e}"))
}

fn bool_exit(b: bool, payload: serde_json::Value) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    if b {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    Ok(match cli.command {
        Command::Validate { model } => {
            let file = ModelFile::load(&model)?;
            match file.to_model() {
                Ok(m) => {
                    let report = serde_json::json!({
                        "ok": true,
                        "id": m.base.id,
                        "variables": m.base.dom().as_slice(),
                    });
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    let report = serde_json::json!({ "ok": false, "violation": e.to_string() });
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    ExitCode::from(1)
                }
            }
        }
        Command::Dsep { model, x, y, z } => {
            let file = ModelFile::load(&model)?;
            let m = file.to_model()?;
            let d = m.base.to_diagram();
            let q = DsepQuery::new(tuple_of(&x)?, tuple_of(&y)?, tuple_of(&z)?)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let fast = graph::d_separated(&d, &q).map_err(|e| anyhow::anyhow!("{e}"))?;
            let naive = graph::d_separated_naive(&d, &q).map_err(|e| anyhow::anyhow!("{e}"))?;
            if fast != naive {
                eprintln!("internal error: d-separation deciders disagree");
                return Ok(ExitCode::from(3));
            }
            bool_exit(fast, serde_json::json!({ "dsep": fast }))
        }
        Command::Pred { model, pred, a, b, c } => {
            let file = ModelFile::load(&model)?;
            let m = file.to_model()?;
            let d = m.base.to_diagram();
            let Some(p) = CausalPred::from_name(&pred) else {
                anyhow::bail!("unknown predicate `{pred}`");
            };
            let mut args = vec![tuple_of(&a)?, tuple_of(&b)?];
            if let Some(c) = c {
                args.push(tuple_of(&c)?);
            }
            let holds =
                graph::eval_causal_pred(&d, p, &args).map_err(|e| anyhow::anyhow!("{e}"))?;
            bool_exit(holds, serde_json::json!({ pred: holds }))
        }
        Command::Intervene { model, mode, sets, output } => {
            let file = ModelFile::load(&model)?;
            let m = file.to_model()?;
            let assigns = assigns_of(&sets, &file)?;
            let mode = if mode == "eager" { Mode::Eager } else { Mode::Lazy };
            let g = m.base.intervene(mode, &assigns).map_err(|e| anyhow::anyhow!("{e}"))?;
            let out = ModelFile::from_model(&m, &g);
            out.save(&output)?;
            println!("{}", serde_json::json!({ "written": output, "id": g.id }));
            ExitCode::SUCCESS
        }
        Command::Effect { model, dos, on } => {
            let file = ModelFile::load(&model)?;
            let m = file.to_model()?;
            let assigns = assigns_of(&dos, &file)?;
            let w = World::base(m.clone()).map_err(|e| anyhow::anyhow!("{e}"))?;
            let y = tuple_of(&on)?;
            let via_world = w.causal_effect(&assigns, &y).map_err(|e| anyhow::anyhow!("{e}"))?;
            let via_truncation =
                stacl_core::world::truncated_factorization(&m, &assigns, &y)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
            if via_world != via_truncation {
                eprintln!("internal error: effect routes disagree");
                return Ok(ExitCode::from(3));
            }
            println!("{}", serde_json::to_string_pretty(&distribution_json(&via_world))?);
            ExitCode::SUCCESS
        }
        Command::Check { model, formula } => {
            let file = ModelFile::load(&model)?;
            let m = file.to_model()?;
            let src = std::fs::read_to_string(&formula)?;
            let f = parse_formula(src.trim(), &file.signature()).map_err(|e| anyhow::anyhow!("{e}"))?;
            let w = World::base(m).map_err(|e| anyhow::anyhow!("{e}"))?;
            let holds = w.satisfies(&f).map_err(|e| anyhow::anyhow!("{e}"))?;
            bool_exit(holds, serde_json::json!({ "satisfied": holds }))
        }
        Command::Prove { proof } => {
            let loaded = load_proof(&proof)?;
            match check_derivation(&loaded.root, Some(&loaded.model.base)) {
                Ok(()) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "ok": true,
                            "conclusion": loaded.root.judgment.conclusion.to_string(),
                        })
                    );
                    ExitCode::SUCCESS
                }
                Err(r) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "ok": false,
                            "at": r.path_string(),
                            "reason": r.reason,
                        })
                    );
                    ExitCode::from(1)
                }
            }
        }
        Command::Fuzz { schema, trials, seed, min_nonvacuous } => {
            let cfg = FuzzConfig {
                trials,
                seed,
                min_nonvacuous,
                ..FuzzConfig::default()
            };
            let schemas: Vec<String> = if schema == "all" {
                valid_schemas()
                    .into_iter()
                    .map(String::from)
                    .chain(invalid_schemas().into_iter().map(String::from))
                    .collect()
            } else {
                vec![schema]
            };
            let mut ok = true;
            let mut reports = Vec::new();
            for s in &schemas {
                let search = invalid_schemas().contains(&s.as_str());
                let report = if search {
                    driver::run_counterexample(s, &cfg)
                } else {
                    driver::run_validity(s, &cfg)
                };
                // valid schemas must not break; invalid ones must
                ok &= if search {
                    report.violations > 0
                } else {
                    report.violations == 0
                };
                reports.push(driver::report_json(&report, &cfg, search));
            }
            let payload = if reports.len() == 1 {
                serde_json::to_value(&reports[0])?
            } else {
                serde_json::to_value(&reports)?
            };
            println!("{}", serde_json::to_string_pretty(&payload)?);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Simpson { model } => match simpson::run(&model) {
            Ok(report) => {
                println!("{}", serde_json::to_string_pretty(&report)?);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("simpson walkthrough failed: {e:#}");
                ExitCode::from(3)
            }
        },
    })
}

//! Parallel driver for the soundness harness: runs a schema's trials over
//! rayon, merges deterministically by trial index, and renders reports as
//! JSON.

use rayon::prelude::*;
use serde::Serialize;

use stacl_core::fuzz::{
    self, counterexample_trial, validity_trial, FuzzConfig, FuzzReport, TrialResult,
};

use crate::model::ModelFile;

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub schema: String,
    pub mode: &'static str,
    pub trials: u32,
    pub evaluated: u32,
    pub non_vacuous: u32,
    pub violations: u32,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_counterexample: Option<CounterexampleJson>,
}

#[derive(Debug, Serialize)]
pub struct CounterexampleJson {
    pub trial: u32,
    pub world_seed: u64,
    pub formula: String,
    /// The offending world in the model file format, ready to be saved as
    /// a regression fixture.
    pub world: ModelFile,
}

/// Validity mode: free trials first, then targeted top-up toward the
/// non-vacuity quota. Trials are independent and merged by index.
pub fn run_validity(schema: &str, cfg: &FuzzConfig) -> FuzzReport {
    let mut results: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| validity_trial(schema, cfg, t, false))
        .collect();
    let non_vacuous = results.iter().filter(|r| r.non_vacuous).count() as u32;
    if non_vacuous < cfg.min_nonvacuous {
        let budget = cfg.trials * 4;
        let extra: Vec<TrialResult> = (cfg.trials..budget)
            .into_par_iter()
            .map(|t| validity_trial(schema, cfg, t, true))
            .collect();
        let mut count = non_vacuous;
        for r in extra {
            if count >= cfg.min_nonvacuous {
                break;
            }
            if r.non_vacuous {
                count += 1;
            }
            results.push(r);
        }
    }
    FuzzReport::from_trials(schema, &results)
}

/// Counterexample mode: parallel search in chunks, stopping at the first
/// chunk containing a re-verified counterexample (lowest trial wins).
pub fn run_counterexample(schema: &str, cfg: &FuzzConfig) -> FuzzReport {
    const CHUNK: u32 = 64;
    let mut results: Vec<TrialResult> = Vec::new();
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + CHUNK).min(cfg.trials);
        let chunk: Vec<TrialResult> = (start..end)
            .into_par_iter()
            .map(|t| counterexample_trial(schema, cfg, t))
            .collect();
        let hit = chunk.iter().any(|r| r.violation.is_some());
        results.extend(chunk);
        if hit {
            break;
        }
        start = end;
    }
    // Trim everything after the first hit so reports are deterministic.
    if let Some(pos) = results.iter().position(|r| r.violation.is_some()) {
        results.truncate(pos + 1);
    }
    FuzzReport::from_trials(schema, &results)
}

pub fn report_json(report: &FuzzReport, cfg: &FuzzConfig, search_mode: bool) -> ReportJson {
    let first_counterexample = report.first_violation.as_ref().map(|r| {
        // reconstruct the trial's world exactly as it was sampled
        let force_positive = !search_mode && (r.trial >= cfg.trials || r.trial % 4 != 3);
        let model = fuzz::sample_model(cfg, r.world_seed, force_positive, search_mode)
            .as_ref()
            .clone();
        let file = ModelFile::from_model(&model, &model.base);
        CounterexampleJson {
            trial: r.trial,
            world_seed: r.world_seed,
            formula: r.violation.as_ref().unwrap().to_string(),
            world: file,
        }
    });
    ReportJson {
        schema: report.schema.clone(),
        mode: if search_mode { "counterexample-search" } else { "validity" },
        trials: report.trials,
        evaluated: report.evaluated,
        non_vacuous: report.non_vacuous,
        violations: report.violations,
        seed: cfg.seed,
        first_counterexample,
    }
}

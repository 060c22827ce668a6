//! Multi-seed search experiments and the predictor-analysis harness.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use linas_core::metrics::{default_reference, hv_trace, normalized_hypervolume, HypervolumeTrace};
use linas_core::moea::sample_into_store;
use linas_core::objective::{LandscapeParams, MissingPolicy};
use linas_core::predictor::{analyze_predictors, featurize, PredictorReport};
use linas_core::rng::stream;
use linas_core::{
    run_linas, run_nsga2, run_random, EaConfig, EvaluationStore, Evaluator, LinasEvent, ObjectiveSpec, SearchSpace,
    SyntheticLandscape, TabularEvaluator,
};
use serde::Serialize;

use crate::config::{AlgorithmConfig, EvaluatorConfig, LoadedConfig};
use crate::error::{CliError, Result};
use crate::formats::{csv_write_error, csv_writer, read_tabular_csv, write_json_lines, write_store_csv, write_store_jsonl, write_trace_csv};

pub type DynEvaluator = Box<dyn Evaluator + Sync>;

pub fn build_evaluator(cfg: &LoadedConfig, space: &SearchSpace) -> Result<DynEvaluator> {
    let evaluator: DynEvaluator = match &cfg.config.evaluator {
        EvaluatorConfig::Synthetic { seed, rho, sigma, accuracy_range, latency_range } => {
            let params = LandscapeParams {
                seed: *seed,
                rho: *rho,
                sigma: *sigma,
                accuracy_range: *accuracy_range,
                latency_range: *latency_range,
            };
            Box::new(
                SyntheticLandscape::new(space.clone(), params)
                    .map_err(|e| CliError::Config(format!("`evaluator`: {e}")))?,
            )
        }
        EvaluatorConfig::Tabular { path, missing_policy } => {
            let rows = read_tabular_csv(&cfg.resolve(path))?;
            let policy: MissingPolicy = (*missing_policy).into();
            Box::new(
                TabularEvaluator::new(space.clone(), rows, policy)
                    .map_err(|e| CliError::Config(format!("`evaluator.path`: {e}")))?,
            )
        }
    };
    if evaluator.objective_count() != cfg.config.objectives.len() {
        return Err(CliError::Config(format!(
            "`objectives`: {} configured but the evaluator produces {}",
            cfg.config.objectives.len(),
            evaluator.objective_count()
        )));
    }
    Ok(evaluator)
}

/// One `(algorithm, seed)` pair.
#[derive(Debug, Clone)]
pub struct Arm {
    pub algorithm: usize,
    pub seed: u64,
}

/// Result of running one arm.
#[derive(Debug)]
pub struct ArmOutcome {
    pub name: &'static str,
    pub seed: u64,
    pub store: Option<EvaluationStore>,
    pub events: Vec<LinasEvent>,
    pub seconds: f64,
    pub error: Option<CliError>,
}

fn run_arm(cfg: &LoadedConfig, space: &SearchSpace, evaluator: &DynEvaluator, arm: &Arm) -> ArmOutcome {
    let objectives = cfg.objectives();
    let algorithm = &cfg.config.algorithms[arm.algorithm];
    let start = Instant::now();
    let mut events = Vec::new();
    let budget = cfg.config.budget;
    let mut store = EvaluationStore::new(space.clone(), objectives.len());
    let result: Result<()> = (|| {
        match algorithm {
            AlgorithmConfig::Linas(section) => {
                let lc = cfg.linas_config(section, space, arm.seed)?;
                let out = run_linas(space, &**evaluator, &objectives, &lc)?;
                store = out.store;
                events = out.events;
            }
            AlgorithmConfig::Nsga2(section) => {
                let ea = EaConfig {
                    population_size: section.population_size,
                    crossover_prob: section.crossover_prob,
                    mutation_prob: section.mutation_prob,
                    max_evaluations: budget,
                    seed: arm.seed,
                };
                run_nsga2(&**evaluator, &objectives, &ea, &mut store)?;
            }
            AlgorithmConfig::Random => {
                let ea = EaConfig { max_evaluations: budget, seed: arm.seed, ..EaConfig::default() };
                run_random(&**evaluator, &objectives, &ea, &mut store)?;
            }
        }
        Ok(())
    })();
    ArmOutcome {
        name: algorithm.name(),
        seed: arm.seed,
        store: (!store.is_empty()).then_some(store),
        events,
        seconds: start.elapsed().as_secs_f64(),
        error: result.err(),
    }
}

/// Runs arms on up to `threads` workers; outcomes come back in arm order.
pub fn run_arms(
    cfg: &LoadedConfig,
    space: &SearchSpace,
    evaluator: &DynEvaluator,
    arms: &[Arm],
    threads: usize,
) -> Vec<ArmOutcome> {
    let threads = threads.clamp(1, arms.len().max(1));
    if threads == 1 {
        return arms.iter().map(|a| run_arm(cfg, space, evaluator, a)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ArmOutcome>>> = Mutex::new((0..arms.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(arm) = arms.get(i) else { break };
                let outcome = run_arm(cfg, space, evaluator, arm);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(outcome);
            });
        }
    });
    slots.into_inner().expect("workers finished").into_iter().map(|o| o.expect("every arm ran")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub algorithm: String,
    pub seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub store: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<String>,
    pub evaluations: usize,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub space: String,
    /// Shared reference point (minimization convention) of every trace.
    pub reference: Option<Vec<f64>>,
    pub runs: Vec<ManifestEntry>,
}

/// Mean and standard error of a hypervolume at one evaluation count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub eval_count: usize,
    pub runs: usize,
    pub hv_mean: f64,
    pub hv_stderr: f64,
    pub normalized_hv_mean: f64,
    pub normalized_hv_stderr: f64,
}

#[derive(Debug)]
pub struct SearchReport {
    pub manifest: RunManifest,
    pub summary: Vec<SummaryRow>,
    pub outcomes: Vec<ArmOutcome>,
    /// Per-arm raw and normalized traces, `None` for arms without data.
    pub traces: Vec<Option<(HypervolumeTrace, HypervolumeTrace)>>,
    pub output_dir: PathBuf,
}

impl SearchReport {
    /// First failure, which decides the exit code.
    pub fn first_error(&self) -> Option<&CliError> {
        self.outcomes.iter().find_map(|o| o.error.as_ref())
    }
}

fn arm_stem(name: &str, seed: u64) -> String {
    format!("{name}_seed{seed}")
}

/// Runs every `(algorithm, seed)` arm and writes stores, traces, event logs,
/// `summary.csv` and `manifest.json` into the output directory. Failed arms
/// are recorded in the manifest; whatever they measured is still written.
pub fn cmd_search(cfg: &LoadedConfig, threads: usize) -> Result<SearchReport> {
    let space = cfg.space()?;
    let evaluator = build_evaluator(cfg, &space)?;
    let objectives = cfg.objectives();
    let out_dir = cfg.output_dir();
    fs::create_dir_all(&out_dir).map_err(CliError::io(&out_dir))?;

    let arms: Vec<Arm> = (0..cfg.config.algorithms.len())
        .flat_map(|algorithm| cfg.config.seeds.iter().map(move |&seed| Arm { algorithm, seed }))
        .collect();
    let outcomes = run_arms(cfg, &space, &evaluator, &arms, threads);

    let stores: Vec<&EvaluationStore> = outcomes.iter().filter_map(|o| o.store.as_ref()).collect();
    let two = objectives.len() == 2;
    let reference = if two && !stores.is_empty() { Some(default_reference(&stores, &objectives)?) } else { None };
    let normalized = match (&reference, stores.is_empty()) {
        (Some(_), false) => normalized_hypervolume(&stores, &objectives, cfg.config.trace_stride).ok(),
        _ => None,
    };

    let mut runs = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::with_capacity(outcomes.len());
    let mut k = 0;
    for o in &outcomes {
        let stem = arm_stem(o.name, o.seed);
        let mut entry = ManifestEntry {
            algorithm: o.name.to_string(),
            seed: o.seed,
            status: if o.error.is_none() { "ok".into() } else { "failed".into() },
            error: o.error.as_ref().map(ToString::to_string),
            store: None,
            trace: None,
            events: None,
            evaluations: o.store.as_ref().map_or(0, EvaluationStore::len),
            wall_time_seconds: o.seconds,
        };
        let mut trace_pair = None;
        if let Some(store) = &o.store {
            let store_name = format!("{stem}.jsonl");
            write_store_jsonl(&out_dir.join(&store_name), &objectives, store.records())?;
            write_store_csv(&out_dir.join(format!("{stem}.csv")), &objectives, store.records())?;
            entry.store = Some(store_name);
            if let Some(r) = &reference {
                let trace = hv_trace(store, &objectives, r, cfg.config.trace_stride)?;
                let trace_name = format!("{stem}_trace.csv");
                write_trace_csv(&out_dir.join(&trace_name), &trace)?;
                entry.trace = Some(trace_name);
                let norm = normalized.as_ref().map(|n| n[k].clone()).unwrap_or_default();
                trace_pair = Some((trace, norm));
            }
            k += 1;
        }
        if !o.events.is_empty() {
            let name = format!("{stem}_events.jsonl");
            let lines: Vec<EventLine> = o.events.iter().map(EventLine::from).collect();
            write_json_lines(&out_dir.join(&name), &lines)?;
            entry.events = Some(name);
        }
        runs.push(entry);
        traces.push(trace_pair);
    }

    let summary = summarize(&outcomes, &traces);
    write_summary(&out_dir.join("summary.csv"), &summary)?;
    let manifest = RunManifest {
        config_hash: cfg.hash.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        space: space.name().to_string(),
        reference,
        runs,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
    fs::write(&path, text + "\n").map_err(CliError::io(&path))?;

    Ok(SearchReport { manifest, summary, outcomes, traces, output_dir: out_dir })
}

#[derive(Debug, Serialize)]
struct EventLine<'a> {
    iteration: u32,
    phase: &'a str,
    detail: &'a str,
}

impl<'a> From<&'a LinasEvent> for EventLine<'a> {
    fn from(e: &'a LinasEvent) -> Self {
        EventLine { iteration: e.iteration, phase: e.phase, detail: &e.detail }
    }
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per algorithm, at every evaluation count reached by all of its runs.
fn summarize(outcomes: &[ArmOutcome], traces: &[Option<(HypervolumeTrace, HypervolumeTrace)>]) -> Vec<SummaryRow> {
    let mut names: Vec<&str> = Vec::new();
    for o in outcomes {
        if !names.contains(&o.name) {
            names.push(o.name);
        }
    }
    let mut rows = Vec::new();
    for name in names {
        let group: Vec<&(HypervolumeTrace, HypervolumeTrace)> = outcomes
            .iter()
            .zip(traces)
            .filter(|(o, _)| o.name == name)
            .filter_map(|(_, t)| t.as_ref())
            .collect();
        let Some(first) = group.first() else { continue };
        for &(count, _) in &first.0.points {
            let raw: Option<Vec<f64>> = group.iter().map(|t| t.0.at(count)).collect();
            let norm: Option<Vec<f64>> = group.iter().map(|t| t.1.at(count)).collect();
            let Some(raw) = raw else { continue };
            let (hv_mean, hv_stderr) = mean_stderr(&raw);
            let (normalized_hv_mean, normalized_hv_stderr) =
                norm.filter(|v| !v.is_empty()).map_or((f64::NAN, f64::NAN), |v| mean_stderr(&v));
            rows.push(SummaryRow {
                algorithm: name.to_string(),
                eval_count: count,
                runs: group.len(),
                hv_mean,
                hv_stderr,
                normalized_hv_mean,
                normalized_hv_stderr,
            });
        }
    }
    rows
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_write_error(path, e))?;
    }
    if rows.is_empty() {
        w.write_record([
            "algorithm",
            "eval_count",
            "runs",
            "hv_mean",
            "hv_stderr",
            "normalized_hv_mean",
            "normalized_hv_stderr",
        ])
        .map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Samples `max(train_sizes) + test_size` distinct configurations, measures
/// them, and runs the predictor protocol for every objective. Writes
/// `predictor_report.csv` (`objective,metric,kind,train_size,value`).
pub fn cmd_predictor_analysis(cfg: &LoadedConfig) -> Result<Vec<(ObjectiveSpec, PredictorReport)>> {
    let space = cfg.space()?;
    let evaluator = build_evaluator(cfg, &space)?;
    let objectives = cfg.objectives();
    let section = &cfg.config.predictor_analysis;
    let analysis = section.to_config()?;
    let needed = analysis.train_sizes.iter().copied().max().unwrap_or(0) + analysis.test_size;
    if space.cardinality() < needed.into() {
        return Err(CliError::Capacity(format!(
            "space {} has {} configurations, the protocol needs {needed}",
            space.name(),
            space.cardinality()
        )));
    }

    let mut store = EvaluationStore::new(space.clone(), objectives.len());
    let mut rng = stream(section.seed, "analysis-data", 0);
    sample_into_store(&mut store, &*evaluator, &objectives, needed, &mut rng, "analysis", 0)?;
    let x: Vec<Vec<f64>> =
        store.records().iter().map(|r| featurize(&space, &r.genotype)).collect::<linas_core::Result<_>>()?;

    let mut reports = Vec::with_capacity(objectives.len());
    for (k, spec) in objectives.iter().enumerate() {
        let y: Vec<f64> = store.records().iter().map(|r| r.values[k]).collect();
        reports.push((spec.clone(), analyze_predictors(&x, &y, &analysis)?));
    }

    let out_dir = cfg.output_dir();
    fs::create_dir_all(&out_dir).map_err(CliError::io(&out_dir))?;
    let path = out_dir.join("predictor_report.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["objective", "metric", "kind", "train_size", "value"]).map_err(|e| csv_write_error(&path, e))?;
    for (spec, report) in &reports {
        for (metric, pick) in [("mape", 0), ("kendall_tau", 1)] {
            for row in &report.rows {
                let value = if pick == 0 { row.mape_mean } else { row.tau_mean };
                w.write_record([
                    spec.name.clone(),
                    metric.to_string(),
                    row.kind.name().to_string(),
                    row.train_size.to_string(),
                    value.to_string(),
                ])
                .map_err(|e| csv_write_error(&path, e))?;
            }
        }
    }
    w.flush().map_err(CliError::io(&path))?;
    Ok(reports)
}

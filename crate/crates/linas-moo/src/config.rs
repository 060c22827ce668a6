//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use linas_core::objective::{LandscapeParams, MissingPolicy};
use linas_core::predictor::{AnalysisConfig, PredictorParams, SvrParams};
use linas_core::{BuiltinSpace, Direction, EaConfig, LinasConfig, ObjectiveSpec, PredictorKind, SearchSpace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in space name or path to a space JSON file.
    #[serde(default = "default_space")]
    pub space: String,
    #[serde(default)]
    pub evaluator: EvaluatorConfig,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<ObjectiveConfig>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
    #[serde(default)]
    pub predictor_analysis: AnalysisSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            space: default_space(),
            evaluator: EvaluatorConfig::default(),
            objectives: default_objectives(),
            algorithms: default_algorithms(),
            budget: default_budget(),
            seeds: default_seeds(),
            output_dir: default_output_dir(),
            trace_stride: default_stride(),
            predictor_analysis: AnalysisSection::default(),
        }
    }
}

fn default_space() -> String {
    "mobilenetv3_like".into()
}

fn default_objectives() -> Vec<ObjectiveConfig> {
    vec![
        ObjectiveConfig { name: "accuracy".into(), direction: DirectionConfig::Maximize },
        ObjectiveConfig { name: "latency".into(), direction: DirectionConfig::Minimize },
    ]
}

fn default_algorithms() -> Vec<AlgorithmConfig> {
    vec![
        AlgorithmConfig::Linas(LinasSection::default()),
        AlgorithmConfig::Nsga2(Nsga2Section::default()),
        AlgorithmConfig::Random,
    ]
}

fn default_budget() -> usize {
    250
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_output_dir() -> PathBuf {
    "results".into()
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorConfig {
    Synthetic {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default)]
        sigma: f64,
        #[serde(default = "default_accuracy_range")]
        accuracy_range: (f64, f64),
        #[serde(default = "default_latency_range")]
        latency_range: (f64, f64),
    },
    Tabular {
        path: PathBuf,
        #[serde(default)]
        missing_policy: MissingPolicyConfig,
    },
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig::Synthetic {
            seed: 0,
            rho: default_rho(),
            sigma: 0.0,
            accuracy_range: default_accuracy_range(),
            latency_range: default_latency_range(),
        }
    }
}

fn default_rho() -> f64 {
    LandscapeParams::default().rho
}

fn default_accuracy_range() -> (f64, f64) {
    LandscapeParams::default().accuracy_range
}

fn default_latency_range() -> (f64, f64) {
    LandscapeParams::default().latency_range
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicyConfig {
    #[default]
    Error,
    NearestReject,
}

impl From<MissingPolicyConfig> for MissingPolicy {
    fn from(p: MissingPolicyConfig) -> Self {
        match p {
            MissingPolicyConfig::Error => MissingPolicy::Error,
            MissingPolicyConfig::NearestReject => MissingPolicy::NearestReject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: String,
    pub direction: DirectionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConfig {
    #[serde(alias = "min")]
    Minimize,
    #[serde(alias = "max")]
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Linas(LinasSection),
    Nsga2(Nsga2Section),
    Random,
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Linas(_) => "linas",
            AlgorithmConfig::Nsga2(_) => "nsga2",
            AlgorithmConfig::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinasSection {
    #[serde(default = "default_population")]
    pub population_size: usize,
    /// Defaults to `budget / population_size`.
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default = "default_inner_evaluations")]
    pub inner_evaluations: usize,
    #[serde(default = "default_population")]
    pub inner_population_size: usize,
    #[serde(default = "default_crossover")]
    pub crossover_prob: f64,
    #[serde(default = "default_mutation")]
    pub mutation_prob: f64,
    /// One kind per objective; defaults depend on the space.
    #[serde(default)]
    pub predictors: Option<Vec<String>>,
    #[serde(default)]
    pub predictor: PredictorSection,
}

impl Default for LinasSection {
    fn default() -> Self {
        LinasSection {
            population_size: default_population(),
            iterations: None,
            inner_evaluations: default_inner_evaluations(),
            inner_population_size: default_population(),
            crossover_prob: default_crossover(),
            mutation_prob: default_mutation(),
            predictors: None,
            predictor: PredictorSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nsga2Section {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_crossover")]
    pub crossover_prob: f64,
    #[serde(default = "default_mutation")]
    pub mutation_prob: f64,
}

impl Default for Nsga2Section {
    fn default() -> Self {
        Nsga2Section {
            population_size: default_population(),
            crossover_prob: default_crossover(),
            mutation_prob: default_mutation(),
        }
    }
}

fn default_population() -> usize {
    50
}

fn default_inner_evaluations() -> usize {
    20_000
}

fn default_crossover() -> f64 {
    EaConfig::default().crossover_prob
}

fn default_mutation() -> f64 {
    EaConfig::default().mutation_prob
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSection {
    #[serde(default = "default_alpha")]
    pub ridge_alpha: f64,
    #[serde(default = "default_c")]
    pub svr_c: f64,
    #[serde(default = "default_epsilon")]
    pub svr_epsilon: f64,
    /// `None` means `1 / feature_dimension`.
    #[serde(default)]
    pub svr_gamma: Option<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

impl Default for PredictorSection {
    fn default() -> Self {
        PredictorSection {
            ridge_alpha: default_alpha(),
            svr_c: default_c(),
            svr_epsilon: default_epsilon(),
            svr_gamma: None,
            folds: default_folds(),
        }
    }
}

impl PredictorSection {
    pub fn params(&self, seed: u64) -> PredictorParams {
        PredictorParams {
            ridge_alpha: self.ridge_alpha,
            svr: SvrParams { c: self.svr_c, epsilon: self.svr_epsilon, gamma: self.svr_gamma, ..SvrParams::default() },
            folds: self.folds,
            seed,
        }
    }
}

fn default_alpha() -> f64 {
    PredictorParams::default().ridge_alpha
}

fn default_c() -> f64 {
    SvrParams::default().c
}

fn default_epsilon() -> f64 {
    SvrParams::default().epsilon
}

fn default_folds() -> usize {
    PredictorParams::default().folds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_train_sizes")]
    pub train_sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub predictor: PredictorSection,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            train_sizes: default_train_sizes(),
            trials: default_trials(),
            test_size: default_test_size(),
            kinds: default_kinds(),
            seed: 0,
            predictor: PredictorSection::default(),
        }
    }
}

fn default_train_sizes() -> Vec<usize> {
    AnalysisConfig::default().train_sizes
}

fn default_trials() -> usize {
    AnalysisConfig::default().trials
}

fn default_test_size() -> usize {
    AnalysisConfig::default().test_size
}

fn default_kinds() -> Vec<String> {
    PredictorKind::ALL.iter().map(|k| k.name().to_string()).collect()
}

impl AnalysisSection {
    pub fn to_config(&self) -> Result<AnalysisConfig> {
        Ok(AnalysisConfig {
            train_sizes: self.train_sizes.clone(),
            trials: self.trials,
            test_size: self.test_size,
            kinds: parse_kinds(&self.kinds, "predictor_analysis.kinds")?,
            params: self.predictor.params(self.seed),
            seed: self.seed,
        })
    }
}

fn parse_kinds(names: &[String], field: &str) -> Result<Vec<PredictorKind>> {
    names
        .iter()
        .map(|n| n.parse::<PredictorKind>().map_err(|e| CliError::Config(format!("{field}: {e}"))))
        .collect()
}

/// A configuration file together with the directory its relative paths
/// are resolved against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    /// SHA-256 of the file bytes.
    pub hash: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_slice(&bytes);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let (field, message) =
                refine_algorithm_error(&bytes, &e).unwrap_or_else(|| (e.path().to_string(), e.inner().to_string()));
            CliError::Config(format!("{}: `{field}`: {message}", path.display()))
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let hash = hex(&Sha256::digest(&bytes));
        let loaded = LoadedConfig { config, base_dir, hash };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn from_config(config: ExperimentConfig, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let text = serde_json::to_vec(&config).expect("configs always serialize");
        let loaded = LoadedConfig { config, base_dir: base_dir.into(), hash: hex(&Sha256::digest(&text)) };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }

    fn validate(&self) -> Result<()> {
        let c = &self.config;
        let bad = |m: String| Err(CliError::Config(m));
        if c.algorithms.is_empty() {
            return bad("`algorithms`: at least one algorithm is required".into());
        }
        if c.seeds.is_empty() {
            return bad("`seeds`: at least one seed is required".into());
        }
        if c.objectives.is_empty() {
            return bad("`objectives`: at least one objective is required".into());
        }
        if c.trace_stride == 0 {
            return bad("`trace_stride`: must be at least 1".into());
        }
        linas_core::objective::validate_objectives(&self.objectives())
            .map_err(|e| CliError::Config(format!("`objectives`: {e}")))?;
        for (i, a) in c.algorithms.iter().enumerate() {
            let pop = match a {
                AlgorithmConfig::Linas(l) => {
                    if let Some(iters) = l.iterations {
                        if l.population_size * iters > c.budget {
                            return bad(format!(
                                "`algorithms[{i}]`: population_size * iterations exceeds the budget {}",
                                c.budget
                            ));
                        }
                    }
                    if let Some(p) = &l.predictors {
                        parse_kinds(p, &format!("algorithms[{i}].predictors"))?;
                    }
                    l.population_size
                }
                AlgorithmConfig::Nsga2(n) => n.population_size,
                AlgorithmConfig::Random => 1,
            };
            if c.budget < pop {
                return bad(format!("`budget`: {} is smaller than the population size {pop} of algorithms[{i}]", c.budget));
            }
        }
        self.config.predictor_analysis.to_config()?;
        Ok(())
    }

    pub fn objectives(&self) -> Vec<ObjectiveSpec> {
        self.config
            .objectives
            .iter()
            .map(|o| {
                let d = match o.direction {
                    DirectionConfig::Minimize => Direction::Minimize,
                    DirectionConfig::Maximize => Direction::Maximize,
                };
                ObjectiveSpec::new(o.name.clone(), d)
            })
            .collect()
    }

    pub fn space(&self) -> Result<SearchSpace> {
        match self.config.space.parse::<BuiltinSpace>() {
            Ok(kind) => Ok(SearchSpace::builtin(kind)),
            Err(_) => {
                let path = self.resolve(Path::new(&self.config.space));
                if !path.exists() {
                    return Err(CliError::Config(format!(
                        "`space`: `{}` is neither a built-in space nor a file",
                        self.config.space
                    )));
                }
                crate::formats::read_space_file(&path)
            }
        }
    }

    pub fn linas_config(&self, section: &LinasSection, space: &SearchSpace, seed: u64) -> Result<LinasConfig> {
        let predictors = match &section.predictors {
            Some(names) => parse_kinds(names, "predictors")?,
            None => {
                let mut kinds = LinasConfig::default_predictors(space.name());
                kinds.resize(self.config.objectives.len(), PredictorKind::Ridge);
                kinds
            }
        };
        Ok(LinasConfig {
            population_size: section.population_size,
            iterations: section.iterations.unwrap_or(self.config.budget / section.population_size.max(1)),
            inner_evaluations: section.inner_evaluations,
            inner: EaConfig {
                population_size: section.inner_population_size,
                crossover_prob: section.crossover_prob,
                mutation_prob: section.mutation_prob,
                max_evaluations: section.inner_evaluations,
                seed,
            },
            predictors,
            predictor_params: section.predictor.params(seed),
            seed,
        })
    }
}

/// Tagged enums buffer their content, so errors inside an algorithm entry
/// only carry the entry's path. Re-parse that entry's section directly to
/// recover the full field path.
fn refine_algorithm_error(
    bytes: &[u8],
    e: &serde_path_to_error::Error<serde_json::Error>,
) -> Option<(String, String)> {
    let outer = e.path().to_string();
    let i: usize = outer.strip_prefix("algorithms[")?.strip_suffix(']')?.parse().ok()?;
    let root: serde_json::Value = serde_json::from_slice(bytes).ok()?;
    let mut entry = root.get("algorithms")?.get(i)?.as_object()?.clone();
    let kind = entry.remove("kind")?;
    let section = serde_json::Value::Object(entry);
    let err = match kind.as_str()? {
        "linas" => serde_path_to_error::deserialize::<_, LinasSection>(section).err()?,
        "nsga2" => serde_path_to_error::deserialize::<_, Nsga2Section>(section).err()?,
        _ => return None,
    };
    Some((format!("{outer}.{}", err.path()), err.inner().to_string()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

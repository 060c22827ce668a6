//! The predictor-accelerated outer loop.
//!
//! Each iteration measures a small population with the real evaluator,
//! retrains one predictor per objective on everything measured so far,
//! runs a long predictor-only NSGA-II, and picks the best configurations
//! not yet measured as the next population.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::moea::{
    crowding_distance, evolve, fast_nondominated_sort, sample_into_store, sample_unseen, EaConfig, Fitness,
    Individual, Population,
};
use crate::moea::random::{attempt_limit, check_capacity};
use crate::objective::{to_minimization, validate_objectives, EvaluationStore, Evaluator, Insert, ObjectiveSpec};
use crate::predictor::{featurize, Predictor, PredictorKind, PredictorParams};
use crate::rng::{derive_seed, stream};
use crate::space::{Genotype, SearchSpace};

pub const SOURCE: &str = "linas-validate";

#[derive(Debug, Clone, PartialEq)]
pub struct LinasConfig {
    /// Validation measurements per iteration (`n`).
    pub population_size: usize,
    pub iterations: usize,
    /// Predictor calls per inner search (`J`).
    pub inner_evaluations: usize,
    /// Inner NSGA-II settings; `max_evaluations` and `seed` are ignored.
    pub inner: EaConfig,
    /// One predictor kind per objective.
    pub predictors: Vec<PredictorKind>,
    pub predictor_params: PredictorParams,
    pub seed: u64,
}

impl Default for LinasConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            iterations: 5,
            inner_evaluations: 20_000,
            inner: EaConfig::default(),
            predictors: alloc::vec![PredictorKind::Ridge, PredictorKind::Ridge],
            predictor_params: PredictorParams::default(),
            seed: 0,
        }
    }
}

impl LinasConfig {
    /// Default predictor pair (accuracy, latency) for a built-in space name.
    pub fn default_predictors(space_name: &str) -> Vec<PredictorKind> {
        if space_name.starts_with("transformer") || space_name.starts_with("ncf") {
            alloc::vec![PredictorKind::SvrRbf, PredictorKind::Ridge]
        } else {
            alloc::vec![PredictorKind::Ridge, PredictorKind::Ridge]
        }
    }

    pub fn validate(&self, objectives: usize) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Parameter(format!("population size must be >= 2, got {}", self.population_size)));
        }
        if self.iterations < 1 {
            return Err(Error::Parameter("at least one iteration is required".into()));
        }
        if self.inner_evaluations < self.population_size || self.inner_evaluations < self.inner.population_size {
            return Err(Error::Parameter(format!(
                "inner evaluations {} must cover the population size",
                self.inner_evaluations
            )));
        }
        if self.predictors.len() != objectives {
            return Err(Error::DimensionMismatch { expected: objectives, found: self.predictors.len() });
        }
        self.inner.validate()
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinasEvent {
    pub iteration: u32,
    pub phase: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct LinasOutcome {
    pub store: EvaluationStore,
    /// Models trained in each iteration; empty where fitting failed.
    pub models: Vec<Vec<Predictor>>,
    /// Final population of the last inner search (predicted objectives).
    pub final_population: Population,
    pub events: Vec<LinasEvent>,
}

/// Predicted objectives (minimization convention) for the inner search.
/// Holds no reference to any store.
pub struct PredictorObjectives<'a> {
    space: &'a SearchSpace,
    models: &'a [Predictor],
    objectives: &'a [ObjectiveSpec],
    budget: usize,
    calls: usize,
}

impl<'a> PredictorObjectives<'a> {
    pub fn new(space: &'a SearchSpace, models: &'a [Predictor], objectives: &'a [ObjectiveSpec], budget: usize) -> Self {
        Self { space, models, objectives, budget, calls: 0 }
    }

    /// Raw predictions, in each objective's natural direction.
    pub fn predict(&self, g: &Genotype) -> Result<Vec<f64>> {
        let x = featurize(self.space, g)?;
        Ok(self.models.iter().map(|m| m.predict(&x)).collect())
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl Fitness for PredictorObjectives<'_> {
    fn evaluate(&mut self, batch: &[Genotype]) -> Result<Vec<Individual>> {
        let take = batch.len().min(self.budget - self.calls);
        let mut out = Vec::with_capacity(take);
        for g in &batch[..take] {
            let raw = self.predict(g)?;
            out.push(Individual { genotype: g.clone(), objectives: to_minimization(self.objectives, &raw) });
        }
        self.calls += take;
        Ok(out)
    }

    fn exhausted(&self) -> bool {
        self.calls >= self.budget
    }

    fn spent(&self) -> usize {
        self.calls
    }
}

/// Up to `n` unseen, distinct members of `population`, best first by
/// non-dominated rank and then crowding distance; topped up with uniform
/// samples outside the store.
pub fn select_best_unique<R: Rng + ?Sized>(
    population: &Population,
    store: &EvaluationStore,
    space: &SearchSpace,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Genotype>> {
    let mut batch: BTreeSet<Genotype> = BTreeSet::new();
    let mut pool: Vec<Individual> = Vec::new();
    for m in &population.members {
        let g = space.canonicalize(&m.genotype)?;
        if !store.contains(&g) && batch.insert(g.clone()) {
            pool.push(Individual { genotype: g, objectives: m.objectives.clone() });
        }
    }

    let mut chosen: Vec<Genotype> = Vec::with_capacity(n);
    if !pool.is_empty() {
        let objectives: Vec<Vec<f64>> = pool.iter().map(|m| m.objectives.clone()).collect();
        for front in fast_nondominated_sort(&objectives) {
            if chosen.len() >= n {
                break;
            }
            let members: Vec<Vec<f64>> = front.iter().map(|&i| objectives[i].clone()).collect();
            let crowd = crowding_distance(&members);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(a.cmp(&b)));
            let room = n - chosen.len();
            chosen.extend(order.into_iter().take(room).map(|k| pool[front[k]].genotype.clone()));
        }
    }

    let taken: BTreeSet<Genotype> = chosen.iter().cloned().collect();
    let mut extra = BTreeSet::new();
    while chosen.len() < n {
        let g = sample_unseen(space, rng, attempt_limit(n), |g| {
            store.contains(g) || taken.contains(g) || extra.contains(g)
        })
        .ok_or_else(|| Error::Exhausted(format!("no unseen configuration left after {} selections", chosen.len())))?;
        extra.insert(g.clone());
        chosen.push(g);
    }
    Ok(chosen)
}

fn fit_models(
    store: &EvaluationStore,
    space: &SearchSpace,
    config: &LinasConfig,
    iteration: u64,
) -> Result<Vec<Predictor>> {
    let x: Vec<Vec<f64>> =
        store.records().iter().map(|r| featurize(space, &r.genotype)).collect::<Result<_>>()?;
    let params = PredictorParams { seed: derive_seed(config.seed, "linas-predictor", iteration), ..config.predictor_params };
    config
        .predictors
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let y: Vec<f64> = store.records().iter().map(|r| r.values[k]).collect();
            Predictor::fit(kind, &x, &y, &params)
        })
        .collect()
}

/// Measures `batch` in order; rejected candidates are replaced by uniform
/// samples so the iteration still adds `batch.len()` records.
fn measure<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    store: &mut EvaluationStore,
    evaluator: &E,
    objectives: &[ObjectiveSpec],
    batch: &[Genotype],
    iteration: u32,
    rng: &mut R,
) -> Result<usize> {
    let mut added = 0;
    for g in batch {
        match evaluator.evaluate(g) {
            Ok(values) => {
                if let Insert::Inserted { .. } = store.insert(g.clone(), values, SOURCE, iteration)? {
                    added += 1;
                }
            }
            Err(Error::Rejected { .. }) => {}
            Err(e) => return Err(e.in_context(format!("linas iteration {iteration}"))),
        }
    }
    let missing = batch.len() - added;
    if missing > 0 {
        sample_into_store(store, evaluator, objectives, missing, rng, SOURCE, iteration)?;
    }
    Ok(missing)
}

pub fn run_linas<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    evaluator: &E,
    objectives: &[ObjectiveSpec],
    config: &LinasConfig,
) -> Result<LinasOutcome> {
    validate_objectives(objectives)?;
    if evaluator.objective_count() != objectives.len() {
        return Err(Error::DimensionMismatch { expected: objectives.len(), found: evaluator.objective_count() });
    }
    config.validate(objectives.len())?;
    let n = config.population_size;
    check_capacity(space, n.saturating_mul(config.iterations))?;

    let mut store = EvaluationStore::new(space.clone(), objectives.len());
    let mut events = Vec::new();
    let mut models = Vec::with_capacity(config.iterations);
    let mut final_population = Population::default();
    let mut next: Vec<Genotype> = Vec::new();
    let inner = EaConfig { max_evaluations: config.inner_evaluations, ..config.inner };

    for i in 1..=config.iterations {
        let it = i as u32;
        if i == 1 {
            let mut rng = stream(config.seed, "sample", 0);
            sample_into_store(&mut store, evaluator, objectives, n, &mut rng, SOURCE, it)?;
        } else {
            let mut rng = stream(config.seed, "linas-replace", i as u64);
            let replaced = measure(&mut store, evaluator, objectives, &next, it, &mut rng)?;
            if replaced > 0 {
                events.push(LinasEvent {
                    iteration: it,
                    phase: "replace",
                    detail: format!("{replaced} rejected candidates replaced by uniform samples"),
                });
            }
        }
        events.push(LinasEvent { iteration: it, phase: "measure", detail: format!("store size {}", store.len()) });

        let fitted = match fit_models(&store, space, config, i as u64) {
            Ok(m) => {
                let kinds: Vec<&str> = m.iter().map(|p| p.kind().name()).collect();
                events.push(LinasEvent {
                    iteration: it,
                    phase: "train",
                    detail: format!("{} on {} samples", kinds.join(","), store.len()),
                });
                m
            }
            Err(e) => {
                events.push(LinasEvent { iteration: it, phase: "fallback", detail: format!("predictor fit failed: {e}") });
                Vec::new()
            }
        };

        let last = i == config.iterations;
        if fitted.is_empty() {
            models.push(fitted);
            if !last {
                let mut rng = stream(config.seed, "linas-select", i as u64);
                next = select_best_unique(&Population::default(), &store, space, n, &mut rng)?;
            }
            continue;
        }

        let before = store.len();
        let mut fitness = PredictorObjectives::new(space, &fitted, objectives, config.inner_evaluations);
        let mut rng = stream(config.seed, "linas-inner", i as u64);
        let population = evolve(space, &inner, &mut fitness, &mut rng)?;
        debug_assert_eq!(store.len(), before);
        events.push(LinasEvent {
            iteration: it,
            phase: "inner",
            detail: format!("{} predictor calls, population {}", fitness.calls(), population.len()),
        });

        if !last {
            let mut rng = stream(config.seed, "linas-select", i as u64);
            next = select_best_unique(&population, &store, space, n, &mut rng)?;
            events.push(LinasEvent { iteration: it, phase: "select", detail: format!("{} candidates", next.len()) });
        }
        final_population = population;
        models.push(fitted);
    }

    Ok(LinasOutcome { store, models, final_population, events })
}

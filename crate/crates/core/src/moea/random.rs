use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;
use rand::Rng;

use super::{fast_nondominated_sort, EaConfig, Individual, Population};
use crate::error::{Error, Result};
use crate::objective::{to_minimization, EvaluationStore, Evaluator, Insert, ObjectiveSpec};
use crate::rng::stream;
use crate::space::{Genotype, SearchSpace};

/// Draws canonical genotypes until one is not `seen`, giving up after
/// `attempts` draws.
pub fn sample_unseen<R: Rng + ?Sized>(
    space: &SearchSpace,
    rng: &mut R,
    attempts: usize,
    mut seen: impl FnMut(&Genotype) -> bool,
) -> Option<Genotype> {
    for _ in 0..attempts {
        let g = space.canonicalize(&space.sample_uniform(rng)).expect("sampled genotypes are valid");
        if !seen(&g) {
            return Some(g);
        }
    }
    None
}

/// Draw limit for finding `count` unseen configurations.
pub(crate) fn attempt_limit(count: usize) -> usize {
    10_000usize.saturating_add(count.saturating_mul(1_000))
}

/// Measures `count` new uniformly drawn configurations into `store`.
///
/// Draws already in the store are skipped, as are candidates the evaluator
/// rejects; neither consumes budget. Any other evaluator error aborts.
pub fn sample_into_store<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    store: &mut EvaluationStore,
    evaluator: &E,
    objectives: &[ObjectiveSpec],
    count: usize,
    rng: &mut R,
    source: &str,
    iteration: u32,
) -> Result<Vec<Individual>> {
    let space = store.space().clone();
    let mut fresh = Vec::with_capacity(count);
    let mut draws = 0usize;
    let limit = attempt_limit(count);
    while fresh.len() < count {
        let remaining = limit.saturating_sub(draws);
        let mut used = 0usize;
        let g = sample_unseen(&space, rng, remaining, |g| {
            used += 1;
            store.contains(g)
        });
        draws += used;
        let Some(g) = g else {
            return Err(Error::Exhausted(format!(
                "found {} of {count} unseen configurations in {draws} draws",
                fresh.len()
            )));
        };
        match evaluator.evaluate(&g) {
            Ok(values) => {
                let objectives_min = to_minimization(objectives, &values);
                if let Insert::Inserted { .. } = store.insert(g.clone(), values, source, iteration)? {
                    fresh.push(Individual { genotype: g, objectives: objectives_min });
                }
            }
            Err(Error::Rejected { .. }) => continue,
            Err(e) => return Err(e.in_context(format!("{source} sampling"))),
        }
    }
    Ok(fresh)
}

pub(crate) fn check_capacity(space: &SearchSpace, needed: usize) -> Result<()> {
    let cardinality = space.cardinality();
    if cardinality < BigUint::from(needed) {
        return Err(Error::Exhausted(format!("space has {cardinality} configurations, {needed} required")));
    }
    Ok(())
}

/// Uniform random search: `config.max_evaluations` new measurements, then
/// the non-dominated subset of them as the population.
pub fn run_random<E: Evaluator + ?Sized>(
    evaluator: &E,
    objectives: &[ObjectiveSpec],
    config: &EaConfig,
    store: &mut EvaluationStore,
) -> Result<Population> {
    check_capacity(store.space(), store.len() + config.max_evaluations)?;
    let mut rng = stream(config.seed, "sample", 0);
    let sampled = sample_into_store(store, evaluator, objectives, config.max_evaluations, &mut rng, "random", 0)?;
    if sampled.is_empty() {
        return Ok(Population::default());
    }
    let objs: Vec<Vec<f64>> = sampled.iter().map(|i| i.objectives.clone()).collect();
    let best = &fast_nondominated_sort(&objs)[0];
    Ok(Population::new(best.iter().map(|&i| sampled[i].clone()).collect()))
}

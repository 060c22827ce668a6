use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::random::{attempt_limit, check_capacity, sample_unseen};
use super::{
    crossover_two_point, crowding_distance, fast_nondominated_sort, mutate, tournament_select, EaConfig, Individual,
    Population,
};
use crate::error::{Error, Result};
use crate::objective::{to_minimization, EvaluationStore, Evaluator, Insert, ObjectiveSpec};
use crate::rng::stream;
use crate::space::{Genotype, SearchSpace};

/// Generations without progress after which [`evolve`] gives up.
const STALL_GENERATIONS: usize = 100;

/// Matings per offspring slot tried before a generation settles for fewer
/// distinct children.
const MATING_ATTEMPTS: usize = 10;

/// Supplies objective vectors (minimization convention) to [`evolve`] and
/// decides when the search budget is spent.
pub trait Fitness {
    /// Evaluates candidates in order. Candidates beyond the budget, or
    /// rejected by the evaluator, are left out of the result.
    fn evaluate(&mut self, batch: &[Genotype]) -> Result<Vec<Individual>>;

    fn exhausted(&self) -> bool;

    /// Monotone counter of budget spent; a generation that leaves it
    /// unchanged made no progress.
    fn spent(&self) -> usize;
}

/// Budget = new validation measurements in an [`EvaluationStore`].
/// Configurations already stored are served from the store for free.
pub struct StoreFitness<'a, E: ?Sized> {
    pub store: &'a mut EvaluationStore,
    pub evaluator: &'a E,
    pub objectives: &'a [ObjectiveSpec],
    /// Store length at which the budget is spent.
    pub limit: usize,
    pub source: String,
    pub iteration: u32,
    generation: usize,
}

impl<'a, E: Evaluator + ?Sized> StoreFitness<'a, E> {
    pub fn new(
        store: &'a mut EvaluationStore,
        evaluator: &'a E,
        objectives: &'a [ObjectiveSpec],
        budget: usize,
        source: impl Into<String>,
        iteration: u32,
    ) -> Self {
        let limit = store.len() + budget;
        Self { store, evaluator, objectives, limit, source: source.into(), iteration, generation: 0 }
    }
}

impl<E: Evaluator + ?Sized> Fitness for StoreFitness<'_, E> {
    fn evaluate(&mut self, batch: &[Genotype]) -> Result<Vec<Individual>> {
        let mut out = Vec::with_capacity(batch.len());
        for g in batch {
            if let Some(m) = self.store.get(g) {
                out.push(Individual { genotype: g.clone(), objectives: to_minimization(self.objectives, &m.values) });
                continue;
            }
            if self.store.len() >= self.limit {
                continue;
            }
            match self.evaluator.evaluate(g) {
                Ok(values) => {
                    let objectives = to_minimization(self.objectives, &values);
                    if let Insert::Inserted { .. } = self.store.insert(g.clone(), values, &self.source, self.iteration)? {
                        out.push(Individual { genotype: g.clone(), objectives });
                    }
                }
                Err(Error::Rejected { .. }) => {}
                Err(e) => return Err(e.in_context(format!("{} generation {}", self.source, self.generation))),
            }
        }
        self.generation += 1;
        Ok(out)
    }

    fn exhausted(&self) -> bool {
        self.store.len() >= self.limit
    }

    fn spent(&self) -> usize {
        self.store.len()
    }
}

/// Keeps whole fronts while they fit, then the most isolated members of
/// the first front that does not.
pub fn environmental_selection(mut pool: Vec<Individual>, size: usize) -> Vec<Individual> {
    if pool.len() <= size {
        return pool;
    }
    let objectives: Vec<Vec<f64>> = pool.iter().map(|m| m.objectives.clone()).collect();
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for front in fast_nondominated_sort(&objectives) {
        if keep.len() + front.len() <= size {
            keep.extend(front);
            if keep.len() == size {
                break;
            }
            continue;
        }
        let members: Vec<Vec<f64>> = front.iter().map(|&i| objectives[i].clone()).collect();
        let crowd = crowding_distance(&members);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(a.cmp(&b)));
        keep.extend(order.into_iter().take(size - keep.len()).map(|k| front[k]));
        break;
    }
    keep.sort_unstable();
    let mut taken = Vec::with_capacity(size);
    let mut slots: Vec<Option<Individual>> = pool.drain(..).map(Some).collect();
    for i in keep {
        taken.push(slots[i].take().expect("each index kept once"));
    }
    taken
}

/// Rank and crowding distance of every member.
fn rank_and_crowding(pop: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let objectives: Vec<Vec<f64>> = pop.iter().map(|m| m.objectives.clone()).collect();
    let mut rank = alloc::vec![0; pop.len()];
    let mut crowd = alloc::vec![0.0; pop.len()];
    for (r, front) in fast_nondominated_sort(&objectives).into_iter().enumerate() {
        let members: Vec<Vec<f64>> = front.iter().map(|&i| objectives[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

/// The NSGA-II generation loop on top of any [`Fitness`].
///
/// Starts from `population_size` distinct uniform samples, then breeds
/// up to `population_size` distinct new offspring per generation (binary
/// tournament, two-point crossover, resampling mutation) and keeps the best `population_size` of
/// parents and offspring. Stops once the fitness budget is spent.
pub fn evolve<F: Fitness, R: Rng + ?Sized>(
    space: &SearchSpace,
    config: &EaConfig,
    fitness: &mut F,
    rng: &mut R,
) -> Result<Population> {
    config.validate()?;
    let n = config.population_size;

    let mut initial = Vec::with_capacity(n);
    let mut chosen = BTreeSet::new();
    while initial.len() < n {
        match sample_unseen(space, rng, attempt_limit(1), |g| chosen.contains(g)) {
            Some(g) => {
                chosen.insert(g.clone());
                initial.push(g);
            }
            None => break,
        }
    }
    let mut pop = fitness.evaluate(&initial)?;

    let mut stalled = 0;
    while !fitness.exhausted() && pop.len() >= 2 && stalled < STALL_GENERATIONS {
        let before = fitness.spent();
        let (rank, crowd) = rank_and_crowding(&pop);
        // Offspring duplicating a member or an earlier child are discarded.
        let mut known: BTreeSet<Genotype> = pop.iter().map(|m| m.genotype.clone()).collect();
        let mut children = Vec::with_capacity(n);
        let mut matings = 0;
        while children.len() < n && matings < MATING_ATTEMPTS * n {
            matings += 1;
            let a = tournament_select(&rank, &crowd, rng)?;
            let b = tournament_select(&rank, &crowd, rng)?;
            let (x, y) = crossover_two_point(&pop[a].genotype, &pop[b].genotype, config.crossover_prob, rng)?;
            for child in [x, y] {
                let child = space.canonicalize(&mutate(space, &child, config.mutation_prob, rng))?;
                if children.len() < n && known.insert(child.clone()) {
                    children.push(child);
                }
            }
        }
        let offspring = fitness.evaluate(&children)?;
        stalled = if fitness.spent() == before { stalled + 1 } else { 0 };
        pop.extend(offspring);
        pop = environmental_selection(pop, n);
    }
    Ok(Population::new(pop))
}

/// NSGA-II against the real evaluator; every new configuration is one
/// validation measurement recorded in `store` with source `nsga2`.
pub fn run_nsga2<E: Evaluator + ?Sized>(
    evaluator: &E,
    objectives: &[ObjectiveSpec],
    config: &EaConfig,
    store: &mut EvaluationStore,
) -> Result<Population> {
    config.validate()?;
    if config.max_evaluations < config.population_size {
        return Err(Error::Parameter(format!(
            "budget {} is smaller than the population size {}",
            config.max_evaluations, config.population_size
        )));
    }
    let space = store.space().clone();
    check_capacity(&space, store.len() + config.population_size)?;
    let mut rng = stream(config.seed, "nsga2", 0);
    let mut fitness = StoreFitness::new(store, evaluator, objectives, config.max_evaluations, "nsga2", 0);
    evolve(&space, config, &mut fitness, &mut rng)
}

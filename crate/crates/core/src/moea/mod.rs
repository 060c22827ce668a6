//! NSGA-II and uniform random search over integer genotypes.
//!
//! Objectives inside this module are always in the minimization
//! convention: maximized objectives are negated before they reach
//! dominance checks.

mod nsga2;
mod operators;
pub(crate) mod random;
mod sorting;

use alloc::format;
use alloc::vec::Vec;

pub use nsga2::{environmental_selection, evolve, run_nsga2, Fitness, StoreFitness};
pub use operators::{crossover_two_point, mutate, swap_segment, tournament_select};
pub use random::{run_random, sample_unseen, sample_into_store};
pub use sorting::{crowding_distance, dominates, fast_nondominated_sort};
pub(crate) use sorting::dominates_unchecked;

use crate::error::{Error, Result};
use crate::space::Genotype;

/// A genotype with its objective vector (minimization convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub objectives: Vec<f64>,
}

/// The working set of an evolutionary search.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub members: Vec<Individual>,
}

impl Population {
    pub fn new(members: Vec<Individual>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn objectives(&self) -> Vec<Vec<f64>> {
        self.members.iter().map(|m| m.objectives.clone()).collect()
    }

    /// Members of the first non-dominated front.
    pub fn front(&self) -> Vec<&Individual> {
        if self.members.is_empty() {
            return Vec::new();
        }
        let fronts = fast_nondominated_sort(&self.objectives());
        fronts[0].iter().map(|&i| &self.members[i]).collect()
    }
}

/// Genetic-algorithm settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EaConfig {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub max_evaluations: usize,
    pub seed: u64,
}

impl Default for EaConfig {
    fn default() -> Self {
        Self { population_size: 50, crossover_prob: 0.9, mutation_prob: 0.02, max_evaluations: 250, seed: 0 }
    }
}

impl EaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return Err(Error::Parameter(format!(
                "population_size must be even and at least 2, got {}",
                self.population_size
            )));
        }
        Ok(())
    }
}

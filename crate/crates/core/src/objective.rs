//! Objectives, evaluators and the measurement store.
//!
//! Evaluators return objective values in each objective's natural direction
//! (accuracy up, latency down). The [`EvaluationStore`] is the only place a
//! validation measurement is recorded; its length is the evaluation count
//! every budget refers to.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::rng::{hash_bytes, standard_normal, stream, SearchRng};
use crate::space::{Genotype, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// Maps a raw value into the minimization convention.
    pub fn to_min(self, value: f64) -> f64 {
        match self {
            Direction::Minimize => value,
            Direction::Maximize => -value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveSpec {
    pub name: String,
    pub direction: Direction,
}

impl ObjectiveSpec {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        Self { name: name.into(), direction }
    }

    pub fn minimize(name: impl Into<String>) -> Self {
        Self::new(name, Direction::Minimize)
    }

    pub fn maximize(name: impl Into<String>) -> Self {
        Self::new(name, Direction::Maximize)
    }
}

/// Accuracy (maximized) and latency (minimized), the pair every synthetic
/// landscape produces.
pub fn accuracy_latency() -> Vec<ObjectiveSpec> {
    vec![ObjectiveSpec::maximize("accuracy"), ObjectiveSpec::minimize("latency")]
}

pub fn validate_objectives(specs: &[ObjectiveSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Parameter("at least one objective is required".into()));
    }
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::Parameter(format!("duplicate objective name `{}`", s.name)));
        }
    }
    Ok(())
}

/// Raw values to the minimization convention (maximized objectives negated).
pub fn to_minimization(specs: &[ObjectiveSpec], values: &[f64]) -> Vec<f64> {
    specs.iter().zip(values).map(|(s, &v)| s.direction.to_min(v)).collect()
}

/// Something that performs a validation measurement of a genotype.
pub trait Evaluator {
    fn objective_count(&self) -> usize;

    /// Raw objective values for `g`, one per objective.
    fn evaluate(&self, g: &Genotype) -> Result<Vec<f64>>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn objective_count(&self) -> usize {
        (**self).objective_count()
    }

    fn evaluate(&self, g: &Genotype) -> Result<Vec<f64>> {
        (**self).evaluate(g)
    }
}

/// `(l - l_min) / l_max`.
pub fn normalize_latency(l: f64, l_min: f64, l_max: f64) -> Result<f64> {
    if !(l_max > 0.0) {
        return Err(Error::Domain(format!("l_max must be positive, got {l_max}")));
    }
    if !(l_min <= l && l <= l_max) {
        return Err(Error::Domain(format!("latency {l} outside [{l_min}, {l_max}]")));
    }
    Ok((l - l_min) / l_max)
}

/// Construction parameters of a [`SyntheticLandscape`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeParams {
    pub seed: u64,
    /// Quality/cost coupling in `[-1, 1]`.
    pub rho: f64,
    /// Standard deviation of the per-config accuracy noise.
    pub sigma: f64,
    pub accuracy_range: (f64, f64),
    pub latency_range: (f64, f64),
}

impl Default for LandscapeParams {
    fn default() -> Self {
        Self { seed: 0, rho: 0.8, sigma: 0.0, accuracy_range: (70.0, 80.0), latency_range: (5.0, 60.0) }
    }
}

/// Standard deviation of the pairwise quality terms.
const PAIR_SCALE: f64 = 0.1;

/// Approximate standard deviation of the logit under uniform sampling.
const LOGIT_SPREAD: f64 = 0.75;

const CALIBRATION_DRAWS: usize = 2048;

/// Seeded accuracy/latency landscape over a search space.
///
/// Each variable gets a cost weight `c_i = |c'_i|` and a quality weight
/// `a_i = rho * c_i + sqrt(1 - rho^2) * z_i` with `c'_i, z_i ~ N(0, 1)`, so
/// `rho` tunes how strongly accuracy and latency conflict. A sparse set of
/// pairwise terms adds mild non-linearity. Quality and pair weights are
/// then rescaled and the logit offset `c0` set so that, over seeded uniform
/// samples, the logit has mean 0 and a fixed moderate spread. With `u_i = index / (k - 1)` on
/// active variables (0 on masked ones):
///
/// * `accuracy = lo + (hi - lo) * logistic(c0 + sum a_i u_i + sum b_ij u_i u_j) + noise`
/// * `latency = lo + (hi - lo) * clamp01(sum c_i u_i / sum c_i)`
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLandscape {
    space: SearchSpace,
    params: LandscapeParams,
    quality: Vec<f64>,
    cost: Vec<f64>,
    pairs: Vec<(usize, usize, f64)>,
    bias: f64,
}

impl SyntheticLandscape {
    pub fn new(space: SearchSpace, params: LandscapeParams) -> Result<Self> {
        let LandscapeParams { seed, rho, sigma, accuracy_range: (acc_lo, acc_hi), latency_range: (lat_lo, lat_hi) } =
            params;
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::Parameter(format!("rho must be in [-1, 1], got {rho}")));
        }
        if !(sigma >= 0.0) {
            return Err(Error::Parameter(format!("sigma must be non-negative, got {sigma}")));
        }
        if !(acc_hi > acc_lo) {
            return Err(Error::Parameter("accuracy range must satisfy hi > lo".into()));
        }
        if !(lat_hi > lat_lo && lat_lo > 0.0) {
            return Err(Error::Parameter("latency range must satisfy hi > lo > 0".into()));
        }

        let n = space.len();
        let mut rng = stream(seed, "landscape", 0);
        let orth = libm::sqrt(1.0 - rho * rho);
        let mut quality = Vec::with_capacity(n);
        let mut cost = Vec::with_capacity(n);
        for _ in 0..n {
            let c = standard_normal(&mut rng).abs();
            let z = standard_normal(&mut rng);
            cost.push(c);
            quality.push(rho * c + orth * z);
        }

        let want = if n >= 2 { n.div_ceil(2) } else { 0 };
        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(want);
        while pairs.len() < want {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            if i == j || pairs.iter().any(|&(p, q, _)| (p, q) == (i, j)) {
                continue;
            }
            pairs.push((i, j, PAIR_SCALE * standard_normal(&mut rng)));
        }

        // Calibrate centre and spread of the logit on uniform samples.
        let mut landscape = Self { space, params, quality, cost, pairs, bias: 0.0 };
        let mut rng = stream(seed, "landscape-calibrate", 0);
        let draws: Vec<f64> = (0..CALIBRATION_DRAWS)
            .map(|_| {
                let g = landscape.space.sample_uniform(&mut rng);
                landscape.quality_score(&g).expect("sampled genotypes are valid")
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let std = libm::sqrt(draws.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / draws.len() as f64);
        let k = if std > 0.0 { LOGIT_SPREAD / std } else { 1.0 };
        landscape.quality.iter_mut().for_each(|a| *a *= k);
        landscape.pairs.iter_mut().for_each(|p| p.2 *= k);
        landscape.bias = -k * mean;
        Ok(landscape)
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn params(&self) -> &LandscapeParams {
        &self.params
    }

    pub fn quality_weights(&self) -> &[f64] {
        &self.quality
    }

    pub fn cost_weights(&self) -> &[f64] {
        &self.cost
    }

    pub fn pair_terms(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    fn scaled(&self, g: &Genotype) -> Result<Vec<f64>> {
        let mask = self.space.active_mask(g)?;
        Ok(self
            .space
            .variables()
            .iter()
            .zip(g.indices())
            .zip(mask)
            .map(|((v, &idx), active)| {
                if !active || v.arity() < 2 {
                    0.0
                } else {
                    idx as f64 / (v.arity() - 1) as f64
                }
            })
            .collect())
    }

    /// The logit `q` before the logistic squashing.
    pub fn quality_score(&self, g: &Genotype) -> Result<f64> {
        let u = self.scaled(g)?;
        let linear: f64 = self.quality.iter().zip(&u).map(|(a, x)| a * x).sum();
        let pairwise: f64 = self.pairs.iter().map(|&(i, j, b)| b * u[i] * u[j]).sum();
        Ok(self.bias + linear + pairwise)
    }

    pub fn accuracy(&self, g: &Genotype) -> Result<f64> {
        let (lo, hi) = self.params.accuracy_range;
        let q = self.quality_score(g)?;
        let mut acc = lo + (hi - lo) * logistic(q);
        if self.params.sigma > 0.0 {
            let canonical = self.space.canonicalize(g)?;
            let mut rng = SearchRng::seed_from_u64(hash_bytes(self.params.seed, canonical.key_bytes()));
            acc += self.params.sigma * standard_normal(&mut rng);
        }
        Ok(acc.clamp(lo, hi))
    }

    pub fn latency(&self, g: &Genotype) -> Result<f64> {
        let (lo, hi) = self.params.latency_range;
        let u = self.scaled(g)?;
        let total: f64 = self.cost.iter().sum();
        let frac = if total > 0.0 { self.cost.iter().zip(&u).map(|(c, x)| c * x).sum::<f64>() / total } else { 0.0 };
        Ok(lo + (hi - lo) * frac.clamp(0.0, 1.0))
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

impl Evaluator for SyntheticLandscape {
    fn objective_count(&self) -> usize {
        2
    }

    /// `[accuracy, latency]`.
    fn evaluate(&self, g: &Genotype) -> Result<Vec<f64>> {
        Ok(vec![self.accuracy(g)?, self.latency(g)?])
    }
}

/// What a [`TabularEvaluator`] does with a configuration it has no row for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Fail the evaluation with [`Error::UnknownConfig`].
    #[default]
    Error,
    /// Reject the candidate with [`Error::Rejected`], naming the nearest
    /// tabulated config by Hamming distance. Search drivers skip rejected
    /// candidates without spending budget.
    NearestReject,
}

/// Replays pre-measured objective vectors keyed by canonical genotype.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularEvaluator {
    space: SearchSpace,
    table: BTreeMap<Genotype, Vec<f64>>,
    objectives: usize,
    policy: MissingPolicy,
}

impl TabularEvaluator {
    pub fn new(
        space: SearchSpace,
        rows: impl IntoIterator<Item = (Genotype, Vec<f64>)>,
        policy: MissingPolicy,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        let mut objectives = None;
        for (g, values) in rows {
            let key = space.canonicalize(&g)?;
            let m = *objectives.get_or_insert(values.len());
            if values.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: values.len() });
            }
            if let Some(prev) = table.insert(key.clone(), values.clone()) {
                if prev != values {
                    return Err(Error::Parameter(format!("conflicting rows for config {key}")));
                }
            }
        }
        let objectives = objectives.filter(|&m| m > 0).ok_or(Error::Empty("tabular evaluator needs rows"))?;
        Ok(Self { space, table, objectives, policy })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Genotype, &[f64])> {
        self.table.iter().map(|(g, v)| (g, v.as_slice()))
    }

    fn nearest(&self, g: &Genotype) -> Genotype {
        self.table
            .keys()
            .min_by_key(|k| k.indices().iter().zip(g.indices()).filter(|(a, b)| a != b).count())
            .cloned()
            .expect("table is non-empty")
    }
}

impl Evaluator for TabularEvaluator {
    fn objective_count(&self) -> usize {
        self.objectives
    }

    fn evaluate(&self, g: &Genotype) -> Result<Vec<f64>> {
        let key = self.space.canonicalize(g)?;
        match self.table.get(&key) {
            Some(v) => Ok(v.clone()),
            None => match self.policy {
                MissingPolicy::Error => Err(Error::UnknownConfig(key)),
                MissingPolicy::NearestReject => {
                    let nearest = self.nearest(&key);
                    Err(Error::Rejected { genotype: key, nearest })
                }
            },
        }
    }
}

/// One validation measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// 1-based position in the store.
    pub eval_index: usize,
    /// Canonical genotype.
    pub genotype: Genotype,
    /// Raw objective values.
    pub values: Vec<f64>,
    /// Algorithm tag such as `nsga2`, `random` or `linas-validate`.
    pub source: String,
    /// Outer iteration for iterative searches, 0 otherwise.
    pub iteration: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    Inserted { eval_index: usize },
    Duplicate { position: usize },
}

/// Append-only, deduplicating record of validation measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationStore {
    space: SearchSpace,
    objectives: usize,
    records: Vec<Measurement>,
    index: BTreeMap<Genotype, usize>,
}

impl EvaluationStore {
    pub fn new(space: SearchSpace, objectives: usize) -> Self {
        Self { space, objectives, records: Vec::new(), index: BTreeMap::new() }
    }

    /// Rebuilds a store from exported records, checking every invariant.
    pub fn from_records(
        space: SearchSpace,
        objectives: usize,
        records: impl IntoIterator<Item = Measurement>,
    ) -> Result<Self> {
        let mut store = Self::new(space, objectives);
        for m in records {
            let expected = store.len() + 1;
            if m.eval_index != expected {
                return Err(Error::Parameter(format!(
                    "eval_index {} where {expected} was expected",
                    m.eval_index
                )));
            }
            if let Insert::Duplicate { position } = store.insert(m.genotype, m.values, &m.source, m.iteration)? {
                return Err(Error::Parameter(format!("duplicate of record {}", position + 1)));
            }
        }
        Ok(store)
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn objective_count(&self) -> usize {
        self.objectives
    }

    /// Records a measurement unless its genotype is already present.
    pub fn insert(&mut self, genotype: Genotype, values: Vec<f64>, source: &str, iteration: u32) -> Result<Insert> {
        if !self.space.is_canonical(&genotype) {
            self.space.validate(&genotype)?;
            return Err(Error::NonCanonical(genotype));
        }
        if values.len() != self.objectives {
            return Err(Error::DimensionMismatch { expected: self.objectives, found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite objective value {v}")));
        }
        if let Some(&position) = self.index.get(&genotype) {
            return Ok(Insert::Duplicate { position });
        }
        let eval_index = self.records.len() + 1;
        self.index.insert(genotype.clone(), self.records.len());
        self.records.push(Measurement { eval_index, genotype, values, source: source.to_string(), iteration });
        Ok(Insert::Inserted { eval_index })
    }

    pub fn get(&self, g: &Genotype) -> Option<&Measurement> {
        self.index.get(g).map(|&p| &self.records[p])
    }

    pub fn contains(&self, g: &Genotype) -> bool {
        self.index.contains_key(g)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Measurement] {
        &self.records
    }

    /// Objective vectors of the first `k` records in minimization convention.
    pub fn minimized(&self, specs: &[ObjectiveSpec], k: usize) -> Vec<Vec<f64>> {
        self.records[..k.min(self.len())].iter().map(|m| to_minimization(specs, &m.values)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{DependencyRule, DesignVariable};

    fn masked_toy() -> SearchSpace {
        SearchSpace::new(
            "toy",
            vec![
                DesignVariable::new("c", vec![0, 1], "b"),
                DesignVariable::new("x", vec![10, 20, 30], "b"),
                DesignVariable::new("y", vec![1, 2, 3], "b"),
            ],
            vec![DependencyRule { controller: 0, activation: vec![vec![2], vec![]] }],
        )
        .unwrap()
    }

    #[test]
    fn normalize_latency_formula() {
        assert_eq!(normalize_latency(10.0, 10.0, 50.0).unwrap(), 0.0);
        assert!((normalize_latency(30.0, 10.0, 50.0).unwrap() - 0.4).abs() < 1e-15);
        let top = normalize_latency(50.0, 10.0, 50.0).unwrap();
        assert!((top - 0.8).abs() < 1e-15 && top < 1.0);
        assert!(normalize_latency(5.0, 10.0, 50.0).is_err());
        assert!(normalize_latency(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn all_zero_coefficients_give_midpoint_accuracy() {
        let mut l = SyntheticLandscape::new(masked_toy(), LandscapeParams::default()).unwrap();
        l.quality.iter_mut().for_each(|a| *a = 0.0);
        l.pairs.clear();
        l.bias = 0.0;
        for g in [[0, 0, 0], [1, 2, 0], [0, 1, 2]] {
            assert_eq!(l.accuracy(&Genotype(g.to_vec())).unwrap(), 75.0);
        }
    }

    #[test]
    fn latency_extremes() {
        let space = SearchSpace::new(
            "free",
            vec![DesignVariable::new("a", vec![1, 2, 3], "g"), DesignVariable::new("b", vec![1, 2], "g")],
            vec![],
        )
        .unwrap();
        let l = SyntheticLandscape::new(space, LandscapeParams::default()).unwrap();
        assert_eq!(l.latency(&Genotype(vec![0, 0])).unwrap(), 5.0);
        assert!((l.latency(&Genotype(vec![2, 1])).unwrap() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn masked_flip_changes_nothing() {
        let l = SyntheticLandscape::new(masked_toy(), LandscapeParams { sigma: 0.5, ..Default::default() }).unwrap();
        for x in 0..3 {
            let a = l.evaluate(&Genotype(vec![1, x, 0])).unwrap();
            for y in 1..3 {
                assert_eq!(l.evaluate(&Genotype(vec![1, x, y])).unwrap(), a);
            }
        }
    }

    #[test]
    fn noise_is_repeatable_and_bounded() {
        let l = SyntheticLandscape::new(masked_toy(), LandscapeParams { sigma: 2.0, ..Default::default() }).unwrap();
        let g = Genotype(vec![0, 1, 2]);
        let a = l.accuracy(&g).unwrap();
        assert_eq!(a, l.accuracy(&g).unwrap());
        assert!((70.0..=80.0).contains(&a));
    }

    #[test]
    fn landscape_parameter_checks() {
        let bad = [
            LandscapeParams { rho: 1.5, ..Default::default() },
            LandscapeParams { sigma: -1.0, ..Default::default() },
            LandscapeParams { accuracy_range: (80.0, 70.0), ..Default::default() },
            LandscapeParams { latency_range: (0.0, 60.0), ..Default::default() },
        ];
        for p in bad {
            assert!(matches!(SyntheticLandscape::new(masked_toy(), p), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn tabular_lookup_and_policies() {
        let rows = vec![(Genotype(vec![0, 1, 2]), vec![1.0, 2.0]), (Genotype(vec![1, 1, 2]), vec![3.0, 4.0])];
        let t = TabularEvaluator::new(masked_toy(), rows.clone(), MissingPolicy::Error).unwrap();
        assert_eq!(t.evaluate(&Genotype(vec![0, 1, 2])).unwrap(), vec![1.0, 2.0]);
        // Row keys are canonicalized, so any masked value hits the same row.
        assert_eq!(t.evaluate(&Genotype(vec![1, 1, 1])).unwrap(), vec![3.0, 4.0]);
        assert!(matches!(t.evaluate(&Genotype(vec![0, 0, 0])), Err(Error::UnknownConfig(_))));

        let t = TabularEvaluator::new(masked_toy(), rows, MissingPolicy::NearestReject).unwrap();
        match t.evaluate(&Genotype(vec![0, 1, 1])) {
            Err(Error::Rejected { nearest, .. }) => assert_eq!(nearest, Genotype(vec![0, 1, 2])),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn store_dedup_and_contract() {
        let mut store = EvaluationStore::new(masked_toy(), 2);
        let g = Genotype(vec![1, 2, 0]);
        assert_eq!(store.insert(g.clone(), vec![1.0, 2.0], "t", 0).unwrap(), Insert::Inserted { eval_index: 1 });
        assert_eq!(store.insert(g, vec![9.0, 9.0], "t", 0).unwrap(), Insert::Duplicate { position: 0 });
        // Same config as the record above, but not canonicalized.
        assert!(matches!(
            store.insert(Genotype(vec![1, 2, 2]), vec![1.0, 2.0], "t", 0),
            Err(Error::NonCanonical(_))
        ));
        assert!(matches!(
            store.insert(Genotype(vec![0, 0, 0]), vec![1.0], "t", 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn store_counts_distinct_inserts() {
        let space = SearchSpace::new("wide", vec![DesignVariable::new("v", (0..100).collect(), "g")], vec![]).unwrap();
        let mut store = EvaluationStore::new(space, 1);
        for i in 0..100 {
            store.insert(Genotype(vec![i]), vec![i as f64], "t", 0).unwrap();
        }
        assert_eq!(store.len(), 100);
        assert!(store.records().iter().enumerate().all(|(p, m)| m.eval_index == p + 1));
        let rebuilt = EvaluationStore::from_records(store.space().clone(), 1, store.records().to_vec()).unwrap();
        assert_eq!(rebuilt, store);
    }
}

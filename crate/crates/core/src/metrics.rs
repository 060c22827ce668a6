//! Pareto fronts and bi-objective hypervolume.
//!
//! Every function here works in the minimization convention; use
//! [`EvaluationStore::minimized`] to convert raw measurements.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::moea::dominates_unchecked;
use crate::objective::{EvaluationStore, ObjectiveSpec};

/// Indices (ascending) of the points no other point dominates. Duplicates
/// of a front member are all kept.
pub fn pareto_front(points: &[Vec<f64>]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::Empty("pareto_front needs at least one point"));
    }
    let m = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: p.len() });
    }
    // A dominator is lexicographically smaller, so it is always visited first.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex(&points[a], &points[b]));
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates_unchecked(&points[f], &points[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    Ok(front)
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Area dominated by `points` and bounded by `reference`. Points not
/// strictly better than the reference in both objectives contribute zero.
pub fn hypervolume_2d(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    if reference.len() != 2 {
        return Err(Error::UnsupportedDimension(reference.len()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != 2) {
        return Err(Error::UnsupportedDimension(p.len()));
    }
    let mut inside: Vec<(f64, f64)> =
        points.iter().filter(|p| p[0] < reference[0] && p[1] < reference[1]).map(|p| (p[0], p[1])).collect();
    inside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = reference[1];
    for (x, y) in inside {
        if y < ceiling {
            area += (reference[0] - x) * (ceiling - y);
            ceiling = y;
        }
    }
    Ok(area)
}

/// Hypervolume after each `stride` evaluations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypervolumeTrace {
    /// `(eval_count, hypervolume)`, counts strictly increasing.
    pub points: Vec<(usize, f64)>,
}

impl HypervolumeTrace {
    pub fn last(&self) -> Option<(usize, f64)> {
        self.points.last().copied()
    }

    /// Hypervolume recorded at exactly `count` evaluations.
    pub fn at(&self, count: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == count).map(|p| p.1)
    }
}

/// Trace over prefixes of an ordered point sequence: counts `stride`,
/// `2 * stride`, ... and finally the full length.
pub fn trace_of_points(points: &[Vec<f64>], reference: &[f64], stride: usize) -> Result<HypervolumeTrace> {
    if stride < 1 {
        return Err(Error::Parameter("trace stride must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::Empty("hypervolume trace needs measurements"));
    }
    let mut front: Vec<Vec<f64>> = Vec::new();
    let mut trace = HypervolumeTrace::default();
    for (k, p) in points.iter().enumerate() {
        if p.len() != 2 {
            return Err(Error::UnsupportedDimension(p.len()));
        }
        if !front.iter().any(|f| dominates_unchecked(f, p) || f == p) {
            front.retain(|f| !dominates_unchecked(p, f));
            front.push(p.clone());
        }
        let count = k + 1;
        if count % stride == 0 || count == points.len() {
            trace.points.push((count, hypervolume_2d(&front, reference)?));
        }
    }
    Ok(trace)
}

/// Hypervolume of each store prefix against a fixed reference point.
pub fn hv_trace(
    store: &EvaluationStore,
    objectives: &[ObjectiveSpec],
    reference: &[f64],
    stride: usize,
) -> Result<HypervolumeTrace> {
    check_two(objectives)?;
    trace_of_points(&store.minimized(objectives, store.len()), reference, stride)
}

fn check_two(objectives: &[ObjectiveSpec]) -> Result<()> {
    if objectives.len() != 2 {
        return Err(Error::UnsupportedDimension(objectives.len()));
    }
    Ok(())
}

/// Componentwise `(min, max)` of every run's minimized measurements.
pub fn union_bounds(runs: &[&EvaluationStore], objectives: &[ObjectiveSpec]) -> Result<Vec<(f64, f64)>> {
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); objectives.len()];
    let mut seen = false;
    for run in runs {
        for p in run.minimized(objectives, run.len()) {
            seen = true;
            for (b, v) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
    }
    if !seen {
        return Err(Error::Empty("no measurements in any run"));
    }
    Ok(bounds)
}

/// Worst measured value per objective across `runs`, pushed out by 1% of
/// the observed range.
pub fn default_reference(runs: &[&EvaluationStore], objectives: &[ObjectiveSpec]) -> Result<Vec<f64>> {
    Ok(union_bounds(runs, objectives)?.into_iter().map(|(lo, hi)| hi + 0.01 * (hi - lo)).collect())
}

/// Per-run traces in a space min-max normalized over the union of all
/// runs, with reference point `(1, 1)`. Values lie in `[0, 1]`.
pub fn normalized_hypervolume(
    runs: &[&EvaluationStore],
    objectives: &[ObjectiveSpec],
    stride: usize,
) -> Result<Vec<HypervolumeTrace>> {
    check_two(objectives)?;
    if runs.is_empty() {
        return Err(Error::Empty("normalized hypervolume needs at least one run"));
    }
    let bounds = union_bounds(runs, objectives)?;
    if let Some(j) = bounds.iter().position(|(lo, hi)| !(hi > lo)) {
        return Err(Error::DegenerateRange(j));
    }
    runs.iter()
        .map(|run| {
            let pts: Vec<Vec<f64>> = run
                .minimized(objectives, run.len())
                .into_iter()
                .map(|p| p.iter().zip(&bounds).map(|(v, (lo, hi))| (v - lo) / (hi - lo)).collect())
                .collect();
            trace_of_points(&pts, &[1.0, 1.0], stride)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume_2d(&[vec![0.0, 0.0]], &[1.0, 1.0]).unwrap(), 1.0);
        let hv = hypervolume_2d(&[vec![0.2, 0.6], vec![0.6, 0.2]], &[1.0, 1.0]).unwrap();
        assert!((hv - 0.48).abs() < 1e-12, "{hv}");
        assert_eq!(hypervolume_2d(&[vec![1.0, 0.0], vec![2.0, 2.0]], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(hypervolume_2d(&[vec![0.0, 0.0, 0.0]], &[1.0, 1.0]), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn pareto_front_examples() {
        assert_eq!(pareto_front(&[vec![3.0, 4.0]]).unwrap(), vec![0]);
        assert_eq!(pareto_front(&[vec![2.0, 2.0], vec![1.0, 1.0]]).unwrap(), vec![1]);
        let dup = [vec![1.0, 2.0], vec![2.0, 1.0], vec![1.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(pareto_front(&dup).unwrap(), vec![0, 1, 2]);
        assert!(pareto_front(&[]).is_err());
    }

    #[test]
    fn trace_includes_final_count() {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 / 10.0, 1.0 - i as f64 / 10.0]).collect();
        let t = trace_of_points(&pts, &[1.0, 1.0], 3).unwrap();
        let counts: Vec<usize> = t.points.iter().map(|p| p.0).collect();
        assert_eq!(counts, vec![3, 6, 7]);
        assert!(t.points.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(trace_of_points(&pts, &[1.0, 1.0], 0).is_err());
    }
}

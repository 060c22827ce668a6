use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `a` dominates `b` (minimization): no worse everywhere, better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fronts of member indices, best first, via domination counts.
pub fn fast_nondominated_sort(objectives: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_unchecked(&objectives[i], &objectives[j]) {
                dominated_by_me[i].push(j);
                count[j] += 1;
            } else if dominates_unchecked(&objectives[j], &objectives[i]) {
                dominated_by_me[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of every member of one front. Identical objective
/// vectors are treated as a single point and share its distance.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    // Collapse duplicates.
    let mut distinct: Vec<&[f64]> = Vec::new();
    let mut slot = Vec::with_capacity(n);
    for p in front {
        match distinct.iter().position(|d| *d == p.as_slice()) {
            Some(k) => slot.push(k),
            None => {
                slot.push(distinct.len());
                distinct.push(p);
            }
        }
    }

    let d = distinct.len();
    let m = front[0].len();
    let mut dist = vec![0.0; d];
    if d <= 2 {
        dist.iter_mut().for_each(|v| *v = f64::INFINITY);
    } else {
        let mut order: Vec<usize> = (0..d).collect();
        for k in 0..m {
            order.sort_by(|&a, &b| distinct[a][k].total_cmp(&distinct[b][k]).then(a.cmp(&b)));
            let lo = distinct[order[0]][k];
            let hi = distinct[order[d - 1]][k];
            dist[order[0]] = f64::INFINITY;
            dist[order[d - 1]] = f64::INFINITY;
            let range = hi - lo;
            if range <= 0.0 {
                continue;
            }
            for w in 1..d - 1 {
                let i = order[w];
                dist[i] += (distinct[order[w + 1]][k] - distinct[order[w - 1]][k]) / range;
            }
        }
    }
    slot.into_iter().map(|k| dist[k]).collect()
}

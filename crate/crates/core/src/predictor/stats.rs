use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Mean absolute percentage error, in percent.
pub fn mape(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch { expected: actual.len(), found: predicted.len() });
    }
    if actual.is_empty() {
        return Err(Error::Empty("mape needs at least one value"));
    }
    if let Some(i) = actual.iter().position(|&a| a == 0.0) {
        return Err(Error::Domain(format!("actual value at {i} is zero")));
    }
    let total: f64 = predicted.iter().zip(actual).map(|(p, a)| ((p - a) / a).abs()).sum();
    Ok(100.0 * total / actual.len() as f64)
}

/// Kendall's tau-b in `O(n log n)` (Knight's merge-sort counting).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, available: x.len() });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in rank correlation input".into()));
    }
    let n = x.len() as u64;
    let cmp = |a: f64, b: f64| a.partial_cmp(&b).unwrap_or(Ordering::Equal);

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp(a.0, b.0).then(cmp(a.1, b.1)));

    let total = n * (n - 1) / 2;
    let x_ties = tied_pairs(&pairs, |a, b| a.0 == b.0);
    let joint_ties = tied_pairs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = ys.clone();
    let swaps = merge_count(&mut ys, &mut buf);
    let y_ties = tied_pairs(&ys, |a, b| a == b);

    let left = total - x_ties;
    let right = total - y_ties;
    if left == 0 || right == 0 {
        return Err(Error::UndefinedCorrelation("all pairs tied"));
    }
    let numer = total as i64 - x_ties as i64 - y_ties as i64 + joint_ties as i64 - 2 * swaps as i64;
    Ok(numer as f64 / libm::sqrt(left as f64 * right as f64))
}

/// Tied pairs within runs of a sorted slice.
fn tied_pairs<T>(sorted: &[T], same: impl Fn(&T, &T) -> bool) -> u64 {
    let mut ties = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties + run * (run - 1) / 2
}

/// Stable merge sort returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[110.0], &[100.0]).unwrap(), 10.0);
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!((mape(&[90.0, 121.0], &[100.0, 110.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(mape(&[1.0], &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn kendall_extremes() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &rev).unwrap(), -1.0);
        assert!(matches!(kendall_tau(&[1.0, 1.0, 1.0], &x[..3]), Err(Error::UndefinedCorrelation(_))));
    }

    #[test]
    fn kendall_with_ties_matches_hand_count() {
        // Pairs: C = 3, D = 2, one tie in x only.
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [2.0, 1.0, 3.0, 1.5];
        let expected = 1.0 / libm::sqrt(6.0 * 5.0);
        assert!((kendall_tau(&x, &y).unwrap() - expected).abs() < 1e-15);
    }
}

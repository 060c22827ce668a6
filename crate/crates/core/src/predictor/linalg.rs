use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative pivot threshold below which a column counts as dependent.
const PIVOT_TOL: f64 = 1e-12;

/// Solves the square system `a x = b` (row-major `a`, `n x n`) by Gaussian
/// elimination with complete pivoting. A rank-deficient matrix is reported
/// with its numerical rank.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut col_perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for r in k..n {
            for c in k..n {
                let v = a[r * n + c].abs();
                if v > best {
                    (pr, pc, best) = (r, c, v);
                }
            }
        }
        if best <= PIVOT_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Singular { rank: k, dim: n });
        }
        if pr != k {
            for c in 0..n {
                a.swap(k * n + c, pr * n + c);
            }
            b.swap(k, pr);
        }
        if pc != k {
            for r in 0..n {
                a.swap(r * n + k, r * n + pc);
            }
            col_perm.swap(k, pc);
        }
        let pivot = a[k * n + k];
        for r in k + 1..n {
            let f = a[r * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            for c in k..n {
                a[r * n + c] -= f * a[k * n + c];
            }
            b[r] -= f * b[k];
        }
    }

    let mut y = alloc::vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|c| a[k * n + c] * y[c]).sum();
        y[k] = (b[k] - tail) / a[k * n + k];
    }
    let mut x = alloc::vec![0.0; n];
    for (k, &p) in col_perm.iter().enumerate() {
        x[p] = y[k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_small_system() {
        let x = solve(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn reports_rank() {
        let err = solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0], 2).unwrap_err();
        assert_eq!(err, Error::Singular { rank: 1, dim: 2 });
    }
}

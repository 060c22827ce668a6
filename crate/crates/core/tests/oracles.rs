//! Fast routines checked against slow, obviously-correct reimplementations.

use linas_core::metrics::{hypervolume_2d, pareto_front};
use linas_core::moea::{dominates, fast_nondominated_sort};
use linas_core::predictor::{fit_ridge, kendall_tau};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(rng: &mut ChaCha8Rng, n: usize, m: usize, levels: u32) -> Vec<Vec<f64>> {
    // Small integer grids force plenty of ties and duplicates.
    (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..levels) as f64).collect()).collect()
}

fn brute_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Peels fronts one at a time: O(n^3) but transparent.
fn brute_fronts(p: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..p.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| brute_dominates(&p[j], &p[i]))).collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

#[test]
fn nondominated_sort_matches_front_peeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..100 {
        let n = rng.gen_range(1..=200);
        let m = if case % 2 == 0 { 2 } else { 3 };
        let p = points(&mut rng, n, m, 12);
        let mut fast = fast_nondominated_sort(&p);
        fast.iter_mut().for_each(|f| f.sort_unstable());
        assert_eq!(fast, brute_fronts(&p), "case {case}");
        assert_eq!(pareto_front(&p).unwrap(), brute_fronts(&p)[0], "case {case}");
    }
}

#[test]
fn dominance_agrees_with_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let p = points(&mut rng, 2, 3, 3);
        assert_eq!(dominates(&p[0], &p[1]).unwrap(), brute_dominates(&p[0], &p[1]));
    }
}

/// tau-b from explicit pair counts.
fn pair_tau(x: &[f64], y: &[f64]) -> f64 {
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {}
                (true, false) => tx += 1,
                (false, true) => ty += 1,
                _ if dx * dy > 0.0 => conc += 1,
                _ => disc += 1,
            }
        }
    }
    (conc - disc) as f64 / (((conc + disc + tx) as f64) * ((conc + disc + ty) as f64)).sqrt()
}

#[test]
fn kendall_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let levels = if case % 2 == 0 { 8 } else { 1000 };
        let x: Vec<f64> = (0..50).map(|_| rng.gen_range(0..levels) as f64).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.gen_range(0..levels) as f64).collect();
        assert_eq!(kendall_tau(&x, &y).unwrap(), pair_tau(&x, &y), "case {case}");
    }
}

#[test]
fn ridge_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..50 {
        let n = rng.gen_range(5..60);
        let d = rng.gen_range(1..10);
        let alpha = [0.1, 1.0, 10.0][case % 3];
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let model = fit_ridge(&x, &y, alpha).unwrap();

        let mx: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let my = y.iter().sum::<f64>() / n as f64;
        let a = DMatrix::from_fn(n, d, |i, j| x[i][j] - mx[j]);
        let b = DVector::from_iterator(n, y.iter().map(|v| v - my));
        let gram = a.transpose() * &a + DMatrix::identity(d, d) * alpha;
        let w = gram.lu().solve(&(a.transpose() * b)).unwrap();
        let intercept = my - w.iter().zip(&mx).map(|(w, m)| w * m).sum::<f64>();
        for j in 0..d {
            assert!((model.weights[j] - w[j]).abs() < 1e-8, "case {case}");
        }
        assert!((model.intercept - intercept).abs() < 1e-8, "case {case}");
    }
}

/// Area of the union of reference-anchored rectangles on the compressed grid.
fn grid_union(points: &[Vec<f64>], r: [f64; 2]) -> f64 {
    let inside: Vec<&Vec<f64>> = points.iter().filter(|p| p[0] < r[0] && p[1] < r[1]).collect();
    let mut xs: Vec<f64> = inside.iter().map(|p| p[0]).chain([r[0]]).collect();
    let mut ys: Vec<f64> = inside.iter().map(|p| p[1]).chain([r[1]]).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    xs.dedup();
    ys.dedup();
    let mut area = 0.0;
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            if inside.iter().any(|p| p[0] <= wx[0] && p[1] <= wy[0]) {
                area += (wx[1] - wx[0]) * (wy[1] - wy[0]);
            }
        }
    }
    area
}

#[test]
fn hypervolume_matches_grid_union_and_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..50 {
        let n = rng.gen_range(1..40);
        let p: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.1), rng.gen_range(0.0..1.1)]).collect();
        let hv = hypervolume_2d(&p, &[1.0, 1.0]).unwrap();
        assert!((hv - grid_union(&p, [1.0, 1.0])).abs() < 1e-9, "case {case}");

        if case < 5 {
            let samples = 1_000_000;
            let hits = (0..samples)
                .filter(|_| {
                    let (u, v) = (rng.gen::<f64>(), rng.gen::<f64>());
                    p.iter().any(|q| q[0] <= u && q[1] <= v)
                })
                .count();
            let est = hits as f64 / samples as f64;
            let se = (est * (1.0 - est) / samples as f64).sqrt().max(1e-6);
            assert!((est - hv).abs() <= 3.0 * se, "case {case}: {est} vs {hv}");
        }
    }
}

#[test]
fn hypervolume_is_monotone_and_ignores_dominated_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut p: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.gen(), rng.gen()]).collect();
    for _ in 0..1000 {
        let before = hypervolume_2d(&p, &[1.0, 1.0]).unwrap();
        let base = p[rng.gen_range(0..p.len())].clone();
        let worse = vec![base[0] + rng.gen::<f64>() * 0.1, base[1] + rng.gen::<f64>() * 0.1];
        let mut with_worse = p.clone();
        with_worse.push(worse);
        assert_eq!(hypervolume_2d(&with_worse, &[1.0, 1.0]).unwrap(), before);

        let q = vec![rng.gen(), rng.gen()];
        p.push(q);
        assert!(hypervolume_2d(&p, &[1.0, 1.0]).unwrap() >= before);
        if p.len() > 30 {
            p.remove(0);
        }
    }
}

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::space::{Genotype, SearchSpace};

/// Binary tournament: two distinct members drawn uniformly; lower rank
/// wins, then larger crowding distance, then a fair coin.
pub fn tournament_select<R: Rng + ?Sized>(ranks: &[usize], crowding: &[f64], rng: &mut R) -> Result<usize> {
    let n = ranks.len();
    if n < 2 {
        return Err(Error::Parameter(alloc::format!("tournament needs at least 2 members, got {n}")));
    }
    if crowding.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: crowding.len() });
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    Ok(if ranks[a] != ranks[b] {
        if ranks[a] < ranks[b] { a } else { b }
    } else if crowding[a] != crowding[b] {
        if crowding[a] > crowding[b] { a } else { b }
    } else if rng.gen::<bool>() {
        a
    } else {
        b
    })
}

/// Exchanges positions `lo..hi` between two genotypes.
pub fn swap_segment(a: &Genotype, b: &Genotype, lo: usize, hi: usize) -> (Genotype, Genotype) {
    let (mut x, mut y) = (a.clone(), b.clone());
    for i in lo..hi {
        core::mem::swap(&mut x.0[i], &mut y.0[i]);
    }
    (x, y)
}

/// With probability `prob`, swaps the segment between two sorted random
/// cut points; otherwise returns copies of the parents.
pub fn crossover_two_point<R: Rng + ?Sized>(
    a: &Genotype,
    b: &Genotype,
    prob: f64,
    rng: &mut R,
) -> Result<(Genotype, Genotype)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::MalformedGenotype("crossover needs genotypes of length >= 2".into()));
    }
    if rng.gen::<f64>() >= prob {
        return Ok((a.clone(), b.clone()));
    }
    // Cut sites are 0..=len.
    let n = a.len();
    let p = rng.gen_range(0..=n);
    let mut q = rng.gen_range(0..n);
    if q >= p {
        q += 1;
    }
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    Ok(swap_segment(a, b, lo, hi))
}

/// Each position is, with probability `prob`, resampled uniformly from the
/// other options of its variable. Single-option positions never change.
pub fn mutate<R: Rng + ?Sized>(space: &SearchSpace, g: &Genotype, prob: f64, rng: &mut R) -> Genotype {
    let indices: Vec<usize> = g
        .indices()
        .iter()
        .zip(space.variables())
        .map(|(&idx, v)| {
            let k = v.arity();
            if k < 2 || rng.gen::<f64>() >= prob {
                return idx;
            }
            let other = rng.gen_range(0..k - 1);
            if other >= idx { other + 1 } else { other }
        })
        .collect();
    Genotype(indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::space::DesignVariable;
    use alloc::vec;

    #[test]
    fn tournament_rules() {
        let mut rng = stream(1, "t", 0);
        for _ in 0..50 {
            assert_eq!(tournament_select(&[0, 1], &[0.1, 9.0], &mut rng).unwrap(), 0);
            assert_eq!(tournament_select(&[2, 2], &[f64::INFINITY, 0.5], &mut rng).unwrap(), 0);
        }
        assert!(tournament_select(&[0], &[0.0], &mut rng).is_err());
    }

    #[test]
    fn crossover_cases() {
        let a = Genotype(vec![0, 0, 0, 0]);
        let b = Genotype(vec![1, 1, 1, 1]);
        assert_eq!(swap_segment(&a, &b, 1, 3), (Genotype(vec![0, 1, 1, 0]), Genotype(vec![1, 0, 0, 1])));
        let mut rng = stream(2, "t", 0);
        for _ in 0..20 {
            assert_eq!(crossover_two_point(&a, &b, 0.0, &mut rng).unwrap(), (a.clone(), b.clone()));
            let (x, y) = crossover_two_point(&a, &b, 1.0, &mut rng).unwrap();
            for i in 0..4 {
                assert_eq!(x.0[i] + y.0[i], 1);
            }
        }
        assert!(crossover_two_point(&a, &Genotype(vec![0]), 1.0, &mut rng).is_err());
    }

    #[test]
    fn mutation_cases() {
        let space = SearchSpace::new(
            "bits",
            (0..6).map(|i| DesignVariable::new(alloc::format!("b{i}"), vec![0, 1], "g")).collect(),
            vec![],
        )
        .unwrap();
        let g = Genotype(vec![0, 1, 0, 1, 1, 0]);
        let mut rng = stream(3, "t", 0);
        assert_eq!(mutate(&space, &g, 0.0, &mut rng), g);
        let flipped = mutate(&space, &g, 1.0, &mut rng);
        assert!(flipped.0.iter().zip(&g.0).all(|(a, b)| a != b));

        let single = SearchSpace::new("one", vec![DesignVariable::new("v", vec![3], "g")], vec![]).unwrap();
        assert_eq!(mutate(&single, &Genotype(vec![0]), 1.0, &mut rng), Genotype(vec![0]));
    }
}

//! Unordered Q-tuples of points and the matching metric between them.

use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};

/// Largest Q handled by exhaustive permutation search.
pub const EXHAUSTIVE_MAX_Q: usize = 5;

/// Q points in R^n stored row-major. The order of the rows carries no meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTuple {
    dim: usize,
    values: Vec<f64>,
}

/// How optimal matchings are found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchingStrategy {
    /// Exhaustive search up to [`EXHAUSTIVE_MAX_Q`], assignment algorithm beyond.
    #[default]
    Auto,
    Exhaustive,
    Assignment,
}

/// An optimal matching: `b[perm[i]]` is paired with `a[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub perm: Vec<usize>,
    pub cost: f64,
}

impl QTuple {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("tuple points need a positive dimension".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not split into points of dimension {dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("tuple values must be finite".into()));
        }
        Ok(Self { dim, values })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("empty point list; use QTuple::empty".into()))?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(dim_mismatch(dim, p.len()));
        }
        Self::new(dim, points.concat())
    }

    pub fn scalars(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// `q` copies of `point`.
    pub fn replicate(point: &[f64], q: usize) -> Result<Self> {
        Self::new(point.len(), point.repeat(q))
    }

    pub fn q(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Σ|a_i|².
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Largest distance between two members.
    pub fn diameter(&self) -> f64 {
        let q = self.q();
        let mut best = 0.0f64;
        for i in 0..q {
            for j in i + 1..q {
                best = best.max(dist_sq(self.point(i), self.point(j)).sqrt());
            }
        }
        best
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Same multiset with rows reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let q = self.q();
        if perm.len() != q || !perm.iter().all(|&p| p < q) || perm.iter().unique().count() != q {
            return Err(Error::InvalidInput(format!("not a permutation of 0..{q}")));
        }
        Ok(Self { dim: self.dim, values: perm.iter().flat_map(|&p| self.point(p).to_vec()).collect() })
    }
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_pair(a: &QTuple, b: &QTuple) -> Result<()> {
    if a.dim != b.dim {
        return Err(dim_mismatch(a.dim, b.dim));
    }
    if a.q() != b.q() {
        return Err(Error::InvalidInput(format!(
            "cardinality mismatch: {} versus {}",
            a.q(),
            b.q()
        )));
    }
    Ok(())
}

fn cost_of(a: &QTuple, b: &QTuple, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &p)| dist_sq(a.point(i), b.point(p))).sum()
}

fn permutation_table(q: usize) -> &'static [Vec<usize>] {
    static TABLES: [OnceLock<Vec<Vec<usize>>>; EXHAUSTIVE_MAX_Q + 1] =
        [const { OnceLock::new() }; EXHAUSTIVE_MAX_Q + 1];
    TABLES[q].get_or_init(|| (0..q).permutations(q).collect())
}

/// Lexicographically first permutation among the minimizers.
fn exhaustive(a: &QTuple, b: &QTuple) -> Matching {
    let q = a.q();
    match q {
        0 => Matching { perm: vec![], cost: 0.0 },
        1 => Matching { perm: vec![0], cost: dist_sq(a.point(0), b.point(0)) },
        2 => {
            let straight = dist_sq(a.point(0), b.point(0)) + dist_sq(a.point(1), b.point(1));
            let crossed = dist_sq(a.point(0), b.point(1)) + dist_sq(a.point(1), b.point(0));
            if crossed < straight {
                Matching { perm: vec![1, 0], cost: crossed }
            } else {
                Matching { perm: vec![0, 1], cost: straight }
            }
        }
        _ if q <= EXHAUSTIVE_MAX_Q => {
            let mut best: Option<(&Vec<usize>, f64)> = None;
            for perm in permutation_table(q) {
                let c = cost_of(a, b, perm);
                if best.is_none_or(|(_, bc)| c < bc) {
                    best = Some((perm, c));
                }
            }
            let (perm, cost) = best.expect("nonempty permutation table");
            Matching { perm: perm.clone(), cost }
        }
        _ => {
            let mut best_perm: Vec<usize> = (0..q).collect();
            let mut best = cost_of(a, b, &best_perm);
            for perm in (0..q).permutations(q) {
                let c = cost_of(a, b, &perm);
                if c < best {
                    best = c;
                    best_perm = perm;
                }
            }
            Matching { perm: best_perm, cost: best }
        }
    }
}

/// Hungarian algorithm with potentials, O(Q³).
fn assignment(a: &QTuple, b: &QTuple) -> Matching {
    let q = a.q();
    if q == 0 {
        return Matching { perm: vec![], cost: 0.0 };
    }
    let cost = |i: usize, j: usize| dist_sq(a.point(i), b.point(j));
    // 1-based rows and columns, column 0 is the sentinel.
    let mut u = vec![0.0; q + 1];
    let mut v = vec![0.0; q + 1];
    let mut row_of = vec![0usize; q + 1];
    let mut way = vec![0usize; q + 1];
    for i in 1..=q {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; q + 1];
        let mut used = vec![false; q + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=q {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=q {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; q];
    for j in 1..=q {
        perm[row_of[j] - 1] = j - 1;
    }
    let cost = cost_of(a, b, &perm);
    Matching { perm, cost }
}

pub fn optimal_matching_with(a: &QTuple, b: &QTuple, strategy: MatchingStrategy) -> Result<Matching> {
    check_pair(a, b)?;
    Ok(match strategy {
        MatchingStrategy::Exhaustive => exhaustive(a, b),
        MatchingStrategy::Assignment => assignment(a, b),
        MatchingStrategy::Auto if a.q() <= EXHAUSTIVE_MAX_Q => exhaustive(a, b),
        MatchingStrategy::Auto => assignment(a, b),
    })
}

pub fn optimal_matching(a: &QTuple, b: &QTuple) -> Result<Matching> {
    optimal_matching_with(a, b, MatchingStrategy::Auto)
}

/// min_σ sqrt(Σ|a_i − b_σ(i)|²).
pub fn tuple_distance(a: &QTuple, b: &QTuple) -> Result<f64> {
    Ok(optimal_matching(a, b)?.cost.sqrt())
}

/// Unchecked squared distance for hot loops; callers guarantee equal shapes.
pub(crate) fn matched_cost(a: &QTuple, b: &QTuple, strategy: MatchingStrategy) -> Matching {
    debug_assert!(check_pair(a, b).is_ok());
    match strategy {
        MatchingStrategy::Assignment => assignment(a, b),
        MatchingStrategy::Auto if a.q() > EXHAUSTIVE_MAX_Q => assignment(a, b),
        _ => exhaustive(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tuple(rng: &mut ChaCha8Rng, q: usize, dim: usize) -> QTuple {
        QTuple::new(dim, (0..q * dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn unordered_on_the_line() {
        let a = QTuple::scalars(&[0.0, 1.0]).unwrap();
        let b = QTuple::scalars(&[1.0, 0.0]).unwrap();
        assert_eq!(tuple_distance(&a, &b).unwrap(), 0.0);
        assert_eq!(tuple_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn cardinality_and_dimension_mismatch() {
        let a = QTuple::scalars(&[0.0, 1.0]).unwrap();
        let b = QTuple::scalars(&[1.0]).unwrap();
        assert!(matches!(tuple_distance(&a, &b), Err(Error::InvalidInput(_))));
        let c = QTuple::new(2, vec![0.0, 1.0]).unwrap();
        assert!(tuple_distance(&b, &c).is_err());
        assert!(QTuple::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(QTuple::new(1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn ties_take_the_lexicographically_first_permutation() {
        let a = QTuple::scalars(&[0.0, 0.0, 0.0]).unwrap();
        let b = QTuple::scalars(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(exhaustive(&a, &b).perm, vec![0, 1, 2]);
        let a = QTuple::scalars(&[0.0, 0.0]).unwrap();
        let b = QTuple::scalars(&[2.0, -2.0]).unwrap();
        assert_eq!(exhaustive(&a, &b).perm, vec![0, 1]);
    }

    #[test]
    fn assignment_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in 1..=7 {
            for _ in 0..40 {
                let a = random_tuple(&mut rng, q, 2);
                let b = random_tuple(&mut rng, q, 2);
                let brute = exhaustive(&a, &b);
                let hung = assignment(&a, &b);
                assert_eq!(brute.perm, hung.perm, "q = {q}");
                assert_eq!(brute.cost, hung.cost);
            }
        }
    }

    #[test]
    fn diameter_of_constants() {
        let t = QTuple::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(t.diameter(), 5.0);
        assert_eq!(QTuple::replicate(&[2.0], 3).unwrap().diameter(), 0.0);
    }

    proptest! {
        #[test]
        fn relabeling_changes_nothing(seed in 0u64..1000, q in 1usize..7, shift in 0usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_tuple(&mut rng, q, 3);
            let b = random_tuple(&mut rng, q, 3);
            let perm: Vec<usize> = (0..q).map(|i| (i + shift) % q).collect();
            let d = tuple_distance(&a, &b).unwrap();
            prop_assert_eq!(d, tuple_distance(&a, &b.permuted(&perm).unwrap()).unwrap());
            prop_assert!((d - tuple_distance(&b, &a).unwrap()).abs() <= 1e-14);
            prop_assert!((tuple_distance(&a.scaled(2.0), &b.scaled(2.0)).unwrap() - 2.0 * d).abs() <= 1e-12);
        }

        #[test]
        fn triangle_inequality(seed in 0u64..1000, q in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_tuple(&mut rng, q, 2);
            let b = random_tuple(&mut rng, q, 2);
            let c = random_tuple(&mut rng, q, 2);
            let ab = tuple_distance(&a, &b).unwrap();
            let bc = tuple_distance(&b, &c).unwrap();
            let ac = tuple_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}

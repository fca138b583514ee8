//! Linear-algebra substrate: ambient vectors, oriented-free m-planes carried
//! as orthonormal frames, orthogonal projections and tangential divergence.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Error, Result};

/// Orthonormality tolerance for frames handed in by callers.
pub const FRAME_TOL: f64 = 1e-10;

/// Pivot below which Gram–Schmidt declares the input rank deficient.
pub const PIVOT_TOL: f64 = 1e-10;

/// A point or direction in the ambient space R^{m+n}.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector(Vec<f64>);

impl AmbientVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self(s.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &AmbientVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(self.0.iter().map(|x| a * x).collect())
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &AmbientVector) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(x, y)| x + a * y).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

impl Index<usize> for AmbientVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for AmbientVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Add for &AmbientVector {
    type Output = AmbientVector;
    fn add(self, rhs: &AmbientVector) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &AmbientVector {
    type Output = AmbientVector;
    fn sub(self, rhs: &AmbientVector) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &AmbientVector {
    type Output = AmbientVector;
    fn neg(self) -> AmbientVector {
        AmbientVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &AmbientVector {
    type Output = AmbientVector;
    fn mul(self, rhs: f64) -> AmbientVector {
        self.scale(rhs)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// An m-dimensional linear subspace of R^{m+n}, stored as an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MPlane {
    frame: Vec<AmbientVector>,
    ambient_dim: usize,
}

impl MPlane {
    /// Wraps an already orthonormal frame, checking the Gram matrix.
    pub fn from_orthonormal(frame: Vec<AmbientVector>) -> Result<Self> {
        let ambient_dim = frame
            .first()
            .map(AmbientVector::dim)
            .ok_or_else(|| Error::InvalidInput("empty frame".into()))?;
        if let Some(bad) = frame.iter().find(|e| e.dim() != ambient_dim) {
            return Err(dim_mismatch(ambient_dim, bad.dim()));
        }
        let plane = Self { frame, ambient_dim };
        let defect = plane.gram_defect();
        if defect > FRAME_TOL {
            return Err(Error::InvalidInput(format!(
                "frame is not orthonormal (Gram defect {defect:.3e})"
            )));
        }
        Ok(plane)
    }

    /// The plane spanned by the first `m` coordinate axes of R^`ambient_dim`.
    pub fn coordinate(m: usize, ambient_dim: usize) -> Self {
        assert!(m <= ambient_dim);
        Self {
            frame: (0..m).map(|i| AmbientVector::basis(ambient_dim, i)).collect(),
            ambient_dim,
        }
    }

    /// A Haar-random m-plane in R^`ambient_dim`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, ambient_dim: usize) -> Self {
        loop {
            let vectors: Vec<AmbientVector> = (0..m)
                .map(|_| {
                    AmbientVector::new(
                        (0..ambient_dim)
                            .map(|_| rng.sample::<f64, _>(StandardNormal))
                            .collect(),
                    )
                })
                .collect();
            if let Ok(p) = frame_from_spanning(&vectors) {
                return p;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn frame(&self) -> &[AmbientVector] {
        &self.frame
    }

    /// max |⟨e_i, e_j⟩ − δ_ij|
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.frame.iter().enumerate() {
            for (j, b) in self.frame.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim {
            return Err(dim_mismatch(self.ambient_dim, v.len()));
        }
        Ok(())
    }

    /// Orthogonal projection onto the plane.
    pub fn project(&self, v: &AmbientVector) -> Result<AmbientVector> {
        self.check_dim(v.as_slice())?;
        let mut out = vec![0.0; self.ambient_dim];
        self.project_into(v.as_slice(), &mut out);
        Ok(AmbientVector(out))
    }

    /// Orthogonal projection onto the orthogonal complement.
    pub fn project_perp(&self, v: &AmbientVector) -> Result<AmbientVector> {
        let p = self.project(v)?;
        Ok(v - &p)
    }

    pub(crate) fn project_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for e in &self.frame {
            let c = dot(e.as_slice(), v);
            for (o, ei) in out.iter_mut().zip(e.as_slice()) {
                *o += c * ei;
            }
        }
    }

    /// |P_{π⊥} v| computed from the explicit complement vector (no cancellation).
    pub(crate) fn perp_norm(&self, v: &[f64]) -> f64 {
        let mut p = vec![0.0; v.len()];
        self.project_into(v, &mut p);
        v.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Re-frames the same plane by an orthogonal m×m matrix (row-major).
    pub fn rotated_frame(&self, rotation: &DMatrix<f64>) -> Self {
        let m = self.dim();
        let frame = (0..m)
            .map(|i| {
                let mut v = AmbientVector::zeros(self.ambient_dim);
                for j in 0..m {
                    v = v.axpy(rotation[(i, j)], &self.frame[j]);
                }
                v
            })
            .collect();
        Self {
            frame,
            ambient_dim: self.ambient_dim,
        }
    }
}

/// div_π X = Σ_i ⟨e_i, J e_i⟩ where `J[(a, b)] = ∂X_a/∂x_b`.
pub fn tangential_divergence(jacobian: &DMatrix<f64>, plane: &MPlane) -> Result<f64> {
    let d = plane.ambient_dim();
    if jacobian.nrows() != d || jacobian.ncols() != d {
        return Err(Error::InvalidInput(format!(
            "jacobian is {}x{}, plane lives in R^{d}",
            jacobian.nrows(),
            jacobian.ncols()
        )));
    }
    let mut total = 0.0;
    for e in plane.frame() {
        let e = e.as_slice();
        for a in 0..d {
            let mut row = 0.0;
            for b in 0..d {
                row += jacobian[(a, b)] * e[b];
            }
            total += e[a] * row;
        }
    }
    Ok(total)
}

/// Orthonormal frame for span(vectors): two modified Gram–Schmidt passes.
pub fn frame_from_spanning(vectors: &[AmbientVector]) -> Result<MPlane> {
    let dim = vectors
        .first()
        .map(AmbientVector::dim)
        .ok_or_else(|| Error::InvalidInput("no spanning vectors".into()))?;
    if let Some(bad) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(dim_mismatch(dim, bad.dim()));
    }
    let mut frame: Vec<AmbientVector> = Vec::with_capacity(vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        let scale = v.norm();
        if !(scale > 0.0) || !v.is_finite() {
            return Err(Error::Degenerate(format!("vector {k} is zero or non-finite")));
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for e in &frame {
                w = w.axpy(-e.dot(&w), e);
            }
        }
        let pivot = w.norm();
        if pivot < PIVOT_TOL * scale.max(1.0) {
            return Err(Error::Degenerate(format!(
                "vector {k} is linearly dependent on its predecessors (pivot {pivot:.3e})"
            )));
        }
        frame.push(w.scale(1.0 / pivot));
    }
    Ok(MPlane {
        frame,
        ambient_dim: dim,
    })
}

/// Volume of the unit ball in R^m.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / m as f64 * unit_ball_volume(m - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from_slice(c)
    }

    #[test]
    fn project_onto_coordinate_plane() {
        let plane = MPlane::coordinate(2, 3);
        let x = v(&[1.0, 2.0, 3.0]);
        assert_eq!(plane.project(&x).unwrap(), v(&[1.0, 2.0, 0.0]));
        assert_eq!(plane.project_perp(&x).unwrap(), v(&[0.0, 0.0, 3.0]));
    }

    #[test]
    fn project_dimension_mismatch() {
        let plane = MPlane::coordinate(2, 3);
        assert!(matches!(
            plane.project(&v(&[1.0, 2.0])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn perp_orthogonal_to_random_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spanning: Vec<_> = (0..2)
            .map(|_| v(&(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect();
        let plane = frame_from_spanning(&spanning).unwrap();
        for _ in 0..100 {
            let x = v(&(0..4).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<_>>());
            let perp = plane.project_perp(&x).unwrap();
            for e in plane.frame() {
                assert!(perp.dot(e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn divergence_of_identity_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..4 {
            let plane = MPlane::random(&mut rng, m, 5);
            let id = DMatrix::<f64>::identity(5, 5);
            assert!((tangential_divergence(&id, &plane).unwrap() - m as f64).abs() < 1e-12);
            let zero = DMatrix::<f64>::zeros(5, 5);
            assert_eq!(tangential_divergence(&zero, &plane).unwrap(), 0.0);
        }
    }

    /// Jacobian of x ↦ x/|x| written out symbolically: (I − x̂x̂ᵀ)/|x|.
    #[test]
    fn divergence_of_unit_radial_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let plane = MPlane::random(&mut rng, 2, 4);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let x = plane.frame()[0].scale(a).axpy(b, &plane.frame()[1]);
            let r = x.norm();
            let mut jac = DMatrix::<f64>::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    jac[(i, j)] = (delta - x[i] * x[j] / (r * r)) / r;
                }
            }
            let div = tangential_divergence(&jac, &plane).unwrap();
            assert!((div - 1.0 / r).abs() < 1e-10, "div {div} vs {}", 1.0 / r);
        }
    }

    #[test]
    fn gram_schmidt_cases() {
        let p = frame_from_spanning(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 2.0, 0.0])]).unwrap();
        assert_eq!(p.frame()[0], v(&[1.0, 0.0, 0.0]));
        assert_eq!(p.frame()[1], v(&[0.0, 1.0, 0.0]));

        let s = 0.5f64.sqrt();
        let ortho = vec![v(&[s, s, 0.0]), v(&[-s, s, 0.0])];
        let q = frame_from_spanning(&ortho).unwrap();
        for (a, b) in q.frame().iter().zip(&ortho) {
            assert!((a - b).norm() < 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vs: Vec<_> = (0..3)
            .map(|_| v(&(0..5).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect();
        assert!(frame_from_spanning(&vs).unwrap().gram_defect() < 1e-10);

        let dependent = vec![v(&[1.0, 2.0, 3.0]), v(&[2.0, 4.0, 6.0])];
        assert!(matches!(
            frame_from_spanning(&dependent),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-10.0f64..10.0, d)
        }

        proptest! {
            #[test]
            fn projection_invariants(seed in 0u64..1000, x in vec_strategy(5)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let plane = MPlane::random(&mut rng, 3, 5);
                let x = AmbientVector::new(x);
                let p = plane.project(&x).unwrap();
                let q = plane.project_perp(&x).unwrap();
                let pp = plane.project(&p).unwrap();
                prop_assert!((&pp - &p).norm() <= 1e-12 * (1.0 + x.norm()));
                let split = p.norm_sq() + q.norm_sq();
                prop_assert!((split - x.norm_sq()).abs() <= 1e-12 * (1.0 + x.norm_sq()));
            }

            #[test]
            fn divergence_frame_independent(seed in 0u64..1000, angle in 0.0f64..6.3,
                                            entries in vec_strategy(16)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let plane = MPlane::random(&mut rng, 2, 4);
                let jac = DMatrix::from_row_slice(4, 4, &entries);
                let (c, s) = (angle.cos(), angle.sin());
                let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
                let other = plane.rotated_frame(&rot);
                let a = tangential_divergence(&jac, &plane).unwrap();
                let b = tangential_divergence(&jac, &other).unwrap();
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
        }
    }
}

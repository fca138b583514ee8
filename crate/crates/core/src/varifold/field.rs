//! Compactly supported C¹ test vector fields given by value and Jacobian
//! callbacks.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::DiscreteVarifold;
use crate::boundary::BoundaryManifold;
use crate::error::{dim_mismatch, Error, Result};
use crate::geometry::{AmbientVector, MPlane};

type ValueFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// χ with Dχ, vanishing outside the closed ball B(center, support_radius).
/// `jacobian[(a, b)] = ∂χ_a/∂x_b`.
#[derive(Clone)]
pub struct TestVectorField {
    ambient_dim: usize,
    center: AmbientVector,
    support_radius: f64,
    value: Arc<ValueFn>,
    jacobian: Arc<JacobianFn>,
}

impl fmt::Debug for TestVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestVectorField")
            .field("ambient_dim", &self.ambient_dim)
            .field("center", &self.center)
            .field("support_radius", &self.support_radius)
            .finish_non_exhaustive()
    }
}

impl TestVectorField {
    pub fn new(
        center: AmbientVector,
        support_radius: f64,
        value: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jacobian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support_radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        Ok(Self {
            ambient_dim: center.dim(),
            center,
            support_radius,
            value: Arc::new(value),
            jacobian: Arc::new(jacobian),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn center(&self) -> &AmbientVector {
        &self.center
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub(crate) fn may_be_nonzero(&self, x: &[f64]) -> bool {
        if self.support_radius.is_infinite() {
            return true;
        }
        let r2: f64 = x
            .iter()
            .zip(self.center.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        r2 < self.support_radius * self.support_radius
    }

    pub(crate) fn value_at(&self, x: &[f64]) -> Vec<f64> {
        if self.may_be_nonzero(x) {
            (self.value)(x)
        } else {
            vec![0.0; self.ambient_dim]
        }
    }

    pub(crate) fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        if self.may_be_nonzero(x) {
            (self.jacobian)(x)
        } else {
            DMatrix::zeros(self.ambient_dim, self.ambient_dim)
        }
    }

    pub fn value(&self, x: &AmbientVector) -> Result<AmbientVector> {
        self.check(x)?;
        Ok(AmbientVector::new(self.value_at(x.as_slice())))
    }

    pub fn jacobian(&self, x: &AmbientVector) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.jacobian_at(x.as_slice()))
    }

    fn check(&self, x: &AmbientVector) -> Result<()> {
        if x.dim() != self.ambient_dim {
            return Err(dim_mismatch(self.ambient_dim, x.dim()));
        }
        Ok(())
    }

    /// χ(x) = ψ(|x − c| / R) (a + B(x − c)) with the smooth bump
    /// ψ(t) = exp(1 − 1/(1 − t²)) on [0, 1), ψ(0) = 1.
    pub fn bump(center: AmbientVector, radius: f64, a: AmbientVector, b: DMatrix<f64>) -> Result<Self> {
        let n = center.dim();
        if a.dim() != n {
            return Err(dim_mismatch(n, a.dim()));
        }
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "linear part is {}x{}, expected {n}x{n}",
                b.nrows(),
                b.ncols()
            )));
        }
        let c = center.clone();
        let (a1, b1) = (a.clone(), b.clone());
        let value = move |x: &[f64]| {
            let (psi, _, y) = bump_parts(x, c.as_slice(), radius);
            let mut out = a1.clone().into_inner();
            for i in 0..n {
                for j in 0..n {
                    out[i] += b1[(i, j)] * y[j];
                }
                out[i] *= psi;
            }
            out
        };
        let c = center.clone();
        let jacobian = move |x: &[f64]| {
            let (psi, dpsi_coef, y) = bump_parts(x, c.as_slice(), radius);
            // ∇ψ = dpsi_coef · y
            let mut inner = a.clone().into_inner();
            for i in 0..n {
                for j in 0..n {
                    inner[i] += b[(i, j)] * y[j];
                }
            }
            DMatrix::from_fn(n, n, |i, j| psi * b[(i, j)] + inner[i] * dpsi_coef * y[j])
        };
        Self::new(center, radius, value, jacobian)
    }

    /// Random bump fields supported in B(center, radius), tangent to the
    /// flat boundary `origin + span` along it:
    /// χ = ψ·(P_T a + P_T B₁ P_T y + B₂ P_⊥ y), y = x − origin.
    /// With `span` = None the fields are unconstrained.
    pub fn random_family(
        center: &AmbientVector,
        radius: f64,
        boundary: Option<(&AmbientVector, &MPlane)>,
        count: usize,
        seed: u64,
    ) -> Result<Vec<Self>> {
        let n = center.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauss = |rng: &mut ChaCha8Rng| rng.sample::<f64, _>(StandardNormal);
        let mut family = Vec::with_capacity(count);
        for _ in 0..count {
            let a = AmbientVector::new((0..n).map(|_| gauss(&mut rng)).collect());
            let b1 = DMatrix::from_fn(n, n, |_, _| gauss(&mut rng));
            let b2 = DMatrix::from_fn(n, n, |_, _| gauss(&mut rng));
            let field = match boundary {
                None => Self::bump(center.clone(), radius, a, b1)?,
                Some((origin, span)) => {
                    if origin.dim() != n || span.ambient_dim() != n {
                        return Err(dim_mismatch(n, origin.dim()));
                    }
                    let pt = projector(span);
                    let pp = DMatrix::identity(n, n) - &pt;
                    let a_t = AmbientVector::new((&pt * nalgebra::DVector::from_vec(a.into_inner())).as_slice().to_vec());
                    let lin = &pt * &b1 * &pt + &b2 * &pp;
                    // affine part evaluated about `origin`: a + L(x − origin) = (a + L(c − origin)) + L(x − c)
                    let shift = &lin * nalgebra::DVector::from_column_slice((center - origin).as_slice());
                    let a_shift = AmbientVector::new(
                        a_t.as_slice().iter().zip(shift.iter()).map(|(p, q)| p + q).collect(),
                    );
                    Self::bump(center.clone(), radius, a_shift, lin)?
                }
            };
            family.push(field);
        }
        Ok(family)
    }

    /// Σ c_k χ_k, supported in a ball around the first field's center.
    pub fn linear_combination(terms: &[(f64, TestVectorField)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("empty linear combination".into()))?;
        let center = first.center.clone();
        let n = first.ambient_dim;
        let mut radius: f64 = 0.0;
        for (_, f) in terms {
            if f.ambient_dim != n {
                return Err(dim_mismatch(n, f.ambient_dim));
            }
            radius = radius.max((&f.center - &center).norm() + f.support_radius);
        }
        let t1: Vec<(f64, TestVectorField)> = terms.to_vec();
        let t2 = t1.clone();
        Self::new(
            center,
            radius,
            move |x| {
                let mut out = vec![0.0; n];
                for (c, f) in &t1 {
                    for (o, v) in out.iter_mut().zip(f.value_at(x)) {
                        *o += c * v;
                    }
                }
                out
            },
            move |x| {
                let mut out = DMatrix::zeros(n, n);
                for (c, f) in &t2 {
                    out += f.jacobian_at(x) * *c;
                }
                out
            },
        )
    }

    /// max |P_{(T_pΓ)⊥} χ(p)| over sampled p ∈ Γ in the support.
    pub fn tangency_defect<R: Rng + ?Sized>(
        &self,
        gamma: &BoundaryManifold,
        rng: &mut R,
        samples: usize,
    ) -> Result<f64> {
        let points = gamma.sample_in_ball(rng, samples, &self.center, self.support_radius)?;
        let mut worst: f64 = 0.0;
        for foot in points {
            let tangent = gamma.tangent_space(&foot)?;
            let chi = self.value_at(foot.point.as_slice());
            worst = worst.max(tangent.perp_norm(&chi));
        }
        Ok(worst)
    }

    /// (sup |χ|, sup ‖Dχ‖_F) over the atoms of `v` and the support center.
    pub fn sup_norms_on(&self, v: &DiscreteVarifold) -> (f64, f64) {
        use rayon::prelude::*;
        let c = self.center.as_slice();
        let at = |x: &[f64]| {
            let val: f64 = self.value_at(x).iter().map(|a| a * a).sum::<f64>().sqrt();
            (val, self.jacobian_at(x).norm())
        };
        let per_atom: Vec<(f64, f64)> = v
            .par_atoms()
            .filter(|a| self.may_be_nonzero(a.x))
            .map(|a| at(a.x))
            .collect();
        per_atom
            .into_iter()
            .chain(std::iter::once(at(c)))
            .fold((0.0, 0.0), |(s, j), (a, b)| (s.max(a), j.max(b)))
    }

    pub(crate) fn sup_norm_sampled(&self, v: &DiscreteVarifold) -> f64 {
        self.sup_norms_on(v).0
    }

    /// Largest |χ| over random points in the shell R ≤ |x − c| ≤ 2R.
    pub fn support_violation(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.ambient_dim;
        let r = if self.support_radius.is_finite() { self.support_radius } else { return 0.0 };
        (0..samples)
            .map(|_| {
                let dir = random_direction(&mut rng, n);
                let x = self.center.axpy(r * rng.random_range(1.0..2.0), &dir);
                (self.value)(x.as_slice()).iter().map(|a| a * a).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Max over random points of the support of ‖Dχ − FD(χ)‖ / (1 + ‖Dχ‖),
    /// central differences with step `h`.
    pub fn jacobian_fd_error(&self, samples: usize, seed: u64, h: f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.ambient_dim;
        let r = if self.support_radius.is_finite() { self.support_radius } else { 1.0 };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let dir = random_direction(&mut rng, n);
            let x = self.center.axpy(r * rng.random::<f64>().powf(1.0 / n as f64), &dir);
            let jac = self.jacobian_at(x.as_slice());
            let mut fd = DMatrix::zeros(n, n);
            for j in 0..n {
                let e = AmbientVector::basis(n, j);
                let p = self.value_at(x.axpy(h, &e).as_slice());
                let m = self.value_at(x.axpy(-h, &e).as_slice());
                for i in 0..n {
                    fd[(i, j)] = (p[i] - m[i]) / (2.0 * h);
                }
            }
            worst = worst.max((&jac - fd).norm() / (1.0 + jac.norm()));
        }
        worst
    }
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AmbientVector {
    loop {
        let g = AmbientVector::new((0..n).map(|_| rng.sample(StandardNormal)).collect());
        if let Some(u) = g.normalized() {
            return u;
        }
    }
}

/// Orthogonal projector onto the plane as a matrix.
pub(crate) fn projector(plane: &MPlane) -> DMatrix<f64> {
    let n = plane.ambient_dim();
    let mut p = DMatrix::zeros(n, n);
    for e in plane.frame() {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += e[i] * e[j];
            }
        }
    }
    p
}

/// (ψ, κ, y) with y = x − c and ∇ψ = κ·y.
fn bump_parts(x: &[f64], c: &[f64], radius: f64) -> (f64, f64, Vec<f64>) {
    let y: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
    let t2 = y.iter().map(|v| v * v).sum::<f64>() / (radius * radius);
    if t2 >= 1.0 {
        return (0.0, 0.0, y);
    }
    let q = 1.0 - t2;
    let psi = (1.0 - 1.0 / q).exp();
    (psi, -2.0 * psi / (radius * radius * q * q), y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_jacobian_matches_fd() {
        let fam = TestVectorField::random_family(
            &AmbientVector::new(vec![0.1, -0.2, 0.3]),
            0.7,
            None,
            5,
            11,
        )
        .unwrap();
        for f in &fam {
            assert!(f.jacobian_fd_error(200, 3, 1e-6) < 1e-5);
            assert_eq!(f.support_violation(200, 4), 0.0);
        }
    }

    #[test]
    fn flat_tangent_family_is_tangent() {
        let span = MPlane::coordinate(2, 4);
        let origin = AmbientVector::zeros(4);
        let gamma = BoundaryManifold::flat(span.clone());
        let center = AmbientVector::new(vec![0.2, 0.1, 0.3, 0.0]);
        let fam = TestVectorField::random_family(&center, 0.8, Some((&origin, &span)), 6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for f in &fam {
            assert!(f.tangency_defect(&gamma, &mut rng, 100).unwrap() < 1e-12);
        }
        // an unconstrained field is not
        let free = TestVectorField::random_family(&center, 0.8, None, 1, 2).unwrap();
        assert!(free[0].tangency_defect(&gamma, &mut rng, 100).unwrap() > 1e-3);
    }

    #[test]
    fn combination_is_linear_pointwise() {
        let c = AmbientVector::zeros(3);
        let fam = TestVectorField::random_family(&c, 1.0, None, 2, 9).unwrap();
        let combo = TestVectorField::linear_combination(&[(2.0, fam[0].clone()), (-0.5, fam[1].clone())]).unwrap();
        let x = AmbientVector::new(vec![0.2, 0.3, -0.1]);
        let expect = &fam[0].value(&x).unwrap().scale(2.0) + &fam[1].value(&x).unwrap().scale(-0.5);
        assert!((&combo.value(&x).unwrap() - &expect).norm() < 1e-15);
    }
}

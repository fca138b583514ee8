//! Boundary manifolds Γ: flat subspaces, parametric curves and round spheres,
//! with closest-point projection and tangent spaces. The distorted distance
//! functions adapted to Γ live in [`distance`].

pub mod curve;
pub mod distance;
pub mod frame;

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Error, Result};
use crate::geometry::{AmbientVector, MPlane};
use curve::{curvature, Curve};

/// Newton iterations allowed in closest-point projection.
pub const NEWTON_MAX_ITERS: usize = 50;

const COARSE_SAMPLES: usize = 256;
const CURVATURE_SAMPLES: usize = 4096;

/// The boundary manifold Γ.
#[derive(Debug, Clone)]
pub enum BoundaryManifold {
    /// The affine subspace `origin + span`.
    Flat { origin: AmbientVector, span: MPlane },
    /// A C³ parametric curve.
    Curve(Arc<dyn Curve>),
    /// The round k-sphere of the given radius about `center`, inside the
    /// (k+1)-dimensional affine subspace `center + span`.
    Sphere {
        center: AmbientVector,
        radius: f64,
        span: MPlane,
    },
}

/// Result of projecting a point onto Γ.
#[derive(Debug, Clone)]
pub struct ClosestPoint {
    pub point: AmbientVector,
    /// Curve parameter of the foot point (curves only).
    pub param: Option<f64>,
    pub distance: f64,
}

impl BoundaryManifold {
    /// Linear subspace through the origin.
    pub fn flat(span: MPlane) -> Self {
        let origin = AmbientVector::zeros(span.ambient_dim());
        Self::Flat { origin, span }
    }

    /// Round sphere; `span` must have dimension k+1.
    pub fn sphere(center: AmbientVector, radius: f64, span: MPlane) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(format!("sphere radius must be positive, got {radius}")));
        }
        if center.dim() != span.ambient_dim() {
            return Err(dim_mismatch(span.ambient_dim(), center.dim()));
        }
        if span.dim() < 2 {
            return Err(Error::InvalidConfig("sphere needs a span of dimension >= 2".into()));
        }
        Ok(Self::Sphere {
            center,
            radius,
            span,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Flat { span, .. } | Self::Sphere { span, .. } => span.ambient_dim(),
            Self::Curve(c) => c.ambient_dim(),
        }
    }

    /// Intrinsic dimension k.
    pub fn dim(&self) -> usize {
        match self {
            Self::Flat { span, .. } => span.dim(),
            Self::Curve(_) => 1,
            Self::Sphere { span, .. } => span.dim() - 1,
        }
    }

    /// Reach estimate: ∞ for flat Γ, the radius for spheres, and
    /// 1/(max sampled curvature) for curves.
    pub fn reach(&self) -> f64 {
        match self {
            Self::Flat { .. } => f64::INFINITY,
            Self::Sphere { radius, .. } => *radius,
            Self::Curve(c) => {
                let (a, b) = c.domain();
                let kmax = (0..=CURVATURE_SAMPLES)
                    .map(|i| curvature(c.as_ref(), a + (b - a) * i as f64 / CURVATURE_SAMPLES as f64))
                    .fold(0.0, f64::max);
                if kmax > 0.0 {
                    1.0 / kmax
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Whether 0 ∈ Γ (within 1e-10).
    pub fn contains_origin(&self) -> bool {
        let zero = AmbientVector::zeros(self.ambient_dim());
        self.closest_point(&zero)
            .map(|cp| cp.distance < 1e-10)
            .unwrap_or(false)
    }

    /// Foot point of `x` on Γ.
    pub fn closest_point(&self, x: &AmbientVector) -> Result<ClosestPoint> {
        if x.dim() != self.ambient_dim() {
            return Err(dim_mismatch(self.ambient_dim(), x.dim()));
        }
        match self {
            Self::Flat { origin, span } => {
                let rel = x - origin;
                let point = origin + &span.project(&rel)?;
                let distance = (x - &point).norm();
                Ok(ClosestPoint {
                    point,
                    param: None,
                    distance,
                })
            }
            Self::Sphere {
                center,
                radius,
                span,
            } => {
                let rel = x - center;
                let in_span = span.project(&rel)?;
                let r = in_span.norm();
                if r < 1e-14 {
                    return Err(Error::OutOfTube {
                        distance: (x - center).norm().max(*radius),
                        reach: *radius,
                    });
                }
                let point = center + &in_span.scale(radius / r);
                let distance = (x - &point).norm();
                if distance >= *radius {
                    return Err(Error::OutOfTube {
                        distance,
                        reach: *radius,
                    });
                }
                Ok(ClosestPoint {
                    point,
                    param: None,
                    distance,
                })
            }
            Self::Curve(c) => closest_on_curve(c.as_ref(), x, self.reach()),
        }
    }

    /// Tangent space T_pΓ at a foot point returned by [`closest_point`].
    pub fn tangent_space(&self, foot: &ClosestPoint) -> Result<MPlane> {
        match self {
            Self::Flat { span, .. } => Ok(span.clone()),
            Self::Curve(c) => {
                let t = foot
                    .param
                    .ok_or_else(|| Error::InvalidInput("curve foot point without parameter".into()))?;
                MPlane::from_orthonormal(vec![c.velocity(t).normalized().ok_or_else(|| {
                    Error::Degenerate(format!("curve velocity vanishes at t = {t}"))
                })?])
            }
            Self::Sphere { center, span, .. } => {
                let radial = (&foot.point - center)
                    .normalized()
                    .ok_or_else(|| Error::Degenerate("foot point at sphere center".into()))?;
                let mut frame: Vec<AmbientVector> = Vec::new();
                for e in span.frame() {
                    let mut w = e.axpy(-e.dot(&radial), &radial);
                    for _ in 0..2 {
                        for f in &frame {
                            w = w.axpy(-w.dot(f), f);
                        }
                    }
                    if let Some(u) = w.normalized().filter(|_| w.norm() > 1e-8) {
                        frame.push(u);
                    }
                    if frame.len() == span.dim() - 1 {
                        break;
                    }
                }
                MPlane::from_orthonormal(frame)
            }
        }
    }

    /// Random points of Γ with 0 < |p| < `radius`, with their foot data.
    pub fn sample_near_origin<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
        radius: f64,
    ) -> Result<Vec<ClosestPoint>> {
        let dim = self.ambient_dim();
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > 1000 * count.max(1) {
                return Err(Error::InsufficientData(
                    "could not sample boundary points near the origin".into(),
                ));
            }
            let cp = match self {
                Self::Flat { origin, span } => {
                    let mut p = origin.clone();
                    for e in span.frame() {
                        p = p.axpy(rng.random_range(-radius..radius), e);
                    }
                    ClosestPoint {
                        point: p,
                        param: None,
                        distance: 0.0,
                    }
                }
                Self::Curve(c) => {
                    let speed = c.velocity(0.0).norm();
                    let (a, b) = c.domain();
                    let window = 2.0 * radius / speed;
                    let t = rng.random_range((-window).max(a)..window.min(b));
                    ClosestPoint {
                        point: c.position(t),
                        param: Some(t),
                        distance: 0.0,
                    }
                }
                Self::Sphere {
                    center,
                    radius: r,
                    span,
                } => {
                    // Gaussian direction in the span, pushed to the sphere
                    let mut g = AmbientVector::zeros(dim);
                    for e in span.frame() {
                        g = g.axpy(rng.sample::<f64, _>(StandardNormal), e);
                    }
                    // bias towards the origin by mixing with its direction
                    let towards = (&AmbientVector::zeros(dim) - center).scale(1.0 / r);
                    let mix = towards.axpy(radius / r * rng.random_range(0.0..1.5), &g);
                    let Some(dir) = mix.normalized() else { continue };
                    ClosestPoint {
                        point: center + &dir.scale(*r),
                        param: None,
                        distance: 0.0,
                    }
                }
            };
            let n = cp.point.norm();
            if n > 1e-6 * radius && n < radius {
                out.push(cp);
            }
        }
        Ok(out)
    }
    /// Random points of Γ inside the ball B(`center`, `radius`); may return
    /// fewer than `count` points (none when Γ misses the ball).
    pub fn sample_in_ball<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
        center: &AmbientVector,
        radius: f64,
    ) -> Result<Vec<ClosestPoint>> {
        if center.dim() != self.ambient_dim() {
            return Err(dim_mismatch(self.ambient_dim(), center.dim()));
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..50 * count.max(1) {
            if out.len() == count {
                break;
            }
            let cp = match self {
                Self::Flat { origin, span } => {
                    let mut p = origin + &span.project(&(center - origin))?;
                    for e in span.frame() {
                        p = p.axpy(rng.random_range(-radius..radius), e);
                    }
                    ClosestPoint {
                        point: p,
                        param: None,
                        distance: 0.0,
                    }
                }
                Self::Curve(c) => {
                    let (a, b) = c.domain();
                    let t = rng.random_range(a..b);
                    ClosestPoint {
                        point: c.position(t),
                        param: Some(t),
                        distance: 0.0,
                    }
                }
                Self::Sphere {
                    center: o,
                    radius: r,
                    span,
                } => {
                    let mut g = AmbientVector::zeros(self.ambient_dim());
                    for e in span.frame() {
                        g = g.axpy(rng.sample::<f64, _>(StandardNormal), e);
                    }
                    let Some(dir) = g.normalized() else { continue };
                    ClosestPoint {
                        point: o + &dir.scale(*r),
                        param: None,
                        distance: 0.0,
                    }
                }
            };
            if (&cp.point - center).norm() < radius {
                out.push(cp);
            }
        }
        Ok(out)
    }
}

fn closest_on_curve(curve: &dyn Curve, x: &AmbientVector, reach: f64) -> Result<ClosestPoint> {
    let (a, b) = curve.domain();
    let closed = curve.period().is_some();
    let samples = COARSE_SAMPLES;
    let spacing = (b - a) / samples as f64;
    let dist_sq = |t: f64| (&curve.position(t) - x).norm_sq();
    let count = if closed { samples } else { samples + 1 };
    let mut best = a;
    let mut best_d = f64::INFINITY;
    for i in 0..count {
        let t = a + spacing * i as f64;
        let d = dist_sq(t);
        if d < best_d {
            best_d = d;
            best = t;
        }
    }

    // safeguarded Newton on g(t) = ⟨γ(t) − x, γ′(t)⟩
    let (mut lo, mut hi) = (best - spacing, best + spacing);
    if !closed {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let mut t = best;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITERS {
        let diff = &curve.position(t) - x;
        let v = curve.velocity(t);
        let g = diff.dot(&v);
        let gp = v.norm_sq() + diff.dot(&curve.acceleration(t));
        // the second test catches degenerate (focal) minima where Newton is linear
        if g == 0.0 || g.abs() <= 1e-18 * v.norm() * (1.0 + x.norm()) {
            converged = true;
            break;
        }
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = if gp > 0.0 { t - g / gp } else { f64::NAN };
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        if step <= 1e-15 * (1.0 + t.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "closest point Newton iteration did not converge within {NEWTON_MAX_ITERS} steps"
        )));
    }
    if closed {
        let p = curve.period().unwrap_or(b - a);
        let mid = 0.5 * (a + b);
        t = mid + (t - mid) - p * ((t - mid) / p).round();
    } else if t <= a + 1e-12 || t >= b - 1e-12 {
        return Err(Error::OutOfTube {
            distance: best_d.sqrt(),
            reach,
        });
    }
    let point = curve.position(t);
    let distance = (x - &point).norm();
    if distance > reach {
        return Err(Error::OutOfTube { distance, reach });
    }
    Ok(ClosestPoint {
        point,
        param: Some(t),
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::curve::{CurveShape, ShapeCurve};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from_slice(c)
    }

    /// (t, t², 0)
    #[derive(Debug)]
    struct Parabola;

    impl Curve for Parabola {
        fn ambient_dim(&self) -> usize {
            3
        }
        fn position(&self, t: f64) -> AmbientVector {
            v(&[t, t * t, 0.0])
        }
        fn velocity(&self, t: f64) -> AmbientVector {
            v(&[1.0, 2.0 * t, 0.0])
        }
        fn acceleration(&self, _t: f64) -> AmbientVector {
            v(&[0.0, 2.0, 0.0])
        }
        fn jerk(&self, _t: f64) -> AmbientVector {
            v(&[0.0, 0.0, 0.0])
        }
        fn domain(&self) -> (f64, f64) {
            (-3.0, 3.0)
        }
        fn period(&self) -> Option<f64> {
            None
        }
    }

    #[test]
    fn circle_radial_projection() {
        let c = ShapeCurve::planar(CurveShape::Circle { radius: 1.0 }, 3).unwrap();
        let gamma = BoundaryManifold::Curve(Arc::new(c));
        // x = (2,0,0) sits at the reach; the foot point is still well defined
        let cp = closest_on_curve(
            match &gamma {
                BoundaryManifold::Curve(c) => c.as_ref(),
                _ => unreachable!(),
            },
            &v(&[2.0, 0.0, 0.0]),
            f64::INFINITY,
        )
        .unwrap();
        assert!((&cp.point - &v(&[1.0, 0.0, 0.0])).norm() < 1e-12);
        let cp = gamma.closest_point(&v(&[1.3, 0.4, 0.2])).unwrap();
        let expected = v(&[1.3, 0.4, 0.0]).normalized().unwrap();
        assert!((&cp.point - &expected).norm() < 1e-12);
        assert!(matches!(
            gamma.closest_point(&v(&[0.1, 0.0, 1.2])),
            Err(Error::OutOfTube { .. })
        ));
    }

    #[test]
    fn flat_projection() {
        let g = BoundaryManifold::flat(MPlane::coordinate(1, 3));
        let cp = g.closest_point(&v(&[0.3, -1.0, 2.0])).unwrap();
        assert_eq!(cp.point, v(&[0.3, 0.0, 0.0]));
        assert!(g.contains_origin());
    }

    /// Oracle: dense parameter grid argmin.
    #[test]
    fn parabola_newton_matches_grid_search() {
        let gamma = BoundaryManifold::Curve(Arc::new(Parabola));
        // the focus is a degenerate (quartic) minimum: only the distance is well posed there
        for (x, point_tol) in [([0.3, 0.2], 1e-5), ([-0.1, 0.4], 1e-5), ([0.0, 0.5], f64::INFINITY)] {
            let cp = gamma.closest_point(&v(&[x[0], x[1], 0.0])).unwrap();
            let mut best = (f64::INFINITY, 0.0);
            let n = 2_000_000;
            for i in 0..=n {
                let t = -3.0 + 6.0 * i as f64 / n as f64;
                let d = ((t - x[0]).powi(2) + (t * t - x[1]).powi(2)).sqrt();
                if d < best.0 {
                    best = (d, t);
                }
            }
            let grid_point = v(&[best.1, best.1 * best.1, 0.0]);
            assert!((&cp.point - &grid_point).norm() < point_tol, "{cp:?} vs {grid_point:?}");
            assert!((cp.distance - best.0).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_orthogonal_to_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shapes = [
            CurveShape::Ellipse {
                semi_major: 1.5,
                semi_minor: 1.0,
            },
            CurveShape::HelixArc {
                radius: 1.0,
                pitch: 1.0,
                turns: 2.0,
            },
            CurveShape::PerturbedCircle {
                radius: 1.0,
                amplitude: 0.1,
                frequency: 3,
            },
        ];
        for shape in shapes {
            let c: Arc<dyn Curve> = Arc::new(ShapeCurve::planar(shape, 3).unwrap());
            let gamma = BoundaryManifold::Curve(c.clone());
            let reach = gamma.reach();
            for _ in 0..50 {
                let t = rng.random_range(-2.0..2.0);
                let offset = v(&[
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]);
                let x = c.position(t).axpy(0.4 * reach / offset.norm(), &offset);
                let cp = gamma.closest_point(&x).unwrap();
                let vel = c.velocity(cp.param.unwrap());
                let resid = &x - &cp.point;
                assert!(resid.dot(&vel).abs() <= 1e-9 * resid.norm() * vel.norm() + 1e-15);
            }
        }
    }

    #[test]
    fn sphere_projection_and_tangent_space() {
        let g = BoundaryManifold::sphere(v(&[0.0, 0.0, -1.0]), 1.0, MPlane::coordinate(3, 3)).unwrap();
        assert!(g.contains_origin());
        let cp = g.closest_point(&v(&[0.1, 0.0, 0.2])).unwrap();
        let expected = v(&[0.1, 0.0, 1.2]).normalized().unwrap();
        assert!((&cp.point - &(&expected - &v(&[0.0, 0.0, 1.0]))).norm() < 1e-12);
        let t = g.tangent_space(&cp).unwrap();
        assert_eq!(t.dim(), 2);
        for e in t.frame() {
            assert!(e.dot(&expected).abs() < 1e-12);
        }
        assert_eq!(g.dim(), 2);
    }
}

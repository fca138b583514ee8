//! Distorted distance functions adapted to a boundary manifold Γ ∋ 0.
//!
//! A distorted distance `d` is C² off the origin, agrees with |x| up to
//! O(|x|^{1+α}) together with its first two derivatives, and has ∇d tangent
//! to Γ along Γ. With α = 1 it is obtained as |Ψ(x)| where Ψ is a tubular
//! coordinate map whose differential at the origin is an isometry:
//!
//! * flat Γ: Ψ = id, so d(x) = |x| exactly;
//! * curves: Ψ(x) = (s(t), c₁, …, c_{N−1}) where γ(t) is the foot point of x,
//!   s the signed arclength from 0 and cᵢ = ⟨x − γ(t), νᵢ(t)⟩ in a parallel
//!   normal frame;
//! * spheres: geodesic normal coordinates of the foot point plus the signed
//!   normal offset.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::curve::Curve;
use super::frame::{ParallelFrame, DEFAULT_STEP};
use super::{closest_on_curve, BoundaryManifold};
use crate::error::{dim_mismatch, Error, Result};
use crate::geometry::{dot, AmbientVector, MPlane};

/// Relative finite-difference step for D²d.
pub const HESSIAN_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
enum Kind {
    Euclidean,
    Curve(Arc<CurveTube>),
    Sphere(Arc<SphereTube>),
}

/// Evaluator bundle (d, ∇d, D²d) with exponent α, validity radius ρ and
/// weight constant C.
#[derive(Debug, Clone)]
pub struct DistortedDistance {
    kind: Kind,
    ambient_dim: usize,
    alpha: f64,
    rho: f64,
    weight_c: f64,
}

impl DistortedDistance {
    /// d(x) = |x|: the distorted distance of a flat Γ.
    pub fn euclidean(ambient_dim: usize) -> Self {
        Self {
            kind: Kind::Euclidean,
            ambient_dim,
            alpha: 1.0,
            rho: f64::INFINITY,
            weight_c: 0.0,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, Kind::Euclidean)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Validity radius ρ.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Weight constant C in e^{C s^α}.
    pub fn weight_constant(&self) -> f64 {
        self.weight_c
    }

    pub fn with_weight_constant(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "weight constant must be finite and >= 0, got {c}"
            )));
        }
        self.weight_c = c;
        Ok(self)
    }

    pub fn with_validity_radius(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidConfig(format!("validity radius must be positive, got {rho}")));
        }
        self.rho = rho;
        Ok(self)
    }

    /// e^{C s^α}
    pub fn weight(&self, s: f64) -> f64 {
        (self.weight_c * s.powf(self.alpha)).exp()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(dim_mismatch(self.ambient_dim, x.len()));
        }
        Ok(())
    }

    /// Tubular coordinates Ψ(x); the identity in the flat case.
    pub fn tubular_coordinates(&self, x: &AmbientVector) -> Result<AmbientVector> {
        self.check(x.as_slice())?;
        match &self.kind {
            Kind::Euclidean => Ok(x.clone()),
            Kind::Curve(t) => Ok(t.eval(x)?.psi),
            Kind::Sphere(t) => Ok(t.eval(x)?.psi),
        }
    }

    pub fn value(&self, x: &AmbientVector) -> Result<f64> {
        Ok(self.value_and_gradient(x)?.0)
    }

    pub fn gradient(&self, x: &AmbientVector) -> Result<AmbientVector> {
        Ok(self.value_and_gradient(x)?.1)
    }

    /// (d(x), ∇d(x)); at x = 0 the gradient is reported as the zero vector.
    pub fn value_and_gradient(&self, x: &AmbientVector) -> Result<(f64, AmbientVector)> {
        self.check(x.as_slice())?;
        if x.norm() == 0.0 {
            return Ok((0.0, AmbientVector::zeros(self.ambient_dim)));
        }
        match &self.kind {
            Kind::Euclidean => {
                let r = x.norm();
                Ok((r, x.scale(1.0 / r)))
            }
            Kind::Curve(t) => {
                let e = t.eval(x)?;
                Ok((e.d, e.grad))
            }
            Kind::Sphere(t) => {
                let e = t.eval(x)?;
                Ok((e.d, e.grad))
            }
        }
    }

    /// D²d(x): closed form when flat, central differences of ∇d otherwise.
    pub fn hessian(&self, x: &AmbientVector) -> Result<DMatrix<f64>> {
        self.check(x.as_slice())?;
        let n = self.ambient_dim;
        let r = x.norm();
        if r == 0.0 {
            return Err(Error::InvalidInput("D²d is singular at the origin".into()));
        }
        if self.is_euclidean() {
            return Ok(euclidean_hessian(x));
        }
        let h = HESSIAN_STEP * r.max(1e-3);
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let e = AmbientVector::basis(n, j);
            let gp = self.gradient(&x.axpy(h, &e))?;
            let gm = self.gradient(&x.axpy(-h, &e))?;
            for i in 0..n {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        Ok(0.5 * (&hess + hess.transpose()))
    }
}

/// D²|x| = (I − x̂ x̂ᵀ) / |x|
pub(crate) fn euclidean_hessian(x: &AmbientVector) -> DMatrix<f64> {
    let n = x.dim();
    let r = x.norm();
    DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (delta - x[i] * x[j] / (r * r)) / r
    })
}

struct TubeEval {
    psi: AmbientVector,
    d: f64,
    grad: AmbientVector,
}

#[derive(Debug)]
struct CurveTube {
    curve: Arc<dyn Curve>,
    frame: ParallelFrame,
    reach: f64,
}

impl CurveTube {
    fn eval(&self, x: &AmbientVector) -> Result<TubeEval> {
        let foot = closest_on_curve(self.curve.as_ref(), x, self.reach)?;
        let t = foot.param.expect("curve foot point carries its parameter");
        let s = self.frame.arclength_at(t)?;
        let normals = self.frame.normals_at(t)?;
        let offset = x - &foot.point;
        let mut psi = Vec::with_capacity(x.dim());
        psi.push(s);
        psi.extend(normals.iter().map(|nu| nu.dot(&offset)));
        let psi = AmbientVector::new(psi);
        let d = psi.norm();

        // ∇t = γ′ / (|γ′|² − ⟨x − γ, γ″⟩), ∇cᵢ = νᵢ at the foot point
        let vel = self.curve.velocity(t);
        let denom = vel.norm_sq() - offset.dot(&self.curve.acceleration(t));
        if !(denom > 0.0) {
            return Err(Error::OutOfTube {
                distance: foot.distance,
                reach: self.reach,
            });
        }
        let mut grad = vel.scale(s * vel.norm() / denom);
        for (nu, c) in normals.iter().zip(&psi.as_slice()[1..]) {
            grad = grad.axpy(*c, nu);
        }
        Ok(TubeEval {
            psi,
            d,
            grad: grad.scale(1.0 / d),
        })
    }
}

#[derive(Debug)]
struct SphereTube {
    center: AmbientVector,
    radius: f64,
    span: MPlane,
    /// unit outward normal at the origin
    axis: AmbientVector,
}

impl SphereTube {
    fn eval(&self, x: &AmbientVector) -> Result<TubeEval> {
        let w = x - &self.center;
        let w_span = self.span.project(&w)?;
        let w_perp = &w - &w_span;
        let rho = w_span.norm();
        if rho < 1e-12 * self.radius {
            return Err(Error::OutOfTube {
                distance: self.radius,
                reach: self.radius,
            });
        }
        let omega = w_span.scale(1.0 / rho);
        let cos = omega.dot(&self.axis).clamp(-1.0, 1.0);
        if cos <= 0.0 {
            return Err(Error::OutOfValidity {
                s: x.norm(),
                rho: self.radius,
            });
        }
        let tangential = omega.axpy(-cos, &self.axis);
        let sin = tangential.norm();
        let theta = sin.atan2(cos);
        let r = self.radius;
        let geodesic = if sin > 0.0 {
            tangential.scale(r * theta / sin)
        } else {
            AmbientVector::zeros(x.dim())
        };
        let normal_offset = rho - r;
        let psi = geodesic.axpy(normal_offset, &self.axis).axpy(1.0, &w_perp);
        let d = (r * r * theta * theta + normal_offset * normal_offset + w_perp.norm_sq()).sqrt();

        // θ∇θ = −(θ / sin θ)(ω₀ − cos θ ω) / ρ
        let ratio = if sin > 1e-8 { theta / sin } else { 1.0 + theta * theta / 6.0 };
        let theta_grad = self.axis.axpy(-cos, &omega).scale(-ratio / rho);
        let grad = theta_grad
            .scale(r * r)
            .axpy(normal_offset, &omega)
            .axpy(1.0, &w_perp)
            .scale(1.0 / d);
        Ok(TubeEval { psi, d, grad })
    }
}

/// Builds the α = 1 distorted distance adapted to Γ through its tubular
/// neighbourhood. The weight constant starts at 0; see
/// [`crate::monotonicity::estimate_weight_constant`].
pub fn build_distorted_distance(gamma: &BoundaryManifold) -> Result<DistortedDistance> {
    if !gamma.contains_origin() {
        return Err(Error::InvalidConfig(
            "the boundary manifold must pass through the origin".into(),
        ));
    }
    let ambient_dim = gamma.ambient_dim();
    let reach = gamma.reach();
    match gamma {
        BoundaryManifold::Flat { .. } => Ok(DistortedDistance::euclidean(ambient_dim)),
        BoundaryManifold::Curve(curve) => {
            let (a, b) = curve.domain();
            let frame = ParallelFrame::new(curve.clone(), a, b, DEFAULT_STEP)?;
            let mut rho = 0.5 * reach;
            if curve.period().is_none() {
                let ends = curve.position(a).norm().min(curve.position(b).norm());
                rho = rho.min(0.5 * ends);
            }
            Ok(DistortedDistance {
                kind: Kind::Curve(Arc::new(CurveTube {
                    curve: curve.clone(),
                    frame,
                    reach,
                })),
                ambient_dim,
                alpha: 1.0,
                rho,
                weight_c: 0.0,
            })
        }
        BoundaryManifold::Sphere {
            center,
            radius,
            span,
        } => {
            let axis = center.scale(-1.0 / radius);
            Ok(DistortedDistance {
                kind: Kind::Sphere(Arc::new(SphereTube {
                    center: center.clone(),
                    radius: *radius,
                    span: span.clone(),
                    axis,
                })),
                ambient_dim,
                alpha: 1.0,
                rho: 0.5 * radius,
                weight_c: 0.0,
            })
        }
    }
}

/// Pass thresholds for [`verify_distance_axioms`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxiomBounds {
    pub value_ratio: f64,
    pub gradient_ratio: f64,
    pub hessian_ratio: f64,
    pub tangency: f64,
}

impl Default for AxiomBounds {
    fn default() -> Self {
        Self {
            value_ratio: 100.0,
            gradient_ratio: 100.0,
            hessian_ratio: 100.0,
            tangency: 1e-8,
        }
    }
}

/// Sampled check of the two defining conditions of a distorted distance.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub boundary_samples: usize,
    pub sample_radius: f64,
    /// max |d − |x|| / |x|^{1+α}; the fitted constant K
    pub value_ratio: f64,
    /// max |∇d − x/|x|| / |x|^α
    pub gradient_ratio: f64,
    /// max ‖D²d − D²|x|‖_F / |x|^{α−1}
    pub hessian_ratio: f64,
    /// max |P_{(T_pΓ)⊥} ∇d(p)| over sampled p ∈ Γ
    pub tangency_defect: f64,
    pub failed_evaluations: usize,
    pub bounds: AxiomBounds,
    pub regularity_pass: bool,
    pub tangency_pass: bool,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.regularity_pass && self.tangency_pass
    }
}

/// Minimum number of interior samples used by [`verify_distance_axioms`].
pub const MIN_AXIOM_SAMPLES: usize = 100;

/// Samples the validity ball (radius min(ρ, 1)) and Γ near the origin.
pub fn verify_distance_axioms(
    dd: &DistortedDistance,
    gamma: &BoundaryManifold,
    sample_count: usize,
    seed: u64,
    bounds: AxiomBounds,
) -> AxiomReport {
    let samples = sample_count.max(MIN_AXIOM_SAMPLES);
    let n = dd.ambient_dim();
    let radius = dd.rho().min(1.0);
    let alpha = dd.alpha();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed = 0usize;
    let (mut value_ratio, mut gradient_ratio, mut hessian_ratio) = (0.0f64, 0.0f64, 0.0f64);

    for _ in 0..samples {
        let x = uniform_in_ball(&mut rng, n, radius);
        let r = x.norm();
        if r == 0.0 {
            continue;
        }
        let (d, grad, hess) = match (dd.value_and_gradient(&x), dd.hessian(&x)) {
            (Ok((d, g)), Ok(h)) => (d, g, h),
            _ => {
                failed += 1;
                continue;
            }
        };
        value_ratio = value_ratio.max((d - r).abs() / r.powf(1.0 + alpha));
        gradient_ratio = gradient_ratio.max((&grad - &x.scale(1.0 / r)).norm() / r.powf(alpha));
        let diff = hess - euclidean_hessian(&x);
        hessian_ratio = hessian_ratio.max(diff.norm() / r.powf(alpha - 1.0));
    }

    let boundary_count = (samples / 4).max(25);
    let mut tangency = 0.0f64;
    match gamma.sample_near_origin(&mut rng, boundary_count, radius) {
        Ok(points) => {
            for foot in points {
                let defect = dd
                    .gradient(&foot.point)
                    .and_then(|g| Ok((g, gamma.tangent_space(&foot)?)))
                    .map(|(g, tangent)| tangent.perp_norm(g.as_slice()));
                match defect {
                    Ok(v) => tangency = tangency.max(v),
                    Err(_) => failed += 1,
                }
            }
        }
        Err(_) => failed += boundary_count,
    }

    let regularity_pass = failed == 0
        && value_ratio <= bounds.value_ratio
        && gradient_ratio <= bounds.gradient_ratio
        && hessian_ratio <= bounds.hessian_ratio;
    AxiomReport {
        samples,
        boundary_samples: boundary_count,
        sample_radius: radius,
        value_ratio,
        gradient_ratio,
        hessian_ratio,
        tangency_defect: tangency,
        failed_evaluations: failed,
        bounds,
        regularity_pass,
        tangency_pass: failed == 0 && tangency <= bounds.tangency,
    }
}

/// Uniform sample from the ball of the given radius in R^n.
pub(crate) fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> AmbientVector {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&g, &g).sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
        return AmbientVector::new(g.into_iter().map(|c| c * r / norm).collect());
    }
}

//! Parametric C³ curves: the trait the boundary code consumes, the built-in
//! named shapes, and adapters for recentering and orientation reversal.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, MPlane};

/// A C³ parametrized curve in R^N with its first three derivatives.
pub trait Curve: Send + Sync + std::fmt::Debug {
    fn ambient_dim(&self) -> usize;
    fn position(&self, t: f64) -> AmbientVector;
    fn velocity(&self, t: f64) -> AmbientVector;
    fn acceleration(&self, t: f64) -> AmbientVector;
    fn jerk(&self, t: f64) -> AmbientVector;
    /// Parameter interval. For closed curves this is one period.
    fn domain(&self) -> (f64, f64);
    /// Period of a closed curve.
    fn period(&self) -> Option<f64>;
}

/// Named built-in shapes, each drawn in the 2-plane spanned by the first two
/// frame vectors of `plane` (the helix also climbs along the third).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum CurveShape {
    Line,
    Circle { radius: f64 },
    Ellipse { semi_major: f64, semi_minor: f64 },
    HelixArc { radius: f64, pitch: f64, turns: f64 },
    PerturbedCircle { radius: f64, amplitude: f64, frequency: u32 },
}

/// A built-in shape placed in ambient space.
#[derive(Debug, Clone)]
pub struct ShapeCurve {
    shape: CurveShape,
    center: AmbientVector,
    axes: Vec<AmbientVector>,
    line_extent: f64,
}

impl ShapeCurve {
    /// Places `shape` at `center`, using the frame of `plane` as local axes.
    pub fn new(shape: CurveShape, center: AmbientVector, plane: &MPlane) -> Result<Self> {
        if center.dim() != plane.ambient_dim() {
            return Err(Error::InvalidInput("center and plane dimensions differ".into()));
        }
        let need = match shape {
            CurveShape::Line => 1,
            CurveShape::HelixArc { .. } => 3,
            _ => 2,
        };
        if plane.dim() < need {
            return Err(Error::InvalidInput(format!(
                "{shape:?} needs a frame of at least {need} vectors"
            )));
        }
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{what} must be positive, got {x}")))
            }
        };
        match shape {
            CurveShape::Line => {}
            CurveShape::Circle { radius } => positive(radius, "radius")?,
            CurveShape::Ellipse {
                semi_major,
                semi_minor,
            } => {
                positive(semi_major, "semi_major")?;
                positive(semi_minor, "semi_minor")?;
            }
            CurveShape::HelixArc { radius, turns, .. } => {
                positive(radius, "radius")?;
                positive(turns, "turns")?;
            }
            CurveShape::PerturbedCircle {
                radius, amplitude, ..
            } => {
                positive(radius, "radius")?;
                if !(0.0..0.5).contains(&amplitude) {
                    return Err(Error::InvalidConfig(format!(
                        "perturbation amplitude must lie in [0, 0.5), got {amplitude}"
                    )));
                }
            }
        }
        Ok(Self {
            shape,
            center,
            axes: plane.frame().to_vec(),
            line_extent: 10.0,
        })
    }

    /// Convenience: shape in the x1x2-plane of R^`dim` centred at the origin.
    pub fn planar(shape: CurveShape, dim: usize) -> Result<Self> {
        let k = if matches!(shape, CurveShape::HelixArc { .. }) { 3 } else { 2 };
        if k > dim {
            return Err(Error::InvalidInput(format!("{shape:?} does not fit in R^{dim}")));
        }
        Self::new(shape, AmbientVector::zeros(dim), &MPlane::coordinate(k, dim))
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    fn combine(&self, coeffs: &[f64]) -> AmbientVector {
        let mut v = AmbientVector::zeros(self.center.dim());
        for (c, axis) in coeffs.iter().zip(&self.axes) {
            v = v.axpy(*c, axis);
        }
        v
    }

    /// Local coordinates of the k-th derivative in the shape's own axes.
    fn local(&self, t: f64, k: usize) -> [f64; 3] {
        // derivatives of (cos t, sin t)
        let (c, s) = (t.cos(), t.sin());
        let cos_d = [c, -s, -c, s][k];
        let sin_d = [s, c, -s, -c][k];
        match self.shape {
            CurveShape::Line => [if k == 0 { t } else if k == 1 { 1.0 } else { 0.0 }, 0.0, 0.0],
            CurveShape::Circle { radius } => [radius * cos_d, radius * sin_d, 0.0],
            CurveShape::Ellipse {
                semi_major,
                semi_minor,
            } => [semi_major * cos_d, semi_minor * sin_d, 0.0],
            CurveShape::HelixArc { radius, pitch, .. } => {
                let lift = pitch / (2.0 * PI);
                let z = match k {
                    0 => lift * t,
                    1 => lift,
                    _ => 0.0,
                };
                [radius * cos_d, radius * sin_d, z]
            }
            CurveShape::PerturbedCircle {
                radius,
                amplitude,
                frequency,
            } => {
                // r(t) = R (1 + A cos(f t)); position r(t) (cos t, sin t)
                let f = frequency as f64;
                let r = |j: usize| -> f64 {
                    if j == 0 {
                        return radius * (1.0 + amplitude * (f * t).cos());
                    }
                    let (cf, sf) = ((f * t).cos(), (f * t).sin());
                    let trig = [cf, -sf, -cf, sf][j];
                    radius * amplitude * f.powi(j as i32) * trig
                };
                let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
                let mut out = [0.0; 3];
                for (j, &b) in binom[k].iter().enumerate().take(k + 1) {
                    let kk = k - j;
                    let cd = [c, -s, -c, s][kk];
                    let sd = [s, c, -s, -c][kk];
                    out[0] += b * r(j) * cd;
                    out[1] += b * r(j) * sd;
                }
                out
            }
        }
    }
}

impl Curve for ShapeCurve {
    fn ambient_dim(&self) -> usize {
        self.center.dim()
    }

    fn position(&self, t: f64) -> AmbientVector {
        &self.center + &self.combine(&self.local(t, 0))
    }

    fn velocity(&self, t: f64) -> AmbientVector {
        self.combine(&self.local(t, 1))
    }

    fn acceleration(&self, t: f64) -> AmbientVector {
        self.combine(&self.local(t, 2))
    }

    fn jerk(&self, t: f64) -> AmbientVector {
        self.combine(&self.local(t, 3))
    }

    fn domain(&self) -> (f64, f64) {
        match self.shape {
            CurveShape::Line => (-self.line_extent, self.line_extent),
            CurveShape::HelixArc { turns, .. } => (-PI * turns, PI * turns),
            _ => (-PI, PI),
        }
    }

    fn period(&self) -> Option<f64> {
        match self.shape {
            CurveShape::Line | CurveShape::HelixArc { .. } => None,
            _ => Some(2.0 * PI),
        }
    }
}

/// γ̃(t) = γ(t + t₀) − γ(t₀): moves the point of parameter `t₀` to the origin
/// and to parameter 0.
#[derive(Debug, Clone)]
pub struct Recentered {
    inner: Arc<dyn Curve>,
    t0: f64,
    base: AmbientVector,
}

impl Recentered {
    pub fn new(inner: Arc<dyn Curve>, t0: f64) -> Self {
        let base = inner.position(t0);
        Self { inner, t0, base }
    }
}

impl Curve for Recentered {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn position(&self, t: f64) -> AmbientVector {
        &self.inner.position(t + self.t0) - &self.base
    }
    fn velocity(&self, t: f64) -> AmbientVector {
        self.inner.velocity(t + self.t0)
    }
    fn acceleration(&self, t: f64) -> AmbientVector {
        self.inner.acceleration(t + self.t0)
    }
    fn jerk(&self, t: f64) -> AmbientVector {
        self.inner.jerk(t + self.t0)
    }
    fn domain(&self) -> (f64, f64) {
        let (a, b) = self.inner.domain();
        match self.inner.period() {
            // keep parameter 0 in the middle of the period window
            Some(p) => (-0.5 * p, 0.5 * p),
            None => (a - self.t0, b - self.t0),
        }
    }
    fn period(&self) -> Option<f64> {
        self.inner.period()
    }
}

/// The same curve traversed backwards: t ↦ γ(−t).
#[derive(Debug, Clone)]
pub struct Reversed(pub Arc<dyn Curve>);

impl Curve for Reversed {
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }
    fn position(&self, t: f64) -> AmbientVector {
        self.0.position(-t)
    }
    fn velocity(&self, t: f64) -> AmbientVector {
        -&self.0.velocity(-t)
    }
    fn acceleration(&self, t: f64) -> AmbientVector {
        self.0.acceleration(-t)
    }
    fn jerk(&self, t: f64) -> AmbientVector {
        -&self.0.jerk(-t)
    }
    fn domain(&self) -> (f64, f64) {
        let (a, b) = self.0.domain();
        (-b, -a)
    }
    fn period(&self) -> Option<f64> {
        self.0.period()
    }
}

/// Curvature |γ′ ∧ γ″| / |γ′|³ in any ambient dimension.
pub fn curvature(curve: &dyn Curve, t: f64) -> f64 {
    let v = curve.velocity(t);
    let a = curve.acceleration(t);
    let vv = v.norm_sq();
    let wedge = (vv * a.norm_sq() - v.dot(&a).powi(2)).max(0.0).sqrt();
    wedge / vv.powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(curve: &dyn Curve) {
        let h = 1e-5;
        for i in 0..17 {
            let t = -1.3 + 0.17 * i as f64;
            let pairs: [(AmbientVector, AmbientVector, AmbientVector); 3] = [
                (curve.position(t + h), curve.position(t - h), curve.velocity(t)),
                (curve.velocity(t + h), curve.velocity(t - h), curve.acceleration(t)),
                (curve.acceleration(t + h), curve.acceleration(t - h), curve.jerk(t)),
            ];
            for (plus, minus, analytic) in pairs {
                let fd = (&plus - &minus).scale(0.5 / h);
                assert!(
                    (&fd - &analytic).norm() < 1e-6 * (1.0 + analytic.norm()),
                    "{curve:?} at t={t}"
                );
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let shapes = [
            CurveShape::Line,
            CurveShape::Circle { radius: 1.3 },
            CurveShape::Ellipse {
                semi_major: 2.0,
                semi_minor: 0.7,
            },
            CurveShape::HelixArc {
                radius: 1.0,
                pitch: 0.8,
                turns: 1.5,
            },
            CurveShape::PerturbedCircle {
                radius: 1.0,
                amplitude: 0.1,
                frequency: 3,
            },
        ];
        for shape in shapes {
            let c = ShapeCurve::planar(shape, 3).unwrap();
            fd_check(&c);
            let rc = Recentered::new(Arc::new(c.clone()), 0.4);
            fd_check(&rc);
            fd_check(&Reversed(Arc::new(c)));
        }
    }

    #[test]
    fn circle_curvature_and_recentering() {
        let c = Arc::new(ShapeCurve::planar(CurveShape::Circle { radius: 2.0 }, 3).unwrap());
        assert!((curvature(c.as_ref(), 0.3) - 0.5).abs() < 1e-14);
        let rc = Recentered::new(c, 1.1);
        assert!(rc.position(0.0).norm() < 1e-15);
        assert_eq!(rc.domain(), (-PI, PI));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ShapeCurve::planar(CurveShape::Circle { radius: -1.0 }, 3).is_err());
        assert!(ShapeCurve::planar(
            CurveShape::PerturbedCircle {
                radius: 1.0,
                amplitude: 0.7,
                frequency: 2
            },
            3
        )
        .is_err());
        assert!(ShapeCurve::planar(
            CurveShape::HelixArc {
                radius: 1.0,
                pitch: 1.0,
                turns: 1.0
            },
            2
        )
        .is_err());
    }
}

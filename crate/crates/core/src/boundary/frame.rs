//! Relatively parallel (Bishop) normal frames along a curve, integrated with
//! fixed-step RK4 from parameter 0, together with the arclength from 0.

use std::sync::Arc;

use super::curve::Curve;
use crate::error::{Error, Result};
use crate::geometry::{frame_from_spanning, AmbientVector};

/// Smallest integration step accepted.
pub const MIN_STEP: f64 = 1e-6;

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Tabulated parallel normal frame on `[t_min, t_max] ∋ 0`.
///
/// Each normal ν solves ν′ = −(⟨ν, γ″⟩ / |γ′|²) γ′, so its derivative is
/// parallel to the tangent and the frame stays orthonormal and normal.
#[derive(Debug, Clone)]
pub struct ParallelFrame {
    curve: Arc<dyn Curve>,
    step: f64,
    t_min: f64,
    /// node k sits at t_min + k·step
    normals: Vec<Vec<AmbientVector>>,
    arclength: Vec<f64>,
}

impl ParallelFrame {
    pub fn new(curve: Arc<dyn Curve>, t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        if !(step >= MIN_STEP) {
            return Err(Error::InvalidConfig(format!(
                "frame integration step {step:e} is below the minimum {MIN_STEP:e}"
            )));
        }
        if !(t_min <= 0.0 && 0.0 <= t_max) {
            return Err(Error::InvalidInput(format!(
                "frame interval [{t_min}, {t_max}] must contain 0"
            )));
        }
        let initial = initial_normals(curve.as_ref())?;

        let n_back = (-t_min / step).ceil() as usize;
        let n_fwd = (t_max / step).ceil() as usize;
        let t_min = -(n_back as f64) * step;

        let mut backward = vec![(initial.clone(), 0.0)];
        let mut state = initial.clone();
        let mut s = 0.0;
        for k in 0..n_back {
            let t = -(k as f64) * step;
            s -= segment_length(curve.as_ref(), t - step, t);
            state = rk4_step(curve.as_ref(), &state, t, -step);
            backward.push((state.clone(), s));
        }
        let mut normals = Vec::with_capacity(n_back + n_fwd + 1);
        let mut arclength = Vec::with_capacity(n_back + n_fwd + 1);
        for (nu, s) in backward.into_iter().rev() {
            normals.push(nu);
            arclength.push(s);
        }
        let mut state = initial;
        let mut s = 0.0;
        for k in 0..n_fwd {
            let t = k as f64 * step;
            s += segment_length(curve.as_ref(), t, t + step);
            state = rk4_step(curve.as_ref(), &state, t, step);
            normals.push(state.clone());
            arclength.push(s);
        }
        Ok(Self {
            curve,
            step,
            t_min,
            normals,
            arclength,
        })
    }

    pub fn t_range(&self) -> (f64, f64) {
        (
            self.t_min,
            self.t_min + (self.normals.len() - 1) as f64 * self.step,
        )
    }

    fn node(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.t_range();
        if !(lo - 1e-12..=hi + 1e-12).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "parameter {t} outside the frame table [{lo}, {hi}]"
            )));
        }
        let k = ((t - self.t_min) / self.step).floor() as isize;
        Ok(k.clamp(0, self.normals.len() as isize - 1) as usize)
    }

    fn node_t(&self, k: usize) -> f64 {
        self.t_min + k as f64 * self.step
    }

    /// The m+n−1 normal vectors at parameter `t`.
    pub fn normals_at(&self, t: f64) -> Result<Vec<AmbientVector>> {
        let k = self.node(t)?;
        let tk = self.node_t(k);
        let h = t - tk;
        if h == 0.0 {
            return Ok(self.normals[k].clone());
        }
        Ok(rk4_step(self.curve.as_ref(), &self.normals[k], tk, h))
    }

    /// Signed arclength from parameter 0.
    pub fn arclength_at(&self, t: f64) -> Result<f64> {
        let k = self.node(t)?;
        let tk = self.node_t(k);
        Ok(self.arclength[k] + segment_length(self.curve.as_ref(), tk, t))
    }
}

/// Orthonormal completion of the unit tangent at t = 0, tangent dropped.
fn initial_normals(curve: &dyn Curve) -> Result<Vec<AmbientVector>> {
    let dim = curve.ambient_dim();
    let tangent = curve.velocity(0.0);
    if tangent.norm() < 1e-8 {
        return Err(Error::Degenerate("curve velocity vanishes at t = 0".into()));
    }
    let unit = tangent.scale(1.0 / tangent.norm());
    // append axes in order of least overlap with the tangent
    let mut axes: Vec<usize> = (0..dim).collect();
    axes.sort_by(|&a, &b| unit[a].abs().total_cmp(&unit[b].abs()));
    let mut spanning = vec![unit];
    spanning.extend(axes[..dim - 1].iter().map(|&i| AmbientVector::basis(dim, i)));
    let plane = frame_from_spanning(&spanning)?;
    Ok(plane.frame()[1..].to_vec())
}

fn derivative(curve: &dyn Curve, t: f64, nu: &[AmbientVector]) -> Vec<AmbientVector> {
    let v = curve.velocity(t);
    let a = curve.acceleration(t);
    let vv = v.norm_sq();
    nu.iter().map(|n| v.scale(-n.dot(&a) / vv)).collect()
}

fn add_scaled(base: &[AmbientVector], h: f64, k: &[AmbientVector]) -> Vec<AmbientVector> {
    base.iter().zip(k).map(|(b, d)| b.axpy(h, d)).collect()
}

fn rk4_step(curve: &dyn Curve, nu: &[AmbientVector], t: f64, h: f64) -> Vec<AmbientVector> {
    let k1 = derivative(curve, t, nu);
    let k2 = derivative(curve, t + 0.5 * h, &add_scaled(nu, 0.5 * h, &k1));
    let k3 = derivative(curve, t + 0.5 * h, &add_scaled(nu, 0.5 * h, &k2));
    let k4 = derivative(curve, t + h, &add_scaled(nu, h, &k3));
    nu.iter()
        .enumerate()
        .map(|(i, n)| {
            n.axpy(h / 6.0, &k1[i])
                .axpy(h / 3.0, &k2[i])
                .axpy(h / 3.0, &k3[i])
                .axpy(h / 6.0, &k4[i])
        })
        .collect()
}

/// ∫_a^b |γ′| by 5-point Gauss–Legendre (signed: negative when b < a).
fn segment_length(curve: &dyn Curve, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS5
        .iter()
        .map(|(x, w)| w * curve.velocity(mid + half * x).norm())
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::curve::{CurveShape, ShapeCurve};
    use crate::geometry::MPlane;
    use std::f64::consts::PI;

    fn gram_defect(frame: &[AmbientVector]) -> f64 {
        MPlane::from_orthonormal(frame.to_vec())
            .map(|p| p.gram_defect())
            .unwrap_or(f64::INFINITY)
    }

    #[test]
    fn straight_line_frame_is_constant() {
        let line = Arc::new(ShapeCurve::planar(CurveShape::Line, 4).unwrap());
        let f = ParallelFrame::new(line, -2.0, 2.0, 1e-2).unwrap();
        let base = f.normals_at(0.0).unwrap();
        for t in [-1.7, -0.3, 0.55, 1.99] {
            for (a, b) in f.normals_at(t).unwrap().iter().zip(&base) {
                assert!((a - b).norm() < 1e-14);
            }
            assert!((f.arclength_at(t).unwrap() - t).abs() < 1e-13);
        }
    }

    /// Closed form for the planar unit circle: the in-plane normal is the
    /// radial direction (±), the out-of-plane normal is constant.
    #[test]
    fn planar_circle_matches_closed_form() {
        let circle = Arc::new(ShapeCurve::planar(CurveShape::Circle { radius: 1.0 }, 3).unwrap());
        let f = ParallelFrame::new(circle, -PI, PI, DEFAULT_STEP).unwrap();
        let base = f.normals_at(0.0).unwrap();
        let (in_plane0, out0) = if base[0][2].abs() > 0.5 { (1, 0) } else { (0, 1) };
        let sign = base[in_plane0][0].signum();
        for t in [-PI, -2.0, -0.77, 0.4, 1.9, PI] {
            let nu = f.normals_at(t).unwrap();
            let radial = AmbientVector::new(vec![t.cos(), t.sin(), 0.0]).scale(sign);
            assert!((&nu[in_plane0] - &radial).norm() < 1e-8, "t={t}");
            assert!((&nu[out0] - &base[out0]).norm() < 1e-8);
        }
        // full loop: −π and π carry the same frame
        let a = f.normals_at(-PI).unwrap();
        let b = f.normals_at(PI).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8);
        }
        assert!((f.arclength_at(PI).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn helix_frame_stays_orthonormal_and_normal() {
        let helix = Arc::new(
            ShapeCurve::planar(
                CurveShape::HelixArc {
                    radius: 1.0,
                    pitch: 2.0,
                    turns: 2.0,
                },
                3,
            )
            .unwrap(),
        );
        let (a, b) = helix.domain();
        let f = ParallelFrame::new(helix.clone(), a, b, DEFAULT_STEP).unwrap();
        let mut t = a;
        while t <= b {
            let nu = f.normals_at(t).unwrap();
            assert!(gram_defect(&nu) < 1e-8);
            let v = helix.velocity(t);
            for n in &nu {
                assert!(n.dot(&v).abs() < 1e-8 * v.norm());
            }
            t += 0.173;
        }
    }

    #[test]
    fn tiny_step_is_a_config_error() {
        let line = Arc::new(ShapeCurve::planar(CurveShape::Line, 3).unwrap());
        assert!(matches!(
            ParallelFrame::new(line, -1.0, 1.0, 1e-7),
            Err(Error::InvalidConfig(_))
        ));
    }
}

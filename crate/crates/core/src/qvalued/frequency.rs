//! Almgren's frequency N(r) = r·D(r)/H(r) on the grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::domain::Side;
use super::tuple::MatchingStrategy;
use super::{interface_weight, QHalfMap};
use crate::error::{Error, Result};
use crate::geometry::compensated_sum;

/// H below this makes N meaningless.
pub const MIN_HEIGHT: f64 = 1e-14;

/// Circle samples per grid spacing of arc length.
const SAMPLES_PER_CELL: f64 = 4.0;

/// How H(r) = ∫_{∂B_r} |u|² is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeightEstimator {
    /// Trapezoid rule on the circle over bilinear interpolation of the
    /// nodal field |u|², which is single valued even when u is not.
    #[default]
    Interpolated,
    /// Σ|u|²·h over nodes with |x − center| in [r − h/2, r + h/2). Lattice
    /// point counts in thin annuli make this noisy at the level of a few
    /// percent.
    ShellBin,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyCurve {
    pub center: [f64; 2],
    pub r: Vec<f64>,
    /// Matched energy of the edges whose midpoint lies in B_r.
    pub dirichlet: Vec<f64>,
    /// Estimate of ∫_{∂B_r} |u|².
    pub height: Vec<f64>,
    pub frequency: Vec<f64>,
    /// Radii dropped because H fell below [`MIN_HEIGHT`].
    pub omitted: Vec<f64>,
}

impl FrequencyCurve {
    /// Largest relative deviation of N from `target`.
    pub fn max_relative_deviation(&self, target: f64) -> f64 {
        self.frequency.iter().map(|n| (n - target).abs() / target.abs()).fold(0.0, f64::max)
    }

    /// min over consecutive radii of N(r_{j+1}) − N(r_j).
    pub fn min_increment(&self) -> f64 {
        self.frequency.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

pub fn frequency_function(u: &QHalfMap, center: [f64; 2], radii: &[f64]) -> Result<FrequencyCurve> {
    frequency_function_with(u, center, radii, HeightEstimator::default())
}

pub fn frequency_function_with(
    u: &QHalfMap,
    center: [f64; 2],
    radii: &[f64],
    estimator: HeightEstimator,
) -> Result<FrequencyCurve> {
    let mesh = u.mesh();
    let h = mesh.h();
    let room = mesh.inradius_at(center);
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r + 2.0 * h <= room)) {
        return Err(Error::InvalidInput(format!(
            "radius {r} does not fit in the domain around {center:?} (room {room:.4}, h {h})"
        )));
    }
    let dist = |p: [f64; 2]| (p[0] - center[0]).hypot(p[1] - center[1]);
    let nodes = mesh.nodes();
    let edges: Vec<(f64, f64)> = mesh
        .edges()
        .par_iter()
        .map(|&(a, b)| {
            let (pa, pb) = (nodes[a].position, nodes[b].position);
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            (dist(mid), u.edge_cost(a, b, MatchingStrategy::Auto))
        })
        .collect();
    let heights: Vec<(f64, f64)> = nodes
        .iter()
        .zip(u.tuples())
        .map(|(nd, t)| {
            let w = if nd.side == Side::Interface { interface_weight(u.q()) } else { 1.0 };
            (dist(nd.position), w * t.norm_sq())
        })
        .collect();

    let mut curve = FrequencyCurve {
        center,
        r: vec![],
        dirichlet: vec![],
        height: vec![],
        frequency: vec![],
        omitted: vec![],
    };
    for &r in radii {
        let d = compensated_sum(edges.iter().filter(|(rho, _)| *rho < r).map(|(_, c)| *c));
        let shell = match estimator {
            HeightEstimator::ShellBin => {
                compensated_sum(
                    heights.iter().filter(|(rho, _)| *rho >= r - h / 2.0 && *rho < r + h / 2.0).map(|(_, v)| *v),
                ) * h
            }
            HeightEstimator::Interpolated => circle_integral(u, &heights, center, r)?,
        };
        if shell < MIN_HEIGHT {
            log::warn!("frequency at r = {r} skipped: H = {shell:.3e}");
            curve.omitted.push(r);
            continue;
        }
        curve.r.push(r);
        curve.dirichlet.push(d);
        curve.height.push(shell);
        curve.frequency.push(r * d / shell);
    }
    Ok(curve)
}

/// Trapezoid rule for ∫_{∂B_r(center)} f with f bilinear on grid cells.
fn circle_integral(u: &QHalfMap, nodal: &[(f64, f64)], center: [f64; 2], r: f64) -> Result<f64> {
    let mesh = u.mesh();
    let h = mesh.h();
    let samples = ((2.0 * PI * r / h) * SAMPLES_PER_CELL).ceil().max(64.0) as usize;
    let values = (0..samples)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            let x = [center[0] + r * theta.cos(), center[1] + r * theta.sin()];
            let (fx, fy) = (x[0] / h, x[1] / h);
            let (i, j) = (fx.floor() as i64, fy.floor() as i64);
            let (tx, ty) = (fx - i as f64, fy - j as f64);
            let corner = |di: i64, dj: i64| {
                mesh.node_at(i + di, j + dj).map(|n| nodal[n].1).ok_or_else(|| {
                    Error::InvalidInput(format!("circle of radius {r} leaves the grid near {x:?}"))
                })
            };
            Ok((1.0 - tx) * (1.0 - ty) * corner(0, 0)?
                + tx * (1.0 - ty) * corner(1, 0)?
                + (1.0 - tx) * ty * corner(0, 1)?
                + tx * ty * corner(1, 1)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(values) * 2.0 * PI * r / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qvalued::domain::{Domain, DomainMesh};
    use crate::qvalued::tuple::QTuple;
    use std::sync::Arc;

    #[test]
    fn vanishing_map_omits_every_radius() {
        let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 16, None).unwrap());
        let u = QHalfMap::from_fn(mesh, 1, 1, |_| QTuple::scalars(&[0.0])).unwrap();
        let c = frequency_function(&u, [0.0, 0.0], &[0.3, 0.5]).unwrap();
        assert!(c.r.is_empty());
        assert_eq!(c.omitted, vec![0.3, 0.5]);
    }

    #[test]
    fn radii_must_fit() {
        let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 16, None).unwrap());
        let u = QHalfMap::from_fn(mesh, 1, 1, |_| QTuple::scalars(&[1.0])).unwrap();
        assert!(frequency_function(&u, [0.0, 0.0], &[0.99]).is_err());
        assert!(frequency_function(&u, [0.5, 0.0], &[0.5]).is_err());
        assert!(frequency_function(&u, [0.0, 0.0], &[0.0]).is_err());
    }
}

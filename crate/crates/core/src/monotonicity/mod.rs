//! Weighted mass ratios about a boundary point, the differential inequality
//! they satisfy, Allard's identity in the flat case, the radial deformation
//! field X_s and boundary densities.
//!
//! With u = d/s and ν = ∇d/|∇d| the inequality checked here reads
//!
//! ```text
//! d/ds [e^{Cs^α} s^{−m} Σ w φ(u)] ≥ −e^{Cs^α} s^{−m−1} Σ w φ′(u) u |P_{π⊥} ν|²
//! ```
//!
//! which is what the first variation of V along X_s yields; the factor u
//! comes from differentiating φ(d/s) inside X_s.

pub mod profile;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::distance::{uniform_in_ball, DistortedDistance};
use crate::error::{dim_mismatch, Error, Result};
use crate::geometry::{compensated_sum, tangential_divergence, unit_ball_volume, AmbientVector, MPlane};
use crate::varifold::{DiscreteVarifold, TestVectorField};
pub use profile::TestProfile;

/// Fewest grid points accepted by [`check_differential_inequality`].
pub const MIN_GRID_POINTS: usize = 8;

/// Fewest usable radii for [`boundary_density`].
pub const MIN_DENSITY_POINTS: usize = 4;

/// Default relative slack tolerance.
pub const DEFAULT_SLACK_TOL: f64 = 1e-3;

/// Safety factor applied to the sampled weight constant.
pub const WEIGHT_SAFETY: f64 = 2.0;

/// Atoms with |x| beyond this multiple of the largest radius are skipped
/// (for the tubular distances d ≥ |x|/√2 in the validity region).
const SKIP_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy)]
struct Entry {
    d: f64,
    /// |P_{π⊥} ∇d/|∇d||²
    perp_sq: f64,
    weight: f64,
}

/// Per-atom distance data for all atoms with d < s_max, computed once.
#[derive(Debug, Clone)]
pub struct PreparedVarifold {
    m: usize,
    alpha: f64,
    weight_c: f64,
    rho: f64,
    s_max: f64,
    entries: Vec<Entry>,
}

impl PreparedVarifold {
    /// Evaluates d and |P_{π⊥}ν|² at every atom of V − `center` that can
    /// reach {d < s_max}.
    pub fn new(
        v: &DiscreteVarifold,
        dd: &DistortedDistance,
        center: Option<&AmbientVector>,
        s_max: f64,
    ) -> Result<Self> {
        if v.ambient_dim() != dd.ambient_dim() {
            return Err(dim_mismatch(dd.ambient_dim(), v.ambient_dim()));
        }
        if let Some(c) = center {
            if c.dim() != v.ambient_dim() {
                return Err(dim_mismatch(v.ambient_dim(), c.dim()));
            }
        }
        check_radius(dd, s_max)?;
        let euclidean = dd.is_euclidean();
        let cutoff = SKIP_FACTOR * s_max;
        let entries: Vec<Option<Entry>> = v
            .par_atoms()
            .map(|a| -> Result<Option<Entry>> {
                let x = match center {
                    Some(c) => AmbientVector::new(a.x.iter().zip(c.as_slice()).map(|(p, q)| p - q).collect()),
                    None => AmbientVector::from_slice(a.x),
                };
                let r = x.norm();
                if r == 0.0 {
                    return Ok(Some(Entry {
                        d: 0.0,
                        perp_sq: 0.0,
                        weight: a.weight,
                    }));
                }
                if euclidean {
                    if r >= s_max {
                        return Ok(None);
                    }
                    let p = a.plane.perp_norm(x.as_slice()) / r;
                    return Ok(Some(Entry {
                        d: r,
                        perp_sq: p * p,
                        weight: a.weight,
                    }));
                }
                if r > cutoff {
                    return Ok(None);
                }
                let (d, g) = dd.value_and_gradient(&x)?;
                if d >= s_max {
                    return Ok(None);
                }
                let p = a.plane.perp_norm(g.as_slice()) / g.norm();
                Ok(Some(Entry {
                    d,
                    perp_sq: p * p,
                    weight: a.weight,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m: v.m(),
            alpha: dd.alpha(),
            weight_c: dd.weight_constant(),
            rho: dd.rho(),
            s_max,
            entries: entries.into_iter().flatten().collect(),
        })
    }

    /// Number of atoms retained.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < self.rho) {
            return Err(Error::OutOfValidity { s, rho: self.rho });
        }
        if s > self.s_max {
            return Err(Error::InvalidInput(format!(
                "radius {s} exceeds the prepared maximum {}",
                self.s_max
            )));
        }
        Ok((self.weight_c * s.powf(self.alpha)).exp() * s.powi(-(self.m as i32)))
    }

    /// Φ_φ(s) = e^{Cs^α} s^{−m} Σ w φ(d/s)
    pub fn weighted_ratio(&self, phi: &TestProfile, s: f64) -> Result<f64> {
        let scale = self.check(s)?;
        Ok(scale * compensated_sum(self.entries.iter().map(|e| e.weight * phi.value(e.d / s))))
    }

    /// Φ(s) = e^{Cs^α} ‖V‖({d < s}) / s^m
    pub fn sharp_ratio(&self, s: f64) -> Result<f64> {
        let scale = self.check(s)?;
        Ok(scale * compensated_sum(self.entries.iter().filter(|e| e.d < s).map(|e| e.weight)))
    }

    /// −e^{Cs^α} s^{−m−1} Σ w φ′(d/s)(d/s)|P_{π⊥}ν|²
    pub fn inequality_rhs(&self, phi: &TestProfile, s: f64) -> Result<f64> {
        let scale = self.check(s)? / s;
        let sum = compensated_sum(self.entries.iter().map(|e| {
            let u = e.d / s;
            -e.weight * phi.derivative(u) * u * e.perp_sq
        }));
        Ok(scale * sum)
    }
}

fn check_radius(dd: &DistortedDistance, s: f64) -> Result<()> {
    if !(s > 0.0 && s < dd.rho()) {
        return Err(Error::OutOfValidity { s, rho: dd.rho() });
    }
    Ok(())
}

pub fn weighted_mass_ratio(v: &DiscreteVarifold, dd: &DistortedDistance, phi: &TestProfile, s: f64) -> Result<f64> {
    check_radius(dd, s)?;
    PreparedVarifold::new(v, dd, None, s)?.weighted_ratio(phi, s)
}

pub fn sharp_mass_ratio(v: &DiscreteVarifold, dd: &DistortedDistance, s: f64) -> Result<f64> {
    check_radius(dd, s)?;
    PreparedVarifold::new(v, dd, None, s)?.sharp_ratio(s)
}

pub fn inequality_rhs(v: &DiscreteVarifold, dd: &DistortedDistance, phi: &TestProfile, s: f64) -> Result<f64> {
    check_radius(dd, s)?;
    PreparedVarifold::new(v, dd, None, s)?.inequality_rhs(phi, s)
}

/// Both sides of the differential inequality on an s-grid.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi_ds: Vec<f64>,
    pub rhs: Vec<f64>,
    pub slack: Vec<f64>,
    /// sharp ratio Φ(s) on the same grid
    pub sharp_phi: Vec<f64>,
    pub weight_constant: f64,
    pub alpha: f64,
    pub plateau: f64,
    pub tolerance: f64,
    /// min over the grid of slack / Φ_φ
    pub min_relative_slack: f64,
    /// max over the grid of |slack| / Φ_φ
    pub max_relative_gap: f64,
    /// min over consecutive radii of (Φ(s_{i+1}) − Φ(s_i)) / Φ(s_i)
    pub min_sharp_increment: f64,
    pub pass: bool,
    pub sharp_monotone: bool,
}

/// Evaluates Φ_φ, its centered-difference derivative, the right-hand side
/// and the slack on `s_grid`; passes when slack ≥ −tol·Φ_φ everywhere.
pub fn check_differential_inequality(
    v: &DiscreteVarifold,
    dd: &DistortedDistance,
    phi: &TestProfile,
    s_grid: &[f64],
    tol: f64,
) -> Result<MonotonicityReport> {
    if s_grid.len() < MIN_GRID_POINTS {
        return Err(grid_error(s_grid.len()));
    }
    let top = s_grid.iter().copied().fold(0.0, f64::max);
    let prepared = PreparedVarifold::new(v, dd, None, top)?;
    inequality_report(&prepared, phi, s_grid, tol)
}

fn grid_error(n: usize) -> Error {
    Error::InvalidConfig(format!(
        "s-grid has {n} points, at least {MIN_GRID_POINTS} are required"
    ))
}

/// As [`check_differential_inequality`] on already prepared data.
pub fn inequality_report(
    prepared: &PreparedVarifold,
    phi: &TestProfile,
    s_grid: &[f64],
    tol: f64,
) -> Result<MonotonicityReport> {
    if s_grid.len() < MIN_GRID_POINTS {
        return Err(grid_error(s_grid.len()));
    }
    if s_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("s-grid must be strictly increasing".into()));
    }
    let phi_values = s_grid
        .par_iter()
        .map(|&s| prepared.weighted_ratio(phi, s))
        .collect::<Result<Vec<f64>>>()?;
    let rhs = s_grid
        .par_iter()
        .map(|&s| prepared.inequality_rhs(phi, s))
        .collect::<Result<Vec<f64>>>()?;
    let sharp = s_grid
        .par_iter()
        .map(|&s| prepared.sharp_ratio(s))
        .collect::<Result<Vec<f64>>>()?;
    let dphi = grid_derivative(s_grid, &phi_values);
    let slack: Vec<f64> = dphi.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let rel = |k: usize| slack[k] / phi_values[k].abs().max(f64::MIN_POSITIVE);
    let min_relative_slack = (0..s_grid.len()).map(rel).fold(f64::INFINITY, f64::min);
    let max_relative_gap = (0..s_grid.len()).map(|k| rel(k).abs()).fold(0.0, f64::max);
    let min_sharp_increment = sharp
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    Ok(MonotonicityReport {
        s: s_grid.to_vec(),
        phi: phi_values,
        dphi_ds: dphi,
        rhs,
        slack,
        sharp_phi: sharp,
        weight_constant: prepared.weight_c,
        alpha: prepared.alpha,
        plateau: phi.plateau(),
        tolerance: tol,
        min_relative_slack,
        max_relative_gap,
        min_sharp_increment,
        pass: min_relative_slack >= -tol,
        sharp_monotone: min_sharp_increment >= -tol,
    })
}

/// Derivative on a nonuniform grid from the interpolating polynomial
/// through five neighbouring nodes (three when the grid is shorter):
/// centered inside, shifted to one side at the ends.
pub fn grid_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3 && f.len() == n);
    let width = n.min(5);
    let half = width / 2;
    (0..n)
        .map(|i| {
            let k = i.saturating_sub(half).min(n - width);
            lagrange_derivative(&x[k..k + width], &f[k..k + width], x[i])
        })
        .collect()
}

/// Derivative at `t` of the polynomial interpolating (x_j, f_j).
fn lagrange_derivative(x: &[f64], f: &[f64], t: f64) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for j in 0..n {
        let denom: f64 = (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
        // d/dt Π_{k≠j}(t − x_k)
        let mut deriv = 0.0;
        for l in (0..n).filter(|&l| l != j) {
            deriv += (0..n).filter(|&k| k != j && k != l).map(|k| t - x[k]).product::<f64>();
        }
        total += f[j] * deriv / denom;
    }
    total
}

/// Both sides of Allard's identity
/// ‖V‖(B_s)/s^m − ‖V‖(B_r)/r^m = ∫_{B_s∖B_r} |P_{π⊥}x|²/|x|^{m+2} d‖V‖.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AllardResidual {
    pub r: f64,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// ‖V‖(B_s)/s^m
    pub ratio_s: f64,
    /// |residual| / ratio_s
    pub relative: f64,
}

pub fn allard_identity_residual(v: &DiscreteVarifold, dd: &DistortedDistance, r: f64, s: f64) -> Result<AllardResidual> {
    if !dd.is_euclidean() || dd.weight_constant() != 0.0 {
        return Err(Error::InvalidConfig(
            "Allard's identity needs the flat distance d = |x| with C = 0".into(),
        ));
    }
    if !(r > 0.0 && r < s) {
        return Err(Error::InvalidInput(format!("need 0 < r < s, got r = {r}, s = {s}")));
    }
    if v.ambient_dim() != dd.ambient_dim() {
        return Err(dim_mismatch(dd.ambient_dim(), v.ambient_dim()));
    }
    let m = v.m() as i32;
    let terms: Vec<(f64, f64, f64)> = v
        .par_atoms()
        .map(|a| {
            let r2: f64 = a.x.iter().map(|c| c * c).sum();
            let norm = r2.sqrt();
            let in_s = if norm < s { a.weight } else { 0.0 };
            let in_r = if norm < r { a.weight } else { 0.0 };
            let shell = if norm >= r && norm < s {
                let p = a.plane.perp_norm(a.x);
                a.weight * p * p / norm.powi(m + 2)
            } else {
                0.0
            };
            (in_s, in_r, shell)
        })
        .collect();
    let mass_s = compensated_sum(terms.iter().map(|t| t.0));
    let mass_r = compensated_sum(terms.iter().map(|t| t.1));
    let rhs = compensated_sum(terms.iter().map(|t| t.2));
    let phi_s = mass_s / s.powi(m);
    if !(phi_s > 0.0) {
        return Err(Error::InsufficientData(format!("no mass inside radius {s}")));
    }
    let lhs = phi_s - mass_r / r.powi(m);
    Ok(AllardResidual {
        r,
        s,
        lhs,
        rhs,
        residual: lhs - rhs,
        ratio_s: phi_s,
        relative: (lhs - rhs).abs() / phi_s,
    })
}

/// Distance data (d, ∇d, D²d) at a point, with the Hessian skipped in the
/// flat case until asked for.
fn distance_data(dd: &DistortedDistance, x: &AmbientVector) -> Result<(f64, AmbientVector, DMatrix<f64>)> {
    let (d, g) = dd.value_and_gradient(x)?;
    let h = dd.hessian(x)?;
    Ok((d, g, h))
}

/// DX_s for X_s = φ(d/s) d ∇d/|∇d|².
fn radial_jacobian(phi: &TestProfile, s: f64, d: f64, g: &AmbientVector, h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.dim();
    let gg = g.norm_sq();
    let hg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[(i, j)] * g[j]).sum()).collect();
    let u = d / s;
    let (p, dp) = (phi.value(u), phi.derivative(u));
    DMatrix::from_fn(n, n, |i, j| {
        p * (g[i] * g[j] / gg + d * h[(i, j)] / gg - 2.0 * d * g[i] * hg[j] / (gg * gg)) + dp * u * g[i] * g[j] / gg
    })
}

/// The proof's deformation field X_s(x) = φ(d/s) d ∇d/|∇d|² with its
/// Jacobian. Failed distance evaluations produce NaN entries.
pub fn radial_test_field(dd: &DistortedDistance, phi: &TestProfile, s: f64) -> Result<TestVectorField> {
    check_radius(dd, s)?;
    let n = dd.ambient_dim();
    let support = if dd.is_euclidean() { s } else { SKIP_FACTOR * s };
    let (dd1, dd2) = (dd.clone(), dd.clone());
    let (phi1, phi2) = (*phi, *phi);
    TestVectorField::new(
        AmbientVector::zeros(n),
        support,
        move |x| {
            let x = AmbientVector::from_slice(x);
            if x.norm() == 0.0 {
                return vec![0.0; n];
            }
            match dd1.value_and_gradient(&x) {
                Ok((d, g)) => {
                    let c = phi1.value(d / s) * d / g.norm_sq();
                    g.scale(c).into_inner()
                }
                Err(_) => vec![f64::NAN; n],
            }
        },
        move |x| {
            let x = AmbientVector::from_slice(x);
            if x.norm() == 0.0 {
                return DMatrix::identity(n, n) * phi2.value(0.0);
            }
            match distance_data(&dd2, &x) {
                Ok((d, g, h)) if d < s => radial_jacobian(&phi2, s, d, &g, &h),
                Ok(_) => DMatrix::zeros(n, n),
                Err(_) => DMatrix::from_element(n, n, f64::NAN),
            }
        },
    )
}

/// div_π X_s − mφ − φ′(d/s)(d/s)(1 − |P_{π⊥}ν|²) at one (x, π); the
/// divergence is taken from the Jacobian of [`radial_test_field`].
pub fn divergence_defect(dd: &DistortedDistance, phi: &TestProfile, s: f64, x: &AmbientVector, plane: &MPlane) -> Result<f64> {
    if dd.value(x)? >= s {
        return Ok(0.0);
    }
    defect_at(dd, phi, s, x, plane)
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceExpansionReport {
    pub s: f64,
    pub samples: usize,
    pub used: usize,
    pub failed: usize,
    pub max_defect: f64,
    /// max |defect| / (s^α φ(d/s)) over samples with φ > 0
    pub fitted_k: f64,
}

pub fn divergence_expansion_check(
    dd: &DistortedDistance,
    phi: &TestProfile,
    s: f64,
    samples: &[(AmbientVector, MPlane)],
) -> Result<DivergenceExpansionReport> {
    check_radius(dd, s)?;
    let results: Vec<Option<(f64, f64)>> = samples
        .par_iter()
        .map(|(x, plane)| {
            let d = dd.value(x).ok()?;
            let w = phi.value(d / s);
            if w <= 0.0 {
                return Some((0.0, 0.0));
            }
            let e = divergence_defect(dd, phi, s, x, plane).ok()?.abs();
            Some((e, e / (s.powf(dd.alpha()) * w)))
        })
        .collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    let ok: Vec<(f64, f64)> = results.into_iter().flatten().collect();
    Ok(DivergenceExpansionReport {
        s,
        samples: samples.len(),
        used: ok.iter().filter(|r| r.1 > 0.0 || r.0 > 0.0).count(),
        failed,
        max_defect: ok.iter().map(|r| r.0).fold(0.0, f64::max),
        fitted_k: ok.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// `count` pairs (x, π): x uniform in B_radius, π a random m-plane.
pub fn random_samples(ambient_dim: usize, m: usize, count: usize, radius: f64, seed: u64) -> Vec<(AmbientVector, MPlane)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = uniform_in_ball(&mut rng, ambient_dim, radius);
            (x, MPlane::random(&mut rng, m, ambient_dim))
        })
        .collect()
}

/// Scaling of the divergence defect with s: the same normalized samples
/// (x = s·y, |y| < plateau) are evaluated at every radius and the largest
/// defect fitted to K·s^p.
#[derive(Debug, Clone, Serialize)]
pub struct DefectScaling {
    pub s: Vec<f64>,
    pub max_defect: Vec<f64>,
    pub exponent: f64,
}

pub fn divergence_defect_scaling(
    dd: &DistortedDistance,
    phi: &TestProfile,
    m: usize,
    s_values: &[f64],
    count: usize,
    seed: u64,
) -> Result<DefectScaling> {
    if s_values.len() < 2 {
        return Err(Error::InsufficientData("need at least two radii".into()));
    }
    let unit = random_samples(dd.ambient_dim(), m, count, phi.plateau(), seed);
    let mut max_defect = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let scaled: Vec<(AmbientVector, MPlane)> = unit.iter().map(|(y, p)| (y.scale(s), p.clone())).collect();
        let report = divergence_expansion_check(dd, phi, s, &scaled)?;
        if report.failed > 0 || !(report.max_defect > 0.0) {
            return Err(Error::InsufficientData(format!(
                "divergence defect unavailable at s = {s} ({} failed evaluations)",
                report.failed
            )));
        }
        max_defect.push(report.max_defect);
    }
    let logs: Vec<(f64, f64)> = s_values.iter().zip(&max_defect).map(|(s, e)| (s.ln(), e.ln())).collect();
    let (slope, _) = linear_fit(&logs);
    Ok(DefectScaling {
        s: s_values.to_vec(),
        max_defect,
        exponent: slope,
    })
}

/// Least-squares (slope, intercept).
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// C = 2 · sup |B − m| / (α d^α) over sampled (x, π) in the validity ball,
/// where B − m is the relative divergence defect on the plateau of φ.
/// Zero for the flat distance.
pub fn estimate_weight_constant(dd: &DistortedDistance, m: usize, sample_count: usize, seed: u64) -> Result<f64> {
    if dd.is_euclidean() {
        return Ok(0.0);
    }
    let rho = dd.rho();
    // any profile works: on its plateau the defect is φ·(B − m) with φ = 1
    let phi = TestProfile::new(0.5)?;
    let samples = random_samples(dd.ambient_dim(), m, sample_count.max(1), rho, seed);
    let ratios: Vec<Option<f64>> = samples
        .par_iter()
        .map(|(x, plane)| {
            let d = dd.value(x).ok()?;
            if !(d > 0.0) {
                return Some(0.0);
            }
            // d/s = a/2 puts x on the plateau; s may exceed ρ here, which is
            // harmless since only the pointwise identity is used
            let s = d / (0.5 * phi.plateau());
            let e = defect_at(dd, &phi, s, x, plane).ok()?;
            Some(e.abs() / (dd.alpha() * d.powf(dd.alpha())))
        })
        .collect();
    let failed = ratios.iter().filter(|r| r.is_none()).count();
    if failed == ratios.len() {
        return Err(Error::InsufficientData("every weight-constant sample failed".into()));
    }
    if failed > 0 {
        log::warn!("{failed} of {} weight-constant samples failed to evaluate", ratios.len());
    }
    let sup = ratios.into_iter().flatten().fold(0.0, f64::max);
    Ok(WEIGHT_SAFETY * sup)
}

fn defect_at(dd: &DistortedDistance, phi: &TestProfile, s: f64, x: &AmbientVector, plane: &MPlane) -> Result<f64> {
    let (d, g, h) = distance_data(dd, x)?;
    let jac = radial_jacobian(phi, s, d, &g, &h);
    let div = tangential_divergence(&jac, plane)?;
    let u = d / s;
    let nu = g.scale(1.0 / g.norm());
    let perp = plane.perp_norm(nu.as_slice());
    Ok(div - plane.dim() as f64 * phi.value(u) - phi.derivative(u) * u * (1.0 - perp * perp))
}

/// Θ̂ from a linear-in-s fit of Φ(s)/ω_m.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    pub point: Vec<f64>,
    pub theta: f64,
    pub slope: f64,
    pub s: Vec<f64>,
    /// Φ(s)/ω_m at each used radius
    pub ratio: Vec<f64>,
    /// max |ratio − fit|
    pub residual: f64,
}

/// Radii are log-spaced on [s_min, s_max]; `dd` must be built for Γ
/// recentered at `p`, and V is translated by −p before evaluating d.
pub fn boundary_density(
    v: &DiscreteVarifold,
    dd: &DistortedDistance,
    p: &AmbientVector,
    s_min: f64,
    s_max: f64,
    points: usize,
) -> Result<DensityEstimate> {
    if !(s_min > 0.0 && s_max > s_min) {
        return Err(Error::InvalidConfig(format!(
            "density radii need 0 < s_min < s_max, got {s_min}, {s_max}"
        )));
    }
    if points < MIN_DENSITY_POINTS {
        return Err(Error::InsufficientData(format!(
            "{points} radii requested, at least {MIN_DENSITY_POINTS} needed"
        )));
    }
    let grid = log_grid(s_min, s_max, points);
    let usable: Vec<f64> = grid.into_iter().filter(|&s| s < dd.rho()).collect();
    if usable.len() < MIN_DENSITY_POINTS {
        return Err(Error::InsufficientData(format!(
            "only {} radii lie inside the validity radius {}",
            usable.len(),
            dd.rho()
        )));
    }
    let top = *usable.last().expect("nonempty");
    let prepared = PreparedVarifold::new(v, dd, Some(p), top)?;
    let omega = unit_ball_volume(v.m());
    let mut s_used = Vec::new();
    let mut ratio = Vec::new();
    for s in usable {
        let phi = prepared.sharp_ratio(s)?;
        if phi > 0.0 {
            s_used.push(s);
            ratio.push(phi / omega);
        }
    }
    if s_used.len() < MIN_DENSITY_POINTS {
        return Err(Error::InsufficientData(format!(
            "only {} radii carry mass",
            s_used.len()
        )));
    }
    let pts: Vec<(f64, f64)> = s_used.iter().copied().zip(ratio.iter().copied()).collect();
    let (slope, theta) = linear_fit(&pts);
    let residual = pts
        .iter()
        .map(|(s, r)| (r - (theta + slope * s)).abs())
        .fold(0.0, f64::max);
    Ok(DensityEstimate {
        point: p.as_slice().to_vec(),
        theta,
        slope,
        s: s_used,
        ratio,
        residual,
    })
}

/// `n` log-spaced values from a to b inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` evenly spaced values from a to b inclusive.
pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_derivative_is_exact_for_quartics() {
        let x: [f64; 7] = [0.1, 0.13, 0.2, 0.22, 0.3, 0.41, 0.45];
        let f: Vec<f64> = x.iter().map(|t| t.powi(4) + 3.0 * t * t - t + 2.0).collect();
        for (d, t) in grid_derivative(&x, &f).iter().zip(x) {
            assert!((d - (4.0 * t.powi(3) + 6.0 * t - 1.0)).abs() < 1e-10);
        }
        let short = grid_derivative(&x[..3], &f[..3]);
        assert_eq!(short.len(), 3);
    }

    #[test]
    fn grids() {
        let g = log_grid(0.01, 1.0, 3);
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert_eq!(g[2], 1.0);
        assert_eq!(linear_grid(0.0, 1.0, 5)[4], 1.0);
    }

    #[test]
    fn flat_weight_constant_is_zero() {
        let dd = DistortedDistance::euclidean(3);
        assert_eq!(estimate_weight_constant(&dd, 2, 100, 1).unwrap(), 0.0);
    }

    #[test]
    fn flat_divergence_defect_vanishes() {
        let dd = DistortedDistance::euclidean(4);
        let phi = TestProfile::new(0.3).unwrap();
        let samples = random_samples(4, 2, 200, 0.5, 9);
        let report = divergence_expansion_check(&dd, &phi, 0.5, &samples).unwrap();
        assert_eq!(report.failed, 0);
        assert!(report.max_defect < 1e-10, "{}", report.max_defect);
    }

    #[test]
    fn flat_radial_field_is_phi_times_x() {
        let dd = DistortedDistance::euclidean(3);
        let phi = TestProfile::new(0.5).unwrap();
        let s = 0.8;
        let field = radial_test_field(&dd, &phi, s).unwrap();
        let samples = random_samples(3, 2, 50, 1.2, 2);
        for (x, _) in &samples {
            let expect = x.scale(phi.value(x.norm() / s));
            assert!((&field.value(x).unwrap() - &expect).norm() < 1e-14);
        }
        assert_eq!(field.value(&AmbientVector::zeros(3)).unwrap().norm(), 0.0);
        assert!(field.jacobian_fd_error(200, 4, 1e-6) < 1e-5);
    }

    #[test]
    fn out_of_validity() {
        let dd = DistortedDistance::euclidean(3).with_validity_radius(0.5).unwrap();
        let phi = TestProfile::new(0.5).unwrap();
        let v = DiscreteVarifold::empty(2, 3);
        assert!(matches!(
            weighted_mass_ratio(&v, &dd, &phi, 0.6),
            Err(Error::OutOfValidity { .. })
        ));
        assert!(matches!(sharp_mass_ratio(&v, &dd, 0.0), Err(Error::OutOfValidity { .. })));
    }
}

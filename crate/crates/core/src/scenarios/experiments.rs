//! The experiment behind each catalog entry.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use super::config::ScenarioConfig;
use super::output::{Bound, Cell, Recorder, CSV_SCHEMA};
use crate::boundary::curve::{CurveShape, ShapeCurve};
use crate::boundary::distance::{build_distorted_distance, verify_distance_axioms, AxiomBounds, AxiomReport, DistortedDistance};
use crate::boundary::BoundaryManifold;
use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, MPlane};
use crate::monotonicity::{
    allard_identity_residual, boundary_density, check_differential_inequality, divergence_defect_scaling,
    estimate_weight_constant, AllardResidual, DensityEstimate, MonotonicityReport, TestProfile,
};
use crate::qvalued::data::{interior_map, HalfMapData, HarmonicTerm, ScalarData};
use crate::qvalued::{
    frequency_function, minimize_dirichlet, optimal_relaxation, solve_scalar_dirichlet, Domain, DomainMesh,
    FrequencyCurve, InterfaceGraph, MinimizeOptions,
};
use crate::row;
use crate::varifold::{mesh, stationarity_defect, DiscreteVarifold, TestVectorField, Truncation};

/// Slack tolerance relative to Φ_φ.
const SLACK_TOL: f64 = 1e-3;
const EQUALITY_TOL: f64 = 5e-3;
const ALLARD_TOL: f64 = 1e-3;
const DENSITY_TOL: f64 = 5e-3;
const TWO_CIRCLES_TOL: f64 = 2e-2;
/// Samples per radius in the divergence-expansion fit.
const DIVERGENCE_SAMPLES: usize = 200;

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::InvalidConfig(format!("{key} is required")))
}

fn depth(cfg: &ScenarioConfig) -> Result<u32> {
    Ok(need(&cfg.discretization.depth, "discretization.depth")? as u32)
}

fn profile(cfg: &ScenarioConfig) -> Result<TestProfile> {
    TestProfile::new(need(&cfg.profile.plateau, "profile.plateau")?)
}

fn seed(cfg: &ScenarioConfig) -> u64 {
    cfg.seed as u64
}

fn s_grid(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    Ok(need(&cfg.discretization.s_grid, "discretization.s_grid")?.values())
}

/// Circle of radius `r` in the x1x2-plane through the origin, centered at (−r, 0, 0).
fn circle_through_origin(r: f64) -> Result<BoundaryManifold> {
    let center = AmbientVector::new(vec![-r, 0.0, 0.0]);
    Ok(BoundaryManifold::Curve(Arc::new(ShapeCurve::new(
        CurveShape::Circle { radius: r },
        center,
        &MPlane::coordinate(2, 3),
    )?)))
}

fn monotonicity_csv(rec: &mut Recorder, name: &str, r: &MonotonicityReport) -> Result<()> {
    let rows: Vec<Vec<Cell>> = (0..r.s.len())
        .map(|i| row![r.s[i], r.phi[i], r.dphi_ds[i], r.rhs[i], r.slack[i], r.sharp_phi[i]])
        .collect();
    rec.csv(name, "monotonicity", &["s", "phi", "dphi_ds", "rhs", "slack", "sharp_phi"], &rows)
}

fn density_csv(rec: &mut Recorder, name: &str, est: &DensityEstimate) -> Result<()> {
    let rows: Vec<Vec<Cell>> = est
        .s
        .iter()
        .zip(&est.ratio)
        .map(|(&s, &q)| row![s, q, est.theta + est.slope * s])
        .collect();
    rec.csv(name, "density", &["s", "ratio", "fit"], &rows)
}

fn allard_csv(rec: &mut Recorder, a: &AllardResidual, exact_rhs: Option<f64>) -> Result<()> {
    rec.csv(
        "allard.csv",
        "allard",
        &["r", "s", "lhs", "rhs", "ratio_s", "relative", "rhs_exact"],
        &[row![a.r, a.s, a.lhs, a.rhs, a.ratio_s, a.relative, exact_rhs.unwrap_or(f64::NAN)]],
    )
}

fn equality_criterion(rec: &mut Recorder, r: &MonotonicityReport) {
    rec.number("max_relative_gap", r.max_relative_gap);
    rec.number("min_relative_slack", r.min_relative_slack);
    rec.criterion(
        "flat-equality",
        "max over s of |dphi_ds - rhs| / phi",
        r.max_relative_gap,
        Bound::AtMost(EQUALITY_TOL),
        "monotonicity.csv",
    );
}

pub(crate) fn flat_halfplane(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let m = mesh::polar_patch(0.0, 1.0, 0.0, PI, 4, 16)?.embed_coordinate(3)?;
    let v = DiscreteVarifold::from_triangulation(&m, depth(cfg)?, None)?;
    rec.number("atoms", v.len() as f64);
    let dd = DistortedDistance::euclidean(3);
    let g = need(&cfg.discretization.density_grid, "discretization.density_grid")?;
    let est = boundary_density(&v, &dd, &AmbientVector::zeros(3), g.min, g.max, g.points as usize)?;
    density_csv(rec, "density.csv", &est)?;
    rec.number("theta", est.theta);
    rec.number("theta_fit_residual", est.residual);
    rec.criterion(
        "density",
        "|theta - 0.5|, theta the intercept of a linear fit of ratio against s",
        (est.theta - 0.5).abs(),
        Bound::AtMost(DENSITY_TOL),
        "density.csv",
    );
    let r = check_differential_inequality(&v, &dd, &profile(cfg)?, &s_grid(cfg)?, SLACK_TOL)?;
    monotonicity_csv(rec, "monotonicity.csv", &r)?;
    equality_criterion(rec, &r);
    Ok(())
}

fn allard_criterion(rec: &mut Recorder, a: &AllardResidual) {
    rec.number("allard_relative", a.relative);
    rec.number("allard_lhs", a.lhs);
    rec.number("allard_rhs", a.rhs);
    rec.criterion(
        "allard",
        "|lhs - rhs| / ratio_s",
        a.relative,
        Bound::AtMost(ALLARD_TOL),
        "allard.csv",
    );
}

pub(crate) fn offset_plane(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let h = need(&cfg.geometry.offset, "geometry.offset")?;
    let radii = need(&cfg.discretization.allard_radii, "discretization.allard_radii")?;
    let m = mesh::rectangle(-1.0, 1.0, -1.0, 1.0, 4, 4)?
        .embed_coordinate(3)?
        .translate(&AmbientVector::new(vec![0.0, 0.0, h]))?;
    let v = DiscreteVarifold::from_triangulation(&m, depth(cfg)?, None)?;
    rec.number("atoms", v.len() as f64);
    let dd = DistortedDistance::euclidean(3);
    let (r, s) = (radii[0], radii[1]);
    let a = allard_identity_residual(&v, &dd, r, s)?;
    // ∫ h²/(ρ² + h²)² over the annulus the shell cuts from the plane
    let exact = if s <= 1.0 { PI * h * h * (1.0 / (r * r) - 1.0 / (s * s)) } else { f64::NAN };
    rec.number("allard_rhs_exact", exact);
    allard_csv(rec, &a, Some(exact))?;
    allard_criterion(rec, &a);
    let mr = check_differential_inequality(&v, &dd, &profile(cfg)?, &s_grid(cfg)?, SLACK_TOL)?;
    monotonicity_csv(rec, "monotonicity.csv", &mr)?;
    equality_criterion(rec, &mr);
    Ok(())
}

pub(crate) fn tilted_cone(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let tilt = need(&cfg.geometry.tilt, "geometry.tilt")?;
    let n = need(&cfg.geometry.vertices, "geometry.vertices")? as usize;
    let link = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            AmbientVector::new(vec![t.cos(), t.sin(), tilt * (2.0 * t).sin()])
                .normalized()
                .ok_or_else(|| Error::Degenerate("zero link vertex".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = mesh::cone_over_polyline(&link, 1.0, 1)?;
    let v = DiscreteVarifold::from_triangulation(&m, depth(cfg)?, None)?;
    rec.number("atoms", v.len() as f64);
    let dd = DistortedDistance::euclidean(3);
    let radii = need(&cfg.discretization.allard_radii, "discretization.allard_radii")?;
    let a = allard_identity_residual(&v, &dd, radii[0], radii[1])?;
    // the cone's tangent planes contain x, so the shell integral vanishes
    allard_csv(rec, &a, Some(0.0))?;
    allard_criterion(rec, &a);
    let mr = check_differential_inequality(&v, &dd, &profile(cfg)?, &s_grid(cfg)?, SLACK_TOL)?;
    monotonicity_csv(rec, "monotonicity.csv", &mr)?;
    equality_criterion(rec, &mr);
    Ok(())
}

pub(crate) fn disk_circle_boundary(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let radii = need(&cfg.geometry.radii, "geometry.radii")?;
    let big_r = radii[0];
    if big_r < 0.8 {
        return Err(Error::InvalidConfig(format!(
            "geometry.radii: the disk patch needs a radius of at least 0.8, got {big_r}"
        )));
    }
    let h = need(&cfg.discretization.h, "discretization.h")?;
    let samples = need(&cfg.solver.samples, "solver.samples")? as usize;
    let gamma = circle_through_origin(big_r)?;
    let dd = build_distorted_distance(&gamma)?;

    let c = estimate_weight_constant(&dd, 2, samples, seed(cfg))?;
    let c_reseeded = estimate_weight_constant(&dd, 2, samples, seed(cfg) + 1)?;
    rec.csv(
        "weight_constant.csv",
        "weight-constant",
        &["seed", "samples", "c"],
        &[row![cfg.seed, samples, c], row![cfg.seed + 1, samples, c_reseeded]],
    )?;
    rec.number("weight_constant", c);
    rec.number("weight_constant_reseeded", c_reseeded);
    rec.criterion(
        "weight-constant-stable",
        "|c(seed + 1) / c(seed) - 1|",
        (c_reseeded / c - 1.0).abs(),
        Bound::AtMost(0.2),
        "weight_constant.csv",
    );

    // polar patch of the disk near the origin; 0.7 of radial room and an
    // arc of length 1.5 cover B_{1.5 s} for s up to 0.4
    let half_angle = (0.75 / big_r).min(PI);
    let m = mesh::polar_patch(
        big_r - 0.7,
        big_r,
        -half_angle,
        half_angle,
        (0.7 / h).ceil() as usize,
        (2.0 * half_angle * big_r / h).ceil() as usize,
    )?
    .embed_coordinate(3)?
    .translate(&AmbientVector::new(vec![-big_r, 0.0, 0.0]))?;
    let v = DiscreteVarifold::from_triangulation(&m, depth(cfg)?, None)?;
    rec.number("atoms", v.len() as f64);
    let phi = profile(cfg)?;
    let grid = s_grid(cfg)?;
    let weighted = dd.clone().with_weight_constant(c)?;
    let r = check_differential_inequality(&v, &weighted, &phi, &grid, SLACK_TOL)?;
    monotonicity_csv(rec, "monotonicity.csv", &r)?;
    let r0 = check_differential_inequality(&v, &dd.clone().with_weight_constant(0.0)?, &phi, &grid, SLACK_TOL)?;
    monotonicity_csv(rec, "monotonicity_unweighted.csv", &r0)?;
    rec.number("min_relative_slack", r.min_relative_slack);
    rec.number("min_relative_slack_unweighted", r0.min_relative_slack);
    rec.number("min_sharp_increment", r.min_sharp_increment);
    rec.criterion(
        "min-slack",
        "min over s of slack / phi with the fitted C",
        r.min_relative_slack,
        Bound::AtLeast(-SLACK_TOL),
        "monotonicity.csv",
    );
    rec.criterion(
        "sharp-monotone",
        "min over consecutive s of (sharp_phi[i+1] - sharp_phi[i]) / sharp_phi[i]",
        r.min_sharp_increment,
        Bound::AtLeast(-SLACK_TOL),
        "monotonicity.csv",
    );

    let dg = need(&cfg.discretization.divergence_grid, "discretization.divergence_grid")?;
    let sc = divergence_defect_scaling(&dd, &phi, 2, &dg.values(), DIVERGENCE_SAMPLES, seed(cfg))?;
    let rows: Vec<Vec<Cell>> = sc.s.iter().zip(&sc.max_defect).map(|(&s, &d)| row![s, d]).collect();
    rec.csv("divergence.csv", "divergence-defect", &["s", "max_defect"], &rows)?;
    rec.number("divergence_exponent", sc.exponent);
    rec.criterion(
        "divergence-exponent",
        "|p - 1|, p the least-squares slope of log max_defect against log s",
        (sc.exponent - 1.0).abs(),
        Bound::AtMost(0.2),
        "divergence.csv",
    );
    Ok(())
}

pub(crate) fn two_circles(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let radii = need(&cfg.geometry.radii, "geometry.radii")?;
    let mult = need(&cfg.geometry.multiplicities, "geometry.multiplicities")?;
    if radii.len() != mult.len() {
        return Err(Error::InvalidConfig("geometry.multiplicities: one per radius".into()));
    }
    let h = need(&cfg.discretization.h, "discretization.h")?;
    let trunc = need(&cfg.discretization.truncation, "discretization.truncation")?;
    let g = need(&cfg.discretization.density_grid, "discretization.density_grid")?;
    let mut m = mesh::TriangleMesh::new(2);
    for (&r, &k) in radii.iter().zip(&mult) {
        m.extend(mesh::disk(r, h)?.with_multiplicity(k as u32))?;
    }
    let m = m.embed_coordinate(3)?;
    for (i, &r) in radii.iter().enumerate() {
        let label = match (radii.len(), i) {
            (2, 0) => "inner".to_string(),
            (2, 1) => "outer".to_string(),
            _ => format!("r{}", i + 1),
        };
        // half the disk whose edge passes through p plus every larger disk
        let expected = mult[i] as f64 / 2.0 + mult[i + 1..].iter().sum::<i64>() as f64;
        let p = AmbientVector::new(vec![r, 0.0, 0.0]);
        let v = DiscreteVarifold::from_triangulation(&m, depth(cfg)?, Some(&Truncation { center: p.clone(), radius: trunc }))?;
        let dd = build_distorted_distance(&circle_through_origin(r)?)?;
        let est = boundary_density(&v, &dd, &p, g.min, g.max, g.points as usize)?;
        let file = format!("density_{label}.csv");
        density_csv(rec, &file, &est)?;
        rec.number(&format!("theta_{label}"), est.theta);
        rec.number(&format!("theta_{label}_expected"), expected);
        rec.criterion(
            &format!("density-{label}"),
            &format!("|theta - {expected}| at ({r}, 0, 0)"),
            (est.theta - expected).abs(),
            Bound::AtMost(TWO_CIRCLES_TOL),
            &file,
        );
    }
    Ok(())
}

pub(crate) fn free_boundary_halfdisk(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let (e2, e3) = (AmbientVector::basis(3, 1), AmbientVector::basis(3, 2));
    let origin = AmbientVector::zeros(3);
    let depth = depth(cfg)?;
    // half-disk {x1 = 0, x3 ≥ 0}; its edge lies in Γ = {x3 = 0} and it meets Γ orthogonally
    let half = mesh::polar_patch(0.0, 1.0, 0.0, PI, 4, 16)?.embed(&origin, &e2, &e3)?;
    let full = mesh::polar_patch(0.0, 1.0, 0.0, 2.0 * PI, 4, 32)?.embed(&origin, &e2, &e3)?;
    let v = DiscreteVarifold::from_triangulation(&half, depth, None)?;
    let v_full = DiscreteVarifold::from_triangulation(&full, depth, None)?;
    rec.number("atoms", v.len() as f64);
    let span = MPlane::coordinate(2, 3);
    let gamma = BoundaryManifold::flat(span.clone());
    let dd = build_distorted_distance(&gamma)?;
    let phi = profile(cfg)?;
    let grid = s_grid(cfg)?;
    let r = check_differential_inequality(&v, &dd, &phi, &grid, SLACK_TOL)?;
    let rf = check_differential_inequality(&v_full, &dd, &phi, &grid, SLACK_TOL)?;
    monotonicity_csv(rec, "monotonicity.csv", &r)?;
    let rows: Vec<Vec<Cell>> = (0..grid.len()).map(|i| row![grid[i], r.phi[i], rf.phi[i]]).collect();
    rec.csv("reflection.csv", "reflection", &["s", "phi_half", "phi_full"], &rows)?;

    let spread = r.phi.iter().map(|p| (p / r.phi[0] - 1.0).abs()).fold(0.0, f64::max);
    let reflection = r.phi.iter().zip(&rf.phi).map(|(a, b)| (2.0 * a / b - 1.0).abs()).fold(0.0, f64::max);
    rec.number("phi_first", r.phi[0]);
    rec.number("phi_last", r.phi[r.phi.len() - 1]);
    rec.number("phi_spread", spread);
    rec.number("reflection_defect", reflection);
    rec.criterion(
        "phi-constant",
        "max over s of |phi / phi[0] - 1|",
        spread,
        Bound::AtMost(SLACK_TOL),
        "monotonicity.csv",
    );
    rec.criterion(
        "reflection",
        "max over s of |2 phi_half / phi_full - 1|",
        reflection,
        Bound::AtMost(SLACK_TOL),
        "reflection.csv",
    );
    equality_criterion(rec, &r);

    let fields = need(&cfg.solver.fields, "solver.fields")? as usize;
    let radius = need(&cfg.solver.field_radius, "solver.field_radius")?;
    let center = AmbientVector::new(vec![0.0, 0.1, 0.1]);
    let family = TestVectorField::random_family(&center, radius, Some((&origin, &span)), fields, seed(cfg))?;
    let defect = stationarity_defect(&v, &family, Some(&gamma), seed(cfg))?;
    rec.csv("stationarity.csv", "stationarity", &["case", "depth", "defect"], &[row!["half-disk", depth as i64, defect]])?;
    rec.number("stationarity_defect", defect);
    rec.criterion(
        "stationarity",
        "max over fields tangent to the plane of |dV(X)| / (sup|X| + sup|DX|)",
        defect,
        Bound::AtMost(SLACK_TOL),
        "stationarity.csv",
    );
    Ok(())
}

/// Boundary data shared by the minimizer scenarios:
/// Re(z/2) + Re((1 + 0.3i) z²).
fn harmonic_data() -> ScalarData {
    ScalarData::Harmonic {
        terms: vec![
            HarmonicTerm { degree: 1, re: 0.5, im: 0.0 },
            HarmonicTerm { degree: 2, re: 1.0, im: 0.3 },
        ],
    }
}

struct Level {
    cells: usize,
    nodes: usize,
    sweeps: usize,
    converged: bool,
    energy: f64,
    gap: f64,
    oracle: f64,
    history: Vec<f64>,
    frequency: Option<FrequencyCurve>,
}

fn refinement(cfg: &ScenarioConfig, data: &HalfMapData, rec: &mut Recorder) -> Result<Vec<Level>> {
    let g = &cfg.geometry;
    let d = &cfg.discretization;
    let s = &cfg.solver;
    let domain = match need(&g.domain, "geometry.domain")?.as_str() {
        "square" => Domain::UnitSquare,
        _ => Domain::UnitDisk,
    };
    let iface = need(&g.interface, "geometry.interface")?;
    let iface = InterfaceGraph { offset: iface[0], slope: iface[1], curvature: iface[2] };
    let cells = need(&d.cells, "discretization.cells")?;
    let band = need(&d.band, "discretization.band")?;
    let tol = need(&s.tol, "solver.tol")?;
    let relaxation = need(&s.relaxation, "solver.relaxation")?;
    let split = need(&s.split, "solver.split")?;
    let max_iters = need(&s.max_iters, "solver.max_iters")? as usize;
    let radii = d.radii_grid.as_ref().map(|r| r.values());
    let h_fn = |nd: &crate::qvalued::Node| harmonic_data().eval(nd.position);

    let mut levels = Vec::new();
    for (level, &n) in cells.iter().enumerate() {
        let mesh = Arc::new(DomainMesh::new(domain, n as usize, Some(iface))?);
        let u0 = data.initial_map(mesh.clone(), split)?;
        let opts = MinimizeOptions {
            max_iters,
            // keep the algebraic error below the O(h²) discretization error
            tol: tol / 16f64.powi(level as i32),
            relaxation: if relaxation == 0.0 { optimal_relaxation(&mesh) } else { relaxation },
            ..Default::default()
        };
        let out = minimize_dirichlet(&u0, &opts)?;
        let oracle = solve_scalar_dirichlet(&mesh, |nd| !nd.boundary, h_fn)?;
        let frequency = match &radii {
            Some(r) => Some(frequency_function(&out.map, [0.0, 0.0], r)?),
            None => None,
        };
        log::info!("cells {n}: {} sweeps, energy {:.6e}", out.sweeps, out.energy());
        if level + 1 == cells.len() {
            let mut w = rec.raw("minimizer.csv")?;
            writeln!(w, "# varilab minimizer csv-schema {CSV_SCHEMA}")?;
            out.map.write_csv(&mut w)?;
            w.flush()?;
        }
        levels.push(Level {
            cells: n as usize,
            nodes: mesh.len(),
            sweeps: out.sweeps,
            converged: out.converged,
            energy: out.energy(),
            gap: out.map.collapse_gap(band.max(mesh.h()))?,
            oracle: out.map.compare_to_scalar_harmonic(&oracle)?,
            history: out.energy_history,
            frequency,
        });
    }

    let rows: Vec<Vec<Cell>> = levels
        .iter()
        .map(|l| {
            row![l.cells, 1.0 / l.cells as f64, l.nodes, l.sweeps, l.converged as i64, l.energy, l.gap, l.oracle]
        })
        .collect();
    rec.csv(
        "refinement.csv",
        "refinement",
        &["cells", "h", "nodes", "sweeps", "converged", "energy", "collapse_gap", "oracle_distance"],
        &rows,
    )?;
    let rows: Vec<Vec<Cell>> = levels
        .iter()
        .flat_map(|l| l.history.iter().enumerate().map(move |(k, &e)| row![l.cells, k, e]))
        .collect();
    rec.csv("energy_history.csv", "energy-history", &["cells", "sweep", "energy"], &rows)?;
    if radii.is_some() {
        let rows: Vec<Vec<Cell>> = levels
            .iter()
            .filter_map(|l| l.frequency.as_ref().map(|f| (l.cells, f)))
            .flat_map(|(n, f)| {
                (0..f.r.len()).map(move |i| row![n, f.r[i], f.dirichlet[i], f.height[i], f.frequency[i]])
            })
            .collect();
        rec.csv("frequency.csv", "frequency", &["cells", "r", "dirichlet", "height", "frequency"], &rows)?;
    }

    for l in &levels {
        rec.number(&format!("collapse_gap_{}", l.cells), l.gap);
        rec.number(&format!("oracle_distance_{}", l.cells), l.oracle);
    }
    let rise = levels
        .iter()
        .flat_map(|l| l.history.windows(2).map(|w| w[1] - w[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    rec.criterion(
        "energy-descent",
        "largest increase of the energy between consecutive sweeps",
        rise.max(0.0),
        Bound::AtMost(0.0),
        "energy_history.csv",
    );
    rec.criterion(
        "converged",
        "levels that hit the sweep limit",
        levels.iter().filter(|l| !l.converged).count() as f64,
        Bound::AtMost(0.0),
        "refinement.csv",
    );
    Ok(levels)
}

pub(crate) fn collapsed_minimizer(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let q = need(&cfg.geometry.q, "geometry.q")? as usize;
    let levels = refinement(cfg, &HalfMapData::collapsed(q, harmonic_data()), rec)?;
    let finest = levels.last().expect("at least one level");
    rec.criterion(
        "oracle-distance",
        &format!("max nodal distance to the scalar harmonic oracle at cells {}", finest.cells),
        finest.oracle,
        Bound::AtMost(1e-3),
        "refinement.csv",
    );
    if levels.len() > 1 {
        let ratio = levels.windows(2).map(|w| w[1].gap / w[0].gap).fold(f64::NEG_INFINITY, f64::max);
        rec.number("max_gap_ratio", ratio);
        rec.criterion(
            "gap-ratio",
            "largest ratio of collapse gaps between consecutive levels",
            ratio,
            Bound::Below(0.7),
            "refinement.csv",
        );
    }
    // the frequency on the coarsest grids is dominated by the boundary layer
    let inc = levels
        .iter()
        .filter(|l| l.cells >= 32)
        .filter_map(|l| l.frequency.as_ref())
        .map(|f| f.min_increment())
        .fold(f64::INFINITY, f64::min);
    if inc.is_finite() {
        if let Some(f) = finest.frequency.as_ref() {
            rec.number("frequency_first", f.frequency[0]);
            rec.number("frequency_last", f.frequency[f.frequency.len() - 1]);
        }
        rec.criterion(
            "frequency-monotone",
            "min over consecutive r of frequency[i+1] - frequency[i], levels with cells >= 32",
            inc,
            Bound::AtLeast(-1e-3),
            "frequency.csv",
        );
    }
    Ok(())
}

pub(crate) fn branch_minimizer(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let amp = need(&cfg.geometry.branch_amplitude, "geometry.branch_amplitude")?;
    let levels = refinement(cfg, &HalfMapData::branched(harmonic_data(), amp), rec)?;
    let floor = levels.iter().map(|l| l.gap).fold(f64::INFINITY, f64::min);
    rec.number("min_collapse_gap", floor);
    rec.criterion(
        "gap-floor",
        "smallest collapse gap over the levels",
        floor,
        Bound::Above(0.05),
        "refinement.csv",
    );
    Ok(())
}

fn axiom_row(name: &str, r: &AxiomReport) -> Vec<Cell> {
    row![
        name,
        r.samples,
        r.value_ratio,
        r.gradient_ratio,
        r.hessian_ratio,
        r.tangency_defect,
        r.failed_evaluations
    ]
}

pub(crate) fn axiom_check(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let radius = need(&cfg.geometry.radii, "geometry.radii")?[0];
    let n = need(&cfg.solver.samples, "solver.samples")? as usize;
    let bounds = AxiomBounds::default();
    let circle = circle_through_origin(radius)?;
    let dd = build_distorted_distance(&circle)?;
    let once = verify_distance_axioms(&dd, &circle, n, seed(cfg), bounds);
    let twice = verify_distance_axioms(&dd, &circle, 2 * n, seed(cfg), bounds);
    let mut rows = vec![axiom_row("circle", &once), axiom_row("circle", &twice)];
    let mut flat_worst: f64 = 0.0;
    for k in [1, 2] {
        let gamma = BoundaryManifold::flat(MPlane::coordinate(k, 3));
        let fdd = build_distorted_distance(&gamma)?;
        let r = verify_distance_axioms(&fdd, &gamma, n, seed(cfg), bounds);
        flat_worst = [flat_worst, r.value_ratio, r.gradient_ratio, r.hessian_ratio, r.tangency_defect]
            .into_iter()
            .fold(0.0, f64::max);
        if r.failed_evaluations > 0 {
            flat_worst = f64::INFINITY;
        }
        rows.push(axiom_row(if k == 1 { "flat-line" } else { "flat-plane" }, &r));
    }
    rec.csv(
        "axioms.csv",
        "axioms",
        &["gamma", "samples", "value_ratio", "gradient_ratio", "hessian_ratio", "tangency_defect", "failed"],
        &rows,
    )?;
    let k = twice.value_ratio.max(twice.gradient_ratio).max(twice.hessian_ratio);
    let drift = [
        (once.value_ratio, twice.value_ratio),
        (once.gradient_ratio, twice.gradient_ratio),
        (once.hessian_ratio, twice.hessian_ratio),
    ]
    .iter()
    .map(|(a, b)| (b / a - 1.0).abs())
    .fold(0.0, f64::max);
    rec.number("circle_value_ratio", twice.value_ratio);
    rec.number("circle_gradient_ratio", twice.gradient_ratio);
    rec.number("circle_hessian_ratio", twice.hessian_ratio);
    rec.number("circle_tangency_defect", once.tangency_defect.max(twice.tangency_defect));
    rec.number("flat_worst_defect", flat_worst);
    let failed = (once.failed_evaluations + twice.failed_evaluations) as f64;
    rec.criterion(
        "circle-finite-k",
        "largest defect ratio for the circle at doubled samples, with no failed evaluations",
        if failed > 0.0 { f64::INFINITY } else { k },
        Bound::AtMost(bounds.value_ratio.min(bounds.gradient_ratio).min(bounds.hessian_ratio)),
        "axioms.csv",
    );
    rec.criterion(
        "circle-stable",
        "max over the three ratios of |ratio(2N) / ratio(N) - 1|",
        drift,
        Bound::AtMost(0.3),
        "axioms.csv",
    );
    rec.criterion(
        "circle-tangency",
        "largest normal component of the gradient on the circle",
        once.tangency_defect.max(twice.tangency_defect),
        Bound::AtMost(1e-8),
        "axioms.csv",
    );
    rec.criterion(
        "flat-defects",
        "largest defect of any kind for a line and a plane",
        flat_worst,
        Bound::AtMost(1e-12),
        "axioms.csv",
    );
    Ok(())
}

pub(crate) fn frequency_homogeneous(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let cells = need(&cfg.discretization.cells, "discretization.cells")?;
    let n = *cells.last().expect("validated nonempty") as usize;
    let radii = need(&cfg.discretization.radii_grid, "discretization.radii_grid")?.values();
    let degrees = need(&cfg.geometry.degrees, "geometry.degrees")?;
    let amp = need(&cfg.geometry.branch_amplitude, "geometry.branch_amplitude")?;
    let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, n, None)?);
    let mut maps = Vec::new();
    for &k in &degrees {
        maps.push((format!("re-z{k}"), k as f64, vec![ScalarData::harmonic(k as u32, 1.0)]));
    }
    maps.push((
        "branch".to_string(),
        0.5,
        vec![ScalarData::Branch { amplitude: amp }, ScalarData::Branch { amplitude: -amp }],
    ));
    let mut rows = Vec::new();
    for (name, target, sheets) in maps {
        let u = interior_map(mesh.clone(), &sheets)?;
        let f = frequency_function(&u, [0.0, 0.0], &radii)?;
        if !f.omitted.is_empty() {
            return Err(Error::Degenerate(format!("{name}: height vanishes at radii {:?}", f.omitted)));
        }
        for i in 0..f.r.len() {
            rows.push(row![name.as_str(), f.r[i], f.dirichlet[i], f.height[i], f.frequency[i]]);
        }
        let dev = f.max_relative_deviation(target);
        rec.number(&format!("frequency_{name}_first"), f.frequency[0]);
        rec.number(&format!("frequency_{name}_last"), f.frequency[f.frequency.len() - 1]);
        rec.criterion(
            &format!("frequency-{name}"),
            &format!("max over r of |frequency / {target} - 1|"),
            dev,
            Bound::AtMost(0.02),
            "frequency.csv",
        );
    }
    rec.csv("frequency.csv", "frequency", &["map", "r", "dirichlet", "height", "frequency"], &rows)
}

pub(crate) fn stationarity(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let depth = depth(cfg)?;
    let fields = need(&cfg.solver.fields, "solver.fields")? as usize;
    let opening = need(&cfg.geometry.opening, "geometry.opening")?;
    let disk = mesh::lattice_disk(1.0, 0.5)?.embed_coordinate(3)?;
    let cone = mesh::two_half_plane_cone(3, opening, 1.0, 1.0, 0.5)?;
    let axis = MPlane::coordinate(1, 3);
    let gamma = BoundaryManifold::flat(axis.clone());
    let origin = AmbientVector::zeros(3);
    let disk_family =
        TestVectorField::random_family(&AmbientVector::new(vec![0.05, -0.1, 0.0]), 0.6, None, fields, seed(cfg))?;
    let cone_family = TestVectorField::random_family(
        &AmbientVector::new(vec![0.1, 0.05, 0.05]),
        0.8,
        Some((&origin, &axis)),
        fields,
        seed(cfg),
    )?;
    let mut rows = Vec::new();
    let mut defects = [[0.0; 2]; 2];
    for (j, k) in [depth, depth + 1].into_iter().enumerate() {
        let v = DiscreteVarifold::from_triangulation(&disk, k, None)?;
        defects[0][j] = stationarity_defect(&v, &disk_family, None, seed(cfg))?;
        let v = DiscreteVarifold::from_triangulation(&cone, k, None)?;
        defects[1][j] = stationarity_defect(&v, &cone_family, Some(&gamma), seed(cfg))?;
        rows.push(row!["flat-disk", k as i64, defects[0][j]]);
        rows.push(row!["two-half-plane-cone", k as i64, defects[1][j]]);
    }
    rec.csv("stationarity.csv", "stationarity", &["case", "depth", "defect"], &rows)?;
    for (i, (name, bound)) in [("flat-disk", 1e-6), ("cone", 1e-3)].into_iter().enumerate() {
        rec.number(&format!("{name}_defect"), defects[i][0]);
        rec.number(&format!("{name}_defect_refined"), defects[i][1]);
        rec.criterion(
            &format!("{name}-defect"),
            &format!("stationarity defect at depth {depth}"),
            defects[i][0],
            Bound::AtMost(bound),
            "stationarity.csv",
        );
        rec.criterion(
            &format!("{name}-refines"),
            &format!("defect at depth {} over defect at depth {depth}", depth + 1),
            defects[i][1] / defects[i][0],
            Bound::Below(1.0),
            "stationarity.csv",
        );
    }
    Ok(())
}

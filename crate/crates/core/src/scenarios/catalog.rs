//! Shipped scenarios and their default configurations.

use super::config::{Discretization, Geometry, GridSpec, Profile, ScenarioConfig, Solver};
use super::experiments;
use super::output::Recorder;
use crate::error::Result;

pub type Runner = fn(&ScenarioConfig, &mut Recorder) -> Result<()>;

#[derive(Debug, Clone, Copy)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    default: fn() -> ScenarioConfig,
    pub(crate) run: Runner,
}

impl ScenarioInfo {
    pub fn default_config(&self) -> ScenarioConfig {
        (self.default)()
    }
}

const CATALOG: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "flat-halfplane",
        summary: "half-disk with straight edge through 0: density 1/2 and equality in the flat case",
        default: flat_halfplane,
        run: experiments::flat_halfplane,
    },
    ScenarioInfo {
        name: "offset-plane",
        summary: "plane at height h above 0: Allard's identity against its closed form",
        default: offset_plane,
        run: experiments::offset_plane,
    },
    ScenarioInfo {
        name: "tilted-cone",
        summary: "cone over a non-planar closed polygon: Allard's identity",
        default: tilted_cone,
        run: experiments::tilted_cone,
    },
    ScenarioInfo {
        name: "disk-circle-boundary",
        summary: "disk spanning a circle through 0: weighted monotonicity with fitted C",
        default: disk_circle_boundary,
        run: experiments::disk_circle_boundary,
    },
    ScenarioInfo {
        name: "two-circles",
        summary: "two coplanar disks: boundary density where multiplicity jumps",
        default: two_circles,
        run: experiments::two_circles,
    },
    ScenarioInfo {
        name: "free-boundary-halfdisk",
        summary: "half-disk meeting a 2-plane orthogonally: constant ratio and tangential stationarity",
        default: free_boundary_halfdisk,
        run: experiments::free_boundary_halfdisk,
    },
    ScenarioInfo {
        name: "collapsed-dir-minimizer",
        summary: "(Q-1/2)-valued minimizer with collapsed data: one harmonic sheet",
        default: collapsed_minimizer,
        run: experiments::collapsed_minimizer,
    },
    ScenarioInfo {
        name: "branch-dir-minimizer",
        summary: "(Q-1/2)-valued minimizer with branched data: sheets stay apart",
        default: branch_minimizer,
        run: experiments::branch_minimizer,
    },
    ScenarioInfo {
        name: "axiom-check",
        summary: "sampled distorted-distance axioms for circle and flat boundaries",
        default: axiom_check,
        run: experiments::axiom_check,
    },
    ScenarioInfo {
        name: "frequency-homogeneous",
        summary: "frequency of Re(z^k) and of the two-valued branch map",
        default: frequency_homogeneous,
        run: experiments::frequency_homogeneous,
    },
    ScenarioInfo {
        name: "stationarity",
        summary: "first-variation defect of a flat disk and a two-half-plane cone",
        default: stationarity,
        run: experiments::stationarity,
    },
];

pub fn all() -> &'static [ScenarioInfo] {
    CATALOG
}

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|s| s.name).collect()
}

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    CATALOG.iter().find(|s| s.name == name)
}

pub fn default_config(name: &str) -> Option<ScenarioConfig> {
    find(name).map(ScenarioInfo::default_config)
}

fn base(name: &str, seed: i64) -> ScenarioConfig {
    ScenarioConfig {
        scenario: name.to_string(),
        seed,
        output_dir: None,
        geometry: Geometry::default(),
        discretization: Discretization::default(),
        profile: Profile::default(),
        solver: Solver::default(),
    }
}

fn flat_halfplane() -> ScenarioConfig {
    let mut c = base("flat-halfplane", 0);
    c.discretization.depth = Some(6);
    c.discretization.density_grid = Some(GridSpec::log(0.05, 0.8, 12));
    c.discretization.s_grid = Some(GridSpec::linear(0.15, 0.9, 20));
    c.profile.plateau = Some(0.5);
    c
}

fn offset_plane() -> ScenarioConfig {
    let mut c = base("offset-plane", 0);
    c.geometry.offset = Some(0.1);
    c.discretization.depth = Some(7);
    c.discretization.allard_radii = Some(vec![0.3, 0.8]);
    // starts clear of the kink where the plane enters the plateau
    c.discretization.s_grid = Some(GridSpec::linear(0.3, 0.9, 40));
    c.profile.plateau = Some(0.5);
    c
}

fn tilted_cone() -> ScenarioConfig {
    let mut c = base("tilted-cone", 0);
    c.geometry.tilt = Some(0.4);
    c.geometry.vertices = Some(7);
    c.discretization.depth = Some(7);
    c.discretization.allard_radii = Some(vec![0.3, 0.8]);
    c.discretization.s_grid = Some(GridSpec::linear(0.1, 0.6, 20));
    c.profile.plateau = Some(0.5);
    c
}

fn disk_circle_boundary() -> ScenarioConfig {
    let mut c = base("disk-circle-boundary", 1);
    c.geometry.radii = Some(vec![1.0]);
    c.geometry.curve = Some("circle".into());
    c.discretization.depth = Some(2);
    c.discretization.h = Some(0.01);
    c.discretization.s_grid = Some(GridSpec::linear(0.05, 0.4, 36));
    c.discretization.divergence_grid = Some(GridSpec::log(0.02, 0.3, 6));
    c.profile.plateau = Some(0.5);
    c.solver.samples = Some(4000);
    c
}

fn two_circles() -> ScenarioConfig {
    let mut c = base("two-circles", 0);
    c.geometry.radii = Some(vec![1.0, 2.0]);
    c.geometry.multiplicities = Some(vec![1, 1]);
    c.discretization.depth = Some(2);
    c.discretization.h = Some(0.01);
    c.discretization.truncation = Some(0.5);
    c.discretization.density_grid = Some(GridSpec::log(0.03, 0.3, 12));
    c
}

fn free_boundary_halfdisk() -> ScenarioConfig {
    let mut c = base("free-boundary-halfdisk", 3);
    c.discretization.depth = Some(6);
    c.discretization.s_grid = Some(GridSpec::linear(0.15, 0.9, 20));
    c.profile.plateau = Some(0.5);
    c.solver.fields = Some(10);
    c.solver.field_radius = Some(0.6);
    c
}

fn minimizer(name: &str) -> ScenarioConfig {
    let mut c = base(name, 0);
    c.geometry.domain = Some("disk".into());
    c.geometry.interface = Some(vec![0.0, 0.2, 0.3]);
    c.discretization.cells = Some(vec![16, 32, 64]);
    c.discretization.band = Some(0.1);
    c.solver.max_iters = Some(50_000);
    c.solver.tol = Some(1e-9);
    c.solver.relaxation = Some(0.0);
    c.solver.split = Some(0.3);
    c
}

fn collapsed_minimizer() -> ScenarioConfig {
    let mut c = minimizer("collapsed-dir-minimizer");
    c.geometry.q = Some(2);
    c.discretization.radii_grid = Some(GridSpec::linear(0.1, 0.8, 15));
    c
}

fn branch_minimizer() -> ScenarioConfig {
    let mut c = minimizer("branch-dir-minimizer");
    c.geometry.branch_amplitude = Some(0.5);
    c.solver.tol = Some(1e-10);
    c
}

fn axiom_check() -> ScenarioConfig {
    let mut c = base("axiom-check", 0);
    c.geometry.radii = Some(vec![1.0]);
    c.solver.samples = Some(2000);
    c
}

fn frequency_homogeneous() -> ScenarioConfig {
    let mut c = base("frequency-homogeneous", 0);
    c.geometry.degrees = Some(vec![1, 2, 3]);
    c.geometry.branch_amplitude = Some(1.0);
    c.discretization.cells = Some(vec![128]);
    c.discretization.radii_grid = Some(GridSpec::linear(0.3, 0.9, 13));
    c
}

fn stationarity() -> ScenarioConfig {
    let mut c = base("stationarity", 7);
    c.geometry.opening = Some(2.0);
    c.discretization.depth = Some(7);
    c.solver.fields = Some(10);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_entries_exist() {
        for n in [
            "flat-halfplane",
            "tilted-cone",
            "disk-circle-boundary",
            "two-circles",
            "free-boundary-halfdisk",
            "collapsed-dir-minimizer",
            "branch-dir-minimizer",
            "axiom-check",
        ] {
            assert!(find(n).is_some(), "{n}");
        }
        let mut sorted = names();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), CATALOG.len());
    }

    #[test]
    fn defaults_name_their_scenario() {
        for s in all() {
            assert_eq!(s.default_config().scenario, s.name);
        }
    }
}

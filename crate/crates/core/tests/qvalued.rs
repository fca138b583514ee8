use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varilab::monotonicity::linear_grid;
use varilab::qvalued::data::{interior_map, HalfMapData, HarmonicTerm, ScalarData};
use varilab::qvalued::tuple::{optimal_matching_with, MatchingStrategy};
use varilab::qvalued::*;

fn harmonic() -> ScalarData {
    ScalarData::Harmonic {
        terms: vec![
            HarmonicTerm { degree: 1, re: 0.5, im: 0.0 },
            HarmonicTerm { degree: 2, re: 1.0, im: 0.3 },
        ],
    }
}

fn curved() -> InterfaceGraph {
    InterfaceGraph { offset: 0.0, slope: 0.2, curvature: 0.3 }
}

fn solve(data: &HalfMapData, cells: usize, tol: f64) -> (Arc<DomainMesh>, Minimization) {
    let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, cells, Some(curved())).unwrap());
    let u0 = data.initial_map(mesh.clone(), 0.3).unwrap();
    let opts = MinimizeOptions { relaxation: optimal_relaxation(&mesh), tol, max_iters: 50_000, ..Default::default() };
    let out = minimize_dirichlet(&u0, &opts).unwrap();
    assert!(out.converged);
    assert!(out.energy() <= out.energy_history[0]);
    for w in out.energy_history.windows(2) {
        assert!(w[1] <= w[0], "energy rose from {} to {}", w[0], w[1]);
    }
    (mesh, out)
}

#[test]
fn exhaustive_and_assignment_energies_agree() {
    let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 12, Some(curved())).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in 1..=5 {
        let tuples = mesh
            .nodes()
            .iter()
            .map(|nd| {
                let k = cardinality(q, nd.side);
                QTuple::new(2, (0..2 * k).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
            })
            .collect();
        let u = QHalfMap::new(mesh.clone(), q, 2, tuples).unwrap();
        assert_eq!(
            u.dirichlet_energy_with(MatchingStrategy::Exhaustive),
            u.dirichlet_energy_with(MatchingStrategy::Assignment)
        );
    }
    for q in 2..=6 {
        let a = QTuple::new(1, (0..q).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let b = QTuple::new(1, (0..q).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let ex = optimal_matching_with(&a, &b, MatchingStrategy::Exhaustive).unwrap();
        let hu = optimal_matching_with(&a, &b, MatchingStrategy::Assignment).unwrap();
        assert_eq!(ex.cost, hu.cost);
    }
}

#[test]
fn relabeling_sheets_changes_no_output() {
    let (mesh, out) = solve(&HalfMapData::branched(harmonic(), 0.5), 16, 1e-10);
    let u = &out.map;
    let flipped = QHalfMap::new(
        mesh.clone(),
        u.q(),
        1,
        u.tuples().iter().map(|t| t.permuted(&(0..t.q()).rev().collect::<Vec<_>>()).unwrap()).collect(),
    )
    .unwrap();
    assert_eq!(u.dirichlet_energy(), flipped.dirichlet_energy());
    assert_eq!(u.collapse_gap(0.1).unwrap(), flipped.collapse_gap(0.1).unwrap());
    let radii = linear_grid(0.2, 0.7, 6);
    let a = frequency_function(u, [0.0, 0.0], &radii).unwrap();
    let b = frequency_function(&flipped, [0.0, 0.0], &radii).unwrap();
    assert_eq!(a.frequency, b.frequency);
}

#[test]
fn half_valued_q1_is_the_scalar_problem() {
    let data = HalfMapData { plus: vec![harmonic()], minus: vec![], interface: ScalarData::Constant { value: 0.2 } };
    let (mesh, out) = solve(&data, 32, 0.0);
    let oracle = solve_scalar_dirichlet(
        &mesh,
        |nd| !nd.boundary && nd.side == Side::Plus,
        |nd| if nd.side == Side::Interface { 0.2 } else { harmonic().eval(nd.position) },
    )
    .unwrap();
    let err = out.map.compare_to_scalar_harmonic(&oracle).unwrap();
    assert!(err <= 1e-8);
}

#[test]
fn collapsed_data_gives_one_harmonic_sheet() {
    let mut gaps = vec![];
    for (level, cells) in [16usize, 32, 64].into_iter().enumerate() {
        // Algebraic error is kept below the O(h²) discretization error.
        let (mesh, out) = solve(&HalfMapData::collapsed(2, harmonic()), cells, 1e-9 / 16f64.powi(level as i32));
        let oracle = solve_scalar_dirichlet(&mesh, |nd| !nd.boundary, |nd| harmonic().eval(nd.position)).unwrap();
        let err = out.map.compare_to_scalar_harmonic(&oracle).unwrap();
        assert!(err <= 1e-3, "cells {cells}: {err}");
        gaps.push(out.map.collapse_gap(0.1).unwrap());
        if cells >= 32 {
            let f = frequency_function(&out.map, [0.0, 0.0], &linear_grid(0.1, 0.8, 15)).unwrap();
            assert!(f.min_increment() >= -1e-3);
        }
    }
    for w in gaps.windows(2) {
        assert!(w[1] < 0.7 * w[0], "{gaps:?}");
    }
}

#[test]
fn branch_data_keeps_sheets_apart() {
    for cells in [16, 32, 64] {
        let (mesh, out) = solve(&HalfMapData::branched(harmonic(), 0.5), cells, 1e-10);
        assert!(out.map.collapse_gap(0.1).unwrap() > 0.05);
        let oracle = solve_scalar_dirichlet(&mesh, |nd| !nd.boundary, |nd| harmonic().eval(nd.position)).unwrap();
        assert!(out.map.compare_to_scalar_harmonic(&oracle).unwrap() > 0.1);
    }
}

#[test]
fn free_interface_lowers_the_energy_further() {
    let data = HalfMapData::collapsed(2, harmonic());
    let (_, fixed) = solve(&data, 16, 1e-12);
    let opts = MinimizeOptions { free_interface: true, tol: 1e-12, relaxation: 1.5, ..Default::default() };
    let free = minimize_dirichlet(&fixed.map, &opts).unwrap();
    assert!(free.converged);
    assert!(free.energy() < fixed.energy());
}

#[test]
fn frequency_of_homogeneous_maps() {
    let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 128, None).unwrap());
    let radii = linear_grid(0.3, 0.9, 13);
    for k in 1..=3 {
        let u = interior_map(mesh.clone(), &[ScalarData::harmonic(k, 1.0)]).unwrap();
        let c = frequency_function(&u, [0.0, 0.0], &radii).unwrap();
        assert!(c.max_relative_deviation(k as f64) <= 0.02, "k = {k}: {:?}", c.frequency);
    }
    let branch = [ScalarData::Branch { amplitude: 1.0 }, ScalarData::Branch { amplitude: -1.0 }];
    let u = interior_map(mesh, &branch).unwrap();
    let c = frequency_function(&u, [0.0, 0.0], &radii).unwrap();
    assert!(c.max_relative_deviation(0.5) <= 0.02, "{:?}", c.frequency);
}

#[test]
fn shell_binning_is_noisier_than_interpolation() {
    let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 64, None).unwrap());
    let u = interior_map(mesh, &[ScalarData::harmonic(2, 1.0)]).unwrap();
    let radii = linear_grid(0.3, 0.9, 13);
    let bin = frequency_function_with(&u, [0.0, 0.0], &radii, HeightEstimator::ShellBin).unwrap();
    let interp = frequency_function_with(&u, [0.0, 0.0], &radii, HeightEstimator::Interpolated).unwrap();
    assert!(interp.max_relative_deviation(2.0) < bin.max_relative_deviation(2.0));
}

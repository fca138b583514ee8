//! Checkerboard relaxation for the matched Dirichlet energy, and a conjugate
//! gradient solve of the scalar 5-point problem used as an oracle.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{Domain, DomainMesh, Node, Side};
use super::tuple::{self, MatchingStrategy, QTuple};
use super::{interface_weight, QHalfMap};
use crate::error::{Error, Result};
use crate::geometry::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop once a sweep lowers the energy by less than this.
    pub tol: f64,
    /// 1 moves each tuple to its matched-neighbor average; values in (1, 2)
    /// over-relax and still decrease the energy.
    pub relaxation: f64,
    /// Let interface values move to the weighted average of their 2Q−1
    /// incident sheets instead of keeping them as data.
    pub free_interface: bool,
    #[serde(skip)]
    pub matching: MatchingStrategy,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iters: 20_000, tol: 1e-14, relaxation: 1.0, free_interface: false, matching: MatchingStrategy::Auto }
    }
}

/// Young's optimal SOR factor for the 5-point Laplacian on the mesh, from
/// the first Dirichlet eigenvalue of the domain.
pub fn optimal_relaxation(mesh: &DomainMesh) -> f64 {
    let lambda = match mesh.domain() {
        Domain::UnitDisk => 5.783_185_962_946_784,
        Domain::UnitSquare => 2.0 * PI * PI,
    };
    let h = mesh.h();
    let jacobi = 1.0 - lambda * h * h / 4.0;
    2.0 / (1.0 + (1.0 - jacobi * jacobi).sqrt())
}

#[derive(Debug, Clone)]
pub struct Minimization {
    pub map: QHalfMap,
    /// Energy before the first sweep, then lowered by the accurately
    /// computed decrease of every accepted sweep.
    pub energy_history: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl Minimization {
    pub fn energy(&self) -> f64 {
        *self.energy_history.last().expect("history holds the initial energy")
    }
}

/// Block coordinate descent over checkerboard colors. Outer-boundary values
/// stay fixed, and interface values too unless `free_interface` is set.
/// A sweep whose computed energy rises is rolled back and ends the run, so
/// the returned iterate always has the lowest energy seen; without
/// convergence it comes back with `converged = false`.
pub fn minimize_dirichlet(u0: &QHalfMap, opts: &MinimizeOptions) -> Result<Minimization> {
    if opts.max_iters == 0 || !(opts.tol >= 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "need max_iters ≥ 1 and a finite tol ≥ 0, got {} and {}",
            opts.max_iters, opts.tol
        )));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation < 2.0) {
        return Err(Error::InvalidConfig(format!("relaxation must lie in (0, 2), got {}", opts.relaxation)));
    }
    let mesh = u0.mesh().clone();
    let free = |nd: &Node| {
        !nd.boundary
            && match nd.side {
                Side::Interface => opts.free_interface,
                side => super::cardinality(u0.q(), side) > 0,
            }
    };
    let colors: [Vec<usize>; 2] = [0, 1].map(|c| {
        mesh.nodes().iter().enumerate().filter(|(_, nd)| nd.color() == c && free(nd)).map(|(i, _)| i).collect()
    });

    let mut u = u0.clone();
    let mut history = vec![u.dirichlet_energy_with(opts.matching)];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_iters {
        let previous = u.clone();
        for color in &colors {
            let updates: Vec<QTuple> = color.par_iter().map(|&i| relaxed_update(&u, i, opts)).collect();
            for (&i, t) in color.iter().zip(updates) {
                u.tuples_mut()[i] = t;
            }
        }
        sweeps += 1;
        let decrease = previous.energy_decrease(&u, opts.matching);
        if decrease < 0.0 {
            // Only rounding can do this; keep the better iterate.
            u = previous;
            converged = true;
            break;
        }
        let prev = *history.last().expect("nonempty");
        history.push(prev - decrease);
        if decrease <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("Dirichlet relaxation stopped after {sweeps} sweeps without meeting tol {}", opts.tol);
    }
    Ok(Minimization { map: u, energy_history: history, sweeps, converged })
}

fn relaxed_update(u: &QHalfMap, i: usize, opts: &MinimizeOptions) -> QTuple {
    let mesh = u.mesh();
    let cur = u.tuple(i);
    let dim = u.dim();
    let mut target = vec![0.0; cur.as_slice().len()];
    if mesh.nodes()[i].side == Side::Interface {
        // Exact minimizer of the local energy: every incident sheet pulls once.
        let mut weight = 0.0;
        for j in mesh.neighbors(i) {
            let (w, t) = match mesh.nodes()[j].side {
                Side::Interface => (interface_weight(u.q()), u.tuple(j)),
                _ => (1.0, u.tuple(j)),
            };
            for p in t.points() {
                for (acc, v) in target.iter_mut().zip(p) {
                    *acc += w * v;
                }
                weight += w;
            }
        }
        if weight == 0.0 {
            return cur.clone();
        }
        target.iter_mut().for_each(|v| *v /= weight);
    } else {
        let mut count = 0.0;
        for j in mesh.neighbors(i) {
            let nb = u.tuple(j);
            if nb.q() == cur.q() {
                let m = tuple::matched_cost(cur, nb, opts.matching);
                for (k, &p) in m.perm.iter().enumerate() {
                    for (acc, v) in target[k * dim..(k + 1) * dim].iter_mut().zip(nb.point(p)) {
                        *acc += v;
                    }
                }
            } else {
                for chunk in target.chunks_exact_mut(dim) {
                    for (acc, v) in chunk.iter_mut().zip(nb.point(0)) {
                        *acc += v;
                    }
                }
            }
            count += 1.0;
        }
        target.iter_mut().for_each(|v| *v /= count);
    }
    let mut next = cur.clone();
    for (x, t) in next.as_mut_slice().iter_mut().zip(&target) {
        *x += opts.relaxation * (t - *x);
    }
    next
}

/// Nodal solution of the scalar 5-point Dirichlet problem.
#[derive(Debug, Clone)]
pub struct ScalarSolution {
    mesh: Arc<DomainMesh>,
    values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl ScalarSolution {
    pub fn mesh(&self) -> &Arc<DomainMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Solves Σ_j (u_i − u_j) = 0 at every node with `unknown(node)` true, over
/// all grid neighbors j; every other node keeps `data(node)`.
pub fn solve_scalar_dirichlet(
    mesh: &Arc<DomainMesh>,
    unknown: impl Fn(&Node) -> bool,
    data: impl Fn(&Node) -> f64,
) -> Result<ScalarSolution> {
    let nodes = mesh.nodes();
    let mut values: Vec<f64> = nodes.iter().map(|nd| if unknown(nd) { 0.0 } else { data(nd) }).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("scalar data must be finite".into()));
    }
    let free: Vec<usize> = (0..nodes.len()).filter(|&i| unknown(&nodes[i])).collect();
    let mut slot = vec![usize::MAX; nodes.len()];
    for (k, &i) in free.iter().enumerate() {
        slot[i] = k;
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        y.par_iter_mut().enumerate().for_each(|(k, yk)| {
            let i = free[k];
            let mut acc = 0.0;
            for j in mesh.neighbors(i) {
                acc += x[k];
                if slot[j] != usize::MAX {
                    acc -= x[slot[j]];
                }
            }
            *yk = acc;
        });
    };
    let b: Vec<f64> = free
        .iter()
        .map(|&i| mesh.neighbors(i).filter(|&j| slot[j] == usize::MAX).map(|j| values[j]).sum())
        .collect();
    let n = free.len();
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let dot = |a: &[f64], b: &[f64]| -> f64 { compensated_sum(a.iter().zip(b).map(|(x, y)| x * y)) };
    let b_norm = dot(&b, &b).sqrt().max(f64::MIN_POSITIVE);
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let max_iters = 20 * n.max(10);
    while rr.sqrt() > 1e-14 * b_norm {
        if iterations == max_iters {
            return Err(Error::NoConvergence(format!(
                "conjugate gradients left residual {:.3e} after {iterations} iterations",
                rr.sqrt() / b_norm
            )));
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        p.par_iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
        iterations += 1;
    }
    for (k, &i) in free.iter().enumerate() {
        values[i] = x[k];
    }
    Ok(ScalarSolution { mesh: mesh.clone(), values, iterations, residual: rr.sqrt() / b_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qvalued::domain::{Domain, InterfaceGraph};

    #[test]
    fn cg_reproduces_discrete_harmonic_polynomial() {
        // x² − y² is exactly discrete harmonic for the 5-point stencil.
        let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 24, None).unwrap());
        let f = |nd: &Node| nd.position[0].powi(2) - nd.position[1].powi(2) + 0.3 * nd.position[0];
        let s = solve_scalar_dirichlet(&mesh, |nd| !nd.boundary, f).unwrap();
        for (nd, v) in mesh.nodes().iter().zip(s.values()) {
            assert!((v - f(nd)).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_relaxation_matches_cg() {
        let mesh = Arc::new(DomainMesh::new(Domain::UnitDisk, 16, Some(InterfaceGraph::flat())).unwrap());
        let f = |nd: &Node| (3.0 * nd.position[0]).sin() * nd.position[1].exp();
        let u0 = QHalfMap::from_fn(mesh.clone(), 1, 1, |nd| match nd.side {
            Side::Minus => QTuple::empty(1),
            _ if nd.boundary || nd.side == Side::Interface => QTuple::scalars(&[f(nd)]),
            _ => QTuple::scalars(&[0.0]),
        })
        .unwrap();
        let opts = MinimizeOptions { relaxation: 1.8, tol: 0.0, max_iters: 3000, ..Default::default() };
        let out = minimize_dirichlet(&u0, &opts).unwrap();
        let oracle = solve_scalar_dirichlet(&mesh, |nd| !nd.boundary && nd.side == Side::Plus, f).unwrap();
        let err = out.map.compare_to_scalar_harmonic(&oracle).unwrap();
        assert!(err < 1e-12);
        for w in out.energy_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-15));
        }
    }

    #[test]
    fn relaxation_factor_approaches_two() {
        let coarse = optimal_relaxation(&DomainMesh::new(Domain::UnitDisk, 16, None).unwrap());
        let fine = optimal_relaxation(&DomainMesh::new(Domain::UnitDisk, 128, None).unwrap());
        assert!(1.0 < coarse && coarse < fine && fine < 2.0);
    }

    #[test]
    fn rejects_bad_options() {
        let mesh = Arc::new(DomainMesh::new(Domain::UnitSquare, 4, None).unwrap());
        let u0 = QHalfMap::from_fn(mesh, 1, 1, |_| QTuple::scalars(&[0.0])).unwrap();
        for opts in [
            MinimizeOptions { relaxation: 2.0, ..Default::default() },
            MinimizeOptions { max_iters: 0, ..Default::default() },
            MinimizeOptions { tol: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(minimize_dirichlet(&u0, &opts), Err(Error::InvalidConfig(_))));
        }
    }
}

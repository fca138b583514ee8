//! Linear theory of (Q−½)-valued maps: Q sheets above an interface curve,
//! Q−1 below, all collapsing to one value on it.

pub mod data;
pub mod domain;
pub mod frequency;
pub mod solver;
pub mod tuple;

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::compensated_sum;
pub use domain::{Domain, DomainMesh, InterfaceGraph, Node, NodeLabel, Side};
pub use frequency::{frequency_function, frequency_function_with, FrequencyCurve, HeightEstimator};
pub use solver::{minimize_dirichlet, optimal_relaxation, solve_scalar_dirichlet, MinimizeOptions, Minimization, ScalarSolution};
pub use tuple::{optimal_matching, tuple_distance, MatchingStrategy, QTuple};

/// Largest supported Q.
pub const MAX_Q: usize = 8;

/// Nodal values of a (Q−½)-valued map on a [`DomainMesh`]: Q points on plus
/// nodes, Q−1 on minus nodes and a single collapsed point on interface nodes.
#[derive(Debug, Clone)]
pub struct QHalfMap {
    mesh: Arc<DomainMesh>,
    q: usize,
    dim: usize,
    tuples: Vec<QTuple>,
}

impl QHalfMap {
    pub fn new(mesh: Arc<DomainMesh>, q: usize, dim: usize, tuples: Vec<QTuple>) -> Result<Self> {
        if q == 0 || q > MAX_Q {
            return Err(Error::InvalidInput(format!("Q must lie in 1..={MAX_Q}, got {q}")));
        }
        if tuples.len() != mesh.len() {
            return Err(Error::InvalidInput(format!(
                "{} tuples for {} nodes",
                tuples.len(),
                mesh.len()
            )));
        }
        for (nd, t) in mesh.nodes().iter().zip(&tuples) {
            let want = cardinality(q, nd.side);
            if t.dim() != dim || t.q() != want {
                return Err(Error::InvalidInput(format!(
                    "{} node {:?} carries {} points of dimension {}, expected {want} of dimension {dim}",
                    nd.label().as_str(),
                    nd.index,
                    t.q(),
                    t.dim()
                )));
            }
        }
        Ok(Self { mesh, q, dim, tuples })
    }

    pub fn from_fn(
        mesh: Arc<DomainMesh>,
        q: usize,
        dim: usize,
        f: impl Fn(&Node) -> Result<QTuple>,
    ) -> Result<Self> {
        let tuples = mesh.nodes().iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(mesh, q, dim, tuples)
    }

    pub fn mesh(&self) -> &Arc<DomainMesh> {
        &self.mesh
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tuple(&self, node: usize) -> &QTuple {
        &self.tuples[node]
    }

    pub fn tuples(&self) -> &[QTuple] {
        &self.tuples
    }

    pub(crate) fn tuples_mut(&mut self) -> &mut [QTuple] {
        &mut self.tuples
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            q: self.q,
            dim: self.dim,
            tuples: self.tuples.iter().map(|t| t.scaled(factor)).collect(),
        }
    }

    /// Which points pair up across an edge, and with what weight.
    fn edge_pairing(&self, a: usize, b: usize, strategy: MatchingStrategy) -> EdgePairing {
        let (ta, tb) = (&self.tuples[a], &self.tuples[b]);
        let nodes = self.mesh.nodes();
        match (nodes[a].side, nodes[b].side) {
            (Side::Interface, Side::Interface) => EdgePairing::Collapsed,
            (Side::Interface, _) => EdgePairing::SpreadFromA,
            (_, Side::Interface) => EdgePairing::SpreadFromB,
            _ => EdgePairing::Matched(tuple::matched_cost(ta, tb, strategy).perm),
        }
    }

    fn pairing_terms<'a>(
        &'a self,
        a: usize,
        b: usize,
        pairing: &'a EdgePairing,
    ) -> Box<dyn Iterator<Item = (f64, &'a [f64], &'a [f64])> + 'a> {
        let (ta, tb) = (&self.tuples[a], &self.tuples[b]);
        match pairing {
            EdgePairing::Collapsed => Box::new(std::iter::once((interface_weight(self.q), ta.point(0), tb.point(0)))),
            EdgePairing::SpreadFromA => Box::new(tb.points().map(move |p| (1.0, ta.point(0), p))),
            EdgePairing::SpreadFromB => Box::new(ta.points().map(move |p| (1.0, p, tb.point(0)))),
            EdgePairing::Matched(perm) => {
                Box::new(perm.iter().enumerate().map(move |(i, &j)| (1.0, ta.point(i), tb.point(j))))
            }
        }
    }

    /// Matched squared difference across one edge.
    pub(crate) fn edge_cost(&self, a: usize, b: usize, strategy: MatchingStrategy) -> f64 {
        let pairing = self.edge_pairing(a, b, strategy);
        self.pairing_terms(a, b, &pairing).map(|(w, p, q)| w * tuple::dist_sq(p, q)).sum()
    }

    /// E(self) − E(next) on one edge. When the pairing is unchanged the
    /// difference of squares is factored, so the result stays accurate long
    /// after both energies agree to every printed digit.
    fn edge_decrease(&self, next: &QHalfMap, a: usize, b: usize, strategy: MatchingStrategy) -> f64 {
        let old = self.edge_pairing(a, b, strategy);
        let new = next.edge_pairing(a, b, strategy);
        if old != new {
            return self.edge_cost(a, b, strategy) - next.edge_cost(a, b, strategy);
        }
        self.pairing_terms(a, b, &old)
            .zip(next.pairing_terms(a, b, &new))
            .map(|((w, p, q), (_, p2, q2))| {
                w * p.iter()
                    .zip(q)
                    .zip(p2.iter().zip(q2))
                    .map(|((x, y), (x2, y2))| {
                        let (d, d2) = (x - y, x2 - y2);
                        (d - d2) * (d + d2)
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// E(self) − E(next) for a map on the same mesh.
    pub(crate) fn energy_decrease(&self, next: &QHalfMap, strategy: MatchingStrategy) -> f64 {
        let parts: Vec<f64> =
            self.mesh.edges().par_iter().map(|&(a, b)| self.edge_decrease(next, a, b, strategy)).collect();
        compensated_sum(parts)
    }

    /// Σ over grid edges of the matched squared difference.
    pub fn dirichlet_energy(&self) -> f64 {
        self.dirichlet_energy_with(MatchingStrategy::Auto)
    }

    pub fn dirichlet_energy_with(&self, strategy: MatchingStrategy) -> f64 {
        let costs: Vec<f64> =
            self.mesh.edges().par_iter().map(|&(a, b)| self.edge_cost(a, b, strategy)).collect();
        compensated_sum(costs)
    }

    /// Largest tuple diameter among nodes within `band` of the interface.
    pub fn collapse_gap(&self, band: f64) -> Result<f64> {
        let g = self
            .mesh
            .interface()
            .ok_or_else(|| Error::InvalidInput("collapse gap needs an interface".into()))?;
        if !(band >= self.mesh.h()) {
            return Err(Error::InvalidInput(format!(
                "band width {band} is below the grid spacing {}",
                self.mesh.h()
            )));
        }
        Ok(self
            .mesh
            .nodes()
            .iter()
            .zip(&self.tuples)
            .filter(|(nd, _)| g.vertical_offset(nd.position).abs() <= band)
            .map(|(_, t)| t.diameter())
            .fold(0.0, f64::max))
    }

    /// max over nodes of the distance to the reference replicated to each tuple size.
    pub fn compare_to_scalar_harmonic(&self, reference: &ScalarSolution) -> Result<f64> {
        if !self.mesh.same_as(reference.mesh()) || reference.values().len() != self.mesh.len() {
            return Err(Error::InvalidInput("reference was solved on a different mesh".into()));
        }
        if self.dim != 1 {
            return Err(Error::InvalidInput(format!(
                "scalar reference needs scalar sheets, map has dimension {}",
                self.dim
            )));
        }
        self.tuples
            .iter()
            .zip(reference.values())
            .map(|(t, &r)| tuple_distance(t, &QTuple::replicate(&[r], t.q())?))
            .try_fold(0.0f64, |acc, d| Ok(acc.max(d?)))
    }

    /// One row per (node, sheet): x1, x2, label, sheet, v0, v1, ...
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x1".to_string(), "x2".into(), "label".into(), "sheet".into()];
        header.extend((0..self.dim).map(|k| format!("v{k}")));
        w.write_record(&header).map_err(csv_error)?;
        for (nd, t) in self.mesh.nodes().iter().zip(&self.tuples) {
            for (k, p) in t.points().enumerate() {
                let mut row =
                    vec![fmt(nd.position[0]), fmt(nd.position[1]), nd.label().as_str().into(), k.to_string()];
                row.extend(p.iter().map(|&v| fmt(v)));
                w.write_record(&row).map_err(csv_error)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Tuple size carried by a node on `side`.
pub fn cardinality(q: usize, side: Side) -> usize {
    match side {
        Side::Plus => q,
        Side::Minus => q - 1,
        Side::Interface => 1,
    }
}

/// Multiplicity of an edge running along the interface: the mean of the
/// two sides.
pub fn interface_weight(q: usize) -> f64 {
    q as f64 - 0.5
}

#[derive(Debug, Clone, PartialEq)]
enum EdgePairing {
    /// Both ends on the interface.
    Collapsed,
    /// The single interface value at `a` against every point at `b`.
    SpreadFromA,
    SpreadFromB,
    /// `a[i]` against `b[perm[i]]`.
    Matched(Vec<usize>),
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

//! Uniform square grids on the unit disk or the unit square, split by a
//! nodal interface polyline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Closed unit disk centered at the origin.
    UnitDisk,
    /// [−½, ½]², centered at the origin.
    UnitSquare,
}

/// The interface γ = {x₂ = ψ(x₁)} with ψ(t) = offset + slope·t + curvature·t².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceGraph {
    pub offset: f64,
    pub slope: f64,
    pub curvature: f64,
}

impl InterfaceGraph {
    pub fn flat() -> Self {
        Self { offset: 0.0, slope: 0.0, curvature: 0.0 }
    }

    pub fn psi(&self, t: f64) -> f64 {
        self.offset + self.slope * t + self.curvature * t * t
    }

    /// Signed vertical offset of `x` from γ.
    pub fn vertical_offset(&self, x: [f64; 2]) -> f64 {
        x[1] - self.psi(x[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Plus,
    Minus,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeLabel {
    Plus,
    Minus,
    Interface,
    OuterBoundary,
}

impl NodeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeLabel::Plus => "plus",
            NodeLabel::Minus => "minus",
            NodeLabel::Interface => "interface",
            NodeLabel::OuterBoundary => "outer-boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub index: [i64; 2],
    pub position: [f64; 2],
    pub side: Side,
    /// Has a grid neighbor outside the domain; values there are Dirichlet data.
    pub boundary: bool,
}

impl Node {
    pub fn label(&self) -> NodeLabel {
        match (self.boundary, self.side) {
            (true, _) => NodeLabel::OuterBoundary,
            (false, Side::Plus) => NodeLabel::Plus,
            (false, Side::Minus) => NodeLabel::Minus,
            (false, Side::Interface) => NodeLabel::Interface,
        }
    }

    /// Checkerboard color; same-colored nodes never share an edge.
    pub fn color(&self) -> usize {
        ((self.index[0] + self.index[1]).rem_euclid(2)) as usize
    }
}

#[derive(Debug, Clone)]
pub struct DomainMesh {
    domain: Domain,
    cells: usize,
    interface: Option<InterfaceGraph>,
    nodes: Vec<Node>,
    /// Node index by grid slot.
    grid: Vec<Option<usize>>,
    /// East, west, north, south.
    neighbors: Vec<[Option<usize>; 4]>,
    edges: Vec<(usize, usize)>,
}

impl DomainMesh {
    /// Grid of spacing h = 1/`cells`. Without an interface every node is on
    /// the plus side, which models an interior Q-valued map.
    pub fn new(domain: Domain, cells: usize, interface: Option<InterfaceGraph>) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 cells per unit length, got {cells}")));
        }
        if domain == Domain::UnitSquare && !cells.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "the unit square needs an even number of cells, got {cells}"
            )));
        }
        if let Some(g) = &interface {
            if ![g.offset, g.slope, g.curvature].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput("interface coefficients must be finite".into()));
            }
        }
        let n = cells as i64;
        let inside = |i: i64, j: i64| match domain {
            Domain::UnitDisk => i * i + j * j <= n * n,
            Domain::UnitSquare => 2 * i.abs() <= n && 2 * j.abs() <= n,
        };
        let h = 1.0 / cells as f64;
        let width = (2 * n + 1) as usize;
        let slot = |i: i64, j: i64| ((i + n) as usize) * width + (j + n) as usize;
        let mut grid = vec![None; width * width];
        let mut nodes = Vec::new();
        for i in -n..=n {
            for j in -n..=n {
                if !inside(i, j) {
                    continue;
                }
                let boundary = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(di, dj)| !inside(i + di, j + dj));
                grid[slot(i, j)] = Some(nodes.len());
                nodes.push(Node {
                    index: [i, j],
                    position: [i as f64 * h, j as f64 * h],
                    side: Side::Plus,
                    boundary,
                });
            }
        }
        let lookup = |i: i64, j: i64| if inside(i, j) { grid[slot(i, j)] } else { None };
        let neighbors: Vec<[Option<usize>; 4]> = nodes
            .iter()
            .map(|nd| {
                let [i, j] = nd.index;
                [lookup(i + 1, j), lookup(i - 1, j), lookup(i, j + 1), lookup(i, j - 1)]
            })
            .collect();
        let edges = neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| [nb[0], nb[2]].into_iter().flatten().map(move |b| (a, b)))
            .collect();
        let mut mesh = Self { domain, cells, interface, nodes, grid, neighbors, edges };
        if let Some(g) = interface {
            mesh.label_sides(&g)?;
        }
        Ok(mesh)
    }

    fn label_sides(&mut self, g: &InterfaceGraph) -> Result<()> {
        let h = self.h();
        for nd in &mut self.nodes {
            let snapped = (g.psi(nd.position[0]) / h).round() as i64;
            nd.side = match nd.index[1].cmp(&snapped) {
                std::cmp::Ordering::Greater => Side::Plus,
                std::cmp::Ordering::Less => Side::Minus,
                std::cmp::Ordering::Equal => Side::Interface,
            };
        }
        // Steep stretches of ψ leave plus nodes touching minus nodes across
        // columns; those plus nodes join the interface.
        let promote: Vec<usize> = (0..self.nodes.len())
            .filter(|&a| {
                self.nodes[a].side == Side::Plus
                    && self.neighbors[a].iter().flatten().any(|&b| self.nodes[b].side == Side::Minus)
            })
            .collect();
        for a in promote {
            self.nodes[a].side = Side::Interface;
        }
        self.check_separation()
    }

    fn check_separation(&self) -> Result<()> {
        if let Some(&(a, b)) = self.edges.iter().find(|&&(a, b)| {
            matches!(
                (self.nodes[a].side, self.nodes[b].side),
                (Side::Plus, Side::Minus) | (Side::Minus, Side::Plus)
            )
        }) {
            return Err(Error::Degenerate(format!(
                "interface does not separate nodes {:?} and {:?}",
                self.nodes[a].index, self.nodes[b].index
            )));
        }
        for side in [Side::Plus, Side::Minus, Side::Interface] {
            if !self.nodes.iter().any(|nd| nd.side == side) {
                return Err(Error::Degenerate(format!("interface leaves no {side:?} nodes in the domain")));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn interface(&self) -> Option<&InterfaceGraph> {
        self.interface.as_ref()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node at grid index (i, j), i.e. position (i·h, j·h).
    pub fn node_at(&self, i: i64, j: i64) -> Option<usize> {
        let n = self.cells as i64;
        if i.abs() > n || j.abs() > n {
            return None;
        }
        let width = (2 * n + 1) as usize;
        self.grid[((i + n) as usize) * width + (j + n) as usize]
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[node].iter().flatten().copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Distance from `center` to the complement of the domain.
    pub fn inradius_at(&self, center: [f64; 2]) -> f64 {
        match self.domain {
            Domain::UnitDisk => 1.0 - center[0].hypot(center[1]),
            Domain::UnitSquare => (0.5 - center[0].abs()).min(0.5 - center[1].abs()),
        }
    }

    /// Same grid and labels.
    pub fn same_as(&self, other: &DomainMesh) -> bool {
        self.domain == other.domain && self.cells == other.cells && self.interface == other.interface
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let m = DomainMesh::new(Domain::UnitSquare, 8, None).unwrap();
        assert_eq!(m.len(), 81);
        assert_eq!(m.edges().len(), 2 * 8 * 9);
        assert_eq!(m.nodes().iter().filter(|n| n.boundary).count(), 32);
        assert!(DomainMesh::new(Domain::UnitSquare, 7, None).is_err());
    }

    #[test]
    fn disk_boundary_ring() {
        let m = DomainMesh::new(Domain::UnitDisk, 16, None).unwrap();
        for nd in m.nodes() {
            let r = nd.position[0].hypot(nd.position[1]);
            assert!(r <= 1.0 + 1e-12);
            if !nd.boundary {
                assert!(r <= 1.0 - m.h() + 1e-12);
            }
        }
    }

    #[test]
    fn steep_interface_still_separates() {
        let g = InterfaceGraph { offset: 0.05, slope: 3.0, curvature: 0.4 };
        let m = DomainMesh::new(Domain::UnitDisk, 20, Some(g)).unwrap();
        let mut seen = [false; 3];
        for nd in m.nodes() {
            seen[nd.side as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        for &(a, b) in m.edges() {
            let pair = (m.nodes()[a].side, m.nodes()[b].side);
            assert!(pair != (Side::Plus, Side::Minus) && pair != (Side::Minus, Side::Plus));
        }
    }

    #[test]
    fn interface_outside_domain_is_rejected() {
        let g = InterfaceGraph { offset: 3.0, slope: 0.0, curvature: 0.0 };
        assert!(matches!(DomainMesh::new(Domain::UnitDisk, 8, Some(g)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn checkerboard_colors_alternate() {
        let m = DomainMesh::new(Domain::UnitDisk, 10, Some(InterfaceGraph::flat())).unwrap();
        for &(a, b) in m.edges() {
            assert_ne!(m.nodes()[a].color(), m.nodes()[b].color());
        }
    }
}

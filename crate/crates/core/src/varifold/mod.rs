//! Discrete m-varifolds: finite sums of weighted (point, plane) atoms, built
//! from triangulations by uniform subdivision with barycenter quadrature.

pub mod field;
pub mod mesh;

use rayon::prelude::*;

use crate::boundary::BoundaryManifold;
use crate::error::{dim_mismatch, Error, Result};
use crate::geometry::{compensated_sum, frame_from_spanning, tangential_divergence, AmbientVector, MPlane};
pub use field::TestVectorField;
pub use mesh::{Triangle, TriangleMesh};

/// Deepest subdivision accepted by [`DiscreteVarifold::from_triangulation`].
pub const MAX_DEPTH: u32 = 10;

/// Relative tolerance of the tangency check in [`stationarity_defect`].
pub const TANGENCY_TOL: f64 = 1e-9;

const TANGENCY_SAMPLES: usize = 64;

/// One atom viewed in place.
#[derive(Debug, Clone, Copy)]
pub struct AtomRef<'a> {
    pub x: &'a [f64],
    pub plane: &'a MPlane,
    pub weight: f64,
}

/// Atom storage is flat: positions in one buffer, planes deduplicated in a
/// table and referenced by index.
#[derive(Debug, Clone)]
pub struct DiscreteVarifold {
    m: usize,
    ambient_dim: usize,
    points: Vec<f64>,
    plane_of: Vec<u32>,
    planes: Vec<MPlane>,
    weights: Vec<f64>,
}

/// Optional truncation to a closed ball.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub center: AmbientVector,
    pub radius: f64,
}

impl DiscreteVarifold {
    pub fn empty(m: usize, ambient_dim: usize) -> Self {
        Self {
            m,
            ambient_dim,
            points: Vec::new(),
            plane_of: Vec::new(),
            planes: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// From explicit atoms (any m).
    pub fn from_atoms(atoms: Vec<(AmbientVector, MPlane, f64)>) -> Result<Self> {
        let (m, dim) = atoms
            .first()
            .map(|(x, p, _)| (p.dim(), x.dim()))
            .ok_or_else(|| Error::InvalidInput("no atoms".into()))?;
        let mut v = Self::empty(m, dim);
        for (x, plane, w) in atoms {
            v.push_atom(&x, plane, w)?;
        }
        Ok(v)
    }

    /// Appends one atom with its own plane entry.
    pub fn push_atom(&mut self, x: &AmbientVector, plane: MPlane, weight: f64) -> Result<()> {
        if x.dim() != self.ambient_dim {
            return Err(dim_mismatch(self.ambient_dim, x.dim()));
        }
        if plane.ambient_dim() != self.ambient_dim || plane.dim() != self.m {
            return Err(Error::InvalidInput(format!(
                "atom plane is a {}-plane in R^{}, varifold expects a {}-plane in R^{}",
                plane.dim(),
                plane.ambient_dim(),
                self.m,
                self.ambient_dim
            )));
        }
        if !(weight >= 0.0) || !weight.is_finite() || !x.is_finite() {
            return Err(Error::InvalidInput(format!("bad atom (weight {weight})")));
        }
        self.planes.push(plane);
        self.plane_of.push((self.planes.len() - 1) as u32);
        self.points.extend_from_slice(x.as_slice());
        self.weights.push(weight);
        Ok(())
    }

    /// Subdivides every triangle 4-way `depth` times and puts one atom at
    /// the barycenter of each sub-triangle, weighted by its area times the
    /// multiplicity. With a truncation, atoms outside the ball are dropped.
    pub fn from_triangulation(
        mesh: &TriangleMesh,
        depth: u32,
        truncation: Option<&Truncation>,
    ) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::InvalidConfig(format!(
                "subdivision depth {depth} exceeds the maximum {MAX_DEPTH}"
            )));
        }
        let dim = mesh.ambient_dim();
        if let Some(t) = truncation {
            if t.center.dim() != dim {
                return Err(dim_mismatch(dim, t.center.dim()));
            }
            if !(t.radius > 0.0) {
                return Err(Error::InvalidConfig("truncation radius must be positive".into()));
            }
        }
        let pieces: Vec<Piece> = mesh
            .triangles()
            .par_iter()
            .enumerate()
            .map(|(k, tri)| subdivide(k, tri, depth, truncation))
            .collect::<Result<Vec<_>>>()?;

        let mut v = Self::empty(2, dim);
        for piece in pieces.into_iter().flatten() {
            let (plane, points, weights) = piece;
            v.planes.push(plane);
            let index = (v.planes.len() - 1) as u32;
            v.plane_of.extend(std::iter::repeat_n(index, weights.len()));
            v.points.extend(points);
            v.weights.extend(weights);
        }
        Ok(v)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> AtomRef<'_> {
        let d = self.ambient_dim;
        AtomRef {
            x: &self.points[i * d..(i + 1) * d],
            plane: &self.planes[self.plane_of[i] as usize],
            weight: self.weights[i],
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.atom(i))
    }

    /// Parallel iterator over the atoms in index order.
    pub fn par_atoms(&self) -> impl IndexedParallelIterator<Item = AtomRef<'_>> + '_ {
        (0..self.len()).into_par_iter().map(move |i| self.atom(i))
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// ‖V‖(region): the total weight of atoms whose point satisfies `region`.
    pub fn mass(&self, region: impl Fn(&[f64]) -> bool + Sync) -> f64 {
        compensated_sum(self.atoms().filter(|a| region(a.x)).map(|a| a.weight))
    }

    /// Image under x ↦ λx (weights scale by λ^m).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {lambda}")));
        }
        let mut v = self.clone();
        v.points.iter_mut().for_each(|c| *c *= lambda);
        let factor = lambda.powi(self.m as i32);
        v.weights.iter_mut().for_each(|w| *w *= factor);
        Ok(v)
    }

    /// Sum of two varifolds in the same ambient space.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.m != other.m || self.ambient_dim != other.ambient_dim {
            return Err(Error::InvalidInput("varifolds of different dimensions".into()));
        }
        let mut v = self.clone();
        let offset = v.planes.len() as u32;
        v.planes.extend(other.planes.iter().cloned());
        v.plane_of.extend(other.plane_of.iter().map(|p| p + offset));
        v.points.extend_from_slice(&other.points);
        v.weights.extend_from_slice(&other.weights);
        Ok(v)
    }
}

type Piece = Option<(MPlane, Vec<f64>, Vec<f64>)>;

fn subdivide(k: usize, tri: &Triangle, depth: u32, truncation: Option<&Truncation>) -> Result<Piece> {
    let area = tri.area();
    if !(area >= mesh::MIN_TRIANGLE_AREA) {
        return Err(Error::Degenerate(format!(
            "triangle {k} has area {area:.3e} below {:.0e}",
            mesh::MIN_TRIANGLE_AREA
        )));
    }
    let [a, b, c] = &tri.vertices;
    let u = b - a;
    let v = c - a;
    let plane = frame_from_spanning(&[u.clone(), v.clone()])
        .map_err(|e| Error::Degenerate(format!("triangle {k}: {e}")))?;
    let n = 1usize << depth;
    let weight = area * tri.multiplicity as f64 / (n * n) as f64;
    let inv = 1.0 / n as f64;
    let dim = a.dim();
    let mut points = Vec::with_capacity(n * n * dim);
    let mut weights = Vec::with_capacity(n * n);
    let mut emit = |su: f64, sv: f64| {
        let start = points.len();
        for i in 0..dim {
            points.push(a[i] + su * inv * u[i] + sv * inv * v[i]);
        }
        if let Some(t) = truncation {
            let r2: f64 = (0..dim).map(|i| (points[start + i] - t.center[i]).powi(2)).sum();
            if r2 > t.radius * t.radius {
                points.truncate(start);
                return;
            }
        }
        weights.push(weight);
    };
    // sub-triangles on the barycentric lattice of step 1/n
    for i in 0..n {
        for j in 0..n - i {
            emit(i as f64 + 1.0 / 3.0, j as f64 + 1.0 / 3.0);
            if i + j + 1 < n {
                emit(i as f64 + 2.0 / 3.0, j as f64 + 2.0 / 3.0);
            }
        }
    }
    if weights.is_empty() {
        return Ok(None);
    }
    Ok(Some((plane, points, weights)))
}

/// δV(χ) = Σ weight · div_π χ(x)
pub fn first_variation(v: &DiscreteVarifold, field: &TestVectorField) -> Result<f64> {
    if field.ambient_dim() != v.ambient_dim() {
        return Err(dim_mismatch(v.ambient_dim(), field.ambient_dim()));
    }
    let terms: Vec<f64> = v
        .par_atoms()
        .map(|a| {
            if !field.may_be_nonzero(a.x) {
                return Ok(0.0);
            }
            let jac = field.jacobian_at(a.x);
            Ok(a.weight * tangential_divergence(&jac, a.plane)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms))
}

/// max over the family of |δV(χ)| / (sup|χ| + sup‖Dχ‖), the suprema taken
/// over the atoms. With a boundary manifold, each field is first checked to
/// be tangent to Γ at sampled points of Γ inside its support.
pub fn stationarity_defect(
    v: &DiscreteVarifold,
    family: &[TestVectorField],
    gamma: Option<&BoundaryManifold>,
    seed: u64,
) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    if family.is_empty() {
        return Err(Error::InvalidFamily("empty field family".into()));
    }
    let mut worst: f64 = 0.0;
    for (k, field) in family.iter().enumerate() {
        if let Some(gamma) = gamma {
            let defect = field.tangency_defect(gamma, &mut rng, TANGENCY_SAMPLES)?;
            let scale = field.sup_norm_sampled(v).max(1e-300);
            if defect > TANGENCY_TOL * scale {
                return Err(Error::InvalidFamily(format!(
                    "field {k} is not tangent to the boundary (normal component {defect:.3e})"
                )));
            }
        }
        let (sup, sup_jac) = field.sup_norms_on(v);
        let denom = sup + sup_jac;
        if !(denom > 0.0) {
            continue;
        }
        worst = worst.max(first_variation(v, field)?.abs() / denom);
    }
    Ok(worst)
}

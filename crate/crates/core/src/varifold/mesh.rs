//! Triangle meshes with integer multiplicity, a plain-text soup format and
//! a handful of generators. Planar generators build the mesh in 2D
//! coordinates and embed it with [`TriangleMesh::embed`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{dim_mismatch, Error, Result};
use crate::geometry::AmbientVector;

/// Smallest triangle area accepted by the varifold constructor.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    pub vertices: [AmbientVector; 3],
    pub multiplicity: u32,
}

impl Triangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = &self.vertices;
        let u = b - a;
        let v = c - a;
        // |u ∧ v| = sqrt(|u|²|v|² − ⟨u,v⟩²)
        let uv = u.dot(&v);
        0.5 * (u.norm_sq() * v.norm_sq() - uv * uv).max(0.0).sqrt()
    }
}

/// A triangle soup in R^`ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    ambient_dim: usize,
    triangles: Vec<Triangle>,
}

impl TriangleMesh {
    pub fn new(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            triangles: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn push(&mut self, vertices: [AmbientVector; 3], multiplicity: u32) -> Result<()> {
        for v in &vertices {
            if v.dim() != self.ambient_dim {
                return Err(dim_mismatch(self.ambient_dim, v.dim()));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput("non-finite vertex".into()));
            }
        }
        if multiplicity == 0 {
            return Err(Error::InvalidInput("multiplicity must be positive".into()));
        }
        self.triangles.push(Triangle {
            vertices,
            multiplicity,
        });
        Ok(())
    }

    /// Appends all triangles of `other`.
    pub fn extend(&mut self, other: TriangleMesh) -> Result<()> {
        if other.ambient_dim != self.ambient_dim {
            return Err(dim_mismatch(self.ambient_dim, other.ambient_dim));
        }
        self.triangles.extend(other.triangles);
        Ok(())
    }

    /// Σ area × multiplicity
    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| t.area() * t.multiplicity as f64)
            .sum()
    }

    pub fn with_multiplicity(mut self, multiplicity: u32) -> Self {
        for t in &mut self.triangles {
            t.multiplicity = multiplicity;
        }
        self
    }

    /// Applies an arbitrary vertex map (which must preserve the dimension).
    pub fn map_vertices(mut self, f: impl Fn(&AmbientVector) -> AmbientVector) -> Result<Self> {
        for t in &mut self.triangles {
            for v in &mut t.vertices {
                let w = f(v);
                if w.dim() != self.ambient_dim {
                    return Err(dim_mismatch(self.ambient_dim, w.dim()));
                }
                *v = w;
            }
        }
        Ok(self)
    }

    pub fn translate(self, offset: &AmbientVector) -> Result<Self> {
        if offset.dim() != self.ambient_dim {
            return Err(dim_mismatch(self.ambient_dim, offset.dim()));
        }
        self.map_vertices(|v| v + offset)
    }

    /// Embeds a planar mesh into R^dim: (u, v) ↦ origin + u·e1 + v·e2.
    pub fn embed(
        &self,
        origin: &AmbientVector,
        e1: &AmbientVector,
        e2: &AmbientVector,
    ) -> Result<TriangleMesh> {
        if self.ambient_dim != 2 {
            return Err(Error::InvalidInput(format!(
                "only planar meshes can be embedded, this one lives in R^{}",
                self.ambient_dim
            )));
        }
        let dim = origin.dim();
        if e1.dim() != dim || e2.dim() != dim {
            return Err(dim_mismatch(dim, e1.dim().max(e2.dim())));
        }
        let mut out = TriangleMesh::new(dim);
        for t in &self.triangles {
            let v = t
                .vertices
                .clone()
                .map(|p| origin.axpy(p[0], e1).axpy(p[1], e2));
            out.push(v, t.multiplicity)?;
        }
        Ok(out)
    }

    /// The planar mesh placed in the x1x2-plane of R^dim.
    pub fn embed_coordinate(&self, dim: usize) -> Result<TriangleMesh> {
        if dim < 2 {
            return Err(Error::InvalidInput("ambient dimension must be at least 2".into()));
        }
        self.embed(
            &AmbientVector::zeros(dim),
            &AmbientVector::basis(dim, 0),
            &AmbientVector::basis(dim, 1),
        )
    }

    /// Parses the soup format: one triangle per line, 3·dim coordinates
    /// followed by a positive integer multiplicity. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse_soup(text: &str) -> Result<Self> {
        let mut mesh: Option<TriangleMesh> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: String| Error::InvalidInput(format!("line {}: {msg}", lineno + 1));
            if fields.len() < 4 || !(fields.len() - 1).is_multiple_of(3) {
                return Err(bad(format!(
                    "expected 3·dim coordinates and a multiplicity, found {} fields",
                    fields.len()
                )));
            }
            let dim = (fields.len() - 1) / 3;
            let mesh = mesh.get_or_insert_with(|| TriangleMesh::new(dim));
            if dim != mesh.ambient_dim {
                return Err(bad(format!(
                    "triangle in R^{dim} but earlier triangles live in R^{}",
                    mesh.ambient_dim
                )));
            }
            let coords = fields[..3 * dim]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| bad(format!("`{f}` is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let last = fields[3 * dim];
            let multiplicity: u32 = last
                .parse()
                .map_err(|_| bad(format!("multiplicity `{last}` is not a positive integer")))?;
            let vertex = |k: usize| AmbientVector::from_slice(&coords[k * dim..(k + 1) * dim]);
            mesh.push([vertex(0), vertex(1), vertex(2)], multiplicity)
                .map_err(|e| bad(e.to_string()))?;
        }
        mesh.ok_or_else(|| Error::InvalidInput("triangle soup contains no triangles".into()))
    }

    pub fn read_soup(path: &Path) -> Result<Self> {
        Self::parse_soup(&std::fs::read_to_string(path)?)
    }

    pub fn to_soup(&self) -> String {
        let mut out = String::new();
        for t in &self.triangles {
            for v in &t.vertices {
                for c in v.as_slice() {
                    let _ = write!(out, "{c:e} ");
                }
            }
            let _ = writeln!(out, "{}", t.multiplicity);
        }
        out
    }
}

fn p2(x: f64, y: f64) -> AmbientVector {
    AmbientVector::new(vec![x, y])
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Structured mesh of [x0,x1]×[y0,y1] with nx × ny cells, every cell cut
/// along the same diagonal (so all triangles are translates of two shapes).
pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<TriangleMesh> {
    check_positive("rectangle width", x1 - x0)?;
    check_positive("rectangle height", y1 - y0)?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidConfig("rectangle needs at least one cell per side".into()));
    }
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let mut mesh = TriangleMesh::new(2);
    for i in 0..nx {
        for j in 0..ny {
            let xa = x0 + i as f64 * hx;
            let ya = y0 + j as f64 * hy;
            let (xb, yb) = (xa + hx, ya + hy);
            mesh.push([p2(xa, ya), p2(xb, ya), p2(xa, yb)], 1)?;
            mesh.push([p2(xb, ya), p2(xb, yb), p2(xa, yb)], 1)?;
        }
    }
    Ok(mesh)
}

/// Equilateral lattice triangles of side `h` whose vertices all lie in the
/// closed disk of the given radius about the origin. Refining keeps every
/// sub-triangle on one global lattice.
pub fn lattice_disk(radius: f64, h: f64) -> Result<TriangleMesh> {
    check_positive("disk radius", radius)?;
    check_positive("lattice spacing", h)?;
    let row = h * 3f64.sqrt() / 2.0;
    let n = (radius / row).ceil() as i64 + 1;
    let node = |i: i64, j: i64| p2((i as f64 + 0.5 * j as f64) * h, j as f64 * row);
    let inside = |p: &AmbientVector| p.norm() <= radius * (1.0 + 1e-12);
    let mut mesh = TriangleMesh::new(2);
    let reach = 2 * n + 2;
    for j in -n..=n {
        for i in -reach..=reach {
            let up = [node(i, j), node(i + 1, j), node(i, j + 1)];
            if up.iter().all(inside) {
                mesh.push(up, 1)?;
            }
            let down = [node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)];
            if down.iter().all(inside) {
                mesh.push(down, 1)?;
            }
        }
    }
    if mesh.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "lattice spacing {h} is too coarse for a disk of radius {radius}"
        )));
    }
    Ok(mesh)
}

/// Polar grid on {r0 ≤ r ≤ r1, θ0 ≤ θ ≤ θ1} with nr × nθ cells. Vertices sit
/// exactly on the arcs r = const; when r0 = 0 the innermost cells are fans.
pub fn polar_patch(
    r0: f64,
    r1: f64,
    theta0: f64,
    theta1: f64,
    nr: usize,
    ntheta: usize,
) -> Result<TriangleMesh> {
    if !(r0 >= 0.0) {
        return Err(Error::InvalidConfig(format!("inner radius must be >= 0, got {r0}")));
    }
    check_positive("radial extent", r1 - r0)?;
    check_positive("angular extent", theta1 - theta0)?;
    if theta1 - theta0 > 2.0 * PI + 1e-12 {
        return Err(Error::InvalidConfig("angular extent exceeds a full turn".into()));
    }
    if nr == 0 || ntheta == 0 {
        return Err(Error::InvalidConfig("polar patch needs at least one cell per direction".into()));
    }
    let point = |i: usize, j: usize| {
        let r = r0 + (r1 - r0) * i as f64 / nr as f64;
        // close full turns exactly
        let th = if j == ntheta && (theta1 - theta0 - 2.0 * PI).abs() < 1e-12 {
            theta0
        } else {
            theta0 + (theta1 - theta0) * j as f64 / ntheta as f64
        };
        p2(r * th.cos(), r * th.sin())
    };
    let mut mesh = TriangleMesh::new(2);
    for i in 0..nr {
        for j in 0..ntheta {
            if i == 0 && r0 == 0.0 {
                mesh.push([p2(0.0, 0.0), point(1, j), point(1, j + 1)], 1)?;
                continue;
            }
            mesh.push([point(i, j), point(i + 1, j), point(i + 1, j + 1)], 1)?;
            mesh.push([point(i, j), point(i + 1, j + 1), point(i, j + 1)], 1)?;
        }
    }
    Ok(mesh)
}

/// Annulus r_in ≤ r ≤ r_out meshed by concentric rings of width ≈ h, the
/// number of points per ring growing with the radius.
pub fn annulus(r_in: f64, r_out: f64, h: f64) -> Result<TriangleMesh> {
    if !(r_in >= 0.0) {
        return Err(Error::InvalidConfig(format!("inner radius must be >= 0, got {r_in}")));
    }
    check_positive("annulus width", r_out - r_in)?;
    check_positive("mesh size", h)?;
    let rings = ((r_out - r_in) / h).ceil().max(1.0) as usize;
    let radius = |k: usize| r_in + (r_out - r_in) * k as f64 / rings as f64;
    let count = |r: f64| ((2.0 * PI * r / h).ceil() as usize).max(6);
    let ring = |k: usize| -> Vec<AmbientVector> {
        let r = radius(k);
        let n = count(r);
        (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                p2(r * th.cos(), r * th.sin())
            })
            .collect()
    };
    let mut mesh = TriangleMesh::new(2);
    let mut inner = if r_in == 0.0 { None } else { Some(ring(0)) };
    for k in 1..=rings {
        let outer = ring(k);
        match &inner {
            None => {
                let c = p2(0.0, 0.0);
                for j in 0..outer.len() {
                    let next = &outer[(j + 1) % outer.len()];
                    mesh.push([c.clone(), outer[j].clone(), next.clone()], 1)?;
                }
            }
            Some(inner) => stitch(&mut mesh, inner, &outer)?,
        }
        inner = Some(outer);
    }
    Ok(mesh)
}

/// Full disk as concentric rings; the boundary polygon is inscribed.
pub fn disk(radius: f64, h: f64) -> Result<TriangleMesh> {
    annulus(0.0, radius, h)
}

/// Triangulates the strip between two closed rings by advancing along
/// whichever ring is angularly behind.
fn stitch(mesh: &mut TriangleMesh, inner: &[AmbientVector], outer: &[AmbientVector]) -> Result<()> {
    let (ni, no) = (inner.len(), outer.len());
    let (mut i, mut o) = (0usize, 0usize);
    while i < ni || o < no {
        let advance_inner = if i == ni {
            false
        } else if o == no {
            true
        } else {
            (i + 1) as f64 / ni as f64 <= (o + 1) as f64 / no as f64
        };
        let a = inner[i % ni].clone();
        let b = outer[o % no].clone();
        if advance_inner {
            mesh.push([a, b, inner[(i + 1) % ni].clone()], 1)?;
            i += 1;
        } else {
            mesh.push([a, b, outer[(o + 1) % no].clone()], 1)?;
            o += 1;
        }
    }
    Ok(())
}

/// Half-plane patch {origin + a·edge + b·inward : |a| ≤ half_length, 0 ≤ b ≤ width},
/// structured with cells of size ≈ h.
pub fn half_plane_patch(
    origin: &AmbientVector,
    edge: &AmbientVector,
    inward: &AmbientVector,
    half_length: f64,
    width: f64,
    h: f64,
) -> Result<TriangleMesh> {
    check_positive("mesh size", h)?;
    let nx = ((2.0 * half_length) / h).ceil().max(1.0) as usize;
    let ny = (width / h).ceil().max(1.0) as usize;
    rectangle(-half_length, half_length, 0.0, width, nx, ny)?.embed(origin, edge, inward)
}

/// Cone over a closed polyline: for each segment [c_i, c_{i+1}] the planar
/// sector 0, R·c_i, R·c_{i+1}, cut into `radial` trapezoids by the levels
/// R·k/radial.
pub fn cone_over_polyline(points: &[AmbientVector], radius: f64, radial: usize) -> Result<TriangleMesh> {
    check_positive("cone radius", radius)?;
    let dim = points
        .first()
        .map(AmbientVector::dim)
        .ok_or_else(|| Error::InvalidInput("empty polyline".into()))?;
    if points.len() < 2 || radial == 0 {
        return Err(Error::InvalidConfig(
            "cone needs at least two polyline points and one radial level".into(),
        ));
    }
    let mut mesh = TriangleMesh::new(dim);
    let zero = AmbientVector::zeros(dim);
    for w in 0..points.len() {
        let a = &points[w];
        let b = &points[(w + 1) % points.len()];
        if points.len() == 2 && w == 1 {
            break;
        }
        let level = |k: usize, p: &AmbientVector| p.scale(radius * k as f64 / radial as f64);
        mesh.push([zero.clone(), level(1, a), level(1, b)], 1)?;
        for k in 1..radial {
            mesh.push([level(k, a), level(k + 1, a), level(k + 1, b)], 1)?;
            mesh.push([level(k, a), level(k + 1, b), level(k, b)], 1)?;
        }
    }
    Ok(mesh)
}

/// Two half-planes sharing the x1-axis as edge in R^dim (dim ≥ 3): the
/// first spanned by e1 and e2, the second by e1 and cos(θ)e2 + sin(θ)e3.
pub fn two_half_plane_cone(
    dim: usize,
    opening: f64,
    half_length: f64,
    width: f64,
    h: f64,
) -> Result<TriangleMesh> {
    if dim < 3 {
        return Err(Error::InvalidConfig("the two-half-plane cone needs dim >= 3".into()));
    }
    if !(opening > 0.0 && opening < 2.0 * PI) {
        return Err(Error::InvalidConfig(format!(
            "opening angle must lie in (0, 2π), got {opening}"
        )));
    }
    let zero = AmbientVector::zeros(dim);
    let e1 = AmbientVector::basis(dim, 0);
    let e2 = AmbientVector::basis(dim, 1);
    let e3 = AmbientVector::basis(dim, 2);
    let other = e2.scale(opening.cos()).axpy(opening.sin(), &e3);
    let mut mesh = half_plane_patch(&zero, &e1, &e2, half_length, width, h)?;
    mesh.extend(half_plane_patch(&zero, &e1, &other, half_length, width, h)?)?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_area() {
        let m = rectangle(0.0, 2.0, -1.0, 0.5, 7, 3).unwrap();
        assert_eq!(m.len(), 42);
        assert!((m.total_area() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn ring_disk_area_converges() {
        let m = disk(1.0, 0.02).unwrap();
        assert!((m.total_area() - PI).abs() / PI < 1e-3);
        let a = annulus(1.0, 2.0, 0.02).unwrap();
        assert!((a.total_area() - 3.0 * PI).abs() / (3.0 * PI) < 1e-3);
    }

    #[test]
    fn polar_patch_full_turn_closes() {
        let m = polar_patch(0.0, 1.0, 0.0, 2.0 * PI, 10, 400).unwrap();
        let n = 400.0;
        let inscribed = 0.5 * n * (2.0 * PI / n).sin();
        assert!((m.total_area() - inscribed).abs() < 1e-12);
    }

    #[test]
    fn lattice_disk_inside_and_dense() {
        let m = lattice_disk(1.0, 0.05).unwrap();
        for t in m.triangles() {
            assert!(t.vertices.iter().all(|v| v.norm() <= 1.0 + 1e-9));
        }
        assert!(m.total_area() > 0.9 * PI);
    }

    #[test]
    fn soup_round_trip() {
        let m = rectangle(0.0, 1.0, 0.0, 1.0, 2, 2)
            .unwrap()
            .embed_coordinate(3)
            .unwrap()
            .with_multiplicity(2);
        let back = TriangleMesh::parse_soup(&m.to_soup()).unwrap();
        assert_eq!(back.len(), m.len());
        assert!((back.total_area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn soup_errors_name_the_line() {
        let text = "# header\n0 0 0 1 0 0 0 1 0 1\n0 0 0 1 0 0 0 1 x 1\n";
        let err = TriangleMesh::parse_soup(text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = TriangleMesh::parse_soup("0 0 1 0 0 1 0\n").unwrap_err().to_string();
        assert!(err.contains("multiplicity"), "{err}");
        assert!(TriangleMesh::parse_soup("\n# nothing\n").is_err());
    }

    #[test]
    fn cone_levels_are_exact() {
        let dim = 3;
        let pts: Vec<AmbientVector> = (0..5)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 5.0;
                AmbientVector::new(vec![t.cos(), t.sin(), 0.3]).normalized().unwrap()
            })
            .collect();
        let m = cone_over_polyline(&pts, 1.0, 4).unwrap();
        assert_eq!(m.ambient_dim(), dim);
        assert_eq!(m.len(), 5 * 7);
    }
}

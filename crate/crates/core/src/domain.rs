//! Bounded domains as simplicial meshes: 1D interval partitions and 2D
//! triangulations, with geometry quantities, generators, and a text format.

use std::path::Path;

use crate::error::{Error, Result};
use crate::specfun::FractionalOrder;

/// Planar point; 1D meshes use the x-coordinate only.
pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Simplicial partition of the domain: interval elements in 1D, triangles in 2D.
///
/// Immutable after construction; the full invariant set (positive element
/// measures, valid indices, connected union, manifold adjacency) is validated
/// by every constructor, including the text-format loader.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    // dim+1 valid entries per element; the unused 1D slot mirrors index 0.
    elements: Vec<[usize; 3]>,
    diameter: f64,
    measure: f64,
    fingerprint: u64,
}

impl Mesh {
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<[usize; 3]>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut mesh = Mesh {
            dim,
            vertices,
            elements,
            diameter: 0.0,
            measure: 0.0,
            fingerprint: 0,
        };
        mesh.validate()?;
        mesh.diameter = mesh.compute_diameter();
        mesh.measure = (0..mesh.elements.len()).map(|e| mesh.element_measure(e)).sum();
        mesh.fingerprint = mesh.compute_fingerprint();
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Global vertex indices of element `e` (2 in 1D, 3 in 2D).
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim + 1]
    }

    /// Diameter `d_Ω`, the maximum pairwise vertex distance (exact for
    /// polytopal meshes).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Lebesgue measure `|Ω|`, the sum of element measures.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Stable 64-bit content hash over dimension, coordinates, and
    /// connectivity; used to pair functions and matrices with their mesh.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn element_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        match self.dim {
            1 => (self.vertices[el[1]][0] - self.vertices[el[0]][0]).abs(),
            _ => {
                let [a, b, c] = [self.vertices[el[0]], self.vertices[el[1]], self.vertices[el[2]]];
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
            }
        }
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        let el = self.element(e);
        let mut d: f64 = 0.0;
        for i in 0..el.len() {
            for j in i + 1..el.len() {
                d = d.max(dist(self.vertices[el[i]], self.vertices[el[j]]));
            }
        }
        d
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        let el = self.element(e);
        let k = el.len() as f64;
        let mut c = [0.0, 0.0];
        for &v in el {
            c[0] += self.vertices[v][0] / k;
            c[1] += self.vertices[v][1] / k;
        }
        c
    }

    /// Global vertex indices shared by elements `a` and `b`.
    pub fn shared_vertices(&self, a: usize, b: usize) -> Vec<usize> {
        self.element(a)
            .iter()
            .filter(|v| self.element(b).contains(v))
            .copied()
            .collect()
    }

    /// Integral of the nodal basis function `φ_i` (a row sum of the exact P1
    /// mass matrix).
    pub fn basis_integral(&self, i: usize) -> f64 {
        let mut w = 0.0;
        for e in 0..self.num_elements() {
            if self.element(e).contains(&i) {
                w += self.element_measure(e) / (self.dim as f64 + 1.0);
            }
        }
        w
    }

    /// All basis integrals at once.
    pub fn basis_integrals(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.num_vertices()];
        for e in 0..self.num_elements() {
            let share = self.element_measure(e) / (self.dim as f64 + 1.0);
            for &v in self.element(e) {
                w[v] += share;
            }
        }
        w
    }

    fn compute_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                d = d.max(dist(self.vertices[i], self.vertices[j]));
            }
        }
        d
    }

    fn validate(&self) -> Result<()> {
        if self.vertices.len() < self.dim + 1 {
            return Err(Error::MeshInvariant("too few vertices".into()));
        }
        if self.elements.is_empty() {
            return Err(Error::MeshInvariant("mesh has no elements".into()));
        }
        for (e, el) in self.elements.iter().enumerate() {
            for &v in &el[..self.dim + 1] {
                if v >= self.vertices.len() {
                    return Err(Error::MeshInvariant(format!(
                        "element {e} references vertex {v} out of range"
                    )));
                }
            }
        }
        // Non-degeneracy: strictly positive length/area.
        for e in 0..self.elements.len() {
            let m = self.element_measure(e);
            let scale = self.element_diameter(e).max(f64::MIN_POSITIVE);
            if !(m > 1e-12 * scale.powi(self.dim as i32)) {
                return Err(Error::DegenerateElement {
                    index: e,
                    msg: format!("measure {m:e} is not positive"),
                });
            }
        }
        match self.dim {
            1 => self.validate_1d(),
            _ => self.validate_2d(),
        }?;
        self.validate_connected()
    }

    fn validate_1d(&self) -> Result<()> {
        // Sorted by left endpoint, consecutive elements must tile without
        // overlap: each right endpoint coincides with the next left endpoint.
        let mut spans: Vec<(f64, f64, usize)> = (0..self.elements.len())
            .map(|e| {
                let el = self.element(e);
                let (a, b) = (self.vertices[el[0]][0], self.vertices[el[1]][0]);
                (a.min(b), a.max(b), e)
            })
            .collect();
        spans.sort_by(|p, q| p.0.total_cmp(&q.0));
        for w in spans.windows(2) {
            if w[1].0 < w[0].1 - 1e-12 * self.compute_diameter() {
                return Err(Error::MeshInvariant(format!(
                    "elements {} and {} overlap",
                    w[0].2, w[1].2
                )));
            }
        }
        Ok(())
    }

    fn validate_2d(&self) -> Result<()> {
        // Manifold criterion: every undirected edge belongs to at most two
        // triangles, and no triangle repeats a vertex.
        use std::collections::HashMap;
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, _) in self.elements.iter().enumerate() {
            let el = self.element(e);
            if el[0] == el[1] || el[1] == el[2] || el[0] == el[2] {
                return Err(Error::DegenerateElement {
                    index: e,
                    msg: "repeated vertex".into(),
                });
            }
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                let key = (el[i].min(el[j]), el[i].max(el[j]));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        if let Some((edge, n)) = edge_count.iter().find(|(_, &n)| n > 2) {
            return Err(Error::MeshInvariant(format!(
                "edge {:?} shared by {n} triangles",
                edge
            )));
        }
        Ok(())
    }

    fn validate_connected(&self) -> Result<()> {
        // BFS over shared-vertex adjacency.
        let nv = self.vertices.len();
        let mut vertex_elems: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for e in 0..self.elements.len() {
            for &v in self.element(e) {
                vertex_elems[v].push(e);
            }
        }
        let mut seen = vec![false; self.elements.len()];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(e) = queue.pop() {
            for &v in self.element(e) {
                for &f in &vertex_elems[v] {
                    if !seen[f] {
                        seen[f] = true;
                        queue.push(f);
                    }
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::MeshInvariant("element union is not connected".into()))
        }
    }

    fn compute_fingerprint(&self) -> u64 {
        // FNV-1a, stable across platforms.
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(&(self.dim as u64).to_le_bytes());
        eat(&(self.vertices.len() as u64).to_le_bytes());
        for v in &self.vertices {
            eat(&v[0].to_le_bytes());
            eat(&v[1].to_le_bytes());
        }
        for e in 0..self.elements.len() {
            for &v in self.element(e) {
                eat(&(v as u64).to_le_bytes());
            }
        }
        h
    }

    /// Serialize in the `fraclap-mesh v1` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("fraclap-mesh v1 dim={}\n", self.dim);
        out.push_str(&format!("vertices {}\n", self.vertices.len()));
        for v in &self.vertices {
            if self.dim == 1 {
                out.push_str(&format!("{}\n", v[0]));
            } else {
                out.push_str(&format!("{} {}\n", v[0], v[1]));
            }
        }
        out.push_str(&format!("elements {}\n", self.elements.len()));
        for e in 0..self.elements.len() {
            let idx: Vec<String> = self.element(e).iter().map(|i| i.to_string()).collect();
            out.push_str(&idx.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Uniform partition of `(a, b)` into `n` elements.
pub fn generate_interval(n: usize, a: f64, b: f64) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "interval mesh needs n >= 2, got {n}"
        )));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "interval bounds must satisfy a < b, got a={a}, b={b}"
        )));
    }
    let vertices: Vec<Point> = (0..=n)
        .map(|i| [a + (b - a) * i as f64 / n as f64, 0.0])
        .collect();
    let elements: Vec<[usize; 3]> = (0..n).map(|i| [i, i + 1, i]).collect();
    Mesh::new(1, vertices, elements)
}

/// Structured triangulation of the unit square with `2n²` triangles.
///
/// Cells alternate their split diagonal in a checkerboard pattern, which
/// keeps the mesh symmetric under the coordinate swap for every `n` and
/// under quarter turns for even `n`. The rotation symmetry matters: it makes
/// the discrete eigenvalue pairs of the square exactly degenerate, matching
/// the continuum multiplicity instead of splitting them at mesh order.
pub fn generate_square(n: usize) -> Result<Mesh> {
    if n < 1 {
        return Err(Error::InvalidArgument("square mesh needs n >= 1".into()));
    }
    let m = n + 1;
    let vertices: Vec<Point> = (0..m * m)
        .map(|k| [(k % m) as f64 / n as f64, (k / m) as f64 / n as f64])
        .collect();
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * m + i;
            let v10 = v00 + 1;
            let v01 = v00 + m;
            let v11 = v01 + 1;
            if (i + j) % 2 == 0 {
                elements.push([v00, v10, v11]);
                elements.push([v00, v11, v01]);
            } else {
                elements.push([v00, v10, v01]);
                elements.push([v10, v11, v01]);
            }
        }
    }
    Mesh::new(2, vertices, elements)
}

/// Fan triangulation of the inscribed regular `n`-gon approximating the unit
/// disc (`~n` boundary segments).
pub fn generate_disc(n: usize) -> Result<Mesh> {
    if n < 3 {
        return Err(Error::InvalidArgument("disc mesh needs n >= 3".into()));
    }
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    for k in 0..n {
        let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        vertices.push([t.cos(), t.sin()]);
    }
    let elements: Vec<[usize; 3]> = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
    Mesh::new(2, vertices, elements)
}

/// Parse the `fraclap-mesh v1` text format. `#` starts a comment.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines
        .next()
        .ok_or(Error::MeshParse { line: 1, msg: "empty file".into() })?;
    let dim = header
        .strip_prefix("fraclap-mesh v1 dim=")
        .and_then(|d| d.parse::<usize>().ok())
        .ok_or_else(|| Error::MeshParse {
            line,
            msg: format!("expected `fraclap-mesh v1 dim=<1|2>`, got `{header}`"),
        })?;
    if dim != 1 && dim != 2 {
        return Err(Error::MeshParse { line, msg: format!("unsupported dim {dim}") });
    }

    let expect_count = |tok: &str, (line, l): (usize, &str)| -> Result<usize> {
        let rest = l.strip_prefix(tok).ok_or_else(|| Error::MeshParse {
            line,
            msg: format!("expected `{tok} <count>`, got `{l}`"),
        })?;
        rest.trim().parse::<usize>().map_err(|_| Error::MeshParse {
            line,
            msg: format!("bad count in `{l}`"),
        })
    };

    let nv = expect_count(
        "vertices",
        lines.next().ok_or(Error::MeshParse { line, msg: "missing vertex section".into() })?,
    )?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or(Error::MeshParse {
            line: 0,
            msg: "unexpected end of file in vertex list".into(),
        })?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::MeshParse {
                    line,
                    msg: format!("bad coordinate `{t}`"),
                })
            })
            .collect::<Result<_>>()?;
        if coords.len() != dim {
            return Err(Error::MeshParse {
                line,
                msg: format!("expected {dim} coordinates, got {}", coords.len()),
            });
        }
        vertices.push([coords[0], if dim == 2 { coords[1] } else { 0.0 }]);
    }

    let ne = expect_count(
        "elements",
        lines.next().ok_or(Error::MeshParse {
            line: 0,
            msg: "missing element section".into(),
        })?,
    )?;
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, l) = lines.next().ok_or(Error::MeshParse {
            line: 0,
            msg: "unexpected end of file in element list".into(),
        })?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::MeshParse {
                    line,
                    msg: format!("bad vertex index `{t}`"),
                })
            })
            .collect::<Result<_>>()?;
        if idx.len() != dim + 1 {
            return Err(Error::MeshParse {
                line,
                msg: format!("expected {} indices, got {}", dim + 1, idx.len()),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&v| v >= nv) {
            return Err(Error::MeshParse {
                line,
                msg: format!("vertex index {bad} out of range (0..{nv})"),
            });
        }
        elements.push(match dim {
            1 => [idx[0], idx[1], idx[0]],
            _ => [idx[0], idx[1], idx[2]],
        });
    }
    Mesh::new(dim, vertices, elements)
}

/// Load a mesh from a `fraclap-mesh v1` text file, recomputing geometry and
/// re-validating all invariants.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Fractional Poincaré constant `γ_{N,s,Ω} = |Ω|^{-1} d_Ω^{N+2s}`.
pub fn poincare_constant(mesh: &Mesh, s: FractionalOrder) -> f64 {
    mesh.diameter().powf(mesh.dim() as f64 + 2.0 * s.value()) / mesh.measure()
}

/// Coefficient vector over the continuous piecewise-linear nodal basis.
#[derive(Debug, Clone)]
pub struct DiscreteFunction {
    coeffs: Vec<f64>,
    mesh_fingerprint: u64,
    zero_mean: bool,
}

impl DiscreteFunction {
    pub fn from_coeffs(mesh: &Mesh, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector length {} != vertex count {}",
                coeffs.len(),
                mesh.num_vertices()
            )));
        }
        let mut f = DiscreteFunction {
            coeffs,
            mesh_fingerprint: mesh.fingerprint(),
            zero_mean: false,
        };
        f.zero_mean = f.mean_is_negligible(mesh);
        Ok(f)
    }

    /// Nodal interpolant of a pointwise function.
    pub fn interpolate<F: Fn(Point) -> f64>(mesh: &Mesh, f: F) -> Self {
        let coeffs = mesh.vertices().iter().map(|&v| f(v)).collect();
        Self::from_coeffs(mesh, coeffs).expect("length matches by construction")
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::from_coeffs(mesh, vec![0.0; mesh.num_vertices()]).unwrap()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        self.zero_mean = false;
        &mut self.coeffs
    }

    pub fn mesh_fingerprint(&self) -> u64 {
        self.mesh_fingerprint
    }

    /// True when the zero-mean certificate holds.
    pub fn zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// `∫_Ω u dx`, exact for the P1 interpolant (mass-weighted coefficient sum).
    pub fn integral(&self, mesh: &Mesh) -> f64 {
        mesh.basis_integrals()
            .iter()
            .zip(&self.coeffs)
            .map(|(w, c)| w * c)
            .sum()
    }

    fn mean_is_negligible(&self, mesh: &Mesh) -> bool {
        let max = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.integral(mesh).abs() <= 1e-12 * mesh.measure() * max.max(f64::MIN_POSITIVE)
    }

    /// Subtract the mean so `∫_Ω u dx = 0`; returns the removed mass.
    pub fn project_zero_mean(&mut self, mesh: &Mesh) -> f64 {
        let mass = self.integral(mesh);
        let mean = mass / mesh.measure();
        for c in &mut self.coeffs {
            *c -= mean;
        }
        self.zero_mean = true;
        mass
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_fingerprint == mesh.fingerprint() {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch {
                expected: mesh.fingerprint(),
                got: self.mesh_fingerprint,
            })
        }
    }
}

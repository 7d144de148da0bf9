//! Global matrix assembly for the nonlocal bilinear forms, the P1 mass
//! matrix, energies, and Gagliardo seminorms.
//!
//! Convention: assembled nonlocal matrices carry the raw double integrals
//! without any normalization constant. The energy
//! `E_s(u,v) = (C_{N,s}/2)·uᵀ A_s v` applies `C_{N,s}/2` at the call site, as
//! do the solver-layer uses of the log-weighted matrix; one matrix thereby
//! serves every constant placement.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::domain::{DiscreteFunction, Mesh};
use crate::error::{Error, Result};
use crate::quadrature::{pair_block, KernelSpec, KernelWeight};
use crate::specfun::{c_ns, FractionalOrder};
use crate::util::write_atomic;

/// Default per-pair quadrature tolerances (absolute, relative to pair scale).
pub fn default_tol(dim: usize) -> f64 {
    match dim {
        1 => 1e-9,
        _ => 1e-7,
    }
}

/// Symmetric matrix discretizing a nonlocal double-integral form, tagged with
/// its kernel and quadrature tolerance.
#[derive(Debug, Clone)]
pub struct NonlocalMatrix {
    kernel: KernelSpec,
    mat: DMatrix<f64>,
    quad_tol: f64,
    mesh_fingerprint: u64,
}

impl NonlocalMatrix {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn mesh_fingerprint(&self) -> u64 {
        self.mesh_fingerprint
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_plain(&self) -> bool {
        self.kernel.weight == KernelWeight::Plain
    }

    /// `uᵀ·A·v`.
    pub fn quad_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.mat.nrows();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.mat[(i, j)] * v[j];
            }
            total += u[i] * row;
        }
        total
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.mat.nrows();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `‖A·𝟙‖_∞ / ‖A‖_∞`; near zero for Plain weight because constants lie in
    /// the kernel of the form.
    pub fn constant_null_defect(&self) -> f64 {
        let ones = vec![1.0; self.mat.nrows()];
        let residual = self.apply(&ones);
        let num = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let den = self
            .mat
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        num / den.max(f64::MIN_POSITIVE)
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_fingerprint == mesh.fingerprint() {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch {
                expected: self.mesh_fingerprint,
                got: mesh.fingerprint(),
            })
        }
    }

    /// Matrix Market symmetric coordinate serialization; the header comments
    /// record the kernel and quadrature tolerance.
    pub fn to_matrix_market(&self) -> String {
        let n = self.mat.nrows();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = self.mat[(i, j)];
                if v != 0.0 {
                    entries.push((i + 1, j + 1, v));
                }
            }
        }
        let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        out.push_str(&format!(
            "% kernel: dim={} s={} weight={} quad_tol={:e} mesh={:016x}{}\n",
            self.kernel.dim.value(),
            self.kernel.order.value(),
            self.kernel.weight,
            self.quad_tol,
            self.mesh_fingerprint,
            if self.kernel.endpoint_band() {
                " endpoint_band=true"
            } else {
                ""
            },
        ));
        out.push_str(&format!("{n} {n} {}\n", entries.len()));
        for (i, j, v) in entries {
            out.push_str(&format!("{i} {j} {v}\n"));
        }
        out
    }

    pub fn save_matrix_market(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_matrix_market().as_bytes())
    }
}

/// Assemble the global nonlocal matrix: entry `(i,j)` sums
/// `∫∫ (φ_i(x)-φ_i(y))(φ_j(x)-φ_j(y)) k(x,y) dx dy` over all ordered element
/// pairs. Pair contributions are computed in parallel and merged in a fixed
/// order, so the result is bitwise reproducible for any worker count.
pub fn assemble(mesh: &Mesh, kernel: &KernelSpec, tol: f64) -> Result<NonlocalMatrix> {
    if kernel.dim.value() != mesh.dim() {
        return Err(Error::DimensionMismatch(format!(
            "kernel dimension {} != mesh dimension {}",
            kernel.dim.value(),
            mesh.dim()
        )));
    }
    let ne = mesh.num_elements();
    let pairs: Vec<(usize, usize)> = (0..ne)
        .flat_map(|a| (a..ne).map(move |b| (a, b)))
        .collect();
    let blocks: Vec<_> = pairs
        .par_iter()
        .map(|&(a, b)| pair_block(mesh, a, b, kernel, tol))
        .collect::<Result<_>>()?;

    let n = mesh.num_vertices();
    let mut mat = DMatrix::<f64>::zeros(n, n);
    for (&(a, b), block) in pairs.iter().zip(&blocks) {
        // Unordered pair (a,b), a < b, stands for both ordered pairs.
        let factor = if a == b { 1.0 } else { 2.0 };
        let k = block.ids.len();
        for (li, &gi) in block.ids.iter().enumerate() {
            for (lj, &gj) in block.ids.iter().enumerate() {
                mat[(gi, gj)] += factor * block.vals[li * k + lj];
            }
        }
    }
    // Enforce exact symmetry by averaging.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (mat[(i, j)] + mat[(j, i)]);
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    Ok(NonlocalMatrix {
        kernel: *kernel,
        mat,
        quad_tol: tol,
        mesh_fingerprint: mesh.fingerprint(),
    })
}

/// Symmetric positive-definite P1 mass matrix.
#[derive(Debug, Clone)]
pub struct MassMatrix {
    mat: DMatrix<f64>,
    lumped: bool,
    mesh_fingerprint: u64,
}

impl MassMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn lumped(&self) -> bool {
        self.lumped
    }

    pub fn mesh_fingerprint(&self) -> u64 {
        self.mesh_fingerprint
    }

    pub fn quad_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.mat.nrows();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.mat[(i, j)] * v[j];
            }
            total += u[i] * row;
        }
        total
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.mat.nrows();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `L²` norm of a nodal function: `sqrt(uᵀ M u)`.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.quad_form(u, u).max(0.0).sqrt()
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_fingerprint == mesh.fingerprint() {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch {
                expected: self.mesh_fingerprint,
                got: mesh.fingerprint(),
            })
        }
    }
}

/// Exact (consistent) P1 mass matrix.
pub fn mass(mesh: &Mesh) -> MassMatrix {
    let n = mesh.num_vertices();
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let k = mesh.dim() + 1;
    // Local mass: |E|/(k(k+1)) · (1 + δ_ij), the exact integral of products
    // of barycentric coordinates.
    for e in 0..mesh.num_elements() {
        let scale = mesh.element_measure(e) / ((k * (k + 1)) as f64);
        let el = mesh.element(e);
        for &gi in el {
            for &gj in el {
                mat[(gi, gj)] += scale * if gi == gj { 2.0 } else { 1.0 };
            }
        }
    }
    MassMatrix {
        mat,
        lumped: false,
        mesh_fingerprint: mesh.fingerprint(),
    }
}

/// Bilinear energy `E_s(u,v) = (C_{N,s}/2)·uᵀ A_s v` for a Plain-weight matrix.
pub fn energy(a: &NonlocalMatrix, u: &DiscreteFunction, v: &DiscreteFunction) -> Result<f64> {
    if !a.is_plain() {
        return Err(Error::InvalidArgument(
            "energy requires a Plain-weight matrix".into(),
        ));
    }
    for f in [u, v] {
        if f.mesh_fingerprint() != a.mesh_fingerprint() {
            return Err(Error::FingerprintMismatch {
                expected: a.mesh_fingerprint(),
                got: f.mesh_fingerprint(),
            });
        }
    }
    let c = c_ns(a.kernel().dim, a.kernel().order);
    Ok(0.5 * c * a.quad_form(u.coeffs(), v.coeffs()))
}

/// Gagliardo seminorm evaluation with per-order assembly caching.
///
/// Cache keys round the order to 12 digits so sweep grids re-use matrices.
pub struct SeminormCache {
    mesh_fingerprint: u64,
    quad_tol: f64,
    matrices: HashMap<i64, NonlocalMatrix>,
}

impl SeminormCache {
    pub fn new(mesh: &Mesh, quad_tol: f64) -> Self {
        SeminormCache {
            mesh_fingerprint: mesh.fingerprint(),
            quad_tol,
            matrices: HashMap::new(),
        }
    }

    fn key(t: FractionalOrder) -> i64 {
        (t.value() * 1e12).round() as i64
    }

    /// Plain-weight matrix at order `t` (assembled once per order).
    pub fn matrix(&mut self, mesh: &Mesh, t: FractionalOrder) -> Result<&NonlocalMatrix> {
        if mesh.fingerprint() != self.mesh_fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.mesh_fingerprint,
                got: mesh.fingerprint(),
            });
        }
        let key = Self::key(t);
        if let std::collections::hash_map::Entry::Vacant(slot) = self.matrices.entry(key) {
            let kernel = KernelSpec::new(
                crate::specfun::DimensionTag::new(mesh.dim())?,
                t,
                KernelWeight::Plain,
            );
            slot.insert(assemble(mesh, &kernel, self.quad_tol)?);
        }
        Ok(&self.matrices[&key])
    }

    /// `|u|_{H^t(Ω)} = sqrt(uᵀ A_t u)` (unweighted Gagliardo seminorm).
    pub fn seminorm(
        &mut self,
        mesh: &Mesh,
        u: &DiscreteFunction,
        t: FractionalOrder,
    ) -> Result<f64> {
        u.check_mesh(mesh)?;
        let a = self.matrix(mesh, t)?;
        Ok(a.quad_form(u.coeffs(), u.coeffs()).max(0.0).sqrt())
    }
}

//! Element-pair double integrals for kernels `|x-y|^{-(N+2s)}` and
//! `|x-y|^{-(N+2s)}·ln|x-y|` against products of linear shape-function
//! differences, with the diagonal singularity handled exactly.
//!
//! 1D pairs reduce to closed-form antiderivatives of `polynomial × t^{q-1}`
//! (and the log-weighted variant) in the separation variable `t = y - x`; the
//! remaining outer integral is evaluated by adaptive Gauss–Legendre panels.
//! 2D pairs use singularity-adapted coordinate transforms per pair class:
//! after the transform, the singular radial variable integrates in closed
//! form and only smooth directions are left to tensor Gauss rules.

mod gauss;
mod one_dim;
mod powlog;
mod two_dim;

pub use gauss::{gauss_rule, GaussRule};
pub(crate) use powlog::{power_integral, power_log_integral};

use crate::domain::Mesh;
use crate::error::{Error, Result};
use crate::specfun::{DimensionTag, FractionalOrder};

/// Kernel weight flavor: `Plain` is `|x-y|^{-(N+2s)}`, `Log` multiplies it by
/// `ln|x-y|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KernelWeight {
    Plain,
    Log,
}

impl std::fmt::Display for KernelWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelWeight::Plain => write!(f, "plain"),
            KernelWeight::Log => write!(f, "log"),
        }
    }
}

/// Identifies which singular kernel a matrix discretizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub dim: DimensionTag,
    pub order: FractionalOrder,
    pub weight: KernelWeight,
}

impl KernelSpec {
    pub fn new(dim: DimensionTag, order: FractionalOrder, weight: KernelWeight) -> Self {
        KernelSpec { dim, order, weight }
    }

    /// Kernel exponent `N + 2s`.
    pub fn exponent(&self) -> f64 {
        self.dim.value() as f64 + 2.0 * self.order.value()
    }

    /// Orders in `(0, 0.02) ∪ (0.98, 1)` are accepted but flagged: quadrature
    /// constants degrade near the endpoints.
    pub fn endpoint_band(&self) -> bool {
        self.order.endpoint_band()
    }

    pub fn is_log(&self) -> bool {
        self.weight == KernelWeight::Log
    }
}

/// Singular-integration taxonomy of an element pair, determined purely by the
/// shared-vertex count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Identical,
    Adjacent,
    Disjoint,
}

/// Classify the ordered element pair `(a, b)`.
pub fn classify_pair(a: usize, b: usize, mesh: &Mesh) -> Result<PairClass> {
    if a >= mesh.num_elements() || b >= mesh.num_elements() {
        return Err(Error::InvalidArgument(format!(
            "element index out of range: ({a}, {b}) with {} elements",
            mesh.num_elements()
        )));
    }
    if a == b {
        Ok(PairClass::Identical)
    } else if mesh.shared_vertices(a, b).is_empty() {
        Ok(PairClass::Disjoint)
    } else {
        Ok(PairClass::Adjacent)
    }
}

/// Contribution of one ordered element pair to all matrix entries it touches:
/// a dense symmetric block over the union of the two elements' vertex ids.
#[derive(Debug, Clone)]
pub struct LocalBlock {
    pub ids: Vec<usize>,
    /// Row-major `ids.len() × ids.len()`.
    pub vals: Vec<f64>,
}

impl LocalBlock {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let k = self.ids.len();
        match (
            self.ids.iter().position(|&g| g == i),
            self.ids.iter().position(|&g| g == j),
        ) {
            (Some(li), Some(lj)) => self.vals[li * k + lj],
            // A basis function constant on both elements contributes nothing.
            _ => 0.0,
        }
    }
}

pub(crate) fn union_ids(mesh: &Mesh, a: usize, b: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = mesh.element(a).to_vec();
    for &v in mesh.element(b) {
        if !ids.contains(&v) {
            ids.push(v);
        }
    }
    ids
}

/// Pair contribution over the vertex union of `(a, b)`, dispatched on the
/// pair class. `tol` bounds the absolute error relative to the pair scale.
pub fn pair_block(
    mesh: &Mesh,
    a: usize,
    b: usize,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    let class = classify_pair(a, b, mesh)?;
    pair_block_with_class(mesh, a, b, class, kernel, tol)
}

/// Same as [`pair_block`] with the pair class forced. Diagnostic use: the
/// strategies must agree within combined tolerances wherever the forced class
/// still converges.
pub fn pair_block_with_class(
    mesh: &Mesh,
    a: usize,
    b: usize,
    class: PairClass,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if kernel.dim.value() != mesh.dim() {
        return Err(Error::DimensionMismatch(format!(
            "kernel dimension {} != mesh dimension {}",
            kernel.dim.value(),
            mesh.dim()
        )));
    }
    // The integrand is symmetric under swapping the two elements, so both
    // orientations share one canonical evaluation (bitwise identical).
    let (a, b) = (a.min(b), a.max(b));
    match mesh.dim() {
        1 => one_dim::pair_block_1d(mesh, a, b, class, kernel, tol),
        _ => two_dim::pair_block_2d(mesh, a, b, class, kernel, tol),
    }
}

/// Single ordered-pair basis contribution
/// `∫_A ∫_B (φ_i(x)-φ_i(y))(φ_j(x)-φ_j(y)) k(x,y) dy dx`.
pub fn pair_integral(
    a: usize,
    b: usize,
    i: usize,
    j: usize,
    kernel: &KernelSpec,
    mesh: &Mesh,
    tol: f64,
) -> Result<f64> {
    if i >= mesh.num_vertices() || j >= mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!(
            "basis index out of range: ({i}, {j}) with {} vertices",
            mesh.num_vertices()
        )));
    }
    Ok(pair_block(mesh, a, b, kernel, tol)?.get(i, j))
}

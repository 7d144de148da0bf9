//! Numerical laboratory for the regional fractional Laplacian `(-Δ)^s_Ω` on
//! bounded 1D/2D domains.
//!
//! The crate assembles Galerkin matrices for the singular double-integral
//! forms with kernels `|x-y|^{-(N+2s)}` and `|x-y|^{-(N+2s)}·log|x-y|` over
//! continuous piecewise-linear elements, solves the zero-mean Poisson and
//! eigenvalue problems, evaluates the s-derivative equation for the solution
//! map and the one-sided derivative of the first nontrivial eigenvalue, and
//! orchestrates reproducible s-grid experiments.
//!
//! Module map:
//! - [`specfun`]: closed-form scalar functions (normalization constant
//!   `C_{N,s}`, its s-derivative, `ψ_σ`, logarithmic decay bounds).
//! - [`domain`]: simplicial meshes, nodal functions, geometry quantities.
//! - [`quadrature`]: singular element-pair integrals.
//! - [`forms`]: global matrix assembly, energies, seminorms.
//! - [`pv`]: pointwise principal-value operator application.
//! - [`solve`]: Poisson, eigenproblem, and derivative solvers.
//! - [`sweep`]: s-grid experiment harness with CSV/manifest persistence.
//! - [`functions`]: named analytic functions for right-hand sides and probes.

pub mod domain;
pub mod error;
pub mod forms;
pub mod functions;
pub mod pv;
pub mod quadrature;
pub mod solve;
pub mod specfun;
pub mod sweep;
pub mod util;

pub use domain::{DiscreteFunction, Mesh};
pub use error::{Error, Result};
pub use forms::{MassMatrix, NonlocalMatrix};
pub use quadrature::{KernelSpec, KernelWeight, PairClass};
pub use solve::{DLambdaReport, SDerivativeReport, Spectrum};
pub use specfun::{DimensionTag, FractionalOrder};
pub use sweep::{SweepConfig, SweepRecord};

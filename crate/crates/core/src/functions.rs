//! Named analytic functions for right-hand sides and smooth probes.
//!
//! The registry keeps the CLI and sweep configs deterministic and testable
//! without an expression engine. Functions are defined on normalized
//! bounding-box coordinates so the same name works on any domain:
//!
//! - `cospix`: `cos(π x̂)` (1D) or `cos(π x̂)·cos(π ŷ)` (2D); zero mean on the
//!   built-in interval and square domains.
//! - `cos2pix`: the doubled-frequency variant.
//! - `legendre2`: `P₂(2x̂-1)` (1D) or `P₂(2x̂-1) + P₂(2ŷ-1)` (2D).
//! - `xshift`: first coordinate minus its domain mean (exactly zero mean).
//! - `bump`: smooth bump supported well inside the domain (not zero mean;
//!   meant as a test function, not Poisson data).

use crate::domain::{Mesh, Point};
use crate::error::{Error, Result};

pub type Analytic = Box<dyn Fn(Point) -> f64 + Send + Sync>;

/// All registry names.
pub const NAMES: [&str; 5] = ["cospix", "cos2pix", "legendre2", "xshift", "bump"];

fn bounding_box(mesh: &Mesh) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for v in mesh.vertices() {
        for d in 0..2 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    (lo, hi)
}

fn legendre2(t: f64) -> f64 {
    // P₂ on [-1, 1].
    0.5 * (3.0 * t * t - 1.0)
}

/// Look up a named analytic function, specialized to the mesh geometry.
pub fn analytic(name: &str, mesh: &Mesh) -> Result<Analytic> {
    let (lo, hi) = bounding_box(mesh);
    let span = [
        (hi[0] - lo[0]).max(f64::MIN_POSITIVE),
        (hi[1] - lo[1]).max(f64::MIN_POSITIVE),
    ];
    let dim = mesh.dim();
    let pi = std::f64::consts::PI;
    match name {
        "cospix" => Ok(Box::new(move |p| {
            let xn = (p[0] - lo[0]) / span[0];
            if dim == 1 {
                (pi * xn).cos()
            } else {
                let yn = (p[1] - lo[1]) / span[1];
                (pi * xn).cos() * (pi * yn).cos()
            }
        })),
        "cos2pix" => Ok(Box::new(move |p| {
            let xn = (p[0] - lo[0]) / span[0];
            if dim == 1 {
                (2.0 * pi * xn).cos()
            } else {
                let yn = (p[1] - lo[1]) / span[1];
                (2.0 * pi * xn).cos() * (2.0 * pi * yn).cos()
            }
        })),
        "legendre2" => Ok(Box::new(move |p| {
            let xn = 2.0 * (p[0] - lo[0]) / span[0] - 1.0;
            if dim == 1 {
                legendre2(xn)
            } else {
                let yn = 2.0 * (p[1] - lo[1]) / span[1] - 1.0;
                legendre2(xn) + legendre2(yn)
            }
        })),
        "xshift" => {
            // Exact continuous mean of the first coordinate over the mesh.
            let mut moment = 0.0;
            for e in 0..mesh.num_elements() {
                moment += mesh.element_measure(e) * mesh.element_centroid(e)[0];
            }
            let mean = moment / mesh.measure();
            Ok(Box::new(move |p| p[0] - mean))
        }
        "bump" => {
            let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
            let radius = 0.3 * mesh.diameter();
            Ok(Box::new(move |p| {
                let rho2 = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2))
                    / (radius * radius);
                if rho2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - rho2)).exp()
                }
            }))
        }
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

//! 1D element-pair integrals.
//!
//! Identical pairs are fully closed-form. For distinct pairs the inner
//! integral over `t = y - x` is closed-form per outer point (the integrand is
//! a quadratic polynomial in `t` against `|t|^{-1-2s}` or its log-weighted
//! variant) and the outer integral runs on adaptive Gauss–Legendre panels
//! that grade into a shared vertex automatically.

use super::{
    gauss_rule, power_integral, power_log_integral, KernelSpec, LocalBlock, PairClass,
};
use crate::domain::Mesh;
use crate::error::{Error, Result};

const OUTER_ORDER: usize = 8;
const MAX_DEPTH: usize = 48;

/// Linear shape data `φ(x) = p + q x` for one basis function on one element.
#[derive(Clone, Copy)]
struct LinearShape {
    p: f64,
    q: f64,
}

fn shapes_on_element(mesh: &Mesh, elem: usize, ids: &[usize]) -> Vec<LinearShape> {
    let el = mesh.element(elem);
    let (mut x0, mut x1) = (mesh.vertex(el[0])[0], mesh.vertex(el[1])[0]);
    let (mut v0, mut v1) = (el[0], el[1]);
    if x0 > x1 {
        std::mem::swap(&mut x0, &mut x1);
        std::mem::swap(&mut v0, &mut v1);
    }
    let h = x1 - x0;
    ids.iter()
        .map(|&g| {
            let n0 = (g == v0) as usize as f64;
            let n1 = (g == v1) as usize as f64;
            LinearShape {
                p: (n0 * x1 - n1 * x0) / h,
                q: (n1 - n0) / h,
            }
        })
        .collect()
}

fn span(mesh: &Mesh, elem: usize) -> (f64, f64) {
    let el = mesh.element(elem);
    let (a, b) = (mesh.vertex(el[0])[0], mesh.vertex(el[1])[0]);
    (a.min(b), a.max(b))
}

pub(super) fn pair_block_1d(
    mesh: &Mesh,
    a: usize,
    b: usize,
    class: PairClass,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    match class {
        PairClass::Identical => Ok(identical_block(mesh, a, kernel)),
        _ => generic_block(mesh, a, b, kernel, tol),
    }
}

/// Closed form for an identical pair: the shape differences reduce to
/// `β_i β_j (x-y)²`, and
/// `∫∫_{E×E} (x-y)² |x-y|^{q-3} w dx dy = 2 ∫_0^h (h-u) u^{q-1} w(u) du`
/// with `q = 2-2s`.
fn identical_block(mesh: &Mesh, elem: usize, kernel: &KernelSpec) -> LocalBlock {
    let ids: Vec<usize> = mesh.element(elem).to_vec();
    let shapes = shapes_on_element(mesh, elem, &ids);
    let (x0, x1) = span(mesh, elem);
    let h = x1 - x0;
    let q = 2.0 - 2.0 * kernel.order.value();
    let base = if kernel.is_log() {
        2.0 * (h * power_log_integral(q, 0.0, h) - power_log_integral(q + 1.0, 0.0, h))
    } else {
        2.0 * (h * power_integral(q, 0.0, h) - power_integral(q + 1.0, 0.0, h))
    };
    let k = ids.len();
    let mut vals = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            vals[i * k + j] = shapes[i].q * shapes[j].q * base;
        }
    }
    LocalBlock { ids, vals }
}

/// `∫ t^m |t|^{-1-2s} (ln|t|)^δ dt` over `[lo, hi]` for `m = 0, 1, 2`,
/// handling sign and a range touching or straddling zero. Entries of the
/// result for which the integral diverges are NaN; callers only combine them
/// with exactly-zero coefficients (identical linear data on both elements).
fn t_moments(lo: f64, hi: f64, two_s: f64, log_weight: bool) -> [f64; 3] {
    debug_assert!(lo < hi);
    let seg = |a: f64, b: f64, m: usize| -> f64 {
        // ∫_a^b t^{m-1-2s} (ln t)^δ dt on 0 <= a < b.
        if b <= a {
            return 0.0;
        }
        let q = m as f64 - two_s;
        if a <= 0.0 && q <= 0.0 {
            return f64::NAN;
        }
        if log_weight {
            power_log_integral(q, a.max(0.0), b)
        } else {
            power_integral(q, a.max(0.0), b)
        }
    };
    let mut w = [0.0; 3];
    for (m, slot) in w.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        // positive-t part [max(lo,0), hi], negative-t part reflected.
        let pos = if hi > 0.0 { seg(lo.max(0.0), hi, m) } else { 0.0 };
        let neg = if lo < 0.0 { sign * seg((-hi).max(0.0), -lo, m) } else { 0.0 };
        *slot = pos + neg;
    }
    w
}

fn generic_block(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    let ids = super::union_ids(mesh, ea, eb);
    let k = ids.len();
    let shapes_a = shapes_on_element(mesh, ea, &ids);
    let shapes_b = shapes_on_element(mesh, eb, &ids);
    let (alo, ahi) = span(mesh, ea);
    let (blo, bhi) = span(mesh, eb);
    let two_s = 2.0 * kernel.order.value();
    let log_weight = kernel.is_log();

    let n_entries = k * (k + 1) / 2;
    // Packed upper-triangular integrand at one outer point x.
    let eval = |x: f64, out: &mut [f64]| {
        let w = t_moments(blo - x, bhi - x, two_s, log_weight);
        // δ_g(x): difference of the two linear extensions at x; vanishes at a
        // shared vertex by continuity of the hat functions.
        let deltas: Vec<f64> = (0..k)
            .map(|g| (shapes_a[g].p + shapes_a[g].q * x) - (shapes_b[g].p + shapes_b[g].q * x))
            .collect();
        let mut idx = 0;
        for i in 0..k {
            for j in i..k {
                let c0 = deltas[i] * deltas[j];
                let c1 = -(deltas[i] * shapes_b[j].q + deltas[j] * shapes_b[i].q);
                let c2 = shapes_b[i].q * shapes_b[j].q;
                let mut v = 0.0;
                // NaN moments only pair with exactly-zero coefficients.
                if c0 != 0.0 {
                    v += c0 * w[0];
                }
                if c1 != 0.0 {
                    v += c1 * w[1];
                }
                if c2 != 0.0 {
                    v += c2 * w[2];
                }
                out[idx] = v;
                idx += 1;
            }
        }
    };

    // Scale for the absolute error budget.
    let far = (bhi - alo).abs().max((ahi - blo).abs());
    let mut kmag = far.powf(-1.0 - two_s);
    if log_weight {
        kmag *= 1.0 + far.ln().abs();
    }
    let scale = (ahi - alo) * (bhi - blo) * kmag;

    let packed = adaptive_panels(alo, ahi, n_entries, tol * scale.max(f64::MIN_POSITIVE), &eval)
        .map_err(|achieved| Error::QuadratureNonConvergence {
            a: ea,
            b: eb,
            achieved,
            requested: tol * scale,
        })?;

    let mut vals = vec![0.0; k * k];
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            vals[i * k + j] = packed[idx];
            vals[j * k + i] = packed[idx];
            idx += 1;
        }
    }
    Ok(LocalBlock { ids, vals })
}

/// Vector-valued adaptive quadrature: bisect panels until the Gauss estimate
/// of each panel is within its share of the budget (share proportional to
/// panel length). Returns the accumulated achieved-error estimate on failure.
fn adaptive_panels(
    a: f64,
    b: f64,
    n: usize,
    budget: f64,
    eval: &dyn Fn(f64, &mut [f64]),
) -> std::result::Result<Vec<f64>, f64> {
    let rule = gauss_rule(OUTER_ORDER);
    let gl = |lo: f64, hi: f64| -> Vec<f64> {
        let mut acc = vec![0.0; n];
        let mut buf = vec![0.0; n];
        let len = hi - lo;
        for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
            eval(lo + len * node, &mut buf);
            for (acc_i, b_i) in acc.iter_mut().zip(&buf) {
                *acc_i += w * len * b_i;
            }
        }
        acc
    };

    let total_len = b - a;
    let mut result = vec![0.0; n];
    let mut achieved = 0.0f64;
    let mut converged = true;
    // (lo, hi, coarse estimate, depth)
    let mut stack = vec![(a, b, gl(a, b), 0usize)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl(lo, mid);
        let right = gl(mid, hi);
        let err = coarse
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(c, (l, r))| (c - l - r).abs())
            .fold(0.0f64, f64::max);
        let local_budget = budget * (hi - lo) / total_len;
        if err <= local_budget || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > local_budget {
                converged = false;
            }
            achieved += err;
            for ((res, l), r) in result.iter_mut().zip(&left).zip(&right) {
                *res += l + r;
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if converged || achieved <= budget {
        Ok(result)
    } else {
        Err(achieved)
    }
}

//! 2D triangle-pair integrals.
//!
//! Each singular pair class is flattened by a coordinate transform under
//! which the kernel singularity concentrates in one radial variable with
//! exactly integrable power `ξ^p` or `ξ^p ln ξ` (the shape-function
//! differences are homogeneous in the scaled coordinates). The radial factor
//! integrates in closed form; smooth remaining directions go to tensor
//! Gauss rules whose order escalates until two consecutive orders agree
//! within the pair tolerance.
//!
//! - Identical pair: translation invariance reduces the 4D integral to the
//!   separation plane weighted by the triangle covariogram
//!   `(1 - tp⁺ - tq⁺ - (tp+tq)⁻)²·|T|`, split into three sign sectors (each
//!   doubled by central symmetry) with closed-form radial integrals.
//! - Shared edge: four subdomains, 2D smooth part each.
//! - Shared vertex: two subdomains, 3D smooth part each.
//! - Disjoint: plain tensor Gauss over both Duffy-mapped triangles with
//!   distance-graded base order.

use super::{gauss_rule, KernelSpec, LocalBlock, PairClass};
use crate::domain::{Mesh, Point};
use crate::error::{Error, Result};

type Vec2 = [f64; 2];

fn sub(a: Point, b: Point) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn lin2(c1: f64, v1: Vec2, c2: f64, v2: Vec2) -> Vec2 {
    [c1 * v1[0] + c2 * v2[0], c1 * v1[1] + c2 * v2[1]]
}

fn lin3(c1: f64, v1: Vec2, c2: f64, v2: Vec2, c3: f64, v3: Vec2) -> Vec2 {
    [
        c1 * v1[0] + c2 * v2[0] + c3 * v3[0],
        c1 * v1[1] + c2 * v2[1] + c3 * v3[1],
    ]
}

/// Basis nodal values on an ordered vertex triple.
fn nodal(ids: &[usize], verts: [usize; 3]) -> Vec<[f64; 3]> {
    ids.iter()
        .map(|&g| {
            [
                (g == verts[0]) as usize as f64,
                (g == verts[1]) as usize as f64,
                (g == verts[2]) as usize as f64,
            ]
        })
        .collect()
}

fn packed_len(k: usize) -> usize {
    k * (k + 1) / 2
}

fn unpack(ids: Vec<usize>, packed: Vec<f64>) -> LocalBlock {
    let k = ids.len();
    let mut vals = vec![0.0; k * k];
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            vals[i * k + j] = packed[idx];
            vals[j * k + i] = packed[idx];
            idx += 1;
        }
    }
    LocalBlock { ids, vals }
}

/// Escalate the quadrature order until two consecutive evaluations agree
/// within the budget.
fn with_escalation(
    base: usize,
    step: usize,
    max: usize,
    budget: f64,
    pair: (usize, usize),
    tol: f64,
    compute: &dyn Fn(usize) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let mut prev = compute(base);
    let mut order = base + step;
    let mut achieved = f64::INFINITY;
    while order <= max {
        let cur = compute(order);
        achieved = prev
            .iter()
            .zip(&cur)
            .map(|(p, c)| (p - c).abs())
            .fold(0.0f64, f64::max);
        if achieved <= budget {
            return Ok(cur);
        }
        prev = cur;
        order += step;
    }
    Err(Error::QuadratureNonConvergence {
        a: pair.0,
        b: pair.1,
        achieved,
        requested: tol,
    })
}

fn kernel_scale(kernel: &KernelSpec, area_a: f64, area_b: f64, dist: f64) -> f64 {
    let mut k = dist.powf(-kernel.exponent());
    if kernel.is_log() {
        k *= 1.0 + dist.ln().abs();
    }
    (area_a * area_b * k).max(f64::MIN_POSITIVE)
}

pub(super) fn pair_block_2d(
    mesh: &Mesh,
    a: usize,
    b: usize,
    class: PairClass,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    match class {
        PairClass::Identical => identical_block(mesh, a, kernel, tol),
        PairClass::Adjacent => {
            let mut shared = mesh.shared_vertices(a, b);
            shared.sort_unstable();
            match shared.len() {
                2 => edge_block(mesh, a, b, [shared[0], shared[1]], kernel, tol),
                1 => vertex_block(mesh, a, b, shared[0], kernel, tol),
                n => Err(Error::MeshInvariant(format!(
                    "distinct triangles {a}, {b} share {n} vertices"
                ))),
            }
        }
        PairClass::Disjoint => disjoint_block(mesh, a, b, kernel, tol),
    }
}

/// `∫_0^1 ρ^{q-1}(1-ρ)² dρ` and its log-weighted variant, closed form.
fn radial_weight_quadratic(q: f64) -> (f64, f64) {
    let plain = 2.0 / (q * (q + 1.0) * (q + 2.0));
    let log = -plain * (1.0 / q + 1.0 / (q + 1.0) + 1.0 / (q + 2.0));
    (plain, log)
}

fn identical_block(mesh: &Mesh, e: usize, kernel: &KernelSpec, tol: f64) -> Result<LocalBlock> {
    let ids: Vec<usize> = mesh.element(e).to_vec();
    let el = mesh.element(e);
    let verts = [el[0], el[1], el[2]];
    let [p0, p1, p2] = [mesh.vertex(verts[0]), mesh.vertex(verts[1]), mesh.vertex(verts[2])];
    let f1 = sub(p1, p0);
    let f2 = sub(p2, p0);
    let area2 = cross(f1, f2).abs();
    let vals = nodal(&ids, verts);
    // Nodal differences along the two parameter directions.
    let d1: Vec<f64> = vals.iter().map(|v| v[1] - v[0]).collect();
    let d2: Vec<f64> = vals.iter().map(|v| v[2] - v[0]).collect();

    let exponent = kernel.exponent();
    let (xp, xl) = radial_weight_quadratic(2.0 - 2.0 * kernel.order.value());
    let log_weight = kernel.is_log();
    let k = ids.len();
    let n = packed_len(k);

    let compute = |order: usize| -> Vec<f64> {
        let rule = gauss_rule(order);
        let mut acc = vec![0.0; n];
        // Sector directions (tp, tq) = ρ·(c1(η), c2(η)); central symmetry
        // doubles each, which cancels the 1/2 in the covariogram.
        let sectors: [fn(f64) -> (f64, f64); 3] =
            [|h| (1.0 - h, h), |h| (1.0, -h), |h| (h, -1.0)];
        for sector in sectors {
            for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
                let (c1, c2) = sector(node);
                let dir = lin2(c1, f1, c2, f2);
                let r = norm(dir);
                let kfac = r.powf(-exponent);
                let radial = if log_weight { xl + xp * r.ln() } else { xp };
                let factor = w * kfac * radial;
                let mut idx = 0;
                for i in 0..k {
                    let gi = c1 * d1[i] + c2 * d2[i];
                    for j in i..k {
                        let gj = c1 * d1[j] + c2 * d2[j];
                        acc[idx] += factor * gi * gj;
                        idx += 1;
                    }
                }
            }
        }
        for v in &mut acc {
            *v *= area2 * area2;
        }
        acc
    };

    let diam = mesh.element_diameter(e);
    let budget = tol * kernel_scale(kernel, area2 / 2.0, area2 / 2.0, diam);
    let packed = with_escalation(16, 8, 48, budget, (e, e), tol, &compute)?;
    Ok(unpack(ids, packed))
}

fn edge_block(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    shared: [usize; 2],
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    let ids = super::union_ids(mesh, ea, eb);
    let off = |e: usize| -> usize {
        *mesh
            .element(e)
            .iter()
            .find(|v| !shared.contains(v))
            .expect("edge-adjacent triangle has one off-edge vertex")
    };
    let (a2, b2) = (off(ea), off(eb));
    let [v0, v1] = shared;
    let e_vec = sub(mesh.vertex(v1), mesh.vertex(v0));
    let a_vec = sub(mesh.vertex(a2), mesh.vertex(v1));
    let b_vec = sub(mesh.vertex(b2), mesh.vertex(v1));

    // Nodal differences matching the (E, A, B) coefficients.
    let de: Vec<f64> = ids.iter().map(|&g| ((g == v1) as usize as f64) - ((g == v0) as usize as f64)).collect();
    let da: Vec<f64> = ids.iter().map(|&g| ((g == a2) as usize as f64) - ((g == v1) as usize as f64)).collect();
    let db: Vec<f64> = ids.iter().map(|&g| ((g == b2) as usize as f64) - ((g == v1) as usize as f64)).collect();

    let q = 3.0 - 2.0 * kernel.order.value();
    // ∫_0^1 ξ^{q-1}(1-ξ) dξ and the log-weighted variant.
    let xp = 1.0 / q - 1.0 / (q + 1.0);
    let xl = -1.0 / (q * q) + 1.0 / ((q + 1.0) * (q + 1.0));
    let exponent = kernel.exponent();
    let log_weight = kernel.is_log();
    let area4 = 4.0 * mesh.element_measure(ea) * mesh.element_measure(eb);
    let k = ids.len();
    let n = packed_len(k);

    // Subdomain tables: coefficient triple (cE, cA, cB)(η1, η2) and the extra
    // Jacobian factor.
    type Coef = fn(f64, f64) -> (f64, f64, f64);
    let subdomains: [(Coef, fn(f64, f64) -> f64); 4] = [
        (|h1, h2| (h1 * h2, 1.0, -h1 * (1.0 - h2)), |h1, _| h1),
        (|h1, h2| (h2, h1, -(1.0 - h2)), |_, _| 1.0),
        (|h1, h2| (-h1 * h2, h1 * (1.0 - h2), -1.0), |h1, _| h1),
        (|h1, h2| (-h2, 1.0 - h2, -h1), |_, _| 1.0),
    ];

    let compute = |order: usize| -> Vec<f64> {
        let rule = gauss_rule(order);
        let mut acc = vec![0.0; n];
        for (coef, jf) in subdomains {
            for (&n1, &w1) in rule.nodes.iter().zip(&rule.weights) {
                for (&n2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                    let (ce, ca, cb) = coef(n1, n2);
                    let rvec = lin3(ce, e_vec, ca, a_vec, cb, b_vec);
                    let r = norm(rvec);
                    let kfac = r.powf(-exponent);
                    let radial = if log_weight { xl + xp * r.ln() } else { xp };
                    let factor = w1 * w2 * jf(n1, n2) * kfac * radial;
                    let mut idx = 0;
                    for i in 0..k {
                        let gi = ce * de[i] + ca * da[i] + cb * db[i];
                        for j in i..k {
                            let gj = ce * de[j] + ca * da[j] + cb * db[j];
                            acc[idx] += factor * gi * gj;
                            idx += 1;
                        }
                    }
                }
            }
        }
        for v in &mut acc {
            *v *= area4;
        }
        acc
    };

    let diam = mesh.element_diameter(ea).max(mesh.element_diameter(eb));
    let budget = tol
        * kernel_scale(
            kernel,
            mesh.element_measure(ea),
            mesh.element_measure(eb),
            diam,
        );
    let packed = with_escalation(10, 4, 30, budget, (ea, eb), tol, &compute)?;
    Ok(unpack(ids, packed))
}

fn vertex_block(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    shared: usize,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    let ids = super::union_ids(mesh, ea, eb);
    let others = |e: usize| -> [usize; 2] {
        let mut it = mesh.element(e).iter().filter(|&&v| v != shared);
        [*it.next().unwrap(), *it.next().unwrap()]
    };
    let [a1, a2] = others(ea);
    let [b1, b2] = others(eb);
    let v = mesh.vertex(shared);
    let ea_vec = sub(mesh.vertex(a1), v);
    let aa_vec = sub(mesh.vertex(a2), mesh.vertex(a1));
    let eb_vec = sub(mesh.vertex(b1), v);
    let ab_vec = sub(mesh.vertex(b2), mesh.vertex(b1));

    let dea: Vec<f64> = ids.iter().map(|&g| ((g == a1) as usize as f64) - ((g == shared) as usize as f64)).collect();
    let daa: Vec<f64> = ids.iter().map(|&g| ((g == a2) as usize as f64) - ((g == a1) as usize as f64)).collect();
    let deb: Vec<f64> = ids.iter().map(|&g| ((g == b1) as usize as f64) - ((g == shared) as usize as f64)).collect();
    let dab: Vec<f64> = ids.iter().map(|&g| ((g == b2) as usize as f64) - ((g == b1) as usize as f64)).collect();

    let q = 4.0 - 2.0 * kernel.order.value();
    let xp = 1.0 / q;
    let xl = -1.0 / (q * q);
    let exponent = kernel.exponent();
    let log_weight = kernel.is_log();
    let area4 = 4.0 * mesh.element_measure(ea) * mesh.element_measure(eb);
    let k = ids.len();
    let n = packed_len(k);

    let compute = |order: usize| -> Vec<f64> {
        let rule = gauss_rule(order);
        let mut acc = vec![0.0; n];
        for swap_roles in [false, true] {
            for (&mu1, &wm1) in rule.nodes.iter().zip(&rule.weights) {
                let pa = lin2(1.0, ea_vec, mu1, aa_vec);
                for (&mu2, &wm2) in rule.nodes.iter().zip(&rule.weights) {
                    let qb = lin2(1.0, eb_vec, mu2, ab_vec);
                    for (&wv, &ww) in rule.nodes.iter().zip(&rule.weights) {
                        // x - y = ξ(P - wQ) or ξ(wP - Q).
                        let (fa, fb) = if swap_roles { (wv, 1.0) } else { (1.0, wv) };
                        let rvec = lin2(fa, pa, -fb, qb);
                        let r = norm(rvec);
                        let kfac = r.powf(-exponent);
                        let radial = if log_weight { xl + xp * r.ln() } else { xp };
                        let factor = wm1 * wm2 * ww * wv * kfac * radial;
                        let mut idx = 0;
                        for i in 0..k {
                            let gi = fa * (dea[i] + mu1 * daa[i]) - fb * (deb[i] + mu2 * dab[i]);
                            for j in i..k {
                                let gj =
                                    fa * (dea[j] + mu1 * daa[j]) - fb * (deb[j] + mu2 * dab[j]);
                                acc[idx] += factor * gi * gj;
                                idx += 1;
                            }
                        }
                    }
                }
            }
        }
        for v in &mut acc {
            *v *= area4;
        }
        acc
    };

    let diam = mesh.element_diameter(ea).max(mesh.element_diameter(eb));
    let budget = tol
        * kernel_scale(
            kernel,
            mesh.element_measure(ea),
            mesh.element_measure(eb),
            diam,
        );
    let packed = with_escalation(8, 4, 20, budget, (ea, eb), tol, &compute)?;
    Ok(unpack(ids, packed))
}

fn disjoint_block(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<LocalBlock> {
    let ids = super::union_ids(mesh, ea, eb);
    let el_a = mesh.element(ea);
    let el_b = mesh.element(eb);
    let verts_a = [el_a[0], el_a[1], el_a[2]];
    let verts_b = [el_b[0], el_b[1], el_b[2]];
    let vals_a = nodal(&ids, verts_a);
    let vals_b = nodal(&ids, verts_b);
    let [pa0, pa1, pa2] = verts_a.map(|v| mesh.vertex(v));
    let [pb0, pb1, pb2] = verts_b.map(|v| mesh.vertex(v));
    let (e1a, e2a) = (sub(pa1, pa0), sub(pa2, pa1));
    let (e1b, e2b) = (sub(pb1, pb0), sub(pb2, pb1));

    let exponent = kernel.exponent();
    let log_weight = kernel.is_log();
    let area4 = 4.0 * mesh.element_measure(ea) * mesh.element_measure(eb);
    let k = ids.len();
    let n = packed_len(k);

    let compute = |order: usize| -> Vec<f64> {
        let rule = gauss_rule(order);
        let m = rule.nodes.len();
        // Duffy points on both triangles: u = (t, tμ), weight t.
        struct Pt {
            pos: Point,
            weight: f64,
            shape: [f64; 3],
        }
        let points = |origin: Point, e1: Vec2, e2: Vec2| -> Vec<Pt> {
            let mut out = Vec::with_capacity(m * m);
            for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                for (&mu, &wm) in rule.nodes.iter().zip(&rule.weights) {
                    let pos = [
                        origin[0] + t * e1[0] + t * mu * e2[0],
                        origin[1] + t * e1[1] + t * mu * e2[1],
                    ];
                    out.push(Pt {
                        pos,
                        weight: wt * wm * t,
                        shape: [1.0 - t, t - t * mu, t * mu],
                    });
                }
            }
            out
        };
        let pts_a = points(pa0, e1a, e2a);
        let pts_b = points(pb0, e1b, e2b);
        let mut acc = vec![0.0; n];
        let mut diff = vec![0.0; k];
        for qa in &pts_a {
            for qb in &pts_b {
                let r = norm(sub(qa.pos, qb.pos));
                let mut kfac = r.powf(-exponent);
                if log_weight {
                    kfac *= r.ln();
                }
                let factor = qa.weight * qb.weight * kfac;
                for (d, (va, vb)) in diff.iter_mut().zip(vals_a.iter().zip(&vals_b)) {
                    let phix = va[0] * qa.shape[0] + va[1] * qa.shape[1] + va[2] * qa.shape[2];
                    let phiy = vb[0] * qb.shape[0] + vb[1] * qb.shape[1] + vb[2] * qb.shape[2];
                    *d = phix - phiy;
                }
                let mut idx = 0;
                for i in 0..k {
                    for j in i..k {
                        acc[idx] += factor * diff[i] * diff[j];
                        idx += 1;
                    }
                }
            }
        }
        for v in &mut acc {
            *v *= area4;
        }
        acc
    };

    let ca = mesh.element_centroid(ea);
    let cb = mesh.element_centroid(eb);
    let dist = norm(sub(ca, cb));
    let h = mesh.element_diameter(ea).max(mesh.element_diameter(eb));
    let ratio = dist / h;
    let base = if ratio < 1.5 {
        10
    } else if ratio < 2.5 {
        8
    } else if ratio < 4.0 {
        6
    } else {
        4
    };
    let budget = tol
        * kernel_scale(
            kernel,
            mesh.element_measure(ea),
            mesh.element_measure(eb),
            dist,
        );
    let packed = with_escalation(base, 2, 16, budget, (ea, eb), tol, &compute)?;
    Ok(unpack(ids, packed))
}

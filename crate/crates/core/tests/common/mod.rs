//! Independent oracles shared by the integration-test targets.
//!
//! Everything here recomputes implementation results by a different route:
//! numerical fiber/radial quadrature instead of closed-form antiderivatives,
//! polygon clipping instead of the covariogram formula, graded subdivision
//! instead of singularity-adapted transforms, and a hand-rolled Jacobi
//! eigensolver instead of the production path.

#![allow(dead_code)]

use fraclap_core::domain::{Mesh, Point};
use fraclap_core::quadrature::gauss_rule;

pub fn hat_on_element(mesh: &Mesh, elem: usize, basis: usize, p: Point) -> f64 {
    // Barycentric evaluation of the global hat φ_basis restricted to `elem`.
    let el = mesh.element(elem);
    match mesh.dim() {
        1 => {
            let (x0, x1) = (mesh.vertex(el[0])[0], mesh.vertex(el[1])[0]);
            let lam = (p[0] - x0) / (x1 - x0);
            if basis == el[0] {
                1.0 - lam
            } else if basis == el[1] {
                lam
            } else {
                0.0
            }
        }
        _ => {
            let [a, b, c] = [mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2])];
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
            let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
            if basis == el[0] {
                1.0 - l1 - l2
            } else if basis == el[1] {
                l1
            } else if basis == el[2] {
                l2
            } else {
                0.0
            }
        }
    }
}

fn kernel_1d(t: f64, s: f64, log: bool) -> f64 {
    let k = t.powf(-1.0 - 2.0 * s);
    if log {
        k * t.ln()
    } else {
        k
    }
}

/// 1D pair-entry oracle by the fiber method: for each separation `t`, the
/// inner integral over the fiber `{x ∈ A, x + t ∈ B}` is a plain Gauss
/// integral of a quadratic; the outer `t` integral runs on geometrically
/// graded panels toward `t = 0`.
pub fn oracle_pair_entry_1d(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    i: usize,
    j: usize,
    s: f64,
    log: bool,
) -> f64 {
    let span = |e: usize| {
        let el = mesh.element(e);
        let (a, b) = (mesh.vertex(el[0])[0], mesh.vertex(el[1])[0]);
        (a.min(b), a.max(b))
    };
    let (x0, x1) = span(ea);
    let (y0, y1) = span(eb);
    let rule = gauss_rule(10);
    let fiber_rule = gauss_rule(8);

    // Hat difference φ(x) - φ(x+t) through the linear coefficients of the
    // two restrictions, stable for t far below ulp(x).
    let lin = |e: usize, basis: usize| -> (f64, f64) {
        let el = mesh.element(e);
        let (mut a, mut b) = (mesh.vertex(el[0])[0], mesh.vertex(el[1])[0]);
        let (mut v0, mut v1) = (el[0], el[1]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut v0, &mut v1);
        }
        let h = b - a;
        let n0 = (basis == v0) as usize as f64;
        let n1 = (basis == v1) as usize as f64;
        ((n0 * b - n1 * a) / h, (n1 - n0) / h)
    };
    let (pai, qai) = lin(ea, i);
    let (pbi, qbi) = lin(eb, i);
    let (paj, qaj) = lin(ea, j);
    let (pbj, qbj) = lin(eb, j);

    let fiber = |t: f64| -> f64 {
        let lo = x0.max(y0 - t);
        let hi = x1.min(y1 - t);
        if hi <= lo {
            return 0.0;
        }
        fiber_rule.integrate(lo, hi, |x| {
            let di = (pai - pbi) + (qai - qbi) * x - qbi * t;
            let dj = (paj - pbj) + (qaj - qbj) * x - qbj * t;
            di * dj
        })
    };

    // Integrate k(|t|)·fiber(t) over one sign of t: split at the fiber
    // breakpoints (where the clipped fiber changes polynomial), grade
    // geometrically toward t = 0 on the first piece.
    let one_side = |tmax: f64, sign: f64, raw_bps: [f64; 4]| -> f64 {
        if tmax <= 0.0 {
            return 0.0;
        }
        let mut bps: Vec<f64> = raw_bps
            .iter()
            .copied()
            .filter(|&b| b > 1e-15 * tmax && b < tmax * (1.0 - 1e-15))
            .collect();
        bps.push(tmax);
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * tmax);

        let mut acc = 0.0;
        let mut lo_bound = 0.0;
        for &bp in &bps {
            if lo_bound == 0.0 {
                // graded panels toward the singular end.
                let mut hi = bp;
                for _ in 0..220 {
                    let lo = hi * 0.5;
                    acc += rule.integrate(lo, hi, |t| kernel_1d(t, s, log) * fiber(sign * t));
                    hi = lo;
                    if hi < 1e-28 * tmax {
                        break;
                    }
                }
            } else {
                // smooth piece, a few uniform panels.
                let n = 4;
                for k in 0..n {
                    let lo = lo_bound + (bp - lo_bound) * k as f64 / n as f64;
                    let hi = lo_bound + (bp - lo_bound) * (k + 1) as f64 / n as f64;
                    acc += rule.integrate(lo, hi, |t| kernel_1d(t, s, log) * fiber(sign * t));
                }
            }
            lo_bound = bp;
        }
        acc
    };
    one_side(y1 - x0, 1.0, [y0 - x1, y0 - x0, y1 - x1, y1 - x0])
        + one_side(x1 - y0, -1.0, [x0 - y1, x0 - y0, x1 - y1, x1 - y0])
}

/// Area of the intersection of the standard parameter simplex with its
/// translate by `t`, by Sutherland–Hodgman clipping.
pub fn simplex_overlap_area(tp: f64, tq: f64) -> f64 {
    let mut poly: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    // Half-planes of the translated simplex: p >= tp, q >= tq, p+q <= 1+tp+tq.
    let clips: [(f64, f64, f64); 3] = [
        (1.0, 0.0, tp),            //  p >= tp
        (0.0, 1.0, tq),            //  q >= tq
        (-1.0, -1.0, -1.0 - tp - tq), // -(p+q) >= -(1+tp+tq)
    ];
    for (a, b, c) in clips {
        let inside = |p: &[f64; 2]| a * p[0] + b * p[1] >= c - 1e-15;
        let mut out: Vec<[f64; 2]> = Vec::new();
        for k in 0..poly.len() {
            let cur = poly[k];
            let nxt = poly[(k + 1) % poly.len()];
            let (ci, ni) = (inside(&cur), inside(&nxt));
            if ci {
                out.push(cur);
            }
            if ci != ni {
                let fc = a * cur[0] + b * cur[1] - c;
                let fn_ = a * nxt[0] + b * nxt[1] - c;
                let lam = fc / (fc - fn_);
                out.push([cur[0] + lam * (nxt[0] - cur[0]), cur[1] + lam * (nxt[1] - cur[1])]);
            }
        }
        poly = out;
        if poly.is_empty() {
            return 0.0;
        }
    }
    let mut area = 0.0;
    for k in 1..poly.len() - 1 {
        let (u, v, w) = (poly[0], poly[k], poly[k + 1]);
        area += 0.5 * ((v[0] - u[0]) * (w[1] - u[1]) - (w[0] - u[0]) * (v[1] - u[1]));
    }
    area.abs()
}

fn kernel_2d(r: f64, s: f64, log: bool) -> f64 {
    let k = r.powf(-2.0 - 2.0 * s);
    if log {
        k * r.ln()
    } else {
        k
    }
}

/// Identical-pair oracle: reduce to the separation plane with the overlap
/// area from polygon clipping, then integrate each sign sector with graded
/// radial panels and Gauss directions (everything numeric).
pub fn oracle_identical_2d(mesh: &Mesh, e: usize, i: usize, j: usize, s: f64, log: bool) -> f64 {
    let el = mesh.element(e);
    let [p0, p1, p2] = [mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2])];
    let f1 = [p1[0] - p0[0], p1[1] - p0[1]];
    let f2 = [p2[0] - p0[0], p2[1] - p0[1]];
    let area2 = (f1[0] * f2[1] - f1[1] * f2[0]).abs();
    let dvals = |basis: usize| -> (f64, f64) {
        let v: Vec<f64> = el.iter().map(|&g| (g == basis) as usize as f64).collect();
        (v[1] - v[0], v[2] - v[0])
    };
    let (d1i, d2i) = dvals(i);
    let (d1j, d2j) = dvals(j);

    let integrand = |tp: f64, tq: f64| -> f64 {
        let m = simplex_overlap_area(tp, tq);
        if m == 0.0 {
            return 0.0;
        }
        let d = [tp * f1[0] + tq * f2[0], tp * f1[1] + tq * f2[1]];
        let r = d[0].hypot(d[1]);
        let gi = tp * d1i + tq * d2i;
        let gj = tp * d1j + tq * d2j;
        m * kernel_2d(r, s, log) * gi * gj
    };

    // Sector directions t = ρ·(c1(η), c2(η)), η ∈ [0,1]; each sector doubled
    // by the central symmetry of the integrand.
    let sectors: [fn(f64) -> (f64, f64); 3] = [|h| (1.0 - h, h), |h| (1.0, -h), |h| (h, -1.0)];
    let dir_rule = gauss_rule(16);
    let rad_rule = gauss_rule(10);
    let mut total = 0.0;
    for sector in sectors {
        total += dir_rule.integrate(0.0, 1.0, |eta| {
            let (c1, c2) = sector(eta);
            // radial: ∫_0^1 ρ·F(ρ·dir) dρ, graded toward 0.
            let mut acc = 0.0;
            let mut hi = 1.0f64;
            for _ in 0..200 {
                let lo = hi * 0.5;
                acc += rad_rule.integrate(lo, hi, |rho| rho * integrand(rho * c1, rho * c2));
                hi = lo;
                if hi < 1e-26 {
                    break;
                }
            }
            acc
        });
    }
    2.0 * total * area2 * area2
}

/// Vertex-adjacent oracle: direct 4D integration in Duffy coordinates with a
/// quadtree on the radial pair `(s1, s2)` graded into the shared corner.
pub fn oracle_vertex_2d(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    shared: usize,
    i: usize,
    j: usize,
    s: f64,
    log: bool,
) -> f64 {
    let corner = |e: usize| -> ([Point; 3], [usize; 3]) {
        let el = mesh.element(e);
        let mut order = vec![shared];
        order.extend(el.iter().filter(|&&v| v != shared));
        (
            [mesh.vertex(order[0]), mesh.vertex(order[1]), mesh.vertex(order[2])],
            [order[0], order[1], order[2]],
        )
    };
    let (pa, ia) = corner(ea);
    let (pb, ib) = corner(eb);
    let area4 = 4.0 * mesh.element_measure(ea) * mesh.element_measure(eb);
    let nodal = |ids: [usize; 3], basis: usize| -> [f64; 3] {
        [
            (ids[0] == basis) as usize as f64,
            (ids[1] == basis) as usize as f64,
            (ids[2] == basis) as usize as f64,
        ]
    };
    let (nai, naj) = (nodal(ia, i), nodal(ia, j));
    let (nbi, nbj) = (nodal(ib, i), nodal(ib, j));

    let rule = gauss_rule(8);
    // Integrand over ((s1, μ1), (s2, μ2)) with ordered-simplex Duffy maps.
    let cell = |s1lo: f64, s1hi: f64, s2lo: f64, s2hi: f64| -> f64 {
        let mut acc = 0.0;
        for (&t1, &w1) in rule.nodes.iter().zip(&rule.weights) {
            let s1 = s1lo + (s1hi - s1lo) * t1;
            for (&m1, &wm1) in rule.nodes.iter().zip(&rule.weights) {
                let sh_a = [1.0 - s1, s1 - s1 * m1, s1 * m1];
                let x = [
                    pa[0][0] * sh_a[0] + pa[1][0] * sh_a[1] + pa[2][0] * sh_a[2],
                    pa[0][1] * sh_a[0] + pa[1][1] * sh_a[1] + pa[2][1] * sh_a[2],
                ];
                for (&t2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                    let s2 = s2lo + (s2hi - s2lo) * t2;
                    for (&m2, &wm2) in rule.nodes.iter().zip(&rule.weights) {
                        let sh_b = [1.0 - s2, s2 - s2 * m2, s2 * m2];
                        let y = [
                            pb[0][0] * sh_b[0] + pb[1][0] * sh_b[1] + pb[2][0] * sh_b[2],
                            pb[0][1] * sh_b[0] + pb[1][1] * sh_b[1] + pb[2][1] * sh_b[2],
                        ];
                        let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                        let di = (nai[0] * sh_a[0] + nai[1] * sh_a[1] + nai[2] * sh_a[2])
                            - (nbi[0] * sh_b[0] + nbi[1] * sh_b[1] + nbi[2] * sh_b[2]);
                        let dj = (naj[0] * sh_a[0] + naj[1] * sh_a[1] + naj[2] * sh_a[2])
                            - (nbj[0] * sh_b[0] + nbj[1] * sh_b[1] + nbj[2] * sh_b[2]);
                        acc += w1 * wm1 * w2 * wm2
                            * (s1hi - s1lo)
                            * (s2hi - s2lo)
                            * s1
                            * s2
                            * di
                            * dj
                            * kernel_2d(r, s, log);
                    }
                }
            }
        }
        acc
    };

    // Quadtree on (s1, s2) toward the singular corner (0, 0).
    let mut total = 0.0;
    let mut size = 1.0f64;
    for _ in 0..60 {
        let h = size * 0.5;
        total += cell(h, size, 0.0, h) + cell(0.0, h, h, size) + cell(h, size, h, size);
        size = h;
        // The remaining corner contributes O(size^{4-2s}); stop well before
        // vertex-coordinate cancellation can produce r = 0.
        if size < 1e-10 {
            break;
        }
    }
    area4 * total
}

/// Edge-adjacent oracle via the relative-coordinate reduction: the integrand
/// depends only on `(τ, u2, w2)`; the along-edge variable integrates to the
/// elementary length `(1 - max(·))₊`. The 3D corner integral is taken in
/// simplex-radial coordinates with a numerically graded radial integral and
/// kink-split angular pieces.
pub fn oracle_edge_2d(
    mesh: &Mesh,
    ea: usize,
    eb: usize,
    shared: [usize; 2],
    i: usize,
    j: usize,
    s: f64,
    log: bool,
) -> f64 {
    let [v0, v1] = shared;
    let off = |e: usize| -> usize {
        *mesh.element(e).iter().find(|v| !shared.contains(v)).unwrap()
    };
    let (a2, b2) = (off(ea), off(eb));
    let evec = [
        mesh.vertex(v1)[0] - mesh.vertex(v0)[0],
        mesh.vertex(v1)[1] - mesh.vertex(v0)[1],
    ];
    let avec = [
        mesh.vertex(a2)[0] - mesh.vertex(v1)[0],
        mesh.vertex(a2)[1] - mesh.vertex(v1)[1],
    ];
    let bvec = [
        mesh.vertex(b2)[0] - mesh.vertex(v1)[0],
        mesh.vertex(b2)[1] - mesh.vertex(v1)[1],
    ];
    let deltas = |basis: usize| -> (f64, f64, f64) {
        let at = |v: usize| (v == basis) as usize as f64;
        (at(v1) - at(v0), at(a2) - at(v1), at(b2) - at(v1))
    };
    let (dei, dai, dbi) = deltas(i);
    let (dej, daj, dbj) = deltas(j);
    let area4 = 4.0 * mesh.element_measure(ea) * mesh.element_measure(eb);

    // branch +: x−y = τE + u2·A − w2·B, weight (1 − max(u2, τ+w2))₊
    // branch −: x−y = −τE + u2·A − w2·B, weight (1 − max(w2, τ+u2))₊
    let rad_rule = gauss_rule(12);
    let ang_rule = gauss_rule(16);
    let mut total = 0.0;
    for sign in [1.0f64, -1.0] {
        // ω = (ωτ, ωu, ωw) on the simplex; c(ω) = branch-dependent max.
        let point_val = |otau: f64, ou: f64, ow: f64| -> f64 {
            let c = if sign > 0.0 {
                ou.max(otau + ow)
            } else {
                ow.max(otau + ou)
            };
            let rvec = [
                sign * otau * evec[0] + ou * avec[0] - ow * bvec[0],
                sign * otau * evec[1] + ou * avec[1] - ow * bvec[1],
            ];
            let rhat = rvec[0].hypot(rvec[1]);
            let gi = sign * otau * dei + ou * dai - ow * dbi;
            let gj = sign * otau * dej + ou * daj - ow * dbj;
            // Radial integrand: measure ρ² × along-edge length (1-ρc) ×
            // shape product (ρ ĝi)(ρ ĝj) × kernel at r = ρ·|R̂|; graded panels.
            let mut acc = 0.0;
            let mut hi = 1.0 / c;
            for _ in 0..200 {
                let lo = 0.5 * hi;
                acc += rad_rule.integrate(lo, hi, |rho| {
                    rho * rho
                        * (1.0 - rho * c)
                        * (rho * gi)
                        * (rho * gj)
                        * kernel_2d(rho * rhat, s, log)
                });
                hi = lo;
                if hi < 1e-17 / c {
                    break;
                }
            }
            acc
        };
        // Angular integration over the simplex, split along the weight kink
        // (ωu = 1/2 for branch +, ωw = 1/2 for branch −), as sub-triangles in
        // the (ωτ, ωu)-plane (ωw = 1 − ωτ − ωu).
        let tri_hi: [[f64; 2]; 3];
        let tri_lo1: [[f64; 2]; 3];
        let tri_lo2: [[f64; 2]; 3];
        if sign > 0.0 {
            tri_hi = [[0.0, 0.5], [0.5, 0.5], [0.0, 1.0]];
            tri_lo1 = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]];
            tri_lo2 = [[0.0, 0.0], [0.5, 0.5], [0.0, 0.5]];
        } else {
            // kink at ωw = 1/2 ⟺ ωτ + ωu = 1/2.
            tri_hi = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]];
            tri_lo1 = [[0.5, 0.0], [1.0, 0.0], [0.0, 1.0]];
            tri_lo2 = [[0.5, 0.0], [0.0, 1.0], [0.0, 0.5]];
        }
        for tri in [tri_hi, tri_lo1, tri_lo2] {
            // Duffy map of the unit square onto the sub-triangle.
            for (&u, &wu) in ang_rule.nodes.iter().zip(&ang_rule.weights) {
                for (&v, &wv) in ang_rule.nodes.iter().zip(&ang_rule.weights) {
                    let (a, b) = (u * (1.0 - v), u * v);
                    let otau = tri[0][0] + a * (tri[1][0] - tri[0][0]) + b * (tri[2][0] - tri[0][0]);
                    let ou = tri[0][1] + a * (tri[1][1] - tri[0][1]) + b * (tri[2][1] - tri[0][1]);
                    let ow = 1.0 - otau - ou;
                    let jac2 = ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
                        - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
                        .abs();
                    total += wu * wv * u * jac2 * point_val(otau, ou, ow);
                }
            }
        }
    }
    area4 * total
}

/// Plain symmetric Jacobi eigensolver (for dense-oracle comparisons).
pub fn jacobi_eigen(mat: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as usize as f64).collect())
        .collect();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - sn * vkq;
                    v[k][q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let evals: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let evecs: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..n).map(|r| v[r][k]).collect())
        .collect();
    (evals, evecs)
}

/// Generalized symmetric eigen oracle for `A x = λ B x`:
/// plain Cholesky of `B` + Jacobi on the reduced matrix, all hand-rolled.
pub fn generalized_eigen_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    // Cholesky B = L Lᵀ.
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = b[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let forward = |rhs: &[f64]| -> Vec<f64> {
        let mut x = rhs.to_vec();
        for r in 0..n {
            for k in 0..r {
                x[r] -= l[r][k] * x[k];
            }
            x[r] /= l[r][r];
        }
        x
    };
    let backward = |rhs: &[f64]| -> Vec<f64> {
        let mut x = rhs.to_vec();
        for r in (0..n).rev() {
            for k in r + 1..n {
                x[r] -= l[k][r] * x[k];
            }
            x[r] /= l[r][r];
        }
        x
    };
    // C = L⁻¹ A L⁻ᵀ, built column by column.
    let mut c = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let linv_t_col = backward(&e); // L⁻ᵀ e_col
        let a_col: Vec<f64> = (0..n)
            .map(|r| (0..n).map(|k| a[r][k] * linv_t_col[k]).sum())
            .collect();
        let c_col = forward(&a_col);
        for r in 0..n {
            c[r][col] = c_col[r];
        }
    }
    // Symmetrize roundoff.
    for p in 0..n {
        for q in p + 1..n {
            let m = 0.5 * (c[p][q] + c[q][p]);
            c[p][q] = m;
            c[q][p] = m;
        }
    }
    let (evals, yvecs) = jacobi_eigen(&c);
    let xvecs: Vec<Vec<f64>> = yvecs.iter().map(|y| backward(y)).collect();
    (evals, xvecs)
}

/// Adaptive Simpson for scalar oracles.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    rec(f, a, b, simpson(f, a, m, b), tol, 50)
}

/// Full matrix oracle: every entry assembled from the fiber-method pair
/// oracle over all ordered element pairs.
pub fn oracle_assemble_1d(mesh: &Mesh, s: f64, log: bool) -> Vec<Vec<f64>> {
    let n = mesh.num_vertices();
    let ne = mesh.num_elements();
    let mut mat = vec![vec![0.0; n]; n];
    for a in 0..ne {
        for b in a..ne {
            let factor = if a == b { 1.0 } else { 2.0 };
            // union of vertex ids
            let mut ids: Vec<usize> = mesh.element(a).to_vec();
            for &v in mesh.element(b) {
                if !ids.contains(&v) {
                    ids.push(v);
                }
            }
            for &i in &ids {
                for &j in &ids {
                    if j < i {
                        continue;
                    }
                    let v = oracle_pair_entry_1d(mesh, a, b, i, j, s, log);
                    mat[i][j] += factor * v;
                    if i != j {
                        mat[j][i] += factor * v;
                    }
                }
            }
        }
    }
    mat
}

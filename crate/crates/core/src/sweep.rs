//! s-grid experiment harness: reproduces the continuity and differentiability
//! claims numerically over parameter grids and persists results as CSV plus a
//! JSON manifest.
//!
//! Determinism contract: identical (config, seed) produce byte-identical
//! CSVs for any worker count. Assembly merges pair contributions in a fixed
//! order, random probes come from the seeded shift-register generator below,
//! and rows are sorted by (s, sigma, kind, index) before writing. Wall times
//! are recorded in the manifest only, never in CSV rows.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::domain::{
    generate_disc, generate_interval, generate_square, load_mesh, poincare_constant,
    DiscreteFunction, Mesh,
};
use crate::error::{Error, Result};
use crate::forms::{assemble, default_tol, mass, MassMatrix, NonlocalMatrix};
use crate::functions::analytic;
use crate::solve::{dlambda_plus, eig, poisson_solve, s_derivative_solve, DEFAULT_GAP_TOL};
use crate::specfun::{c_ns, DimensionTag, FractionalOrder};
use crate::quadrature::{KernelSpec, KernelWeight};
use crate::util::write_atomic;

/// xorshift64* generator (64-bit shift-register family). Used for every
/// random probe; the seed is recorded in the manifest, so runs are
/// reproducible across platforms.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        // The all-zero state is the one fixed point; displace it.
        XorShift64Star {
            state: if seed == 0 { 0x9e3779b97f4a7c15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545f4914f6cdd1d)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

fn default_refine_lo() -> f64 {
    4.0 / 3.0
}
fn default_refine_hi() -> f64 {
    3.0
}
fn default_gap_tol() -> f64 {
    DEFAULT_GAP_TOL
}
fn default_k() -> usize {
    3
}
fn default_probes() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Per-pair quadrature tolerance; defaults to the dimension default.
    #[serde(default)]
    pub quad_tol: Option<f64>,
    /// Relative eigenvalue-cluster gap tolerance.
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    /// Lower bound of the refinement-ratio acceptance band.
    #[serde(default = "default_refine_lo")]
    pub refine_ratio_lo: f64,
    /// Upper bound of the refinement-ratio acceptance band.
    #[serde(default = "default_refine_hi")]
    pub refine_ratio_hi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_tol: None,
            gap_tol: default_gap_tol(),
            refine_ratio_lo: default_refine_lo(),
            refine_ratio_hi: default_refine_hi(),
        }
    }
}

/// Sweep configuration; the JSON on disk mirrors these field names exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Mesh source: `interval:<n>[:<a>:<b>]`, `square:<n>`, `disc:<n>`, or
    /// `file:<path>`.
    pub mesh: String,
    /// Ascending orders inside the quadrature-quality band `(0.02, 0.98)`.
    pub s_grid: Vec<f64>,
    /// Decreasing positive shifts for difference-quotient checks.
    #[serde(default)]
    pub sigma_ladder: Vec<f64>,
    /// Named analytic right-hand side (default `cospix`).
    #[serde(default)]
    pub f: Option<String>,
    /// Named smooth probes for the form-continuity check.
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default)]
    pub psi: Option<String>,
    /// Check names; each maps to exactly one run operation.
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Eigenvalue count for the continuity scan.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Random probe count per configuration.
    #[serde(default = "default_probes")]
    pub probes: usize,
}

pub const CHECK_NAMES: [&str; 6] = [
    "solution_continuity",
    "diff_quotient",
    "eigen_continuity",
    "dlambda",
    "form_continuity",
    "poincare",
];

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_grid.is_empty() {
            return Err(Error::Config("s_grid must be non-empty".into()));
        }
        if self.s_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("s_grid must be strictly ascending".into()));
        }
        let max_sigma = self.sigma_ladder.iter().cloned().fold(0.0f64, f64::max);
        if self.sigma_ladder.iter().any(|&s| s <= 0.0) {
            return Err(Error::Config("sigma_ladder entries must be positive".into()));
        }
        if self.sigma_ladder.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config("sigma_ladder must be strictly decreasing".into()));
        }
        for &s in &self.s_grid {
            if s <= 0.02 || s >= 0.98 || s + max_sigma >= 0.98 {
                return Err(Error::Config(format!(
                    "s = {s} (with max sigma {max_sigma}) leaves the quadrature-quality band (0.02, 0.98)"
                )));
            }
        }
        for name in &self.checks {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(Error::UnknownCheck(name.clone()));
            }
        }
        Ok(())
    }
}

/// Build a mesh from a source spec string.
pub fn mesh_from_spec(spec: &str) -> Result<Mesh> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["interval", n] => generate_interval(parse_usize(n)?, 0.0, 1.0),
        ["interval", n, a, b] => generate_interval(parse_usize(n)?, parse_f64(a)?, parse_f64(b)?),
        ["square", n] => generate_square(parse_usize(n)?),
        ["disc", n] => generate_disc(parse_usize(n)?),
        ["file", path] => load_mesh(Path::new(path)),
        _ => Err(Error::Config(format!(
            "unrecognized mesh spec `{spec}` (expected interval:<n>[:<a>:<b>], square:<n>, disc:<n>, file:<path>)"
        ))),
    }
}

fn parse_usize(t: &str) -> Result<usize> {
    t.parse().map_err(|_| Error::Config(format!("bad integer `{t}`")))
}

fn parse_f64(t: &str) -> Result<f64> {
    t.parse().map_err(|_| Error::Config(format!("bad number `{t}`")))
}

/// One result row: scalar outcome of a (check, s, sigma) cell. Wall times are
/// tracked per check in the manifest, not per row, to keep CSV bytes
/// reproducible.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub kind: String,
    pub index: Option<usize>,
    pub tag: String,
    pub value: f64,
    pub pass: Option<bool>,
}

/// All rows of one check, plus provenance.
#[derive(Debug, Clone)]
pub struct CheckTable {
    pub check: String,
    pub rows: Vec<SweepRecord>,
    pub mesh_fingerprint: u64,
    pub quad_tol: f64,
}

impl CheckTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }

    /// RFC-4180 CSV with rows sorted by (s, sigma, kind, index); numbers in
    /// shortest round-trip decimal.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| {
            let fa = a.s.unwrap_or(f64::NEG_INFINITY);
            let fb = b.s.unwrap_or(f64::NEG_INFINITY);
            fa.total_cmp(&fb)
                .then_with(|| {
                    a.sigma
                        .unwrap_or(f64::NEG_INFINITY)
                        .total_cmp(&b.sigma.unwrap_or(f64::NEG_INFINITY))
                })
                .then_with(|| a.kind.cmp(&b.kind))
                .then_with(|| a.index.unwrap_or(0).cmp(&b.index.unwrap_or(0)))
                .then_with(|| a.tag.cmp(&b.tag))
        });
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record([
            "check", "s", "sigma", "kind", "index", "tag", "value", "pass", "mesh_fp", "quad_tol",
        ])
        .expect("csv header");
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for r in &rows {
            wtr.write_record([
                self.check.clone(),
                fmt_opt(r.s),
                fmt_opt(r.sigma),
                r.kind.clone(),
                r.index.map(|i| i.to_string()).unwrap_or_default(),
                r.tag.clone(),
                format!("{}", r.value),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
                format!("{:016x}", self.mesh_fingerprint),
                format!("{}", self.quad_tol),
            ])
            .expect("csv row");
        }
        wtr.into_inner().expect("csv buffer")
    }
}

/// Matrix cache shared by the checks of one sweep run.
pub struct SweepContext {
    pub mesh: Mesh,
    pub mass: MassMatrix,
    pub quad_tol: f64,
    matrices: HashMap<(bool, i64), Arc<NonlocalMatrix>>,
}

impl SweepContext {
    pub fn new(mesh: Mesh, quad_tol: Option<f64>) -> Self {
        let quad_tol = quad_tol.unwrap_or_else(|| default_tol(mesh.dim()));
        let mass = mass(&mesh);
        SweepContext {
            mesh,
            mass,
            quad_tol,
            matrices: HashMap::new(),
        }
    }

    /// Assemble (or fetch) the matrix at order `s`; keyed by 12-digit rounding.
    pub fn matrix(&mut self, s: f64, weight: KernelWeight) -> Result<Arc<NonlocalMatrix>> {
        let key = (weight == KernelWeight::Log, (s * 1e12).round() as i64);
        if let Some(m) = self.matrices.get(&key) {
            return Ok(m.clone());
        }
        let kernel = KernelSpec::new(
            DimensionTag::new(self.mesh.dim())?,
            FractionalOrder::new(s)?,
            weight,
        );
        let m = Arc::new(assemble(&self.mesh, &kernel, self.quad_tol)?);
        self.matrices.insert(key, m.clone());
        Ok(m)
    }

    fn solve_at(&mut self, s: f64, f: &DiscreteFunction) -> Result<DiscreteFunction> {
        let a = self.matrix(s, KernelWeight::Plain)?;
        Ok(poisson_solve(&self.mesh, f, &a, &self.mass)?.u)
    }

    fn l2_diff(&self, u: &DiscreteFunction, v: &DiscreteFunction) -> f64 {
        let d: Vec<f64> = u
            .coeffs()
            .iter()
            .zip(v.coeffs())
            .map(|(a, b)| a - b)
            .collect();
        self.mass.l2_norm(&d)
    }
}

/// Data spec: a registry name, or `file:<path>` with one nodal value per line.
fn interp_named(ctx: &SweepContext, name: &str) -> Result<DiscreteFunction> {
    if let Some(path) = name.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        let coeffs: Vec<f64> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad nodal value `{l}` in {path}")))
            })
            .collect::<Result<_>>()?;
        return DiscreteFunction::from_coeffs(&ctx.mesh, coeffs);
    }
    let f = analytic(name, &ctx.mesh)?;
    Ok(DiscreteFunction::interpolate(&ctx.mesh, f))
}

/// Least-squares slope of `ln(err)` against `ln(sigma)` (empirical order).
fn ls_order(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(sig, err) in pairs {
        let (x, y) = (sig.ln(), err.max(1e-300).ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Solution-map continuity: consecutive increments of `u_s` in `L²` plus a
/// grid-refinement ratio at the middle grid point.
pub fn run_solution_continuity(cfg: &SweepConfig, ctx: &mut SweepContext) -> Result<Vec<SweepRecord>> {
    let fname = cfg.f.as_deref().unwrap_or("cospix");
    let f = interp_named(ctx, fname)?;
    let mut rows = Vec::new();
    let mut prev: Option<(f64, DiscreteFunction)> = None;
    for &s in &cfg.s_grid {
        let u = ctx.solve_at(s, &f)?;
        if let Some((s0, u0)) = prev.take() {
            rows.push(SweepRecord {
                s: Some(s0),
                sigma: Some(s - s0),
                kind: "increment".into(),
                index: None,
                tag: fname.into(),
                value: ctx.l2_diff(&u, &u0),
                pass: None,
            });
        }
        prev = Some((s, u));
    }
    // Refinement probe at the middle grid cell.
    if cfg.s_grid.len() >= 2 {
        let mid = (cfg.s_grid.len() - 1) / 2;
        let s0 = cfg.s_grid[mid];
        let delta = cfg.s_grid[mid + 1] - cfg.s_grid[mid];
        let u0 = ctx.solve_at(s0, &f)?;
        let u_full = ctx.solve_at(s0 + delta, &f)?;
        let u_half = ctx.solve_at(s0 + 0.5 * delta, &f)?;
        let inc_full = ctx.l2_diff(&u_full, &u0);
        let inc_half = ctx.l2_diff(&u_half, &u0);
        let ratio = inc_full / inc_half.max(1e-300);
        rows.push(SweepRecord {
            s: Some(s0),
            sigma: Some(delta),
            kind: "probe_ratio".into(),
            index: None,
            tag: fname.into(),
            value: ratio,
            pass: Some(
                ratio >= cfg.tolerances.refine_ratio_lo && ratio <= cfg.tolerances.refine_ratio_hi,
            ),
        });
    }
    Ok(rows)
}

/// Difference-quotient convergence toward the s-derivative solution.
pub fn run_diff_quotient(cfg: &SweepConfig, ctx: &mut SweepContext) -> Result<Vec<SweepRecord>> {
    let fname = cfg.f.as_deref().unwrap_or("cospix");
    let f = interp_named(ctx, fname)?;
    let s = cfg.s_grid[0];
    if cfg.sigma_ladder.is_empty() {
        return Err(Error::Config("diff_quotient requires a sigma_ladder".into()));
    }
    let a = ctx.matrix(s, KernelWeight::Plain)?;
    let l = ctx.matrix(s, KernelWeight::Log)?;
    let u_s = poisson_solve(&ctx.mesh, &f, &a, &ctx.mass)?.u;
    let report = s_derivative_solve(&ctx.mesh, &f, &u_s, &a, &l, &ctx.mass)?;
    let mut rows = Vec::new();
    let mut errs: Vec<(f64, f64)> = Vec::new();
    let mut prev_err = f64::INFINITY;
    for &sigma in &cfg.sigma_ladder {
        let u_shift = ctx.solve_at(s + sigma, &f)?;
        let v_sigma: Vec<f64> = u_shift
            .coeffs()
            .iter()
            .zip(u_s.coeffs())
            .map(|(a, b)| (a - b) / sigma)
            .collect();
        let d: Vec<f64> = v_sigma
            .iter()
            .zip(report.w.coeffs())
            .map(|(a, b)| a - b)
            .collect();
        let err = ctx.mass.l2_norm(&d);
        rows.push(SweepRecord {
            s: Some(s),
            sigma: Some(sigma),
            kind: "quotient_error".into(),
            index: None,
            tag: fname.into(),
            value: err,
            pass: Some(err < prev_err),
        });
        prev_err = err;
        errs.push((sigma, err));
    }
    let tail = &errs[errs.len().saturating_sub(3)..];
    let order = ls_order(tail);
    rows.push(SweepRecord {
        s: Some(s),
        sigma: None,
        kind: "ls_order".into(),
        index: None,
        tag: fname.into(),
        value: order,
        pass: Some(order >= 0.8),
    });
    rows.push(SweepRecord {
        s: Some(s),
        sigma: None,
        kind: "w_residual".into(),
        index: None,
        tag: fname.into(),
        value: report.residual,
        pass: Some(report.residual < 1e-9),
    });
    Ok(rows)
}

/// Eigenvalue continuity over the grid, with cluster annotation and a
/// refinement ratio for the first eigenvalue.
pub fn run_eigen_continuity(cfg: &SweepConfig, ctx: &mut SweepContext) -> Result<Vec<SweepRecord>> {
    let mut rows = Vec::new();
    let mut lambda1: Vec<(f64, f64)> = Vec::new();
    for &s in &cfg.s_grid {
        let a = ctx.matrix(s, KernelWeight::Plain)?;
        let spectrum = eig(&ctx.mesh, cfg.k, &a, &ctx.mass, cfg.tolerances.gap_tol)?;
        for (i, &lam) in spectrum.eigenvalues.iter().enumerate() {
            rows.push(SweepRecord {
                s: Some(s),
                sigma: None,
                kind: "lambda".into(),
                index: Some(i + 1),
                tag: String::new(),
                value: lam,
                pass: Some(lam > 0.0 && (i == 0 || lam >= spectrum.eigenvalues[i - 1])),
            });
        }
        rows.push(SweepRecord {
            s: Some(s),
            sigma: None,
            kind: "cluster_size".into(),
            index: Some(1),
            tag: String::new(),
            value: spectrum.first_cluster_size() as f64,
            pass: None,
        });
        lambda1.push((s, spectrum.eigenvalues[0]));
    }
    for w in lambda1.windows(2) {
        rows.push(SweepRecord {
            s: Some(w[0].0),
            sigma: Some(w[1].0 - w[0].0),
            kind: "increment".into(),
            index: Some(1),
            tag: String::new(),
            value: (w[1].1 - w[0].1).abs(),
            pass: None,
        });
    }
    if cfg.s_grid.len() >= 2 {
        let mid = (cfg.s_grid.len() - 1) / 2;
        let s0 = cfg.s_grid[mid];
        let delta = cfg.s_grid[mid + 1] - s0;
        let lam_at = |ctx: &mut SweepContext, s: f64| -> Result<f64> {
            let a = ctx.matrix(s, KernelWeight::Plain)?;
            Ok(eig(&ctx.mesh, 1, &a, &ctx.mass, cfg.tolerances.gap_tol)?.eigenvalues[0])
        };
        let l0 = lam_at(ctx, s0)?;
        let l_full = lam_at(ctx, s0 + delta)?;
        let l_half = lam_at(ctx, s0 + 0.5 * delta)?;
        let ratio = (l_full - l0).abs() / (l_half - l0).abs().max(1e-300);
        rows.push(SweepRecord {
            s: Some(s0),
            sigma: Some(delta),
            kind: "probe_ratio".into(),
            index: Some(1),
            tag: String::new(),
            value: ratio,
            pass: Some(
                ratio >= cfg.tolerances.refine_ratio_lo && ratio <= cfg.tolerances.refine_ratio_hi,
            ),
        });
    }
    Ok(rows)
}

/// Forward quotients of the first eigenvalue against the one-sided derivative.
pub fn run_dlambda_check(cfg: &SweepConfig, ctx: &mut SweepContext) -> Result<Vec<SweepRecord>> {
    let s = cfg.s_grid[0];
    if cfg.sigma_ladder.is_empty() {
        return Err(Error::Config("dlambda requires a sigma_ladder".into()));
    }
    let a = ctx.matrix(s, KernelWeight::Plain)?;
    let l = ctx.matrix(s, KernelWeight::Log)?;
    let report = dlambda_plus(&ctx.mesh, &a, &l, &ctx.mass, cfg.tolerances.gap_tol)?;
    let simple = report.multiplicity == 1;
    let mut rows = vec![
        SweepRecord {
            s: Some(s),
            sigma: None,
            kind: "dlambda".into(),
            index: None,
            tag: String::new(),
            value: report.value,
            pass: None,
        },
        SweepRecord {
            s: Some(s),
            sigma: None,
            kind: "multiplicity".into(),
            index: None,
            tag: String::new(),
            value: report.multiplicity as f64,
            pass: None,
        },
    ];
    let mut prev_gap = f64::INFINITY;
    for &sigma in &cfg.sigma_ladder {
        let a_shift = ctx.matrix(s + sigma, KernelWeight::Plain)?;
        let spec_shift = eig(&ctx.mesh, 1, &a_shift, &ctx.mass, cfg.tolerances.gap_tol)?;
        let quotient = (spec_shift.eigenvalues[0] - report.lambda1) / sigma;
        let gap = (quotient - report.value).abs();
        rows.push(SweepRecord {
            s: Some(s),
            sigma: Some(sigma),
            kind: "quotient".into(),
            index: None,
            tag: String::new(),
            value: quotient,
            pass: Some(if simple {
                true
            } else {
                quotient >= report.value - 1e-6
            }),
        });
        rows.push(SweepRecord {
            s: Some(s),
            sigma: Some(sigma),
            kind: "gap".into(),
            index: None,
            tag: String::new(),
            value: gap,
            pass: if simple { Some(gap < prev_gap) } else { None },
        });
        prev_gap = gap;
    }
    Ok(rows)
}

/// Continuity of `E_s(φ, ψ)` in the order, for fixed smooth probes.
pub fn run_form_continuity(cfg: &SweepConfig, ctx: &mut SweepContext) -> Result<Vec<SweepRecord>> {
    let phi_name = cfg.phi.as_deref().unwrap_or("cospix");
    let psi_name = cfg.psi.as_deref().unwrap_or("xshift");
    let phi = interp_named(ctx, phi_name)?;
    let psi = interp_named(ctx, psi_name)?;
    let tag = format!("{phi_name},{psi_name}");
    let dim = DimensionTag::new(ctx.mesh.dim())?;
    let mut energies: Vec<(f64, f64)> = Vec::new();
    let mut rows = Vec::new();
    for &alpha in &cfg.s_grid {
        let a = ctx.matrix(alpha, KernelWeight::Plain)?;
        let e = 0.5 * c_ns(dim, FractionalOrder::new(alpha)?)
            * a.quad_form(phi.coeffs(), psi.coeffs());
        rows.push(SweepRecord {
            s: Some(alpha),
            sigma: None,
            kind: "energy".into(),
            index: None,
            tag: tag.clone(),
            value: e,
            pass: None,
        });
        energies.push((alpha, e));
    }
    let increments: Vec<f64> = energies.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    for (i, w) in energies.windows(2).enumerate() {
        // Local-trend jump guard: an increment must not exceed 10x the mean
        // of its neighbors.
        let mut neighbors = Vec::new();
        for j in i.saturating_sub(2)..(i + 3).min(increments.len()) {
            if j != i {
                neighbors.push(increments[j]);
            }
        }
        let trend = neighbors.iter().sum::<f64>() / neighbors.len().max(1) as f64;
        let floor = 1e-14 * energies.iter().map(|e| e.1.abs()).fold(0.0f64, f64::max);
        rows.push(SweepRecord {
            s: Some(w[0].0),
            sigma: Some(w[1].0 - w[0].0),
            kind: "increment".into(),
            index: None,
            tag: tag.clone(),
            value: increments[i],
            pass: Some(neighbors.is_empty() || increments[i] <= (10.0 * trend).max(floor)),
        });
    }
    if cfg.s_grid.len() >= 2 {
        let mid = (cfg.s_grid.len() - 1) / 2;
        let s0 = cfg.s_grid[mid];
        let delta = cfg.s_grid[mid + 1] - s0;
        let e_at = |ctx: &mut SweepContext, alpha: f64| -> Result<f64> {
            let a = ctx.matrix(alpha, KernelWeight::Plain)?;
            Ok(0.5
                * c_ns(dim, FractionalOrder::new(alpha)?)
                * a.quad_form(phi.coeffs(), psi.coeffs()))
        };
        let e0 = e_at(ctx, s0)?;
        let ratio = (e_at(ctx, s0 + delta)? - e0).abs()
            / (e_at(ctx, s0 + 0.5 * delta)? - e0).abs().max(1e-300);
        rows.push(SweepRecord {
            s: Some(s0),
            sigma: Some(delta),
            kind: "probe_ratio".into(),
            index: None,
            tag: tag.clone(),
            value: ratio,
            pass: Some(
                ratio >= cfg.tolerances.refine_ratio_lo && ratio <= cfg.tolerances.refine_ratio_hi,
            ),
        });
    }
    Ok(rows)
}

/// Seeded random zero-mean probes of the discrete fractional Poincaré
/// inequality `‖u‖²_{L²} ≤ γ_{N,s,Ω} |u|²_{H^s}`.
pub fn run_poincare(cfg: &SweepConfig, ctx: &mut SweepContext) -> Result<Vec<SweepRecord>> {
    let mut rows = Vec::new();
    let n = ctx.mesh.num_vertices();
    for &s in &cfg.s_grid {
        let a = ctx.matrix(s, KernelWeight::Plain)?;
        let gamma = poincare_constant(&ctx.mesh, FractionalOrder::new(s)?);
        let mut rng = XorShift64Star::new(cfg.seed ^ (s.to_bits().rotate_left(17)));
        for probe in 0..cfg.probes {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.next_signed()).collect();
            let mut u = DiscreteFunction::from_coeffs(&ctx.mesh, coeffs)?;
            u.project_zero_mean(&ctx.mesh);
            let lhs = ctx.mass.quad_form(u.coeffs(), u.coeffs());
            let rhs = gamma * a.quad_form(u.coeffs(), u.coeffs());
            let ratio = lhs / rhs.max(f64::MIN_POSITIVE);
            rows.push(SweepRecord {
                s: Some(s),
                sigma: None,
                kind: "probe".into(),
                index: Some(probe),
                tag: String::new(),
                value: ratio,
                pass: Some(ratio <= 1.0 + 1e-12),
            });
        }
    }
    Ok(rows)
}

/// Outcome summary of a sweep or check-suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub output_dir: PathBuf,
    pub failures: BTreeMap<String, usize>,
    pub rows: BTreeMap<String, usize>,
    pub pass: bool,
}

fn run_check_by_name(
    name: &str,
    cfg: &SweepConfig,
    ctx: &mut SweepContext,
) -> Result<Vec<SweepRecord>> {
    match name {
        "solution_continuity" => run_solution_continuity(cfg, ctx),
        "diff_quotient" => run_diff_quotient(cfg, ctx),
        "eigen_continuity" => run_eigen_continuity(cfg, ctx),
        "dlambda" => run_dlambda_check(cfg, ctx),
        "form_continuity" => run_form_continuity(cfg, ctx),
        "poincare" => run_poincare(cfg, ctx),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// Execute every configured check, write one CSV per check plus
/// `manifest.json`, and return the summary.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let mesh = mesh_from_spec(&cfg.mesh)?;
    let mut ctx = SweepContext::new(mesh, cfg.tolerances.quad_tol);
    let mut tables = Vec::new();
    let mut wall_ms = BTreeMap::new();
    for name in CHECK_NAMES {
        if !cfg.checks.iter().any(|c| c == name) {
            continue;
        }
        let start = Instant::now();
        let rows = run_check_by_name(name, cfg, &mut ctx)?;
        wall_ms.insert(name.to_string(), start.elapsed().as_millis() as u64);
        tables.push(CheckTable {
            check: name.to_string(),
            rows,
            mesh_fingerprint: ctx.mesh.fingerprint(),
            quad_tol: ctx.quad_tol,
        });
    }
    write_outputs(&cfg.output_dir, &tables, &wall_ms, serde_json::to_value(cfg)?, cfg.seed)
}

/// Persist tables and manifest; shared by sweeps and the built-in suite.
fn write_outputs(
    out_dir: &Path,
    tables: &[CheckTable],
    wall_ms: &BTreeMap<String, u64>,
    config_echo: serde_json::Value,
    seed: u64,
) -> Result<SweepSummary> {
    std::fs::create_dir_all(out_dir)?;
    let mut failures = BTreeMap::new();
    let mut row_counts = BTreeMap::new();
    for table in tables {
        write_atomic(&out_dir.join(format!("{}.csv", table.check)), &table.to_csv())?;
        failures.insert(table.check.clone(), table.failures());
        row_counts.insert(table.check.clone(), table.rows.len());
    }
    let pass = failures.values().all(|&f| f == 0);
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": config_echo,
        "wall_ms": wall_ms,
        "summary": {
            "rows": row_counts,
            "failures": failures,
            "pass": pass,
        },
        "notes": {
            "refinement_ratio_band": "engineering choice; no quantitative modulus of continuity is available",
        },
    });
    write_atomic(
        &out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    Ok(SweepSummary {
        output_dir: out_dir.to_path_buf(),
        failures,
        rows: row_counts,
        pass,
    })
}

/// Built-in property suite behind `fraclap check`: scalar-function bounds and
/// identities, assembly invariants, Poincaré probes, and Rayleigh bounds,
/// written as one CSV per group.
pub fn run_builtin_checks(out_dir: &Path, seed: u64) -> Result<SweepSummary> {
    let mut tables = Vec::new();
    let mut wall_ms = BTreeMap::new();

    // specfun bounds & derivative cross-check.
    let start = Instant::now();
    let mut rows = Vec::new();
    for n in 1..=3usize {
        let dim = DimensionTag::new(n)?;
        let bound = crate::specfun::c_ns_bound(dim);
        for i in 1..=99usize {
            let s = i as f64 / 100.0;
            let order = FractionalOrder::new(s)?;
            let c = c_ns(dim, order);
            rows.push(SweepRecord {
                s: Some(s),
                sigma: None,
                kind: "c_over_bound".into(),
                index: Some(n),
                tag: String::new(),
                value: c / bound,
                pass: Some(c > 0.0 && c <= bound),
            });
            let h = 1e-6;
            let fd = (c_ns(dim, FractionalOrder::new(s + h)?)
                - c_ns(dim, FractionalOrder::new(s - h)?))
                / (2.0 * h);
            let dc = crate::specfun::dc_ns(dim, order);
            let err = (dc - fd).abs();
            let pass = err <= 1e-6 * dc.abs().max(fd.abs()) || err <= 1e-8 * bound;
            rows.push(SweepRecord {
                s: Some(s),
                sigma: None,
                kind: "dc_fd_error".into(),
                index: Some(n),
                tag: String::new(),
                value: err,
                pass: Some(pass),
            });
        }
    }
    wall_ms.insert("specfun".into(), start.elapsed().as_millis() as u64);
    tables.push(CheckTable {
        check: "specfun".into(),
        rows,
        mesh_fingerprint: 0,
        quad_tol: 0.0,
    });

    // ψ_σ identity on seeded pairs.
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut rng = XorShift64Star::new(seed);
    for i in 0..10_000usize {
        let r = (rng.next_signed() * 3.0).exp();
        let sigma = 0.5 * rng.next_f64();
        let psi = crate::specfun::psi_sigma(r, sigma)?;
        let residual = (r.powf(-2.0 * sigma) - 1.0 + 2.0 * sigma * psi * r.ln()).abs();
        rows.push(SweepRecord {
            s: None,
            sigma: Some(sigma),
            kind: "identity_residual".into(),
            index: Some(i),
            tag: String::new(),
            value: residual,
            pass: Some(residual <= 1e-12),
        });
    }
    wall_ms.insert("psi_identity".into(), start.elapsed().as_millis() as u64);
    tables.push(CheckTable {
        check: "psi_identity".into(),
        rows,
        mesh_fingerprint: 0,
        quad_tol: 0.0,
    });

    // Logarithmic decay bound over a wide grid.
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut idx = 0;
    for exp10 in -6..=6i32 {
        for mantissa in [1.0f64, 3.0] {
            let r = mantissa * 10f64.powi(exp10);
            for eps0 in [0.1, 0.5, 1.0] {
                let b = crate::specfun::log_decay_bound(r, eps0, 1.0)?;
                rows.push(SweepRecord {
                    s: None,
                    sigma: Some(eps0),
                    kind: "log_decay".into(),
                    index: Some(idx),
                    tag: format!("r={r}"),
                    value: b.abs_log,
                    pass: Some(b.abs_log <= b.bound() * (1.0 + 1e-12)),
                });
                idx += 1;
            }
        }
    }
    wall_ms.insert("log_decay".into(), start.elapsed().as_millis() as u64);
    tables.push(CheckTable {
        check: "log_decay".into(),
        rows,
        mesh_fingerprint: 0,
        quad_tol: 0.0,
    });

    // Assembly invariants on small meshes.
    let start = Instant::now();
    let mut rows = Vec::new();
    for (tag, mesh) in [
        ("interval16", generate_interval(16, 0.0, 1.0)?),
        ("interval12w", generate_interval(12, 0.0, 2.0)?),
        ("square2", generate_square(2)?),
    ] {
        let quad_tol = default_tol(mesh.dim());
        let m = mass(&mesh);
        for s in [0.3, 0.5, 0.7] {
            let kernel = KernelSpec::new(
                DimensionTag::new(mesh.dim())?,
                FractionalOrder::new(s)?,
                KernelWeight::Plain,
            );
            let a = assemble(&mesh, &kernel, quad_tol)?;
            rows.push(SweepRecord {
                s: Some(s),
                sigma: None,
                kind: "null_defect".into(),
                index: None,
                tag: tag.into(),
                value: a.constant_null_defect(),
                pass: Some(a.constant_null_defect() < 1e-8),
            });
            let spectrum = eig(&mesh, 1, &a, &m, DEFAULT_GAP_TOL)?;
            rows.push(SweepRecord {
                s: Some(s),
                sigma: None,
                kind: "lambda1".into(),
                index: None,
                tag: tag.into(),
                value: spectrum.eigenvalues[0],
                pass: Some(spectrum.eigenvalues[0] > 0.0),
            });
        }
    }
    wall_ms.insert("assembly".into(), start.elapsed().as_millis() as u64);
    tables.push(CheckTable {
        check: "assembly".into(),
        rows,
        mesh_fingerprint: 0,
        quad_tol: 0.0,
    });

    // Poincaré probes.
    let start = Instant::now();
    let mut rows = Vec::new();
    for (tag, mesh, s_values) in [
        ("interval32", generate_interval(32, 0.0, 1.0)?, vec![0.25, 0.5, 0.75]),
        ("square2", generate_square(2)?, vec![0.5]),
    ] {
        let cfg = SweepConfig {
            mesh: String::new(),
            s_grid: s_values,
            sigma_ladder: vec![],
            f: None,
            phi: None,
            psi: None,
            checks: vec![],
            tolerances: Tolerances::default(),
            output_dir: PathBuf::new(),
            seed,
            k: 1,
            probes: 200,
        };
        let mut ctx = SweepContext::new(mesh, None);
        for mut r in run_poincare(&cfg, &mut ctx)? {
            r.tag = tag.into();
            rows.push(r);
        }
    }
    wall_ms.insert("poincare".into(), start.elapsed().as_millis() as u64);
    tables.push(CheckTable {
        check: "poincare".into(),
        rows,
        mesh_fingerprint: 0,
        quad_tol: 0.0,
    });

    // Rayleigh lower bound of the first eigenvalue.
    let start = Instant::now();
    let mut rows = Vec::new();
    {
        let mesh = generate_interval(24, 0.0, 1.0)?;
        let m = mass(&mesh);
        let kernel = KernelSpec::new(
            DimensionTag::new(1)?,
            FractionalOrder::new(0.5)?,
            KernelWeight::Plain,
        );
        let a = assemble(&mesh, &kernel, default_tol(1))?;
        let spectrum = eig(&mesh, 3, &a, &m, DEFAULT_GAP_TOL)?;
        for (i, &lam) in spectrum.eigenvalues.iter().enumerate() {
            rows.push(SweepRecord {
                s: Some(0.5),
                sigma: None,
                kind: "lambda".into(),
                index: Some(i + 1),
                tag: "interval24".into(),
                value: lam,
                pass: Some(lam > 0.0),
            });
        }
        let c = c_ns(DimensionTag::new(1)?, FractionalOrder::new(0.5)?);
        let mut rng = XorShift64Star::new(seed ^ 0xabcdef);
        for probe in 0..100usize {
            let coeffs: Vec<f64> = (0..mesh.num_vertices()).map(|_| rng.next_signed()).collect();
            let mut u = DiscreteFunction::from_coeffs(&mesh, coeffs)?;
            u.project_zero_mean(&mesh);
            let rayleigh = 0.5 * c * a.quad_form(u.coeffs(), u.coeffs())
                / m.quad_form(u.coeffs(), u.coeffs());
            rows.push(SweepRecord {
                s: Some(0.5),
                sigma: None,
                kind: "rayleigh_excess".into(),
                index: Some(probe),
                tag: "interval24".into(),
                value: rayleigh - spectrum.eigenvalues[0],
                pass: Some(rayleigh >= spectrum.eigenvalues[0] - 1e-9),
            });
        }
    }
    wall_ms.insert("rayleigh".into(), start.elapsed().as_millis() as u64);
    tables.push(CheckTable {
        check: "rayleigh".into(),
        rows,
        mesh_fingerprint: 0,
        quad_tol: 0.0,
    });

    write_outputs(
        out_dir,
        &tables,
        &wall_ms,
        serde_json::json!({"suite": "builtin", "seed": seed}),
        seed,
    )
}

//! Solvers: zero-mean Poisson problem, nontrivial eigenproblem, the
//! s-derivative equation of the solution map, and the one-sided derivative of
//! the first nontrivial eigenvalue.
//!
//! All solvers work on the zero-mean subspace `{u : 𝟙ᵀM u = 0}`. The linear
//! solves enforce the constraint by a single scalar Lagrange multiplier,
//! which keeps the system symmetric and the constraint exact. The
//! eigenproblem reduces `(C/2)A v = λ M v` to a standard symmetric problem
//! through the Cholesky factor of `M`; the zero eigenvalue of the constant
//! mode is dropped and never returned.

use nalgebra::{DMatrix, DVector};

use crate::domain::{DiscreteFunction, Mesh};
use crate::error::{Error, Result};
use crate::forms::{MassMatrix, NonlocalMatrix};
use crate::specfun::{c_ns, dc_ns};

/// Relative gap below which neighboring eigenvalues count as one cluster.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

/// Hard rejection threshold for non-zero-mean data, as a fraction of
/// `‖f‖_{L²}·|Ω|^{1/2}` (the Cauchy–Schwarz bound on the mass).
const MEAN_REJECT_RATIO: f64 = 1e-3;

/// Ascending nontrivial eigenvalues with `L²`-orthonormal zero-mean
/// eigenvectors and a multiplicity-cluster annotation.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<DiscreteFunction>,
    /// Half-open index ranges of gap-clusters, covering `0..eigenvalues.len()`.
    pub clusters: Vec<(usize, usize)>,
    /// Absolute gap threshold used for clustering.
    pub gap_threshold: f64,
}

impl Spectrum {
    /// Size of the cluster containing the first eigenvalue.
    pub fn first_cluster_size(&self) -> usize {
        self.clusters.first().map_or(1, |&(a, b)| b - a)
    }
}

/// Result of the Poisson solve, carrying the mean projection diagnostics.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub u: DiscreteFunction,
    /// Mass `∫_Ω f dx` removed from the data by projection.
    pub projected_mass: f64,
    /// `|∫ f| / (‖f‖_{L²} |Ω|^{1/2})`; 1 is the Cauchy–Schwarz maximum.
    pub mass_ratio: f64,
    /// Relative residual of the saddle solve.
    pub residual: f64,
}

/// Solution of the s-derivative equation `(C/2)A w = -(∂_sC/C)Mf + C·L u`.
#[derive(Debug, Clone)]
pub struct SDerivativeReport {
    pub s: f64,
    pub w: DiscreteFunction,
    pub residual: f64,
}

/// One-sided derivative of the first nontrivial eigenvalue.
#[derive(Debug, Clone)]
pub struct DLambdaReport {
    pub s: f64,
    pub lambda1: f64,
    /// `∂⁺_s λ_{1,s}`: the infimum of `J_s` over the eigenvalue cluster.
    pub value: f64,
    /// Dimension of the `λ_{1,s}` gap-cluster.
    pub multiplicity: usize,
    /// Cluster member attaining the infimum (unit `L²` norm, zero mean).
    pub minimizer: DiscreteFunction,
    /// `J_s` values over the extremal directions of the cluster, ascending.
    pub cluster_js: Vec<f64>,
}

fn check_pair(a: &NonlocalMatrix, m: &MassMatrix) -> Result<()> {
    if a.mesh_fingerprint() != m.mesh_fingerprint() {
        return Err(Error::FingerprintMismatch {
            expected: a.mesh_fingerprint(),
            got: m.mesh_fingerprint(),
        });
    }
    Ok(())
}

/// Solve the augmented symmetric system
/// `[[S, w], [wᵀ, 0]] [u; μ] = [b; 0]` with `w = M𝟙`.
fn saddle_solve(s_mat: &DMatrix<f64>, m: &MassMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = s_mat.nrows();
    let ones = vec![1.0; n];
    let w = m.apply(&ones);
    let mut k = DMatrix::<f64>::zeros(n + 1, n + 1);
    k.view_mut((0, 0), (n, n)).copy_from(s_mat);
    for i in 0..n {
        k[(i, n)] = w[i];
        k[(n, i)] = w[i];
    }
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for i in 0..n {
        rhs[i] = b[i];
    }
    let lu = nalgebra::linalg::LU::new(k.clone());
    let z = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SolveFailure("singular saddle system".into()))?;
    let u: Vec<f64> = z.as_slice()[..n].to_vec();
    let residual = (&k * &z - &rhs).amax();
    let scale = rhs.amax().max(f64::MIN_POSITIVE);
    Ok((u, residual / scale))
}

/// Solve the zero-mean Poisson problem `(C_{N,s}/2)·A_s u = M f` on the
/// zero-mean subspace. Data with a small mean defect is projected; data that
/// is clearly not zero-mean is rejected with the projected mass reported.
pub fn poisson_solve(
    mesh: &Mesh,
    f: &DiscreteFunction,
    a: &NonlocalMatrix,
    m: &MassMatrix,
) -> Result<PoissonSolution> {
    check_pair(a, m)?;
    a.check_mesh(mesh)?;
    f.check_mesh(mesh)?;
    if !a.is_plain() {
        return Err(Error::InvalidArgument(
            "poisson_solve requires the Plain-weight matrix".into(),
        ));
    }
    let mut fv = f.clone();
    let norm = m.l2_norm(fv.coeffs());
    let projected_mass = fv.project_zero_mean(mesh);
    let mass_ratio = projected_mass.abs()
        / (norm * mesh.measure().sqrt()).max(f64::MIN_POSITIVE);
    if mass_ratio > MEAN_REJECT_RATIO {
        return Err(Error::NonZeroMeanData {
            mass: projected_mass,
            relative: mass_ratio,
        });
    }
    let c = c_ns(a.kernel().dim, a.kernel().order);
    let s_mat = a.matrix() * (0.5 * c);
    let b = m.apply(fv.coeffs());
    let (mut u, residual) = saddle_solve(&s_mat, m, &b)?;
    // The multiplier enforces the constraint exactly up to roundoff; clean it.
    let mut uf = DiscreteFunction::from_coeffs(mesh, std::mem::take(&mut u))?;
    uf.project_zero_mean(mesh);
    Ok(PoissonSolution {
        u: uf,
        projected_mass,
        mass_ratio,
        residual,
    })
}

/// All eigenpairs of the pencil `(S, M)` via the Cholesky reduction, ascending.
fn dense_pencil(
    s_mat: &DMatrix<f64>,
    m: &MassMatrix,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let chol = nalgebra::linalg::Cholesky::new(m.matrix().clone())
        .ok_or_else(|| Error::EigenFailure("mass matrix not positive definite".into()))?;
    let l = chol.l();
    // Z = L⁻¹ S L⁻ᵀ
    let w = l
        .solve_lower_triangular(s_mat)
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let z_t = l
        .solve_lower_triangular(&w.transpose())
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let mut z = z_t.transpose();
    // Symmetrize roundoff.
    let n = z.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (z[(i, j)] + z[(j, i)]);
            z[(i, j)] = v;
            z[(j, i)] = v;
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(z);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let lt = l.transpose();
    let mut evals = Vec::with_capacity(n);
    let mut evecs = Vec::with_capacity(n);
    for &idx in &order {
        evals.push(eig.eigenvalues[idx]);
        let y = eig.eigenvectors.column(idx).into_owned();
        let x = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
        evecs.push(x.as_slice().to_vec());
    }
    Ok((evals, evecs))
}

/// Reference direction for the eigenvector sign convention: the first
/// coordinate, projected to zero mean.
fn sign_reference(mesh: &Mesh) -> Vec<f64> {
    let mut r: Vec<f64> = mesh.vertices().iter().map(|v| v[0]).collect();
    let mut rf = DiscreteFunction::from_coeffs(mesh, std::mem::take(&mut r)).unwrap();
    rf.project_zero_mean(mesh);
    rf.coeffs().to_vec()
}

fn fix_sign(v: &mut [f64], reference: &[f64], m: &MassMatrix) {
    let ip = m.quad_form(v, reference);
    let flip = if ip.abs() > 1e-10 {
        ip < 0.0
    } else {
        // Tie-break: positive first entry of meaningful size.
        match v.iter().find(|x| x.abs() > 1e-10) {
            Some(x) => *x < 0.0,
            None => false,
        }
    };
    if flip {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// First `k` nontrivial eigenpairs of `(C_{N,s}/2)·A_s v = λ M v` restricted
/// to the zero-mean subspace, ascending and `M`-orthonormal.
pub fn eig(
    mesh: &Mesh,
    k: usize,
    a: &NonlocalMatrix,
    m: &MassMatrix,
    gap_tol: f64,
) -> Result<Spectrum> {
    check_pair(a, m)?;
    a.check_mesh(mesh)?;
    if !a.is_plain() {
        return Err(Error::InvalidArgument("eig requires the Plain-weight matrix".into()));
    }
    let n = mesh.num_vertices();
    if k == 0 || k >= n - 1 {
        return Err(Error::InvalidArgument(format!(
            "requested k = {k} eigenpairs outside 1..{}",
            n - 1
        )));
    }
    let c = c_ns(a.kernel().dim, a.kernel().order);
    let s_mat = a.matrix() * (0.5 * c);
    let (evals, evecs) = dense_pencil(&s_mat, m)?;
    // The constant mode carries the (near-)zero eigenvalue; drop exactly one.
    let lambda1 = evals[1];
    if evals[0].abs() > 1e-6 * lambda1.abs().max(1.0) {
        return Err(Error::EigenFailure(format!(
            "expected a zero eigenvalue for the constant mode, got {}",
            evals[0]
        )));
    }
    let reference = sign_reference(mesh);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for idx in 1..=k {
        let lambda = evals[idx];
        if lambda <= 0.0 {
            return Err(Error::EigenFailure(format!(
                "nontrivial eigenvalue {idx} is not positive: {lambda}"
            )));
        }
        let mut v = evecs[idx].clone();
        // Clean the constant component and normalize in M.
        let mut vf = DiscreteFunction::from_coeffs(mesh, v)?;
        vf.project_zero_mean(mesh);
        v = vf.coeffs().to_vec();
        let nrm = m.l2_norm(&v);
        for x in &mut v {
            *x /= nrm;
        }
        fix_sign(&mut v, &reference, m);
        // Residual acceptance: ‖S v - λ M v‖ ≤ 1e-8 ‖S v‖.
        let sv = {
            let vv = DVector::from_column_slice(&v);
            (&s_mat * vv).as_slice().to_vec()
        };
        let mv = m.apply(&v);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..n {
            num += (sv[i] - lambda * mv[i]).powi(2);
            den += sv[i].powi(2);
        }
        if num.sqrt() > 1e-8 * den.sqrt().max(f64::MIN_POSITIVE) {
            return Err(Error::EigenFailure(format!(
                "eigenpair {idx} residual {:e} exceeds 1e-8 relative",
                num.sqrt() / den.sqrt()
            )));
        }
        eigenvalues.push(lambda);
        let mut vf = DiscreteFunction::from_coeffs(mesh, v)?;
        vf.project_zero_mean(mesh);
        eigenvectors.push(vf);
    }
    // Chained gap clustering.
    let threshold = gap_tol * eigenvalues[0].abs();
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..eigenvalues.len() {
        if eigenvalues[i] - eigenvalues[i - 1] > threshold {
            clusters.push((start, i));
            start = i;
        }
    }
    clusters.push((start, eigenvalues.len()));
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        clusters,
        gap_threshold: threshold,
    })
}

/// Solve the s-derivative equation: zero-mean `w` with
/// `(C_{N,s}/2)·A_s w = -(∂_sC_{N,s}/C_{N,s})·M f + C_{N,s}·L_s u_s`.
pub fn s_derivative_solve(
    mesh: &Mesh,
    f: &DiscreteFunction,
    u_s: &DiscreteFunction,
    a: &NonlocalMatrix,
    l: &NonlocalMatrix,
    m: &MassMatrix,
) -> Result<SDerivativeReport> {
    check_pair(a, m)?;
    a.check_mesh(mesh)?;
    l.check_mesh(mesh)?;
    f.check_mesh(mesh)?;
    u_s.check_mesh(mesh)?;
    if !a.is_plain() || l.is_plain() {
        return Err(Error::InvalidArgument(
            "s_derivative_solve takes (Plain, Log) matrices in that order".into(),
        ));
    }
    if a.kernel().order != l.kernel().order {
        return Err(Error::InvalidArgument(
            "Plain and Log matrices must share the same order s".into(),
        ));
    }
    let (dim, order) = (a.kernel().dim, a.kernel().order);
    let c = c_ns(dim, order);
    let dc = dc_ns(dim, order);
    let s_mat = a.matrix() * (0.5 * c);
    let mf = m.apply(f.coeffs());
    let lu = l.apply(u_s.coeffs());
    let b: Vec<f64> = mf
        .iter()
        .zip(&lu)
        .map(|(mf_i, lu_i)| -(dc / c) * mf_i + c * lu_i)
        .collect();
    let (w, residual) = saddle_solve(&s_mat, m, &b)?;
    let mut wf = DiscreteFunction::from_coeffs(mesh, w)?;
    wf.project_zero_mean(mesh);
    Ok(SDerivativeReport {
        s: order.value(),
        w: wf,
        residual,
    })
}

/// `J_s(u) = (∂_sC_{N,s}/C_{N,s})·λ - C_{N,s}·uᵀ L_s u` for an
/// `L²`-normalized zero-mean eigenfunction `u`.
pub fn j_s(
    u: &DiscreteFunction,
    lambda: f64,
    l: &NonlocalMatrix,
    m: &MassMatrix,
) -> Result<f64> {
    check_pair(l, m)?;
    if l.is_plain() {
        return Err(Error::InvalidArgument("j_s requires the Log-weight matrix".into()));
    }
    let norm2 = m.quad_form(u.coeffs(), u.coeffs());
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::NormalizationViolated(norm2));
    }
    let (dim, order) = (l.kernel().dim, l.kernel().order);
    let c = c_ns(dim, order);
    let dc = dc_ns(dim, order);
    Ok((dc / c) * lambda - c * l.quad_form(u.coeffs(), u.coeffs()))
}

/// One-sided derivative `∂⁺_s λ_{1,s}`: the infimum of `J_s` over the
/// `λ_{1,s}` cluster span, realized through the extremal eigenvalue of the
/// cluster-projected log form. Reduces to `J_s(u_{1,s})` for a simple
/// eigenvalue.
pub fn dlambda_plus(
    mesh: &Mesh,
    a: &NonlocalMatrix,
    l: &NonlocalMatrix,
    m: &MassMatrix,
    gap_tol: f64,
) -> Result<DLambdaReport> {
    check_pair(a, m)?;
    check_pair(l, m)?;
    if a.kernel().order != l.kernel().order {
        return Err(Error::InvalidArgument(
            "Plain and Log matrices must share the same order s".into(),
        ));
    }
    // Enough eigenvalues to see past any first cluster.
    let n = mesh.num_vertices();
    let k = (n - 2).min(8).max(2);
    let spectrum = eig(mesh, k, a, m, gap_tol)?;
    let lambda1 = spectrum.eigenvalues[0];
    let window = gap_tol * lambda1.abs();
    let mult = spectrum
        .eigenvalues
        .iter()
        .take_while(|&&lam| lam - lambda1 <= window)
        .count();
    let (dim, order) = (a.kernel().dim, a.kernel().order);
    let c = c_ns(dim, order);
    let dc = dc_ns(dim, order);
    // Projected log form over the M-orthonormal cluster basis.
    let mut s_small = DMatrix::<f64>::zeros(mult, mult);
    for p in 0..mult {
        let lv = l.apply(spectrum.eigenvectors[p].coeffs());
        for q in 0..mult {
            let val: f64 = spectrum.eigenvectors[q]
                .coeffs()
                .iter()
                .zip(&lv)
                .map(|(x, y)| x * y)
                .sum();
            s_small[(q, p)] = val;
        }
    }
    for p in 0..mult {
        for q in 0..p {
            let v = 0.5 * (s_small[(p, q)] + s_small[(q, p)]);
            s_small[(p, q)] = v;
            s_small[(q, p)] = v;
        }
    }
    let sub_eig = nalgebra::linalg::SymmetricEigen::new(s_small);
    let mut idx: Vec<usize> = (0..mult).collect();
    idx.sort_by(|&p, &q| sub_eig.eigenvalues[p].total_cmp(&sub_eig.eigenvalues[q]));
    // inf J_s ⟺ sup of the log form over the cluster.
    let top = idx[mult - 1];
    let theta = sub_eig.eigenvalues[top];
    let value = (dc / c) * lambda1 - c * theta;
    let cluster_js: Vec<f64> = idx
        .iter()
        .rev()
        .map(|&p| (dc / c) * lambda1 - c * sub_eig.eigenvalues[p])
        .collect();
    let coeffs_len = mesh.num_vertices();
    let mut minimizer = vec![0.0; coeffs_len];
    for p in 0..mult {
        let w = sub_eig.eigenvectors[(p, top)];
        for (mi, vi) in minimizer.iter_mut().zip(spectrum.eigenvectors[p].coeffs()) {
            *mi += w * vi;
        }
    }
    let nrm = m.l2_norm(&minimizer);
    for x in &mut minimizer {
        *x /= nrm;
    }
    fix_sign(&mut minimizer, &sign_reference(mesh), m);
    let mut mf = DiscreteFunction::from_coeffs(mesh, minimizer)?;
    mf.project_zero_mean(mesh);
    Ok(DLambdaReport {
        s: order.value(),
        lambda1,
        value,
        multiplicity: mult,
        minimizer: mf,
        cluster_js,
    })
}

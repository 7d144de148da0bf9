//! `fraclap`: assembly, solves, eigen computation, derivative checks, and
//! sweeps for the regional fractional Laplacian on bounded domains.
//!
//! Exit codes: 0 success, 1 domain/validation error, 2 usage error.
//! Output files are staged in a temporary sibling and renamed on success, so
//! failures leave no partial output behind.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fraclap_core::domain::DiscreteFunction;
use fraclap_core::forms::{assemble, default_tol, mass};
use fraclap_core::functions::analytic;
use fraclap_core::pv::{pv_apply, PvOptions};
use fraclap_core::quadrature::{KernelSpec, KernelWeight};
use fraclap_core::solve::{dlambda_plus, eig, poisson_solve, DEFAULT_GAP_TOL};
use fraclap_core::specfun::{DimensionTag, FractionalOrder};
use fraclap_core::sweep::{mesh_from_spec, run_builtin_checks, run_sweep, SweepConfig};
use fraclap_core::util::write_atomic;
use fraclap_core::{Error, Mesh};

fn parse_order(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("the fractional order s must lie in the open interval (0, 1), got {v}"))
    }
}

/// Comma-separated strictly decreasing positive shifts.
#[derive(Clone, Debug)]
struct SigmaLadder(Vec<f64>);

fn parse_sigma_ladder(text: &str) -> Result<SigmaLadder, String> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad sigma `{t}`")))
        .collect::<Result<_, _>>()?;
    if vals.is_empty() || vals.iter().any(|&v| v <= 0.0) {
        return Err("sigma ladder must contain positive values".into());
    }
    if vals.windows(2).any(|w| w[0] <= w[1]) {
        return Err("sigma ladder must be strictly decreasing".into());
    }
    Ok(SigmaLadder(vals))
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Plain,
    Log,
}

impl From<KernelArg> for KernelWeight {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Plain => KernelWeight::Plain,
            KernelArg::Log => KernelWeight::Log,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fraclap",
    version,
    about = "Regional fractional Laplacian laboratory: assembly, solves, eigenvalues, derivative checks, sweeps"
)]
struct Cli {
    /// Worker threads (default: machine parallelism). Affects speed only,
    /// never results.
    #[arg(long, global = true, env = "FRACLAP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the nonlocal matrix and write it in Matrix Market format.
    Assemble {
        /// Mesh source: interval:<n>[:<a>:<b>], square:<n>, disc:<n>, file:<path>.
        #[arg(long)]
        mesh: String,
        /// Fractional order in (0, 1).
        #[arg(long, value_parser = parse_order)]
        s: f64,
        /// Kernel weight.
        #[arg(long, value_enum, default_value = "plain")]
        kernel: KernelArg,
        /// Per-pair quadrature tolerance (default: dimension default).
        #[arg(long)]
        tol: Option<f64>,
        /// Output path (.mtx).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the zero-mean Poisson problem and write nodal values as CSV.
    Solve {
        #[arg(long)]
        mesh: String,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        /// Named analytic right-hand side (cospix, cos2pix, legendre2, xshift, bump).
        #[arg(long, default_value = "cospix")]
        f: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the first k nontrivial eigenpairs; print eigenvalues, write
    /// eigenvectors.
    Eig {
        #[arg(long)]
        mesh: String,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Relative eigenvalue gap below which neighbors form one cluster.
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        gap_tol: f64,
        #[arg(long)]
        tol: Option<f64>,
        /// Optional eigenvector CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-sided derivative of the first nontrivial eigenvalue, with forward
    /// difference quotients for comparison.
    Dlambda {
        #[arg(long)]
        mesh: String,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        /// Comma-separated decreasing shifts, e.g. 1e-1,1e-2,1e-3.
        #[arg(long, value_parser = parse_sigma_ladder, default_value = "1e-1,1e-2,1e-3")]
        sigma_ladder: SigmaLadder,
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        gap_tol: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate the principal-value operator on a named analytic function.
    Pv {
        #[arg(long)]
        mesh: String,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        #[arg(long, default_value = "bump")]
        f: String,
        /// Points, semicolon-separated; coordinates comma-separated.
        /// Example 1D: "0.25;0.5;0.75". Example 2D: "0.5,0.5;0.3,0.7".
        #[arg(long)]
        points: String,
        /// Regularization ball radius (default: half the boundary distance,
        /// capped at one element diameter).
        #[arg(long)]
        ball_radius: Option<f64>,
    },
    /// Execute a sweep config file (JSON).
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in property suite and print a pass/fail table.
    Check {
        /// Output directory for the per-check CSVs and manifest.
        #[arg(long, default_value = "fraclap-check")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn load_mesh_and_kernel(
    mesh_spec: &str,
    s: f64,
    weight: KernelWeight,
) -> Result<(Mesh, KernelSpec, f64), Error> {
    let mesh = mesh_from_spec(mesh_spec)?;
    let kernel = KernelSpec::new(
        DimensionTag::new(mesh.dim())?,
        FractionalOrder::new(s)?,
        weight,
    );
    let tol = default_tol(mesh.dim());
    Ok((mesh, kernel, tol))
}

fn solution_csv(mesh: &Mesh, values: &[&DiscreteFunction], names: &[&str]) -> String {
    let mut out = String::new();
    if mesh.dim() == 1 {
        out.push('x');
    } else {
        out.push_str("x,y");
    }
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, v) in mesh.vertices().iter().enumerate() {
        if mesh.dim() == 1 {
            out.push_str(&format!("{}", v[0]));
        } else {
            out.push_str(&format!("{},{}", v[0], v[1]));
        }
        for f in values {
            out.push_str(&format!(",{}", f.coeffs()[i]));
        }
        out.push('\n');
    }
    out
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Assemble { mesh, s, kernel, tol, out } => {
            let (mesh, spec, dtol) = load_mesh_and_kernel(&mesh, s, kernel.into())?;
            let a = assemble(&mesh, &spec, tol.unwrap_or(dtol))?;
            a.save_matrix_market(&out)?;
            println!(
                "wrote {} ({} x {}, kernel {}, s = {})",
                out.display(),
                a.dim(),
                a.dim(),
                spec.weight,
                s
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { mesh, s, f, tol, out } => {
            let (mesh, spec, dtol) = load_mesh_and_kernel(&mesh, s, KernelWeight::Plain)?;
            let func = analytic(&f, &mesh)?;
            let data = DiscreteFunction::interpolate(&mesh, func);
            let a = assemble(&mesh, &spec, tol.unwrap_or(dtol))?;
            let m = mass(&mesh);
            let sol = poisson_solve(&mesh, &data, &a, &m)?;
            if sol.mass_ratio > 1e-10 {
                eprintln!(
                    "warning: projected non-zero mean {:e} off the data (relative {:e})",
                    sol.projected_mass, sol.mass_ratio
                );
            }
            write_atomic(&out, solution_csv(&mesh, &[&sol.u], &["u"]).as_bytes())?;
            println!(
                "wrote {} ({} nodal values, residual {:e})",
                out.display(),
                mesh.num_vertices(),
                sol.residual
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eig { mesh, s, k, gap_tol, tol, out } => {
            let (mesh, spec, dtol) = load_mesh_and_kernel(&mesh, s, KernelWeight::Plain)?;
            let a = assemble(&mesh, &spec, tol.unwrap_or(dtol))?;
            let m = mass(&mesh);
            let spectrum = eig(&mesh, k, &a, &m, gap_tol)?;
            for (i, lam) in spectrum.eigenvalues.iter().enumerate() {
                println!("lambda_{} = {}", i + 1, lam);
            }
            for (start, end) in &spectrum.clusters {
                if end - start > 1 {
                    println!("cluster: lambda_{}..lambda_{} (size {})", start + 1, end, end - start);
                }
            }
            if let Some(path) = out {
                let names: Vec<String> =
                    (1..=k).map(|i| format!("v{i}")).collect();
                let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let vec_refs: Vec<&DiscreteFunction> = spectrum.eigenvectors.iter().collect();
                write_atomic(&path, solution_csv(&mesh, &vec_refs, &name_refs).as_bytes())?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dlambda { mesh, s, sigma_ladder, gap_tol, tol } => {
            let sigma_ladder = sigma_ladder.0;
            let max_sigma = sigma_ladder.first().copied().unwrap_or(0.0);
            if s + max_sigma >= 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "s + max sigma = {} leaves (0, 1)",
                    s + max_sigma
                )));
            }
            let (mesh, spec, dtol) = load_mesh_and_kernel(&mesh, s, KernelWeight::Plain)?;
            let quad_tol = tol.unwrap_or(dtol);
            let a = assemble(&mesh, &spec, quad_tol)?;
            let log_spec = KernelSpec::new(spec.dim, spec.order, KernelWeight::Log);
            let l = assemble(&mesh, &log_spec, quad_tol)?;
            let m = mass(&mesh);
            let report = dlambda_plus(&mesh, &a, &l, &m, gap_tol)?;
            println!(
                "dlambda_plus = {} (s = {s}, lambda_1 = {}, multiplicity = {})",
                report.value, report.lambda1, report.multiplicity
            );
            for sigma in sigma_ladder {
                let shifted = KernelSpec::new(
                    spec.dim,
                    FractionalOrder::new(s + sigma)?,
                    KernelWeight::Plain,
                );
                let a_shift = assemble(&mesh, &shifted, quad_tol)?;
                let spec_shift = eig(&mesh, 1, &a_shift, &m, gap_tol)?;
                let quotient = (spec_shift.eigenvalues[0] - report.lambda1) / sigma;
                println!(
                    "sigma = {sigma}: quotient = {quotient}, gap = {:e}",
                    (quotient - report.value).abs()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pv { mesh, s, f, points, ball_radius } => {
            let mesh = mesh_from_spec(&mesh)?;
            let order = FractionalOrder::new(s)?;
            let func = analytic(&f, &mesh)?;
            let opts = PvOptions { ball_radius };
            for chunk in points.split(';').filter(|c| !c.trim().is_empty()) {
                let coords: Vec<f64> = chunk
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidArgument(format!("bad coordinate `{t}`")))
                    })
                    .collect::<Result<_, _>>()?;
                if coords.len() != mesh.dim() {
                    return Err(Error::InvalidArgument(format!(
                        "point `{chunk}` has {} coordinates, mesh dimension is {}",
                        coords.len(),
                        mesh.dim()
                    )));
                }
                let p = [coords[0], if mesh.dim() == 2 { coords[1] } else { 0.0 }];
                let value = pv_apply(&mesh, order, &|q| func(q), p, &opts)?;
                if mesh.dim() == 1 {
                    println!("{} {}", p[0], value);
                } else {
                    println!("{} {} {}", p[0], p[1], value);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config } => {
            let cfg = SweepConfig::load(&config)?;
            let summary = run_sweep(&cfg)?;
            for (check, failures) in &summary.failures {
                println!(
                    "{check}: {} rows, {failures} failures [{}]",
                    summary.rows[check],
                    if *failures == 0 { "pass" } else { "FAIL" }
                );
            }
            println!("outputs in {}", summary.output_dir.display());
            Ok(if summary.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Check { out, seed } => {
            let summary = run_builtin_checks(&out, seed)?;
            println!("{:<14} {:>7} {:>9}  status", "check", "rows", "failures");
            for (check, failures) in &summary.failures {
                println!(
                    "{:<14} {:>7} {:>9}  {}",
                    check,
                    summary.rows[check],
                    failures,
                    if *failures == 0 { "pass" } else { "FAIL" }
                );
            }
            println!("outputs in {}", summary.output_dir.display());
            Ok(if summary.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

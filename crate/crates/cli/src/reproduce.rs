//! Convergence tables for the shipped surfaces: 1-form periodicity
//! residuals, the Bolza period matrix and the two-hole MPS sweep.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rug::Float;

use hexsurf::abeljacobi::symplectic_action;
use hexsurf::mps::{convergence_sweep, ProblemSpec};
use hexsurf::numerics::{Cplx, DenseMatrix, PrecisionCtx};
use hexsurf::surface::{HomologyCurve, SurfaceConfig};

use crate::pipeline::SurfaceRun;
use crate::{CliError, CliResult};

pub const SURFACES: [&str; 3] = ["d6z2", "bolza", "gutzwiller"];
pub const DEGREES: [usize; 3] = [10, 20, 50];
pub const OVERSAMPLE: usize = 3;
pub const ONEFORM_TOL: [f64; 3] = [1e-2, 1e-4, 1e-11];
pub const PERIOD_TOL: [f64; 3] = [1e-3, 1e-6, 1e-12];
/// Order caps giving `M ∈ {6, 10, 14, 22, 30}` for two holes.
pub const MPS_ORDERS: [usize; 5] = [1, 2, 3, 5, 7];
pub const MPS_DEGREE: usize = 30;
pub const MPS_FINAL_TOL: f64 = 1e-4;
pub const MPS_MIN_R2: f64 = 0.9;

/// Integer symplectic matrix taking the shipped Bolza basis to the one in
/// which the period matrix has the reference form below.
pub const BOLZA_SIEGEL: [[i64; 4]; 4] = [[-1, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]];

/// `−⅓·𝟙 + i·(√2/3)·[[2, −1], [−1, 2]]`.
pub fn bolza_reference(prec: u32) -> DenseMatrix {
    let third = Float::with_val(prec, 1) / 3u32;
    let s = Float::with_val(prec, 2).sqrt() * &third;
    let mut m = DenseMatrix::zeros(2, 2, prec);
    for i in 0..2 {
        for j in 0..2 {
            let im = if i == j { Float::with_val(prec, &s * 2u32) } else { -s.clone() };
            m[(i, j)] = Cplx::new(-third.clone(), im);
        }
    }
    m
}

/// `max |τ_S − τ_ref|` after the Siegel transformation.
pub fn bolza_siegel_error(tau: &DenseMatrix) -> CliResult<Float> {
    let m: Vec<Vec<i64>> = BOLZA_SIEGEL.iter().map(|r| r.to_vec()).collect();
    let s = symplectic_action(tau, &m)?;
    Ok(s.sub(&bolza_reference(tau.prec())).max_abs())
}

/// Directory with `surfaces/` and `curves/`; `HEXSURF_DATA` overrides the
/// copy shipped with the sources.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os("HEXSURF_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data"))
}

pub fn load_shipped(data_dir: &Path, name: &str, bits: u32) -> CliResult<(SurfaceConfig, Vec<HomologyCurve>)> {
    let surface = data_dir.join("surfaces").join(format!("{name}.json"));
    let curves = data_dir.join("curves").join(format!("{name}.json"));
    for p in [&surface, &curves] {
        if !p.is_file() {
            return Err(CliError::Usage(format!("missing data file {}", p.display())));
        }
    }
    let cfg = SurfaceConfig::load(&surface)?;
    let c = HomologyCurve::load_all(&curves, bits)?;
    Ok((cfg, c))
}

pub fn shipped_run(data_dir: &Path, name: &str, ctx: PrecisionCtx, degree: usize) -> CliResult<SurfaceRun> {
    let (cfg, curves) = load_shipped(data_dir, name, ctx.bits)?;
    let t = std::time::Instant::now();
    let run = SurfaceRun::compute(&cfg, curves, ctx, degree, OVERSAMPLE)?;
    log::info!("{name} N={degree}: residual {:e} in {:.1}s", run.residual.to_f64(), t.elapsed().as_secs_f64());
    Ok(run)
}

#[derive(Clone, Debug)]
pub struct Table {
    pub csv: String,
    /// One line per violated tolerance.
    pub failures: Vec<String>,
}

fn tol_for(tols: &[f64; 3], n: usize) -> Option<f64> {
    DEGREES.iter().position(|&d| d == n).map(|i| tols[i])
}

/// Residual table from precomputed `(surface, N, residual)` rows.
pub fn oneform_table(rows: &[(String, usize, f64)]) -> Table {
    let mut csv = String::from("surface,N,residual,tolerance,pass\n");
    let mut failures = Vec::new();
    for (name, n, r) in rows {
        let tol = tol_for(&ONEFORM_TOL, *n);
        let pass = tol.is_none_or(|t| *r <= t);
        let tol_s = tol.map_or("-".into(), |t| format!("{t:e}"));
        writeln!(csv, "{name},{n},{r:.6e},{tol_s},{pass}").unwrap();
        if !pass {
            failures.push(format!("{name} N={n}: residual {r:.3e} > {tol_s}"));
        }
    }
    for name in SURFACES {
        let mut seq: Vec<(usize, f64)> = rows.iter().filter(|r| r.0 == name).map(|r| (r.1, r.2)).collect();
        seq.sort_by_key(|r| r.0);
        if seq.windows(2).any(|w| w[1].1 >= w[0].1) {
            failures.push(format!("{name}: residuals do not decrease strictly with N"));
        }
    }
    Table { csv, failures }
}

pub fn period_table(rows: &[(usize, f64)]) -> Table {
    let mut csv = String::from("N,siegel_error,tolerance,pass\n");
    let mut failures = Vec::new();
    for (n, e) in rows {
        let tol = tol_for(&PERIOD_TOL, *n);
        let pass = tol.is_none_or(|t| *e <= t);
        let tol_s = tol.map_or("-".into(), |t| format!("{t:e}"));
        writeln!(csv, "{n},{e:.6e},{tol_s},{pass}").unwrap();
        if !pass {
            failures.push(format!("Bolza N={n}: Siegel error {e:.3e} > {tol_s}"));
        }
    }
    Table { csv, failures }
}

/// Least-squares line through `(x, y)`: `(slope, R²)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// `(M, boundary error)` rows judged by the log-linear trend criterion.
pub fn mps_table(rows: &[(usize, f64)]) -> Table {
    let mut csv = String::from("M,boundary_error\n");
    for (m, e) in rows {
        writeln!(csv, "{m},{e:.6e}").unwrap();
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(m, e)| (m as f64, e.log10())).collect();
    let (slope, r2) = linear_fit(&pts);
    let last = rows.last().map_or(f64::NAN, |r| r.1);
    let mut failures = Vec::new();
    if !(slope < 0.0) {
        failures.push(format!("log10 error vs M slope {slope:.4} is not negative"));
    }
    if !(r2 >= MPS_MIN_R2) {
        failures.push(format!("log-linear fit R² = {r2:.3} < {MPS_MIN_R2}"));
    }
    if !(last <= MPS_FINAL_TOL) {
        failures.push(format!("final boundary error {last:.3e} > {MPS_FINAL_TOL:e}"));
    }
    Table { csv, failures }
}

pub fn run_oneform(data_dir: &Path, ctx: PrecisionCtx) -> CliResult<Table> {
    let mut rows = Vec::new();
    for name in SURFACES {
        for n in DEGREES {
            let run = shipped_run(data_dir, name, ctx, n)?;
            rows.push((name.to_string(), n, run.residual.to_f64()));
        }
    }
    Ok(oneform_table(&rows))
}

pub fn run_period(data_dir: &Path, ctx: PrecisionCtx) -> CliResult<Table> {
    let mut rows = Vec::new();
    for n in DEGREES {
        let run = shipped_run(data_dir, "bolza", ctx, n)?;
        rows.push((n, bolza_siegel_error(&run.periods.tau)?.to_f64()));
    }
    Ok(period_table(&rows))
}

/// Two-hole problem on the Gutzwiller surface.
pub fn run_mps(data_dir: &Path, ctx: PrecisionCtx, degree: usize, orders: &[usize], seed: u64) -> CliResult<Table> {
    let run = shipped_run(data_dir, "gutzwiller", ctx, degree)?;
    let bc = run.basis_context()?;
    let holes = ProblemSpec::two_hole_benchmark().build(&run.atlas)?;
    let rows: Vec<(usize, f64)> = convergence_sweep(&bc, &holes, orders, seed)?
        .into_iter()
        .map(|(m, e)| (m, e.to_f64()))
        .collect();
    Ok(mps_table(&rows))
}

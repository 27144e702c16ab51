use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde::Serialize;

use hexsurf::mps::{enumerate_basis, solve_mps, ProblemSpec, SAMPLE_FACTOR};
use hexsurf::numerics::{cplx_to_strings, parse_real, real_to_string, Cplx};
use hexsurf::oneforms::FormsJson;
use hexsurf_cli::artifacts::{read_json, write_json, write_text, PipelineManifest, Provenance};
use hexsurf_cli::grid::{grid_points, parse_point, render_csv, BasisKind, GridFunction, Region, Resolution};
use hexsurf_cli::pipeline::{self, load_curves, load_periods, load_surface, precision, SurfaceRun};
use hexsurf_cli::reproduce;
use hexsurf_cli::{CliError, CliResult};

/// Harmonic bases and Laplace problems on genus-2 surfaces glued from
/// right-angled hexagons.
#[derive(Parser)]
#[command(name = "hexsurf", version)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 256)]
    bits: u32,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Directory receiving the artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a surface and check its gluing (and curves, if given).
    Surface {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Solve for a basis of holomorphic 1-forms.
    Forms {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 20)]
        degree: usize,
        #[arg(long, default_value_t = 3)]
        oversample: usize,
    },
    /// Period matrix, Riemann constant and Abel–Jacobi map.
    Periods {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        curves: PathBuf,
        #[arg(long, default_value_t = 20)]
        degree: usize,
        #[arg(long, default_value_t = 3)]
        oversample: usize,
    },
    /// Riemann theta function (and gradient) at one point.
    Theta {
        #[arg(long)]
        periods: PathBuf,
        /// `re,im` pairs of the g coordinates, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        gradient: bool,
    },
    /// Grid of one basis function.
    Basis(GridArgs),
    /// Grid of a basis function, an Abel–Jacobi component, or a solution.
    Grid(GridArgs),
    /// Least-squares fit of a hole problem for each order cap.
    Solve {
        #[arg(long)]
        periods: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        /// Comma-separated order caps.
        #[arg(long, default_value = "1,2,3,5,7")]
        orders: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV grid of the solution for the last order cap.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value = "64x64")]
        resolution: Resolution,
        #[arg(long)]
        polygon: Option<usize>,
        #[arg(long)]
        disk_depth: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        clamp: Option<String>,
    },
    /// Recompute a convergence table on the shipped surfaces.
    Reproduce {
        table: TableKind,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// 1-form degree for the hole problem.
        #[arg(long, default_value_t = reproduce::MPS_DEGREE)]
        degree: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Oneform,
    Period,
    Mps,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Constant,
    AbelJacobi,
    Logsigma,
    Phat,
    Pcheck,
    Ptilde,
    Solution,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    periods: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Pole `p,re,im` in the chart of polygon p.
    #[arg(long, allow_hyphen_values = true)]
    pole: Option<String>,
    /// Second pole of `logsigma`.
    #[arg(long, allow_hyphen_values = true)]
    pole2: Option<String>,
    /// Pole order, or order cap for `solution`.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Abel–Jacobi component.
    #[arg(long, default_value_t = 0)]
    component: usize,
    /// Hole problem for `solution`.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    clamp: Option<String>,
    #[arg(long = "grid", default_value = "64x64")]
    resolution: Resolution,
    #[arg(long)]
    polygon: Option<usize>,
    #[arg(long)]
    disk_depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn region(polygon: Option<usize>, disk_depth: Option<usize>) -> CliResult<Region> {
    match (polygon, disk_depth) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --polygon or --disk-depth".into())),
        (Some(p), None) => Ok(Region::Polygon(p)),
        (None, Some(d)) => Ok(Region::Disk { depth: d }),
        (None, None) => Ok(Region::Polygon(0)),
    }
}

fn parse_orders(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("bad order '{t}': {e}"))))
        .collect()
}

fn parse_clamp(s: &Option<String>, prec: u32) -> CliResult<Option<Float>> {
    s.as_deref().map(|t| parse_real(t, prec).map_err(CliError::from)).transpose()
}

struct Ctx {
    bits: u32,
    seed: u64,
    out_dir: PathBuf,
}

impl Ctx {
    fn manifest(&self, command: &str) -> PipelineManifest {
        PipelineManifest::new(command, self.bits, self.seed, &self.out_dir)
    }

    fn out(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(default))
    }
}

fn guard(bits: u32) -> CliResult<u32> {
    Ok(precision(bits)?.guard_bits)
}

fn cmd_surface(c: &Ctx, config: &Path, curves: &Option<PathBuf>) -> CliResult<()> {
    let mut m = c.manifest("surface");
    let cfg = load_surface(&mut m, config)?;
    let curves = curves.as_ref().map(|p| load_curves(&mut m, p, c.bits)).transpose()?;
    m.validate()?;
    let atlas = cfg.build(precision(c.bits)?)?;
    let art = pipeline::surface_artifact(m.provenance(guard(c.bits)?), &cfg, &atlas, curves.as_deref())?;
    if let Some(j) = &art.intersection_matrix {
        if *j != hexsurf::surface::symplectic_j(pipeline::GENUS) {
            return Err(CliError::Numeric(format!("intersection matrix {j:?} is not symplectic")));
        }
    }
    write_json(&c.out_dir.join("surface.json"), &art)
}

fn cmd_forms(c: &Ctx, surface: &Path, degree: usize, oversample: usize) -> CliResult<()> {
    let mut m = c.manifest("forms");
    let cfg = load_surface(&mut m, surface)?;
    m.degree = Some(degree);
    m.oversample = Some(oversample);
    m.validate()?;
    let ctx = precision(c.bits)?;
    let atlas = cfg.build(ctx)?;
    let lsq = hexsurf::oneforms::LsqConfig::new(degree, oversample, ctx)?;
    let forms = hexsurf::oneforms::solve_oneforms(&atlas, &lsq, pipeline::GENUS)?;
    let residual = pipeline::residual_sup(&atlas, &forms, degree);
    eprintln!("periodicity residual {:.3e}", residual.to_f64());
    let art = pipeline::FormsArtifact {
        provenance: m.provenance(ctx.guard_bits),
        surface: cfg,
        oversample,
        residual: real_to_string(&residual),
        forms: FormsJson::from_forms(&forms),
    };
    write_json(&c.out_dir.join("forms.json"), &art)
}

fn cmd_periods(c: &Ctx, surface: &Path, curves: &Path, degree: usize, oversample: usize) -> CliResult<()> {
    let mut m = c.manifest("periods");
    let cfg = load_surface(&mut m, surface)?;
    let curves = load_curves(&mut m, curves, c.bits)?;
    m.degree = Some(degree);
    m.oversample = Some(oversample);
    m.validate()?;
    let ctx = precision(c.bits)?;
    let run = SurfaceRun::compute(&cfg, curves, ctx, degree, oversample)?;
    eprintln!(
        "periodicity residual {:.3e}, period matrix asymmetry {:.3e}",
        run.residual.to_f64(),
        run.periods.asymmetry.to_f64()
    );
    write_json(&c.out_dir.join("periods.json"), &run.periods_artifact(m.provenance(ctx.guard_bits)))
}

#[derive(Serialize)]
struct ThetaArtifact {
    provenance: Provenance,
    z: Vec<[String; 2]>,
    theta: [String; 2],
    gradient: Option<Vec<[String; 2]>>,
}

fn cmd_theta(c: &Ctx, periods: &Path, z: &str, gradient: bool) -> CliResult<()> {
    let mut m = c.manifest("theta");
    m.option("z", z);
    m.option("gradient", gradient);
    let loaded = load_periods(&mut m, periods)?;
    let prec = loaded.ctx.bits;
    let parts: Vec<Float> = z.split(',').map(|t| parse_real(t, prec)).collect::<Result<_, _>>()?;
    let g = loaded.periods.tau.rows();
    if parts.len() != 2 * g {
        return Err(CliError::Usage(format!("--z needs {} numbers, got {}", 2 * g, parts.len())));
    }
    let zv: Vec<Cplx> = parts.chunks(2).map(|p| Cplx::new(p[0].clone(), p[1].clone())).collect();
    let engine = hexsurf::theta::ThetaEngine::new(&loaded.periods.tau, loaded.ctx)?;
    let (value, grad) = if gradient {
        let (v, gr) = engine.theta_and_grad(&zv);
        (v, Some(gr.iter().map(cplx_to_strings).collect()))
    } else {
        (engine.theta(&zv), None)
    };
    let art = ThetaArtifact {
        provenance: m.provenance(loaded.ctx.guard_bits),
        z: zv.iter().map(cplx_to_strings).collect(),
        theta: cplx_to_strings(&value),
        gradient: grad,
    };
    write_json(&c.out_dir.join("theta.json"), &art)
}

fn cmd_grid(c: &Ctx, a: &GridArgs, basis_only: bool) -> CliResult<()> {
    let name = if basis_only { "basis" } else { "grid" };
    if basis_only && !matches!(a.kind, Kind::Logsigma | Kind::Phat | Kind::Pcheck | Kind::Ptilde) {
        return Err(CliError::Usage("basis grids take --kind logsigma|phat|pcheck|ptilde".into()));
    }
    let mut m = c.manifest(name);
    for (k, v) in [("pole", &a.pole), ("pole2", &a.pole2), ("clamp", &a.clamp)] {
        if let Some(v) = v {
            m.option(k, v);
        }
    }
    m.option("order", a.order);
    m.option("component", a.component);
    let loaded = load_periods(&mut m, &a.periods)?;
    let atlas = loaded.atlas.clone();
    let prec = atlas.prec();
    let poles: Vec<_> = [&a.pole, &a.pole2]
        .into_iter()
        .flatten()
        .map(|s| parse_point(s, &atlas))
        .collect::<CliResult<_>>()?;
    let kind = match a.kind {
        Kind::Logsigma => Some(BasisKind::LogSigma),
        Kind::Phat => Some(BasisKind::PHat),
        Kind::Pcheck => Some(BasisKind::PCheck),
        Kind::Ptilde => Some(BasisKind::PTilde),
        _ => None,
    };
    let f = match (a.kind, kind) {
        (_, Some(k)) => GridFunction::basis(loaded.basis_context()?, k, &poles, a.order, c.seed)?,
        (Kind::Constant, _) => GridFunction::Constant,
        (Kind::AbelJacobi, _) => {
            if a.component >= loaded.aj.genus() {
                return Err(CliError::Usage(format!("no Abel-Jacobi component {}", a.component)));
            }
            GridFunction::AbelJacobi { aj: Box::new(loaded.aj.clone()), component: a.component }
        }
        _ => {
            let problem = a.problem.as_ref().ok_or_else(|| CliError::Usage("solution grids need --problem".into()))?;
            let spec: ProblemSpec = read_json(&mut m, problem)?;
            let holes = spec.build(&atlas)?;
            let bc = loaded.basis_context()?;
            let basis = enumerate_basis(&bc, &holes, a.order, c.seed)?;
            let sol = solve_mps(&bc, &holes, basis, SAMPLE_FACTOR, c.seed)?;
            GridFunction::Solution { ctx: Box::new(bc), solution: Box::new(sol), clamp: parse_clamp(&a.clamp, prec)? }
        }
    };
    let pts = grid_points(&atlas, region(a.polygon, a.disk_depth)?, a.resolution)?;
    let csv = render_csv(&pts, f.columns(), |z| f.eval(&atlas, z))?;
    write_text(&c.out(&a.out, &format!("{name}.csv")), &csv)
}

#[derive(Serialize)]
struct SolveArtifact {
    provenance: Provenance,
    problem: ProblemSpec,
    runs: Vec<SolveRun>,
}

#[derive(Serialize)]
struct SolveRun {
    order_cap: usize,
    basis_size: usize,
    samples_per_hole: usize,
    fresh_per_hole: usize,
    boundary_error: String,
    fit_residual: String,
    labels: Vec<String>,
    coeffs: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    c: &Ctx,
    periods: &Path,
    problem: &Path,
    orders: &str,
    out: &Option<PathBuf>,
    grid: &Option<PathBuf>,
    resolution: Resolution,
    reg: Region,
    clamp: &Option<String>,
) -> CliResult<()> {
    let mut m = c.manifest("solve");
    m.option("orders", orders);
    let orders = parse_orders(orders)?;
    let loaded = load_periods(&mut m, periods)?;
    let spec: ProblemSpec = read_json(&mut m, problem)?;
    let holes = spec.build(&loaded.atlas)?;
    let bc = loaded.basis_context()?;
    let mut runs = Vec::new();
    let mut last = None;
    let mut sweep_csv = String::from("M,boundary_error\n");
    for &n in &orders {
        let basis = enumerate_basis(&bc, &holes, n, c.seed)?;
        let sol = solve_mps(&bc, &holes, basis, SAMPLE_FACTOR, c.seed)?;
        eprintln!("order {n}: M = {}, boundary error {:.3e}", sol.basis.len(), sol.boundary_error.to_f64());
        sweep_csv.push_str(&format!("{},{:.6e}\n", sol.basis.len(), sol.boundary_error.to_f64()));
        runs.push(SolveRun {
            order_cap: n,
            basis_size: sol.basis.len(),
            samples_per_hole: sol.samples_per_hole,
            fresh_per_hole: sol.fresh_per_hole,
            boundary_error: real_to_string(&sol.boundary_error),
            fit_residual: real_to_string(&sol.fit_residual),
            labels: sol.basis.elements.iter().map(|e| e.label()).collect(),
            coeffs: sol.coeffs.iter().map(real_to_string).collect(),
        });
        last = Some(sol);
    }
    let art = SolveArtifact { provenance: m.provenance(loaded.ctx.guard_bits), problem: spec, runs };
    write_json(&c.out(out, "solution.json"), &art)?;
    write_text(&c.out_dir.join("convergence.csv"), &sweep_csv)?;
    if let (Some(path), Some(sol)) = (grid, last) {
        let clamp = parse_clamp(clamp, loaded.ctx.bits)?;
        let pts = grid_points(&loaded.atlas, reg, resolution)?;
        let csv = render_csv(&pts, &["value"], |z| {
            if holes.iter().any(|h| h.contains(z)) {
                return Ok(vec![Float::with_val(loaded.ctx.bits, f64::NAN)]);
            }
            hexsurf::mps::evaluate_solution(&bc, &sol, std::slice::from_ref(z), clamp.as_ref())
        })?;
        write_text(path, &csv)?;
    }
    Ok(())
}

fn cmd_reproduce(c: &Ctx, table: TableKind, data_dir: &Option<PathBuf>, degree: usize) -> CliResult<()> {
    let dir = data_dir.clone().unwrap_or_else(reproduce::default_data_dir);
    let ctx = precision(c.bits)?;
    let (name, t) = match table {
        TableKind::Oneform => ("oneform", reproduce::run_oneform(&dir, ctx)?),
        TableKind::Period => ("period", reproduce::run_period(&dir, ctx)?),
        TableKind::Mps => {
            ("mps", reproduce::run_mps(&dir, ctx, degree, &reproduce::MPS_ORDERS, c.seed)?)
        }
    };
    write_text(&c.out_dir.join(format!("reproduce_{name}.csv")), &t.csv)?;
    print!("{}", t.csv);
    if t.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("tolerances violated:\n  {}", t.failures.join("\n  "))))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let c = Ctx { bits: cli.bits, seed: cli.seed, out_dir: cli.out_dir };
    match &cli.command {
        Command::Surface { config, curves } => cmd_surface(&c, config, curves),
        Command::Forms { surface, degree, oversample } => cmd_forms(&c, surface, *degree, *oversample),
        Command::Periods { surface, curves, degree, oversample } => cmd_periods(&c, surface, curves, *degree, *oversample),
        Command::Theta { periods, z, gradient } => cmd_theta(&c, periods, z, *gradient),
        Command::Basis(a) => cmd_grid(&c, a, true),
        Command::Grid(a) => cmd_grid(&c, a, false),
        Command::Solve { periods, problem, orders, out, grid, resolution, polygon, disk_depth, clamp } => {
            let reg = region(*polygon, *disk_depth)?;
            cmd_solve(&c, periods, problem, orders, out, grid, *resolution, reg, clamp)
        }
        Command::Reproduce { table, data_dir, degree } => cmd_reproduce(&c, *table, data_dir, *degree),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

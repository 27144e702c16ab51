//! Rectangular sample grids over a polygon chart or the developed disk,
//! and CSV rendering of functions on them.

use std::fmt::Write as _;

use rug::Float;

use hexsurf::abeljacobi::AbelJacobiMap;
use hexsurf::basis::{BasisContext, BasisFunction, Family, GenericShift, PoleProfile};
use hexsurf::mps::{evaluate_solution, MpsSolution};
use hexsurf::numerics::Cplx;
use hexsurf::surface::{SurfaceAtlas, SurfacePoint};

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Bounding box of one polygon chart.
    Polygon(usize),
    /// The square `[−1, 1]²`, located in the tiling up to the given depth.
    Disk { depth: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl std::str::FromStr for Resolution {
    type Err = String;

    /// `WxH` (or `W×H`).
    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X', '×'])
            .ok_or_else(|| format!("resolution '{s}' is not of the form WxH"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad resolution '{s}': {e}"));
        let (width, height) = (parse(w)?, parse(h)?);
        if width == 0 || height == 0 {
            return Err(format!("resolution '{s}' is empty"));
        }
        Ok(Resolution { width, height })
    }
}

/// Parses `"p,re,im"`.
pub fn parse_point(s: &str, atlas: &SurfaceAtlas) -> CliResult<SurfacePoint> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("point '{s}' is not of the form p,re,im")));
    }
    let p: usize = parts[0].parse().map_err(|e| CliError::Usage(format!("bad polygon in '{s}': {e}")))?;
    if p >= atlas.polygons.len() {
        return Err(CliError::Usage(format!("no polygon {p}")));
    }
    let prec = atlas.prec();
    let re = hexsurf::numerics::parse_real(parts[1], prec)?;
    let im = hexsurf::numerics::parse_real(parts[2], prec)?;
    let z = Cplx::new(re, im);
    if !atlas.polygons[p].contains(&z, &atlas.ctx.tol_full()) {
        return Err(CliError::Usage(format!("point '{s}' is outside polygon {p}")));
    }
    Ok(SurfacePoint::new(p, z))
}

/// Cell centres of the grid in disk coordinates with the surface point
/// they represent, if any.
pub fn grid_points(atlas: &SurfaceAtlas, region: Region, res: Resolution) -> CliResult<Vec<(Cplx, Option<SurfacePoint>)>> {
    let prec = atlas.prec();
    let (lo, hi) = match region {
        Region::Polygon(p) => {
            let poly = atlas.polygons.get(p).ok_or_else(|| CliError::Usage(format!("no polygon {p}")))?;
            let xs: Vec<f64> = poly.vertices.iter().map(|v| v.re.to_f64()).collect();
            let ys: Vec<f64> = poly.vertices.iter().map(|v| v.im.to_f64()).collect();
            let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            ((min(&xs), min(&ys)), (max(&xs), max(&ys)))
        }
        Region::Disk { .. } => ((-1.0, -1.0), (1.0, 1.0)),
    };
    let slack = atlas.ctx.tol_full();
    let mut out = Vec::with_capacity(res.width * res.height);
    for j in 0..res.height {
        for i in 0..res.width {
            let x = lo.0 + (hi.0 - lo.0) * (i as f64 + 0.5) / res.width as f64;
            let y = lo.1 + (hi.1 - lo.1) * (j as f64 + 0.5) / res.height as f64;
            let z = Cplx::from_f64(prec, x, y);
            let point = match region {
                Region::Polygon(p) => atlas.polygons[p].contains(&z, &slack).then(|| SurfacePoint::new(p, z.clone())),
                Region::Disk { depth } => {
                    if x * x + y * y < 1.0 {
                        atlas.locate(&z, depth).ok().map(|(sp, _)| sp)
                    } else {
                        None
                    }
                }
            };
            out.push((z, point));
        }
    }
    Ok(out)
}

/// A function that can be sampled on a grid.
pub enum GridFunction {
    Constant,
    /// One component of the Abel–Jacobi map.
    AbelJacobi { aj: Box<AbelJacobiMap>, component: usize },
    Basis {
        ctx: Box<BasisContext>,
        shift: GenericShift,
        poles: Vec<PoleProfile>,
        func: BasisFunction,
    },
    Solution {
        ctx: Box<BasisContext>,
        solution: Box<MpsSolution>,
        clamp: Option<Float>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    LogSigma,
    PHat,
    PCheck,
    PTilde,
}

impl GridFunction {
    /// A basis function with its own generic shift drawn from `seed`.
    pub fn basis(ctx: BasisContext, kind: BasisKind, poles: &[SurfacePoint], order: usize, seed: u64) -> CliResult<Self> {
        let needed = if kind == BasisKind::LogSigma { 2 } else { 1 };
        if poles.len() != needed {
            return Err(CliError::Usage(format!("{kind:?} needs {needed} pole(s), got {}", poles.len())));
        }
        if kind == BasisKind::LogSigma && poles[0] == poles[1] {
            return Err(CliError::Usage("log sigma needs two distinct poles".into()));
        }
        if kind != BasisKind::LogSigma && order == 0 {
            return Err(CliError::Usage("pole order must be at least 1".into()));
        }
        let shift = ctx.choose_generic_shift(poles, seed)?;
        let profiles: Vec<PoleProfile> = poles.iter().map(|p| ctx.classify_pole(p, None)).collect::<Result<_, _>>()?;
        let g = ctx.genus();
        let func = match kind {
            BasisKind::LogSigma => BasisFunction::LogSigma { v: 0, w: 1 },
            _ => {
                let family = profiles[0].family(g, order);
                let want = match kind {
                    BasisKind::PHat => Family::Hat,
                    BasisKind::PCheck => Family::Check,
                    _ => Family::Tilde,
                };
                if family != want {
                    return Err(CliError::Usage(format!(
                        "order {order} belongs to the {family:?} family at this pole (weierstrass: {})",
                        profiles[0].weierstrass
                    )));
                }
                BasisFunction::pole_member(&profiles[0], g, order, 0)
            }
        };
        Ok(GridFunction::Basis { ctx: Box::new(ctx), shift, poles: profiles, func })
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            GridFunction::Constant | GridFunction::Solution { .. } => &["value"],
            GridFunction::Basis { func: BasisFunction::LogSigma { .. } | BasisFunction::Constant, .. } => &["value"],
            _ => &["value_re", "value_im"],
        }
    }

    pub fn eval(&self, atlas: &SurfaceAtlas, z: &SurfacePoint) -> hexsurf::Result<Vec<Float>> {
        let prec = atlas.prec();
        match self {
            GridFunction::Constant => Ok(vec![Float::with_val(prec, 1)]),
            GridFunction::AbelJacobi { aj, component } => {
                let v = aj.eval_point(z).swap_remove(*component);
                Ok(vec![v.re, v.im])
            }
            GridFunction::Basis { ctx, shift, poles, func } => {
                let v = ctx.evaluate(shift, poles, func, z)?;
                Ok(if self.columns().len() == 1 { vec![v.re] } else { vec![v.re, v.im] })
            }
            GridFunction::Solution { ctx, solution, clamp } => {
                evaluate_solution(ctx, solution, std::slice::from_ref(z), clamp.as_ref())
            }
        }
    }
}

fn fmt_value(x: &Float) -> String {
    let v = x.to_f64();
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        "NaN".into()
    }
}

/// CSV with header `re,im,<columns>`; points outside the region or at a
/// pole get `NaN`.
pub fn render_csv(
    points: &[(Cplx, Option<SurfacePoint>)],
    columns: &[&str],
    mut f: impl FnMut(&SurfacePoint) -> hexsurf::Result<Vec<Float>>,
) -> CliResult<String> {
    let mut out = String::new();
    writeln!(out, "re,im,{}", columns.join(",")).unwrap();
    let nans = vec!["NaN"; columns.len()].join(",");
    for (z, p) in points {
        let (x, y) = z.to_c64();
        let values = match p {
            None => nans.clone(),
            Some(sp) => match f(sp) {
                Ok(v) => v.iter().map(fmt_value).collect::<Vec<_>>().join(","),
                Err(hexsurf::Error::PoleHit) => nans.clone(),
                Err(e) => return Err(e.into()),
            },
        };
        writeln!(out, "{x:.17e},{y:.17e},{values}").unwrap();
    }
    Ok(out)
}

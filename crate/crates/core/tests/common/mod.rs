#![allow(dead_code)]

use std::path::PathBuf;

use rug::Float;

use hexsurf::abeljacobi::{compute_periods, AbelJacobiMap, PeriodData};
use hexsurf::basis::BasisContext;
use hexsurf::numerics::PrecisionCtx;
use hexsurf::oneforms::{periodicity_residual_sup, solve_oneforms, LsqConfig, PolyChartVector};
use hexsurf::surface::{HomologyCurve, SurfaceAtlas, SurfaceConfig};

pub const SURFACES: [&str; 3] = ["d6z2", "bolza", "gutzwiller"];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn shipped(name: &str, bits: u32) -> (SurfaceAtlas, Vec<HomologyCurve>) {
    let ctx = PrecisionCtx::new(bits).unwrap();
    let cfg = SurfaceConfig::load(&data_dir().join("surfaces").join(format!("{name}.json"))).unwrap();
    let curves = HomologyCurve::load_all(&data_dir().join("curves").join(format!("{name}.json")), bits).unwrap();
    (cfg.build(ctx).unwrap(), curves)
}

pub struct Fixture {
    pub atlas: SurfaceAtlas,
    pub curves: Vec<HomologyCurve>,
    pub forms: Vec<PolyChartVector>,
    pub residual: Float,
    pub periods: PeriodData,
    pub aj: AbelJacobiMap,
}

impl Fixture {
    pub fn new(name: &str, bits: u32, degree: usize) -> Self {
        let (atlas, curves) = shipped(name, bits);
        let lsq = LsqConfig::new(degree, 3, atlas.ctx).unwrap();
        let forms = solve_oneforms(&atlas, &lsq, 2).unwrap();
        let residual = periodicity_residual_sup(&atlas, &forms, 6 * degree, 1);
        let (periods, aj) = compute_periods(&atlas, &forms, &curves).unwrap();
        Fixture { atlas, curves, forms, residual, periods, aj }
    }

    pub fn basis(&self) -> BasisContext {
        BasisContext::new(&self.atlas, &self.periods, &self.aj).unwrap()
    }
}

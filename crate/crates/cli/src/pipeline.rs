//! Stages shared by the subcommands: surfaces, 1-forms and periods, with
//! their JSON artifacts.

use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use hexsurf::abeljacobi::{compute_periods, AbelJacobiMap, PeriodData, PeriodsJson};
use hexsurf::basis::BasisContext;
use hexsurf::numerics::{cplx_to_strings, real_to_string, PrecisionCtx};
use hexsurf::oneforms::{periodicity_residual_sup, solve_oneforms, FormsJson, LsqConfig, PolyChartVector};
use hexsurf::surface::{
    canonical_intersection_matrix, deck_generators, relation_residual, HomologyCurve, SurfaceAtlas, SurfaceConfig,
};

use crate::artifacts::{read_json, PipelineManifest, Provenance};
use crate::{CliError, CliResult};

/// Seed of the fresh edge samples behind the sup residual.
pub const RESIDUAL_SEED: u64 = 1;
pub const GENUS: usize = 2;

pub fn precision(bits: u32) -> CliResult<PrecisionCtx> {
    Ok(PrecisionCtx::new(bits)?)
}

pub fn load_surface(manifest: &mut PipelineManifest, path: &Path) -> CliResult<SurfaceConfig> {
    manifest.surface = Some(path.display().to_string());
    let text = manifest.read_input(path)?;
    Ok(SurfaceConfig::from_json(&text)?)
}

pub fn load_curves(manifest: &mut PipelineManifest, path: &Path, bits: u32) -> CliResult<Vec<HomologyCurve>> {
    manifest.curves = Some(path.display().to_string());
    let text = manifest.read_input(path)?;
    Ok(HomologyCurve::parse_all(&text, bits)?)
}

/// Sup periodicity mismatch over `6N` fresh points per glued edge.
pub fn residual_sup(atlas: &SurfaceAtlas, forms: &[PolyChartVector], degree: usize) -> Float {
    periodicity_residual_sup(atlas, forms, 6 * degree, RESIDUAL_SEED)
}

/// Everything computed for one surface at one degree.
pub struct SurfaceRun {
    pub config: SurfaceConfig,
    pub atlas: SurfaceAtlas,
    pub curves: Vec<HomologyCurve>,
    pub degree: usize,
    pub oversample: usize,
    pub forms: Vec<PolyChartVector>,
    pub residual: Float,
    pub periods: PeriodData,
    pub aj: AbelJacobiMap,
}

impl SurfaceRun {
    pub fn compute(config: &SurfaceConfig, curves: Vec<HomologyCurve>, ctx: PrecisionCtx, degree: usize, oversample: usize) -> CliResult<Self> {
        let atlas = config.build(ctx)?;
        let lsq = LsqConfig::new(degree, oversample, ctx)?;
        let forms = solve_oneforms(&atlas, &lsq, GENUS)?;
        let residual = residual_sup(&atlas, &forms, degree);
        let (periods, aj) = compute_periods(&atlas, &forms, &curves)?;
        Ok(SurfaceRun { config: config.clone(), atlas, curves, degree, oversample, forms, residual, periods, aj })
    }

    pub fn basis_context(&self) -> CliResult<BasisContext> {
        Ok(BasisContext::new(&self.atlas, &self.periods, &self.aj)?)
    }

    pub fn periods_artifact(&self, provenance: Provenance) -> PeriodsArtifact {
        PeriodsArtifact {
            provenance,
            surface: self.config.clone(),
            degree: self.degree,
            oversample: self.oversample,
            residual: real_to_string(&self.residual),
            periods: PeriodsJson::new(&self.periods, &self.aj),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct SurfaceArtifact {
    pub provenance: Provenance,
    pub surface: SurfaceConfig,
    pub polygons: Vec<PolygonJson>,
    /// Angle sums at each vertex cycle (each should equal 2π).
    pub vertex_angle_sums: Vec<String>,
    pub relation_residual: Option<String>,
    pub intersection_matrix: Option<Vec<Vec<i64>>>,
}

#[derive(Serialize, Deserialize)]
pub struct PolygonJson {
    pub center: [String; 2],
    pub vertices: Vec<[String; 2]>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
pub struct EdgeJson {
    pub kind: String,
    pub partner: (usize, usize),
    /// Gluing map `z ↦ (αz + β)/(β̄z + ᾱ)`.
    pub alpha: [String; 2],
    pub beta: [String; 2],
}

pub fn surface_artifact(
    provenance: Provenance,
    config: &SurfaceConfig,
    atlas: &SurfaceAtlas,
    curves: Option<&[HomologyCurve]>,
) -> CliResult<SurfaceArtifact> {
    atlas.validate()?;
    let polygons = atlas
        .polygons
        .iter()
        .map(|p| PolygonJson {
            center: cplx_to_strings(&p.center),
            vertices: p.vertices.iter().map(cplx_to_strings).collect(),
            edges: p
                .edges
                .iter()
                .map(|e| EdgeJson {
                    kind: format!("{:?}", e.kind),
                    partner: e.partner,
                    alpha: cplx_to_strings(&e.map.alpha),
                    beta: cplx_to_strings(&e.map.beta),
                })
                .collect(),
        })
        .collect();
    let vertex_angle_sums = atlas
        .vertex_cycles()
        .iter()
        .map(|cycle| {
            let mut s = Float::new(atlas.prec());
            for &(p, v) in cycle {
                s += atlas.vertex_angle(p, v);
            }
            real_to_string(&s)
        })
        .collect();
    let (relation, intersections) = match curves {
        Some(c) => {
            let gens = deck_generators(atlas, c)?;
            (Some(real_to_string(&relation_residual(&gens))), Some(canonical_intersection_matrix(c, atlas)?))
        }
        None => (None, None),
    };
    Ok(SurfaceArtifact {
        provenance,
        surface: config.clone(),
        polygons,
        vertex_angle_sums,
        relation_residual: relation,
        intersection_matrix: intersections,
    })
}

#[derive(Serialize, Deserialize)]
pub struct FormsArtifact {
    pub provenance: Provenance,
    pub surface: SurfaceConfig,
    pub oversample: usize,
    pub residual: String,
    pub forms: FormsJson,
}

#[derive(Serialize, Deserialize)]
pub struct PeriodsArtifact {
    pub provenance: Provenance,
    pub surface: SurfaceConfig,
    pub degree: usize,
    pub oversample: usize,
    pub residual: String,
    pub periods: PeriodsJson,
}

/// A periods artifact decoded at its own precision.
pub struct LoadedPeriods {
    pub artifact: PeriodsArtifact,
    pub ctx: PrecisionCtx,
    pub atlas: SurfaceAtlas,
    pub periods: PeriodData,
    pub aj: AbelJacobiMap,
}

impl LoadedPeriods {
    pub fn basis_context(&self) -> CliResult<BasisContext> {
        Ok(BasisContext::new(&self.atlas, &self.periods, &self.aj)?)
    }
}

/// Reads `periods.json`; the manifest takes over the artifact's precision.
pub fn load_periods(manifest: &mut PipelineManifest, path: &Path) -> CliResult<LoadedPeriods> {
    let artifact: PeriodsArtifact = read_json(manifest, path)?;
    let p = &artifact.provenance;
    let ctx = PrecisionCtx::with_guard(p.bits, p.guard_bits)?;
    if manifest.bits != p.bits {
        log::info!("using the {} bits of {} instead of {}", p.bits, path.display(), manifest.bits);
        manifest.bits = p.bits;
    }
    let atlas = artifact.surface.build(ctx)?;
    let (periods, aj) = artifact.periods.decode(&ctx)?;
    if aj.per_polygon.len() != atlas.polygons.len() {
        return Err(CliError::Usage(format!("{} does not match its surface", path.display())));
    }
    Ok(LoadedPeriods { artifact, ctx, atlas, periods, aj })
}

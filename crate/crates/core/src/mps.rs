//! Method of particular solutions for the Laplace equation on a surface with
//! circular holes: basis enumeration, boundary sampling, least-squares fit
//! and an a-posteriori boundary error on fresh samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisContext, BasisFunction, GenericShift, PoleProfile};
use crate::error::{Error, Result};
use crate::hyperbolic::{hyperbolic_distance, Moebius};
use crate::numerics::{pi, Cplx, DenseMatrix, Householder};
use crate::surface::{RealSpec, SurfaceAtlas, SurfacePoint};

/// Fitting samples per hole per basis element.
pub const SAMPLE_FACTOR: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    Hyperbolic,
    /// Euclidean radius of the circle after moving the centre to 0.
    EuclideanCentered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// A real basis element: real or imaginary part of a basis function.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisElement {
    pub func: BasisFunction,
    pub part: Part,
}

impl BasisElement {
    pub fn label(&self) -> String {
        match (&self.func, self.part) {
            (BasisFunction::Constant | BasisFunction::LogSigma { .. }, _) => self.func.label(),
            (f, Part::Re) => format!("Re {}", f.label()),
            (f, Part::Im) => format!("Im {}", f.label()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BoundaryData {
    /// `c + Σ (s_k sin kθ + c_k cos kθ)`, entries `(k, s_k, c_k)`.
    Harmonics { constant: Float, terms: Vec<(u32, Float, Float)> },
    /// Restriction of a basis element (indexes into the basis poles).
    Element(BasisElement),
}

#[derive(Clone, Debug)]
pub struct Hole {
    pub center: SurfacePoint,
    /// Hyperbolic radius.
    pub radius: Float,
    pub data: BoundaryData,
}

impl Hole {
    pub fn new(center: SurfacePoint, radius: &Float, kind: RadiusKind, data: BoundaryData) -> Result<Self> {
        let prec = center.z.prec();
        let radius = match kind {
            RadiusKind::Hyperbolic => Float::with_val(prec, radius),
            RadiusKind::EuclideanCentered => {
                if !(*radius > 0 && *radius < 1) {
                    return Err(Error::Config("centered Euclidean radius must lie in (0, 1)".into()));
                }
                Float::with_val(prec, radius.atanh_ref()) * 2u32
            }
        };
        if radius <= 0 {
            return Err(Error::Config("hole radius must be positive".into()));
        }
        Ok(Hole { center, radius, data })
    }

    /// Euclidean radius `tanh(r/2)` of the centred circle.
    pub fn centred_radius(&self) -> Float {
        Float::with_val(self.radius.prec(), &self.radius / 2u32).tanh()
    }

    fn point_at(&self, theta: &Float) -> SurfacePoint {
        let t = Moebius::translation_to(&self.center.z);
        let rho = self.centred_radius();
        SurfacePoint::new(self.center.polygon, t.apply(&Cplx::cis(theta).scale(&rho)))
    }

    /// Whether `z` lies strictly inside the hole.
    pub fn contains(&self, z: &SurfacePoint) -> bool {
        z.polygon == self.center.polygon && hyperbolic_distance(&self.center.z, &z.z) < self.radius
    }
}

/// Checks that every circle stays inside its polygon and that the holes
/// are pairwise disjoint.
pub fn validate_holes(atlas: &SurfaceAtlas, holes: &[Hole]) -> Result<()> {
    if holes.is_empty() {
        return Err(Error::Config("at least one hole is required".into()));
    }
    let zero = Float::new(atlas.prec());
    for (i, h) in holes.iter().enumerate() {
        if h.center.polygon >= atlas.polygons.len() {
            return Err(Error::Config(format!("hole {i}: no polygon {}", h.center.polygon)));
        }
        let poly = &atlas.polygons[h.center.polygon];
        if sample_boundary(h, 64).iter().any(|(p, _)| poly.depth(&p.z) <= zero) {
            return Err(Error::Config(format!("hole {i} leaves polygon {}", h.center.polygon)));
        }
        for (j, o) in holes.iter().enumerate().take(i) {
            if o.center.polygon == h.center.polygon {
                let gap = hyperbolic_distance(&o.center.z, &h.center.z);
                if gap <= Float::with_val(atlas.prec(), &o.radius + &h.radius) {
                    return Err(Error::Config(format!("holes {j} and {i} overlap")));
                }
            }
        }
    }
    Ok(())
}

/// `S` points `T(tanh(r/2) e^{iθ_ℓ})` with `θ_ℓ = 2πℓ/S` and `T` the
/// translation moving 0 to the centre.
pub fn sample_boundary(hole: &Hole, s: usize) -> Vec<(SurfacePoint, Float)> {
    let prec = hole.center.z.prec();
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    (0..s)
        .map(|l| {
            let theta = Float::with_val(prec, &two_pi * l as u32) / s as u32;
            (hole.point_at(&theta), theta)
        })
        .collect()
}

fn random_boundary(hole: &Hole, s: usize, rng: &mut ChaCha8Rng) -> Vec<(SurfacePoint, Float)> {
    let prec = hole.center.z.prec();
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    (0..s)
        .map(|_| {
            let theta = Float::with_val(prec, &two_pi * rng.gen::<f64>());
            (hole.point_at(&theta), theta)
        })
        .collect()
}

/// Ordered real basis with its pole data.
#[derive(Clone, Debug)]
pub struct MpsBasis {
    pub elements: Vec<BasisElement>,
    pub poles: Vec<PoleProfile>,
    pub shift: GenericShift,
    pub order_cap: usize,
}

impl MpsBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Values of every element at `z`, sharing the pole stencils.
    pub fn row(&self, bc: &BasisContext, z: &SurfacePoint) -> Result<Vec<Float>> {
        let families: Vec<Vec<Cplx>> = if self.order_cap == 0 {
            vec![Vec::new(); self.poles.len()]
        } else {
            self.poles
                .iter()
                .map(|p| bc.pole_family(&self.shift, p, z, self.order_cap))
                .collect::<Result<_>>()?
        };
        let prec = bc.atlas.prec();
        self.elements
            .iter()
            .map(|e| {
                let v = match e.func {
                    BasisFunction::Constant => Cplx::one(prec),
                    BasisFunction::LogSigma { v, w } => {
                        Cplx::from_real(bc.log_sigma_hat(&self.shift, &self.poles[v].w, &self.poles[w].w, z)?)
                    }
                    BasisFunction::PHat { n, pole } | BasisFunction::PCheck { n, pole } | BasisFunction::PTilde { n, pole } => {
                        families[pole][n - 1].clone()
                    }
                };
                Ok(match e.part {
                    Part::Re => v.re,
                    Part::Im => v.im,
                })
            })
            .collect()
    }

    /// Value of one element at `z`.
    pub fn element_value(&self, bc: &BasisContext, e: &BasisElement, z: &SurfacePoint) -> Result<Float> {
        let v = bc.evaluate(&self.shift, &self.poles, &e.func, z)?;
        Ok(match e.part {
            Part::Re => v.re,
            Part::Im => v.im,
        })
    }
}

/// Constant, `log|σ̂|` between consecutive hole centres, then the real and
/// imaginary parts of the order `1 … n` pole functions at each centre.
pub fn enumerate_basis(bc: &BasisContext, holes: &[Hole], order_cap: usize, seed: u64) -> Result<MpsBasis> {
    let g = bc.genus();
    let centres: Vec<SurfacePoint> = holes.iter().map(|h| h.center.clone()).collect();
    let shift = bc.choose_generic_shift(&centres, seed)?;
    let poles: Vec<PoleProfile> = centres.iter().map(|c| bc.classify_pole(c, None)).collect::<Result<_>>()?;
    let mut elements = vec![BasisElement { func: BasisFunction::Constant, part: Part::Re }];
    for j in 1..poles.len() {
        elements.push(BasisElement { func: BasisFunction::LogSigma { v: j - 1, w: j }, part: Part::Re });
    }
    for (j, p) in poles.iter().enumerate() {
        for n in 1..=order_cap {
            let func = BasisFunction::pole_member(p, g, n, j);
            elements.push(BasisElement { func: func.clone(), part: Part::Re });
            elements.push(BasisElement { func, part: Part::Im });
        }
    }
    Ok(MpsBasis { elements, poles, shift, order_cap })
}

#[derive(Clone, Debug)]
pub struct MpsSolution {
    pub basis: MpsBasis,
    pub coeffs: Vec<Float>,
    /// Largest `|u − g|` over the fresh boundary points.
    pub boundary_error: Float,
    /// Largest `|u − g|` over the fitting points.
    pub fit_residual: Float,
    pub samples_per_hole: usize,
    pub fresh_per_hole: usize,
}

fn data_value(bc: &BasisContext, basis: &MpsBasis, hole: &Hole, z: &SurfacePoint, theta: &Float) -> Result<Float> {
    match &hole.data {
        BoundaryData::Harmonics { constant, terms } => {
            let prec = theta.prec();
            let mut s = Float::with_val(prec, constant);
            for (k, a, b) in terms {
                let kt = Float::with_val(prec, theta * *k);
                let (sn, cs) = kt.sin_cos(Float::new(prec));
                s += Float::with_val(prec, a * &sn) + Float::with_val(prec, b * &cs);
            }
            Ok(s)
        }
        BoundaryData::Element(e) => basis.element_value(bc, e, z),
    }
}

/// Least-squares fit with `factor·M` samples per hole; the error is taken
/// over `3·factor·M` seeded random boundary points per hole.
pub fn solve_mps(bc: &BasisContext, holes: &[Hole], basis: MpsBasis, factor: usize, seed: u64) -> Result<MpsSolution> {
    validate_holes(&bc.atlas, holes)?;
    let prec = bc.atlas.prec();
    let m = basis.len();
    let s = factor * m;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for h in holes {
        for (z, theta) in sample_boundary(h, s) {
            rows.push(basis.row(bc, &z)?.into_iter().map(Cplx::from_real).collect::<Vec<_>>());
            rhs.push(Cplx::from_real(data_value(bc, &basis, h, &z, &theta)?));
        }
    }
    let a = DenseMatrix::from_rows(&rows, prec);
    let b = DenseMatrix::from_columns(&[rhs.clone()], prec);
    let x = Householder::factor(&a)?.solve(&b);
    let coeffs: Vec<Float> = (0..m).map(|i| x[(i, 0)].re.clone()).collect();
    let mut fit_residual = Float::new(prec);
    for (row, target) in rows.iter().zip(&rhs) {
        let mut u = Float::new(prec);
        for (v, c) in row.iter().zip(&coeffs) {
            u += Float::with_val(prec, &v.re * c);
        }
        fit_residual = fit_residual.max(&Float::with_val(prec, &u - &target.re).abs());
    }
    let fresh = 3 * s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let mut boundary_error = Float::new(prec);
    for h in holes {
        for (z, theta) in random_boundary(h, fresh, &mut rng) {
            let u = combine(&basis.row(bc, &z)?, &coeffs);
            let target = data_value(bc, &basis, h, &z, &theta)?;
            boundary_error = boundary_error.max(&Float::with_val(prec, &u - &target).abs());
        }
    }
    Ok(MpsSolution {
        basis,
        coeffs,
        boundary_error,
        fit_residual,
        samples_per_hole: s,
        fresh_per_hole: fresh,
    })
}

fn combine(row: &[Float], coeffs: &[Float]) -> Float {
    let mut u = Float::new(coeffs[0].prec());
    for (v, c) in row.iter().zip(coeffs) {
        u += Float::with_val(u.prec(), v * c);
    }
    u
}

/// `Σ v_i φ_i(z)` at each point, optionally clamped to `[−t, t]`.
pub fn evaluate_solution(bc: &BasisContext, sol: &MpsSolution, pts: &[SurfacePoint], clamp: Option<&Float>) -> Result<Vec<Float>> {
    pts.iter()
        .map(|z| {
            let u = combine(&sol.basis.row(bc, z)?, &sol.coeffs);
            Ok(match clamp {
                Some(t) => {
                    let lo = Float::with_val(u.prec(), -t);
                    u.min(t).max(&lo)
                }
                None => u,
            })
        })
        .collect()
}

/// One `(M, boundary error)` pair per order cap.
pub fn convergence_sweep(bc: &BasisContext, holes: &[Hole], orders: &[usize], seed: u64) -> Result<Vec<(usize, Float)>> {
    orders
        .iter()
        .map(|&n| {
            let basis = enumerate_basis(bc, holes, n, seed)?;
            let m = basis.len();
            let sol = solve_mps(bc, holes, basis, SAMPLE_FACTOR, seed)?;
            log::info!("order {n}: M = {m}, boundary error {:e}", sol.boundary_error.to_f64());
            Ok((m, sol.boundary_error))
        })
        .collect()
}

/// Random points of the surface outside every hole.
pub fn interior_points(atlas: &SurfaceAtlas, holes: &[Hole], count: usize, seed: u64) -> Vec<SurfacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = rng.gen_range(0..atlas.polygons.len());
        let z = SurfacePoint::new(p, atlas.random_interior_point(p, 0.0, &mut rng));
        if holes.iter().all(|h| !h.contains(&z)) {
            out.push(z);
        }
    }
    out
}

/// JSON description of a hole problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub holes: Vec<HoleSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoleSpec {
    pub polygon: usize,
    /// Chart coordinate `[re, im]`; the polygon centre when absent.
    #[serde(default)]
    pub center: Option<[RealSpec; 2]>,
    pub radius: RealSpec,
    pub radius_kind: RadiusKind,
    #[serde(default)]
    pub constant: Option<RealSpec>,
    #[serde(default)]
    pub harmonics: Vec<HarmonicSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarmonicSpec {
    pub k: u32,
    #[serde(default)]
    pub sin: Option<RealSpec>,
    #[serde(default)]
    pub cos: Option<RealSpec>,
}

impl ProblemSpec {
    pub fn build(&self, atlas: &SurfaceAtlas) -> Result<Vec<Hole>> {
        let prec = atlas.prec();
        let real = |r: &Option<RealSpec>| r.as_ref().map_or(Ok(Float::new(prec)), |x| x.eval(prec));
        let holes = self
            .holes
            .iter()
            .map(|h| {
                let poly = atlas
                    .polygons
                    .get(h.polygon)
                    .ok_or_else(|| Error::Config(format!("no polygon {}", h.polygon)))?;
                let z = match &h.center {
                    Some([re, im]) => Cplx::new(re.eval(prec)?, im.eval(prec)?),
                    None => poly.center.clone(),
                };
                let terms = h
                    .harmonics
                    .iter()
                    .map(|t| Ok((t.k, real(&t.sin)?, real(&t.cos)?)))
                    .collect::<Result<_>>()?;
                let data = BoundaryData::Harmonics { constant: real(&h.constant)?, terms };
                Hole::new(SurfacePoint::new(h.polygon, z), &h.radius.eval(prec)?, h.radius_kind, data)
            })
            .collect::<Result<Vec<_>>>()?;
        validate_holes(atlas, &holes)?;
        Ok(holes)
    }

    /// Two centred holes of Euclidean radius 0.1 in the first and third
    /// polygons with data `sin 3θ` and `sin 7θ`.
    pub fn two_hole_benchmark() -> Self {
        let hole = |polygon: usize, k: u32| HoleSpec {
            polygon,
            center: None,
            radius: RealSpec::Number(0.1),
            radius_kind: RadiusKind::EuclideanCentered,
            constant: None,
            harmonics: vec![HarmonicSpec { k, sin: Some(RealSpec::Number(1.0)), cos: None }],
        };
        ProblemSpec { holes: vec![hole(0, 3), hole(2, 7)] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionCtx;

    fn hole_at_origin(r: f64) -> Hole {
        let prec = 128;
        let data = BoundaryData::Harmonics { constant: Float::new(prec), terms: vec![] };
        Hole::new(SurfacePoint::new(0, Cplx::zero(prec)), &Float::with_val(prec, r), RadiusKind::Hyperbolic, data).unwrap()
    }

    #[test]
    fn samples_at_origin_lie_on_tanh_circle() {
        let h = hole_at_origin(0.7);
        let rho = Float::with_val(128, 0.35f64).tanh();
        for (z, _) in sample_boundary(&h, 10) {
            assert!(Float::with_val(128, z.z.abs() - &rho).abs() < 1e-35);
        }
    }

    #[test]
    fn four_samples_at_quarter_turns() {
        let h = hole_at_origin(0.3);
        let angles: Vec<f64> = sample_boundary(&h, 4).iter().map(|(_, t)| t.to_f64()).collect();
        let q = std::f64::consts::FRAC_PI_2;
        for (a, b) in angles.iter().zip([0.0, q, 2.0 * q, 3.0 * q]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn samples_are_at_hyperbolic_radius() {
        let ctx = PrecisionCtx::new(128).unwrap();
        let data = BoundaryData::Harmonics { constant: Float::new(128), terms: vec![] };
        let c = SurfacePoint::new(1, ctx.cplx(0.31, -0.22));
        let r = ctx.real(0.25);
        let h = Hole::new(c, &r, RadiusKind::Hyperbolic, data).unwrap();
        let tol = ctx.tol_full();
        for (z, _) in sample_boundary(&h, 16) {
            let d = hyperbolic_distance(&h.center.z, &z.z);
            assert!(Float::with_val(128, &d - &r).abs() < tol);
        }
    }

    #[test]
    fn euclidean_reading_converts_radius() {
        let data = BoundaryData::Harmonics { constant: Float::new(128), terms: vec![] };
        let h = Hole::new(SurfacePoint::new(0, Cplx::zero(128)), &Float::with_val(128, 0.1), RadiusKind::EuclideanCentered, data)
            .unwrap();
        assert!(Float::with_val(128, h.centred_radius() - 0.1f64).abs() < 1e-35);
    }
}

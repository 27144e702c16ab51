//! Least-squares polynomial approximation of holomorphic 1-forms.
//!
//! A 1-form is represented by one polynomial per polygon. The periodicity
//! functional sums, over every glued edge pair, the squared mismatch
//! `P_p(z) − g'(z) P_q(g(z))` at regularly spaced edge samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cplx_from_strings, cplx_to_strings, ComplexPoly, Cplx, DenseMatrix, Householder, PrecisionCtx};
use crate::surface::SurfaceAtlas;

/// Per-polygon polynomials `(P_1, …, P_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyChartVector {
    pub per_polygon: Vec<ComplexPoly>,
    pub degree: usize,
}

impl PolyChartVector {
    pub fn zero(polygons: usize, degree: usize, prec: u32) -> Self {
        PolyChartVector {
            per_polygon: (0..polygons).map(|_| ComplexPoly::new(vec![Cplx::zero(prec); degree + 1])).collect(),
            degree,
        }
    }

    pub fn eval(&self, polygon: usize, z: &Cplx) -> Cplx {
        self.per_polygon[polygon].eval(z)
    }

    /// `Σ_l c_l V_l`.
    pub fn combine(vectors: &[PolyChartVector], coeffs: &[Cplx]) -> Self {
        let prec = coeffs[0].prec();
        let m = vectors[0].per_polygon.len();
        let degree = vectors.iter().map(|v| v.degree).max().unwrap();
        let mut out = PolyChartVector::zero(m, degree, prec);
        for (v, c) in vectors.iter().zip(coeffs) {
            for (o, p) in out.per_polygon.iter_mut().zip(&v.per_polygon) {
                o.add_scaled(c, p);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LsqConfig {
    pub degree: usize,
    /// Samples per edge `S = oversample · degree`.
    pub oversample: usize,
    pub ctx: PrecisionCtx,
}

impl LsqConfig {
    pub fn new(degree: usize, oversample: usize, ctx: PrecisionCtx) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Config(format!("degree must be at least the genus, got {degree}")));
        }
        if oversample < 1 {
            return Err(Error::Config("oversampling factor must be at least 1".into()));
        }
        Ok(LsqConfig { degree, oversample, ctx })
    }

    pub fn samples_per_edge(&self) -> usize {
        self.oversample * self.degree
    }
}

/// Points `γ(k/S)`, `k = 0..=S`, on an edge.
fn edge_samples(atlas: &SurfaceAtlas, p: usize, i: usize, s: usize) -> Vec<Cplx> {
    let prec = atlas.prec();
    let arc = &atlas.edge(p, i).arc;
    (0..=s).map(|k| arc.point(&(Float::with_val(prec, k) / s as u32))).collect()
}

/// Periodicity mismatch of `poly` at edge point `z` of `(p, i)`.
pub fn mismatch(atlas: &SurfaceAtlas, form: &PolyChartVector, p: usize, i: usize, z: &Cplx) -> Cplx {
    let e = atlas.edge(p, i);
    let q = e.partner.0;
    let w = e.map.apply(z);
    let d = e.map.derivative(z);
    let mut r = form.eval(p, z);
    r.sub_mul(&d, &form.eval(q, &w));
    r
}

/// `E(P) = Σ_pairs (1/S) Σ_k |P_p(z_k) − g'(z_k) P_q(g(z_k))|²`.
pub fn periodicity_functional(atlas: &SurfaceAtlas, form: &PolyChartVector, samples_per_edge: usize) -> Float {
    let prec = atlas.prec();
    let mut total = Float::new(prec);
    for (p, i, _, _) in atlas.glued_pairs() {
        let mut acc = Float::new(prec);
        for z in edge_samples(atlas, p, i, samples_per_edge) {
            acc += mismatch(atlas, form, p, i, &z).norm_sqr();
        }
        total += acc / samples_per_edge as u32;
    }
    total
}

/// Maximal pointwise mismatch over `per_edge` seeded uniformly random points
/// on every glued edge.
pub fn periodicity_residual_sup(atlas: &SurfaceAtlas, forms: &[PolyChartVector], per_edge: usize, seed: u64) -> Float {
    let prec = atlas.prec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Float::new(prec);
    for (p, i, _, _) in atlas.glued_pairs() {
        let arc = &atlas.edge(p, i).arc;
        for _ in 0..per_edge {
            let t = Float::with_val(prec, rng.gen::<f64>());
            let z = arc.point(&t);
            for f in forms {
                let r = mismatch(atlas, f, p, i, &z).abs();
                if r > worst {
                    worst = r;
                }
            }
        }
    }
    worst
}

/// Minimizers of the periodicity functional under the constraints
/// `P_1^{(j−1)}(0) = v_j`, one per constraint vector, sharing one QR.
pub fn solve_constrained(atlas: &SurfaceAtlas, cfg: &LsqConfig, constraints: &[Vec<Cplx>]) -> Result<Vec<PolyChartVector>> {
    let prec = cfg.ctx.bits;
    let n = cfg.degree;
    let g = constraints.first().map_or(0, |c| c.len());
    if g > n {
        return Err(Error::Config("more constraints than polynomial coefficients".into()));
    }
    let m = atlas.polygons.len();
    // Fixed leading coefficients of P_1 for each right-hand side.
    let fixed: Vec<Vec<Cplx>> = constraints
        .iter()
        .map(|v| {
            let mut fact = Float::with_val(prec, 1);
            v.iter()
                .enumerate()
                .map(|(j, x)| {
                    if j > 1 {
                        fact *= j as u32;
                    }
                    x.with_prec(prec).scale(&fact.clone().recip())
                })
                .collect()
        })
        .collect();
    let col_of = |p: usize, k: usize| -> Option<usize> {
        if p == 0 {
            (k >= g).then(|| k - g)
        } else {
            Some((n + 1 - g) + (p - 1) * (n + 1) + k)
        }
    };
    let cols = m * (n + 1) - g;
    let s = cfg.samples_per_edge();
    let pairs = atlas.glued_pairs();
    let rows = pairs.len() * (s + 1);
    if rows < cols {
        return Err(Error::Config(format!("{rows} samples cannot determine {cols} coefficients")));
    }
    let mut a = DenseMatrix::zeros(rows, cols, prec);
    let mut b = DenseMatrix::zeros(rows, constraints.len(), prec);
    let mut row = 0;
    for &(p, i, q, _) in &pairs {
        let e = atlas.edge(p, i);
        for z in edge_samples(atlas, p, i, s) {
            let w = e.map.apply(&z);
            let d = e.map.derivative(&z);
            let mut zk = Cplx::one(prec);
            let mut dwk = d.clone();
            for k in 0..=n {
                match col_of(p, k) {
                    Some(c) => a[(row, c)] = zk.clone(),
                    None => {
                        for (r, f) in fixed.iter().enumerate() {
                            b[(row, r)].sub_mul(&f[k], &zk);
                        }
                    }
                }
                match col_of(q, k) {
                    Some(c) => a[(row, c)] = -dwk.clone(),
                    None => {
                        for (r, f) in fixed.iter().enumerate() {
                            b[(row, r)].add_mul(&f[k], &dwk);
                        }
                    }
                }
                zk = &zk * &z;
                dwk = &dwk * &w;
            }
            row += 1;
        }
    }
    let qr = Householder::factor(&a)?;
    let x = qr.solve(&b);
    let mut out = Vec::with_capacity(constraints.len());
    for (r, f) in fixed.iter().enumerate() {
        let mut per_polygon = Vec::with_capacity(m);
        for p in 0..m {
            let coeffs = (0..=n)
                .map(|k| match col_of(p, k) {
                    Some(c) => x[(c, r)].clone(),
                    None => f[k].clone(),
                })
                .collect();
            per_polygon.push(ComplexPoly::new(coeffs));
        }
        out.push(PolyChartVector { per_polygon, degree: n });
    }
    Ok(out)
}

/// `Q^N_l` for `l = 1..=g`: constraints `P_1^{(j−1)}(0) = δ_{jl}`.
pub fn solve_oneforms(atlas: &SurfaceAtlas, cfg: &LsqConfig, genus: usize) -> Result<Vec<PolyChartVector>> {
    let prec = cfg.ctx.bits;
    let constraints: Vec<Vec<Cplx>> = (0..genus)
        .map(|l| (0..genus).map(|j| if j == l { Cplx::one(prec) } else { Cplx::zero(prec) }).collect())
        .collect();
    solve_constrained(atlas, cfg, &constraints)
}

/// Single form `Q^N_l` (`l` is 1-based).
pub fn solve_oneform(atlas: &SurfaceAtlas, cfg: &LsqConfig, genus: usize, l: usize) -> Result<PolyChartVector> {
    assert!((1..=genus).contains(&l), "form index out of range");
    Ok(solve_oneforms(atlas, cfg, genus)?.swap_remove(l - 1))
}

/// Flags the base point as (numerically) Weierstrass when some minimal
/// functional value fails to drop tenfold from degree `n0` to `2 n0`.
pub fn detect_weierstrass_base(atlas: &SurfaceAtlas, cfg: &LsqConfig, genus: usize, n0: usize) -> Result<bool> {
    let lo = LsqConfig { degree: n0, ..*cfg };
    let hi = LsqConfig { degree: 2 * n0, ..*cfg };
    let f_lo = solve_oneforms(atlas, &lo, genus)?;
    let f_hi = solve_oneforms(atlas, &hi, genus)?;
    for (a, b) in f_lo.iter().zip(&f_hi) {
        let e_lo = periodicity_functional(atlas, a, lo.samples_per_edge());
        let e_hi = periodicity_functional(atlas, b, hi.samples_per_edge());
        log::debug!("weierstrass probe: E({n0}) = {:e}, E({}) = {:e}", e_lo.to_f64(), 2 * n0, e_hi.to_f64());
        if e_hi * 10u32 > e_lo {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Serialized form of a list of polygon-polynomial vectors.
#[derive(Serialize, Deserialize)]
pub struct FormsJson {
    pub degree: usize,
    /// `forms[l][p][k] = [re, im]`.
    pub forms: Vec<Vec<Vec<[String; 2]>>>,
}

impl FormsJson {
    pub fn from_forms(forms: &[PolyChartVector]) -> Self {
        FormsJson {
            degree: forms[0].degree,
            forms: forms
                .iter()
                .map(|f| f.per_polygon.iter().map(|p| p.coeffs.iter().map(cplx_to_strings).collect()).collect())
                .collect(),
        }
    }

    pub fn to_forms(&self, prec: u32) -> Result<Vec<PolyChartVector>> {
        self.forms
            .iter()
            .map(|f| {
                let per_polygon = f
                    .iter()
                    .map(|p| {
                        let coeffs = p.iter().map(|c| cplx_from_strings(c, prec)).collect::<Result<Vec<_>>>()?;
                        if coeffs.is_empty() {
                            return Err(Error::Config("empty polynomial".into()));
                        }
                        Ok(ComplexPoly::new(coeffs))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PolyChartVector { per_polygon, degree: self.degree })
            })
            .collect()
    }
}

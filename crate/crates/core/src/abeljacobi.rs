//! Canonical normalization of 1-forms, period matrix, Abel–Jacobi map and
//! Riemann constant. Every integrand is a polynomial in each chart, so all
//! integrals are antiderivative differences.

use std::collections::VecDeque;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cholesky, cplx_from_strings, cplx_to_strings, ComplexPoly, Cplx, DenseMatrix, PrecisionCtx};
use crate::oneforms::PolyChartVector;
use crate::surface::{canonical_order, HomologyCurve, SurfaceAtlas, SurfacePoint};

/// `∫_c Q` for a chain of chords, summing antiderivative differences.
pub fn integrate_along(curve: &HomologyCurve, form: &PolyChartVector) -> Cplx {
    let prec = form.per_polygon[0].prec();
    let mut prims: Vec<Option<ComplexPoly>> = vec![None; form.per_polygon.len()];
    let mut total = Cplx::zero(prec);
    for s in &curve.segments {
        let prim = prims[s.polygon].get_or_insert_with(|| form.per_polygon[s.polygon].antiderivative(&Cplx::zero(prec)));
        total += &(&prim.eval(&s.end) - &prim.eval(&s.start));
    }
    total.with_prec(prec)
}

/// Matrix `A_{kl} = ∫_{c_k} Q_l`.
fn period_table(curves: &[&HomologyCurve], forms: &[PolyChartVector], prec: u32) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(curves.len(), forms.len(), prec);
    for (k, c) in curves.iter().enumerate() {
        for (l, f) in forms.iter().enumerate() {
            a[(k, l)] = integrate_along(c, f);
        }
    }
    a
}

/// Returns `Q̃_k = Σ_l (A⁻¹)_{lk} Q_l` and `A_{kl} = ∫_{a_k} Q_l`.
pub fn normalize_forms(raw: &[PolyChartVector], curves: &[HomologyCurve]) -> Result<(Vec<PolyChartVector>, DenseMatrix)> {
    let ordered = canonical_order(curves)?;
    let g = raw.len();
    if ordered.len() != 2 * g {
        return Err(Error::Config(format!("{} forms but {} curves", g, ordered.len())));
    }
    let prec = raw[0].per_polygon[0].prec();
    let a = period_table(&ordered[..g], raw, prec);
    let inv = a.inverse().map_err(|_| Error::SingularNormalization)?;
    let normalized = (0..g)
        .map(|k| {
            let coeffs: Vec<Cplx> = (0..g).map(|l| inv[(l, k)].clone()).collect();
            PolyChartVector::combine(raw, &coeffs)
        })
        .collect();
    Ok((normalized, a))
}

/// Symmetrized `τ_{jk} = ½(∫_{b_j} Q̃_k + ∫_{b_k} Q̃_j)` and the largest
/// pre-symmetrization asymmetry `|τ_{jk} − τ_{kj}|`.
pub fn period_matrix(normalized: &[PolyChartVector], curves: &[HomologyCurve]) -> Result<(DenseMatrix, Float)> {
    let ordered = canonical_order(curves)?;
    let g = normalized.len();
    let prec = normalized[0].per_polygon[0].prec();
    let raw = period_table(&ordered[g..], normalized, prec);
    let mut tau = DenseMatrix::zeros(g, g, prec);
    let mut asym = Float::new(prec);
    for j in 0..g {
        for k in 0..g {
            let d = raw[(j, k)].dist(&raw[(k, j)]);
            if d > asym {
                asym = d;
            }
            tau[(j, k)] = (&raw[(j, k)] + &raw[(k, j)]).scale_f64(0.5);
        }
    }
    cholesky(&imag_part(&tau))?;
    Ok((tau, asym))
}

/// `Im M` as a complex matrix with zero imaginary parts.
pub fn imag_part(m: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.rows(), m.cols(), m.prec());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = Cplx::from_real(m[(i, j)].im.clone());
        }
    }
    out
}

/// Per-polygon primitives `U_{l|p}` of the normalized forms, glued along a
/// breadth-first spanning tree of the polygon adjacency graph.
#[derive(Clone, Debug)]
pub struct AbelJacobiMap {
    /// `per_polygon[p][l] = U_{l|p}`.
    pub per_polygon: Vec<Vec<ComplexPoly>>,
    /// `forms[l] = Q̃_l`.
    pub forms: Vec<PolyChartVector>,
    /// Tree edges `(p, i, q)`: polygon `q` was reached across edge `i` of `p`.
    pub tree: Vec<(usize, usize, usize)>,
}

impl AbelJacobiMap {
    pub fn build(atlas: &SurfaceAtlas, normalized: &[PolyChartVector]) -> Self {
        let prec = atlas.prec();
        let m = atlas.polygons.len();
        let g = normalized.len();
        let raw: Vec<Vec<ComplexPoly>> = (0..m)
            .map(|p| normalized.iter().map(|f| f.per_polygon[p].antiderivative(&Cplx::zero(prec))).collect())
            .collect();
        let mut per_polygon: Vec<Option<Vec<ComplexPoly>>> = vec![None; m];
        per_polygon[0] = Some(raw[0].clone());
        let mut tree = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        let half = Float::with_val(prec, 0.5);
        while let Some(p) = queue.pop_front() {
            for (i, e) in atlas.polygons[p].edges.iter().enumerate() {
                let q = e.partner.0;
                if per_polygon[q].is_some() {
                    continue;
                }
                let z = e.arc.point(&half);
                let w = e.map.apply(&z);
                let parent = per_polygon[p].as_ref().unwrap();
                let polys = (0..g)
                    .map(|l| {
                        let shift = &parent[l].eval(&z) - &raw[q][l].eval(&w);
                        raw[q][l].add(&ComplexPoly::constant(shift))
                    })
                    .collect();
                per_polygon[q] = Some(polys);
                tree.push((p, i, q));
                queue.push_back(q);
            }
        }
        log::debug!("abel-jacobi spanning tree {:?}", tree);
        AbelJacobiMap {
            per_polygon: per_polygon.into_iter().map(|p| p.expect("polygon graph is connected")).collect(),
            forms: normalized.to_vec(),
            tree,
        }
    }

    pub fn genus(&self) -> usize {
        self.forms.len()
    }

    pub fn eval(&self, p: usize, z: &Cplx) -> Vec<Cplx> {
        self.per_polygon[p].iter().map(|u| u.eval(z)).collect()
    }

    pub fn eval_point(&self, x: &SurfacePoint) -> Vec<Cplx> {
        self.eval(x.polygon, &x.z)
    }

    /// `u^{(n)}` at `z` in chart `p`, `n ≥ 0`.
    pub fn derivative(&self, p: usize, z: &Cplx, n: usize) -> Vec<Cplx> {
        self.per_polygon[p].iter().map(|u| u.derivative_at(z, n)).collect()
    }

    /// Constant `U_q(g(z)) − U_p(z)` across edge `(p, i)`, measured at the
    /// edge midpoint.
    pub fn edge_jump(&self, atlas: &SurfaceAtlas, p: usize, i: usize) -> Vec<Cplx> {
        let e = atlas.edge(p, i);
        let z = e.arc.point(&Float::with_val(atlas.prec(), 0.5));
        let w = e.map.apply(&z);
        let a = self.eval(p, &z);
        let b = self.eval(e.partner.0, &w);
        b.iter().zip(&a).map(|(x, y)| x - y).collect()
    }
}

/// Decomposes `v = m + τ n` with real `m, n` and returns the distance of
/// `(m, n)` to the nearest integer vectors together with those integers.
pub fn lattice_coordinates(tau: &DenseMatrix, v: &[Cplx]) -> Result<(Float, Vec<i64>, Vec<i64>)> {
    let g = v.len();
    let prec = tau.prec();
    let im = imag_part(tau);
    let rhs = DenseMatrix::from_columns(&[v.iter().map(|x| Cplx::from_real(x.im.clone())).collect()], prec);
    let n = im.solve(&rhs)?;
    let mut dist = Float::new(prec);
    let mut ni = Vec::with_capacity(g);
    let mut mi = Vec::with_capacity(g);
    for j in 0..g {
        let x = n[(j, 0)].re.clone();
        let r = x.clone().round();
        dist = dist.max(&Float::with_val(prec, &x - &r).abs());
        ni.push(r.to_f64() as i64);
    }
    for j in 0..g {
        let mut m = v[j].re.clone();
        for k in 0..g {
            m -= Float::with_val(prec, &tau[(j, k)].re * &n[(k, 0)].re);
        }
        let r = m.clone().round();
        dist = dist.max(&Float::with_val(prec, &m - &r).abs());
        mi.push(r.to_f64() as i64);
    }
    Ok((dist, mi, ni))
}

/// `𝒦_j = ½τ_{jj} − Σ_k ∫_{a_k} u_j u_k′ dz`, each loop integral taken along
/// the lift that starts at `0` in the base chart, runs to the start of the
/// curve, follows it with analytically continued `u`, and returns to the
/// image of `0`.
pub fn riemann_constant(aj: &AbelJacobiMap, tau: &DenseMatrix, curves: &[HomologyCurve]) -> Result<Vec<Cplx>> {
    let ordered = canonical_order(curves)?;
    let g = aj.genus();
    let prec = tau.prec();
    let m = aj.per_polygon.len();
    // prim[p][j][k] = ∫ U_j U_k′ in chart p.
    let prim: Vec<Vec<Vec<ComplexPoly>>> = (0..m)
        .map(|p| {
            (0..g)
                .map(|j| {
                    (0..g)
                        .map(|k| aj.per_polygon[p][j].mul(&aj.forms[k].per_polygon[p]).antiderivative(&Cplx::zero(prec)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let origin = Cplx::zero(prec);
    let mut k_vec: Vec<Cplx> = (0..g).map(|j| tau[(j, j)].scale_f64(0.5)).collect();
    for k in 0..g {
        let curve = ordered[k];
        let first = curve.segments.first().ok_or_else(|| Error::Config("empty curve".into()))?;
        let last = curve.segments.last().unwrap();
        if first.polygon != 0 || last.polygon != 0 {
            return Err(Error::Config(format!("curve '{}' must start and end in the base polygon", curve.label)));
        }
        // Offsets of the continued u relative to the chart primitives.
        let mut offset: Vec<Cplx> = vec![Cplx::zero(prec); g];
        let mut integral: Vec<Cplx> = vec![Cplx::zero(prec); g];
        let piece = |p: usize, a: &Cplx, b: &Cplx, offset: &[Cplx], integral: &mut [Cplx]| {
            let du = &aj.per_polygon[p][k].eval(b) - &aj.per_polygon[p][k].eval(a);
            for j in 0..g {
                let pr = &prim[p][j][k];
                integral[j] += &(&pr.eval(b) - &pr.eval(a));
                integral[j].add_mul(&offset[j], &du);
            }
        };
        piece(0, &origin, &first.start, &offset, &mut integral);
        for (idx, s) in curve.segments.iter().enumerate() {
            if idx > 0 {
                let prev = &curve.segments[idx - 1];
                if prev.polygon != s.polygon || prev.end != s.start {
                    let before = aj.eval(prev.polygon, &prev.end);
                    let after = aj.eval(s.polygon, &s.start);
                    for j in 0..g {
                        offset[j] += &(&before[j] - &after[j]);
                    }
                }
            }
            piece(s.polygon, &s.start, &s.end, &offset, &mut integral);
        }
        piece(0, &last.end, &origin, &offset, &mut integral);
        for j in 0..g {
            k_vec[j] -= &integral[j];
        }
    }
    Ok(k_vec.into_iter().map(|x| x.with_prec(prec)).collect())
}

/// `(Aτ + B)(Cτ + D)⁻¹` for the integer matrix `[[A, B], [C, D]]`.
pub fn symplectic_action(tau: &DenseMatrix, m: &[Vec<i64>]) -> Result<DenseMatrix> {
    let g = tau.rows();
    let prec = tau.prec();
    let block = |r0: usize, c0: usize| {
        let rows: Vec<Vec<Cplx>> = (0..g)
            .map(|i| (0..g).map(|j| Cplx::from_f64(prec, m[r0 + i][c0 + j] as f64, 0.0)).collect())
            .collect();
        DenseMatrix::from_rows(&rows, prec)
    };
    let add = |x: &DenseMatrix, y: &DenseMatrix| {
        let mut z = x.clone();
        for i in 0..g {
            for j in 0..g {
                z[(i, j)] += &y[(i, j)];
            }
        }
        z
    };
    let num = add(&block(0, 0).matmul(tau), &block(0, g));
    let den = add(&block(g, 0).matmul(tau), &block(g, g));
    // X den = num  ⇔  denᵀ Xᵀ = numᵀ
    Ok(den.transpose().solve(&num.transpose())?.transpose())
}

/// Everything downstream consumers need from the period computation.
#[derive(Clone, Debug)]
pub struct PeriodData {
    pub a_matrix: DenseMatrix,
    pub tau: DenseMatrix,
    pub riemann_const: Vec<Cplx>,
    pub asymmetry: Float,
}

/// Normalizes `raw`, then computes `τ`, the Abel–Jacobi map and `𝒦`.
pub fn compute_periods(
    atlas: &SurfaceAtlas,
    raw: &[PolyChartVector],
    curves: &[HomologyCurve],
) -> Result<(PeriodData, AbelJacobiMap)> {
    let (normalized, a_matrix) = normalize_forms(raw, curves)?;
    let (tau, asymmetry) = period_matrix(&normalized, curves)?;
    let aj = AbelJacobiMap::build(atlas, &normalized);
    let riemann_const = riemann_constant(&aj, &tau, curves)?;
    Ok((PeriodData { a_matrix, tau, riemann_const, asymmetry }, aj))
}

type Entry = [String; 2];

/// Decimal-string serialization of [`PeriodData`] and the Abel–Jacobi map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodsJson {
    pub tau: Vec<Vec<Entry>>,
    pub a_matrix: Vec<Vec<Entry>>,
    pub riemann_const: Vec<Entry>,
    pub asymmetry: String,
    /// `forms[l][p]` coefficient lists of `Q̃_l`.
    pub forms: Vec<Vec<Vec<Entry>>>,
    /// `abel_jacobi[p][l]` coefficient lists of `U_{l|p}`.
    pub abel_jacobi: Vec<Vec<Vec<Entry>>>,
    pub tree: Vec<(usize, usize, usize)>,
}

fn matrix_json(m: &DenseMatrix) -> Vec<Vec<Entry>> {
    m.to_rows().iter().map(|r| r.iter().map(cplx_to_strings).collect()).collect()
}

fn matrix_from_json(rows: &[Vec<Entry>], prec: u32) -> Result<DenseMatrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|e| cplx_from_strings(e, prec)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseMatrix::from_rows(&rows, prec))
}

fn poly_json(p: &ComplexPoly) -> Vec<Entry> {
    p.coeffs.iter().map(cplx_to_strings).collect()
}

fn poly_from_json(c: &[Entry], prec: u32) -> Result<ComplexPoly> {
    if c.is_empty() {
        return Err(Error::Config("empty polynomial".into()));
    }
    Ok(ComplexPoly::new(c.iter().map(|e| cplx_from_strings(e, prec)).collect::<Result<Vec<_>>>()?))
}

impl PeriodsJson {
    pub fn new(data: &PeriodData, aj: &AbelJacobiMap) -> Self {
        PeriodsJson {
            tau: matrix_json(&data.tau),
            a_matrix: matrix_json(&data.a_matrix),
            riemann_const: data.riemann_const.iter().map(cplx_to_strings).collect(),
            asymmetry: crate::numerics::real_to_string(&data.asymmetry),
            forms: aj.forms.iter().map(|f| f.per_polygon.iter().map(poly_json).collect()).collect(),
            abel_jacobi: aj.per_polygon.iter().map(|us| us.iter().map(poly_json).collect()).collect(),
            tree: aj.tree.clone(),
        }
    }

    pub fn decode(&self, ctx: &PrecisionCtx) -> Result<(PeriodData, AbelJacobiMap)> {
        let prec = ctx.bits;
        let data = PeriodData {
            tau: matrix_from_json(&self.tau, prec)?,
            a_matrix: matrix_from_json(&self.a_matrix, prec)?,
            riemann_const: self.riemann_const.iter().map(|e| cplx_from_strings(e, prec)).collect::<Result<_>>()?,
            asymmetry: crate::numerics::parse_real(&self.asymmetry, prec)?,
        };
        let forms = self
            .forms
            .iter()
            .map(|f| {
                let per_polygon = f.iter().map(|c| poly_from_json(c, prec)).collect::<Result<Vec<_>>>()?;
                let degree = per_polygon.iter().map(|p| p.degree()).max().unwrap_or(0);
                Ok(PolyChartVector { per_polygon, degree })
            })
            .collect::<Result<Vec<_>>>()?;
        let per_polygon = self
            .abel_jacobi
            .iter()
            .map(|us| us.iter().map(|c| poly_from_json(c, prec)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok((data, AbelJacobiMap { per_polygon, forms, tree: self.tree.clone() }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::CurveSegment;

    fn segment(p: usize, a: (f64, f64), b: (f64, f64)) -> CurveSegment {
        CurveSegment { polygon: p, start: Cplx::from_f64(128, a.0, a.1), end: Cplx::from_f64(128, b.0, b.1) }
    }

    fn single(coeffs: &[(f64, f64)]) -> PolyChartVector {
        let poly = ComplexPoly::new(coeffs.iter().map(|&(re, im)| Cplx::from_f64(128, re, im)).collect());
        PolyChartVector { per_polygon: vec![poly], degree: coeffs.len() - 1 }
    }

    #[test]
    fn integrals_of_simple_polynomials() {
        let line = HomologyCurve { label: "c".into(), segments: vec![segment(0, (0.0, 0.0), (1.0, 0.0))] };
        assert!(integrate_along(&line, &single(&[(0.0, 0.0)])).is_zero());
        let z2 = integrate_along(&line, &single(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]));
        assert_eq!(z2.re, Float::with_val(128, 1) / 3u32);
        assert!(z2.im.is_zero());
        let loop_ = HomologyCurve {
            label: "c".into(),
            segments: vec![
                segment(0, (0.1, 0.0), (0.0, 0.2)),
                segment(0, (0.0, 0.2), (-0.3, -0.1)),
                segment(0, (-0.3, -0.1), (0.1, 0.0)),
            ],
        };
        assert!(integrate_along(&loop_, &single(&[(1.0, 0.0)])).abs() < crate::numerics::pow2(128, 120));
    }

    #[test]
    fn monomials_integrate_exactly() {
        let a = Cplx::from_f64(128, 0.125, -0.25);
        let b = Cplx::from_f64(128, -0.375, 0.5);
        let seg = HomologyCurve { label: "c".into(), segments: vec![CurveSegment { polygon: 0, start: a.clone(), end: b.clone() }] };
        for d in 0..12usize {
            let mut coeffs = vec![(0.0, 0.0); d + 1];
            coeffs[d] = (1.0, 0.0);
            let got = integrate_along(&seg, &single(&coeffs));
            let want = (&b.powi(d as i64 + 1) - &a.powi(d as i64 + 1)).scale(&(Float::with_val(128, d + 1).recip()));
            assert!(got.dist(&want) <= crate::numerics::pow2(128, 125), "degree {d}");
        }
    }

    #[test]
    fn lattice_decomposition() {
        let prec = 128;
        let tau = DenseMatrix::from_rows(
            &[
                vec![Cplx::from_f64(prec, 0.2, 1.1), Cplx::from_f64(prec, 0.3, 0.4)],
                vec![Cplx::from_f64(prec, 0.3, 0.4), Cplx::from_f64(prec, -0.1, 0.9)],
            ],
            prec,
        );
        // v = (2, -1) + τ (1, -3)
        let v: Vec<Cplx> = (0..2)
            .map(|j| {
                let m = [2.0, -1.0][j];
                let mut x = Cplx::from_f64(prec, m, 0.0);
                x.add_mul(&tau[(j, 0)], &Cplx::from_f64(prec, 1.0, 0.0));
                x.add_mul(&tau[(j, 1)], &Cplx::from_f64(prec, -3.0, 0.0));
                x
            })
            .collect();
        let (d, m, n) = lattice_coordinates(&tau, &v).unwrap();
        assert!(d < crate::numerics::pow2(prec, 100));
        assert_eq!(m, vec![2, -1]);
        assert_eq!(n, vec![1, -3]);
    }
}

//! Closed curves on the surface as chains of chords inside polygon charts,
//! their deck-group elements and signed intersection numbers.

use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use super::SurfaceAtlas;
use crate::error::{Error, Result};
use crate::hyperbolic::Moebius;
use crate::numerics::{cplx_from_strings, cplx_to_strings, Cplx};

/// Chord `[start, end]` inside polygon `polygon`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSegment {
    pub polygon: usize,
    pub start: Cplx,
    pub end: Cplx,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomologyCurve {
    pub label: String,
    pub segments: Vec<CurveSegment>,
}

/// One step of a combinatorial route: cross edge `edge` of the current
/// polygon at fraction `at` of its (hyperbolic) length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteStep {
    pub edge: usize,
    pub at: f64,
}

#[derive(Serialize, Deserialize)]
struct SegmentJson {
    polygon: usize,
    start: [String; 2],
    end: [String; 2],
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    label: String,
    segments: Vec<SegmentJson>,
}

impl HomologyCurve {
    /// Realizes a route starting and ending at a hub point of polygon 0.
    /// Inside each visited polygon the curve runs entry → hub → exit, hubs
    /// being the polygon reference points shifted by `hub_shift`.
    pub fn from_route(atlas: &SurfaceAtlas, label: &str, steps: &[RouteStep], hub_shift: &Cplx) -> Result<Self> {
        let prec = atlas.prec();
        let hub = |p: usize| &atlas.polygons[p].center + hub_shift;
        let mut segments = Vec::new();
        let mut p = 0usize;
        let mut pos = hub(0);
        for step in steps {
            let poly = &atlas.polygons[p];
            let edge = poly
                .edges
                .get(step.edge)
                .ok_or_else(|| Error::Config(format!("route in '{label}' uses missing edge {} of polygon {p}", step.edge)))?;
            if !(0.0 < step.at && step.at < 1.0) {
                return Err(Error::Config(format!("route crossing fraction {} outside (0,1)", step.at)));
            }
            let x = edge.arc.point(&Float::with_val(prec, step.at));
            let h = hub(p);
            if pos != h {
                segments.push(CurveSegment { polygon: p, start: pos.clone(), end: h.clone() });
                pos = h;
            }
            segments.push(CurveSegment { polygon: p, start: pos, end: x.clone() });
            pos = edge.map.apply(&x);
            p = edge.partner.0;
        }
        if p != 0 {
            return Err(Error::Config(format!("route '{label}' ends in polygon {p}, not in the base polygon")));
        }
        let h = hub(0);
        segments.push(CurveSegment { polygon: 0, start: pos, end: h });
        Ok(HomologyCurve { label: label.to_string(), segments })
    }

    pub fn reversed(&self) -> Self {
        HomologyCurve {
            label: self.label.clone(),
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| CurveSegment { polygon: s.polygon, start: s.end.clone(), end: s.start.clone() })
                .collect(),
        }
    }

    /// Edges `(p, i)` crossed between consecutive segments, in order,
    /// including the closing transition from the last segment to the first.
    pub fn crossings(&self, atlas: &SurfaceAtlas) -> Result<Vec<(usize, usize)>> {
        if self.segments.is_empty() {
            return Ok(Vec::new());
        }
        let tol = atlas.ctx.tol_half();
        let n = self.segments.len();
        let mut out = Vec::new();
        for k in 0..n {
            let s = &self.segments[k];
            let t = &self.segments[(k + 1) % n];
            if s.polygon >= atlas.polygons.len() {
                return Err(Error::Config(format!("curve '{}' references polygon {}", self.label, s.polygon)));
            }
            if s.polygon == t.polygon && s.end.dist(&t.start) <= tol {
                continue;
            }
            let poly = &atlas.polygons[s.polygon];
            let mut found = None;
            for (i, e) in poly.edges.iter().enumerate() {
                if e.partner.0 != t.polygon || Float::with_val(atlas.prec(), e.side_value(&s.end).abs_ref()) > tol {
                    continue;
                }
                if e.map.apply(&s.end).dist(&t.start) <= tol {
                    found = Some(i);
                    break;
                }
            }
            match found {
                Some(i) => out.push((s.polygon, i)),
                None => {
                    return Err(Error::Config(format!(
                        "curve '{}' breaks between segments {k} and {}",
                        self.label,
                        (k + 1) % n
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Deck transformation of the lift starting in the chart of the first
    /// segment: the composition of inverse gluing maps along the crossings.
    pub fn deck_element(&self, atlas: &SurfaceAtlas) -> Result<Moebius> {
        let mut t = Moebius::identity(atlas.prec());
        for (p, i) in self.crossings(atlas)? {
            t = t.compose(&atlas.edge(p, i).map.inverse());
        }
        Ok(t)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let c = CurveJson {
            label: self.label.clone(),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentJson { polygon: s.polygon, start: cplx_to_strings(&s.start), end: cplx_to_strings(&s.end) })
                .collect(),
        };
        serde_json::to_value(c).expect("curve serializes")
    }

    pub fn save_all(curves: &[HomologyCurve], path: &Path) -> Result<()> {
        let v: Vec<serde_json::Value> = curves.iter().map(|c| c.to_json_value()).collect();
        std::fs::write(path, serde_json::to_string_pretty(&v)?)?;
        Ok(())
    }

    pub fn parse_all(text: &str, prec: u32) -> Result<Vec<HomologyCurve>> {
        let raw: Vec<CurveJson> = serde_json::from_str(text)?;
        raw.into_iter()
            .map(|c| {
                let segments = c
                    .segments
                    .into_iter()
                    .map(|s| {
                        Ok(CurveSegment {
                            polygon: s.polygon,
                            start: cplx_from_strings(&s.start, prec)?,
                            end: cplx_from_strings(&s.end, prec)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(HomologyCurve { label: c.label, segments })
            })
            .collect()
    }

    pub fn load_all(path: &Path, prec: u32) -> Result<Vec<HomologyCurve>> {
        Self::parse_all(&std::fs::read_to_string(path)?, prec)
    }
}

/// Orders a curve set as `a1, …, ag, b1, …, bg` by label.
pub fn canonical_order(curves: &[HomologyCurve]) -> Result<Vec<&HomologyCurve>> {
    let g = curves.len() / 2;
    if curves.len() != 2 * g || g == 0 {
        return Err(Error::Config(format!("expected 2g curves, got {}", curves.len())));
    }
    let mut out = Vec::with_capacity(2 * g);
    for prefix in ["a", "b"] {
        for k in 1..=g {
            let label = format!("{prefix}{k}");
            let c = curves
                .iter()
                .find(|c| c.label == label)
                .ok_or_else(|| Error::Config(format!("missing curve '{label}'")))?;
            out.push(c);
        }
    }
    Ok(out)
}

/// Deck generators `A_1, B_1, …, A_g, B_g`, checked against the surface
/// group relation `Π [A_k, B_k] = ±I`.
pub fn deck_generators(atlas: &SurfaceAtlas, curves: &[HomologyCurve]) -> Result<Vec<Moebius>> {
    let ordered = canonical_order(curves)?;
    let g = ordered.len() / 2;
    let mut gens = Vec::with_capacity(2 * g);
    for k in 0..g {
        for c in [ordered[k], ordered[g + k]] {
            if c.segments.first().map(|s| s.polygon) != Some(0) {
                return Err(Error::Config(format!("curve '{}' must start in the base polygon", c.label)));
            }
            gens.push(c.deck_element(atlas)?);
        }
    }
    let residual = relation_residual(&gens);
    if residual > atlas.ctx.tol_half() {
        return Err(Error::RelationViolated(residual.to_f64()));
    }
    Ok(gens)
}

/// Distance of `Π_k A_k B_k A_k⁻¹ B_k⁻¹` from `±I`.
pub fn relation_residual(gens: &[Moebius]) -> Float {
    let mut prod = Moebius::identity(gens[0].prec());
    for pair in gens.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        prod = prod.compose(a).compose(b).compose(&a.inverse()).compose(&b.inverse());
    }
    prod.distance_to_identity()
}

fn cross(u: &Cplx, v: &Cplx) -> Float {
    let mut c = Float::with_val(u.prec(), &u.re * &v.im);
    c -= Float::with_val(u.prec(), &u.im * &v.re);
    c
}

/// Signed crossing of two chords: `Some(±1)` for a proper crossing, `None`
/// if disjoint, error if they touch or overlap.
fn chord_crossing(p0: &Cplx, p1: &Cplx, q0: &Cplx, q1: &Cplx, tol: &Float) -> Result<Option<i64>> {
    let d = p1 - p0;
    let e = q1 - q0;
    let o1 = cross(&d, &(q0 - p0));
    let o2 = cross(&d, &(q1 - p0));
    let o3 = cross(&e, &(p0 - q0));
    let o4 = cross(&e, &(p1 - q0));
    let small = |x: &Float| Float::with_val(x.prec(), x.abs_ref()) <= *tol;
    let straddle = |a: &Float, b: &Float| (a.is_sign_negative() != b.is_sign_negative()) && !a.is_zero() && !b.is_zero();
    if straddle(&o1, &o2) && straddle(&o3, &o4) {
        if small(&o1) || small(&o2) || small(&o3) || small(&o4) {
            return Err(Error::NonTransverse("segment endpoint lies on another curve".into()));
        }
        let s = cross(&d, &e);
        return Ok(Some(if s.is_sign_positive() { 1 } else { -1 }));
    }
    // Touching configurations: an endpoint on the other chord.
    let on = |o: &Float, a: &Cplx, b: &Cplx, x: &Cplx| -> bool {
        if !small(o) {
            return false;
        }
        let ab = b - a;
        let ax = x - a;
        let mut dot = Float::with_val(x.prec(), &ab.re * &ax.re);
        dot += Float::with_val(x.prec(), &ab.im * &ax.im);
        dot >= 0 && dot <= ab.norm_sqr()
    };
    if on(&o1, p0, p1, q0) || on(&o2, p0, p1, q1) || on(&o3, q0, q1, p0) || on(&o4, q0, q1, p1) {
        return Err(Error::NonTransverse("curves touch".into()));
    }
    Ok(None)
}

/// Signed intersection numbers of the curves, in the given order.
pub fn intersection_matrix(curves: &[HomologyCurve], atlas: &SurfaceAtlas) -> Result<Vec<Vec<i64>>> {
    let n = curves.len();
    let tol = atlas.ctx.tol_full();
    let mut m = vec![vec![0i64; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let mut total = 0;
            for s in &curves[a].segments {
                for t in &curves[b].segments {
                    if s.polygon != t.polygon {
                        continue;
                    }
                    if let Some(sign) = chord_crossing(&s.start, &s.end, &t.start, &t.end, &tol)? {
                        total += sign;
                    }
                }
            }
            m[a][b] = total;
            m[b][a] = -total;
        }
    }
    Ok(m)
}

/// Signed intersection matrix in the canonical order `a1..ag, b1..bg`.
pub fn canonical_intersection_matrix(curves: &[HomologyCurve], atlas: &SurfaceAtlas) -> Result<Vec<Vec<i64>>> {
    let ordered: Vec<HomologyCurve> = canonical_order(curves)?.into_iter().cloned().collect();
    intersection_matrix(&ordered, atlas)
}

/// The standard symplectic matrix `[[0, I], [−I, 0]]`.
pub fn symplectic_j(g: usize) -> Vec<Vec<i64>> {
    let mut j = vec![vec![0i64; 2 * g]; 2 * g];
    for k in 0..g {
        j[k][g + k] = 1;
        j[g + k][k] = -1;
    }
    j
}

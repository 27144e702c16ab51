//! Genus-2 surfaces assembled from four right-angled hexagons.
//!
//! Hexagon `H1` and its mirror `H2` form the first pair of pants, `H3` and
//! `H4` the second. Seams glue `H1↔H2` and `H3↔H4`; the three boundary
//! geodesics glue the pants to each other with Fenchel–Nielsen twists, which
//! splits hexagon sides into sub-edges. Every sub-edge is an edge of the
//! resulting convex polygon (split points are vertices with angle π).

mod config;
mod curves;

pub use config::{FenchelNielsenSpec, RealSpec, SurfaceConfig};
pub use curves::{
    canonical_intersection_matrix, canonical_order, deck_generators, intersection_matrix, relation_residual,
    symplectic_j, CurveSegment, HomologyCurve, RouteStep,
};

use std::collections::{HashMap, VecDeque};

use rug::Float;

use crate::error::{Error, Result};
use crate::hyperbolic::{build_right_hexagon, hyperbolic_distance, interior_angle, GeodesicArc, Hexagon, Moebius};
use crate::numerics::{pi, Cplx, PrecisionCtx};

/// Fenchel–Nielsen coordinates of a genus-2 surface. Twists are in units of
/// the corresponding length and are reduced mod 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FenchelNielsen {
    pub lengths: [Float; 3],
    pub twists: [Float; 3],
}

impl FenchelNielsen {
    pub fn new(lengths: [Float; 3], twists: [Float; 3]) -> Result<Self> {
        for l in &lengths {
            if *l <= 0 || !l.is_finite() {
                return Err(Error::Config(format!("lengths must be positive, got {}", l.to_f64())));
            }
        }
        let twists = twists.map(|t| {
            let f = Float::with_val(t.prec(), t.floor_ref());
            t - f
        });
        Ok(FenchelNielsen { lengths, twists })
    }
}

/// How an edge is identified with its partner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Seam inside one pair of pants.
    Seam,
    /// Piece of the boundary geodesic with the given index (0, 1, 2).
    Boundary(usize),
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub arc: GeodesicArc,
    /// Hexagon side (0..6) this edge belongs to.
    pub side: usize,
    pub kind: EdgeKind,
    pub partner: (usize, usize),
    /// `g_{p,i}`: maps this edge onto the partner edge, start to partner end.
    pub map: Moebius,
    normalizer: Moebius,
}

impl Edge {
    /// Imaginary part after mapping the edge to `[0, x] ⊂ ℝ₊`; positive on the
    /// polygon side.
    pub fn side_value(&self, z: &Cplx) -> Float {
        self.normalizer.apply(z).im
    }
}

/// Convex hyperbolic polygon with counterclockwise vertices; edge `i` runs
/// from vertex `i` to vertex `i+1`.
#[derive(Clone, Debug)]
pub struct Polygon {
    pub vertices: Vec<Cplx>,
    pub edges: Vec<Edge>,
    /// Point where the Euclidean mean of the hexagon corners vanishes after
    /// centering; used as a reference interior point.
    pub center: Cplx,
}

impl Polygon {
    pub fn contains(&self, z: &Cplx, slack: &Float) -> bool {
        let neg = -slack.clone();
        // Points outside the disk can sit on the inner side of every edge.
        z.norm_sqr() < 1 && self.edges.iter().all(|e| e.side_value(z) >= neg)
    }

    /// Smallest edge side value: positive inside, negative outside.
    pub fn depth(&self, z: &Cplx) -> Float {
        self.edges
            .iter()
            .map(|e| e.side_value(z))
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap()
    }
}

/// Point of the surface given in a polygon chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint {
    pub polygon: usize,
    pub z: Cplx,
}

impl SurfacePoint {
    pub fn new(polygon: usize, z: Cplx) -> Self {
        SurfacePoint { polygon, z }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceAtlas {
    pub ctx: PrecisionCtx,
    pub fenchel_nielsen: FenchelNielsen,
    pub polygons: Vec<Polygon>,
    /// Chart offset applied to `H1` after centering.
    pub base_offset: Cplx,
}

/// Where a glued piece lives: polygon, hexagon side, arclength offsets along it.
#[derive(Clone, Debug)]
struct Piece {
    polygon: usize,
    side: usize,
    from: Float,
    to: Float,
}

// Hexagon (a, b, c) sides: 0 a, 1 seam ab, 2 b, 3 seam bc, 4 c, 5 seam ca.
// Mirror hexagon (a, c, b): 0 a, 1 seam ca, 2 c, 3 seam bc, 4 b, 5 seam ab.
const GEODESIC_SIDE: [[usize; 3]; 2] = [[0, 2, 4], [0, 4, 2]];
const SEAM_SIDE: [[usize; 3]; 2] = [[1, 3, 5], [5, 3, 1]];

fn centering_map(vertices: &[Cplx], tol: &Float) -> Moebius {
    let prec = vertices[0].prec();
    let mut m = Moebius::identity(prec);
    let mut pts: Vec<Cplx> = vertices.to_vec();
    for _ in 0..2000 {
        let mut c = Cplx::zero(prec);
        for p in &pts {
            c += p;
        }
        c = c.scale_f64(1.0 / pts.len() as f64);
        if c.abs() <= *tol {
            break;
        }
        let t = Moebius::translation_to(&c).inverse();
        pts = pts.iter().map(|p| t.apply(p)).collect();
        m = t.compose(&m);
    }
    m
}

fn place(hex: &Hexagon, offset: &Cplx, tol: &Float) -> Moebius {
    let center = centering_map(&hex.vertices, tol);
    Moebius::translation_to(offset).compose(&center)
}

impl SurfaceAtlas {
    /// Default offset of `H1` from its centered position; keeps the origin of
    /// the base chart away from symmetric points of the paper surfaces.
    pub fn default_base_offset(prec: u32) -> Cplx {
        Cplx::from_f64(prec, 0.0625, 0.03125)
    }

    pub fn build(fnc: &FenchelNielsen, ctx: PrecisionCtx) -> Result<Self> {
        Self::build_with_offset(fnc, ctx, &Self::default_base_offset(ctx.bits))
    }

    pub fn build_with_offset(fnc: &FenchelNielsen, ctx: PrecisionCtx, base_offset: &Cplx) -> Result<Self> {
        let prec = ctx.bits;
        let halves: Vec<Float> = fnc.lengths.iter().map(|l| Float::with_val(prec, l / 2u32)).collect();
        let hex = [
            build_right_hexagon(&halves[0], &halves[1], &halves[2]),
            build_right_hexagon(&halves[0], &halves[2], &halves[1]),
        ];
        let tol = ctx.tol_half();
        let fine = ctx.tol_full();
        let zero = Cplx::zero(prec);
        let placements = [
            place(&hex[0], &base_offset.with_prec(prec), &fine),
            place(&hex[1], &zero, &fine),
            place(&hex[0], &zero, &fine),
            place(&hex[1], &zero, &fine),
        ];
        let shape = |p: usize| p % 2;

        // Pairs of glued pieces: (p-piece, q-piece) with p's start ↦ q's end.
        let mut pairs: Vec<(Piece, Piece, EdgeKind)> = Vec::new();
        for pants in 0..2 {
            let (p, q) = (2 * pants, 2 * pants + 1);
            for k in 0..3 {
                let sp = SEAM_SIDE[0][k];
                let sq = SEAM_SIDE[1][k];
                pairs.push((
                    Piece { polygon: p, side: sp, from: Float::new(prec), to: hex[0].side_lengths[sp].clone() },
                    Piece { polygon: q, side: sq, from: Float::new(prec), to: hex[1].side_lengths[sq].clone() },
                    EdgeKind::Seam,
                ));
            }
        }
        for k in 0..3 {
            let h = &halves[k];
            let l = Float::with_val(prec, &fnc.lengths[k]);
            let lt = Float::with_val(prec, &l * &fnc.twists[k]);
            let reduce = |x: Float| -> Float {
                let mut y = x;
                while y < 0 {
                    y += &l;
                }
                while y >= l {
                    y -= &l;
                }
                y
            };
            let mut cuts = vec![Float::new(prec), h.clone(), reduce(lt.clone()), reduce(Float::with_val(prec, &lt - h))];
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut uniq: Vec<Float> = Vec::new();
            for c in cuts {
                if uniq.last().map_or(true, |u| Float::with_val(prec, &c - u) > tol) {
                    uniq.push(c);
                }
            }
            uniq.push(l.clone());
            for w in uniq.windows(2) {
                let (s0, s1) = (&w[0], &w[1]);
                let sm = Float::with_val(prec, s0 + s1) / 2u32;
                let (p, off) = if sm < *h { (0, Float::new(prec)) } else { (1, h.clone()) };
                let p_piece = Piece {
                    polygon: p,
                    side: GEODESIC_SIDE[p][k],
                    from: Float::with_val(prec, s0 - &off),
                    to: Float::with_val(prec, s1 - &off),
                };
                let sig_m = reduce(Float::with_val(prec, &lt - &sm));
                let half_width = Float::with_val(prec, s1 - s0) / 2u32;
                let sig0 = Float::with_val(prec, &sig_m + &half_width);
                let sig1 = Float::with_val(prec, &sig_m - &half_width);
                let (q, off) = if sig_m < *h { (2, Float::new(prec)) } else { (3, h.clone()) };
                let q_piece = Piece {
                    polygon: q,
                    side: GEODESIC_SIDE[q - 2][k],
                    from: Float::with_val(prec, &sig1 - &off),
                    to: Float::with_val(prec, &sig0 - &off),
                };
                pairs.push((p_piece, q_piece, EdgeKind::Boundary(k)));
            }
        }

        // Snap offsets near the side ends, then map piece endpoints to charts.
        let point_on = |piece: &Piece, s: &Float| -> Cplx {
            let hx = &hex[shape(piece.polygon)];
            let len = &hx.side_lengths[piece.side];
            let local = if Float::with_val(prec, s.abs_ref()) <= tol {
                hx.vertices[piece.side].clone()
            } else if Float::with_val(prec, s - len).abs() <= tol {
                hx.vertices[(piece.side + 1) % 6].clone()
            } else {
                hx.sides[piece.side].point_at_length(s)
            };
            placements[piece.polygon].apply(&local)
        };

        // Per polygon, collect pieces sorted along the boundary.
        struct Slot {
            side: usize,
            from: Float,
            start: Cplx,
            end: Cplx,
            kind: EdgeKind,
            pair: usize,
            first: bool,
        }
        let mut slots: Vec<Vec<Slot>> = (0..4).map(|_| Vec::new()).collect();
        for (idx, (pp, qp, kind)) in pairs.iter().enumerate() {
            for (piece, first) in [(pp, true), (qp, false)] {
                slots[piece.polygon].push(Slot {
                    side: piece.side,
                    from: piece.from.clone(),
                    start: point_on(piece, &piece.from),
                    end: point_on(piece, &piece.to),
                    kind: *kind,
                    pair: idx,
                    first,
                });
            }
        }
        let mut location: HashMap<(usize, bool), (usize, usize)> = HashMap::new();
        for (p, list) in slots.iter_mut().enumerate() {
            list.sort_by(|x, y| x.side.cmp(&y.side).then(x.from.partial_cmp(&y.from).unwrap()));
            for (i, s) in list.iter().enumerate() {
                location.insert((s.pair, s.first), (p, i));
            }
        }
        let mut polygons = Vec::with_capacity(4);
        for (p, list) in slots.iter().enumerate() {
            let vertices: Vec<Cplx> = list.iter().map(|s| s.start.clone()).collect();
            let mut edges = Vec::with_capacity(list.len());
            for s in list {
                let partner = location[&(s.pair, !s.first)];
                let other = &slots[partner.0][partner.1];
                let map = Moebius::segment_to_segment(&s.start, &s.end, &other.end, &other.start);
                edges.push(Edge {
                    arc: GeodesicArc::new(s.start.clone(), s.end.clone()),
                    side: s.side,
                    kind: s.kind,
                    partner,
                    map,
                    normalizer: Moebius::normalizing(&s.start, &s.end),
                });
            }
            let center = if p == 0 { base_offset.with_prec(prec) } else { zero.clone() };
            polygons.push(Polygon { vertices, edges, center });
        }
        let atlas = SurfaceAtlas {
            ctx,
            fenchel_nielsen: fnc.clone(),
            polygons,
            base_offset: base_offset.with_prec(prec),
        };
        atlas.validate()?;
        Ok(atlas)
    }

    pub fn prec(&self) -> u32 {
        self.ctx.bits
    }

    pub fn edge(&self, p: usize, i: usize) -> &Edge {
        &self.polygons[p].edges[i]
    }

    /// All glued pairs `(p, i, q, j)`, each listed once with `(p, i) < (q, j)`.
    pub fn glued_pairs(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for (p, poly) in self.polygons.iter().enumerate() {
            for (i, e) in poly.edges.iter().enumerate() {
                let (q, j) = e.partner;
                if (p, i) < (q, j) {
                    out.push((p, i, q, j));
                }
            }
        }
        out
    }

    /// Checks the gluing invariants; any failure indicates a construction bug.
    pub fn validate(&self) -> Result<()> {
        let prec = self.prec();
        let tol = self.ctx.tol_half();
        for (p, poly) in self.polygons.iter().enumerate() {
            if !poly.contains(&poly.center, &Float::new(prec)) {
                return Err(Error::GluingInvalid(format!("reference point outside polygon {p}")));
            }
            for (i, e) in poly.edges.iter().enumerate() {
                let (q, j) = e.partner;
                let other = self.edge(q, j);
                if other.partner != (p, i) {
                    return Err(Error::GluingInvalid(format!("edge ({p},{i}) partner is not symmetric")));
                }
                if Float::with_val(prec, &e.arc.length - &other.arc.length).abs() > tol {
                    return Err(Error::GluingInvalid(format!("edge ({p},{i}) length mismatch")));
                }
                if !e.map.compose(&other.map).approx_eq(&Moebius::identity(prec), &tol) {
                    return Err(Error::GluingInvalid(format!("edge ({p},{i}) map is not inverse to partner")));
                }
                for k in 0..=8u32 {
                    let t = Float::with_val(prec, k) / 8u32;
                    let s = Float::with_val(prec, 1u32 - &t);
                    let image = e.map.apply(&e.arc.point(&t));
                    if hyperbolic_distance(&image, &other.arc.point(&s)) > tol {
                        return Err(Error::GluingInvalid(format!("edge ({p},{i}) samples leave partner edge")));
                    }
                }
                let inside = &self.polygons[q];
                for v in &poly.vertices {
                    if inside.depth(&e.map.apply(v)) > tol {
                        return Err(Error::GluingInvalid(format!("image of polygon {p} overlaps polygon {q}")));
                    }
                }
            }
        }
        let cycles = self.vertex_cycles();
        let two_pi = pi(prec) * 2u32;
        for cycle in &cycles {
            let mut sum = Float::new(prec);
            for &(p, v) in cycle {
                sum += self.vertex_angle(p, v);
            }
            if Float::with_val(prec, &sum - &two_pi).abs() > tol {
                return Err(Error::GluingInvalid(format!("vertex cycle angle sum {} != 2π", sum.to_f64())));
            }
        }
        let faces = self.polygons.len() as i64;
        let edges: i64 = self.polygons.iter().map(|p| p.edges.len() as i64).sum::<i64>() / 2;
        let chi = cycles.len() as i64 - edges + faces;
        if chi != -2 {
            return Err(Error::GluingInvalid(format!("Euler characteristic {chi}, expected -2")));
        }
        Ok(())
    }

    /// Interior angle of polygon `p` at vertex `v`.
    pub fn vertex_angle(&self, p: usize, v: usize) -> Float {
        let poly = &self.polygons[p];
        let n = poly.edges.len();
        interior_angle(&poly.edges[(v + n - 1) % n].arc, &poly.edges[v].arc)
    }

    /// Vertex identification cycles as lists of `(polygon, vertex index)`.
    pub fn vertex_cycles(&self) -> Vec<Vec<(usize, usize)>> {
        let mut seen: Vec<Vec<bool>> = self.polygons.iter().map(|p| vec![false; p.vertices.len()]).collect();
        let mut out = Vec::new();
        for p0 in 0..self.polygons.len() {
            for v0 in 0..self.polygons[p0].vertices.len() {
                if seen[p0][v0] {
                    continue;
                }
                let mut cycle = Vec::new();
                let (mut p, mut v) = (p0, v0);
                loop {
                    seen[p][v] = true;
                    cycle.push((p, v));
                    // Vertex v starts edge v; its image is the end of the partner edge.
                    let (q, j) = self.polygons[p].edges[v].partner;
                    let n = self.polygons[q].vertices.len();
                    p = q;
                    v = (j + 1) % n;
                    if (p, v) == (p0, v0) {
                        break;
                    }
                }
                out.push(cycle);
            }
        }
        out
    }

    /// Finds the tile of the developed tiling containing `z`, returning the
    /// surface point and `γ` with `γ(z)` in that polygon's chart.
    ///
    /// Walks the tiles crossed by the geodesic from the base reference point
    /// to `z`, falling back to breadth-first search for degenerate paths.
    pub fn locate(&self, z: &Cplx, max_depth: usize) -> Result<(SurfacePoint, Moebius)> {
        let prec = self.prec();
        let z = z.with_prec(prec);
        let slack = self.ctx.tol_full();
        let origin = self.polygons[0].center.clone();
        // Current tile: chart q placed in the disk by `t`.
        let mut q = 0usize;
        let mut t = Moebius::identity(prec);
        let mut entry: Option<usize> = None;
        for _ in 0..=max_depth {
            let tin = t.inverse();
            let w = tin.apply(&z);
            let poly = &self.polygons[q];
            if poly.contains(&w, &slack) {
                return Ok((SurfacePoint::new(q, w), tin));
            }
            let a = tin.apply(&origin);
            let ray = Moebius::normalizing(&a, &w);
            let tip = ray.apply(&w).re;
            let mut exit = None;
            for (i, e) in poly.edges.iter().enumerate() {
                if Some(i) == entry {
                    continue;
                }
                let s0 = ray.apply(&e.arc.start).im;
                let s1 = ray.apply(&e.arc.end).im;
                let straddles = (s0.is_sign_negative() != s1.is_sign_negative()) && !(s0.is_zero() && s1.is_zero());
                if !straddles {
                    continue;
                }
                let va = e.side_value(&a);
                let vw = e.side_value(&w);
                if vw < 0 && (va >= 0 || tip.is_zero()) {
                    exit = Some(i);
                    break;
                }
            }
            let Some(i) = exit else { break };
            let (nq, j) = poly.edges[i].partner;
            t = t.compose(&self.polygons[nq].edges[j].map);
            q = nq;
            entry = Some(j);
        }
        self.locate_bfs(&z, max_depth)
    }

    fn locate_bfs(&self, z: &Cplx, max_depth: usize) -> Result<(SurfacePoint, Moebius)> {
        let prec = self.prec();
        let slack = self.ctx.tol_full();
        let key = |q: usize, t: &Moebius| -> (usize, i64, i64) {
            let c = t.apply(&self.polygons[q].center);
            (q, (c.re.to_f64() * 1e9).round() as i64, (c.im.to_f64() * 1e9).round() as i64)
        };
        let mut queue = VecDeque::new();
        let mut seen = std::collections::HashSet::new();
        let id = Moebius::identity(prec);
        seen.insert(key(0, &id));
        queue.push_back((0usize, id, 0usize));
        while let Some((q, t, depth)) = queue.pop_front() {
            let tin = t.inverse();
            let w = tin.apply(z);
            if self.polygons[q].contains(&w, &slack) {
                return Ok((SurfacePoint::new(q, w), tin));
            }
            if depth == max_depth {
                continue;
            }
            for e in &self.polygons[q].edges {
                let (nq, j) = e.partner;
                let nt = t.compose(&self.polygons[nq].edges[j].map);
                if seen.insert(key(nq, &nt)) {
                    queue.push_back((nq, nt, depth + 1));
                }
            }
        }
        Err(Error::NotFound(max_depth))
    }

    /// Maps a point near polygon `p` (possibly just across an edge) into the
    /// chart that contains it.
    pub fn normalize_point(&self, p: usize, z: &Cplx) -> Result<SurfacePoint> {
        let slack = self.ctx.tol_full();
        if self.polygons[p].contains(z, &slack) {
            return Ok(SurfacePoint::new(p, z.clone()));
        }
        let mut q = p;
        let mut w = z.clone();
        for _ in 0..8 {
            let poly = &self.polygons[q];
            let (i, _) = poly
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| (i, e.side_value(&w)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            let e = &poly.edges[i];
            w = e.map.apply(&w);
            q = e.partner.0;
            if self.polygons[q].contains(&w, &slack) {
                return Ok(SurfacePoint::new(q, w));
            }
        }
        Err(Error::NotFound(8))
    }

    /// Uniform-ish random interior point of polygon `p` (rejection sampling in
    /// the bounding disk around the reference point), at least `margin` inside.
    pub fn random_interior_point<R: rand::Rng>(&self, p: usize, margin: f64, rng: &mut R) -> Cplx {
        let prec = self.prec();
        let poly = &self.polygons[p];
        let c = &poly.center;
        let mut radius = 0.0f64;
        for v in &poly.vertices {
            radius = radius.max(v.dist(c).to_f64());
        }
        let m = Float::with_val(prec, margin);
        loop {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            if x * x + y * y > 1.0 {
                continue;
            }
            let z = c + &Cplx::from_f64(prec, radius * x, radius * y);
            if poly.depth(&z) > m {
                return z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eval_expr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fnc(exprs: [&str; 6], prec: u32) -> FenchelNielsen {
        let v: Vec<Float> = exprs.iter().map(|e| eval_expr(e, prec).unwrap()).collect();
        FenchelNielsen::new(
            [v[0].clone(), v[2].clone(), v[4].clone()],
            [v[1].clone(), v[3].clone(), v[5].clone()],
        )
        .unwrap()
    }

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(128).unwrap()
    }

    #[test]
    fn regular_surface_has_four_regular_hexagons() {
        let f = fnc(["2*acosh(2)", "0", "2*acosh(2)", "0", "2*acosh(2)", "0"], 128);
        let atlas = SurfaceAtlas::build(&f, ctx()).unwrap();
        let l = Float::with_val(128, 2).acosh();
        let tol = ctx().tol_half();
        let mut total = 0;
        for poly in &atlas.polygons {
            assert_eq!(poly.edges.len(), 6);
            for e in &poly.edges {
                assert!(Float::with_val(128, &e.arc.length - &l).abs() < tol);
                total += 1;
            }
        }
        assert_eq!(total, 24);
    }

    #[test]
    fn twisted_surfaces_validate() {
        for exprs in [
            ["2*acosh(3+2*sqrt(2))", "1/2", "2*acosh(1+sqrt(2))", "0", "2*acosh(1+sqrt(2))", "0"],
            [
                "2*acosh((sqrt(2)+1)/sqrt(2))",
                "1/2",
                "4*acosh((sqrt(2)+1)/sqrt(2))",
                "1/4",
                "2*acosh((sqrt(2)+1)/sqrt(2))",
                "1/2",
            ],
            ["1.3", "0.37", "2.1", "0.81", "1.7", "0.05"],
        ] {
            let f = fnc(exprs, 128);
            SurfaceAtlas::build(&f, ctx()).unwrap();
        }
    }

    #[test]
    fn twist_is_taken_mod_one() {
        let a = fnc(["1.3", "0.37", "2.1", "0.25", "1.7", "0"], 128);
        let b = fnc(["1.3", "1.37", "2.1", "-0.75", "1.7", "2"], 128);
        let x = SurfaceAtlas::build(&a, ctx()).unwrap();
        let y = SurfaceAtlas::build(&b, ctx()).unwrap();
        let tol = ctx().tol_half();
        for (p, q) in x.polygons.iter().zip(&y.polygons) {
            assert_eq!(p.edges.len(), q.edges.len());
            for (e, f) in p.edges.iter().zip(&q.edges) {
                assert_eq!(e.partner, f.partner);
                assert!(e.map.approx_eq(&f.map, &tol));
            }
        }
    }

    #[test]
    fn locate_finds_points_in_the_tiling() {
        let f = fnc(["2*acosh(3+2*sqrt(2))", "1/2", "2*acosh(1+sqrt(2))", "0", "2*acosh(1+sqrt(2))", "0"], 128);
        let atlas = SurfaceAtlas::build(&f, ctx()).unwrap();
        let zero = Cplx::zero(128);
        let (sp, g) = atlas.locate(&zero, 8).unwrap();
        assert_eq!(sp.polygon, 0);
        assert!(g.approx_eq(&Moebius::identity(128), &ctx().tol_half()));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = &atlas.polygons[0].edges[1];
        assert_eq!(e.partner.0, 1);
        let w1 = atlas.random_interior_point(1, 1e-3, &mut rng);
        let z = e.map.inverse().apply(&w1);
        let (sp, g) = atlas.locate(&z, 8).unwrap();
        assert_eq!(sp.polygon, 1);
        assert!(g.approx_eq(&e.map, &ctx().tol_half()));
        let slack = ctx().tol_full();
        use rand::Rng;
        for _ in 0..30 {
            let r = (rng.gen_range(0.0..2.0f64) / 2.0).tanh();
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = Cplx::from_f64(128, r * th.cos(), r * th.sin());
            let (sp, g) = atlas.locate(&z, 8).unwrap();
            assert!(atlas.polygons[sp.polygon].contains(&g.apply(&z), &slack));
        }
    }
}

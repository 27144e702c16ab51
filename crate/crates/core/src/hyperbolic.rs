//! Poincaré disk geometry: PSU(1,1) isometries, geodesic arcs, distances and
//! right-angled hexagons.

use rug::Float;

use crate::numerics::{pi, Cplx};

/// Direct isometry `z ↦ (αz + β)/(β̄z + ᾱ)` with `|α|² − |β|² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Moebius {
    pub alpha: Cplx,
    pub beta: Cplx,
}

impl Moebius {
    pub fn identity(prec: u32) -> Self {
        Moebius {
            alpha: Cplx::one(prec),
            beta: Cplx::zero(prec),
        }
    }

    /// Normalizes an arbitrary `(α, β)` pair with `|α| > |β|`.
    pub fn new(alpha: Cplx, beta: Cplx) -> Self {
        let mut m = Moebius { alpha, beta };
        m.renormalize();
        m
    }

    pub fn prec(&self) -> u32 {
        self.alpha.prec()
    }

    fn renormalize(&mut self) {
        let det = self.alpha.norm_sqr() - self.beta.norm_sqr();
        let s = det.sqrt().recip();
        self.alpha *= &s;
        self.beta *= &s;
    }

    /// Hyperbolic translation along the diameter through `a`, sending 0 to `a`.
    pub fn translation_to(a: &Cplx) -> Self {
        let prec = a.prec();
        let one = Float::with_val(prec, 1);
        let s = (one - a.norm_sqr()).sqrt().recip();
        Moebius {
            alpha: Cplx::from_real(s.clone()),
            beta: a.scale(&s),
        }
    }

    /// Rotation `z ↦ e^{iθ} z`.
    pub fn rotation(theta: &Float) -> Self {
        let half = Float::with_val(theta.prec(), theta / 2u32);
        Moebius {
            alpha: Cplx::cis(&half),
            beta: Cplx::zero(theta.prec()),
        }
    }

    /// The isometry sending `a` to 0 and `b` onto the positive real axis.
    pub fn normalizing(a: &Cplx, b: &Cplx) -> Self {
        let t = Moebius::translation_to(a).inverse();
        let bb = t.apply(b);
        let rot = Moebius::rotation(&-bb.arg());
        rot.compose(&t)
    }

    /// The isometry sending the geodesic segment `[a, b]` onto `[c, d]`
    /// with `a ↦ c`, `b ↦ d`. Assumes `d(a,b) = d(c,d)`.
    pub fn segment_to_segment(a: &Cplx, b: &Cplx, c: &Cplx, d: &Cplx) -> Self {
        let m1 = Moebius::normalizing(a, b);
        let m2 = Moebius::normalizing(c, d);
        m2.inverse().compose(&m1)
    }

    pub fn apply(&self, z: &Cplx) -> Cplx {
        let mut num = &self.alpha * z;
        num += &self.beta;
        let mut den = &self.beta.conj() * z;
        den += &self.alpha.conj();
        &num / &den
    }

    /// Complex derivative at `z`: `1/(β̄z + ᾱ)²`.
    pub fn derivative(&self, z: &Cplx) -> Cplx {
        let mut den = &self.beta.conj() * z;
        den += &self.alpha.conj();
        (&den * &den).recip()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Moebius) -> Moebius {
        let mut alpha = &self.alpha * &other.alpha;
        alpha.add_mul(&self.beta, &other.beta.conj());
        let mut beta = &self.alpha * &other.beta;
        beta.add_mul(&self.beta, &other.alpha.conj());
        Moebius::new(alpha, beta)
    }

    pub fn inverse(&self) -> Moebius {
        Moebius {
            alpha: self.alpha.conj(),
            beta: -self.beta.clone(),
        }
    }

    /// Distance to `±I` in the max norm on `(α − ±1, β)`.
    pub fn distance_to_identity(&self) -> Float {
        let prec = self.prec();
        let one = Cplx::one(prec);
        let plus = (&self.alpha - &one).abs();
        let minus = (&self.alpha + &one).abs();
        let a = if plus < minus { plus } else { minus };
        let b = self.beta.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Equality in PSU(1,1), i.e. up to the global sign.
    pub fn approx_eq(&self, other: &Moebius, tol: &Float) -> bool {
        let d1 = (&self.alpha - &other.alpha).abs().max(&(&self.beta - &other.beta).abs());
        let d2 = (&self.alpha + &other.alpha).abs().max(&(&self.beta + &other.beta).abs());
        d1 <= *tol || d2 <= *tol
    }
}

/// `d(z, w) = 2 atanh(|z − w| / |1 − z̄w|)`.
pub fn hyperbolic_distance(z: &Cplx, w: &Cplx) -> Float {
    let prec = z.prec();
    let num = (z - w).abs();
    let mut den = Cplx::one(prec);
    den.sub_mul(&z.conj(), w);
    let r = num / den.abs();
    r.atanh() * 2u32
}

/// Geometric shape of a geodesic arc in the disk.
#[derive(Clone, Debug)]
pub enum ArcKind {
    Diameter,
    Circle { center: Cplx, radius: Float },
}

/// Geodesic segment between two disk points, parametrized at constant
/// hyperbolic speed on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GeodesicArc {
    pub start: Cplx,
    pub end: Cplx,
    pub length: Float,
    /// Maps the standard segment `[0, tanh(length/2)]` onto the arc.
    frame: Moebius,
}

impl GeodesicArc {
    pub fn new(start: Cplx, end: Cplx) -> Self {
        let length = hyperbolic_distance(&start, &end);
        let frame = Moebius::normalizing(&start, &end).inverse();
        GeodesicArc {
            start,
            end,
            length,
            frame,
        }
    }

    pub fn prec(&self) -> u32 {
        self.start.prec()
    }

    /// Point at parameter `t ∈ [0,1]`, `t` proportional to arclength.
    pub fn point(&self, t: &Float) -> Cplx {
        let mut x = Float::with_val(self.prec(), &self.length * t);
        x /= 2u32;
        self.frame.apply(&Cplx::from_real(x.tanh()))
    }

    /// Point at hyperbolic arclength `s` from the start.
    pub fn point_at_length(&self, s: &Float) -> Cplx {
        let x = Float::with_val(self.prec(), s / 2u32);
        self.frame.apply(&Cplx::from_real(x.tanh()))
    }

    /// Unit Euclidean tangent direction at parameter `t`.
    pub fn tangent(&self, t: &Float) -> Cplx {
        let mut x = Float::with_val(self.prec(), &self.length * t);
        x /= 2u32;
        let d = self.frame.derivative(&Cplx::from_real(x.tanh()));
        let n = d.abs();
        d.scale(&n.recip())
    }

    pub fn reversed(&self) -> GeodesicArc {
        GeodesicArc::new(self.end.clone(), self.start.clone())
    }

    /// Diameter or orthogonal circle carrying the arc.
    pub fn kind(&self) -> ArcKind {
        let prec = self.prec();
        // Circle through start, end and the inversion of start in the unit circle.
        let a = &self.start;
        let b = &self.end;
        let cross = {
            let mut c = Float::with_val(prec, &a.re * &b.im);
            c -= Float::with_val(prec, &a.im * &b.re);
            c
        };
        let tol = crate::numerics::pow2(prec, (prec / 2) as i32);
        if Float::with_val(prec, cross.abs_ref()) <= tol {
            return ArcKind::Diameter;
        }
        // Center c satisfies |c|² = 1 + r² and |c − a| = |c − b| = r, giving
        // the linear system 2 Re(c ā) = 1 + |a|², 2 Re(c b̄) = 1 + |b|².
        let ra = Float::with_val(prec, a.norm_sqr() + 1u32) / 2u32;
        let rb = Float::with_val(prec, b.norm_sqr() + 1u32) / 2u32;
        let det = cross;
        let cx = (Float::with_val(prec, &ra * &b.im) - Float::with_val(prec, &rb * &a.im)) / &det;
        let cy = (Float::with_val(prec, &rb * &a.re) - Float::with_val(prec, &ra * &b.re)) / &det;
        let center = Cplx::new(cx, cy);
        let radius = (center.norm_sqr() - 1u32).sqrt();
        ArcKind::Circle { center, radius }
    }
}

/// Right-angled hexagon in the disk, vertices counterclockwise.
#[derive(Clone, Debug)]
pub struct Hexagon {
    pub vertices: Vec<Cplx>,
    pub sides: Vec<GeodesicArc>,
    pub side_lengths: Vec<Float>,
}

/// Length of the side opposite to `z` in a right-angled hexagon whose other
/// alternate sides are `x`, `y`.
fn opposite_side(x: &Float, y: &Float, z: &Float) -> Float {
    let prec = x.prec();
    let num = Float::with_val(prec, x.cosh_ref()) * Float::with_val(prec, y.cosh_ref())
        + Float::with_val(prec, z.cosh_ref());
    let den = Float::with_val(prec, x.sinh_ref()) * Float::with_val(prec, y.sinh_ref());
    (num / den).acosh()
}

/// Right-angled hexagon with sides 1, 3, 5 of lengths `a`, `b`, `c`.
///
/// The first vertex is the origin, side 1 runs along the positive real axis
/// and the hexagon lies in the upper half of the disk.
pub fn build_right_hexagon(a: &Float, b: &Float, c: &Float) -> Hexagon {
    let prec = a.prec();
    let lengths = vec![
        a.clone(),
        opposite_side(a, b, c),
        b.clone(),
        opposite_side(b, c, a),
        c.clone(),
        opposite_side(c, a, b),
    ];
    let quarter = Moebius::rotation(&(pi(prec) / 2u32));
    let mut frame = Moebius::identity(prec);
    let mut vertices = Vec::with_capacity(6);
    for len in &lengths {
        vertices.push(frame.apply(&Cplx::zero(prec)));
        let step = Float::with_val(prec, len / 2u32).tanh();
        frame = frame.compose(&Moebius::translation_to(&Cplx::from_real(step)));
        frame = frame.compose(&quarter);
    }
    let sides = (0..6)
        .map(|i| GeodesicArc::new(vertices[i].clone(), vertices[(i + 1) % 6].clone()))
        .collect();
    Hexagon {
        vertices,
        sides,
        side_lengths: lengths,
    }
}

/// Interior angle at the junction of arc `incoming` (ending there) and arc
/// `outgoing` (starting there) of a counterclockwise polygon.
pub fn interior_angle(incoming: &GeodesicArc, outgoing: &GeodesicArc) -> Float {
    let prec = incoming.prec();
    let d1 = incoming.tangent(&Float::with_val(prec, 1));
    let d2 = outgoing.tangent(&Float::new(prec));
    let turn = (&d2 / &d1).arg();
    pi(prec) - turn
}

/// Whether `z` lies to the left of (or on) the oriented geodesic through
/// `a` then `b`, with `slack` tolerance on the normalized imaginary part.
pub fn left_of(a: &Cplx, b: &Cplx, z: &Cplx, slack: &Float) -> bool {
    let m = Moebius::normalizing(a, b);
    let w = m.apply(z);
    w.im >= -slack.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::pow2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 192;

    fn random_point(rng: &mut ChaCha8Rng) -> Cplx {
        let r: f64 = rng.gen_range(0.0..0.9);
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Cplx::from_f64(P, r * t.cos(), r * t.sin())
    }

    fn random_moebius(rng: &mut ChaCha8Rng) -> Moebius {
        let a = random_point(rng);
        let th = Float::with_val(P, rng.gen_range(0.0..6.0));
        Moebius::translation_to(&a).compose(&Moebius::rotation(&th))
    }

    #[test]
    fn composition_matches_pointwise_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_moebius(&mut rng);
        let h = random_moebius(&mut rng);
        let gh = g.compose(&h);
        let tol = pow2(P, (P - 32) as i32);
        for _ in 0..5 {
            let z = random_point(&mut rng);
            assert!(gh.apply(&z).dist(&g.apply(&h.apply(&z))) <= tol);
        }
        let id = Moebius::identity(P);
        assert!(id.compose(&g).approx_eq(&g, &tol));
        assert!(g.compose(&g.inverse()).approx_eq(&id, &tol));
    }

    #[test]
    fn distance_examples_and_invariance() {
        let zero = Cplx::zero(P);
        assert!(hyperbolic_distance(&zero, &zero).is_zero());
        let x = Cplx::from_real(Float::with_val(P, 0.5).tanh());
        let d = hyperbolic_distance(&zero, &x);
        assert!((d - 1u32).abs() < pow2(P, (P - 8) as i32));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let g = random_moebius(&mut rng);
            let z = random_point(&mut rng);
            let w = random_point(&mut rng);
            let d0 = hyperbolic_distance(&z, &w);
            let d1 = hyperbolic_distance(&g.apply(&z), &g.apply(&w));
            assert!((d0 - d1).abs() < pow2(P, (P / 2) as i32));
        }
    }

    #[test]
    fn arc_parametrization_is_constant_speed() {
        let a = Cplx::from_f64(P, 0.1, 0.2);
        let b = Cplx::from_f64(P, -0.4, 0.5);
        let arc = GeodesicArc::new(a.clone(), b.clone());
        let tol = pow2(P, (P / 2) as i32);
        assert!(arc.point(&Float::new(P)).dist(&a) < tol);
        assert!(arc.point(&Float::with_val(P, 1)).dist(&b) < tol);
        let q = arc.point(&Float::with_val(P, 0.25));
        let d = hyperbolic_distance(&a, &q) * 4u32;
        assert!((d - &arc.length).abs() < tol);
        if let ArcKind::Circle { center, radius } = arc.kind() {
            assert!((center.dist(&q) - &radius).abs() < tol);
            // Orthogonality to the unit circle.
            assert!((center.norm_sqr() - radius.square() - 1u32).abs() < tol);
        } else {
            panic!("generic arc is not a diameter");
        }
    }

    #[test]
    fn regular_hexagon_has_equal_sides() {
        let l = Float::with_val(P, 2).acosh();
        let h = build_right_hexagon(&l, &l, &l);
        let tol = pow2(P, (P / 2) as i32);
        for (side, len) in h.sides.iter().zip(&h.side_lengths) {
            assert!((Float::with_val(P, &side.length - &l)).abs() < tol);
            assert!((Float::with_val(P, len - &l)).abs() < tol);
        }
    }

    #[test]
    fn bolza_hexagon_obeys_cosine_rule() {
        let mut a = Float::with_val(P, 2).sqrt() * 2u32;
        a += 3u32;
        let a = a.acosh();
        let b = (Float::with_val(P, 2).sqrt() + 1u32).acosh();
        let h = build_right_hexagon(&a, &b, &b);
        let tol = pow2(P, (P / 2) as i32);
        let expect = |x: &Float, y: &Float, z: &Float| -> Float {
            let num = Float::with_val(P, x.cosh_ref()) * Float::with_val(P, y.cosh_ref()) + Float::with_val(P, z.cosh_ref());
            let den = Float::with_val(P, x.sinh_ref()) * Float::with_val(P, y.sinh_ref());
            num / den
        };
        let cosh_of = |i: usize| Float::with_val(P, h.sides[i].length.cosh_ref());
        assert!((cosh_of(1) - expect(&a, &b, &b)).abs() < tol);
        assert!((cosh_of(3) - expect(&b, &b, &a)).abs() < tol);
        assert!((cosh_of(5) - expect(&b, &a, &b)).abs() < tol);
        assert!((Float::with_val(P, &h.sides[0].length - &a)).abs() < tol);
    }

    #[test]
    fn hexagon_is_right_angled_closed_and_in_upper_half() {
        let a = Float::with_val(P, 0.9);
        let b = Float::with_val(P, 1.3);
        let c = Float::with_val(P, 0.7);
        let h = build_right_hexagon(&a, &b, &c);
        let h2 = build_right_hexagon(&a, &b, &c);
        assert_eq!(h.vertices, h2.vertices);
        let half_pi = pi(P) / 2u32;
        let tol = pow2(P, (P / 2) as i32);
        for i in 0..6 {
            let ang = interior_angle(&h.sides[(i + 5) % 6], &h.sides[i]);
            assert!((ang - &half_pi).abs() < tol, "angle at vertex {i}");
            assert!(h.vertices[i].im >= -tol.clone());
        }
        assert!((Float::with_val(P, &h.sides[2].length - &b)).abs() < tol);
        assert!((Float::with_val(P, &h.sides[4].length - &c)).abs() < tol);
    }
}

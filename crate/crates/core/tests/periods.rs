mod common;

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use common::Fixture;
use hexsurf::abeljacobi::{imag_part, integrate_along, lattice_coordinates, normalize_forms, symplectic_action};
use hexsurf::numerics::{cholesky, Cplx, DenseMatrix};
use hexsurf::surface::canonical_order;
use hexsurf::theta::ThetaEngine;

const BITS: u32 = 128;

fn d6() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| Fixture::new("d6z2", BITS, 20))
}

#[test]
fn residual_meets_the_degree_twenty_tolerance() {
    let r = d6().residual.to_f64();
    assert!(r <= 1e-4, "{r:e}");
}

#[test]
fn period_matrix_is_symmetric_with_positive_imaginary_part() {
    let fx = d6();
    assert!(fx.periods.asymmetry.to_f64() <= 1e-4, "{:e}", fx.periods.asymmetry.to_f64());
    let tau = &fx.periods.tau;
    assert_eq!(tau[(0, 1)], tau[(1, 0)]);
    cholesky(&imag_part(tau)).unwrap();
}

#[test]
fn normalized_a_periods_are_the_identity() {
    let fx = d6();
    let (normalized, _) = normalize_forms(&fx.forms, &fx.curves).unwrap();
    let ordered = canonical_order(&fx.curves).unwrap();
    for k in 0..2 {
        for l in 0..2 {
            let v = integrate_along(ordered[k], &normalized[l]);
            let want = Cplx::from_f64(BITS, if k == l { 1.0 } else { 0.0 }, 0.0);
            assert!(v.dist(&want) < fx.atlas.ctx.tol_half(), "a{} on form {l}", k + 1);
        }
    }
}

/// Across every glued edge the Abel–Jacobi map jumps by a lattice vector.
#[test]
fn edge_jumps_are_lattice_vectors() {
    let fx = d6();
    for (p, i, _, _) in fx.atlas.glued_pairs() {
        let jump = fx.aj.edge_jump(&fx.atlas, p, i);
        let (dist, _, _) = lattice_coordinates(&fx.periods.tau, &jump).unwrap();
        assert!(dist.to_f64() < 1e-4, "edge ({p},{i}): {:e}", dist.to_f64());
    }
}

/// The jump is the same at every point of an edge, not just the midpoint.
#[test]
fn edge_jumps_are_constant_along_edges() {
    let fx = d6();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (p, i, q, _) in fx.atlas.glued_pairs() {
        let e = fx.atlas.edge(p, i);
        let mid = fx.aj.edge_jump(&fx.atlas, p, i);
        for _ in 0..4 {
            let z = e.arc.point(&Float::with_val(BITS, rng.gen_range(0.0..1.0)));
            let a = fx.aj.eval(p, &z);
            let b = fx.aj.eval(q, &e.map.apply(&z));
            for k in 0..2 {
                assert!((&b[k] - &a[k]).dist(&mid[k]).to_f64() < 1e-4);
            }
        }
    }
}

/// `Θ(𝒦 + u(w)) = 0` for every `w`, while `Θ(𝒦 − u(w))` is generically not.
#[test]
fn riemann_constant_puts_the_curve_on_the_theta_divisor() {
    let fx = d6();
    let th = ThetaEngine::new(&fx.periods.tau, fx.atlas.ctx).unwrap();
    let k = &fx.periods.riemann_const;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut on = f64::NEG_INFINITY;
    let mut off = f64::INFINITY;
    for p in 0..4 {
        for _ in 0..3 {
            let w = fx.atlas.random_interior_point(p, 0.05, &mut rng);
            let u = fx.aj.eval(p, &w);
            let plus: Vec<Cplx> = (0..2).map(|j| &k[j] + &u[j]).collect();
            let minus: Vec<Cplx> = (0..2).map(|j| &k[j] - &u[j]).collect();
            let (v, lp) = th.theta_parts(&plus);
            let (vm, lm) = th.theta_parts(&minus);
            on = on.max(v.abs().to_f64().ln() + lp.re.to_f64());
            off = off.min(vm.abs().to_f64().ln() + lm.re.to_f64());
        }
    }
    assert!(on < (1e-4f64).ln() + off, "ln|Θ| on {on}, off {off}");
}

/// Bolza period matrix against `−⅓·𝟙 + i(√2/3)[[2, −1], [−1, 2]]` after the
/// integral symplectic change of basis.
#[test]
fn bolza_period_matrix_at_degree_ten() {
    let fx = Fixture::new("bolza", BITS, 10);
    let m = vec![vec![-1, 0, -1, 0], vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1]];
    let s = symplectic_action(&fx.periods.tau, &m).unwrap();
    let r = 2f64.sqrt() / 3.0;
    let rows = vec![
        vec![Cplx::from_f64(BITS, -1.0 / 3.0, 2.0 * r), Cplx::from_f64(BITS, -1.0 / 3.0, -r)],
        vec![Cplx::from_f64(BITS, -1.0 / 3.0, -r), Cplx::from_f64(BITS, -1.0 / 3.0, 2.0 * r)],
    ];
    let err = s.sub(&DenseMatrix::from_rows(&rows, BITS)).max_abs().to_f64();
    assert!(err <= 1e-3, "{err:e}");
}

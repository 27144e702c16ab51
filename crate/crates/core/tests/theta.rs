mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use common::{Fixture, SURFACES};
use hexsurf::numerics::{pi, pow2, Cplx, DenseMatrix, PrecisionCtx};
use hexsurf::theta::{default_fd_eps, fd_derivatives, ThetaEngine};

fn engine(rows: &[&[(f64, f64)]], bits: u32) -> ThetaEngine {
    let rows: Vec<Vec<Cplx>> = rows.iter().map(|r| r.iter().map(|&(a, b)| Cplx::from_f64(bits, a, b)).collect()).collect();
    ThetaEngine::new(&DenseMatrix::from_rows(&rows, bits), PrecisionCtx::new(bits).unwrap()).unwrap()
}

fn rel_close(a: &Cplx, b: &Cplx, tol: &Float) -> bool {
    let scale = Float::with_val(tol.prec(), b.abs() + 1u32);
    a.dist(b) <= Float::with_val(tol.prec(), tol * &scale)
}

#[test]
fn genus_one_at_i_is_a_gamma_value() {
    let bits = 256;
    let th = engine(&[&[(0.0, 1.0)]], bits);
    let v = th.theta(&[Cplx::zero(bits)]);
    let want = pi(bits).sqrt().sqrt() / Float::with_val(bits, 0.75).gamma();
    let err = Float::with_val(bits, &v.re - &want).abs();
    assert!(err < Float::with_val(bits, 1e-50) * &want, "{}", err.to_f64());
    assert!(v.im.clone().abs() < 1e-50);
}

/// `θ₀₀⁴ = θ₀₁⁴ + θ₁₀⁴` with `θ₀₁ = Θ(½)` and `θ₁₀ = e^{iπτ/4} Θ(τ/2)`.
#[test]
fn jacobi_quartic_identity() {
    let bits = 192;
    let tau = Cplx::from_f64(bits, 0.3, 1.2);
    let th = engine(&[&[(0.3, 1.2)]], bits);
    let t00 = th.theta(&[Cplx::zero(bits)]);
    let t01 = th.theta(&[Cplx::from_f64(bits, 0.5, 0.0)]);
    let prefactor = tau.scale(&pi(bits)).mul_i().scale_f64(0.25).exp();
    let t10 = &prefactor * &th.theta(&[tau.scale_f64(0.5)]);
    let lhs = t00.powi(4);
    let rhs = &t01.powi(4) + &t10.powi(4);
    assert!(rel_close(&lhs, &rhs, &pow2(bits, 160)));
}

/// `Θ(0 | −1/τ) = √(−iτ) Θ(0 | τ)`.
#[test]
fn genus_one_modular_transformation() {
    let bits = 192;
    let tau = Cplx::from_f64(bits, -0.2, 0.9);
    let s = -tau.recip();
    let a = engine(&[&[(-0.2, 0.9)]], bits).theta(&[Cplx::zero(bits)]);
    let b = ThetaEngine::new(&DenseMatrix::from_rows(&[vec![s.clone()]], bits), PrecisionCtx::new(bits).unwrap())
        .unwrap()
        .theta(&[Cplx::zero(bits)]);
    let factor = (-tau.mul_i()).sqrt();
    assert!(rel_close(&b, &(&factor * &a), &pow2(bits, 160)));
}

#[test]
fn diagonal_period_matrix_factorizes() {
    let bits = 160;
    let th2 = engine(&[&[(0.1, 1.3), (0.0, 0.0)], &[(0.0, 0.0), (-0.4, 0.7)]], bits);
    let a = engine(&[&[(0.1, 1.3)]], bits);
    let b = engine(&[&[(-0.4, 0.7)]], bits);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let z1 = Cplx::from_f64(bits, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let z2 = Cplx::from_f64(bits, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let lhs = th2.theta(&[z1.clone(), z2.clone()]);
        let rhs = &a.theta(&[z1]) * &b.theta(&[z2]);
        assert!(rel_close(&lhs, &rhs, &pow2(bits, 120)));
    }
}

/// Periodicity, quasi-periodicity with `|n|_∞ ≤ 2` and parity for the
/// period matrices of the shipped surfaces.
#[test]
fn identities_on_surface_period_matrices() {
    let bits = 128;
    let tol = pow2(bits, (bits as i32) / 2);
    for name in SURFACES {
        let fx = Fixture::new(name, bits, 10);
        let th = ThetaEngine::new(&fx.periods.tau, fx.atlas.ctx).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let z: Vec<Cplx> = (0..2).map(|_| Cplx::from_f64(bits, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let v = th.theta(&z);
            let n: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..=2)).collect();
            let mut shifted = z.clone();
            for j in 0..2 {
                shifted[j] += &Cplx::from_f64(bits, n[j] as f64, 0.0);
            }
            assert!(rel_close(&th.theta(&shifted), &v, &tol), "{name}: A-periodicity");
            let neg: Vec<Cplx> = z.iter().map(|x| -x.clone()).collect();
            assert!(rel_close(&th.theta(&neg), &v, &tol), "{name}: parity");
            let mut zt = z.clone();
            for j in 0..2 {
                for k in 0..2 {
                    zt[j] += &th.tau[(j, k)].scale_f64(n[k] as f64);
                }
            }
            let rhs = &th.quasi_period_factor(&z, &n) * &v;
            assert!(rel_close(&th.theta(&zt), &rhs, &tol), "{name}: quasi-periodicity n = {n:?}");
        }
    }
}

fn sample_engine() -> ThetaEngine {
    engine(&[&[(0.3, 1.1), (0.2, 0.35)], &[(0.2, 0.35), (-0.15, 0.8)]], 160)
}

fn arg() -> impl Strategy<Value = Vec<Cplx>> {
    proptest::collection::vec((-3.0..3.0f64, -2.0..2.0f64), 2).prop_map(|v| v.iter().map(|&(a, b)| Cplx::from_f64(160, a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasi_period_modulus(z in arg(), n0 in -2i64..=2, n1 in -2i64..=2) {
        let th = sample_engine();
        let n = [n0, n1];
        let f = th.quasi_period_factor(&z, &n);
        // |factor| = exp(π(n·Im τ n + 2 n·Im Z))
        let im = th.im_tau();
        let mut e = 0.0;
        for j in 0..2 {
            e += 2.0 * n[j] as f64 * z[j].im.to_f64();
            for k in 0..2 {
                e += (n[j] * n[k]) as f64 * im[j][k].to_f64();
            }
        }
        let want = (std::f64::consts::PI * e).exp();
        prop_assert!((f.abs().to_f64() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_stencil(z in arg(), j in 0usize..2) {
        let th = sample_engine();
        let bits = 160;
        let m = 8;
        let eps = default_fd_eps(bits, m);
        let coeffs = fd_derivatives(|t| {
            let mut zz = z.clone();
            zz[j] += t;
            th.theta(&zz)
        }, &Cplx::zero(bits), m, &eps);
        let grad = th.theta_grad(&z);
        let scale = Float::with_val(bits, grad[j].abs() + th.theta(&z).abs() + 1u32);
        prop_assert!(coeffs[1].dist(&grad[j]) < pow2(bits, (bits as i32) / 4) * scale);
    }

    #[test]
    fn gradient_is_a_periodic(z in arg(), j in 0usize..2) {
        let th = sample_engine();
        let mut zs = z.clone();
        zs[j] += &Cplx::one(160);
        let (a, b) = (th.theta_grad(&z), th.theta_grad(&zs));
        for k in 0..2 {
            prop_assert!(rel_close(&b[k], &a[k], &pow2(160, 100)));
        }
    }
}

//! Riemann theta function `Θ(Z) = Σ_n exp(2πi(½ n·τn + n·Z))` with argument
//! reduction, an ellipsoidal lattice truncation with a certified tail bound,
//! the gradient, and a roots-of-unity finite-difference stencil.

use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{cholesky, pi, pow2, singular_values, Cplx, DenseMatrix, PrecisionCtx};

#[derive(Clone, Debug)]
pub struct ThetaEngine {
    pub tau: DenseMatrix,
    pub ctx: PrecisionCtx,
    prec: u32,
    im_tau: Vec<Vec<Float>>,
    im_inv: Vec<Vec<Float>>,
    /// Upper factor `U` with `Im τ = Uᵀ U`, in double precision for the
    /// enumeration bounds only.
    upper: Vec<Vec<f64>>,
    pub lambda_min: f64,
    /// `exp(2πi τ_00)`.
    step: Cplx,
}

/// `Z` split as `Z₀ + m + τn` with `Z₀` near the fundamental cell.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub z0: Vec<Cplx>,
    pub n: Vec<i64>,
    /// `Θ(Z) = Θ(Z₀) · exp(log_prefactor)`.
    pub log_prefactor: Cplx,
}

impl ThetaEngine {
    pub fn new(tau: &DenseMatrix, ctx: PrecisionCtx) -> Result<Self> {
        let g = tau.rows();
        if tau.cols() != g || g == 0 {
            return Err(Error::Config("period matrix must be square".into()));
        }
        let prec = ctx.bits + ctx.guard_bits;
        let tol = ctx.tol_full();
        for j in 0..g {
            for k in 0..j {
                if tau[(j, k)].dist(&tau[(k, j)]) > tol {
                    return Err(Error::Config("period matrix must be symmetric".into()));
                }
            }
        }
        let tau = {
            let mut t = DenseMatrix::zeros(g, g, prec);
            for j in 0..g {
                for k in 0..g {
                    t[(j, k)] = tau[(j, k)].with_prec(prec);
                }
            }
            t
        };
        let mut im = DenseMatrix::zeros(g, g, prec);
        for j in 0..g {
            for k in 0..g {
                im[(j, k)] = Cplx::from_real(tau[(j, k)].im.clone());
            }
        }
        let lower = cholesky(&im)?;
        let inv = im.inverse()?;
        let sv = singular_values(&im);
        let lambda_min = sv.last().unwrap().to_f64() * (1.0 - 1e-12);
        if !(lambda_min > 0.0) {
            return Err(Error::NotPositiveDefinite(g));
        }
        let upper = (0..g).map(|i| (0..g).map(|j| lower[(j, i)].re.to_f64()).collect()).collect();
        let mut two_pi_i_tau = tau[(0, 0)].mul_i();
        two_pi_i_tau = two_pi_i_tau.scale(&Float::with_val(prec, pi(prec) * 2u32));
        Ok(ThetaEngine {
            ctx,
            prec,
            im_tau: (0..g).map(|j| (0..g).map(|k| im[(j, k)].re.clone()).collect()).collect(),
            im_inv: (0..g).map(|j| (0..g).map(|k| inv[(j, k)].re.clone()).collect()).collect(),
            upper,
            lambda_min,
            step: two_pi_i_tau.exp(),
            tau,
        })
    }

    pub fn genus(&self) -> usize {
        self.tau.rows()
    }

    /// Natural log of the absolute tail target `2^{−bits+guard}`.
    fn ln_target(&self) -> f64 {
        -((self.ctx.bits - self.ctx.guard_bits) as f64) * std::f64::consts::LN_2
    }

    /// `c = −(Im τ)⁻¹ Im Z`, the centre of the dominant terms.
    fn centre(&self, z: &[Cplx]) -> Vec<Float> {
        let g = self.genus();
        (0..g)
            .map(|j| {
                let mut s = Float::new(self.prec);
                for k in 0..g {
                    s -= Float::with_val(self.prec, &self.im_inv[j][k] * &z[k].im);
                }
                s
            })
            .collect()
    }

    fn quad(&self, x: &[f64]) -> f64 {
        let g = self.genus();
        let mut q = 0.0;
        for i in 0..g {
            let mut s = 0.0;
            for j in i..g {
                s += self.upper[i][j] * x[j];
            }
            q += s * s;
        }
        q
    }

    /// Squared radius `R²` such that the terms with `Q(n − c) > R²` sum to
    /// less than `exp(ln_target)` in absolute value; `order` 1 covers the
    /// extra factor `2π|n_j| ≤ 2π(|c|_∞ + R/√λ)` of the gradient terms.
    pub fn radius_sq(&self, c: &[f64], ln_target: f64, order: u32) -> f64 {
        let g = self.genus() as f64;
        let lam = self.lambda_min;
        let growth = g * (1.0 + (2.0 / lam).sqrt()).ln();
        let base = -ln_target + std::f64::consts::PI * self.quad(c) + growth;
        let mut r2 = (2.0 / std::f64::consts::PI * base).max(1.0);
        if order > 0 {
            let cmax = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for _ in 0..4 {
                let weight = (2.0 * std::f64::consts::PI * (cmax + (r2 / lam).sqrt())).ln().max(0.0);
                r2 = 2.0 / std::f64::consts::PI * (base + weight);
            }
        }
        r2
    }

    /// Natural log of the tail bound for a given `R²` (value, order 0).
    pub fn ln_tail_bound(&self, c: &[f64], r2: f64) -> f64 {
        let g = self.genus() as f64;
        let growth = g * (1.0 + (2.0 / self.lambda_min).sqrt()).ln();
        std::f64::consts::PI * self.quad(c) - std::f64::consts::PI * r2 / 2.0 + growth
    }

    pub fn reduce(&self, z: &[Cplx]) -> Reduced {
        let g = self.genus();
        let prec = self.prec;
        let z: Vec<Cplx> = z.iter().map(|x| x.with_prec(prec)).collect();
        // Im Z = Im τ · (−c); shift by τ n with n = round(−c).
        let c = self.centre(&z);
        let n: Vec<i64> = c.iter().map(|x| -(x.to_f64().round() as i64)).collect();
        let mut z0 = z.clone();
        for j in 0..g {
            for k in 0..g {
                if n[k] != 0 {
                    let t = self.tau[(j, k)].scale_f64(n[k] as f64);
                    z0[j] -= &t;
                }
            }
        }
        let log_prefactor = self.log_quasi_period(&z0, &n);
        for x in &mut z0 {
            let r = x.re.clone().round();
            x.re -= r;
        }
        Reduced { z0, n, log_prefactor }
    }

    /// `−iπ(n·τn + 2n·Z)`.
    fn log_quasi_period(&self, z: &[Cplx], n: &[i64]) -> Cplx {
        let g = self.genus();
        let prec = z[0].prec();
        let mut s = Cplx::zero(prec);
        for j in 0..g {
            if n[j] == 0 {
                continue;
            }
            let mut row = z[j].scale_f64(2.0);
            for k in 0..g {
                row += &self.tau[(j, k)].scale_f64(n[k] as f64);
            }
            s += &row.scale_f64(n[j] as f64);
        }
        let mut out = s.mul_i().scale(&pi(prec));
        out = -out;
        out
    }

    /// Factor `exp(−iπ(n·τn + 2n·Z))` with `Θ(Z + τn) = factor · Θ(Z)`.
    pub fn quasi_period_factor(&self, z: &[Cplx], n: &[i64]) -> Cplx {
        let prec = z[0].prec();
        self.log_quasi_period(&z.iter().map(|x| x.with_prec(self.prec)).collect::<Vec<_>>(), n).exp().with_prec(prec)
    }

    /// Lattice sum over `Q(n − c) ≤ r2` without reduction; returns the value
    /// and, when `grad` is set, `Σ 2πi n term`.
    pub fn lattice_sum(&self, z: &[Cplx], r2: f64, grad: bool) -> (Cplx, Vec<Cplx>) {
        let g = self.genus();
        let prec = self.prec;
        let z: Vec<Cplx> = z.iter().map(|x| x.with_prec(prec)).collect();
        let c: Vec<f64> = self.centre(&z).iter().map(|x| x.to_f64()).collect();
        let two_pi = Float::with_val(prec, pi(prec) * 2u32);
        let mut value = Cplx::zero(prec);
        let mut gsum: Vec<Cplx> = vec![Cplx::zero(prec); g];
        let mut n = vec![0i64; g];
        let r2 = r2 * (1.0 + 1e-9) + 1e-9;
        self.enumerate(g - 1, r2, &c, &mut n, &mut |n: &mut Vec<i64>, lo: i64, hi: i64| {
            // Row over n_0 ∈ [lo, hi] with the other coordinates fixed.
            n[0] = lo;
            let mut term = self.term(&z, n, &two_pi);
            // ratio(k) = exp(πiτ00(2k+1) + 2πi(Σ_{j>0} τ0j n_j + Z_0))
            let mut lin = z[0].clone();
            for j in 1..g {
                lin += &self.tau[(0, j)].scale_f64(n[j] as f64);
            }
            let mut arg = self.tau[(0, 0)].scale_f64((2 * lo + 1) as f64);
            arg = arg.scale_f64(0.5);
            arg += &lin;
            let mut ratio = arg.mul_i().scale(&two_pi).exp();
            for k in lo..=hi {
                n[0] = k;
                value += &term;
                if grad {
                    for j in 0..g {
                        if n[j] != 0 {
                            gsum[j] += &term.scale_f64(n[j] as f64);
                        }
                    }
                }
                term = &term * &ratio;
                ratio = &ratio * &self.step;
            }
        });
        if grad {
            for x in &mut gsum {
                *x = x.mul_i().scale(&two_pi);
            }
        }
        (value, gsum)
    }

    fn term(&self, z: &[Cplx], n: &[i64], two_pi: &Float) -> Cplx {
        let g = self.genus();
        let mut e = Cplx::zero(self.prec);
        for j in 0..g {
            if n[j] == 0 {
                continue;
            }
            let mut row = z[j].clone();
            for k in 0..g {
                row += &self.tau[(j, k)].scale_f64(0.5 * n[k] as f64);
            }
            e += &row.scale_f64(n[j] as f64);
        }
        e.mul_i().scale(two_pi).exp()
    }

    /// Visits lattice rows inside the ellipsoid `Q(n − c) ≤ r2`, from the
    /// last coordinate down to the second; the callback sums over `n_0`.
    fn enumerate(
        &self,
        i: usize,
        budget: f64,
        c: &[f64],
        n: &mut Vec<i64>,
        row: &mut dyn FnMut(&mut Vec<i64>, i64, i64),
    ) {
        let g = self.genus();
        let mut s = 0.0;
        for j in (i + 1)..g {
            s += self.upper[i][j] * (n[j] as f64 - c[j]);
        }
        let u = self.upper[i][i];
        let w = budget.max(0.0).sqrt();
        let lo = ((-w - s) / u + c[i]).ceil() as i64;
        let hi = ((w - s) / u + c[i]).floor() as i64;
        if lo > hi {
            return;
        }
        if i == 0 {
            row(n, lo, hi);
            return;
        }
        for k in lo..=hi {
            n[i] = k;
            let t = u * (k as f64 - c[i]) + s;
            self.enumerate(i - 1, budget - t * t, c, n, row);
        }
        n[i] = 0;
    }

    fn evaluate(&self, z: &[Cplx], grad: bool) -> (Reduced, Cplx, Vec<Cplx>) {
        let red = self.reduce(z);
        let c: Vec<f64> = self.centre(&red.z0).iter().map(|x| x.to_f64()).collect();
        let r2 = self.radius_sq(&c, self.ln_target() - red.log_prefactor.re.to_f64().max(0.0), grad as u32);
        let (v, gr) = self.lattice_sum(&red.z0, r2, grad);
        (red, v, gr)
    }

    /// `(Θ(Z₀), log prefactor)` with `Θ(Z) = Θ(Z₀)·exp(log prefactor)`.
    pub fn theta_parts(&self, z: &[Cplx]) -> (Cplx, Cplx) {
        let (red, v, _) = self.evaluate(z, false);
        (v, red.log_prefactor)
    }

    pub fn theta(&self, z: &[Cplx]) -> Cplx {
        let out = z[0].prec();
        let (v, lp) = self.theta_parts(z);
        (&v * &lp.exp()).with_prec(out)
    }

    pub fn theta_and_grad(&self, z: &[Cplx]) -> (Cplx, Vec<Cplx>) {
        let out = z[0].prec();
        let (red, v, gr) = self.evaluate(z, true);
        let f = red.log_prefactor.exp();
        let two_pi_i = Cplx::new(Float::new(self.prec), Float::with_val(self.prec, pi(self.prec) * 2u32));
        let grad = gr
            .iter()
            .zip(&red.n)
            .map(|(d, &m)| {
                let mut x = d.clone();
                x.sub_mul(&two_pi_i.scale_f64(m as f64), &v);
                (&x * &f).with_prec(out)
            })
            .collect();
        ((&v * &f).with_prec(out), grad)
    }

    pub fn theta_grad(&self, z: &[Cplx]) -> Vec<Cplx> {
        self.theta_and_grad(z).1
    }

    /// `∇Θ(Z)/Θ(Z)`, free of the quasi-periodicity prefactor.
    pub fn log_gradient(&self, z: &[Cplx]) -> Result<Vec<Cplx>> {
        let out = z[0].prec();
        let (red, v, gr) = self.evaluate(z, true);
        if v.is_zero() {
            return Err(Error::PoleHit);
        }
        let inv = v.recip();
        let two_pi_i = Cplx::new(Float::new(self.prec), Float::with_val(self.prec, pi(self.prec) * 2u32));
        Ok(gr
            .iter()
            .zip(&red.n)
            .map(|(d, &m)| {
                let mut x = d * &inv;
                x -= &two_pi_i.scale_f64(m as f64);
                x.with_prec(out)
            })
            .collect())
    }

    /// `(Im τ)⁻¹` entries.
    pub fn im_tau_inverse(&self) -> &[Vec<Float>] {
        &self.im_inv
    }

    pub fn im_tau(&self) -> &[Vec<Float>] {
        &self.im_tau
    }
}

/// Default stencil radius `2^{−⌈bits/(2m)⌉}`.
pub fn default_fd_eps(bits: u32, m: usize) -> Float {
    let k = (bits as usize).div_ceil(2 * m);
    pow2(2 * bits, k as i32)
}

/// Taylor coefficients `a_0 … a_{m−1}` of `f` at `z` from `m` samples on the
/// circle of radius `eps`: `a_p ≈ (1/(m ε^p)) Σ_n ζ^{−pn} f(z + ε ζ^n)`.
/// Samples are taken at the precision of `z`.
pub fn fd_derivatives<F: FnMut(&Cplx) -> Cplx>(mut f: F, z: &Cplx, m: usize, eps: &Float) -> Vec<Cplx> {
    assert!(m >= 1, "stencil needs at least one point");
    let prec = z.prec();
    let eps = Float::with_val(prec, eps);
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let roots: Vec<Cplx> = (0..m).map(|n| Cplx::cis(&(Float::with_val(prec, &two_pi * n as u32) / m as u32))).collect();
    let values: Vec<Cplx> = roots.iter().map(|r| f(&(z + &r.scale(&eps)))).collect();
    let mut out = Vec::with_capacity(m);
    let mut eps_p = Float::with_val(prec, 1);
    for p in 0..m {
        let mut s = Cplx::zero(prec);
        for (n, v) in values.iter().enumerate() {
            // ζ^{−pn} = conj(ζ^{pn mod m})
            s.add_mul(&roots[(p * n) % m].conj(), v);
        }
        let denom = Float::with_val(prec, &eps_p * m as u32);
        out.push(s.scale(&denom.recip()));
        eps_p *= &eps;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(entries: &[(f64, f64)], bits: u32) -> ThetaEngine {
        let g = (entries.len() as f64).sqrt() as usize;
        let rows: Vec<Vec<Cplx>> =
            (0..g).map(|j| (0..g).map(|k| Cplx::from_f64(bits, entries[j * g + k].0, entries[j * g + k].1)).collect()).collect();
        ThetaEngine::new(&DenseMatrix::from_rows(&rows, bits), PrecisionCtx::new(bits).unwrap()).unwrap()
    }

    fn sample_tau(bits: u32) -> ThetaEngine {
        engine(&[(0.3, 1.1), (0.2, 0.35), (0.2, 0.35), (-0.15, 0.8)], bits)
    }

    fn random_z(rng: &mut ChaCha8Rng, g: usize, bits: u32) -> Vec<Cplx> {
        (0..g).map(|_| Cplx::from_f64(bits, rng.gen_range(-2.0..2.0), rng.gen_range(-1.5..1.5))).collect()
    }

    #[test]
    fn genus_one_at_i_matches_direct_series() {
        let bits = 256;
        let th = engine(&[(0.0, 1.0)], bits);
        let v = th.theta(&[Cplx::zero(bits)]);
        // Σ_n e^{−πn²}, summed directly far beyond the truncation.
        let p = pi(bits + 64);
        let mut want = Float::with_val(bits + 64, 1);
        for n in 1..40u32 {
            want += Float::with_val(bits + 64, -(Float::with_val(bits + 64, &p * (n * n)))).exp() * 2u32;
        }
        assert!(Float::with_val(bits, &v.re - &want).abs() < pow2(bits, 200));
        assert!(v.im.is_zero() || v.im.clone().abs() < pow2(bits, 200));
    }

    #[test]
    fn gradient_of_even_function_vanishes_at_zero() {
        let th = engine(&[(0.0, 1.0)], 128);
        let g = th.theta_grad(&[Cplx::zero(128)]);
        assert!(g[0].abs() < pow2(128, 90));
    }

    #[test]
    fn periodicity_and_parity() {
        let bits = 192;
        let th = sample_tau(bits);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tol = pow2(bits, (bits / 2) as i32);
        for _ in 0..10 {
            let z = random_z(&mut rng, 2, bits);
            let v = th.theta(&z);
            let scale = Float::with_val(bits, v.abs() + 1u32);
            let mut zs = z.clone();
            zs[1] += &Cplx::one(bits);
            assert!(th.theta(&zs).dist(&v) < Float::with_val(bits, &tol * &scale));
            let neg: Vec<Cplx> = z.iter().map(|x| -x.clone()).collect();
            assert!(th.theta(&neg).dist(&v) < Float::with_val(bits, &tol * &scale));
            for n in [[1i64, 0], [0, -2], [2, 1]] {
                let mut zt = z.clone();
                for j in 0..2 {
                    for k in 0..2 {
                        zt[j] += &th.tau[(j, k)].with_prec(bits).scale_f64(n[k] as f64);
                    }
                }
                let lhs = th.theta(&zt);
                let rhs = &th.quasi_period_factor(&z, &n) * &v;
                let s = Float::with_val(bits, rhs.abs() + 1u32);
                assert!(lhs.dist(&rhs) < Float::with_val(bits, &tol * &s), "n = {n:?}");
            }
        }
    }

    #[test]
    fn quasi_period_factor_basics() {
        let bits = 128;
        let th = sample_tau(bits);
        let z = vec![Cplx::from_f64(bits, 0.3, -0.2), Cplx::from_f64(bits, -0.7, 0.4)];
        assert_eq!(th.quasi_period_factor(&z, &[0, 0]), Cplx::one(bits));
        let f = th.quasi_period_factor(&z, &[1, 0]);
        // |factor| = exp(π(n·Im τ n + 2 n·Im Z))
        let want = (Float::with_val(bits, 1.1 + 2.0 * -0.2) * pi(bits)).exp();
        assert!(Float::with_val(bits, f.abs() - &want).abs() < pow2(bits, 110));
    }

    #[test]
    fn doubling_radius_stays_within_tail_bound() {
        let bits = 160;
        let th = sample_tau(bits);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let z = th.reduce(&random_z(&mut rng, 2, bits)).z0;
            let c: Vec<f64> = th.centre(&z).iter().map(|x| x.to_f64()).collect();
            let r2 = th.radius_sq(&c, th.ln_target(), 0);
            let (a, _) = th.lattice_sum(&z, r2, false);
            let (b, _) = th.lattice_sum(&z, 4.0 * r2, false);
            let bound = th.ln_tail_bound(&c, r2);
            assert!(bound <= th.ln_target() + 1e-9);
            assert!(a.dist(&b).to_f64().ln() <= bound);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let bits = 192;
        let th = sample_tau(bits);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = pow2(bits, (bits / 3) as i32);
        let tol = pow2(bits, (bits / 4) as i32);
        for _ in 0..3 {
            let z = random_z(&mut rng, 2, bits);
            let (v, g) = th.theta_and_grad(&z);
            for j in 0..2 {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += &Cplx::from_real(h.clone());
                zm[j] -= &Cplx::from_real(h.clone());
                let fd = (&th.theta(&zp) - &th.theta(&zm)).scale(&Float::with_val(bits, &h * 2u32).recip());
                let s = Float::with_val(bits, g[j].abs() + v.abs());
                assert!(fd.dist(&g[j]) <= Float::with_val(bits, &tol * &s));
            }
            let mut shifted = z.clone();
            shifted[0] += &Cplx::one(bits);
            let g2 = th.theta_grad(&shifted);
            assert!(g2[0].dist(&g[0]) < Float::with_val(bits, g[0].abs() + 1u32) * pow2(bits, (bits / 2) as i32));
        }
    }

    #[test]
    fn stencil_on_constants_and_polynomials() {
        let bits = 128;
        let z = Cplx::zero(bits);
        let eps = pow2(bits, 4);
        let c = Cplx::from_f64(bits, 1.5, -2.0);
        let a = fd_derivatives(|_| c.clone(), &z, 6, &eps);
        // Rounding of the roots is amplified by ε^{−p}.
        assert!(a[0].dist(&c) < pow2(bits, 120));
        assert!(a[1..].iter().all(|x| x.abs() < pow2(bits, 96)));
        let a = fd_derivatives(|w| w.powi(3), &z, 8, &eps);
        for (p, x) in a.iter().enumerate() {
            let want = if p == 3 { 1.0 } else { 0.0 };
            assert!(x.dist(&Cplx::from_f64(bits, want, 0.0)) < pow2(bits, 88), "p = {p}");
        }
    }

    #[test]
    fn stencil_recovers_exponential_series() {
        let bits = 320;
        let z = Cplx::zero(bits);
        let eps = pow2(bits, 16);
        let a = fd_derivatives(|w| w.exp(), &z, 16, &eps);
        let mut fact = Float::with_val(bits, 1);
        for (p, x) in a.iter().enumerate() {
            if p > 0 {
                fact *= p as u32;
            }
            let want = fact.clone().recip();
            let rel = Float::with_val(bits, &x.re - &want).abs() * &fact;
            let bound = (16 * (16 - p) as i32).min(bits as i32 - 16 * p as i32 - 40);
            assert!(rel <= pow2(bits, bound), "p = {p}: {:e}", rel.to_f64());
        }
    }
}

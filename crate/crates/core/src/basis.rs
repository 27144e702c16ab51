//! Γ-periodic functions with prescribed singularities built from theta
//! quotients: `log|σ̂_{v,w}|` with logarithmic poles at `v` and `w`, and the
//! pole families `℘̂_n`, `℘̌_n`, `℘̃_n` of order `n` at a single point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use crate::abeljacobi::{AbelJacobiMap, PeriodData};
use crate::error::{Error, Result};
use crate::numerics::{pi, pivoted_columns, pow2, singular_values, Cplx, DenseMatrix, PrecisionCtx};
use crate::surface::{SurfaceAtlas, SurfacePoint};
use crate::theta::{default_fd_eps, fd_derivatives, ThetaEngine};

/// Number of probe points used to certify a shift.
pub const SHIFT_PROBES: usize = 64;
/// Shift draws before giving up.
pub const SHIFT_ATTEMPTS: usize = 16;
/// Chart distance kept between the auxiliary points and the poles.
const AUX_CLEARANCE: f64 = 0.3;
/// Chart distance kept between probes and the prescribed zeros.
const PROBE_CLEARANCE: f64 = 0.05;

/// Everything needed to evaluate the basis on one surface.
#[derive(Clone, Debug)]
pub struct BasisContext {
    pub atlas: SurfaceAtlas,
    pub aj: AbelJacobiMap,
    pub riemann_const: Vec<Cplx>,
    pub theta: ThetaEngine,
    /// Same period matrix at doubled precision, for the stencils.
    theta_fine: ThetaEngine,
}

/// The shift `ξ = K + Σ_{j<g} u(w_j)`.
#[derive(Clone, Debug)]
pub struct GenericShift {
    pub xi: Vec<Cplx>,
    pub aux: Vec<SurfacePoint>,
    /// Smallest `|Θ|` seen at the probe points.
    pub certificate: Float,
}

/// Data of a pole point `w` shared by all functions with a pole there.
#[derive(Clone, Debug)]
pub struct PoleProfile {
    pub w: SurfacePoint,
    pub weierstrass: bool,
    /// Smallest singular value of `C(w) = [u^{(1)} … u^{(g)}](w)` relative
    /// to its norm.
    pub sigma_ratio: Float,
    pub u_w: Vec<Cplx>,
    /// `u^{(n)}(w)` for `n = 1 … 4g−1`, index `n − 1`.
    pub u_derivs: Vec<Vec<Cplx>>,
    /// Columns of the solve for `℘̌`, with the coefficient vectors `d_n`
    /// indexed from the first `℘̌` order.
    pub pivots: Vec<usize>,
    pub d: Vec<Vec<Cplx>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Hat,
    Check,
    Tilde,
}

/// One basis element. Pole indices refer to the profile list of the
/// evaluator.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisFunction {
    Constant,
    /// `log|σ̂_{v,w}|` between two poles.
    LogSigma { v: usize, w: usize },
    PHat { n: usize, pole: usize },
    PCheck { n: usize, pole: usize },
    PTilde { n: usize, pole: usize },
}

impl BasisFunction {
    /// The member of order `n` at `pole` used in the basis.
    pub fn pole_member(profile: &PoleProfile, genus: usize, n: usize, pole: usize) -> Self {
        match profile.family(genus, n) {
            Family::Hat => BasisFunction::PHat { n, pole },
            Family::Check => BasisFunction::PCheck { n, pole },
            Family::Tilde => BasisFunction::PTilde { n, pole },
        }
    }

    pub fn label(&self) -> String {
        match self {
            BasisFunction::Constant => "1".into(),
            BasisFunction::LogSigma { v, w } => format!("log|sigma({v},{w})|"),
            BasisFunction::PHat { n, pole } => format!("p_hat[{n}]@{pole}"),
            BasisFunction::PCheck { n, pole } => format!("p_check[{n}]@{pole}"),
            BasisFunction::PTilde { n, pole } => format!("p_tilde[{n}]@{pole}"),
        }
    }
}

impl PoleProfile {
    /// Which family provides the order-`n` function.
    pub fn family(&self, genus: usize, n: usize) -> Family {
        let (hat_top, check_top) = self.ranges(genus);
        if n <= hat_top {
            Family::Hat
        } else if n <= check_top {
            Family::Check
        } else {
            Family::Tilde
        }
    }

    /// Last `℘̂` order and last `℘̌` order.
    fn ranges(&self, g: usize) -> (usize, usize) {
        if self.weierstrass {
            (2 * g - 1, 4 * g - 1)
        } else {
            (g, 2 * g + 1)
        }
    }

    /// `(q, m)` with `℘̃_n = ℘̌_q · ℘̌_first^m`.
    fn tilde_split(&self, g: usize, n: usize) -> (usize, usize) {
        let (hat_top, _) = self.ranges(g);
        let first = hat_top + 1;
        let period = if self.weierstrass { 2 * g } else { g + 1 };
        let m = (n - first) / period;
        (n - period * m, m)
    }

    /// Highest `℘_p` needed for orders up to `n`.
    fn needed(&self, g: usize, n: usize) -> usize {
        let (_, check_top) = self.ranges(g);
        n.min(check_top)
    }
}

impl BasisContext {
    pub fn new(atlas: &SurfaceAtlas, periods: &PeriodData, aj: &AbelJacobiMap) -> Result<Self> {
        let ctx = atlas.ctx;
        let theta = ThetaEngine::new(&periods.tau, ctx)?;
        let theta_fine = ThetaEngine::new(&periods.tau, ctx.doubled())?;
        Ok(BasisContext {
            atlas: atlas.clone(),
            aj: aj.clone(),
            riemann_const: periods.riemann_const.clone(),
            theta,
            theta_fine,
        })
    }

    pub fn ctx(&self) -> PrecisionCtx {
        self.atlas.ctx
    }

    pub fn genus(&self) -> usize {
        self.aj.genus()
    }

    fn prec(&self) -> u32 {
        self.atlas.prec()
    }

    /// Draws auxiliary points until `ξ` passes the probe certificate for
    /// every pole in `poles`.
    pub fn choose_generic_shift(&self, poles: &[SurfacePoint], seed: u64) -> Result<GenericShift> {
        let g = self.genus();
        let prec = self.prec();
        let threshold = self.ctx().tol_frac(8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_poly = self.atlas.polygons.len();
        let u_poles: Vec<Vec<Cplx>> = poles.iter().map(|p| self.aj.eval_point(p)).collect();
        for _ in 0..SHIFT_ATTEMPTS {
            let mut aux = Vec::with_capacity(g - 1);
            while aux.len() < g - 1 {
                let p = rng.gen_range(0..n_poly);
                let z = self.atlas.random_interior_point(p, 0.05, &mut rng);
                let cand = SurfacePoint::new(p, z);
                if poles.iter().chain(&aux).all(|q| chart_gap(q, &cand) > AUX_CLEARANCE) {
                    aux.push(cand);
                }
            }
            let mut xi = self.riemann_const.clone();
            for a in &aux {
                for (x, u) in xi.iter_mut().zip(self.aj.eval_point(a)) {
                    *x += &u;
                }
            }
            let mut worst: Option<Float> = None;
            let mut probes = 0;
            while probes < SHIFT_PROBES {
                let p = rng.gen_range(0..n_poly);
                let z = SurfacePoint::new(p, self.atlas.random_interior_point(p, 0.0, &mut rng));
                if poles.iter().chain(&aux).any(|q| chart_gap(q, &z) < PROBE_CLEARANCE) {
                    continue;
                }
                probes += 1;
                let uz = self.aj.eval_point(&z);
                for up in &u_poles {
                    let arg: Vec<Cplx> = (0..g).map(|k| &(&uz[k] - &up[k]) - &xi[k]).collect();
                    let (v, lp) = self.theta.theta_parts(&arg);
                    let mag = Float::with_val(prec, v.abs().ln_ref()) + &lp.re;
                    let mag = mag.exp();
                    if worst.as_ref().is_none_or(|w| mag < *w) {
                        worst = Some(mag);
                    }
                }
            }
            let worst = worst.unwrap_or_else(|| Float::with_val(prec, 1));
            if worst >= threshold {
                return Ok(GenericShift { xi, aux, certificate: worst });
            }
            log::debug!("shift rejected, certificate {:e}", worst.to_f64());
        }
        Err(Error::GenericityFailed(SHIFT_ATTEMPTS))
    }

    /// `u(z) − u(w) − ξ`.
    fn theta_arg(&self, uz: &[Cplx], uw: &[Cplx], xi: &[Cplx]) -> Vec<Cplx> {
        uz.iter().zip(uw).zip(xi).map(|((a, b), c)| &(a - b) - c).collect()
    }

    fn log_abs_theta(&self, arg: &[Cplx]) -> Result<Float> {
        let (v, lp) = self.theta.theta_parts(arg);
        if v.is_zero() {
            return Err(Error::PoleHit);
        }
        Ok(Float::with_val(self.prec(), v.abs().ln_ref()) + &lp.re)
    }

    fn check_clear(&self, z: &SurfacePoint, poles: &[&SurfacePoint]) -> Result<()> {
        let tol = self.ctx().tol_half().to_f64();
        if poles.iter().any(|p| chart_gap(p, z) < tol) {
            return Err(Error::PoleHit);
        }
        Ok(())
    }

    /// `log|σ̂_{v,w}(z)|`, Γ-periodic and harmonic away from `v`, `w`.
    pub fn log_sigma_hat(&self, shift: &GenericShift, v: &SurfacePoint, w: &SurfacePoint, z: &SurfacePoint) -> Result<Float> {
        self.check_clear(z, &[v, w])?;
        let uz = self.aj.eval_point(z);
        let uv = self.aj.eval_point(v);
        let uw = self.aj.eval_point(w);
        let num = self.log_abs_theta(&self.theta_arg(&uz, &uv, &shift.xi))?;
        let den = self.log_abs_theta(&self.theta_arg(&uz, &uw, &shift.xi))?;
        let diff: Vec<Float> = uv.iter().zip(&uw).map(|(a, b)| Float::with_val(self.prec(), &a.im - &b.im)).collect();
        let corr = self.im_form(&uz, &diff);
        let two_pi = Float::with_val(self.prec(), pi(self.prec()) * 2u32);
        Ok(num - den + corr * two_pi)
    }

    /// `Σ_{kl} (Im τ)⁻¹_{kl} Im u_k(z) x_l`.
    fn im_form(&self, uz: &[Cplx], x: &[Float]) -> Float {
        let inv = self.theta.im_tau_inverse();
        let mut s = Float::new(self.prec());
        for (k, row) in inv.iter().enumerate() {
            for (l, a) in row.iter().enumerate() {
                s += Float::with_val(self.prec(), a * &uz[k].im) * &x[l];
            }
        }
        s
    }

    /// `−2πi Σ_{kl} (Im τ)⁻¹_{kl} Im u_k(z) y_l`.
    fn hat_correction(&self, uz: &[Cplx], y: &[Cplx]) -> Cplx {
        let inv = self.theta.im_tau_inverse();
        let prec = self.prec();
        let mut s = Cplx::zero(prec);
        for (k, row) in inv.iter().enumerate() {
            let w = Float::with_val(prec, &uz[k].im);
            for (l, a) in row.iter().enumerate() {
                s += &y[l].scale(&Float::with_val(prec, a * &w));
            }
        }
        let two_pi = Float::with_val(prec, pi(prec) * 2u32);
        -s.mul_i().scale(&two_pi)
    }

    /// Builds the profile of `w`. It is flagged Weierstrass when
    /// `σ_min(C(w)) < threshold · ‖C(w)‖`; `None` uses `2^{−bits/4}`.
    pub fn classify_pole(&self, w: &SurfacePoint, threshold: Option<&Float>) -> Result<PoleProfile> {
        let g = self.genus();
        let prec = self.prec();
        let u_derivs: Vec<Vec<Cplx>> = (1..4 * g).map(|n| self.aj.derivative(w.polygon, &w.z, n)).collect();
        let cols: Vec<Vec<Cplx>> = u_derivs[..g].to_vec();
        let c = DenseMatrix::from_columns(&cols, prec);
        let sv = singular_values(&c);
        let ratio = Float::with_val(prec, sv.last().unwrap() / sv.first().unwrap());
        let threshold = threshold.cloned().unwrap_or_else(|| self.ctx().tol_frac(4));
        let weierstrass = ratio < threshold;
        let (hat_top, check_top) = if weierstrass { (2 * g - 1, 4 * g - 1) } else { (g, 2 * g + 1) };
        let wide = DenseMatrix::from_columns(&u_derivs[..hat_top], prec);
        let (perm, _) = pivoted_columns(&wide);
        let pivots: Vec<usize> = perm[..g].to_vec();
        let square = DenseMatrix::from_columns(&pivots.iter().map(|&p| u_derivs[p].clone()).collect::<Vec<_>>(), prec);
        let targets = DenseMatrix::from_columns(&u_derivs[hat_top..check_top], prec);
        let sol = square.solve(&targets)?;
        let d = (0..sol.cols()).map(|j| sol.column(j).to_vec()).collect();
        Ok(PoleProfile {
            w: w.clone(),
            weierstrass,
            sigma_ratio: ratio,
            u_w: self.aj.eval_point(w),
            u_derivs,
            pivots,
            d,
        })
    }

    /// `℘₁(z, w) = −u'(w)·∇Θ/Θ` at `u(z) − u(w) − ξ`, computed with `engine`.
    fn p_one(engine: &ThetaEngine, uz: &[Cplx], uw: &[Cplx], du: &[Cplx], xi: &[Cplx]) -> Result<Cplx> {
        let arg: Vec<Cplx> = uz.iter().zip(uw).zip(xi).map(|((a, b), c)| &(a - b) - c).collect();
        let lg = engine.log_gradient(&arg)?;
        let mut s = Cplx::zero(uz[0].prec());
        for (d, l) in du.iter().zip(&lg) {
            s.sub_mul(d, l);
        }
        Ok(s)
    }

    /// `℘_1 … ℘_count` at `z`: the first in closed form, the others from a
    /// stencil in `w` at doubled precision. Not Γ-periodic in `z`.
    pub fn p_plain(&self, shift: &GenericShift, profile: &PoleProfile, z: &SurfacePoint, count: usize) -> Result<Vec<Cplx>> {
        Ok(self.p_raw(shift, profile, z, count)?.0)
    }

    fn p_raw(&self, shift: &GenericShift, profile: &PoleProfile, z: &SurfacePoint, count: usize) -> Result<(Vec<Cplx>, Vec<Cplx>)> {
        self.check_clear(z, &[&profile.w])?;
        let prec = self.prec();
        let uz = self.aj.eval_point(z);
        let mut out = vec![Self::p_one(&self.theta, &uz, &profile.u_w, &profile.u_derivs[0], &shift.xi)?];
        if count > 1 {
            let fine = self.theta_fine.ctx.bits + self.theta_fine.ctx.guard_bits;
            // One stencil size per profile, so a member does not depend on
            // how many others are requested alongside it.
            let (_, check_top) = profile.ranges(self.genus());
            let m = count.max(check_top) + 4;
            // The Taylor series in `w` only converges up to the pole at `z`.
            let gap = self.lifted_gap(z, &profile.w).min(1.0);
            let eps = default_fd_eps(self.ctx().bits, m) * gap;
            let uz_f: Vec<Cplx> = self.aj.eval(z.polygon, &z.z.with_prec(fine));
            let xi_f: Vec<Cplx> = shift.xi.iter().map(|x| x.with_prec(fine)).collect();
            let p = profile.w.polygon;
            let mut failure = None;
            let coeffs = fd_derivatives(
                |wp| {
                    let uw = self.aj.eval(p, wp);
                    let du = self.aj.derivative(p, wp, 1);
                    match Self::p_one(&self.theta_fine, &uz_f, &uw, &du, &xi_f) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            Cplx::zero(fine)
                        }
                    }
                },
                &profile.w.z.with_prec(fine),
                m,
                &eps,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let mut fact = Float::with_val(fine, 1);
            for (n, a) in coeffs.iter().enumerate().take(count).skip(1) {
                fact *= n as u32;
                out.push(a.scale(&fact).with_prec(prec));
            }
        }
        Ok((out, uz))
    }

    /// Chart distance from `w` to `z` or to an image of `z` across one edge.
    fn lifted_gap(&self, z: &SurfacePoint, w: &SurfacePoint) -> f64 {
        let mut gap = chart_gap(z, w);
        for e in &self.atlas.polygons[z.polygon].edges {
            if e.partner.0 == w.polygon {
                gap = gap.min(e.map.apply(&z.z).dist(&w.z).to_f64());
            }
        }
        gap
    }

    /// Members of orders `1 … n_max` of the pole family at `profile`,
    /// evaluated at `z`.
    pub fn pole_family(&self, shift: &GenericShift, profile: &PoleProfile, z: &SurfacePoint, n_max: usize) -> Result<Vec<Cplx>> {
        let g = self.genus();
        let (hat_top, check_top) = profile.ranges(g);
        let count = if n_max > check_top { check_top } else { profile.needed(g, n_max) };
        let (raw, uz) = self.p_raw(shift, profile, z, count)?;
        let mut checks = Vec::new();
        for n in (hat_top + 1)..=count {
            let d = &profile.d[n - hat_top - 1];
            let mut v = raw[n - 1].clone();
            for (coef, &piv) in d.iter().zip(&profile.pivots) {
                v.sub_mul(coef, &raw[piv]);
            }
            checks.push(v);
        }
        let mut out = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let v = match profile.family(g, n) {
                Family::Hat => &raw[n - 1] + &self.hat_correction(&uz, &profile.u_derivs[n - 1]),
                Family::Check => checks[n - hat_top - 1].clone(),
                Family::Tilde => {
                    let (q, m) = profile.tilde_split(g, n);
                    let base = &checks[0];
                    let mut v = checks[q - hat_top - 1].clone();
                    for _ in 0..m {
                        v *= base;
                    }
                    v
                }
            };
            out.push(v);
        }
        Ok(out)
    }

    /// `℘̂_n(z, w)`: harmonic, Γ-periodic, pole of order `n` at `w`.
    pub fn p_hat(&self, shift: &GenericShift, profile: &PoleProfile, n: usize, z: &SurfacePoint) -> Result<Cplx> {
        let (raw, uz) = self.p_raw(shift, profile, z, n)?;
        Ok(&raw[n - 1] + &self.hat_correction(&uz, &profile.u_derivs[n - 1]))
    }

    /// `℘̌_n(z, w)` for `n` in the `℘̌` range of the profile.
    pub fn p_check(&self, shift: &GenericShift, profile: &PoleProfile, n: usize, z: &SurfacePoint) -> Result<Cplx> {
        let g = self.genus();
        let (hat_top, check_top) = profile.ranges(g);
        if n <= hat_top || n > check_top {
            return Err(Error::Config(format!("order {n} outside the p_check range {}..={check_top}", hat_top + 1)));
        }
        Ok(self.pole_family(shift, profile, z, n)?.pop().unwrap())
    }

    /// `℘̃_n(z, w)` for `n` beyond the `℘̌` range.
    pub fn p_tilde(&self, shift: &GenericShift, profile: &PoleProfile, n: usize, z: &SurfacePoint) -> Result<Cplx> {
        let (_, check_top) = profile.ranges(self.genus());
        if n <= check_top {
            return Err(Error::Config(format!("order {n} is not beyond the p_check range ending at {check_top}")));
        }
        Ok(self.pole_family(shift, profile, z, n)?.pop().unwrap())
    }

    /// Complex value of a basis function; `Constant` and `LogSigma` are real.
    pub fn evaluate(&self, shift: &GenericShift, poles: &[PoleProfile], f: &BasisFunction, z: &SurfacePoint) -> Result<Cplx> {
        let prec = self.prec();
        match *f {
            BasisFunction::Constant => Ok(Cplx::one(prec)),
            BasisFunction::LogSigma { v, w } => {
                Ok(Cplx::from_real(self.log_sigma_hat(shift, &poles[v].w, &poles[w].w, z)?))
            }
            BasisFunction::PHat { n, pole } | BasisFunction::PCheck { n, pole } | BasisFunction::PTilde { n, pole } => {
                Ok(self.pole_family(shift, &poles[pole], z, n)?.pop().unwrap())
            }
        }
    }
}

/// Chart distance between two points of the same polygon, infinite otherwise.
fn chart_gap(a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    if a.polygon != b.polygon {
        return f64::INFINITY;
    }
    a.z.dist(&b.z).to_f64()
}

/// Relative size of the smallest singular value that triggers the
/// Weierstrass variant at `bits` of precision.
pub fn weierstrass_threshold(bits: u32) -> Float {
    pow2(bits, (bits / 4) as i32)
}

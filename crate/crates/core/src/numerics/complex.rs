//! Arbitrary-precision complex scalars stored as a pair of MPFR reals.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::Float;

#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} {:+e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cplx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Self {
        Self::from_f64(prec, 0.0, 1.0)
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cplx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Cplx { re, im }
    }

    pub fn from_parts(prec: u32, re: &Float, im: &Float) -> Self {
        Cplx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    /// `e^{iθ}`.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(prec));
        Cplx { re: c, im: s }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cplx::from_parts(prec, &self.re, &self.im)
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Cplx {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let mut n = Float::with_val(self.prec(), self.re.square_ref());
        n += Float::with_val(self.prec(), self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        Cplx {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        let p = self.prec();
        Cplx {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Cplx {
            re: -self.im.clone(),
            im: self.re.clone(),
        }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let p = self.prec();
        Cplx {
            re: Float::with_val(p, &self.re / &n),
            im: -Float::with_val(p, &self.im / &n),
        }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Cplx {
            re: c * &m,
            im: s * &m,
        }
    }

    /// Principal branch logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        let r = self.abs();
        Cplx {
            re: r.ln(),
            im: Float::with_val(p, self.im.atan2_ref(&self.re)),
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Cplx::zero(p);
        }
        let r = self.abs();
        let mut t = Float::with_val(p, self.re.abs_ref()) + &r;
        t /= 2;
        let t = t.sqrt();
        if self.re.is_sign_positive() {
            let im = Float::with_val(p, &self.im / &t) / 2;
            Cplx { re: t, im }
        } else {
            let mut re = Float::with_val(p, self.im.abs_ref()) / &t;
            re /= 2;
            let im = if self.im.is_sign_negative() { -t } else { t };
            Cplx { re, im }
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec();
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Cplx::one(p);
        while e > 0 {
            if e & 1 == 1 {
                acc *= &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `self += a * b` without intermediate complex temporaries.
    pub fn add_mul(&mut self, a: &Cplx, b: &Cplx) {
        self.re += &a.re * &b.re;
        self.re -= &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im += &a.im * &b.re;
    }

    /// `self -= a * b`.
    pub fn sub_mul(&mut self, a: &Cplx, b: &Cplx) {
        self.re -= &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im -= &a.re * &b.im;
        self.im -= &a.im * &b.re;
    }

    /// `self += conj(a) * b`.
    pub fn add_conj_mul(&mut self, a: &Cplx, b: &Cplx) {
        self.re += &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im -= &a.im * &b.re;
    }

    /// Distance `|self - other|`.
    pub fn dist(&self, other: &Cplx) -> Float {
        (self - other).abs()
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `2^{-k}` at the given precision.
pub fn pow2(prec: u32, k: i32) -> Float {
    let mut x = Float::with_val(prec, 1);
    x >>= k;
    x
}

impl<'a> Add<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn add(self, rhs: &Cplx) -> Cplx {
        let p = self.prec();
        Cplx {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl<'a> Sub<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn sub(self, rhs: &Cplx) -> Cplx {
        let p = self.prec();
        Cplx {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl<'a> Mul<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Cplx) -> Cplx {
        let mut out = Cplx::zero(self.prec());
        out.add_mul(self, rhs);
        out
    }
}

impl<'a> Div<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn div(self, rhs: &Cplx) -> Cplx {
        let n = rhs.norm_sqr();
        let mut out = Cplx::zero(self.prec());
        out.add_conj_mul(rhs, self);
        out.re /= &n;
        out.im /= &n;
        out
    }
}

impl<'a> Mul<&'a Float> for &'a Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Float) -> Cplx {
        self.scale(rhs)
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl<'a> Neg for &'a Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        -self.clone()
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<Cplx> for Cplx {
            type Output = Cplx;
            fn $f(self, rhs: Cplx) -> Cplx {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Cplx> for Cplx {
            type Output = Cplx;
            fn $f(self, rhs: &Cplx) -> Cplx {
                (&self).$f(rhs)
            }
        }
        impl<'a> $tr<Cplx> for &'a Cplx {
            type Output = Cplx;
            fn $f(self, rhs: Cplx) -> Cplx {
                self.$f(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl<'a> AddAssign<&'a Cplx> for Cplx {
    fn add_assign(&mut self, rhs: &Cplx) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign<Cplx> for Cplx {
    fn add_assign(&mut self, rhs: Cplx) {
        *self += &rhs;
    }
}

impl<'a> SubAssign<&'a Cplx> for Cplx {
    fn sub_assign(&mut self, rhs: &Cplx) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl SubAssign<Cplx> for Cplx {
    fn sub_assign(&mut self, rhs: Cplx) {
        *self -= &rhs;
    }
}

impl<'a> MulAssign<&'a Cplx> for Cplx {
    fn mul_assign(&mut self, rhs: &Cplx) {
        let prod = &*self * rhs;
        *self = prod;
    }
}

impl<'a> MulAssign<&'a Float> for Cplx {
    fn mul_assign(&mut self, rhs: &Float) {
        self.re *= rhs;
        self.im *= rhs;
    }
}

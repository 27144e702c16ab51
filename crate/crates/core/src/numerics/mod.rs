//! Arbitrary-precision scalars, dense complex linear algebra and polynomials.

mod complex;
mod expr;
mod matrix;
mod poly;

pub use complex::{pi, pow2, Cplx};
pub use expr::eval_expr;
pub use matrix::{cholesky, lstsq, pivoted_columns, singular_values, DenseMatrix, Householder};
pub use poly::ComplexPoly;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision shared by every value of one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionCtx {
    pub bits: u32,
    pub guard_bits: u32,
}

impl PrecisionCtx {
    pub const DEFAULT_GUARD: u32 = 32;

    pub fn new(bits: u32) -> Result<Self> {
        Self::with_guard(bits, Self::DEFAULT_GUARD)
    }

    pub fn with_guard(bits: u32, guard_bits: u32) -> Result<Self> {
        if bits < 64 {
            return Err(Error::Config(format!("precision must be at least 64 bits, got {bits}")));
        }
        if guard_bits < 16 || guard_bits >= bits {
            return Err(Error::Config(format!("guard bits must lie in [16, bits), got {guard_bits}")));
        }
        Ok(PrecisionCtx { bits, guard_bits })
    }

    /// Same guard, twice the mantissa. Used for finite-difference evaluations.
    pub fn doubled(&self) -> Self {
        PrecisionCtx {
            bits: 2 * self.bits,
            guard_bits: self.guard_bits,
        }
    }

    pub fn real(&self, x: f64) -> Float {
        Float::with_val(self.bits, x)
    }

    pub fn zero(&self) -> Cplx {
        Cplx::zero(self.bits)
    }

    pub fn one(&self) -> Cplx {
        Cplx::one(self.bits)
    }

    pub fn cplx(&self, re: f64, im: f64) -> Cplx {
        Cplx::from_f64(self.bits, re, im)
    }

    pub fn pi(&self) -> Float {
        pi(self.bits)
    }

    /// `2^{-bits+guard}`: tolerance for operations that should be exact up to rounding.
    pub fn tol_full(&self) -> Float {
        pow2(self.bits, (self.bits - self.guard_bits) as i32)
    }

    /// `2^{-bits/2}`: tolerance for geometric checks and rank decisions.
    pub fn tol_half(&self) -> Float {
        pow2(self.bits, (self.bits / 2) as i32)
    }

    /// `2^{-bits/k}`.
    pub fn tol_frac(&self, k: u32) -> Float {
        pow2(self.bits, (self.bits / k) as i32)
    }
}

/// Full-precision decimal rendering, parseable by [`parse_real`].
pub fn real_to_string(x: &Float) -> String {
    x.to_string_radix(10, None)
}

pub fn parse_real(s: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(s.trim()).map_err(|e| Error::Config(format!("bad real '{s}': {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Decimal `[re, im]` pair.
pub fn cplx_to_strings(z: &Cplx) -> [String; 2] {
    [real_to_string(&z.re), real_to_string(&z.im)]
}

pub fn cplx_from_strings(s: &[String; 2], prec: u32) -> Result<Cplx> {
    Ok(Cplx::new(parse_real(&s[0], prec)?, parse_real(&s[1], prec)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_bounds() {
        assert!(PrecisionCtx::new(32).is_err());
        assert!(PrecisionCtx::with_guard(128, 8).is_err());
        let ctx = PrecisionCtx::new(128).unwrap();
        assert_eq!(ctx.doubled().bits, 256);
        assert_eq!(ctx.tol_half(), pow2(128, 64));
    }

    #[test]
    fn decimal_roundtrip_is_exact() {
        let ctx = PrecisionCtx::new(256).unwrap();
        let x = Float::with_val(256, 2).sqrt() / 3;
        let y = parse_real(&real_to_string(&x), 256).unwrap();
        assert_eq!(x, y);
        let z = ctx.cplx(0.1, -7.25);
        assert_eq!(cplx_from_strings(&cplx_to_strings(&z), 256).unwrap(), z);
    }
}

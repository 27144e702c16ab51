use rug::Float;

use super::complex::Cplx;

/// Extra mantissa given to antiderivative coefficients so that
/// differentiating back and rounding to the input precision is exact.
const ANTIDERIVATIVE_EXTRA_BITS: u32 = 64;

/// Dense complex polynomial `Σ c_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    pub coeffs: Vec<Cplx>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Cplx>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        ComplexPoly { coeffs }
    }

    pub fn zero(prec: u32) -> Self {
        ComplexPoly::new(vec![Cplx::zero(prec)])
    }

    pub fn constant(c: Cplx) -> Self {
        ComplexPoly::new(vec![c])
    }

    /// `z^k`.
    pub fn monomial(k: usize, prec: u32) -> Self {
        let mut coeffs = vec![Cplx::zero(prec); k + 1];
        coeffs[k] = Cplx::one(prec);
        ComplexPoly::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        ComplexPoly::new(self.coeffs.iter().map(|c| c.with_prec(prec)).collect())
    }

    /// Horner evaluation at the precision of `z`.
    pub fn eval(&self, z: &Cplx) -> Cplx {
        let p = z.prec();
        let mut acc = self.coeffs.last().unwrap().with_prec(p);
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc * z;
            acc += c;
        }
        acc
    }

    /// Taylor coefficients `p^{(j)}(z)/j!` for `j = 0..count`, by repeated
    /// synthetic division.
    pub fn taylor_at(&self, z: &Cplx, count: usize) -> Vec<Cplx> {
        let p = z.prec();
        let mut work: Vec<Cplx> = self.coeffs.iter().map(|c| c.with_prec(p)).collect();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            if work.is_empty() {
                out.push(Cplx::zero(p));
                continue;
            }
            // Divide by (x - z): quotient in work[1..], remainder ends in work[0].
            let n = work.len();
            for k in (0..n - 1).rev() {
                let t = &work[k + 1] * z;
                work[k] += &t;
            }
            out.push(work.remove(0));
        }
        out
    }

    /// `n`-th derivative value at `z`.
    pub fn derivative_at(&self, z: &Cplx, n: usize) -> Cplx {
        let t = self.taylor_at(z, n + 1);
        let mut fact = Float::with_val(z.prec(), 1);
        for k in 2..=n {
            fact *= k as u32;
        }
        t[n].scale(&fact)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return ComplexPoly::zero(self.prec());
        }
        ComplexPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| {
                    let mut d = c.clone();
                    d.re *= k as u32;
                    d.im *= k as u32;
                    d
                })
                .collect(),
        )
    }

    /// Primitive with value `c0` at the origin. Coefficients carry extra
    /// precision so that `derivative` followed by rounding back to the
    /// original precision recovers `self` exactly.
    pub fn antiderivative(&self, c0: &Cplx) -> Self {
        let p = self.prec() + ANTIDERIVATIVE_EXTRA_BITS;
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c0.with_prec(p));
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut a = c.with_prec(p);
            a.re /= (k + 1) as u32;
            a.im /= (k + 1) as u32;
            coeffs.push(a);
        }
        ComplexPoly::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.prec();
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                let mut c = self.coeffs.get(k).map_or_else(|| Cplx::zero(p), |c| c.clone());
                if let Some(o) = other.coeffs.get(k) {
                    c += o;
                }
                c
            })
            .collect();
        ComplexPoly::new(coeffs)
    }

    pub fn scale(&self, s: &Cplx) -> Self {
        ComplexPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: &Cplx, other: &Self) {
        let p = self.prec();
        while self.coeffs.len() < other.coeffs.len() {
            self.coeffs.push(Cplx::zero(p));
        }
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            c.add_mul(s, o);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.prec();
        let mut coeffs = vec![Cplx::zero(p); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j].add_mul(a, b);
            }
        }
        ComplexPoly::new(coeffs)
    }
}

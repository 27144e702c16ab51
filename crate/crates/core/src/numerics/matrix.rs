//! Dense complex matrices with Householder QR, Cholesky, column-pivoted QR
//! and one-sided Jacobi singular values.

use rug::Float;

use super::complex::{pow2, Cplx};
use crate::error::{Error, Result};

/// Column-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<Cplx>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        DenseMatrix {
            rows,
            cols,
            prec,
            data: vec![Cplx::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = Cplx::one(prec);
        }
        m
    }

    /// Builds from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Cplx>], prec: u32) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c, prec);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = v.with_prec(prec);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Cplx>], prec: u32) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        let mut m = Self::zeros(r, c, prec);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.with_prec(prec);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn column(&self, j: usize) -> &[Cplx] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [Cplx] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<Cplx> {
        (0..self.cols).map(|j| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Cplx>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.prec);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.prec);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols, self.prec);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = &other[(k, j)];
                if b.is_zero() {
                    continue;
                }
                for i in 0..self.rows {
                    let idx = i + j * out.rows;
                    out.data[idx].add_mul(&self.data[i + k * self.rows], b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Cplx]) -> Vec<Cplx> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        let mut out = vec![Cplx::zero(self.prec); self.rows];
        for (k, xk) in x.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                o.add_mul(&self.data[i + k * self.rows], xk);
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> Float {
        let mut s = Float::new(self.prec);
        for v in &self.data {
            s += v.norm_sqr();
        }
        s.sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec);
        for v in &self.data {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Solves `A X = B` for square `A` through QR.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        lstsq(self, b)
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        self.solve(&Self::identity(self.rows, self.prec))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Cplx;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

fn vec_norm(v: &[Cplx], prec: u32) -> Float {
    let mut s = Float::new(prec);
    for x in v {
        s += x.norm_sqr();
    }
    s.sqrt()
}

/// `v^H w` over the tails of two columns.
fn dot_conj(v: &[Cplx], w: &[Cplx], prec: u32) -> Cplx {
    let mut acc = Cplx::zero(prec);
    for (a, b) in v.iter().zip(w) {
        acc.add_conj_mul(a, b);
    }
    acc
}

/// Householder QR factorization `A = Q R` of a tall matrix.
///
/// Reflector `k` is `I - v v^H / tau_k` acting on rows `k..`, with `v[0]`
/// stored explicitly.
#[derive(Clone, Debug)]
pub struct Householder {
    rows: usize,
    cols: usize,
    prec: u32,
    reflectors: Vec<Vec<Cplx>>,
    taus: Vec<Float>,
    r: DenseMatrix,
}

impl Householder {
    /// Factors `a`; fails with `RankDeficient(k)` when `|R_kk|` falls below
    /// `2^{-bits/2}` times the norm of the original column `k`.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let prec = a.prec;
        let threshold = pow2(prec, (prec / 2) as i32);
        Self::factor_with_threshold(a, &threshold)
    }

    pub fn factor_with_threshold(a: &DenseMatrix, rel_threshold: &Float) -> Result<Self> {
        let (m, n, prec) = (a.rows, a.cols, a.prec);
        assert!(m >= n, "least squares needs rows >= cols");
        let col_norms: Vec<Float> = (0..n).map(|j| vec_norm(a.column(j), prec)).collect();
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(n);
        let mut taus = Vec::with_capacity(n);
        for k in 0..n {
            let x = &work.column(k)[k..];
            let xnorm = vec_norm(x, prec);
            let cutoff = Float::with_val(prec, &col_norms[k] * rel_threshold);
            if xnorm <= cutoff || xnorm.is_zero() {
                return Err(Error::RankDeficient(k));
            }
            // alpha = -e^{i arg x0} |x| avoids cancellation in v0 = x0 - alpha.
            let x0 = x[0].clone();
            let x0abs = x0.abs();
            let phase = if x0abs.is_zero() {
                Cplx::one(prec)
            } else {
                Cplx::new(
                    Float::with_val(prec, &x0.re / &x0abs),
                    Float::with_val(prec, &x0.im / &x0abs),
                )
            };
            let alpha = -phase.scale(&xnorm);
            let mut v: Vec<Cplx> = x.to_vec();
            v[0] -= &alpha;
            // v^H v = 2 |x| (|x| + |x0|)
            let mut tau = Float::with_val(prec, &xnorm + &x0abs);
            tau *= &xnorm;
            for j in (k + 1)..n {
                let col = &mut work.column_mut(j)[k..];
                let mut w = dot_conj(&v, col, prec);
                w.re /= &tau;
                w.im /= &tau;
                for (c, vi) in col.iter_mut().zip(&v) {
                    c.sub_mul(vi, &w);
                }
            }
            let col = &mut work.column_mut(k)[k..];
            col[0] = alpha;
            for c in col.iter_mut().skip(1) {
                *c = Cplx::zero(prec);
            }
            reflectors.push(v);
            taus.push(tau);
        }
        let mut r = DenseMatrix::zeros(n, n, prec);
        for j in 0..n {
            for i in 0..=j {
                r[(i, j)] = work[(i, j)].clone();
            }
        }
        Ok(Householder {
            rows: m,
            cols: n,
            prec,
            reflectors,
            taus,
            r,
        })
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// Overwrites `b` (length `rows`) with `Q^H b`.
    pub fn apply_qh(&self, b: &mut [Cplx]) {
        assert_eq!(b.len(), self.rows);
        for (k, (v, tau)) in self.reflectors.iter().zip(&self.taus).enumerate() {
            let tail = &mut b[k..];
            let mut w = dot_conj(v, tail, self.prec);
            w.re /= tau;
            w.im /= tau;
            for (c, vi) in tail.iter_mut().zip(v) {
                c.sub_mul(vi, &w);
            }
        }
    }

    /// Least-squares solution for each column of `b`.
    pub fn solve(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.rows, self.rows);
        let n = self.cols;
        let mut x = DenseMatrix::zeros(n, b.cols, self.prec);
        for c in 0..b.cols {
            let mut rhs: Vec<Cplx> = b.column(c).iter().map(|v| v.with_prec(self.prec)).collect();
            self.apply_qh(&mut rhs);
            for i in (0..n).rev() {
                let mut acc = rhs[i].clone();
                for j in (i + 1)..n {
                    acc.sub_mul(&self.r[(i, j)], &x[(j, c)]);
                }
                x[(i, c)] = &acc / &self.r[(i, i)];
            }
        }
        x
    }
}

/// Least-squares minimizer of `‖A X − B‖` column by column.
pub fn lstsq(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(Householder::factor(a)?.solve(b))
}

/// Cholesky factor `L` (lower triangular, `L L^H = M`) of a Hermitian matrix.
pub fn cholesky(m: &DenseMatrix) -> Result<DenseMatrix> {
    assert_eq!(m.rows, m.cols, "cholesky needs a square matrix");
    let (n, prec) = (m.rows, m.prec);
    let mut l = DenseMatrix::zeros(n, n, prec);
    for j in 0..n {
        let mut d = m[(j, j)].re.clone();
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0 || d.is_nan() {
            return Err(Error::NotPositiveDefinite(j));
        }
        let djj = d.sqrt();
        for i in (j + 1)..n {
            let mut s = m[(i, j)].clone();
            for k in 0..j {
                let ljk = l[(j, k)].conj();
                s.sub_mul(&l[(i, k)], &ljk);
            }
            s.re /= &djj;
            s.im /= &djj;
            l[(i, j)] = s;
        }
        l[(j, j)] = Cplx::from_real(djj);
    }
    Ok(l)
}

/// Column-pivoted Householder QR; returns the column order (most independent
/// first) together with `|R_kk|` along that order.
pub fn pivoted_columns(a: &DenseMatrix) -> (Vec<usize>, Vec<Float>) {
    let (m, n, prec) = (a.rows, a.cols, a.prec);
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag = Vec::new();
    for k in 0..m.min(n) {
        let mut best = k;
        let mut best_norm = Float::with_val(prec, -1);
        for j in k..n {
            let nj = vec_norm(&work.column(j)[k..], prec);
            if nj > best_norm {
                best_norm = nj;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let tmp = work[(i, k)].clone();
                work[(i, k)] = work[(i, best)].clone();
                work[(i, best)] = tmp;
            }
            perm.swap(k, best);
        }
        let x = &work.column(k)[k..];
        let xnorm = vec_norm(x, prec);
        diag.push(xnorm.clone());
        if xnorm.is_zero() {
            continue;
        }
        let x0abs = x[0].abs();
        let phase = if x0abs.is_zero() {
            Cplx::one(prec)
        } else {
            x[0].scale(&Float::with_val(prec, x0abs.recip_ref()))
        };
        let alpha = -phase.scale(&xnorm);
        let mut v: Vec<Cplx> = x.to_vec();
        v[0] -= &alpha;
        let mut tau = Float::with_val(prec, &xnorm + &x0abs);
        tau *= &xnorm;
        for j in k..n {
            let col = &mut work.column_mut(j)[k..];
            let mut w = dot_conj(&v, col, prec);
            w.re /= &tau;
            w.im /= &tau;
            for (c, vi) in col.iter_mut().zip(&v) {
                c.sub_mul(vi, &w);
            }
        }
    }
    (perm, diag)
}

/// Singular values in decreasing order (one-sided Jacobi). Intended for small matrices.
pub fn singular_values(a: &DenseMatrix) -> Vec<Float> {
    let mut w = if a.rows >= a.cols { a.clone() } else { a.conj_transpose() };
    let (n, prec) = (w.cols, w.prec);
    let tol = pow2(prec, (prec as i32) - 8);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = vec_norm(w.column(p), prec).square();
                let beta = vec_norm(w.column(q), prec).square();
                let gamma = dot_conj(w.column(p), w.column(q), prec);
                let gabs = gamma.abs();
                let scale = Float::with_val(prec, &alpha * &beta).sqrt();
                if gabs.is_zero() || gabs <= Float::with_val(prec, &scale * &tol) {
                    continue;
                }
                rotated = true;
                // Rotate column q by the phase of gamma so the coupling becomes real.
                let ph = gamma.conj().scale(&Float::with_val(prec, gabs.recip_ref()));
                for x in w.column_mut(q) {
                    *x = &*x * &ph;
                }
                let mut zeta = Float::with_val(prec, &beta - &alpha);
                zeta /= 2;
                zeta /= &gabs;
                let root = (Float::with_val(prec, zeta.square_ref()) + 1u32).sqrt();
                let mut t = Float::with_val(prec, zeta.abs_ref()) + root;
                t = t.recip();
                if zeta.is_sign_negative() {
                    t = -t;
                }
                let c = (Float::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
                let s = Float::with_val(prec, &c * &t);
                for i in 0..w.rows {
                    let xp = w[(i, p)].clone();
                    let xq = w[(i, q)].clone();
                    w[(i, p)] = &xp.scale(&c) - &xq.scale(&s);
                    w[(i, q)] = &xp.scale(&s) + &xq.scale(&c);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<Float> = (0..n).map(|j| vec_norm(w.column(j), prec)).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

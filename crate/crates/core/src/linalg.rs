//! Dense Hermitian eigendecomposition.
//!
//! The matrix is reduced to real symmetric tridiagonal form with Hermitian
//! Householder reflectors and a diagonal phase matrix, then diagonalized by
//! the implicit-shift QL iteration. Eigenvector accumulation is done on the
//! rows that are actually requested, so asking for a handful of components
//! (e.g. the occupation of two sites) only costs the reduction itself.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field scalar the eigensolver works over (`f64` or `Complex64`).
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;
    const ONE: Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn to_complex(self) -> Complex64;

    /// `x / |x|`, or one for zero.
    fn unit_phase(self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            Self::ONE
        } else {
            self.scale(1.0 / n)
        }
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Which eigenvector data to accumulate.
#[derive(Debug, Clone, Copy)]
pub enum Want<'a> {
    ValuesOnly,
    All,
    /// Only these rows (matrix indices) of the eigenvector matrix.
    Rows(&'a [usize]),
}

/// Eigenvalues in ascending order plus the requested eigenvector rows.
///
/// `coeffs[j * rows + r]` is component `r` (of the requested rows) of the
/// eigenvector belonging to `values[j]`. With [`Want::All`] `rows == n` and
/// row `j` of `coeffs` is the full eigenvector `j`.
#[derive(Debug, Clone)]
pub struct Decomposition<S> {
    pub values: Vec<f64>,
    pub rows: usize,
    pub coeffs: Vec<S>,
}

struct Reflector<S> {
    /// First matrix index the reflector acts on.
    offset: usize,
    v: Vec<S>,
    tau: f64,
}

struct Tridiagonal<S> {
    diag: Vec<f64>,
    /// `off[k]` couples `k` and `k + 1`; real and non-negative after phasing.
    off: Vec<f64>,
    reflectors: Vec<Reflector<S>>,
    /// Diagonal phase matrix making the reduced matrix real.
    phases: Vec<S>,
}

/// Reduce the Hermitian matrix `a` (row-major, only the lower triangle is
/// read) to real tridiagonal form `T = (Q D)^† A (Q D)`.
fn tridiagonalize<S: Scalar>(mut a: Vec<S>, n: usize) -> Tridiagonal<S> {
    let mut diag = vec![0.0; n];
    let mut sub = vec![S::ZERO; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![S::ZERO; n];

    for k in 0..n.saturating_sub(1) {
        diag[k] = a[k * n + k].re();
        let m = n - k - 1;
        let off = k + 1;
        let x: Vec<S> = (0..m).map(|j| a[(off + j) * n + k]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let alpha = (tail + x[0].norm_sqr()).sqrt();
        let ph = x[0].unit_phase();
        let mut v = x;
        v[0] += ph.scale(alpha);
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        sub[k] = -ph.scale(alpha);

        // p = tau * B v using the lower triangle of the trailing block B.
        let p = &mut p[..m];
        p.iter_mut().for_each(|z| *z = S::ZERO);
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + off + i + 1];
            let vi = v[i];
            let mut acc = S::ZERO;
            for j in 0..i {
                acc += row[j] * v[j];
                p[j] += row[j].conj() * vi;
            }
            acc += S::from_real(row[i].re()) * vi;
            p[i] += acc;
        }
        let mut vp = 0.0;
        for i in 0..m {
            p[i] = p[i].scale(tau);
            vp += (v[i].conj() * p[i]).re();
        }
        let kk = 0.5 * tau * vp;
        let q: Vec<S> = p.iter().zip(&v).map(|(&pi, &vi)| pi - vi.scale(kk)).collect();
        // B -= v q^† + q v^† (lower triangle).
        for i in 0..m {
            let (vi, qi) = (v[i], q[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + off + i + 1];
            for j in 0..=i {
                row[j] -= vi * q[j].conj() + qi * v[j].conj();
            }
        }
        reflectors.push(Reflector { offset: off, v, tau });
    }
    if n > 0 {
        diag[n - 1] = a[(n - 1) * n + (n - 1)].re();
    }

    let mut phases = vec![S::ONE; n];
    let mut off = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let mag = sub[k].norm_sqr().sqrt();
        off[k] = mag;
        phases[k + 1] = if mag == 0.0 {
            S::ONE
        } else {
            phases[k] * sub[k].scale(1.0 / mag)
        };
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
        phases,
    }
}

/// Full `Q` with `Q = H_0 H_1 ... H_{n-3}`, accumulated backwards; returned
/// transposed and phased so that row `j` is column `j` of `Q D`.
fn accumulate_all<S: Scalar>(t: &Tridiagonal<S>, n: usize) -> Vec<S> {
    let mut q = vec![S::ZERO; n * n];
    for i in 0..n {
        q[i * n + i] = S::ONE;
    }
    let mut w = vec![S::ZERO; n];
    for r in t.reflectors.iter().rev() {
        let off = r.offset;
        let w = &mut w[off..];
        w.iter_mut().for_each(|z| *z = S::ZERO);
        for (i, &vi) in r.v.iter().enumerate() {
            let row = &q[(off + i) * n + off..(off + i + 1) * n];
            let cv = vi.conj();
            for (wj, &qij) in w.iter_mut().zip(row) {
                *wj += cv * qij;
            }
        }
        for (i, &vi) in r.v.iter().enumerate() {
            let s = vi.scale(r.tau);
            let row = &mut q[(off + i) * n + off..(off + i + 1) * n];
            for (qij, &wj) in row.iter_mut().zip(w.iter()) {
                *qij -= s * wj;
            }
        }
    }
    let mut basis = vec![S::ZERO; n * n];
    for r in 0..n {
        for j in 0..n {
            basis[j * n + r] = q[r * n + j] * t.phases[j];
        }
    }
    basis
}

/// Selected rows of `Q D`, laid out like [`accumulate_all`].
fn accumulate_rows<S: Scalar>(t: &Tridiagonal<S>, n: usize, rows: &[usize]) -> Vec<S> {
    let m = rows.len();
    let mut basis = vec![S::ZERO; n * m];
    let mut y = vec![S::ZERO; n];
    for (c, &r) in rows.iter().enumerate() {
        y.iter_mut().for_each(|z| *z = S::ZERO);
        y[r] = S::ONE;
        for h in &t.reflectors {
            let seg = &mut y[h.offset..];
            let mut dot = S::ZERO;
            for (yi, &vi) in seg.iter().zip(&h.v) {
                dot += *yi * vi;
            }
            let dot = dot.scale(h.tau);
            for (yi, &vi) in seg.iter_mut().zip(&h.v) {
                *yi -= dot * vi.conj();
            }
        }
        for j in 0..n {
            basis[j * m + c] = y[j] * t.phases[j];
        }
    }
    basis
}

#[inline]
fn rotate<S: Scalar>(basis: &mut [S], m: usize, i: usize, c: f64, s: f64) {
    let (lo, hi) = basis.split_at_mut((i + 1) * m);
    let zi = &mut lo[i * m..];
    let zn = &mut hi[..m];
    for (a, b) in zi.iter_mut().zip(zn.iter_mut()) {
        let f = *b;
        *b = a.scale(s) + f.scale(c);
        *a = a.scale(c) - f.scale(s);
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; rotations are applied
/// to the rows of `basis` (`m` entries each).
fn tql<S: Scalar>(
    d: &mut [f64],
    e: &mut [f64],
    basis: &mut [S],
    m: usize,
    max_iter: usize,
) -> Result<()> {
    let n = d.len();
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            total += 1;
            if total > max_iter {
                return Err(Error::NoConvergence(max_iter));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if m > 0 {
                    rotate(basis, m, i, c, s);
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    Ok(())
}

/// Eigendecomposition of the Hermitian `n x n` matrix `a` (row-major; the
/// lower triangle is used). Values come back ascending.
pub fn decompose<S: Scalar>(a: Vec<S>, n: usize, want: Want<'_>) -> Result<Decomposition<S>> {
    if a.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "matrix storage {} does not match dimension {n}",
            a.len()
        )));
    }
    if let Some(bad) = a.iter().find(|z| !z.norm_sqr().is_finite()) {
        return Err(Error::NonFiniteInput(format!("matrix entry {bad:?}")));
    }
    if n == 0 {
        return Ok(Decomposition {
            values: vec![],
            rows: 0,
            coeffs: vec![],
        });
    }
    let mut t = tridiagonalize(a, n);
    let (rows, mut basis) = match want {
        Want::ValuesOnly => (0, Vec::new()),
        Want::All => (n, accumulate_all(&t, n)),
        Want::Rows(rs) => {
            if let Some(&bad) = rs.iter().find(|&&r| r >= n) {
                return Err(Error::InvalidParameter(format!("row {bad} out of range {n}")));
            }
            (rs.len(), accumulate_rows(&t, n, rs))
        }
    };
    let mut d = std::mem::take(&mut t.diag);
    let mut e = std::mem::take(&mut t.off);
    tql(&mut d, &mut e, &mut basis, rows, 50 * n.max(1))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let coeffs = if rows == 0 {
        Vec::new()
    } else {
        let mut out = Vec::with_capacity(n * rows);
        for &i in &order {
            out.extend_from_slice(&basis[i * rows..(i + 1) * rows]);
        }
        out
    };
    Ok(Decomposition {
        values,
        rows,
        coeffs,
    })
}

/// Complex Hermitian convenience wrapper: uses the real path when every
/// imaginary part vanishes.
pub fn decompose_complex(
    a: &[Complex64],
    n: usize,
    want: Want<'_>,
) -> Result<Decomposition<Complex64>> {
    if a.iter().all(|z| z.im == 0.0) {
        let real: Vec<f64> = a.iter().map(|z| z.re).collect();
        let dec = decompose(real, n, want)?;
        Ok(Decomposition {
            values: dec.values,
            rows: dec.rows,
            coeffs: dec.coeffs.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        })
    } else {
        decompose(a.to_vec(), n, want)
    }
}

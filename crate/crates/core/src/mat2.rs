//! 2x2 complex matrices for the per-mode oracles.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{decompose, Want};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA_X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA_Y: Mat2 = Mat2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA_Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    /// `v . sigma` for a real 3-vector.
    pub fn pauli(v: [f64; 3]) -> Mat2 {
        Mat2([
            [Complex64::new(v[2], 0.0), Complex64::new(v[0], -v[1])],
            [Complex64::new(v[0], v[1]), Complex64::new(-v[2], 0.0)],
        ])
    }

    /// Real coefficients `(h0, h)` with `M = h0 I + h . sigma`; only
    /// meaningful for Hermitian input.
    pub fn pauli_components(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let h0 = 0.5 * (m[0][0].re + m[1][1].re);
        let hz = 0.5 * (m[0][0].re - m[1][1].re);
        let hx = 0.5 * (m[1][0].re + m[0][1].re);
        let hy = 0.5 * (m[1][0].im - m[0][1].im);
        (h0, [hx, hy, hz])
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let d = *self - *other;
        d.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm of `self - other`.
    pub fn op_distance(&self, other: &Mat2) -> Result<f64> {
        let d = *self - *other;
        let g = d.adjoint() * d;
        let (vals, _) = g.eigh()?;
        Ok(vals[1].max(0.0).sqrt())
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Dense Hermitian eigendecomposition; columns of the returned matrix are
    /// the eigenvectors, values ascending.
    pub fn eigh(&self) -> Result<([f64; 2], Mat2)> {
        let a = vec![self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]];
        let dec = decompose(a, 2, Want::All)?;
        let v = &dec.coeffs;
        Ok((
            [dec.values[0], dec.values[1]],
            Mat2([[v[0], v[2]], [v[1], v[3]]]),
        ))
    }

    /// `f(M)` for Hermitian `M` via its eigendecomposition.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Result<Mat2> {
        let (vals, vecs) = self.eigh()?;
        let d = Mat2([
            [Complex64::new(f(vals[0]), 0.0), ZERO],
            [ZERO, Complex64::new(f(vals[1]), 0.0)],
        ]);
        Ok(vecs * d * vecs.adjoint())
    }

    /// Principal square root of a positive semidefinite Hermitian matrix.
    pub fn psd_sqrt(&self) -> Result<Mat2> {
        self.hermitian_function(|x| x.max(0.0).sqrt())
    }

    /// Unitary factor of the left polar decomposition `M = |M| U`, with
    /// `|M| = sqrt(M M^†)`.
    ///
    /// For 2x2 matrices `M + e^{i arg det M} adj(M)^† = Tr|M| U`, which avoids
    /// forming `M M^†` and squaring the condition number.
    pub fn polar_unitary(&self) -> Result<Mat2> {
        let m = &self.0;
        let det = self.det();
        let size: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
        if det.norm().is_nan() || det.norm() <= 1e-30 * size {
            return Err(Error::IllConditioned(format!(
                "rank-deficient polar factor (|det| = {:e}, |M|^2 = {:e})",
                det.norm(),
                size
            )));
        }
        let phase = det / det.norm();
        let adj_dagger = Mat2([[m[1][1].conj(), -m[1][0].conj()], [-m[0][1].conj(), m[0][0].conj()]]);
        let n = *self + adj_dagger.scale(phase);
        let trace_abs: f64 = (0.5 * n.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        Ok(n.scale(Complex64::new(1.0 / trace_abs, 0.0)))
    }

    /// `exp(-i angle sigma_z / 2)`.
    pub fn z_rotation(angle: f64) -> Mat2 {
        let h = 0.5 * angle;
        Mat2([
            [Complex64::new(h.cos(), -h.sin()), ZERO],
            [ZERO, Complex64::new(h.cos(), h.sin())],
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// A factor `F` with `F·F^H = M` for some PSD `M`.
pub type HermitianFactor = CMatrix;

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `F^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len(), "adjoint_mul_vec shape mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += self[(i, j)].conj() * x[i];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn sub(&self, rhs: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm_sqr() == 0.0))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Complex Hermitian matrix, `M[j][k] = conj(M[k][j])` with a real diagonal.
///
/// Serialized as `{ "n": .., "entries": [re, im, re, im, ...] }` in row-major
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianRepr", into = "HermitianRepr")]
pub struct HermitianMatrix {
    inner: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct HermitianRepr {
    n: usize,
    entries: Vec<f64>,
}

impl TryFrom<HermitianRepr> for HermitianMatrix {
    type Error = Error;
    fn try_from(r: HermitianRepr) -> Result<Self> {
        if r.entries.len() != 2 * r.n * r.n {
            return Err(Error::Dimension(format!(
                "hermitian matrix of side {} needs {} interleaved values, got {}",
                r.n,
                2 * r.n * r.n,
                r.entries.len()
            )));
        }
        let data = r.entries.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        HermitianMatrix::new(CMatrix::from_row_major(r.n, r.n, data)?)
    }
}

impl From<HermitianMatrix> for HermitianRepr {
    fn from(m: HermitianMatrix) -> Self {
        let n = m.n();
        let entries = m.inner.data.iter().flat_map(|z| [z.re, z.im]).collect();
        HermitianRepr { n, entries }
    }
}

impl HermitianMatrix {
    /// Validates conjugate symmetry to `1e-12·max(1, ‖M‖_F)` and then
    /// symmetrizes exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", m.rows, m.cols)));
        }
        let tol = 1e-12 * m.frobenius_norm().max(1.0);
        let n = m.rows;
        for i in 0..n {
            for j in 0..=i {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > tol {
                    return Err(Error::Domain(format!(
                        "matrix is not Hermitian: |M[{i}][{j}] - conj(M[{j}][{i}])| = {d:e}"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from the lower triangle; the upper triangle is the conjugate
    /// mirror and the diagonal keeps only its real part.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let z = f(i, j);
                if i == j {
                    m[(i, i)] = Complex64::new(z.re, 0.0);
                } else {
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
        }
        Self { inner: m }
    }

    fn symmetrized(m: CMatrix) -> Self {
        let n = m.rows;
        Self::from_lower(n, |i, j| if i == j { m[(i, i)] } else { (m[(i, j)] + m[(j, i)].conj()) * 0.5 })
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: CMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: CMatrix::identity(n) }
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self::from_lower(d.len(), |i, j| if i == j { Complex64::new(d[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// `w·w^H`.
    pub fn outer(w: &[Complex64]) -> Self {
        Self::from_lower(w.len(), |i, j| w[i] * w[j].conj())
    }

    /// `σ²·ρ^{|m-n|}` spatially correlated covariance; `ρ = 0` gives `σ²·I`.
    pub fn toeplitz_correlation(n: usize, variance: f64, correlation: f64) -> Self {
        Self::from_lower(n, |i, j| {
            let lag = (i - j) as i32;
            let c = if lag == 0 { 1.0 } else { correlation.powi(lag) };
            Complex64::new(variance * c, 0.0)
        })
    }

    pub fn n(&self) -> usize {
        self.inner.rows
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.inner[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// `x^H M x`, real by Hermitian symmetry.
    pub fn quad_form(&self, x: &[Complex64]) -> f64 {
        let n = self.n();
        assert_eq!(x.len(), n);
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += self.inner[(i, j)] * x[j];
            }
            acc += (x[i].conj() * row).re;
        }
        acc
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.inner.mul_vec(x)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { inner: self.inner.scale(s) }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::from_lower(self.n(), |i, j| self.inner[(i, j)] + rhs.inner[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::from_lower(self.n(), |i, j| self.inner[(i, j)] - rhs.inner[(i, j)])
    }

    /// `F^H M F` for a (possibly rectangular) factor `F`.
    pub fn congruence(&self, f: &CMatrix) -> Self {
        let fm = f.adjoint().matmul(&self.inner).matmul(f);
        Self::symmetrized(fm)
    }

    /// Real symmetric embedding `[[Re M, -Im M], [Im M, Re M]]`, row-major
    /// side `2n`. Every eigenvalue of `M` appears twice.
    pub fn real_embedding(&self) -> Vec<f64> {
        let n = self.n();
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.inner[(i, j)];
                out[i * m + j] = z.re;
                out[i * m + n + j] = -z.im;
                out[(n + i) * m + j] = z.im;
                out[(n + i) * m + n + j] = z.re;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_major(2, 2, vec![c64(1.0, 0.0), c64(1.0, 1.0), c64(1.0, 1.0), c64(2.0, 0.0)]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn quad_form_matches_definition() {
        let h = HermitianMatrix::from_lower(2, |i, j| match (i, j) {
            (0, 0) => c64(2.0, 0.0),
            (1, 0) => c64(0.5, -1.0),
            _ => c64(-1.0, 0.0),
        });
        let x = [c64(1.0, 2.0), c64(-0.5, 0.25)];
        let mx = h.mul_vec(&x);
        let direct: Complex64 = x.iter().zip(&mx).map(|(a, b)| a.conj() * b).sum();
        assert!((direct.re - h.quad_form(&x)).abs() < 1e-14);
        assert!(direct.im.abs() < 1e-14);
    }

    #[test]
    fn serde_roundtrip_is_exact() {
        let h = HermitianMatrix::toeplitz_correlation(4, 0.002, 0.9);
        let s = serde_json::to_string(&h).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(h, back);
    }
}

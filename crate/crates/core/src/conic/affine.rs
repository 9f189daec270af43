//! Affine expressions over the scalar variables of a [`ProgramBuilder`].
//!
//! [`ProgramBuilder`]: super::ProgramBuilder

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::CMatrix;

/// `Σ coeff·x[var] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: vec![], constant: c }
    }

    pub fn var(v: usize) -> Self {
        Self { terms: vec![(v, 1.0)], constant: 0.0 }
    }

    pub fn term(v: usize, coeff: f64) -> Self {
        Self { terms: vec![(v, coeff)], constant: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.iter().all(|t| t.1 == 0.0)
    }

    /// `self += s·other`.
    pub fn add_scaled(&mut self, other: &AffineExpr, s: f64) {
        if s == 0.0 {
            return;
        }
        self.terms.extend(other.terms.iter().map(|&(v, c)| (v, c * s)));
        self.constant += other.constant * s;
    }

    pub fn add_term(&mut self, v: usize, coeff: f64) {
        self.terms.push((v, coeff));
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|&(v, c)| (v, c * s)).collect(), constant: self.constant * s }
    }

    pub fn plus(mut self, other: &AffineExpr) -> Self {
        self.add_scaled(other, 1.0);
        self
    }

    pub fn minus(mut self, other: &AffineExpr) -> Self {
        self.add_scaled(other, -1.0);
        self
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// Sorts by variable, merges duplicates and drops exact zeros.
    pub fn compact(&mut self) {
        if self.terms.len() < 2 {
            self.terms.retain(|t| t.1 != 0.0);
            return;
        }
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for &(v, c) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
    }

    pub fn compacted(mut self) -> Self {
        self.compact();
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }

    /// Coefficient-wise comparison after compaction.
    pub fn approx_eq(&self, other: &AffineExpr, tol: f64) -> bool {
        let d = self.clone().minus(other).compacted();
        d.constant.abs() <= tol && d.terms.iter().all(|t| t.1.abs() <= tol)
    }
}

/// Complex affine expression `re + i·im`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplexAffine {
    pub re: AffineExpr,
    pub im: AffineExpr,
}

impl ComplexAffine {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn real(re: AffineExpr) -> Self {
        Self { re, im: AffineExpr::zero() }
    }

    /// `self += z·other`.
    pub fn add_mul(&mut self, other: &ComplexAffine, z: Complex64) {
        if z.re != 0.0 {
            self.re.add_scaled(&other.re, z.re);
            self.im.add_scaled(&other.im, z.re);
        }
        if z.im != 0.0 {
            self.re.add_scaled(&other.im, -z.im);
            self.im.add_scaled(&other.re, z.im);
        }
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        let mut out = Self::zero();
        out.add_mul(self, z);
        out
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.scaled(-1.0) }
    }

    pub fn compact(&mut self) {
        self.re.compact();
        self.im.compact();
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        Complex64::new(self.re.eval(x), self.im.eval(x))
    }
}

/// Hermitian matrix whose entries are affine in the program variables.
#[derive(Debug, Clone, PartialEq)]
pub struct HermAffine {
    n: usize,
    entries: Vec<ComplexAffine>,
}

impl HermAffine {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![ComplexAffine::zero(); n * n] }
    }

    /// Builds from lower-triangle entries, mirroring conjugates above the
    /// diagonal; diagonal imaginary parts are dropped.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> ComplexAffine) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut z = f(i, j);
                z.compact();
                if i == j {
                    out.entries[i * n + i] = ComplexAffine::real(z.re);
                } else {
                    out.entries[j * n + i] = z.conj();
                    out.entries[i * n + j] = z;
                }
            }
        }
        out
    }

    /// Constant Hermitian matrix.
    pub fn constant(m: &crate::numerics::HermitianMatrix) -> Self {
        Self::from_lower(m.n(), |i, j| {
            let z = m[(i, j)];
            ComplexAffine { re: AffineExpr::constant(z.re), im: AffineExpr::constant(z.im) }
        })
    }

    /// Unchecked constructor from a full row-major entry table; see
    /// [`HermAffine::check_hermitian`].
    pub fn from_entries(n: usize, entries: Vec<ComplexAffine>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!("{} entries for side {n}", entries.len())));
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexAffine {
        &self.entries[i * self.n + j]
    }

    /// Verifies that coefficients are conjugate-symmetric to `tol`.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        for i in 0..self.n {
            let d = self.get(i, i);
            if !d.im.approx_eq(&AffineExpr::zero(), tol) {
                return Err(Error::Domain(format!("diagonal entry {i} has an imaginary part")));
            }
            for j in 0..i {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if !a.re.approx_eq(&b.re, tol) || !a.im.approx_eq(&b.im.scaled(-1.0), tol) {
                    return Err(Error::Domain(format!("entries ({i},{j}) and ({j},{i}) are not conjugate")));
                }
            }
        }
        Ok(())
    }

    /// `Σ s_k·M_k` for real weights.
    pub fn linear_combination(terms: &[(&HermAffine, f64)]) -> Self {
        let n = terms.first().map_or(0, |t| t.0.n);
        let mut out = Self::zeros(n);
        for (m, s) in terms {
            assert_eq!(m.n, n, "linear_combination: side mismatch");
            for (o, e) in out.entries.iter_mut().zip(&m.entries) {
                o.re.add_scaled(&e.re, *s);
                o.im.add_scaled(&e.im, *s);
            }
        }
        for e in out.entries.iter_mut() {
            e.compact();
        }
        out
    }

    pub fn plus_identity(&self, t: &AffineExpr) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.entries[i * self.n + i].re.add_scaled(t, 1.0);
            out.entries[i * self.n + i].re.compact();
        }
        out
    }

    /// `F^H M F` for a constant factor `F` (`n×p`).
    pub fn congruence(&self, f: &CMatrix) -> Self {
        assert_eq!(f.rows(), self.n, "congruence: factor rows must match side");
        let p = f.cols();
        if f.rows() == p && f.is_diagonal() {
            return Self::from_lower(p, |i, j| self.get(i, j).scaled(f[(i, i)].conj() * f[(j, j)]));
        }
        // Y = M F (n×p), then F^H Y
        let mut y = vec![ComplexAffine::zero(); self.n * p];
        for i in 0..self.n {
            for q in 0..p {
                let dst = &mut y[i * p + q];
                for k in 0..self.n {
                    let fk = f[(k, q)];
                    if fk.norm_sqr() != 0.0 {
                        dst.add_mul(self.get(i, k), fk);
                    }
                }
                dst.compact();
            }
        }
        Self::from_lower(p, |a, b| {
            let mut z = ComplexAffine::zero();
            for i in 0..self.n {
                let fa = f[(i, a)].conj();
                if fa.norm_sqr() != 0.0 {
                    z.add_mul(&y[i * p + b], fa);
                }
            }
            z
        })
    }

    /// `F^H M h` for constant `F` and `h`.
    pub fn congruence_vec(&self, f: &CMatrix, h: &[Complex64]) -> Vec<ComplexAffine> {
        let mh = self.mul_const_vec(h);
        (0..f.cols())
            .map(|a| {
                let mut z = ComplexAffine::zero();
                for i in 0..self.n {
                    let fa = f[(i, a)].conj();
                    if fa.norm_sqr() != 0.0 {
                        z.add_mul(&mh[i], fa);
                    }
                }
                z.compact();
                z
            })
            .collect()
    }

    /// `M h` for constant `h`.
    pub fn mul_const_vec(&self, h: &[Complex64]) -> Vec<ComplexAffine> {
        assert_eq!(h.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut z = ComplexAffine::zero();
                for (j, hj) in h.iter().enumerate() {
                    z.add_mul(self.get(i, j), *hj);
                }
                z.compact();
                z
            })
            .collect()
    }

    /// `h^H M h`, a real affine expression.
    pub fn quad_form_const(&self, h: &[Complex64]) -> AffineExpr {
        let mh = self.mul_const_vec(h);
        let mut out = AffineExpr::zero();
        for (i, hi) in h.iter().enumerate() {
            // Re(conj(h_i)·(Mh)_i)
            let z = hi.conj();
            out.add_scaled(&mh[i].re, z.re);
            out.add_scaled(&mh[i].im, -z.im);
        }
        out.compacted()
    }

    pub fn trace(&self) -> AffineExpr {
        let mut out = AffineExpr::zero();
        for i in 0..self.n {
            out.add_scaled(&self.get(i, i).re, 1.0);
        }
        out.compacted()
    }

    pub fn eval(&self, x: &[f64]) -> crate::numerics::HermitianMatrix {
        crate::numerics::HermitianMatrix::from_lower(self.n, |i, j| self.get(i, j).eval(x))
    }

    /// Real-stacked vectorization `[Re M_jk, Im M_jk]` over all `n²`
    /// entries; its Euclidean norm equals `‖M‖_F`.
    pub fn vec_real_stacked(&self) -> Vec<AffineExpr> {
        let mut out = Vec::with_capacity(2 * self.n * self.n);
        for e in &self.entries {
            out.push(e.re.clone());
            out.push(e.im.clone());
        }
        out
    }
}

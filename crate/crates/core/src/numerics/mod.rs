//! Dense complex/real linear algebra and the handful of special functions the
//! rest of the crate needs.
//!
//! Everything here is pure and allocation-light; matrices are small (a few
//! dozen rows at most) so plain row-major `Vec` storage is used throughout.

mod cmat;
mod eig;
mod special;

pub use cmat::{CMatrix, HermitianFactor, HermitianMatrix};
pub use eig::{cholesky_psd, hermitian_eig, sym_eig, EigDecomposition, SymEig};
pub use special::{chi2_cdf, chi2_inv_cdf, gamma_p, ln_gamma, solve_theta_bar};

pub use num_complex::Complex64;

/// Shorthand for building complex numbers in tables and tests.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `‖v‖²` of a complex vector.
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

//! The quadratic-form data `(Q, r, s)` of one user's SINR constraint.
//!
//! For user `i` let `X = W_i/γ_i − Σ_{k≠i} W_k`. The SINR requirement at the
//! true channel `h̄ + e` reads `(h̄ + e)^H X (h̄ + e) ≥ σ²`. Writing the error
//! in normalized coordinates turns it into `ξ^H Q ξ + 2 Re(ξ^H r) + s ≥ 0`.
//!
//! * Gaussian errors `e = F z` with `F F^H = C` and `z ~ CN(0, I)`:
//!   `Q = F^H X F`, `r = F^H X h̄`, `s = h̄^H X h̄ − σ²`.
//! * Uniform errors with half-width `ε`: `ξ = (√3/ε)[Re e; Im e]` is real,
//!   zero-mean, unit-variance and supported on `[−√3, √3]^{2N_t}`, and
//!   `Q = (ε²/3)·[[Re X, −Im X], [Im X, Re X]]`,
//!   `r = (ε/√3)·[Re X h̄; Im X h̄]`, with the same `s`.

use num_complex::Complex64;

use crate::conic::{AffineExpr, ComplexAffine, HermAffine};
use crate::error::{Error, Result};
use crate::model::{BeamformingInstance, ErrorModel};
use crate::numerics::{cholesky_psd, inner, HermitianMatrix};

/// Numeric `(Q, r, s, ρ)`. In the uniform case `Q` is real symmetric of
/// side `2N_t` (stored with zero imaginary parts) and `r` is real.
#[derive(Debug, Clone, PartialEq)]
pub struct QrsData {
    pub q: HermitianMatrix,
    pub r: Vec<Complex64>,
    pub s: f64,
    pub rho: f64,
}

impl QrsData {
    /// `ξ^H Q ξ + 2 Re(ξ^H r) + s`.
    pub fn form(&self, xi: &[Complex64]) -> f64 {
        self.q.quad_form(xi) + 2.0 * inner(xi, &self.r).re + self.s
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }
}

/// `(Q, r, s)` as affine maps of the program variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicQrs {
    pub q: HermAffine,
    pub r: Vec<ComplexAffine>,
    pub s: AffineExpr,
}

impl SymbolicQrs {
    pub fn eval(&self, x: &[f64], rho: f64) -> QrsData {
        QrsData { q: self.q.eval(x), r: self.r.iter().map(|z| z.eval(x)).collect(), s: self.s.eval(x), rho }
    }
}

fn check_user(inst: &BeamformingInstance, i: usize, k: usize) -> Result<()> {
    if i >= inst.k() {
        return Err(Error::Dimension(format!("user {i} out of range for K = {}", inst.k())));
    }
    if k != inst.k() {
        return Err(Error::Dimension(format!("{k} matrices for K = {}", inst.k())));
    }
    Ok(())
}

fn interference_numeric(inst: &BeamformingInstance, w: &[HermitianMatrix], i: usize) -> Result<HermitianMatrix> {
    check_user(inst, i, w.len())?;
    if let Some(bad) = w.iter().find(|m| m.n() != inst.n_t()) {
        return Err(Error::Dimension(format!("matrix of side {} for N_t = {}", bad.n(), inst.n_t())));
    }
    let mut x = w[i].scale(1.0 / inst.gamma(i));
    for (k, wk) in w.iter().enumerate() {
        if k != i {
            x = x.sub(wk);
        }
    }
    Ok(x)
}

/// `W_i/γ_i − Σ_{k≠i} W_k` for symbolic `W`.
pub fn interference_symbolic(inst: &BeamformingInstance, w: &[HermAffine], i: usize) -> Result<HermAffine> {
    check_user(inst, i, w.len())?;
    let mut terms: Vec<(&HermAffine, f64)> = vec![(&w[i], 1.0 / inst.gamma(i))];
    terms.extend(w.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, m)| (m, -1.0)));
    Ok(HermAffine::linear_combination(&terms))
}

fn covariance(inst: &BeamformingInstance, i: usize) -> Result<&HermitianMatrix> {
    match inst.error_model() {
        ErrorModel::Gaussian { covariances } => Ok(&covariances[i]),
        ErrorModel::Uniform { .. } => Err(Error::Invalid("method needs a Gaussian error model".into())),
    }
}

fn half_width(inst: &BeamformingInstance, i: usize) -> Result<f64> {
    match inst.error_model() {
        ErrorModel::Uniform { epsilon } => Ok(epsilon[i]),
        ErrorModel::Gaussian { .. } => Err(Error::Invalid("method needs a uniform error model".into())),
    }
}

/// Numeric data for user `i` under Gaussian errors.
pub fn eval_qrs_gaussian(inst: &BeamformingInstance, w: &[HermitianMatrix], i: usize) -> Result<QrsData> {
    let x = interference_numeric(inst, w, i)?;
    let f = cholesky_psd(covariance(inst, i)?)?;
    let h = inst.channel(i);
    let xh = x.mul_vec(h);
    Ok(QrsData {
        q: x.congruence(&f),
        r: f.adjoint_mul_vec(&xh),
        s: inner(h, &xh).re - inst.noise(i),
        rho: inst.rho(i),
    })
}

/// Numeric data for user `i` under uniform errors (real, side `2N_t`).
pub fn eval_qrs_bounded(inst: &BeamformingInstance, w: &[HermitianMatrix], i: usize) -> Result<QrsData> {
    let x = interference_numeric(inst, w, i)?;
    let eps = half_width(inst, i)?;
    let n = inst.n_t();
    let emb = x.real_embedding();
    let qs = eps * eps / 3.0;
    let q = HermitianMatrix::from_lower(2 * n, |a, b| Complex64::new(qs * emb[a * 2 * n + b], 0.0));
    let h = inst.channel(i);
    let xh = x.mul_vec(h);
    let rs = eps / 3f64.sqrt();
    let r = xh.iter().map(|z| z.re).chain(xh.iter().map(|z| z.im)).map(|v| Complex64::new(rs * v, 0.0)).collect();
    Ok(QrsData { q, r, s: inner(h, &xh).re - inst.noise(i), rho: inst.rho(i) })
}

pub fn symbolic_gaussian(inst: &BeamformingInstance, w: &[HermAffine], i: usize) -> Result<SymbolicQrs> {
    let x = interference_symbolic(inst, w, i)?;
    let f = cholesky_psd(covariance(inst, i)?)?;
    let h = inst.channel(i);
    Ok(SymbolicQrs {
        q: x.congruence(&f),
        r: x.congruence_vec(&f, h),
        s: x.quad_form_const(h).plus_constant(-inst.noise(i)),
    })
}

pub fn symbolic_bounded(inst: &BeamformingInstance, w: &[HermAffine], i: usize) -> Result<SymbolicQrs> {
    let x = interference_symbolic(inst, w, i)?;
    let eps = half_width(inst, i)?;
    let n = inst.n_t();
    let qs = eps * eps / 3.0;
    let q = HermAffine::from_lower(2 * n, |a, b| {
        let e = match (a >= n, b >= n) {
            (false, false) => x.get(a, b).re.clone(),
            (true, false) => x.get(a - n, b).im.clone(),
            (true, true) => x.get(a - n, b - n).re.clone(),
            (false, true) => unreachable!("lower triangle"),
        };
        ComplexAffine::real(e.scaled(qs))
    });
    let h = inst.channel(i);
    let xh = x.mul_const_vec(h);
    let rs = eps / 3f64.sqrt();
    let r = xh
        .iter()
        .map(|z| z.re.clone())
        .chain(xh.iter().map(|z| z.im.clone()))
        .map(|e| ComplexAffine::real(e.scaled(rs).compacted()))
        .collect();
    Ok(SymbolicQrs { q, r, s: x.quad_form_const(h).plus_constant(-inst.noise(i)) })
}

/// `s` only; `Q` and `r` are empty. Used by the perfect-CSI constraints.
pub fn symbolic_nominal(inst: &BeamformingInstance, w: &[HermAffine], i: usize) -> Result<SymbolicQrs> {
    let x = interference_symbolic(inst, w, i)?;
    Ok(SymbolicQrs {
        q: HermAffine::zeros(0),
        r: vec![],
        s: x.quad_form_const(inst.channel(i)).plus_constant(-inst.noise(i)),
    })
}

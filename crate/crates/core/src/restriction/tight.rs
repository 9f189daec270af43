//! Numeric side of the restrictions: the smallest offset `s` for which a
//! given `(Q, r)` satisfies each method's constraints with the best slacks.

use super::{coloring_sets, coloring_weight, decomp_constants, sphere_radius, MethodSelector, QrsData};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, norm_sqr, HermitianMatrix};

/// Minimal `s` such that `(Q, r, s)` passes `method` at outage level `rho`.
///
/// For the sphere method `rho` is only used when no radius override is
/// given, and `n` below is the side of `Q`.
pub fn tight_offset(method: &MethodSelector, q: &HermitianMatrix, r: &[num_complex::Complex64], rho: f64) -> Result<f64> {
    let n = q.n();
    if r.len() != n {
        return Err(Error::Dimension(format!("r has {} entries for side {n}", r.len())));
    }
    let tr = q.trace();
    let rr = norm_sqr(r);
    let fro = q.frobenius_norm();
    let eff = |o: Option<f64>| o.unwrap_or(rho);
    Ok(match *method {
        MethodSelector::NonRobust => 0.0,
        MethodSelector::SphereBounding { radius } => {
            let d = match radius {
                Some(d) => d,
                None => sphere_radius(n, rho)?,
            };
            sphere_offset(q, r, d)?
        }
        MethodSelector::Bernstein { rho } => {
            let rho = eff(rho);
            let lam_plus = (-hermitian_eig(q)?.min_value()).max(0.0);
            -tr + (-2.0 * rho.ln()).sqrt() * (fro * fro + 2.0 * rr).sqrt() - rho.ln() * lam_plus
        }
        MethodSelector::DecompGaussian { rho } => {
            let k = decomp_constants(eff(rho))?;
            -tr + k.mu * ((rr / 2.0).sqrt() + k.v * fro)
        }
        MethodSelector::DecompBounded { rho } => {
            let rho = eff(rho);
            let mu = 2.0 * (-rho.ln()).sqrt();
            let mut sum = (2.0 * rr).sqrt();
            for set in coloring_sets(n) {
                let s2: f64 = set.iter().map(|&(j, k)| (coloring_weight(j, k) * q[(j, k)].re).powi(2)).sum();
                sum += s2.sqrt();
            }
            -tr + mu * sum
        }
    })
}

/// `min_{t ≥ 0, Q + tI ⪰ 0} t d² + r^H (Q + tI)^† r`, the Schur-complement
/// form of the sphere LMI.
fn sphere_offset(q: &HermitianMatrix, r: &[num_complex::Complex64], d: f64) -> Result<f64> {
    let eig = hermitian_eig(q)?;
    let lam = &eig.values;
    let c2: Vec<f64> = (0..lam.len()).map(|k| crate::numerics::inner(&eig.vector(k), r).norm_sqr()).collect();
    let scale = 1.0 + q.frobenius_norm() + norm_sqr(r).sqrt();
    let t_lo = (-lam[0]).max(0.0);
    let value = |t: f64| {
        t * d * d
            + lam.iter().zip(&c2).map(|(l, c)| if *c > 0.0 { c / (l + t) } else { 0.0 }).sum::<f64>()
    };
    let slope = |t: f64| d * d - lam.iter().zip(&c2).map(|(l, c)| c / ((l + t) * (l + t))).sum::<f64>();
    let total: f64 = c2.iter().sum();
    if total <= 1e-300 {
        return Ok(t_lo * d * d);
    }
    if d == 0.0 {
        // the infimum is approached as t → ∞
        return Ok(if lam[0] >= 0.0 && c2.iter().zip(lam).all(|(c, l)| *c == 0.0 || *l > 0.0) { value(0.0) } else { 0.0 });
    }
    // slope is increasing on (t_lo, ∞); bracket its root
    let eps = 1e-14 * scale;
    let mut a = t_lo + eps;
    if slope(a) >= 0.0 {
        return Ok(value(a));
    }
    let mut b = t_lo + (total.sqrt() / d).max(scale);
    while slope(b) < 0.0 {
        b = t_lo + 2.0 * (b - t_lo);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if slope(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b.abs() {
            break;
        }
    }
    Ok(value(0.5 * (a + b)))
}

/// Whether numeric `(Q, r, s)` passes the method's constraints, with an
/// absolute slack `tol`.
pub fn satisfies(method: &MethodSelector, data: &QrsData, tol: f64) -> Result<bool> {
    Ok(data.s >= tight_offset(method, &data.q, &data.r, data.rho)? - tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;

    #[test]
    fn sphere_spot_cases() {
        let one = HermitianMatrix::identity(1);
        let sel = MethodSelector::SphereBounding { radius: Some(1.0) };
        // Q = 1, r = 0, s = 1, d = 1: feasible
        assert!(tight_offset(&sel, &one, &[c64(0.0, 0.0)], 0.1).unwrap() <= 1.0);
        // Q = −1, r = 0, d = 2: needs t ≥ 1 so s ≥ 4
        let neg = one.scale(-1.0);
        let sel2 = MethodSelector::SphereBounding { radius: Some(2.0) };
        let s = tight_offset(&sel2, &neg, &[c64(0.0, 0.0)], 0.1).unwrap();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_offset_is_worst_case_over_ball() {
        // scalar: min over |δ| ≤ d of qδ² + 2rδ + s with q = 1, r = 3, d = 1 is at δ = −1
        let q = HermitianMatrix::identity(1);
        let s = tight_offset(&MethodSelector::SphereBounding { radius: Some(1.0) }, &q, &[c64(3.0, 0.0)], 0.1).unwrap();
        assert!((s - 5.0).abs() < 1e-9, "{s}");
    }

    #[test]
    fn deterministic_constraint_is_free() {
        let z = HermitianMatrix::zeros(2);
        let r = [c64(0.0, 0.0); 2];
        for m in [
            MethodSelector::SphereBounding { radius: None },
            MethodSelector::Bernstein { rho: None },
            MethodSelector::DecompGaussian { rho: None },
            MethodSelector::DecompBounded { rho: None },
        ] {
            assert_eq!(tight_offset(&m, &z, &r, 0.1).unwrap(), 0.0, "{m}");
        }
    }

    #[test]
    fn bernstein_tail_value() {
        // with Q = I₂, r = 0, η = 2: tr Q − √(2η)·‖Q‖_F − η λ⁺ = 2 − 2√2
        let q = HermitianMatrix::identity(2);
        let eta: f64 = 2.0;
        let rho = (-eta).exp();
        let s = tight_offset(&MethodSelector::Bernstein { rho: None }, &q, &[c64(0.0, 0.0); 2], rho).unwrap();
        assert!((-s - (2.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((-s + 0.8284).abs() < 1e-4);
    }
}

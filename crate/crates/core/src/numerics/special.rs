use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
///
/// Series for `x < a + 1`, Lentz continued fraction for the complement
/// otherwise.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_p: shape must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    let lnpre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (sum.ln() + lnpre).exp().min(1.0)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-17 {
                break;
            }
        }
        1.0 - (lnpre + h.ln()).exp()
    }
}

/// CDF of the central chi-square distribution with `m` degrees of freedom.
pub fn chi2_cdf(m: u32, x: f64) -> f64 {
    gamma_p(m as f64 / 2.0, x / 2.0)
}

fn chi2_pdf(m: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = m as f64 / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Inverse CDF of the chi-square distribution with `m` degrees of freedom.
///
/// Safeguarded Newton inside a maintained bracket; falls back to bisection
/// whenever a Newton step leaves the bracket.
pub fn chi2_inv_cdf(m: u32, p: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("chi-square degrees of freedom must be >= 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("chi-square quantile needs p in (0,1), got {p}")));
    }
    let mut lo = 0.0;
    let mut hi = (m as f64).max(1.0);
    while chi2_cdf(m, hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    // Wilson-Hilferty start, clamped into the bracket
    let mut x = {
        let k = m as f64;
        let z = normal_quantile_approx(p);
        let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
        (k * t * t * t).clamp(lo, hi)
    };
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = chi2_cdf(m, x) - p;
        if f.abs() <= 1e-14 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = chi2_pdf(m, x);
        let newton = if d > 0.0 { x - f / d } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Acklam-style rational approximation; only used as a starting point.
fn normal_quantile_approx(p: f64) -> f64 {
    let t = if p < 0.5 { (-2.0 * p.ln()).sqrt() } else { (-2.0 * (1.0 - p).ln()).sqrt() };
    let num = 2.515_517 + 0.802_853 * t + 0.010_328 * t * t;
    let den = 1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t;
    let z = t - num / den;
    if p < 0.5 {
        -z
    } else {
        z
    }
}

/// Root `θ̄ ∈ (0,1)` of `θ̄ + ln(1 − θ̄) = ln ρ`.
///
/// Bisection runs on `q = 1 − θ̄` so that the tiny `q` needed for small `ρ`
/// keeps full relative precision.
pub fn solve_theta_bar(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("theta-bar needs rho in (0,1), got {rho}")));
    }
    let target = rho.ln();
    // g(q) = 1 - q + ln q - ln ρ is increasing on (0,1), g(1) = -ln ρ > 0
    let g = |q: f64| 1.0 - q + q.ln() - target;
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = 1.0;
    while g(lo) > 0.0 {
        lo *= 0.5;
        if lo == 0.0 {
            return Err(Error::Domain(format!("rho {rho} too small for theta-bar root")));
        }
    }
    for _ in 0..2000 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(1.0 - 0.5 * (lo + hi))
}

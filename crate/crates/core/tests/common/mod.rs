#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rarbf::numerics::{c64, Complex64, HermitianMatrix};
use rarbf::restriction::tight::tight_offset;
use rarbf::restriction::{MethodSelector, QrsData};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    c64(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> HermitianMatrix {
    HermitianMatrix::from_lower(n, |i, j| {
        if i == j {
            c64(scale * rng.sample::<f64, _>(StandardNormal), 0.0)
        } else {
            cn(rng) * scale
        }
    })
}

pub fn random_real_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> HermitianMatrix {
    HermitianMatrix::from_lower(n, |_, _| c64(scale * rng.sample::<f64, _>(StandardNormal), 0.0))
}

pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> HermitianMatrix {
    let mut m = HermitianMatrix::zeros(n);
    for _ in 0..rank {
        let v: Vec<Complex64> = (0..n).map(|_| cn(rng)).collect();
        m = m.add(&HermitianMatrix::outer(&v));
    }
    m
}

/// `∫_0^x` of the chi-square density with an even number of degrees of
/// freedom, by composite Simpson on a fine grid.
pub fn chi2_cdf_quadrature(m: u32, x: f64) -> f64 {
    assert!(m % 2 == 0 && m >= 2);
    let half = m / 2;
    let gamma_half: f64 = (1..half).map(|j| j as f64).product();
    let norm = 2f64.powi(half as i32) * gamma_half;
    let density = |t: f64| t.powi(half as i32 - 1) * (-t / 2.0).exp() / norm;
    let steps = 20_000;
    let h = x / steps as f64;
    let mut acc = density(0.0) + density(x);
    for j in 1..steps {
        acc += density(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Quantile of the quadrature CDF by plain bisection.
pub fn chi2_quantile_quadrature(m: u32, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 200.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf_quadrature(m, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fraction of `N` draws with `ξ^H Q ξ + 2 Re(ξ^H r) + s < 0`.
pub fn violation_rate(d: &QrsData, bounded: bool, n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let k = d.n();
    let mut xi = vec![c64(0.0, 0.0); k];
    let mut bad = 0usize;
    for _ in 0..n {
        for z in xi.iter_mut() {
            *z = if bounded { c64(r.random_range(-3f64.sqrt()..=3f64.sqrt()), 0.0) } else { cn(&mut r) };
        }
        if d.form(&xi) < 0.0 {
            bad += 1;
        }
    }
    bad as f64 / n as f64
}

pub fn tight_triple(m: &MethodSelector, seed: u64, rho: f64) -> (QrsData, bool) {
    let mut r = rng(seed);
    let bounded = matches!(m, MethodSelector::DecompBounded { .. });
    let n = if bounded { 6 } else { 3 };
    let scale = [0.05, 0.3, 1.0][seed as usize % 3];
    let shift = r.random_range(-1.0..1.0) * scale;
    let q = if bounded { random_real_symmetric(&mut r, n, scale) } else { random_hermitian(&mut r, n, scale) }
        .add(&HermitianMatrix::identity(n).scale(shift));
    let rs = r.random_range(0.0..2.0);
    let rv: Vec<Complex64> = (0..n)
        .map(|_| if bounded { c64(rs * r.sample::<f64, _>(StandardNormal), 0.0) } else { cn(&mut r) * rs })
        .collect();
    let s = tight_offset(m, &q, &rv, rho).unwrap();
    (QrsData { q, r: rv, s, rho }, bounded)
}

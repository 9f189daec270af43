//! Euclidean projections onto the supported cones and their duals.

use super::embed::{smat, svec};
use super::{ConeBlock, ConeSpec};
use crate::numerics::sym_eig;

/// Projects `v` onto the second-order cone `{(t, x) : ‖x‖ ≤ t}` in place.
pub fn project_soc(v: &mut [f64]) {
    let t = v[0];
    let nx = v[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx <= t {
        return;
    }
    if nx <= -t {
        v.iter_mut().for_each(|a| *a = 0.0);
        return;
    }
    let alpha = 0.5 * (t + nx);
    v[0] = alpha;
    let f = alpha / nx;
    v[1..].iter_mut().for_each(|a| *a *= f);
}

/// Projects a scaled-triangular vector of side `n` onto the PSD cone.
pub fn project_psd(v: &mut [f64], n: usize) {
    if n == 1 {
        v[0] = v[0].max(0.0);
        return;
    }
    let a = smat(v, n);
    let eig = sym_eig(&a, n);
    if eig.values[0] >= 0.0 {
        return;
    }
    let mut out = vec![0.0; n * n];
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let u = eig.vector(k);
        for i in 0..n {
            let ui = lam * u[i];
            for j in 0..=i {
                out[i * n + j] += ui * u[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            out[j * n + i] = out[i * n + j];
        }
    }
    v.copy_from_slice(&svec(&out, n));
}

/// Projects onto the cone `K`.
pub fn project_primal(cone: &ConeSpec, v: &mut [f64]) {
    project(cone, v, false);
}

/// Projects onto the dual cone `K*` (zero blocks become free).
pub fn project_dual(cone: &ConeSpec, v: &mut [f64]) {
    project(cone, v, true);
}

fn project(cone: &ConeSpec, v: &mut [f64], dual: bool) {
    for (block, off) in cone.offsets() {
        let seg = &mut v[off..off + block.dim()];
        match block {
            ConeBlock::Zero(_) => {
                if !dual {
                    seg.iter_mut().for_each(|a| *a = 0.0);
                }
            }
            ConeBlock::Nonneg(_) => seg.iter_mut().for_each(|a| *a = a.max(0.0)),
            ConeBlock::SecondOrder(_) => project_soc(seg),
            ConeBlock::PsdReal(n) => project_psd(seg, n),
        }
    }
}

/// Euclidean distance from `v` to `K` (or `K*`).
pub fn distance(cone: &ConeSpec, v: &[f64], dual: bool) -> f64 {
    let mut p = v.to_vec();
    project(cone, &mut p, dual);
    p.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soc_cases() {
        let mut inside = [5.0, 3.0, 4.0];
        project_soc(&mut inside);
        assert_eq!(inside, [5.0, 3.0, 4.0]);
        let mut polar = [-5.0, 3.0, 4.0];
        project_soc(&mut polar);
        assert_eq!(polar, [0.0, 0.0, 0.0]);
        let mut mid = [0.0, 3.0, 4.0];
        project_soc(&mut mid);
        assert!((mid[0] - 2.5).abs() < 1e-15 && (mid[1] - 1.5).abs() < 1e-15 && (mid[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn psd_clips_negative_part() {
        // [[1, 2], [2, 1]] has eigenvalues 3 and −1; the projection is 1.5·[[1,1],[1,1]]
        let mut v = svec(&[1.0, 2.0, 2.0, 1.0], 2);
        project_psd(&mut v, 2);
        let a = smat(&v, 2);
        for x in a {
            assert!((x - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent_and_moreau() {
        let cone = ConeSpec { blocks: vec![ConeBlock::Zero(1), ConeBlock::Nonneg(2), ConeBlock::SecondOrder(3), ConeBlock::PsdReal(3)] };
        let z: Vec<f64> = (0..cone.dim()).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let mut p = z.clone();
        project_primal(&cone, &mut p);
        let mut pp = p.clone();
        project_primal(&cone, &mut pp);
        assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-12));
        // z = Π_K(z) − Π_{K*}(−z)
        let mut q: Vec<f64> = z.iter().map(|a| -a).collect();
        project_dual(&cone, &mut q);
        for i in 0..z.len() {
            assert!((z[i] - (p[i] - q[i])).abs() < 1e-12, "coordinate {i}");
        }
        let dot: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }
}

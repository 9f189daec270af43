//! Scaled lower-triangular storage and the complex-to-real PSD embedding.

use std::f64::consts::SQRT_2;

use super::affine::{AffineExpr, HermAffine};
use crate::error::Result;

/// Number of stored entries for a symmetric block of side `n`.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)`, `i ≥ j`, in column-wise lower-triangular order.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < n);
    j * n - j * j.saturating_sub(1) / 2 + (i - j)
}

/// Packs a dense row-major symmetric matrix.
pub fn svec(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        for i in j..n {
            let v = a[i * n + j];
            out.push(if i == j { v } else { v * SQRT_2 });
        }
    }
    out
}

/// Unpacks into a dense row-major symmetric matrix.
pub fn smat(v: &[f64], n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            let x = if i == j { v[k] } else { v[k] / SQRT_2 };
            a[i * n + j] = x;
            a[j * n + i] = x;
            k += 1;
        }
    }
    a
}

/// Scaled-triangular entries of `[[Re M, −Im M], [Im M, Re M]]` for an
/// affine Hermitian `M` of side `n`. The real block has side `2n` and every
/// eigenvalue of `M` appears twice in it, so it is PSD iff `M` is.
pub fn embed_hermitian_psd(m: &HermAffine) -> Result<Vec<AffineExpr>> {
    m.check_hermitian(1e-12)?;
    let n = m.n();
    let side = 2 * n;
    let mut out = Vec::with_capacity(svec_len(side));
    for b in 0..side {
        for a in b..side {
            let e = match (a >= n, b >= n) {
                (false, false) => m.get(a, b).re.clone(),
                (true, false) => m.get(a - n, b).im.clone(),
                (true, true) => m.get(a - n, b - n).re.clone(),
                (false, true) => unreachable!("a ≥ b"),
            };
            out.push(if a == b { e } else { e.scaled(SQRT_2) }.compacted());
        }
    }
    Ok(out)
}

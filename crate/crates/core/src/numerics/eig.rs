use num_complex::Complex64;

use super::cmat::{CMatrix, HermitianFactor, HermitianMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub n: usize,
    /// Ascending.
    pub values: Vec<f64>,
    /// Row-major `n×n`; column `k` is the eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
}

impl SymEig {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Eigen-decomposition of a dense real symmetric matrix (row-major) by
/// Householder tridiagonalization followed by implicit QL.
///
/// Only the symmetric part of `a` is used.
pub fn sym_eig(a: &[f64], n: usize) -> SymEig {
    assert_eq!(a.len(), n * n, "sym_eig: expected {n}x{n} input");
    let mut v: Vec<f64> = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n > 0 {
        tridiagonalize(&mut v, &mut d, &mut e, n);
        if !tridiagonal_ql(&mut v, &mut d, &mut e, n) {
            // QL did not settle; fall back to Jacobi on the original matrix
            let mut m: Vec<f64> = (0..n * n).map(|k| 0.5 * (a[k] + a[(k % n) * n + k / n])).collect();
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                w[i * n + i] = 1.0;
            }
            jacobi_in_place(&mut m, &mut w, n);
            return sort_pairs((0..n).map(|k| m[k * n + k]).collect(), &w, n);
        }
    }
    sort_pairs(d, &v, n)
}

/// Reduces symmetric `v` to tridiagonal form in place; on return `v` holds
/// the accumulated orthogonal transform, `d` the diagonal and `e[1..]` the
/// subdiagonal.
fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal `(d, e)`, rotating the columns
/// of `v`. Returns `false` if an eigenvalue fails to converge.
fn tridiagonal_ql(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> bool {
    const MAX_ITER: usize = 60;
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        let m = m.min(n - 1);
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER {
                    return false;
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[at(k, i + 1)];
                        let vk = v[at(k, i)];
                        v[at(k, i + 1)] = s * vk + c * vk1;
                        v[at(k, i)] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    true
}

/// Runs Jacobi sweeps on `m`, accumulating rotations into the columns of `v`.
fn jacobi_in_place(m: &mut [f64], v: &mut [f64], n: usize) {
    let total: f64 = m.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return;
    }
    let target = (f64::EPSILON * f64::EPSILON) * total;
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off <= target {
            return;
        }
        // early sweeps skip rotations that cannot matter yet
        let thresh = if sweep < 3 { 0.2 * off.sqrt() / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
}

fn sort_pairs(d: Vec<f64>, v: &[f64], n: usize) -> SymEig {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + dst] = v[i * n + src];
        }
    }
    SymEig { n, values, vectors }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `k` pairs with `values[k]`.
    pub vectors: CMatrix,
}

impl EigDecomposition {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.n()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V·diag(f(λ))·V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.n();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        HermitianMatrix::from_lower(n, |i, j| {
            (0..n).map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * fl[k]).sum()
        })
    }
}

/// Hermitian eigen-decomposition via the real symmetric solver on the `2n×2n`
/// embedding.
///
/// Each real eigenvector `(x; y)` of the embedding is a complex eigenvector
/// `x + iy` of `M`; eigenvalues come in pairs, so `n` complex-orthonormal
/// vectors are picked from each cluster greedily by largest residual.
pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigDecomposition> {
    let n = m.n();
    if n == 0 {
        return Ok(EigDecomposition { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let emb = m.real_embedding();
    let se = sym_eig(&emb, 2 * n);
    let cands: Vec<Vec<Complex64>> = (0..2 * n)
        .map(|k| (0..n).map(|i| Complex64::new(se.vectors[i * 2 * n + k], se.vectors[(n + i) * 2 * n + k])).collect())
        .collect();

    let scale = se.values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let gap_tol = 1e-9 * scale;

    let mut accepted: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n);
    let mut start = 0;
    while start < 2 * n && accepted.len() < n {
        let mut end = start + 1;
        while end < 2 * n && (se.values[end] - se.values[end - 1]).abs() <= gap_tol {
            end += 1;
        }
        if (end - start) % 2 == 1 && end < 2 * n {
            end += 1;
        }
        let want = ((end - start) / 2).max(1).min(n - accepted.len());
        let mut used = vec![false; end - start];
        for _ in 0..want {
            let mut best: Option<(usize, f64, Vec<Complex64>)> = None;
            for (off, cand) in cands[start..end].iter().enumerate() {
                if used[off] {
                    continue;
                }
                let mut r = cand.clone();
                for (_, a) in &accepted {
                    let proj: Complex64 = a.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
                    for (ri, ai) in r.iter_mut().zip(a) {
                        *ri -= proj * ai;
                    }
                }
                let nr = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if best.as_ref().map_or(true, |b| nr > b.1) {
                    best = Some((off, nr, r));
                }
            }
            let (off, nr, mut r) = best.expect("cluster has candidates");
            used[off] = true;
            if nr < 1e-8 {
                continue;
            }
            for z in r.iter_mut() {
                *z /= nr;
            }
            accepted.push((se.values[start + off], r));
        }
        start = end;
    }
    // Degenerate fallback: complete the basis with Gram-Schmidt on the
    // standard basis, Rayleigh quotient as the eigenvalue.
    let mut e = 0;
    while accepted.len() < n && e < n {
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        r[e] = Complex64::new(1.0, 0.0);
        for (_, a) in &accepted {
            let proj: Complex64 = a.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
            for (ri, ai) in r.iter_mut().zip(a) {
                *ri -= proj * ai;
            }
        }
        let nr = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nr > 1e-6 {
            for z in r.iter_mut() {
                *z /= nr;
            }
            let lam = m.quad_form(&r);
            accepted.push((lam, r));
        }
        e += 1;
    }
    accepted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = accepted.iter().map(|(l, _)| *l).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| accepted[k].1[i]);
    Ok(EigDecomposition { values, vectors })
}

/// Returns `F` with `F·F^H = M` for PSD `M`.
///
/// Positive definite input gets the lower-triangular Cholesky factor;
/// singular input falls back to `V·diag(√max(λ,0))`. Eigenvalues below
/// `-1e-10·‖M‖_F` are rejected as indefinite.
pub fn cholesky_psd(m: &HermitianMatrix) -> Result<HermitianFactor> {
    let n = m.n();
    let fro = m.frobenius_norm();
    if let Some(l) = try_cholesky(m) {
        return Ok(l);
    }
    let eig = hermitian_eig(m)?;
    if eig.min_value() < -1e-10 * fro {
        return Err(Error::Domain(format!(
            "matrix is indefinite: smallest eigenvalue {:e} below -1e-10*|M|_F",
            eig.min_value()
        )));
    }
    Ok(CMatrix::from_fn(n, n, |i, k| eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt()))
}

fn try_cholesky(m: &HermitianMatrix) -> Option<CMatrix> {
    let n = m.n();
    let dmax = (0..n).map(|i| m[(i, i)].re).fold(0.0f64, f64::max);
    if dmax <= 0.0 {
        return None;
    }
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 1e-12 * dmax {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;

    fn residual(m: &HermitianMatrix, e: &EigDecomposition) -> f64 {
        m.sub(&e.reconstruct_with(|l| l)).frobenius_norm()
    }

    fn jacobi_reference(a: &[f64], n: usize) -> Vec<f64> {
        let mut m = a.to_vec();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        jacobi_in_place(&mut m, &mut w, n);
        sort_pairs((0..n).map(|k| m[k * n + k]).collect(), &w, n).values
    }

    #[test]
    fn ql_matches_jacobi_and_reconstructs() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for n in [1usize, 2, 3, 5, 8, 13, 18] {
            for kind in 0..3 {
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..=i {
                        let x = match kind {
                            0 => next(),
                            // rank one: repeated zero eigenvalue
                            1 => 0.0,
                            _ => if i == j { (i % 2) as f64 } else { 0.0 },
                        };
                        a[i * n + j] = x;
                        a[j * n + i] = x;
                    }
                }
                if kind == 1 {
                    let u: Vec<f64> = (0..n).map(|_| next()).collect();
                    for i in 0..n {
                        for j in 0..n {
                            a[i * n + j] = u[i] * u[j];
                        }
                    }
                }
                let e = sym_eig(&a, n);
                let r = jacobi_reference(&a, n);
                for (x, y) in e.values.iter().zip(&r) {
                    assert!((x - y).abs() < 1e-12, "n {n} kind {kind}: {x} vs {y}");
                }
                for i in 0..n {
                    for j in 0..n {
                        let rec: f64 = (0..n).map(|k| e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k]).sum();
                        assert!((rec - a[i * n + j]).abs() < 1e-12);
                        let dot: f64 = (0..n).map(|k| e.vectors[k * n + i] * e.vectors[k * n + j]).sum();
                        assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                    }
                }
            }
        }
        assert!(sym_eig(&[], 0).values.is_empty());
    }

    #[test]
    fn identity_eigenvalues() {
        let e = hermitian_eig(&HermitianMatrix::identity(3)).unwrap();
        for v in &e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_case_sorted_with_permuted_basis() {
        let m = HermitianMatrix::from_real_diag(&[2.0, -1.0]);
        let e = hermitian_eig(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_matrix() {
        let m = HermitianMatrix::from_lower(2, |i, j| if i == j { c64(0.0, 0.0) } else { c64(1.0, 0.0) });
        let e = hermitian_eig(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&m, &e) < 1e-13);
    }

    #[test]
    fn degenerate_complex_cluster() {
        // eigenvalue 1 with multiplicity 2 plus 3
        let u = CMatrix::from_fn(3, 3, |i, j| {
            let t = (i * 3 + j) as f64;
            c64((t * 0.7).cos(), (t * 1.3).sin())
        });
        let (q, _) = qr_unitary(&u);
        let d = HermitianMatrix::from_real_diag(&[1.0, 1.0, 3.0]);
        let m = d.congruence(&q.adjoint());
        let e = hermitian_eig(&m).unwrap();
        assert!(residual(&m, &e) < 1e-12);
        let g = e.vectors.adjoint().matmul(&e.vectors);
        assert!(g.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-12);
    }

    pub(crate) fn qr_unitary(a: &CMatrix) -> (CMatrix, ()) {
        let n = a.rows();
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for j in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|i| a[(i, j)]).collect();
            for c in &cols {
                let p: Complex64 = c.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
            let nr = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols.push(v.into_iter().map(|z| z / nr).collect());
        }
        (CMatrix::from_fn(n, n, |i, j| cols[j][i]), ())
    }

    #[test]
    fn cholesky_examples() {
        let f = cholesky_psd(&HermitianMatrix::identity(3)).unwrap();
        assert!(f.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-15);
        let f = cholesky_psd(&HermitianMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!((f[(0, 0)].re - 2.0).abs() < 1e-15 && (f[(1, 1)].re - 3.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = [c64(s, 0.0), c64(s, 0.0)];
        let m = HermitianMatrix::outer(&a);
        let f = cholesky_psd(&m).unwrap();
        let back = f.matmul(&f.adjoint());
        assert!(back.sub(m.as_cmatrix()).frobenius_norm() < 1e-9);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = HermitianMatrix::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(cholesky_psd(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn cholesky_zero_matrix() {
        let f = cholesky_psd(&HermitianMatrix::zeros(3)).unwrap();
        assert_eq!(f.frobenius_norm(), 0.0);
    }
}

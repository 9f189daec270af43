//! Douglas–Rachford splitting on the homogeneous self-dual embedding.
//!
//! With `u = (x, y, τ)`, `v = (0, s, κ)` and
//!
//! ```text
//!     ⎡  0   Aᵀ  c ⎤
//! M = ⎢ −A   0   b ⎥
//!     ⎣ −cᵀ −bᵀ  0 ⎦
//! ```
//!
//! the embedding asks for `v = M u`, `u ∈ C = ℝⁿ × K* × ℝ₊`, `v ∈ C*`. Each
//! iteration solves one linear system with `R + M` (factored once per scale
//! value) and projects onto `C`. Data is Ruiz-equilibrated first; all
//! termination tests are made on the unscaled problem.

use super::cones::project_dual;
use super::embed::{svec_index, svec_len};
use super::{residuals, ConeBlock, ConicBackend, ConicProgram, ConicSolution, Residuals, SolveStatus, SolverOptions, SparseMatrix};
use crate::error::{Error, Result};

const RX: f64 = 1e-6;
const RTAU: f64 = 10.0;
const ZERO_CONE_FACTOR: f64 = 1000.0;
const CHECK_EVERY: usize = 10;
/// Iterations without halving the worst residual before the scale is switched.
const STALL_WINDOW: usize = 2000;
/// Multiples of the initial scale tried in turn when progress stalls.
const SCALE_LADDER: [f64; 4] = [0.1, 10.0, 0.01, 100.0];
const SCALE_CLAMP: (f64, f64) = (1e-6, 1e6);
const EQUIL_CLAMP: (f64, f64) = (1e-4, 1e4);
const AA_MEMORY: usize = 10;
const AA_SAFEGUARD: f64 = 1.0;
const AA_REG: f64 = 1e-10;

/// Reference backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdmmBackend;

impl ConicBackend for AdmmBackend {
    fn solve(&self, p: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution> {
        p.validate()?;
        if !(opts.tol > 0.0) || !(opts.infeasibility_tol > 0.0) {
            return Err(Error::Invalid("solver tolerances must be positive".into()));
        }
        if !(opts.alpha > 0.0 && opts.alpha < 2.0) {
            return Err(Error::Invalid(format!("relaxation {} outside (0, 2)", opts.alpha)));
        }
        if opts.max_iters == 0 || !(opts.scale > 0.0) {
            return Err(Error::Invalid("max_iters and scale must be positive".into()));
        }
        if p.num_vars() == 0 {
            return Ok(trivial(p));
        }
        Ok(Workspace::new(p, opts).run())
    }
}

/// Program without variables: feasible iff `b ∈ K`.
fn trivial(p: &ConicProgram) -> ConicSolution {
    let m = p.num_rows();
    let mut s = p.b.clone();
    super::cones::project_primal(&p.cone, &mut s);
    let feasible = s.iter().zip(&p.b).all(|(a, b)| (a - b).abs() <= 1e-12);
    let y = vec![0.0; m];
    let status = if feasible { SolveStatus::Optimal } else { SolveStatus::PrimalInfeasible };
    let residuals = residuals(p, &[], &p.b, &y);
    ConicSolution {
        status,
        x: vec![],
        y,
        s: p.b.clone(),
        objective: 0.0,
        residuals,
        iterations: 0,
        certificate_residual: None,
        message: None,
    }
}

struct Scaling {
    /// Row scaling `D`.
    d: Vec<f64>,
    /// Column scaling `E`.
    e: Vec<f64>,
    /// `b̃ = β D b`.
    beta: f64,
    /// `c̃ = γ E c`.
    gamma: f64,
}

impl Scaling {
    fn unscale_x(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().zip(&self.e).map(|(x, e)| x * e / self.beta).collect()
    }

    fn unscale_y(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().zip(&self.d).map(|(y, d)| y * d / self.gamma).collect()
    }

    fn unscale_s(&self, ss: &[f64]) -> Vec<f64> {
        ss.iter().zip(&self.d).map(|(s, d)| s / d / self.beta).collect()
    }
}

fn ruiz(p: &ConicProgram, passes: usize) -> (SparseMatrix, Scaling) {
    let (m, n) = (p.num_rows(), p.num_vars());
    let mut a = p.a.clone();
    let mut d = vec![1.0; m];
    let mut e = vec![1.0; n];
    let clamp = |x: f64| x.clamp(EQUIL_CLAMP.0, EQUIL_CLAMP.1);
    let clamp_half = |x: f64| x.clamp(EQUIL_CLAMP.0.sqrt(), EQUIL_CLAMP.1.sqrt());
    // PSD blocks are scaled by a congruence diag(c)·M·diag(c), which keeps
    // the cone; entry (i, j) gets the row factor c_i·c_j
    let mut psd: Vec<(usize, usize, Vec<f64>)> = p
        .cone
        .offsets()
        .filter_map(|(block, off)| match block {
            ConeBlock::PsdReal(side) => Some((off, side, vec![1.0; side])),
            _ => None,
        })
        .collect();
    let mut in_psd = vec![false; m];
    for (off, side, _) in &psd {
        in_psd[*off..*off + svec_len(*side)].iter_mut().for_each(|x| *x = true);
    }
    for _ in 0..passes {
        let mut rmax = vec![0.0f64; m];
        let mut cmax = vec![0.0f64; n];
        for (i, j, v) in a.triplets() {
            rmax[i] = rmax[i].max(v.abs());
            cmax[j] = cmax[j].max(v.abs());
        }
        for (block, off) in p.cone.offsets() {
            if matches!(block, ConeBlock::SecondOrder(_)) {
                let seg = &mut rmax[off..off + block.dim()];
                let mx = seg.iter().fold(0.0f64, |a, b| a.max(*b));
                seg.iter_mut().for_each(|r| *r = mx);
            }
        }
        let mut dr = vec![1.0; m];
        let mut dc = vec![1.0; n];
        let mut done = true;
        for i in 0..m {
            if rmax[i] > 0.0 && !in_psd[i] {
                let f = clamp(d[i] / rmax[i].sqrt()) / d[i];
                dr[i] = f;
                done &= (f - 1.0).abs() < 1e-3;
            }
        }
        for (off, side, c) in psd.iter_mut() {
            let (off, side) = (*off, *side);
            let row = |i: usize, j: usize| off + svec_index(side, i.max(j), i.min(j));
            let f: Vec<f64> = (0..side)
                .map(|i| {
                    let g = (0..side).map(|j| rmax[row(i, j)]).fold(0.0f64, f64::max);
                    if g > 0.0 {
                        clamp_half(c[i] / g.powf(0.25)) / c[i]
                    } else {
                        1.0
                    }
                })
                .collect();
            for j in 0..side {
                for i in j..side {
                    dr[row(i, j)] = f[i] * f[j];
                }
            }
            for (ci, fi) in c.iter_mut().zip(&f) {
                *ci *= fi;
                done &= (fi - 1.0).abs() < 1e-3;
            }
        }
        for j in 0..n {
            if cmax[j] > 0.0 {
                let f = clamp(e[j] / cmax[j].sqrt()) / e[j];
                dc[j] = f;
                done &= (f - 1.0).abs() < 1e-3;
            }
        }
        a.scale_in_place(&dr, &dc);
        d.iter_mut().zip(&dr).for_each(|(x, f)| *x *= f);
        e.iter_mut().zip(&dc).for_each(|(x, f)| *x *= f);
        if done {
            break;
        }
    }
    let norm_of = |v: Vec<f64>| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let nb = norm_of(p.b.iter().zip(&d).map(|(b, d)| b * d).collect());
    let nc = norm_of(p.c.iter().zip(&e).map(|(c, e)| c * e).collect());
    let inv = |x: f64| if x > 0.0 { (1.0 / x).clamp(1e-6, 1e6) } else { 1.0 };
    (a, Scaling { d, e, beta: inv(nb), gamma: inv(nc) })
}

/// Dense lower Cholesky factor, row-major.
struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                diag -= a[j * n + k] * a[j * n + k];
            }
            if !(diag > 0.0) {
                return None;
            }
            let ljj = diag.sqrt();
            a[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                let (ri, rj) = (&a[i * n..i * n + j], &a[j * n..j * n + j]);
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                a[i * n + j] = s / ljj;
            }
        }
        Some(Self { n, l: a })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let xi = x[i] / self.l[i * n + i];
            x[i] = xi;
            for k in 0..i {
                x[k] -= self.l[i * n + k] * xi;
            }
        }
    }
}

/// Type-II Anderson acceleration of the fixed-point map `w ↦ w + f(w)`.
struct Anderson {
    mem: usize,
    dw: std::collections::VecDeque<Vec<f64>>,
    df: std::collections::VecDeque<Vec<f64>>,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    len: usize,
}

impl Anderson {
    fn new(mem: usize, len: usize) -> Self {
        Self { mem, dw: Default::default(), df: Default::default(), prev: None, len }
    }

    fn reset(&mut self) {
        self.dw.clear();
        self.df.clear();
        self.prev = None;
    }

    /// Records `(w, f)` and returns the extrapolated next iterate.
    fn step(&mut self, w: &[f64], f: &[f64], plain: &[f64]) -> Option<Vec<f64>> {
        if self.mem == 0 {
            return None;
        }
        if let Some((pw, pf)) = self.prev.take() {
            self.dw.push_back(w.iter().zip(&pw).map(|(a, b)| a - b).collect());
            self.df.push_back(f.iter().zip(&pf).map(|(a, b)| a - b).collect());
            if self.dw.len() > self.mem {
                self.dw.pop_front();
                self.df.pop_front();
            }
        }
        self.prev = Some((w.to_vec(), f.to_vec()));
        let k = self.df.len();
        if k == 0 {
            return None;
        }
        // normal equations (ΔFᵀΔF + λI) γ = ΔFᵀ f
        let mut g = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        let mut trace = 0.0;
        for i in 0..k {
            for j in 0..=i {
                let d: f64 = self.df[i].iter().zip(&self.df[j]).map(|(a, b)| a * b).sum();
                g[i * k + j] = d;
                g[j * k + i] = d;
            }
            trace += g[i * k + i];
            rhs[i] = self.df[i].iter().zip(f).map(|(a, b)| a * b).sum();
        }
        let reg = AA_REG * trace.max(f64::MIN_POSITIVE);
        for i in 0..k {
            g[i * k + i] += reg;
        }
        let ch = DenseCholesky::factor(g, k)?;
        ch.solve_in_place(&mut rhs);
        let mut out = plain.to_vec();
        for (j, gam) in rhs.iter().enumerate() {
            for t in 0..self.len {
                out[t] -= gam * (self.dw[j][t] + self.df[j][t]);
            }
        }
        Some(out)
    }
}

struct Workspace<'a> {
    p: &'a ConicProgram,
    opts: &'a SolverOptions,
    a: SparseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    sc: Scaling,
    zero_rows: Vec<bool>,
    /// `Ãᵀ Ã` restricted to non-zero-cone rows, and to zero-cone rows.
    gram_cone: Vec<f64>,
    gram_zero: Vec<f64>,
    scale: f64,
    ry: Vec<f64>,
    chol: DenseCholesky,
    /// `K⁻¹ h` with `h = (c̃, b̃)`.
    g: Vec<f64>,
    hg: f64,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a ConicProgram, opts: &'a SolverOptions) -> Self {
        let (a, sc) = ruiz(p, opts.equilibration_passes);
        let b: Vec<f64> = p.b.iter().zip(&sc.d).map(|(b, d)| sc.beta * d * b).collect();
        let c: Vec<f64> = p.c.iter().zip(&sc.e).map(|(c, e)| sc.gamma * e * c).collect();
        let (m, n) = (p.num_rows(), p.num_vars());
        let mut zero_rows = vec![false; m];
        for (block, off) in p.cone.offsets() {
            if let ConeBlock::Zero(d) = block {
                zero_rows[off..off + d].iter_mut().for_each(|z| *z = true);
            }
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (i, j, v) in a.triplets() {
            rows[i].push((j, v));
        }
        let mut gram_cone = vec![0.0; n * n];
        let mut gram_zero = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            let gm = if zero_rows[i] { &mut gram_zero } else { &mut gram_cone };
            for &(j, vj) in row {
                for &(k, vk) in row {
                    if k <= j {
                        gm[j * n + k] += vj * vk;
                    }
                }
            }
        }
        let mut ws = Self {
            p,
            opts,
            a,
            b,
            c,
            sc,
            zero_rows,
            gram_cone,
            gram_zero,
            scale: opts.scale,
            ry: vec![],
            chol: DenseCholesky { n: 0, l: vec![] },
            g: vec![],
            hg: 0.0,
        };
        ws.refactor();
        ws
    }

    fn refactor(&mut self) {
        let n = self.p.num_vars();
        let s = self.scale;
        self.ry = self.zero_rows.iter().map(|&z| if z { 1.0 / (ZERO_CONE_FACTOR * s) } else { 1.0 / s }).collect();
        let mut k = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                let v = s * self.gram_cone[j * n + i] + ZERO_CONE_FACTOR * s * self.gram_zero[j * n + i];
                k[j * n + i] = v;
                k[i * n + j] = v;
            }
            k[j * n + j] += RX;
        }
        // R_x > 0 keeps this positive definite; fall back to a heavier
        // diagonal only if rounding destroys it
        let mut shift = 0.0;
        self.chol = loop {
            let mut kk = k.clone();
            for j in 0..n {
                kk[j * n + j] += shift;
            }
            if let Some(ch) = DenseCholesky::factor(kk, n) {
                break ch;
            }
            shift = if shift == 0.0 { 1e-10 } else { shift * 100.0 };
        };
        let mut h = self.c.clone();
        h.extend_from_slice(&self.b);
        let g = self.solve_k(&h);
        self.hg = h.iter().zip(&g).map(|(a, b)| a * b).sum();
        self.g = g;
    }

    /// Solves `[[R_x, Ãᵀ], [−Ã, R_y]] (x, y) = (r_x, r_y)`.
    fn solve_k(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.p.num_vars();
        let (rx, ry) = rhs.split_at(n);
        let t: Vec<f64> = ry.iter().zip(&self.ry).map(|(d, r)| d / r).collect();
        let mut x = rx.to_vec();
        let at = self.a.mul_t(&t);
        x.iter_mut().zip(&at).for_each(|(a, b)| *a -= b);
        self.chol.solve_in_place(&mut x);
        let mut y = ry.to_vec();
        self.a.mul_add(&x, &mut y);
        y.iter_mut().zip(&self.ry).for_each(|(a, r)| *a /= r);
        x.extend(y);
        x
    }

    fn r_diag(&self, k: usize) -> f64 {
        let n = self.p.num_vars();
        let m = self.p.num_rows();
        if k < n {
            RX
        } else if k < n + m {
            self.ry[k - n]
        } else {
            RTAU
        }
    }

    fn run(mut self) -> ConicSolution {
        let (n, m) = (self.p.num_vars(), self.p.num_rows());
        let len = n + m + 1;
        let mut u = vec![0.0; len];
        let mut v = vec![0.0; len];
        u[len - 1] = 1.0;
        v[len - 1] = 1.0;
        let mut w: Vec<f64> = (0..len).map(|k| u[k] + v[k] / self.r_diag(k)).collect();
        let mut ut = vec![0.0; len];
        let (mut best, mut last_progress, mut ladder) = (f64::INFINITY, 0, 0);
        // best progress reached on each rung, as (multiple of the initial scale, residual)
        let mut rungs: Vec<(f64, f64)> = vec![(1.0, f64::INFINITY)];
        let mut settled = false;
        let mut best_cert = f64::INFINITY;
        let mut last: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Residuals)> = None;
        let mut aa = Anderson::new(AA_MEMORY, len);
        // plain (unaccelerated) successor of the previous iterate and its residual norm
        let mut fallback: Option<(Vec<f64>, f64)> = None;
        let mut f = vec![0.0; len];

        for it in 1..=self.opts.max_iters {
            // ũ = (R + M)⁻¹ R w
            let rw: Vec<f64> = (0..len).map(|k| self.r_diag(k) * w[k]).collect();
            let pz = self.solve_k(&rw[..n + m]);
            let hp: f64 = self.c.iter().chain(&self.b).zip(&pz).map(|(a, b)| a * b).sum();
            let tau = (rw[len - 1] + hp) / (RTAU + self.hg);
            for k in 0..n + m {
                ut[k] = pz[k] - tau * self.g[k];
            }
            ut[len - 1] = tau;

            // u = Π_C(2ũ − w)
            for k in 0..len {
                u[k] = 2.0 * ut[k] - w[k];
            }
            let z = u.clone();
            project_dual(&self.p.cone, &mut u[n..n + m]);
            u[len - 1] = u[len - 1].max(0.0);

            for k in 0..len {
                v[k] = self.r_diag(k) * (u[k] - z[k]);
                f[k] = self.opts.alpha * (u[k] - ut[k]);
            }
            let fnorm = f.iter().map(|a| a * a).sum::<f64>().sqrt();
            if let Some((plain, prev_norm)) = fallback.take() {
                if !(fnorm <= AA_SAFEGUARD * prev_norm) {
                    // accelerated point made things worse: take the plain step instead
                    w = plain;
                    aa.reset();
                    continue;
                }
            }
            let plain: Vec<f64> = w.iter().zip(&f).map(|(a, b)| a + b).collect();
            match aa.step(&w, &f, &plain) {
                Some(next) if next.iter().all(|x| x.is_finite()) => {
                    fallback = Some((plain, fnorm));
                    w = next;
                }
                _ => w = plain,
            }

            if u.iter().chain(&v).any(|x| !x.is_finite()) {
                return self.failure(it, "non-finite iterate", last);
            }
            if it % CHECK_EVERY != 0 && it != self.opts.max_iters {
                continue;
            }

            let cert = match self.certificates(&u, &v, it) {
                Ok(sol) => return sol,
                Err(res) => res,
            };
            best_cert = best_cert.min(cert);
            let tau = u[len - 1];
            let mut progress = cert;
            if tau > 0.0 {
                let xs: Vec<f64> = u[..n].iter().map(|x| x / tau).collect();
                let ys: Vec<f64> = u[n..n + m].iter().map(|y| y / tau).collect();
                let ss: Vec<f64> = v[n..n + m].iter().map(|s| s / tau).collect();
                let x = self.sc.unscale_x(&xs);
                let y = self.sc.unscale_y(&ys);
                let s = self.sc.unscale_s(&ss);
                let r = residuals(self.p, &x, &s, &y);
                if r.max_rel() <= self.opts.tol {
                    return self.finish(SolveStatus::Optimal, x, y, s, r, it);
                }
                progress = progress.min(r.max_rel());
                last = Some((x, y, s, r));
            }
            if progress < 0.5 * best {
                best = progress;
                last_progress = it;
            }
            if let Some(r) = rungs.last_mut() {
                r.1 = r.1.min(progress);
            }
            if self.opts.adaptive_scale && !settled && it - last_progress >= STALL_WINDOW {
                let multiple = if ladder < SCALE_LADDER.len() {
                    ladder += 1;
                    SCALE_LADDER[ladder - 1]
                } else {
                    // ladder exhausted: return to the rung that got furthest and stay there
                    settled = true;
                    rungs.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map_or(1.0, |r| r.0)
                };
                rungs.push((multiple, f64::INFINITY));
                self.scale = (self.opts.scale * multiple).clamp(SCALE_CLAMP.0, SCALE_CLAMP.1);
                self.refactor();
                for k in 0..len {
                    w[k] = u[k] + v[k] / self.r_diag(k);
                }
                aa.reset();
                fallback = None;
                best = f64::INFINITY;
                last_progress = it;
            }
        }
        let iters = self.opts.max_iters;
        match last {
            Some((x, y, s, r)) => self.finish(SolveStatus::MaxIters, x, y, s, r, iters),
            None => {
                let mut sol = self.failure(iters, "no iterate with τ > 0", None);
                if best_cert.is_finite() {
                    sol.status = SolveStatus::MaxIters;
                    sol.certificate_residual = Some(best_cert);
                    sol.message = Some(format!("infeasibility suspected, best certificate residual {best_cert:.2e}"));
                }
                sol
            }
        }
    }

    /// Tests the current iterate for normalized infeasibility certificates;
    /// on failure returns the smaller certificate residual.
    fn certificates(&self, u: &[f64], v: &[f64], it: usize) -> std::result::Result<ConicSolution, f64> {
        let (n, m) = (self.p.num_vars(), self.p.num_rows());
        let inf = |x: &[f64]| x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let tol = self.opts.infeasibility_tol;
        let mut closest = f64::INFINITY;

        let y = self.sc.unscale_y(&u[n..n + m]);
        let bty: f64 = self.p.b.iter().zip(&y).map(|(a, b)| a * b).sum();
        if bty < 0.0 {
            let y: Vec<f64> = y.iter().map(|a| a / -bty).collect();
            let res = inf(&self.p.a.mul_t(&y));
            closest = closest.min(res);
            if res < tol {
                return Ok(ConicSolution {
                    status: SolveStatus::PrimalInfeasible,
                    x: vec![0.0; n],
                    s: vec![0.0; m],
                    residuals: Residuals { dual: res, ..Residuals::default() },
                    y,
                    objective: f64::INFINITY,
                    iterations: it,
                    certificate_residual: Some(res),
                    message: None,
                });
            }
        }

        let x = self.sc.unscale_x(&u[..n]);
        let ctx: f64 = self.p.c.iter().zip(&x).map(|(a, b)| a * b).sum();
        if ctx < 0.0 {
            let x: Vec<f64> = x.iter().map(|a| a / -ctx).collect();
            let s: Vec<f64> = self.sc.unscale_s(&v[n..n + m]).iter().map(|a| a / -ctx).collect();
            let mut ax = self.p.a.mul(&x);
            ax.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
            let res = inf(&ax);
            closest = closest.min(res);
            if res < tol {
                return Ok(ConicSolution {
                    status: SolveStatus::DualInfeasible,
                    x,
                    s,
                    y: vec![0.0; m],
                    objective: f64::NEG_INFINITY,
                    residuals: Residuals { primal: res, ..Residuals::default() },
                    iterations: it,
                    certificate_residual: Some(res),
                    message: None,
                });
            }
        }
        Err(closest)
    }

    fn finish(&self, status: SolveStatus, x: Vec<f64>, y: Vec<f64>, s: Vec<f64>, r: Residuals, it: usize) -> ConicSolution {
        let objective = self.p.c.iter().zip(&x).map(|(a, b)| a * b).sum();
        ConicSolution { status, x, y, s, objective, residuals: r, iterations: it, certificate_residual: None, message: None }
    }

    fn failure(&self, it: usize, why: &str, last: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Residuals)>) -> ConicSolution {
        let (n, m) = (self.p.num_vars(), self.p.num_rows());
        let (x, y, s, r) = last.unwrap_or_else(|| (vec![f64::NAN; n], vec![f64::NAN; m], vec![f64::NAN; m], Residuals {
            primal: f64::NAN,
            dual: f64::NAN,
            gap: f64::NAN,
            primal_rel: f64::NAN,
            dual_rel: f64::NAN,
            gap_rel: f64::NAN,
        }));
        let mut sol = self.finish(SolveStatus::NumericalFailure, x, y, s, r, it);
        sol.objective = f64::NAN;
        sol.message = Some(format!("{why} after {it} iterations"));
        sol
    }
}

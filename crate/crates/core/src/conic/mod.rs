//! Standard-form conic programs and the bundled solver.
//!
//! A program is
//!
//! ```text
//! minimize    cᵀx
//! subject to  s = b − A·x ∈ K
//! ```
//!
//! with `K` a product of zero, nonnegative, second-order and real PSD cones.
//! The dual is `maximize −bᵀy  s.t.  Aᵀy + c = 0, y ∈ K*`, so the duality gap
//! at an optimal pair is `cᵀx + bᵀy`.
//!
//! PSD blocks use scaled lower-triangular storage: for side `n` the entries
//! `(i, j)`, `i ≥ j`, are listed column by column, off-diagonals multiplied by
//! `√2` so that the vector inner product equals the trace inner product.
//! Complex LMIs enter through [`embed_hermitian_psd`]; the solver itself is
//! purely real.

mod admm;
mod affine;
pub mod cones;
mod dump;
mod embed;

use serde::{Deserialize, Serialize};

pub use admm::AdmmBackend;
pub use affine::{AffineExpr, ComplexAffine, HermAffine};
pub use dump::{read_dump, write_dump};
pub use embed::{embed_hermitian_psd, svec_index, svec_len};

use crate::error::{Error, Result};

/// One block of the cone product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeBlock {
    /// `s = 0`.
    Zero(usize),
    /// `s ≥ 0`.
    Nonneg(usize),
    /// `s[0] ≥ ‖s[1..]‖`.
    SecondOrder(usize),
    /// Real symmetric PSD matrix of the given side, scaled-triangular.
    PsdReal(usize),
}

impl ConeBlock {
    pub fn dim(&self) -> usize {
        match *self {
            ConeBlock::Zero(d) | ConeBlock::Nonneg(d) | ConeBlock::SecondOrder(d) => d,
            ConeBlock::PsdReal(side) => side * (side + 1) / 2,
        }
    }
}

/// Ordered cone product.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub blocks: Vec<ConeBlock>,
}

impl ConeSpec {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for b in &self.blocks {
            let ok = match *b {
                ConeBlock::Zero(d) | ConeBlock::Nonneg(d) | ConeBlock::SecondOrder(d) => d >= 1,
                ConeBlock::PsdReal(s) => s >= 1,
            };
            if !ok {
                return Err(Error::Dimension(format!("empty cone block {b:?}")));
            }
        }
        Ok(())
    }

    /// `(block, row offset)` pairs.
    pub fn offsets(&self) -> impl Iterator<Item = (ConeBlock, usize)> + '_ {
        let mut off = 0;
        self.blocks.iter().map(move |b| {
            let o = off;
            off += b.dim();
            (*b, o)
        })
    }

    pub fn count_psd(&self) -> usize {
        self.blocks.iter().filter(|b| matches!(b, ConeBlock::PsdReal(_))).count()
    }
}

/// What a scalar program variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarName {
    /// Real or imaginary part of entry `(row, col)` (`row ≥ col`) of `W_user`.
    WEntry { user: usize, row: usize, col: usize, imag: bool },
    /// Beam power `p_user` in the power-allocation programs.
    Power { user: usize },
    /// Method slack (`t`, `x`, `y`, `t_ℓ`, ...).
    Slack { user: usize, role: String },
    Other(String),
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    m: usize,
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Duplicates are summed and exact zeros dropped.
    pub fn from_triplets(m: usize, n: usize, trips: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(t) = trips.iter().find(|t| t.0 >= m || t.1 >= n) {
            return Err(Error::Dimension(format!("triplet ({}, {}) outside {m}x{n}", t.0, t.1)));
        }
        let mut sorted: Vec<(usize, usize, f64)> = trips.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0; n + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        let mut col_of: Vec<usize> = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_idx.push(i);
                vals.push(v);
                col_of.push(j);
                last = Some((i, j));
            }
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != 0.0).collect();
        let mut r2 = Vec::new();
        let mut v2 = Vec::new();
        for (idx, k) in keep.iter().enumerate() {
            if *k {
                r2.push(row_idx[idx]);
                v2.push(vals[idx]);
                col_ptr[col_of[idx] + 1] += 1;
            }
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self { m, n, col_ptr, row_idx: r2, vals: v2 })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, col_ptr: vec![0; n + 1], row_idx: vec![], vals: vec![] }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |k| (self.row_idx[k], j, self.vals[k]))
        })
    }

    /// `y += A x`.
    pub fn mul_add(&self, x: &[f64], y: &mut [f64]) {
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[k]] += self.vals[k] * xj;
            }
        }
    }

    /// `x += Aᵀ y`.
    pub fn mul_t_add(&self, y: &[f64], x: &mut [f64]) {
        for j in 0..self.n {
            let mut acc = 0.0;
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.vals[k] * y[self.row_idx[k]];
            }
            x[j] += acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        self.mul_add(x, &mut y);
        y
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.mul_t_add(y, &mut x);
        x
    }

    pub(crate) fn scale_in_place(&mut self, row_scale: &[f64], col_scale: &[f64]) {
        for j in 0..self.n {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                self.vals[k] *= row_scale[self.row_idx[k]] * col_scale[j];
            }
        }
    }
}

/// Standard-form conic program `min cᵀx  s.t.  b − A·x ∈ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub c: Vec<f64>,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub cone: ConeSpec,
    pub names: Vec<VarName>,
}

impl ConicProgram {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.cone.validate()?;
        let (m, n) = (self.a.rows(), self.a.cols());
        if self.c.len() != n {
            return Err(Error::Dimension(format!("c has {} entries, A has {n} columns", self.c.len())));
        }
        if self.b.len() != m {
            return Err(Error::Dimension(format!("b has {} entries, A has {m} rows", self.b.len())));
        }
        if self.cone.dim() != m {
            return Err(Error::Dimension(format!("cone dimension {} differs from {m} rows", self.cone.dim())));
        }
        if self.names.len() != n {
            return Err(Error::Dimension(format!("{} variable names for {n} variables", self.names.len())));
        }
        if self.c.iter().chain(&self.b).any(|v| !v.is_finite()) || self.a.vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("program data must be finite".into()));
        }
        Ok(())
    }

    /// Counts of (zero, nonneg, soc, psd) blocks.
    pub fn block_counts(&self) -> [usize; 4] {
        let mut out = [0; 4];
        for b in &self.cone.blocks {
            let k = match b {
                ConeBlock::Zero(_) => 0,
                ConeBlock::Nonneg(_) => 1,
                ConeBlock::SecondOrder(_) => 2,
                ConeBlock::PsdReal(_) => 3,
            };
            out[k] += 1;
        }
        out
    }
}

/// Incremental construction of a [`ConicProgram`] from affine expressions.
#[derive(Debug, Clone, Default)]
pub struct ProgramBuilder {
    names: Vec<VarName>,
    c: Vec<f64>,
    rows: Vec<AffineExpr>,
    blocks: Vec<ConeBlock>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: VarName) -> usize {
        self.names.push(name);
        self.c.push(0.0);
        self.names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// Adds the linear part of `e` to the objective.
    pub fn add_objective(&mut self, e: &AffineExpr) {
        for &(v, c) in &e.terms {
            self.c[v] += c;
        }
    }

    /// Each expression must be `= 0`.
    pub fn add_zero(&mut self, exprs: Vec<AffineExpr>) {
        self.push(ConeBlock::Zero(exprs.len()), exprs);
    }

    /// Each expression must be `≥ 0`.
    pub fn add_nonneg(&mut self, exprs: Vec<AffineExpr>) {
        self.push(ConeBlock::Nonneg(exprs.len()), exprs);
    }

    /// `‖rest‖ ≤ head`.
    pub fn add_soc(&mut self, head: AffineExpr, rest: Vec<AffineExpr>) {
        let mut exprs = Vec::with_capacity(rest.len() + 1);
        exprs.push(head);
        exprs.extend(rest);
        self.push(ConeBlock::SecondOrder(exprs.len()), exprs);
    }

    /// Real symmetric matrix given in scaled-triangular order must be PSD.
    pub fn add_psd(&mut self, side: usize, svec: Vec<AffineExpr>) -> Result<()> {
        if svec.len() != svec_len(side) {
            return Err(Error::Dimension(format!("{} entries for a PSD block of side {side}", svec.len())));
        }
        self.push(ConeBlock::PsdReal(side), svec);
        Ok(())
    }

    /// Complex Hermitian LMI `M ⪰ 0` through the real embedding.
    pub fn add_hermitian_psd(&mut self, m: &HermAffine) -> Result<()> {
        let side = 2 * m.n();
        let svec = embed_hermitian_psd(m)?;
        self.add_psd(side, svec)
    }

    fn push(&mut self, block: ConeBlock, exprs: Vec<AffineExpr>) {
        if block.dim() == 0 {
            return;
        }
        self.blocks.push(block);
        self.rows.extend(exprs);
    }

    pub fn build(self) -> Result<ConicProgram> {
        let n = self.names.len();
        let m = self.rows.len();
        let mut trips = Vec::new();
        let mut b = Vec::with_capacity(m);
        for (i, r) in self.rows.iter().enumerate() {
            for &(v, c) in &r.terms {
                if v >= n {
                    return Err(Error::Dimension(format!("row {i} references unknown variable {v}")));
                }
                // s = b − A x  with  s = expr  ⇒  A = −coeffs, b = constant
                trips.push((i, v, -c));
            }
            b.push(r.constant);
        }
        let a = SparseMatrix::from_triplets(m, n, &trips)?;
        let p = ConicProgram { c: self.c, a, b, cone: ConeSpec { blocks: self.blocks }, names: self.names };
        p.validate()?;
        Ok(p)
    }
}

/// Solver outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIters,
    NumericalFailure,
}

/// Absolute and relative optimality residuals of a primal–dual pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖A x + s − b‖_∞`.
    pub primal: f64,
    /// `‖Aᵀ y + c‖_∞`.
    pub dual: f64,
    /// `|cᵀx + bᵀy|`.
    pub gap: f64,
    pub primal_rel: f64,
    pub dual_rel: f64,
    pub gap_rel: f64,
}

impl Residuals {
    pub fn max_rel(&self) -> f64 {
        self.primal_rel.max(self.dual_rel).max(self.gap_rel)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// `cᵀx` (NaN when no primal point is available).
    pub objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Normalized residual of the infeasibility certificate, when one was
    /// returned.
    pub certificate_residual: Option<f64>,
    /// Diagnostic text for `NumericalFailure`.
    pub message: Option<String>,
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative tolerance on primal, dual and gap residuals.
    pub tol: f64,
    pub max_iters: usize,
    /// Normalized certificate residual required to declare infeasibility.
    pub infeasibility_tol: f64,
    /// Over-relaxation parameter in `(0, 2)`.
    pub alpha: f64,
    /// Initial primal/dual balance.
    pub scale: f64,
    /// Switch to other multiples of `scale` when progress stalls.
    pub adaptive_scale: bool,
    /// Ruiz equilibration passes.
    pub equilibration_passes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iters: 50_000,
            infeasibility_tol: 1e-6,
            alpha: 1.5,
            scale: 10.0,
            adaptive_scale: true,
            equilibration_passes: 25,
        }
    }
}

/// Anything that maps `(c, A, b, K)` to a [`ConicSolution`].
pub trait ConicBackend {
    fn solve(&self, p: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution>;
}

/// Solves with the bundled ADMM backend.
pub fn solve(p: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution> {
    AdmmBackend.solve(p, opts)
}

/// Recomputes residuals of `(x, s, y)` against `p`.
pub fn residuals(p: &ConicProgram, x: &[f64], s: &[f64], y: &[f64]) -> Residuals {
    let ax = p.a.mul(x);
    let aty = p.a.mul_t(y);
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let pri: Vec<f64> = ax.iter().zip(s).zip(&p.b).map(|((a, s), b)| a + s - b).collect();
    let du: Vec<f64> = aty.iter().zip(&p.c).map(|(a, c)| a + c).collect();
    let ctx: f64 = p.c.iter().zip(x).map(|(a, b)| a * b).sum();
    let bty: f64 = p.b.iter().zip(y).map(|(a, b)| a * b).sum();
    let primal = inf(&pri);
    let dual = inf(&du);
    let gap = (ctx + bty).abs();
    Residuals {
        primal,
        dual,
        gap,
        primal_rel: primal / (1.0 + inf(&p.b).max(inf(&ax)).max(inf(s))),
        dual_rel: dual / (1.0 + inf(&p.c).max(inf(&aty))),
        gap_rel: gap / (1.0 + ctx.abs() + bty.abs()),
    }
}

/// Residuals of a returned solution.
pub fn solution_residuals(p: &ConicProgram, sol: &ConicSolution) -> Residuals {
    residuals(p, &sol.x, &sol.s, &sol.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_x_ge_1() -> ConicProgram {
        let mut b = ProgramBuilder::new();
        let x = b.add_var(VarName::Other("x".into()));
        b.add_objective(&AffineExpr::var(x));
        b.add_nonneg(vec![AffineExpr::var(x).plus_constant(-1.0)]);
        b.build().unwrap()
    }

    #[test]
    fn lp_corner() {
        let p = lp_x_ge_1();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
        assert!((sol.objective - 1.0).abs() < 1e-6);
        let r = solution_residuals(&p, &sol);
        assert!(r.primal <= 1e-7 && r.dual <= 1e-7 && r.gap <= 1e-7, "{r:?}");
    }

    #[test]
    fn perturbed_primal_residual_grows_linearly() {
        let p = lp_x_ge_1();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        let mut x = sol.x.clone();
        x[0] += 1e-3;
        let r = residuals(&p, &x, &sol.s, &sol.y);
        assert!(r.primal > 0.9e-3 && r.primal < 1.1e-3);
    }

    #[test]
    fn empty_program_has_zero_residuals() {
        let p = ProgramBuilder::new().build().unwrap();
        let r = residuals(&p, &[], &[], &[]);
        assert_eq!((r.primal, r.dual, r.gap), (0.0, 0.0, 0.0));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
    }

    #[test]
    fn soc_projection_problem() {
        let mut b = ProgramBuilder::new();
        let t = b.add_var(VarName::Other("t".into()));
        b.add_objective(&AffineExpr::var(t));
        b.add_soc(AffineExpr::var(t), vec![AffineExpr::constant(3.0), AffineExpr::constant(4.0)]);
        let p = b.build().unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 5.0).abs() < 1e-6);
    }

    #[test]
    fn psd_identity_bound() {
        // X symmetric 2x2 with X − I ⪰ 0 and X ⪰ 0, minimize tr X
        let mut b = ProgramBuilder::new();
        let x00 = b.add_var(VarName::Other("x00".into()));
        let x10 = b.add_var(VarName::Other("x10".into()));
        let x11 = b.add_var(VarName::Other("x11".into()));
        b.add_objective(&AffineExpr::var(x00).plus(&AffineExpr::var(x11)));
        let r2 = std::f64::consts::SQRT_2;
        b.add_psd(2, vec![AffineExpr::var(x00), AffineExpr::term(x10, r2), AffineExpr::var(x11)]).unwrap();
        b.add_psd(
            2,
            vec![AffineExpr::var(x00).plus_constant(-1.0), AffineExpr::term(x10, r2), AffineExpr::var(x11).plus_constant(-1.0)],
        )
        .unwrap();
        let p = b.build().unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-6);
        assert!((sol.x[0] - 1.0).abs() < 1e-6 && sol.x[1].abs() < 1e-6 && (sol.x[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn detects_primal_infeasibility() {
        // x ≥ 1 and x ≤ 0
        let mut b = ProgramBuilder::new();
        let x = b.add_var(VarName::Other("x".into()));
        b.add_objective(&AffineExpr::var(x));
        b.add_nonneg(vec![AffineExpr::var(x).plus_constant(-1.0), AffineExpr::term(x, -1.0)]);
        let sol = solve(&b.build().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
        assert!(sol.certificate_residual.unwrap() < 1e-6);
    }

    #[test]
    fn detects_unboundedness() {
        // minimize x with x ≤ 3 only
        let mut b = ProgramBuilder::new();
        let x = b.add_var(VarName::Other("x".into()));
        b.add_objective(&AffineExpr::var(x));
        b.add_nonneg(vec![AffineExpr::term(x, -1.0).plus_constant(3.0)]);
        let sol = solve(&b.build().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::DualInfeasible);
    }

    #[test]
    fn structural_errors_rejected() {
        let mut p = lp_x_ge_1();
        p.b.push(0.0);
        assert!(matches!(solve(&p, &SolverOptions::default()), Err(Error::Dimension(_))));
    }
}

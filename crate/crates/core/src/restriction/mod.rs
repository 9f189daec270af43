//! Relaxed power-minimization programs with conic restrictions of the
//! per-user outage constraints.
//!
//! [`build_sdr`] creates the relaxation (one PSD matrix per user, total
//! power objective). One of the `add_*` builders then appends, per user,
//! constraints in `(Q, r, s)` (see [`qrs`]) that imply
//! `Prob{SINR_i ≥ γ_i} ≥ 1 − ρ_i`:
//!
//! | builder | errors | constraints per user |
//! |---|---|---|
//! | [`add_method1`] sphere bounding | Gaussian | LMI of side `N_t+1`, `t ≥ 0` |
//! | [`add_method2`] Bernstein | Gaussian | linear row, SOC, LMI of side `N_t`, `y ≥ 0` |
//! | [`add_method3`] decomposition | Gaussian | linear row, two SOCs |
//! | [`add_method4`] decomposition | uniform | linear row, `2N_t + 1` SOCs |
//! | [`add_nonrobust`] | ignored | `s ≥ 0` |

pub mod qrs;
pub mod tight;

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conic::{AffineExpr, ComplexAffine, ConicProgram, HermAffine, ProgramBuilder, VarName};
use crate::error::{Error, Result};
use crate::model::BeamformingInstance;
use crate::numerics::{chi2_inv_cdf, solve_theta_bar, HermitianMatrix};

pub use qrs::{eval_qrs_bounded, eval_qrs_gaussian, QrsData, SymbolicQrs};

/// Which restriction to apply, with the optional conservatism knob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSelector {
    /// Ball of radius `d` around the presumed channel; `radius` replaces the
    /// quantile-based `d` for every user.
    SphereBounding { radius: Option<f64> },
    /// Bernstein-type tail bound; `rho` replaces every `ρ_i`.
    Bernstein { rho: Option<f64> },
    /// Decomposition into independent parts, Gaussian errors.
    DecompGaussian { rho: Option<f64> },
    /// Decomposition into independent parts, bounded i.i.d. errors.
    DecompBounded { rho: Option<f64> },
    /// Perfect-CSI constraints at the presumed channels.
    NonRobust,
}

impl MethodSelector {
    pub const ALL_GAUSSIAN: [MethodSelector; 4] = [
        MethodSelector::SphereBounding { radius: None },
        MethodSelector::Bernstein { rho: None },
        MethodSelector::DecompGaussian { rho: None },
        MethodSelector::NonRobust,
    ];

    /// Short stable identifier used in files and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Self::SphereBounding { .. } => "sphere",
            Self::Bernstein { .. } => "bernstein",
            Self::DecompGaussian { .. } => "decomp",
            Self::DecompBounded { .. } => "decomp-bounded",
            Self::NonRobust => "nonrobust",
        }
    }

    pub fn is_robust(&self) -> bool {
        !matches!(self, Self::NonRobust)
    }

    pub fn needs_gaussian(&self) -> bool {
        matches!(self, Self::SphereBounding { .. } | Self::Bernstein { .. } | Self::DecompGaussian { .. })
    }

    pub fn needs_uniform(&self) -> bool {
        matches!(self, Self::DecompBounded { .. })
    }

    /// The override, if any.
    pub fn knob(&self) -> Option<f64> {
        match *self {
            Self::SphereBounding { radius } => radius,
            Self::Bernstein { rho } | Self::DecompGaussian { rho } | Self::DecompBounded { rho } => rho,
            Self::NonRobust => None,
        }
    }

    /// Same method with the override replaced.
    pub fn with_knob(&self, v: Option<f64>) -> Self {
        match self {
            Self::SphereBounding { .. } => Self::SphereBounding { radius: v },
            Self::Bernstein { .. } => Self::Bernstein { rho: v },
            Self::DecompGaussian { .. } => Self::DecompGaussian { rho: v },
            Self::DecompBounded { .. } => Self::DecompBounded { rho: v },
            Self::NonRobust => Self::NonRobust,
        }
    }

    /// Nominal method, overrides dropped.
    pub fn nominal(&self) -> Self {
        self.with_knob(None)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SphereBounding { radius: Some(d) } if !(d >= 0.0 && d.is_finite()) => {
                Err(Error::Invalid(format!("sphere radius override {d} must be finite and ≥ 0")))
            }
            Self::Bernstein { rho: Some(r) } | Self::DecompGaussian { rho: Some(r) } | Self::DecompBounded { rho: Some(r) }
                if !(r > 0.0 && r < 1.0) =>
            {
                Err(Error::Invalid(format!("outage override {r} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MethodSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sphere" | "method1" | "i" => Self::SphereBounding { radius: None },
            "bernstein" | "method2" | "ii" => Self::Bernstein { rho: None },
            "decomp" | "method3" | "iii" => Self::DecompGaussian { rho: None },
            "decomp-bounded" | "method4" | "iv" => Self::DecompBounded { rho: None },
            "nonrobust" | "non-robust" | "perfect" => Self::NonRobust,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown method `{other}` (expected sphere, bernstein, decomp, decomp-bounded or nonrobust)"
                )))
            }
        })
    }
}

/// Radius `d` with `Prob{‖z‖ ≤ d} = 1 − ρ` for `z ~ CN(0, I_n)`; zero at
/// `ρ = 1`.
pub fn sphere_radius(n: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("outage probability {rho} outside (0, 1]")));
    }
    if rho == 1.0 {
        return Ok(0.0);
    }
    // 2‖z‖² is chi-square with 2n degrees of freedom
    Ok((chi2_inv_cdf(2 * n as u32, 1.0 - rho)? / 2.0).sqrt())
}

/// Constants of the Gaussian decomposition bound at outage level `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompConstants {
    pub theta_bar: f64,
    /// Weight on `‖vec Q‖`.
    pub v: f64,
    /// Multiplier `2√(−ln ρ)` on the slack sum.
    pub mu: f64,
}

pub fn decomp_constants(rho: f64) -> Result<DecompConstants> {
    let theta_bar = solve_theta_bar(rho)?;
    let l = (-rho.ln()).sqrt();
    Ok(DecompConstants { theta_bar, v: l / theta_bar, mu: 2.0 * l })
}

/// Index pairs of each coloring set for a side-`n` matrix (0-based): entry
/// `(j, k)` belongs to set `(j + k) mod n`. Within a set no two pairs share
/// a row or a column, so its terms involve independent error components.
pub fn coloring_sets(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut sets = vec![Vec::with_capacity(n); n];
    for j in 0..n {
        for k in 0..n {
            sets[(j + k) % n].push((j, k));
        }
    }
    sets
}

/// Entry weight in the bounded decomposition bound.
pub fn coloring_weight(j: usize, k: usize) -> f64 {
    if j == k {
        1.0 / 8f64.sqrt()
    } else {
        1.0
    }
}

/// A program under construction plus the affine `W_i` it is stated in.
#[derive(Debug, Clone)]
pub struct SdrProgram {
    pub builder: ProgramBuilder,
    /// Hermitian `W_i` as affine maps of the program variables.
    pub w: Vec<HermAffine>,
    /// Per-user `(Q, r, s)` emitted by the last restriction builder.
    pub qrs: Vec<Option<SymbolicQrs>>,
    pub method: Option<MethodSelector>,
}

impl SdrProgram {
    /// Wraps a builder whose variables already encode the `W_i`.
    pub fn from_parts(builder: ProgramBuilder, w: Vec<HermAffine>) -> Self {
        let k = w.len();
        Self { builder, w, qrs: vec![None; k], method: None }
    }

    pub fn k(&self) -> usize {
        self.w.len()
    }

    pub fn build(self) -> Result<ConicProgram> {
        self.builder.build()
    }

    /// Numeric `W_i` at a primal point.
    pub fn eval_w(&self, x: &[f64]) -> Vec<HermitianMatrix> {
        self.w.iter().map(|m| m.eval(x)).collect()
    }

    fn check(&self, inst: &BeamformingInstance) -> Result<()> {
        if self.k() != inst.k() || self.w.iter().any(|m| m.n() != inst.n_t()) {
            return Err(Error::Dimension("program does not match the instance shape".into()));
        }
        Ok(())
    }
}

/// Relaxation skeleton: one Hermitian PSD `W_i` per user, objective
/// `Σ tr W_i`, no outage constraints.
pub fn build_sdr(inst: &BeamformingInstance) -> Result<SdrProgram> {
    let n = inst.n_t();
    let mut b = ProgramBuilder::new();
    let mut w = Vec::with_capacity(inst.k());
    for user in 0..inst.k() {
        let m = HermAffine::from_lower(n, |row, col| {
            let re = b.add_var(VarName::WEntry { user, row, col, imag: false });
            let im = if row == col {
                AffineExpr::zero()
            } else {
                AffineExpr::var(b.add_var(VarName::WEntry { user, row, col, imag: true }))
            };
            ComplexAffine { re: AffineExpr::var(re), im }
        });
        b.add_objective(&m.trace());
        b.add_hermitian_psd(&m)?;
        w.push(m);
    }
    Ok(SdrProgram::from_parts(b, w))
}

fn slack(b: &mut ProgramBuilder, user: usize, role: &str) -> usize {
    b.add_var(VarName::Slack { user, role: role.to_string() })
}

fn open_rho(rho: f64, what: &str) -> Result<f64> {
    if rho > 0.0 && rho < 1.0 {
        Ok(rho)
    } else {
        Err(Error::Domain(format!("{what} needs an outage probability in (0, 1), got {rho}")))
    }
}

fn re_im(r: &[ComplexAffine], scale: f64) -> Vec<AffineExpr> {
    r.iter().map(|z| z.re.scaled(scale)).chain(r.iter().map(|z| z.im.scaled(scale))).collect()
}

fn scaled_all(v: Vec<AffineExpr>, s: f64) -> Vec<AffineExpr> {
    v.into_iter().map(|e| e.scaled(s)).collect()
}

/// Sphere bounding: `[[Q + tI, r], [r^H, s − t d²]] ⪰ 0`, `t ≥ 0`.
pub fn add_method1(prog: &mut SdrProgram, inst: &BeamformingInstance, radius: Option<f64>) -> Result<()> {
    prog.check(inst)?;
    let sel = MethodSelector::SphereBounding { radius };
    sel.validate()?;
    for i in 0..inst.k() {
        let d = match radius {
            Some(d) => d,
            None => sphere_radius(inst.n_t(), inst.rho(i))?,
        };
        let sq = qrs::symbolic_gaussian(inst, &prog.w, i)?;
        let b = &mut prog.builder;
        let t = AffineExpr::var(slack(b, i, "t"));
        let n = sq.q.n();
        let lmi = HermAffine::from_lower(n + 1, |a, c| {
            if a < n {
                let mut z = sq.q.get(a, c).clone();
                if a == c {
                    z.re.add_scaled(&t, 1.0);
                }
                z
            } else if c < n {
                sq.r[c].conj()
            } else {
                ComplexAffine::real(sq.s.clone().minus(&t.scaled(d * d)))
            }
        });
        b.add_hermitian_psd(&lmi)?;
        b.add_nonneg(vec![t]);
        prog.qrs[i] = Some(sq);
    }
    prog.method = Some(sel);
    Ok(())
}

/// Bernstein-type bound:
/// `tr Q − √(−2 ln ρ)·x + ln ρ·y + s ≥ 0`, `‖[vec Q; √2 r]‖ ≤ x`,
/// `yI + Q ⪰ 0`, `y ≥ 0`.
pub fn add_method2(prog: &mut SdrProgram, inst: &BeamformingInstance, rho: Option<f64>) -> Result<()> {
    prog.check(inst)?;
    let sel = MethodSelector::Bernstein { rho };
    sel.validate()?;
    for i in 0..inst.k() {
        let rho = open_rho(rho.unwrap_or(inst.rho(i)), "the Bernstein restriction")?;
        let sq = qrs::symbolic_gaussian(inst, &prog.w, i)?;
        let b = &mut prog.builder;
        let x = slack(b, i, "x");
        let y = slack(b, i, "y");
        let row = sq
            .q
            .trace()
            .plus(&sq.s)
            .plus(&AffineExpr::term(x, -(-2.0 * rho.ln()).sqrt()))
            .plus(&AffineExpr::term(y, rho.ln()));
        b.add_nonneg(vec![row.compacted()]);
        let mut rest = sq.q.vec_real_stacked();
        rest.extend(re_im(&sq.r, SQRT_2));
        b.add_soc(AffineExpr::var(x), rest);
        b.add_hermitian_psd(&sq.q.plus_identity(&AffineExpr::var(y)))?;
        b.add_nonneg(vec![AffineExpr::var(y)]);
        prog.qrs[i] = Some(sq);
    }
    prog.method = Some(sel);
    Ok(())
}

/// Gaussian decomposition bound:
/// `s + tr Q ≥ μ(x + y)`, `‖r‖/√2 ≤ x`, `v‖vec Q‖ ≤ y`.
pub fn add_method3(prog: &mut SdrProgram, inst: &BeamformingInstance, rho: Option<f64>) -> Result<()> {
    prog.check(inst)?;
    let sel = MethodSelector::DecompGaussian { rho };
    sel.validate()?;
    for i in 0..inst.k() {
        let rho = open_rho(rho.unwrap_or(inst.rho(i)), "the decomposition restriction")?;
        let k = decomp_constants(rho)?;
        let sq = qrs::symbolic_gaussian(inst, &prog.w, i)?;
        let b = &mut prog.builder;
        let x = slack(b, i, "x");
        let y = slack(b, i, "y");
        let row = sq.s.clone().plus(&sq.q.trace()).plus(&AffineExpr::term(x, -k.mu)).plus(&AffineExpr::term(y, -k.mu));
        b.add_nonneg(vec![row.compacted()]);
        b.add_soc(AffineExpr::var(x), re_im(&sq.r, 1.0 / SQRT_2));
        b.add_soc(AffineExpr::var(y), scaled_all(sq.q.vec_real_stacked(), k.v));
        prog.qrs[i] = Some(sq);
    }
    prog.method = Some(sel);
    Ok(())
}

/// Bounded decomposition bound on the normalized real data:
/// `s + tr Q ≥ μ Σ_ℓ t_ℓ`, `√2‖r‖ ≤ t_0`,
/// `(Σ_{(j,k)∈A_ℓ} v_jk² Q_jk²)^{1/2} ≤ t_ℓ`.
pub fn add_method4(prog: &mut SdrProgram, inst: &BeamformingInstance, rho: Option<f64>) -> Result<()> {
    prog.check(inst)?;
    let sel = MethodSelector::DecompBounded { rho };
    sel.validate()?;
    for i in 0..inst.k() {
        let rho = open_rho(rho.unwrap_or(inst.rho(i)), "the bounded decomposition restriction")?;
        let mu = 2.0 * (-rho.ln()).sqrt();
        let sq = qrs::symbolic_bounded(inst, &prog.w, i)?;
        let n = sq.q.n();
        let b = &mut prog.builder;
        let t: Vec<usize> = (0..=n).map(|l| slack(b, i, &format!("t{l}"))).collect();
        // normalized errors have unit variance
        let mut row = sq.s.clone().plus(&sq.q.trace());
        for &tl in &t {
            row.add_term(tl, -mu);
        }
        b.add_nonneg(vec![row.compacted()]);
        b.add_soc(AffineExpr::var(t[0]), sq.r.iter().map(|z| z.re.scaled(SQRT_2)).collect());
        for (l, set) in coloring_sets(n).iter().enumerate() {
            let rest = set.iter().map(|&(j, k)| sq.q.get(j, k).re.scaled(coloring_weight(j, k))).collect();
            b.add_soc(AffineExpr::var(t[l + 1]), rest);
        }
        prog.qrs[i] = Some(sq);
    }
    prog.method = Some(sel);
    Ok(())
}

/// Perfect-CSI constraints `h̄_i^H X_i h̄_i ≥ σ_i²`.
pub fn add_nonrobust(prog: &mut SdrProgram, inst: &BeamformingInstance) -> Result<()> {
    prog.check(inst)?;
    for i in 0..inst.k() {
        let sq = qrs::symbolic_nominal(inst, &prog.w, i)?;
        prog.builder.add_nonneg(vec![sq.s.clone()]);
        prog.qrs[i] = Some(sq);
    }
    prog.method = Some(MethodSelector::NonRobust);
    Ok(())
}

/// Dispatches to the builder for `method`.
pub fn add_restriction(prog: &mut SdrProgram, inst: &BeamformingInstance, method: &MethodSelector) -> Result<()> {
    if method.needs_gaussian() && !inst.error_model().is_gaussian() {
        return Err(Error::Invalid(format!("method `{method}` needs a Gaussian error model")));
    }
    if method.needs_uniform() && inst.error_model().is_gaussian() {
        return Err(Error::Invalid(format!("method `{method}` needs a uniform error model")));
    }
    match *method {
        MethodSelector::SphereBounding { radius } => add_method1(prog, inst, radius),
        MethodSelector::Bernstein { rho } => add_method2(prog, inst, rho),
        MethodSelector::DecompGaussian { rho } => add_method3(prog, inst, rho),
        MethodSelector::DecompBounded { rho } => add_method4(prog, inst, rho),
        MethodSelector::NonRobust => add_nonrobust(prog, inst),
    }
}

/// Relaxation plus restriction in one call.
pub fn build_program(inst: &BeamformingInstance, method: &MethodSelector) -> Result<SdrProgram> {
    let mut p = build_sdr(inst)?;
    add_restriction(&mut p, inst, method)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, ConeBlock, SolveStatus, SolverOptions};
    use crate::model::ErrorModel;
    use crate::numerics::{c64, Complex64};

    fn single_user(h: Vec<Complex64>, model: ErrorModel) -> BeamformingInstance {
        BeamformingInstance::new(vec![h], vec![0.1], vec![0.0], vec![0.1], model).unwrap()
    }

    #[test]
    fn radius_for_three_antennas() {
        // independent oracle: bisect the chi-square(6) CDF in closed form
        let cdf6 = |x: f64| 1.0 - (-x / 2.0).exp() * (1.0 + x / 2.0 + x * x / 8.0);
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf6(mid) < 0.9 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d = sphere_radius(3, 0.1).unwrap();
        assert!((d - (lo / 2.0).sqrt()).abs() < 1e-9);
        assert!((d - 2.3071).abs() < 1e-4);
        assert_eq!(sphere_radius(3, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn decomposition_constants_at_ten_percent() {
        let k = decomp_constants(0.1).unwrap();
        assert!((k.theta_bar - 0.9618).abs() < 1e-4);
        assert!((k.v - 1.5777).abs() < 1e-4);
        assert!((k.mu - 3.0349).abs() < 1e-4);
    }

    #[test]
    fn coloring_three() {
        let sets = coloring_sets(3);
        let one_based: Vec<Vec<(usize, usize)>> =
            sets.iter().map(|s| s.iter().map(|&(j, k)| (j + 1, k + 1)).collect()).collect();
        assert_eq!(one_based[0], vec![(1, 1), (2, 3), (3, 2)]);
        assert_eq!(one_based[1], vec![(1, 2), (2, 1), (3, 3)]);
        assert_eq!(one_based[2], vec![(1, 3), (2, 2), (3, 1)]);
    }

    #[test]
    fn coloring_partitions_and_separates() {
        for n in 1..9 {
            let sets = coloring_sets(n);
            let mut seen = vec![0; n * n];
            for set in &sets {
                let mut rows = vec![false; n];
                for &(j, k) in set {
                    seen[j * n + k] += 1;
                    assert!(!rows[j]);
                    rows[j] = true;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn skeleton_audit() {
        let model = ErrorModel::gaussian_correlated(2, 2, 0.01, 0.0);
        let inst = BeamformingInstance::new(
            vec![vec![c64(1.0, 0.0), c64(0.0, 1.0)], vec![c64(0.5, 0.5), c64(1.0, 0.0)]],
            vec![0.1; 2],
            vec![3.0; 2],
            vec![0.1; 2],
            model,
        )
        .unwrap();
        let sdr = build_sdr(&inst).unwrap();
        let w = sdr.w.clone();
        let p = sdr.build().unwrap();
        assert_eq!(p.cone.blocks, vec![ConeBlock::PsdReal(4), ConeBlock::PsdReal(4)]);
        let ones: Vec<usize> = (0..p.num_vars()).filter(|&j| p.c[j] == 1.0).collect();
        assert_eq!(ones.len(), 4);
        assert!(p.c.iter().all(|&c| c == 0.0 || c == 1.0));
        for j in ones {
            assert!(matches!(p.names[j], VarName::WEntry { row, col, imag: false, .. } if row == col));
        }
        // W_i = I gives objective K·N_t
        let mut x = vec![0.0; p.num_vars()];
        for (j, nm) in p.names.iter().enumerate() {
            if let VarName::WEntry { row, col, imag: false, .. } = nm {
                if row == col {
                    x[j] = 1.0;
                }
            }
        }
        let obj: f64 = p.c.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert_eq!(obj, 4.0);
        assert!(w.iter().all(|m| m.eval(&x) == HermitianMatrix::identity(2)));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective.abs() < 1e-6);
    }

    #[test]
    fn nonrobust_single_user_closed_form() {
        let inst = single_user(vec![c64(1.0, 0.0), c64(0.0, 0.0)], ErrorModel::gaussian_correlated(2, 1, 0.0, 0.0));
        let p = build_program(&inst, &MethodSelector::NonRobust).unwrap();
        let w = p.w.clone();
        let sol = solve(&p.build().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 0.1).abs() < 1e-6);
        let wm = w[0].eval(&sol.x);
        assert!((wm[(0, 0)].re - 0.1).abs() < 1e-6);
        assert!(wm.frobenius_norm() - wm[(0, 0)].re < 1e-6);
    }

    #[test]
    fn zero_covariance_collapses_to_nonrobust() {
        let inst = single_user(vec![c64(0.6, 0.2), c64(-0.3, 0.9)], ErrorModel::gaussian_correlated(2, 1, 0.0, 0.0));
        let base = {
            let p = build_program(&inst, &MethodSelector::NonRobust).unwrap().build().unwrap();
            solve(&p, &SolverOptions::default()).unwrap().objective
        };
        for m in [MethodSelector::SphereBounding { radius: None }, MethodSelector::Bernstein { rho: None }, MethodSelector::DecompGaussian { rho: None }] {
            let p = build_program(&inst, &m).unwrap().build().unwrap();
            let sol = solve(&p, &SolverOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal, "{m}");
            assert!((sol.objective - base).abs() <= 1e-5 * base, "{m}: {} vs {base}", sol.objective);
        }
    }

    #[test]
    fn method_model_mismatch_rejected() {
        let inst = single_user(vec![c64(1.0, 0.0)], ErrorModel::uniform(1, 0.02));
        assert!(build_program(&inst, &MethodSelector::Bernstein { rho: None }).is_err());
        let g = single_user(vec![c64(1.0, 0.0)], ErrorModel::gaussian_correlated(1, 1, 0.01, 0.0));
        assert!(build_program(&g, &MethodSelector::DecompBounded { rho: None }).is_err());
        assert!(build_program(&g, &MethodSelector::Bernstein { rho: Some(1.0) }).is_err());
    }

    #[test]
    fn method_names_roundtrip() {
        for m in [
            MethodSelector::SphereBounding { radius: None },
            MethodSelector::Bernstein { rho: None },
            MethodSelector::DecompGaussian { rho: None },
            MethodSelector::DecompBounded { rho: None },
            MethodSelector::NonRobust,
        ] {
            assert_eq!(m.name().parse::<MethodSelector>().unwrap(), m);
        }
        assert!("method5".parse::<MethodSelector>().is_err());
    }
}

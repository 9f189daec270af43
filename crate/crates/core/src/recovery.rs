//! From relaxed matrix solutions back to beamforming vectors.
//!
//! A relaxed solution whose matrices are all (numerically) rank one gives
//! its beamformers directly through the dominant eigenpair. Otherwise
//! candidate directions are drawn from `CN(0, W_i)` and the powers along
//! them are re-optimized under the same restriction; the cheapest feasible
//! round wins.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conic::{solve, AffineExpr, ComplexAffine, HermAffine, ProgramBuilder, SolveStatus, SolverOptions, VarName};
use crate::error::{Error, Result};
use crate::model::{standard_cn, BeamformerSet, BeamformingInstance};
use crate::numerics::{hermitian_eig, norm_sqr, HermitianMatrix};
use crate::restriction::{add_restriction, build_program, MethodSelector, SdrProgram};
use crate::rng::{stream, Purpose};

/// Smallest `λ_max / tr` accepted as rank one.
pub const RANK_ONE_THRESHOLD: f64 = 0.99;

/// Solution of a relaxed and restricted problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RarSolution {
    pub w: Vec<HermitianMatrix>,
    /// `Σ tr W_i`.
    pub objective: f64,
    pub status: SolveStatus,
    /// `λ_max(W_i) / tr(W_i)` per user.
    pub rank_ratios: Vec<f64>,
    pub method: MethodSelector,
    pub iterations: usize,
}

impl RarSolution {
    pub fn from_matrices(w: Vec<HermitianMatrix>, status: SolveStatus, method: MethodSelector, iterations: usize) -> Result<Self> {
        let rank_ratios = w.iter().map(rank_ratio).collect::<Result<_>>()?;
        let objective = w.iter().map(|m| m.trace()).sum();
        Ok(Self { w, objective, status, rank_ratios, method, iterations })
    }

    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn k(&self) -> usize {
        self.w.len()
    }
}

/// Builds and solves the relaxed program for `method`.
pub fn solve_rar(inst: &BeamformingInstance, method: &MethodSelector, opts: &SolverOptions) -> Result<RarSolution> {
    let prog = build_program(inst, method)?;
    let w_maps = prog.w.clone();
    let sol = solve(&prog.build()?, opts)?;
    let w = if sol.status == SolveStatus::Optimal {
        w_maps.iter().map(|m| m.eval(&sol.x)).collect()
    } else {
        vec![HermitianMatrix::zeros(inst.n_t()); inst.k()]
    };
    RarSolution::from_matrices(w, sol.status, *method, sol.iterations)
}

/// `λ_max / tr` over the nonnegative part of the spectrum; a zero matrix
/// counts as rank one.
pub fn rank_ratio(w: &HermitianMatrix) -> Result<f64> {
    let e = hermitian_eig(w)?;
    let total: f64 = e.values.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return Ok(1.0);
    }
    Ok(e.max_value().max(0.0) / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub rank_one: bool,
    pub ratios: Vec<f64>,
}

pub fn rank_one_check(sol: &RarSolution) -> RankCheck {
    RankCheck { rank_one: sol.rank_ratios.iter().all(|&r| r >= RANK_ONE_THRESHOLD), ratios: sol.rank_ratios.clone() }
}

/// Rotates `v` so its first non-negligible entry is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let big = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if big == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-9 * big) {
        let rot = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

/// Dominant scaled eigenvector of each `W_i`.
pub fn extract_beamformers(sol: &RarSolution) -> Result<BeamformerSet> {
    let check = rank_one_check(sol);
    if !check.rank_one {
        let worst = check.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(Error::Invalid(format!(
            "solution is not rank one (smallest ratio {worst:.4}); use Gaussian randomization"
        )));
    }
    let beams = sol
        .w
        .iter()
        .map(|m| {
            let e = hermitian_eig(m)?;
            let lmax = e.max_value().max(0.0);
            let mut v = e.vector(e.n() - 1);
            fix_phase(&mut v);
            let s = lmax.sqrt();
            Ok(v.into_iter().map(|z| z * s).collect())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    BeamformerSet::new(beams)
}

/// Minimum-power allocation along fixed unit directions: the method's
/// constraints with `W_i = p_i u_i u_i^H`. `None` when the solver does not
/// report an optimum.
pub fn power_allocation(
    dirs: &[Vec<Complex64>],
    inst: &BeamformingInstance,
    method: &MethodSelector,
    opts: &SolverOptions,
) -> Result<Option<Vec<f64>>> {
    if dirs.len() != inst.k() || dirs.iter().any(|u| u.len() != inst.n_t()) {
        return Err(Error::Dimension("directions do not match the instance shape".into()));
    }
    if let Some(u) = dirs.iter().find(|u| (norm_sqr(u) - 1.0).abs() > 1e-9) {
        return Err(Error::Invalid(format!("direction has squared norm {}, expected 1", norm_sqr(u))));
    }
    let n = inst.n_t();
    let mut b = ProgramBuilder::new();
    let mut w = Vec::with_capacity(dirs.len());
    let mut vars = Vec::with_capacity(dirs.len());
    for (user, u) in dirs.iter().enumerate() {
        let p = b.add_var(VarName::Power { user });
        b.add_objective(&AffineExpr::var(p));
        b.add_nonneg(vec![AffineExpr::var(p)]);
        w.push(HermAffine::from_lower(n, |r, c| {
            let z = u[r] * u[c].conj();
            let im = if r == c { AffineExpr::zero() } else { AffineExpr::term(p, z.im) };
            ComplexAffine { re: AffineExpr::term(p, z.re), im }
        }));
        vars.push(p);
    }
    let mut prog = SdrProgram::from_parts(b, w);
    add_restriction(&mut prog, inst, method)?;
    let sol = solve(&prog.build()?, opts)?;
    if sol.status != SolveStatus::Optimal {
        return Ok(None);
    }
    Ok(Some(vars.iter().map(|&v| sol.x[v].max(0.0)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizationOptions {
    /// Number of rounds `L`.
    pub rounds: usize,
    pub seed: u64,
    pub trial: u64,
    /// Redraws allowed for an all-zero draw before the round is skipped.
    pub max_redraws: usize,
}

impl Default for RandomizationOptions {
    fn default() -> Self {
        Self { rounds: 100, seed: 0, trial: 0, max_redraws: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Randomized {
    pub beamformers: BeamformerSet,
    pub powers: Vec<f64>,
    pub objective: f64,
    pub best_round: usize,
    pub feasible_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RandomizationOutcome {
    Feasible(Randomized),
    Infeasible { rounds: usize },
}

/// Unit directions for one round, or `None` if some user kept drawing zero.
fn draw_directions(factors: &[Vec<(f64, Vec<Complex64>)>], ropts: &RandomizationOptions, round: usize) -> Option<Vec<Vec<Complex64>>> {
    factors
        .iter()
        .enumerate()
        .map(|(user, modes)| {
            let key = ((round as u64) << 32) | user as u64;
            let mut rng = stream(ropts.seed, ropts.trial, key, Purpose::Randomization);
            let n = modes.first().map_or(0, |m| m.1.len());
            for _ in 0..=ropts.max_redraws {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                for (s, dir) in modes {
                    let z = standard_cn(&mut rng) * *s;
                    v.iter_mut().zip(dir).for_each(|(a, d)| *a += d * z);
                }
                let norm = norm_sqr(&v).sqrt();
                if norm > 0.0 && norm.is_finite() {
                    return Some(v.into_iter().map(|z| z / norm).collect());
                }
            }
            None
        })
        .collect()
}

/// Gaussian randomization with power re-optimization. Round `ℓ` of user
/// `i` draws from its own stream, so the first `L` rounds are the same
/// for every larger `L`.
pub fn gaussian_randomization(
    sol: &RarSolution,
    inst: &BeamformingInstance,
    method: &MethodSelector,
    ropts: &RandomizationOptions,
    opts: &SolverOptions,
) -> Result<RandomizationOutcome> {
    if ropts.rounds == 0 {
        return Err(Error::Invalid("randomization needs at least one round".into()));
    }
    if sol.k() != inst.k() {
        return Err(Error::Dimension("solution does not match the instance".into()));
    }
    // W_i = Σ λ_k v_k v_k^H, so Σ √λ_k z_k v_k ~ CN(0, W_i)
    let factors = sol
        .w
        .iter()
        .map(|m| {
            let e = hermitian_eig(m)?;
            Ok((0..e.n()).filter(|&k| e.values[k] > 0.0).map(|k| (e.values[k].sqrt(), e.vector(k))).collect())
        })
        .collect::<Result<Vec<Vec<(f64, Vec<Complex64>)>>>>()?;

    let round = |l: usize| -> Result<Option<(f64, Vec<f64>, Vec<Vec<Complex64>>)>> {
        let Some(dirs) = draw_directions(&factors, ropts, l) else {
            return Ok(None);
        };
        Ok(power_allocation(&dirs, inst, method, opts)?.map(|p| (p.iter().sum(), p, dirs)))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        (0..ropts.rounds).into_par_iter().map(round).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = (0..ropts.rounds).map(round).collect::<Result<_>>()?;

    let feasible_rounds = results.iter().filter(|r| r.is_some()).count();
    let mut best: Option<(usize, &(f64, Vec<f64>, Vec<Vec<Complex64>>))> = None;
    for (l, r) in results.iter().enumerate() {
        if let Some(cand) = r {
            if best.is_none_or(|(_, b)| cand.0 < b.0) {
                best = Some((l, cand));
            }
        }
    }
    let Some((best_round, (objective, powers, dirs))) = best else {
        return Ok(RandomizationOutcome::Infeasible { rounds: ropts.rounds });
    };
    let beams = dirs.iter().zip(powers).map(|(u, p)| u.iter().map(|z| z * p.sqrt()).collect()).collect();
    Ok(RandomizationOutcome::Feasible(Randomized {
        beamformers: BeamformerSet::new(beams)?,
        powers: powers.clone(),
        objective: *objective,
        best_round,
        feasible_rounds,
    }))
}

/// Which route produced the beamformers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryPath {
    RankOne,
    Randomization,
}

/// Rank-one extraction when possible, randomization otherwise. `None` if
/// the relaxation was not solved or no round was feasible.
pub fn recover(
    sol: &RarSolution,
    inst: &BeamformingInstance,
    ropts: &RandomizationOptions,
    opts: &SolverOptions,
) -> Result<Option<(BeamformerSet, RecoveryPath)>> {
    if !sol.is_feasible() {
        return Ok(None);
    }
    if rank_one_check(sol).rank_one {
        return Ok(Some((extract_beamformers(sol)?, RecoveryPath::RankOne)));
    }
    Ok(match gaussian_randomization(sol, inst, &sol.method, ropts, opts)? {
        RandomizationOutcome::Feasible(r) => Some((r.beamformers, RecoveryPath::Randomization)),
        RandomizationOutcome::Infeasible { .. } => None,
    })
}

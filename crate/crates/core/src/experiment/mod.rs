//! Monte Carlo validation, the end-to-end design pipeline, bisection
//! refinement and the sweep/histogram/benchmark protocols.

mod bisect;
mod output;
mod sweeps;

pub use bisect::{bisection_refine, BisectionOptions, BisectionOutcome, BisectionStep};
pub use output::{bench_csv, histogram_csv, sweep_csv, validation_csv};
pub use sweeps::{
    bench_runtime, feasibility_sweep, feasibility_table, histogram_satisfaction, histogram_table, power_sweep, power_table,
    run_grid, BenchRow, Cell, CellSummary, HistRow, SweepRow,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::conic::{SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{sinr_unchecked, BeamformerSet, BeamformingInstance, ErrorSampler, InstanceParams};
use crate::recovery::{recover, solve_rar, RandomizationOptions, RarSolution, RecoveryPath};
use crate::restriction::MethodSelector;
use crate::rng::{stream, Purpose};

/// Relative slack on the SINR target, absorbing the solver tolerance of
/// designs that meet their constraints with equality.
pub const SINR_RELATIVE_TOLERANCE: f64 = 1e-5;

/// Empirical per-user probability that the SINR target is met.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub p_hat: Vec<f64>,
    pub samples: usize,
    /// `3·√(p̂(1−p̂)/N)`.
    pub radius: Vec<f64>,
    /// `p̂_i ≥ 1 − ρ_i − radius_i`.
    pub pass: Vec<bool>,
    pub rho: Vec<f64>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }

    /// Point-estimate rule: `p̂_i ≥ 1 − ρ_i` for every user.
    pub fn meets_target(&self) -> bool {
        self.p_hat.iter().zip(&self.rho).all(|(p, r)| *p >= 1.0 - r)
    }

    pub fn min_p_hat(&self) -> f64 {
        self.p_hat.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn records(&self, trial: usize) -> Vec<ValidationRecord> {
        (0..self.p_hat.len())
            .map(|user| ValidationRecord {
                trial,
                user,
                p_hat: self.p_hat[user],
                radius: self.radius[user],
                pass: self.pass[user],
            })
            .collect()
    }
}

/// One CSV row of a validation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub trial: usize,
    pub user: usize,
    pub p_hat: f64,
    pub radius: f64,
    pub pass: bool,
}

/// Estimates `Prob{SINR_i ≥ γ_i}` for every user from `samples` error
/// draws. User `i` reads the `(seed, trial, i)` validation stream.
pub fn validate_mc(w: &BeamformerSet, inst: &BeamformingInstance, samples: usize, seed: u64, trial: u64) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::Invalid("validation needs at least one sample".into()));
    }
    if w.k() != inst.k() || w.n_t() != inst.n_t() {
        return Err(Error::Dimension("beamformers do not match the instance".into()));
    }
    let sampler = ErrorSampler::new(inst.error_model(), inst.n_t())?;
    let n = inst.n_t();
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    let mut p_hat = Vec::with_capacity(inst.k());
    for i in 0..inst.k() {
        let mut rng = stream(seed, trial, i as u64, Purpose::Validation);
        let (hbar, sigma2) = (inst.channel(i), inst.noise(i));
        let gamma = inst.gamma(i) * (1.0 - SINR_RELATIVE_TOLERANCE);
        let mut hits = 0usize;
        for _ in 0..samples {
            sampler.sample_into(i, &mut rng, &mut e);
            for t in 0..n {
                h[t] = hbar[t] + e[t];
            }
            if sinr_unchecked(w.beams(), i, &h, sigma2) >= gamma {
                hits += 1;
            }
        }
        p_hat.push(hits as f64 / samples as f64);
    }
    let rho: Vec<f64> = (0..inst.k()).map(|i| inst.rho(i)).collect();
    let radius: Vec<f64> = p_hat.iter().map(|p| 3.0 * (p * (1.0 - p) / samples as f64).sqrt()).collect();
    let pass = (0..inst.k()).map(|i| p_hat[i] >= 1.0 - rho[i] - radius[i]).collect();
    Ok(ValidationReport { p_hat, samples, radius, pass, rho })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub solver: SolverOptions,
    /// Rounds of Gaussian randomization when the relaxation is not rank one.
    pub rounds: usize,
    /// Validation draws per user; 0 skips validation.
    pub samples: usize,
    pub seed: u64,
    pub trial: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), rounds: 100, samples: 10_000, seed: 0, trial: 0 }
    }
}

/// Where an infeasible outcome was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Relaxation,
    Recovery,
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub solve: f64,
    pub recovery: f64,
    pub validation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub method: MethodSelector,
    pub feasible: bool,
    /// Set when infeasible.
    pub failed_at: Option<Stage>,
    pub rar: RarSolution,
    pub path: Option<RecoveryPath>,
    pub beamformers: Option<BeamformerSet>,
    pub total_power: Option<f64>,
    pub validation: Option<ValidationReport>,
    pub timings: StageTimings,
}

impl PipelineOutcome {
    pub fn status(&self) -> SolveStatus {
        self.rar.status
    }
}

/// Solve, rank check, extraction or randomization, validation.
pub fn run_pipeline(inst: &BeamformingInstance, method: &MethodSelector, opts: &PipelineOptions) -> Result<PipelineOutcome> {
    let t0 = Instant::now();
    let rar = solve_rar(inst, method, &opts.solver)?;
    let mut timings = StageTimings { solve: t0.elapsed().as_secs_f64(), ..Default::default() };
    let mut out = PipelineOutcome {
        method: *method,
        feasible: false,
        failed_at: Some(Stage::Relaxation),
        rar,
        path: None,
        beamformers: None,
        total_power: None,
        validation: None,
        timings,
    };
    if !out.rar.is_feasible() {
        return Ok(out);
    }

    let t1 = Instant::now();
    let ropts = RandomizationOptions { rounds: opts.rounds, seed: opts.seed, trial: opts.trial, ..Default::default() };
    let recovered = recover(&out.rar, inst, &ropts, &opts.solver)?;
    timings.recovery = t1.elapsed().as_secs_f64();
    out.timings = timings;
    let Some((w, path)) = recovered else {
        out.failed_at = Some(Stage::Recovery);
        return Ok(out);
    };

    if opts.samples > 0 {
        let t2 = Instant::now();
        out.validation = Some(validate_mc(&w, inst, opts.samples, opts.seed, opts.trial)?);
        out.timings.validation = t2.elapsed().as_secs_f64();
    }
    out.feasible = true;
    out.failed_at = None;
    out.path = Some(path);
    out.total_power = Some(w.total_power());
    out.beamformers = Some(w);
    Ok(out)
}

/// Everything an experiment protocol needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Instance generator; its `gamma_db` is replaced by each grid value.
    pub instance: InstanceParams,
    pub gamma_grid_db: Vec<f64>,
    pub methods: Vec<MethodSelector>,
    pub trials: usize,
    /// Validation draws per user.
    pub samples: usize,
    pub seed: u64,
    /// Target at which the common-feasible trial set is fixed.
    pub pickup_gamma_db: Option<f64>,
    pub rounds: usize,
    pub bin_width: f64,
    pub warmup: usize,
    /// Antenna counts (`N_t = K`) for runtime benchmarks; empty means the
    /// instance size only.
    pub bench_sizes: Vec<usize>,
    pub bisection: Option<BisectionOptions>,
    pub solver: SolverOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceParams {
                n_t: 3,
                k: 3,
                sigma2: 0.1,
                gamma_db: 11.0,
                rho: 0.1,
                errors: crate::model::ErrorSpec::Gaussian { sigma_e2: 0.002, correlation: 0.0 },
            },
            gamma_grid_db: vec![3.0, 7.0, 11.0, 15.0],
            methods: MethodSelector::ALL_GAUSSIAN.to_vec(),
            trials: 100,
            samples: 5_000,
            seed: 0,
            pickup_gamma_db: Some(11.0),
            rounds: 100,
            bin_width: 0.05,
            warmup: 1,
            bench_sizes: vec![],
            bisection: None,
            solver: SolverOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_grid_db.is_empty() {
            return Err(Error::Invalid("gamma grid is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Invalid("method list is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::Invalid("samples must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Invalid("randomization rounds must be at least 1".into()));
        }
        if !(self.bin_width > 0.0 && self.bin_width < 1.0) {
            return Err(Error::Domain(format!("bin width must lie in (0, 1), got {}", self.bin_width)));
        }
        if self.gamma_grid_db.iter().chain(&self.pickup_gamma_db).any(|g| !g.is_finite()) {
            return Err(Error::Invalid("gamma values must be finite".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        if let Some(b) = &self.bisection {
            b.validate()?;
        }
        // surfaces bad generator parameters before any trial runs
        self.instance.generate(self.seed, 0)?;
        Ok(())
    }

    pub fn pipeline_options(&self, trial: usize, samples: usize) -> PipelineOptions {
        PipelineOptions { solver: self.solver.clone(), rounds: self.rounds, samples, seed: self.seed, trial: trial as u64 }
    }

    /// Trial `trial` of the generator with every target set to `gamma_db`.
    pub fn instance_at(&self, gamma_db: f64, trial: usize) -> Result<BeamformingInstance> {
        InstanceParams { gamma_db, ..self.instance.clone() }.generate(self.seed, trial as u64)
    }
}

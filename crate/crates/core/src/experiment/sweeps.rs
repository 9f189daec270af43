use serde::{Deserialize, Serialize};
use web_time::Instant;

use super::{run_pipeline, ExperimentConfig, ValidationReport};
use crate::conic::{solve, SolveStatus};
use crate::error::{Error, Result};
use crate::recovery::{RecoveryPath, RANK_ONE_THRESHOLD};
use crate::restriction::{build_program, MethodSelector};

/// One `(γ, trial, method)` pipeline run, stripped to what the protocols use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub gamma_db: f64,
    pub trial: usize,
    pub method: MethodSelector,
    pub summary: CellSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub status: SolveStatus,
    pub feasible: bool,
    pub path: Option<RecoveryPath>,
    pub total_power: Option<f64>,
    /// `Σ tr W_i` of the relaxation.
    pub relaxed_power: f64,
    pub min_rank_ratio: f64,
    pub validation: Option<ValidationReport>,
    pub solve_seconds: f64,
}

impl CellSummary {
    pub fn rank_one(&self) -> bool {
        self.min_rank_ratio >= RANK_ONE_THRESHOLD
    }
}

/// Runs the pipeline on every `(γ, trial, method)`, in that nesting order.
/// `samples = 0` skips validation.
pub fn run_grid(config: &ExperimentConfig, gammas: &[f64], methods: &[MethodSelector], samples: usize) -> Result<Vec<Cell>> {
    config.validate()?;
    let mut jobs = Vec::with_capacity(gammas.len() * config.trials * methods.len());
    for &g in gammas {
        for trial in 0..config.trials {
            for m in methods {
                jobs.push((g, trial, *m));
            }
        }
    }
    let run = |&(gamma_db, trial, method): &(f64, usize, MethodSelector)| -> Result<Cell> {
        let inst = config.instance_at(gamma_db, trial)?;
        let o = run_pipeline(&inst, &method, &config.pipeline_options(trial, samples))?;
        let summary = CellSummary {
            status: o.status(),
            feasible: o.feasible,
            path: o.path,
            total_power: o.total_power,
            relaxed_power: o.rar.objective,
            min_rank_ratio: o.rar.rank_ratios.iter().cloned().fold(1.0, f64::min),
            validation: o.validation,
            solve_seconds: o.timings.solve,
        };
        Ok(Cell { gamma_db, trial, method, summary })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(run).collect()
    }
}

/// Row of a `(method, γ) → value` table. `value` is `None` when the cell
/// has no trials to average over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub gamma_db: f64,
    pub value: Option<f64>,
    pub n_trials: usize,
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn distinct_methods(cells: &[Cell]) -> Vec<MethodSelector> {
    let mut out: Vec<MethodSelector> = Vec::new();
    for c in cells {
        if !out.contains(&c.method) {
            out.push(c.method);
        }
    }
    out
}

/// Fraction of feasible trials per `(method, γ)`.
pub fn feasibility_table(cells: &[Cell]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for m in distinct_methods(cells) {
        for g in distinct(cells.iter().map(|c| c.gamma_db)) {
            let sel: Vec<&Cell> = cells.iter().filter(|c| c.method == m && c.gamma_db == g).collect();
            let ok = sel.iter().filter(|c| c.summary.feasible).count();
            let value = (!sel.is_empty()).then(|| ok as f64 / sel.len() as f64);
            rows.push(SweepRow { method: m.name().to_string(), gamma_db: g, value, n_trials: sel.len() });
        }
    }
    rows
}

pub fn feasibility_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    Ok(feasibility_table(&run_grid(config, &config.gamma_grid_db, &config.methods, 0)?))
}

/// Mean total power per `(method, γ)` over the trials where every method is
/// feasible, both at `pickup_db` and at that `γ`. `n_trials` is the size of
/// that set.
pub fn power_table(cells: &[Cell], pickup_db: f64) -> Vec<SweepRow> {
    let methods = distinct_methods(cells);
    let all_feasible = |g: f64, trial: usize| {
        methods.iter().all(|m| {
            cells.iter().any(|c| c.gamma_db == g && c.trial == trial && c.method == *m && c.summary.feasible)
        })
    };
    let trials = distinct(cells.iter().map(|c| c.trial as f64));
    let common: Vec<usize> = trials.iter().map(|&t| t as usize).filter(|&t| all_feasible(pickup_db, t)).collect();
    let mut rows = Vec::new();
    for m in &methods {
        for g in distinct(cells.iter().map(|c| c.gamma_db)) {
            let set: Vec<usize> = common.iter().copied().filter(|&t| all_feasible(g, t)).collect();
            let powers: Vec<f64> = set
                .iter()
                .filter_map(|&t| cells.iter().find(|c| c.gamma_db == g && c.trial == t && c.method == *m))
                .filter_map(|c| c.summary.total_power)
                .collect();
            let value = (!powers.is_empty()).then(|| powers.iter().sum::<f64>() / powers.len() as f64);
            rows.push(SweepRow { method: m.name().to_string(), gamma_db: g, value, n_trials: set.len() });
        }
    }
    rows
}

pub fn power_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let pickup = config
        .pickup_gamma_db
        .ok_or_else(|| Error::Invalid("power sweep needs a pick-up gamma".into()))?;
    let mut gammas = config.gamma_grid_db.clone();
    if !gammas.contains(&pickup) {
        gammas.push(pickup);
    }
    let cells = run_grid(config, &gammas, &config.methods, 0)?;
    let rows = power_table(&cells, pickup);
    Ok(rows.into_iter().filter(|r| config.gamma_grid_db.contains(&r.gamma_db)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistRow {
    pub method: String,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
}

/// Per method, counts of the per-trial minimum over users of `p̂`, for the
/// feasible validated cells. The top bin is closed at 1.
pub fn histogram_table(cells: &[Cell], bin_width: f64) -> Vec<HistRow> {
    let bins = (1.0 / bin_width).ceil() as usize;
    let mut rows = Vec::new();
    for m in distinct_methods(cells) {
        let mut counts = vec![0usize; bins];
        for c in cells.iter().filter(|c| c.method == m && c.summary.feasible) {
            if let Some(v) = &c.summary.validation {
                let p = v.min_p_hat();
                counts[((p / bin_width).floor() as usize).min(bins - 1)] += 1;
            }
        }
        for (b, count) in counts.into_iter().enumerate() {
            rows.push(HistRow {
                method: m.name().to_string(),
                bin_lo: b as f64 * bin_width,
                bin_hi: ((b + 1) as f64 * bin_width).min(1.0),
                count,
            });
        }
    }
    rows
}

/// Histogram at the pick-up `γ` (or the first grid value).
pub fn histogram_satisfaction(config: &ExperimentConfig) -> Result<Vec<HistRow>> {
    let g = config.pickup_gamma_db.unwrap_or(config.gamma_grid_db[0]);
    let cells = run_grid(config, &[g], &config.methods, config.samples)?;
    Ok(histogram_table(&cells, config.bin_width))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub n_t: usize,
    pub k: usize,
    pub runs: usize,
    pub median_seconds: f64,
    pub iqr_seconds: f64,
    pub num_vars: usize,
    pub num_rows: usize,
    pub zero_blocks: usize,
    pub nonneg_blocks: usize,
    pub soc_blocks: usize,
    pub psd_blocks: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Solve times of the relaxed program, one run per trial after `warmup`
/// discarded runs, at every size in `bench_sizes` with `N_t = K`.
/// Sequential so that runs do not compete for cores.
pub fn bench_runtime(config: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    if config.warmup == 0 {
        return Err(Error::Invalid("benchmarks need at least one warm-up run".into()));
    }
    let sizes = if config.bench_sizes.is_empty() { vec![config.instance.n_t] } else { config.bench_sizes.clone() };
    let gamma = config.pickup_gamma_db.unwrap_or(config.gamma_grid_db[0]);
    let mut rows = Vec::new();
    for &n in &sizes {
        let mut cfg = config.clone();
        cfg.instance.n_t = n;
        cfg.instance.k = n;
        for m in &config.methods {
            let first = build_program(&cfg.instance_at(gamma, 0)?, m)?.build()?;
            for _ in 0..config.warmup {
                solve(&first, &config.solver)?;
            }
            let mut times = Vec::with_capacity(config.trials);
            for trial in 0..config.trials {
                let inst = cfg.instance_at(gamma, trial)?;
                let t0 = Instant::now();
                let p = build_program(&inst, m)?.build()?;
                solve(&p, &config.solver)?;
                times.push(t0.elapsed().as_secs_f64());
            }
            times.sort_by(f64::total_cmp);
            let [zero_blocks, nonneg_blocks, soc_blocks, psd_blocks] = first.block_counts();
            rows.push(BenchRow {
                method: m.name().to_string(),
                n_t: n,
                k: n,
                runs: times.len(),
                median_seconds: quantile(&times, 0.5),
                iqr_seconds: quantile(&times, 0.75) - quantile(&times, 0.25),
                num_vars: first.num_vars(),
                num_rows: first.num_rows(),
                zero_blocks,
                nonneg_blocks,
                soc_blocks,
                psd_blocks,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    fn cell(g: f64, trial: usize, m: MethodSelector, power: Option<f64>, p_min: Option<f64>) -> Cell {
        Cell {
            gamma_db: g,
            trial,
            method: m,
            summary: CellSummary {
                status: SolveStatus::Optimal,
                feasible: power.is_some(),
                path: None,
                total_power: power,
                relaxed_power: power.unwrap_or(0.0),
                min_rank_ratio: 1.0,
                validation: p_min.map(|p| ValidationReport {
                    p_hat: vec![p, 1.0],
                    samples: 10,
                    radius: vec![0.0; 2],
                    pass: vec![true; 2],
                    rho: vec![0.1; 2],
                }),
                solve_seconds: 0.0,
            },
        }
    }

    #[test]
    fn tables_from_synthetic_cells() {
        let a = MethodSelector::NonRobust;
        let b = MethodSelector::Bernstein { rho: None };
        let cells = vec![
            cell(3.0, 0, a, Some(1.0), Some(0.3)),
            cell(3.0, 0, b, Some(2.0), Some(1.0)),
            cell(3.0, 1, a, Some(3.0), Some(0.95)),
            cell(3.0, 1, b, None, None),
        ];
        let f = feasibility_table(&cells);
        assert_eq!(f[0].value, Some(1.0));
        assert_eq!(f[1].value, Some(0.5));
        let p = power_table(&cells, 3.0);
        assert_eq!(p[0], SweepRow { method: "nonrobust".into(), gamma_db: 3.0, value: Some(1.0), n_trials: 1 });
        assert_eq!(p[1].value, Some(2.0));
        let empty = power_table(&cells[2..], 3.0);
        assert!(empty.iter().all(|r| r.value.is_none() && r.n_trials == 0));
        let h = histogram_table(&cells, 0.25);
        assert_eq!(h.len(), 8);
        let counts: Vec<usize> = h.iter().map(|r| r.count).collect();
        assert_eq!(counts, vec![0, 1, 0, 1, 0, 0, 0, 1]);
        assert_eq!(h[3].bin_hi, 1.0);
    }
}

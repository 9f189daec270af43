use rarbf::conic::SolveStatus;
use rarbf::experiment::{
    bench_runtime, bisection_refine, feasibility_sweep, histogram_table, power_table, run_grid, run_pipeline, validate_mc,
    BisectionOptions, ExperimentConfig, PipelineOptions, PipelineOutcome, Stage, StageTimings,
};
use rarbf::model::{BeamformerSet, BeamformingInstance, ErrorModel, ErrorSpec, InstanceParams};
use rarbf::numerics::c64;
use rarbf::restriction::MethodSelector;

fn desk(gamma_db: f64, sigma_e2: f64) -> InstanceParams {
    InstanceParams { n_t: 3, k: 3, sigma2: 0.1, gamma_db, rho: 0.1, errors: ErrorSpec::Gaussian { sigma_e2, correlation: 0.0 } }
}

fn small_config(trials: usize) -> ExperimentConfig {
    ExperimentConfig { trials, samples: 2_000, rounds: 20, ..ExperimentConfig::default() }
}

#[test]
fn boundary_target_is_met_half_the_time() {
    // SINR = |1 + e|² / σ², target equal to the nominal value: to first order
    // the event is Re e ≥ 0, which has probability 1/2
    let n = 10_000;
    let inst = BeamformingInstance::new(
        vec![vec![c64(1.0, 0.0)]],
        vec![0.1],
        vec![10.0],
        vec![0.1],
        ErrorModel::gaussian_correlated(1, 1, 1e-6, 0.0),
    )
    .unwrap();
    let w = BeamformerSet::new(vec![vec![c64(1.0, 0.0)]]).unwrap();
    let r = validate_mc(&w, &inst, n, 3, 0).unwrap();
    assert!((r.p_hat[0] - 0.5).abs() <= 3.0 / (n as f64).sqrt(), "{}", r.p_hat[0]);
}

#[test]
fn extreme_target_is_reported_infeasible() {
    let inst = desk(60.0, 0.1).generate(1, 0).unwrap();
    for m in [MethodSelector::SphereBounding { radius: None }, MethodSelector::Bernstein { rho: None }] {
        let o = run_pipeline(&inst, &m, &PipelineOptions { samples: 100, ..Default::default() }).unwrap();
        assert!(!o.feasible);
        assert_eq!(o.failed_at, Some(Stage::Relaxation));
        assert_ne!(o.status(), SolveStatus::Optimal);
        assert!(o.beamformers.is_none() && o.validation.is_none());
    }
}

#[test]
fn zero_covariance_sphere_equals_nonrobust() {
    let inst = desk(7.0, 0.0).generate(4, 1).unwrap();
    let opts = PipelineOptions { samples: 500, ..Default::default() };
    let a = run_pipeline(&inst, &MethodSelector::SphereBounding { radius: None }, &opts).unwrap();
    let b = run_pipeline(&inst, &MethodSelector::NonRobust, &opts).unwrap();
    let (pa, pb) = (a.rar.objective, b.rar.objective);
    assert!((pa - pb).abs() <= 1e-5 * pb, "{pa} vs {pb}");
    // no randomness in the channel: the design meets its targets surely
    assert_eq!(b.validation.unwrap().p_hat, vec![1.0; 3]);
}

fn without_timings(mut o: PipelineOutcome) -> PipelineOutcome {
    o.timings = StageTimings::default();
    o
}

#[test]
fn pipeline_is_reproducible() {
    let inst = desk(11.0, 0.002).generate(8, 3).unwrap();
    let opts = PipelineOptions { samples: 1_000, seed: 8, trial: 3, ..Default::default() };
    let m = MethodSelector::Bernstein { rho: None };
    let a = without_timings(run_pipeline(&inst, &m, &opts).unwrap());
    let b = without_timings(run_pipeline(&inst, &m, &opts).unwrap());
    assert_eq!(a, b);
}

#[test]
fn bisection_zero_iterations_returns_nominal() {
    let inst = desk(9.0, 0.002).generate(5, 0).unwrap();
    let m = MethodSelector::SphereBounding { radius: None };
    let popts = PipelineOptions { seed: 5, ..Default::default() };
    let b = bisection_refine(&inst, &m, &BisectionOptions { iters: 0, samples: 2_000, rho_max: 0.9 }, &popts).unwrap();
    let nominal = run_pipeline(&inst, &m, &PipelineOptions { samples: 2_000, ..popts }).unwrap();
    assert!(b.steps.is_empty());
    assert_eq!(b.method, m);
    assert_eq!(without_timings(b.design), without_timings(nominal));
    assert!(bisection_refine(&inst, &MethodSelector::NonRobust, &BisectionOptions::default(), &PipelineOptions::default()).is_err());
}

#[test]
fn bisection_lowers_power_of_conservative_design() {
    let mut improved = 0;
    for trial in 0..3 {
        let inst = desk(9.0, 0.002).generate(21, trial).unwrap();
        let m = MethodSelector::SphereBounding { radius: None };
        let popts = PipelineOptions { seed: 21, trial, ..Default::default() };
        let b = bisection_refine(&inst, &m, &BisectionOptions { iters: 5, samples: 10_000, rho_max: 0.9 }, &popts).unwrap();
        let Some(nominal) = b.nominal_power else { continue };
        assert!(!b.nominal_failed, "sphere design should be conservative");
        assert!(b.nominal_knob > 0.0 && b.knob < b.nominal_knob);
        let refined = b.total_power().unwrap();
        assert!(refined <= nominal + 1e-9);
        assert!(b.design.validation.as_ref().unwrap().meets_target());
        if refined < nominal {
            improved += 1;
        }
    }
    assert!(improved >= 1);
}

#[test]
fn bisection_flags_loosest_bound() {
    let inst = desk(7.0, 0.002).generate(2, 0).unwrap();
    let m = MethodSelector::Bernstein { rho: None };
    let bopts = BisectionOptions { iters: 3, samples: 5_000, rho_max: 0.11 };
    let b = bisection_refine(&inst, &m, &bopts, &PipelineOptions { seed: 2, ..Default::default() }).unwrap();
    assert!(b.bound_hit);
    assert_eq!(b.knob, 0.11);
    assert_eq!(b.steps.len(), 1);
}

#[test]
fn easy_targets_are_always_feasible_and_zero_trials_rejected() {
    let cfg = ExperimentConfig {
        instance: desk(-20.0, 0.002),
        gamma_grid_db: vec![-20.0],
        methods: vec![MethodSelector::Bernstein { rho: None }, MethodSelector::DecompGaussian { rho: None }],
        ..small_config(5)
    };
    for row in feasibility_sweep(&cfg).unwrap() {
        assert_eq!(row.value, Some(1.0), "{row:?}");
    }
    assert!(feasibility_sweep(&ExperimentConfig { trials: 0, ..cfg }).is_err());
}

#[test]
fn sweep_tables_monotone_and_ordered() {
    let cfg = ExperimentConfig { gamma_grid_db: vec![3.0, 7.0, 11.0], ..small_config(12) };
    let cells = run_grid(&cfg, &cfg.gamma_grid_db, &cfg.methods, 0).unwrap();
    let find = |g: f64, t: usize, m: MethodSelector| cells.iter().find(|c| c.gamma_db == g && c.trial == t && c.method == m).unwrap();
    for t in 0..cfg.trials {
        for m in &cfg.methods {
            // a harder target never turns an infeasible trial feasible or lowers power
            for w in cfg.gamma_grid_db.windows(2) {
                let (a, b) = (&find(w[0], t, *m).summary, &find(w[1], t, *m).summary);
                assert!(a.feasible || !b.feasible, "{m} trial {t}");
                if a.feasible && b.feasible {
                    assert!(b.relaxed_power >= a.relaxed_power * (1.0 - 1e-5));
                }
            }
            // robust designs satisfy the nominal constraints too
            for &g in &cfg.gamma_grid_db {
                let nr = &find(g, t, MethodSelector::NonRobust).summary;
                let rb = &find(g, t, *m).summary;
                if rb.feasible {
                    assert!(nr.feasible);
                    assert!(nr.relaxed_power <= rb.relaxed_power * (1.0 + 1e-5));
                }
            }
        }
    }
    let rows = power_table(&cells, 11.0);
    let common = rows[0].n_trials;
    assert!(rows.iter().all(|r| r.n_trials == common));
}

#[test]
fn identical_methods_give_identical_power_columns() {
    let a = MethodSelector::Bernstein { rho: None };
    let b = MethodSelector::Bernstein { rho: Some(0.1) };
    let cfg = ExperimentConfig { gamma_grid_db: vec![7.0], methods: vec![a, b], ..small_config(4) };
    let cells = run_grid(&cfg, &[7.0], &cfg.methods, 0).unwrap();
    let rows = power_table(&cells, 7.0);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].value, rows[1].value);
}

#[test]
fn deterministic_channels_fill_the_top_bin() {
    let cfg = ExperimentConfig {
        instance: desk(5.0, 0.0),
        methods: vec![MethodSelector::SphereBounding { radius: None }, MethodSelector::NonRobust],
        ..small_config(4)
    };
    let cells = run_grid(&cfg, &[5.0], &cfg.methods, 500).unwrap();
    let feasible = cells.iter().filter(|c| c.summary.feasible).count();
    assert!(feasible > 0);
    let rows = histogram_table(&cells, 0.1);
    let top: usize = rows.iter().filter(|r| r.bin_hi == 1.0).map(|r| r.count).sum();
    let all: usize = rows.iter().map(|r| r.count).sum();
    assert_eq!(top, feasible);
    assert_eq!(all, feasible);
}

#[test]
fn bench_reports_program_shape() {
    let cfg = ExperimentConfig {
        gamma_grid_db: vec![3.0],
        pickup_gamma_db: Some(3.0),
        methods: vec![MethodSelector::Bernstein { rho: None }, MethodSelector::DecompGaussian { rho: None }],
        bench_sizes: vec![3, 8],
        ..small_config(1)
    };
    let rows = bench_runtime(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    let get = |m: &str, n: usize| rows.iter().find(|r| r.method == m && r.n_t == n).unwrap();
    for n in [3, 8] {
        assert!(get("decomp", n).num_rows < get("bernstein", n).num_rows);
        assert_eq!(get("decomp", n).psd_blocks, n);
        assert!(get("decomp", n).median_seconds > 0.0);
    }
    assert!(get("bernstein", 8).num_vars > get("bernstein", 3).num_vars);
    assert!(bench_runtime(&ExperimentConfig { warmup: 0, ..cfg }).is_err());
}

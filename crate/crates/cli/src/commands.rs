//! The five subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rarbf::conic::{write_dump, SolveStatus};
use rarbf::experiment::{
    bench_csv, bench_runtime, bisection_refine, feasibility_table, histogram_csv, histogram_table, power_table,
    run_grid, sweep_csv, validate_mc, validation_csv, BisectionOutcome, Cell, ExperimentConfig, PipelineOptions,
    PipelineOutcome, SweepRow, ValidationReport,
};
use rarbf::model::{linear_to_db, nominal_sinrs, BeamformerSet, BeamformingInstance};
use rarbf::restriction::{build_program, MethodSelector};
use serde::Serialize;

use crate::config::{Command, Resolved, Settings};
use crate::plot::{bar_chart, line_chart, Series};
use crate::{CliError, Outcome};

/// Collects artifacts of one run and writes the manifest last.
struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if !self.written.iter().any(|n| n == name) {
            self.written.push(name.to_string());
        }
        Ok(path)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }
}

#[derive(Serialize)]
struct Versions {
    rarbf: &'static str,
    rarbf_cli: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'static str,
    versions: Versions,
    seed: u64,
    config: &'a Settings,
    wall_seconds: f64,
    artifacts: &'a [String],
    exit_status: i32,
}

fn finish(r: &Resolved, mut art: Artifacts, start: Instant, exit_status: i32) -> Result<(), CliError> {
    let mut artifacts = art.written.clone();
    artifacts.push("manifest.json".into());
    let manifest = Manifest {
        subcommand: r.command.name(),
        versions: Versions { rarbf: rarbf::VERSION, rarbf_cli: env!("CARGO_PKG_VERSION") },
        seed: r.seed(),
        config: &r.settings,
        wall_seconds: start.elapsed().as_secs_f64(),
        artifacts: &artifacts,
        exit_status,
    };
    art.json("manifest.json", &manifest)?;
    Ok(())
}

/// Dispatches one resolved run.
pub fn run(r: &Resolved) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let art = Artifacts::new(r.out())?;
    match r.command {
        Command::Solve => solve(r, art, start),
        Command::Validate => validate(r, art, start),
        Command::Experiment => experiment(r, art, start),
        Command::Bisect => bisect(r, art, start),
        Command::Bench => bench(r, art, start),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_instance(r: &Resolved) -> Result<BeamformingInstance, CliError> {
    match &r.settings.instance {
        Some(p) => {
            let inst: BeamformingInstance = read_json(p)?;
            // Only an explicit target survives resolution next to an instance file.
            Ok(match r.settings.gamma_db {
                Some(g) => inst.with_gamma_db(g),
                None => inst,
            })
        }
        None => Ok(r.params.generate(r.seed(), r.trial())?),
    }
}

fn pipeline_options(r: &Resolved) -> PipelineOptions {
    PipelineOptions {
        solver: r.solver(),
        rounds: r.settings.rounds.unwrap_or(100),
        samples: r.samples(),
        seed: r.seed(),
        trial: r.trial(),
    }
}

fn solver_failed(status: SolveStatus) -> bool {
    matches!(status, SolveStatus::MaxIters | SolveStatus::NumericalFailure)
}

fn status_name(status: SolveStatus) -> String {
    serde_json::to_value(status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn dump_failure(
    r: &Resolved,
    mut art: Artifacts,
    start: Instant,
    inst: &BeamformingInstance,
    method: &MethodSelector,
    status: SolveStatus,
) -> CliError {
    let dump = build_program(inst, method)
        .and_then(|p| p.build())
        .map(|p| write_dump(&p))
        .map_err(CliError::from)
        .and_then(|text| art.write("failure.dump", &text));
    match dump {
        Ok(path) => {
            if let Err(e) = finish(r, art, start, 1) {
                return e;
            }
            CliError::SolverFailure { status: status_name(status), dump: path }
        }
        Err(e) => e,
    }
}

#[derive(Serialize)]
struct UserValidation {
    user: usize,
    p_hat: f64,
    radius: f64,
    pass: bool,
    rho: f64,
    nominal_sinr: f64,
    nominal_sinr_db: f64,
    target_db: f64,
    /// `log2(1 + SINR)` at the presumed channel, bit/s/Hz.
    nominal_rate: f64,
}

#[derive(Serialize)]
struct ValidationFile {
    samples: usize,
    seed: u64,
    trial: u64,
    all_pass: bool,
    min_p_hat: f64,
    users: Vec<UserValidation>,
}

fn validation_file(
    report: &ValidationReport,
    w: &BeamformerSet,
    inst: &BeamformingInstance,
    seed: u64,
    trial: u64,
) -> Result<ValidationFile, CliError> {
    let sinrs = nominal_sinrs(w, inst)?;
    let users = (0..inst.k())
        .map(|i| UserValidation {
            user: i,
            p_hat: report.p_hat[i],
            radius: report.radius[i],
            pass: report.pass[i],
            rho: report.rho[i],
            nominal_sinr: sinrs[i],
            nominal_sinr_db: linear_to_db(sinrs[i]),
            target_db: inst.gamma_db(i),
            nominal_rate: (1.0 + sinrs[i]).log2(),
        })
        .collect();
    Ok(ValidationFile {
        samples: report.samples,
        seed,
        trial,
        all_pass: report.all_pass(),
        min_p_hat: report.min_p_hat(),
        users,
    })
}

fn write_validation(
    art: &mut Artifacts,
    report: &ValidationReport,
    w: &BeamformerSet,
    inst: &BeamformingInstance,
    r: &Resolved,
) -> Result<(), CliError> {
    art.json("validation.json", &validation_file(report, w, inst, r.seed(), r.trial())?)?;
    art.write("validation.csv", &validation_csv(&report.records(r.trial() as usize))?)?;
    Ok(())
}

fn report_design(o: &PipelineOutcome) {
    println!("method        {}", o.method.name());
    println!("status        {}", status_name(o.status()));
    match o.total_power {
        Some(p) => println!("total power   {p:.6} ({:.3} dB)", linear_to_db(p)),
        None => println!("total power   NA (infeasible)"),
    }
    if let Some(v) = &o.validation {
        println!("min p_hat     {:.4} over {} draws per user", v.min_p_hat(), v.samples);
    }
}

fn solve(r: &Resolved, mut art: Artifacts, start: Instant) -> Result<Outcome, CliError> {
    let inst = load_instance(r)?;
    let method = r.methods[0];
    art.json("instance.json", &inst)?;
    let o = rarbf::experiment::run_pipeline(&inst, &method, &pipeline_options(r))?;
    report_design(&o);
    if solver_failed(o.status()) {
        return Err(dump_failure(r, art, start, &inst, &method, o.status()));
    }
    art.json("solution.json", &o)?;
    if let Some(w) = &o.beamformers {
        art.json("beamformers.json", w)?;
        if let Some(v) = &o.validation {
            write_validation(&mut art, v, w, &inst, r)?;
        }
    }
    let outcome = if o.feasible { Outcome::Done } else { Outcome::Infeasible };
    finish(r, art, start, outcome.exit_code())?;
    Ok(outcome)
}

fn validate(r: &Resolved, mut art: Artifacts, start: Instant) -> Result<Outcome, CliError> {
    let inst = load_instance(r)?;
    let w: BeamformerSet = read_json(r.settings.beamformers.as_deref().expect("checked at resolve"))?;
    let report = validate_mc(&w, &inst, r.samples(), r.seed(), r.trial())?;
    write_validation(&mut art, &report, &w, &inst, r)?;
    for (i, p) in report.p_hat.iter().enumerate() {
        println!("user {i}: p_hat {p:.4} (target {:.4}) {}", 1.0 - report.rho[i], if report.pass[i] { "pass" } else { "FAIL" });
    }
    finish(r, art, start, 0)?;
    Ok(Outcome::Done)
}

fn bisect(r: &Resolved, mut art: Artifacts, start: Instant) -> Result<Outcome, CliError> {
    let inst = load_instance(r)?;
    let method = r.methods[0];
    if !method.is_robust() {
        return Err(CliError::Usage(format!("bisect needs a robust method, got {}", method.name())));
    }
    art.json("instance.json", &inst)?;
    let b: BisectionOutcome = bisection_refine(&inst, &method, &r.bisection(), &pipeline_options(r))?;
    report_design(&b.design);
    println!("knob          {} -> {}", b.nominal_knob, b.knob);
    if let Some(p) = b.nominal_power {
        println!("nominal power {p:.6}");
    }
    if solver_failed(b.design.status()) {
        return Err(dump_failure(r, art, start, &inst, &b.method, b.design.status()));
    }
    art.json("bisection.json", &b)?;
    if let Some(w) = &b.design.beamformers {
        art.json("beamformers.json", w)?;
    }
    let outcome = if b.nominal_failed || !b.design.feasible { Outcome::Infeasible } else { Outcome::Done };
    finish(r, art, start, outcome.exit_code())?;
    Ok(outcome)
}

fn gamma_tag(g: f64) -> String {
    g.to_string().replace('-', "m").replace('.', "p")
}

fn sweep_series(rows: &[SweepRow], to_db: bool) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for row in rows {
        let y = row.value.map_or(f64::NAN, |v| if to_db { linear_to_db(v) } else { v });
        match out.iter_mut().find(|s| s.label == row.method) {
            Some(s) => s.points.push((row.gamma_db, y)),
            None => out.push(Series { label: row.method.clone(), points: vec![(row.gamma_db, y)] }),
        }
    }
    out
}

fn print_table(title: &str, rows: &[SweepRow]) {
    println!("{title}");
    for row in rows {
        let v = row.value.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
        println!("  {:<15} {:>6} dB  {:>10}  ({} trials)", row.method, row.gamma_db, v, row.n_trials);
    }
}

/// Replaces the power of every robust cell by its bisection-refined design.
fn refine_cells(cfg: &ExperimentConfig, cells: &[Cell], r: &Resolved) -> Result<(Vec<Cell>, Vec<RefinedCell>), CliError> {
    let bopts = r.bisection();
    let mut refined = Vec::with_capacity(cells.len());
    let mut log = Vec::new();
    for c in cells {
        let mut c2 = c.clone();
        if c.method.is_robust() && c.summary.feasible {
            let inst = cfg.instance_at(c.gamma_db, c.trial)?;
            let popts = cfg.pipeline_options(c.trial, bopts.samples);
            let b = bisection_refine(&inst, &c.method, &bopts, &popts)?;
            c2.summary.feasible = b.design.feasible;
            c2.summary.total_power = b.total_power();
            log.push(RefinedCell {
                gamma_db: c.gamma_db,
                trial: c.trial,
                method: c.method.name(),
                nominal_knob: b.nominal_knob,
                knob: b.knob,
                nominal_power: b.nominal_power,
                refined_power: b.total_power(),
                nominal_failed: b.nominal_failed,
                bound_hit: b.bound_hit,
            });
        }
        refined.push(c2);
    }
    Ok((refined, log))
}

#[derive(Serialize)]
struct RefinedCell {
    gamma_db: f64,
    trial: usize,
    method: &'static str,
    nominal_knob: f64,
    knob: f64,
    nominal_power: Option<f64>,
    refined_power: Option<f64>,
    nominal_failed: bool,
    bound_hit: bool,
}

fn experiment(r: &Resolved, mut art: Artifacts, start: Instant) -> Result<Outcome, CliError> {
    let cfg = r.experiment();
    let pickup = cfg.pickup_gamma_db.expect("pickup has a default");
    let mut gammas = cfg.gamma_grid_db.clone();
    if !gammas.contains(&pickup) {
        gammas.push(pickup);
    }
    let cells = run_grid(&cfg, &gammas, &cfg.methods, cfg.samples)?;
    let on_grid = |c: &&Cell| cfg.gamma_grid_db.contains(&c.gamma_db);
    let grid_cells: Vec<Cell> = cells.iter().filter(on_grid).cloned().collect();

    let feas = feasibility_table(&grid_cells);
    let keep = |rows: Vec<SweepRow>| -> Vec<SweepRow> {
        rows.into_iter().filter(|row| cfg.gamma_grid_db.contains(&row.gamma_db)).collect()
    };
    let power = keep(power_table(&cells, pickup));
    art.write("feasibility.csv", &sweep_csv(&feas)?)?;
    art.write("power.csv", &sweep_csv(&power)?)?;
    print_table("feasibility rate", &feas);
    print_table(&format!("mean total power, trials feasible for every method at {pickup} dB"), &power);

    let pickup_cells: Vec<Cell> = cells.iter().filter(|c| c.gamma_db == pickup).cloned().collect();
    let hist = histogram_table(&pickup_cells, cfg.bin_width);
    if cfg.samples > 0 {
        art.write("histogram.csv", &histogram_csv(&hist)?)?;
        for m in &cfg.methods {
            for &g in &cfg.gamma_grid_db {
                let records: Vec<_> = cells
                    .iter()
                    .filter(|c| c.method == *m && c.gamma_db == g)
                    .filter_map(|c| c.summary.validation.as_ref().map(|v| v.records(c.trial)))
                    .flatten()
                    .collect();
                art.write(&format!("validation_{}_{}dB.csv", m.name(), gamma_tag(g)), &validation_csv(&records)?)?;
            }
        }
    }
    art.json("cells.json", &cells)?;

    let refined_power = if cfg.bisection.is_some() {
        let (refined, log) = refine_cells(&cfg, &cells, r)?;
        let rows = keep(power_table(&refined, pickup));
        art.write("power_refined.csv", &sweep_csv(&rows)?)?;
        art.json("bisection.json", &log)?;
        print_table("mean total power after bisection refinement", &rows);
        Some(rows)
    } else {
        None
    };

    if r.plot() {
        let feas_series = sweep_series(&feas, false);
        art.write("feasibility.svg", &line_chart("Feasibility rate", "SINR target (dB)", "feasibility rate", &feas_series, false))?;
        art.write("power.svg", &line_chart("Mean total power", "SINR target (dB)", "total power (dB)", &sweep_series(&power, true), false))?;
        if let Some(rows) = &refined_power {
            art.write(
                "power_refined.svg",
                &line_chart("Mean total power after refinement", "SINR target (dB)", "total power (dB)", &sweep_series(rows, true), false),
            )?;
        }
        if cfg.samples > 0 {
            let mut bins: Vec<(f64, f64)> = Vec::new();
            let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
            for h in &hist {
                if !bins.contains(&(h.bin_lo, h.bin_hi)) {
                    bins.push((h.bin_lo, h.bin_hi));
                }
                match groups.iter_mut().find(|g| g.0 == h.method) {
                    Some(g) => g.1.push(h.count as f64),
                    None => groups.push((h.method.clone(), vec![h.count as f64])),
                }
            }
            let title = format!("Worst-user satisfaction probability at {pickup} dB");
            art.write("histogram.svg", &bar_chart(&title, "min over users of p_hat", "trials", &bins, &groups))?;
        }
    }
    finish(r, art, start, 0)?;
    Ok(Outcome::Done)
}

fn bench(r: &Resolved, mut art: Artifacts, start: Instant) -> Result<Outcome, CliError> {
    let mut cfg = r.experiment();
    cfg.pickup_gamma_db = r.settings.gamma_db;
    let rows = bench_runtime(&cfg)?;
    art.write("bench.csv", &bench_csv(&rows)?)?;
    for row in &rows {
        println!(
            "  {:<15} N_t = K = {:<3} median {:.4} s  IQR {:.4} s  ({} runs)",
            row.method, row.n_t, row.median_seconds, row.iqr_seconds, row.runs
        );
    }
    if r.plot() {
        let mut series: Vec<Series> = Vec::new();
        for row in &rows {
            let p = (row.n_t as f64, row.median_seconds);
            match series.iter_mut().find(|s| s.label == row.method) {
                Some(s) => s.points.push(p),
                None => series.push(Series { label: row.method.clone(), points: vec![p] }),
            }
        }
        art.write("bench.svg", &line_chart("Median solve time", "N_t = K", "seconds", &series, true))?;
    }
    finish(r, art, start, 0)?;
    Ok(Outcome::Done)
}

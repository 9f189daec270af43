//! Settings shared by all subcommands.
//!
//! Every key can come from a flag (`--gamma-db`), a TOML config file
//! (`gamma_db = 11`), a preset, or the built-in default, in that order of
//! precedence. A run manifest stores the fully resolved key set, so feeding
//! a manifest back through `--config` reproduces the run.

use std::path::{Path, PathBuf};

use clap::Args;
use rarbf::conic::SolverOptions;
use rarbf::experiment::{BisectionOptions, ExperimentConfig};
use rarbf::model::{ErrorSpec, InstanceParams};
use rarbf::restriction::MethodSelector;
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Validate,
    Experiment,
    Bisect,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Validate => "validate",
            Command::Experiment => "experiment",
            Command::Bisect => "bisect",
            Command::Bench => "bench",
        }
    }

    fn single_method(self) -> bool {
        matches!(self, Command::Solve | Command::Bisect)
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<String>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    }))
}

macro_rules! settings {
    ($( $(#[$meta:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        /// One value per config key; `None` means "not given at this level".
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Settings {
            $(
                $(#[$meta])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl Settings {
            /// Keys set here win; the rest come from `lower`.
            pub fn over(self, lower: Settings) -> Settings {
                Settings { $( $field: self.$field.or(lower.$field), )* }
            }

            /// Names of the keys that are set.
            pub fn given(&self) -> Vec<&'static str> {
                let mut out = Vec::new();
                $( if self.$field.is_some() { out.push(stringify!($field)); } )*
                out
            }
        }
    };
}

settings! {
    /// Instance file (JSON); replaces the generator keys nt, k, sigma2, rho and the error keys
    #[arg(long)]
    instance: PathBuf,
    /// Beamformer file (JSON) checked by `validate`
    #[arg(long)]
    beamformers: PathBuf,
    /// Experiment preset: fig1, fig2, fig4a, fig4c, fig5 or fig6
    #[arg(long)]
    preset: String,
    /// Transmit antennas N_t [default: 3]
    #[arg(long)]
    nt: usize,
    /// Users K [default: 3]
    #[arg(long)]
    k: usize,
    /// Noise power per user, linear [default: 0.1]
    #[arg(long)]
    sigma2: f64,
    /// SINR target, dB [default: 11]
    #[arg(long, allow_hyphen_values = true)]
    gamma_db: f64,
    /// SINR target grid, dB, comma separated [default: 3,7,11,15]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma_grid_db: Vec<f64>,
    /// Target fixing the common-feasible trials of the power table, dB [default: 11]
    #[arg(long, allow_hyphen_values = true)]
    pickup_gamma_db: f64,
    /// Outage cap, linear probability in (0, 1] [default: 0.1]
    #[arg(long)]
    rho: f64,
    /// Error model: gaussian or uniform [default: gaussian]
    #[arg(long)]
    error: String,
    /// Gaussian error variance per antenna, linear [default: 0.002]
    #[arg(long)]
    sigma_e2: f64,
    /// Spatial correlation of Gaussian errors, entry (m, n) scaled by c^|m-n| [default: 0]
    #[arg(long)]
    correlation: f64,
    /// Half-width of the uniform errors, linear [default: 0.02]
    #[arg(long)]
    epsilon: f64,
    /// Method: sphere, bernstein, decomp, decomp-bounded or nonrobust; repeat or comma-separate for
    /// experiment and bench [default: bernstein (decomp-bounded for uniform errors) for solve and
    /// bisect; every method matching the error model for experiment and bench]
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    method: Vec<String>,
    /// Conservatism override: radius d for sphere, effective outage level for the others [default: none]
    #[arg(long)]
    knob: f64,
    /// Master seed [default: 0]
    #[arg(long)]
    seed: u64,
    /// Trial index of the generated instance [default: 0]
    #[arg(long)]
    trial: u64,
    /// Channel trials per grid point [default: 100]
    #[arg(long)]
    trials: usize,
    /// Monte Carlo draws per user; 0 skips validation in solve [default: 10000; 5000 for experiment]
    #[arg(long)]
    samples: usize,
    /// Gaussian randomization rounds [default: 100]
    #[arg(long)]
    rounds: usize,
    /// Histogram bin width, probability [default: 0.05]
    #[arg(long)]
    bin_width: f64,
    /// Also run bisection refinement in experiment [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    bisect: bool,
    /// Bisection midpoint steps [default: 6]
    #[arg(long)]
    bisect_iters: usize,
    /// Monte Carlo draws per user at every bisection step [default: 10000]
    #[arg(long)]
    bisect_samples: usize,
    /// Loosest effective outage level tried by bisection, linear [default: 0.9]
    #[arg(long)]
    rho_max: f64,
    /// Sizes N_t = K for bench, comma separated [default: 3,4,5,6,7,8]
    #[arg(long, value_delimiter = ',')]
    bench_sizes: Vec<usize>,
    /// Discarded warm-up solves per method and size in bench [default: 1]
    #[arg(long)]
    warmup: usize,
    /// Relative solver tolerance [default: 1e-7]
    #[arg(long)]
    tol: f64,
    /// Solver iteration cap [default: 50000]
    #[arg(long)]
    max_iters: usize,
    /// Output directory [default: results]
    #[arg(long)]
    out: PathBuf,
    /// Also write SVG plots [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    plot: bool,
}

const GENERATOR_KEYS: [&str; 8] = ["nt", "k", "sigma2", "rho", "error", "sigma_e2", "correlation", "epsilon"];

fn defaults(cmd: Command) -> Settings {
    Settings {
        nt: Some(3),
        k: Some(3),
        sigma2: Some(0.1),
        gamma_db: Some(11.0),
        gamma_grid_db: Some(vec![3.0, 7.0, 11.0, 15.0]),
        pickup_gamma_db: Some(11.0),
        rho: Some(0.1),
        error: Some("gaussian".into()),
        sigma_e2: Some(0.002),
        correlation: Some(0.0),
        epsilon: Some(0.02),
        seed: Some(0),
        trial: Some(0),
        trials: Some(100),
        samples: Some(if cmd == Command::Experiment { 5_000 } else { 10_000 }),
        rounds: Some(100),
        bin_width: Some(0.05),
        bisect: Some(false),
        bisect_iters: Some(6),
        bisect_samples: Some(10_000),
        rho_max: Some(0.9),
        bench_sizes: Some(vec![3, 4, 5, 6, 7, 8]),
        warmup: Some(1),
        tol: Some(1e-7),
        max_iters: Some(50_000),
        out: Some(PathBuf::from("results")),
        plot: Some(false),
        ..Default::default()
    }
}

/// Desk-scale versions of the published experiment setups.
pub fn preset(name: &str) -> Result<Settings, CliError> {
    let gaussian = |nt, k, sigma_e2, correlation, rho| Settings {
        nt: Some(nt),
        k: Some(k),
        error: Some("gaussian".into()),
        sigma_e2: Some(sigma_e2),
        correlation: Some(correlation),
        rho: Some(rho),
        ..Default::default()
    };
    let s = match name {
        "fig1" => Settings {
            gamma_grid_db: Some(vec![11.0]),
            pickup_gamma_db: Some(11.0),
            samples: Some(10_000),
            trials: Some(100),
            ..gaussian(3, 3, 0.002, 0.0, 0.1)
        },
        "fig2" => Settings {
            gamma_grid_db: Some(vec![3.0, 7.0, 11.0, 15.0]),
            pickup_gamma_db: Some(11.0),
            trials: Some(100),
            ..gaussian(3, 3, 0.002, 0.0, 0.1)
        },
        "fig4a" => Settings {
            gamma_grid_db: Some(vec![3.0, 7.0, 11.0, 15.0]),
            pickup_gamma_db: Some(7.0),
            trials: Some(50),
            ..gaussian(8, 8, 0.002, 0.9, 0.01)
        },
        "fig4c" => Settings {
            gamma_grid_db: Some(vec![3.0, 7.0, 11.0, 13.0, 15.0]),
            pickup_gamma_db: Some(13.0),
            trials: Some(50),
            ..gaussian(8, 6, 0.01, 0.9, 0.01)
        },
        "fig5" => Settings {
            gamma_grid_db: Some(vec![3.0, 5.0, 7.0, 9.0, 11.0]),
            pickup_gamma_db: Some(9.0),
            method: Some(vec!["sphere".into(), "bernstein".into(), "decomp".into()]),
            bisect: Some(true),
            trials: Some(20),
            ..gaussian(5, 5, 0.002, 0.0, 0.1)
        },
        "fig6" => Settings {
            nt: Some(3),
            k: Some(3),
            error: Some("uniform".into()),
            epsilon: Some(0.02),
            rho: Some(0.1),
            gamma_grid_db: Some(vec![1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0]),
            pickup_gamma_db: Some(7.0),
            trials: Some(100),
            ..Default::default()
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset `{other}` (expected fig1, fig2, fig4a, fig4c, fig5 or fig6)"
            )))
        }
    };
    Ok(s)
}

/// Reads a TOML config file, or the `config` table of a JSON run manifest.
pub fn read_config_file(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let mut v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg = v.get_mut("config").map(serde_json::Value::take).unwrap_or(v);
        serde_json::from_value(cfg).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub command: Command,
    /// Every key filled in; this is what the manifest records.
    pub settings: Settings,
    pub methods: Vec<MethodSelector>,
    pub params: InstanceParams,
}

/// Layers flags over the config file, the preset and the defaults, then
/// checks the combination.
pub fn resolve(cmd: Command, flags: Settings, file: Option<Settings>) -> Result<Resolved, CliError> {
    let explicit = flags.over(file.unwrap_or_default());
    let preset_layer = match &explicit.preset {
        Some(p) => preset(p)?,
        None => Settings::default(),
    };
    if explicit.preset.is_some() && !matches!(cmd, Command::Experiment | Command::Bench) {
        return Err(CliError::Usage(format!("presets apply to experiment and bench, not {}", cmd.name())));
    }
    let layered = explicit.clone().over(preset_layer);
    let mut settings = layered.over(defaults(cmd));

    if explicit.instance.is_some() {
        let clash: Vec<&str> = explicit.given().into_iter().filter(|k| GENERATOR_KEYS.contains(k)).collect();
        if !clash.is_empty() {
            return Err(CliError::Usage(format!("--instance cannot be combined with generator keys: {}", clash.join(", "))));
        }
        if matches!(cmd, Command::Experiment | Command::Bench) {
            return Err(CliError::Usage(format!("{} draws its own instances; --instance is not accepted", cmd.name())));
        }
    }
    if cmd == Command::Validate && (settings.instance.is_none() || settings.beamformers.is_none()) {
        return Err(CliError::Usage("validate needs both --instance and --beamformers".into()));
    }

    let uniform = match settings.error.as_deref() {
        Some("gaussian") => false,
        Some("uniform") => true,
        Some(other) => return Err(CliError::Usage(format!("unknown error model `{other}` (expected gaussian or uniform)"))),
        None => unreachable!("error has a default"),
    };
    if settings.method.is_none() {
        let names: Vec<String> = if cmd.single_method() {
            vec![if uniform { "decomp-bounded" } else { "bernstein" }.into()]
        } else if uniform {
            vec!["decomp-bounded".into(), "nonrobust".into()]
        } else {
            MethodSelector::ALL_GAUSSIAN.iter().map(|m| m.name().to_string()).collect()
        };
        settings.method = Some(names);
    }
    let names = settings.method.clone().unwrap_or_default();
    if cmd.single_method() && names.len() != 1 {
        return Err(CliError::Usage(format!("{} takes exactly one method, got {}: {}", cmd.name(), names.len(), names.join(", "))));
    }
    let mut methods = Vec::with_capacity(names.len());
    for n in &names {
        let m: MethodSelector = n.parse().map_err(|e: rarbf::Error| CliError::Usage(e.to_string()))?;
        if methods.contains(&m) {
            return Err(CliError::Usage(format!("method `{n}` listed twice")));
        }
        methods.push(m.with_knob(settings.knob));
    }
    if settings.knob.is_some() && !cmd.single_method() {
        return Err(CliError::Usage("--knob applies to solve and bisect only".into()));
    }
    if cmd == Command::Bisect && settings.knob.is_some() {
        return Err(CliError::Usage("bisect searches the knob itself; --knob is not accepted".into()));
    }

    let v = &settings;
    let errors = if uniform {
        ErrorSpec::Uniform { epsilon: v.epsilon.unwrap() }
    } else {
        ErrorSpec::Gaussian { sigma_e2: v.sigma_e2.unwrap(), correlation: v.correlation.unwrap() }
    };
    let params = InstanceParams {
        n_t: v.nt.unwrap(),
        k: v.k.unwrap(),
        sigma2: v.sigma2.unwrap(),
        gamma_db: v.gamma_db.unwrap(),
        rho: v.rho.unwrap(),
        errors,
    };
    if settings.instance.is_some() {
        // Keep the manifest replayable: the instance file is the source of these values.
        settings.nt = None;
        settings.k = None;
        settings.sigma2 = None;
        settings.rho = None;
        settings.error = None;
        settings.sigma_e2 = None;
        settings.correlation = None;
        settings.epsilon = None;
        settings.gamma_db = explicit.gamma_db;
    }
    Ok(Resolved { command: cmd, settings, methods, params })
}

impl Resolved {
    fn get<T: Clone>(v: &Option<T>) -> T {
        v.clone().expect("resolved settings carry every defaulted key")
    }

    pub fn out(&self) -> PathBuf {
        Self::get(&self.settings.out)
    }

    pub fn samples(&self) -> usize {
        Self::get(&self.settings.samples)
    }

    pub fn seed(&self) -> u64 {
        Self::get(&self.settings.seed)
    }

    pub fn trial(&self) -> u64 {
        Self::get(&self.settings.trial)
    }

    pub fn plot(&self) -> bool {
        Self::get(&self.settings.plot)
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: Self::get(&self.settings.tol),
            max_iters: Self::get(&self.settings.max_iters),
            ..Default::default()
        }
    }

    pub fn bisection(&self) -> BisectionOptions {
        BisectionOptions {
            iters: Self::get(&self.settings.bisect_iters),
            samples: Self::get(&self.settings.bisect_samples),
            rho_max: Self::get(&self.settings.rho_max),
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        let s = &self.settings;
        ExperimentConfig {
            instance: self.params.clone(),
            gamma_grid_db: Self::get(&s.gamma_grid_db),
            methods: self.methods.clone(),
            trials: Self::get(&s.trials),
            samples: self.samples(),
            seed: self.seed(),
            pickup_gamma_db: s.pickup_gamma_db,
            rounds: Self::get(&s.rounds),
            bin_width: Self::get(&s.bin_width),
            warmup: Self::get(&s.warmup),
            bench_sizes: Self::get(&s.bench_sizes),
            bisection: Self::get(&s.bisect).then(|| self.bisection()),
            solver: self.solver(),
        }
    }
}

/// Key list for `--help`: config-file key, default and unit.
pub const KEY_HELP: &str = "\
Config keys (TOML file via --config; a flag --some-key overrides the file key some_key):
  key              default            unit
  instance         -                  path to instance JSON
  beamformers      -                  path to beamformer JSON
  preset           -                  fig1 | fig2 | fig4a | fig4c | fig5 | fig6
  nt               3                  antennas
  k                3                  users
  sigma2           0.1                linear power
  gamma_db         11                 dB
  gamma_grid_db    [3, 7, 11, 15]     dB
  pickup_gamma_db  11                 dB
  rho              0.1                linear probability
  error            gaussian           gaussian | uniform
  sigma_e2         0.002              linear variance
  correlation      0                  linear factor in [0, 1)
  epsilon          0.02               linear half-width
  method           (per command)      name or list of names
  knob             -                  linear (radius or outage level)
  seed             0                  integer
  trial            0                  integer
  trials           100                count
  samples          10000 (exp. 5000)  count per user
  rounds           100                count
  bin_width        0.05               linear probability
  bisect           false              bool
  bisect_iters     6                  count
  bisect_samples   10000              count per user
  rho_max          0.9                linear probability
  bench_sizes      [3, 4, 5, 6, 7, 8] antennas (N_t = K)
  warmup           1                  count
  tol              1e-7               relative
  max_iters        50000              count
  out              results            directory
  plot             false              bool
Exit status: 0 success, 2 infeasible design, 1 error.";

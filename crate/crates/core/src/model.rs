//! Problem instances, CSI error models, error sampling and exact SINR.
//!
//! The actual channel of user `i` is `h_i = h̄_i + e_i`, where `h̄_i` is what
//! the transmitter believes and `e_i` is drawn from an [`ErrorModel`].

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cholesky_psd, CMatrix, HermitianMatrix};
use crate::rng::{stream, Purpose};

/// Distribution of the CSI errors `e_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorModel {
    /// `e_i ~ CN(0, C_i)`.
    Gaussian { covariances: Vec<HermitianMatrix> },
    /// Real and imaginary parts of every component i.i.d. uniform on
    /// `[-ε_i, ε_i]`.
    Uniform { epsilon: Vec<f64> },
}

impl ErrorModel {
    /// `C_i = σ_e²·corr^{|m-n|}` for every user (`corr = 0` is spatially white).
    pub fn gaussian_correlated(n_t: usize, k: usize, sigma_e2: f64, correlation: f64) -> Self {
        let c = HermitianMatrix::toeplitz_correlation(n_t, sigma_e2, correlation);
        Self::Gaussian { covariances: vec![c; k] }
    }

    pub fn uniform(k: usize, epsilon: f64) -> Self {
        Self::Uniform { epsilon: vec![epsilon; k] }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Self::Gaussian { .. })
    }

    fn users(&self) -> usize {
        match self {
            Self::Gaussian { covariances } => covariances.len(),
            Self::Uniform { epsilon } => epsilon.len(),
        }
    }
}

/// One multiuser MISO downlink design problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct BeamformingInstance {
    n_t: usize,
    channels: Vec<Vec<Complex64>>,
    noise: Vec<f64>,
    gamma_db: Vec<f64>,
    rho: Vec<f64>,
    error_model: ErrorModel,
}

impl BeamformingInstance {
    pub fn new(
        channels: Vec<Vec<Complex64>>,
        noise: Vec<f64>,
        gamma_db: Vec<f64>,
        rho: Vec<f64>,
        error_model: ErrorModel,
    ) -> Result<Self> {
        let k = channels.len();
        if k == 0 {
            return Err(Error::Invalid("instance needs at least one user".into()));
        }
        let n_t = channels[0].len();
        if n_t == 0 {
            return Err(Error::Invalid("instance needs at least one antenna".into()));
        }
        if channels.iter().any(|h| h.len() != n_t) {
            return Err(Error::Dimension("presumed channels differ in length".into()));
        }
        for (name, len) in [("sigma2", noise.len()), ("gamma_db", gamma_db.len()), ("rho", rho.len())] {
            if len != k {
                return Err(Error::Dimension(format!("{name} has {len} entries for {k} users")));
            }
        }
        if error_model.users() != k {
            return Err(Error::Dimension(format!("error model covers {} users, instance has {k}", error_model.users())));
        }
        if let Some(s) = noise.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Invalid(format!("noise power must be > 0, got {s}")));
        }
        if let Some(g) = gamma_db.iter().find(|g| !g.is_finite()) {
            return Err(Error::Invalid(format!("SINR target must be finite, got {g} dB")));
        }
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::Invalid(format!("outage cap must lie in (0,1], got {r}")));
        }
        if channels.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invalid("presumed channels must be finite".into()));
        }
        match &error_model {
            ErrorModel::Gaussian { covariances } => {
                for (i, c) in covariances.iter().enumerate() {
                    if c.n() != n_t {
                        return Err(Error::Dimension(format!("covariance {i} has side {} (n_t = {n_t})", c.n())));
                    }
                }
            }
            ErrorModel::Uniform { epsilon } => {
                if let Some(e) = epsilon.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                    return Err(Error::Invalid(format!("uniform error bound must be > 0, got {e}")));
                }
            }
        }
        Ok(Self { n_t, channels, noise, gamma_db, rho, error_model })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn k(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, i: usize) -> &[Complex64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    pub fn noise(&self, i: usize) -> f64 {
        self.noise[i]
    }

    pub fn gamma_db(&self, i: usize) -> f64 {
        self.gamma_db[i]
    }

    /// Linear-scale SINR target.
    pub fn gamma(&self, i: usize) -> f64 {
        db_to_linear(self.gamma_db[i])
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho[i]
    }

    pub fn error_model(&self) -> &ErrorModel {
        &self.error_model
    }

    /// Same channels and model with every SINR target replaced.
    pub fn with_gamma_db(&self, gamma_db: f64) -> Self {
        Self { gamma_db: vec![gamma_db; self.k()], ..self.clone() }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho: vec![rho; self.k()], ..self.clone() }
    }

    pub fn with_error_model(&self, model: ErrorModel) -> Result<Self> {
        Self::new(self.channels.clone(), self.noise.clone(), self.gamma_db.clone(), self.rho.clone(), model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Parameters for drawing synthetic instances the way the experiments do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n_t: usize,
    pub k: usize,
    pub sigma2: f64,
    pub gamma_db: f64,
    pub rho: f64,
    pub errors: ErrorSpec,
}

/// Compact description of an error model shared by all users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ErrorSpec {
    Gaussian {
        sigma_e2: f64,
        #[serde(default)]
        correlation: f64,
    },
    Uniform {
        epsilon: f64,
    },
}

impl ErrorSpec {
    pub fn build(&self, n_t: usize, k: usize) -> ErrorModel {
        match *self {
            ErrorSpec::Gaussian { sigma_e2, correlation } => ErrorModel::gaussian_correlated(n_t, k, sigma_e2, correlation),
            ErrorSpec::Uniform { epsilon } => ErrorModel::uniform(k, epsilon),
        }
    }
}

impl InstanceParams {
    /// Channels for trial `trial` come from the `(seed, trial)` stream.
    pub fn generate(&self, seed: u64, trial: u64) -> Result<BeamformingInstance> {
        let channels = generate_channels_stream(self.n_t, self.k, seed, trial)?;
        BeamformingInstance::new(
            channels,
            vec![self.sigma2; self.k],
            vec![self.gamma_db; self.k],
            vec![self.rho; self.k],
            self.errors.build(self.n_t, self.k),
        )
    }
}

/// `K` i.i.d. `CN(0, I_{N_t})` presumed channels, deterministic in `seed`.
pub fn generate_channels(n_t: usize, k: usize, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    generate_channels_stream(n_t, k, seed, 0)
}

fn generate_channels_stream(n_t: usize, k: usize, seed: u64, trial: u64) -> Result<Vec<Vec<Complex64>>> {
    if n_t == 0 || k == 0 {
        return Err(Error::Invalid(format!("need n_t >= 1 and k >= 1, got n_t = {n_t}, k = {k}")));
    }
    let mut rng = stream(seed, trial, 0, Purpose::Channels);
    Ok((0..k).map(|_| (0..n_t).map(|_| standard_cn(&mut rng)).collect()).collect())
}

/// One `CN(0, 1)` draw: real and imaginary parts `N(0, 1/2)`.
pub fn standard_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Draws CSI errors; covariance factors are computed once up front.
#[derive(Debug, Clone)]
pub struct ErrorSampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Gaussian(Vec<CMatrix>),
    Uniform(Vec<f64>, usize),
}

impl ErrorSampler {
    pub fn new(model: &ErrorModel, n_t: usize) -> Result<Self> {
        let kind = match model {
            ErrorModel::Gaussian { covariances } => {
                SamplerKind::Gaussian(covariances.iter().map(cholesky_psd).collect::<Result<_>>()?)
            }
            ErrorModel::Uniform { epsilon } => SamplerKind::Uniform(epsilon.clone(), n_t),
        };
        Ok(Self { kind })
    }

    /// Writes one error draw for `user` into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, user: usize, rng: &mut R, out: &mut [Complex64]) {
        match &self.kind {
            SamplerKind::Gaussian(factors) => {
                let f = &factors[user];
                let n = f.cols();
                let z: Vec<Complex64> = (0..n).map(|_| standard_cn(rng)).collect();
                for (r, o) in out.iter_mut().enumerate() {
                    *o = (0..n).map(|c| f[(r, c)] * z[c]).sum();
                }
            }
            SamplerKind::Uniform(eps, _) => {
                let e = eps[user];
                for o in out.iter_mut() {
                    *o = Complex64::new(rng.random_range(-e..=e), rng.random_range(-e..=e));
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, user: usize, rng: &mut R) -> Vec<Complex64> {
        let n = match &self.kind {
            SamplerKind::Gaussian(f) => f[user].rows(),
            SamplerKind::Uniform(_, n) => *n,
        };
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        self.sample_into(user, rng, &mut out);
        out
    }
}

/// One error vector per user, user `i` drawn from stream `(seed, 0, i)`.
pub fn sample_errors(model: &ErrorModel, n_t: usize, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    let sampler = ErrorSampler::new(model, n_t)?;
    Ok((0..model.users())
        .map(|i| {
            let mut rng = stream(seed, 0, i as u64, Purpose::Errors);
            sampler.sample(i, &mut rng)
        })
        .collect())
}

/// Transmit beamformers `w_1..w_K`; `‖w_i‖²` is the power spent on user `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeamformerFile", into = "BeamformerFile")]
pub struct BeamformerSet {
    w: Vec<Vec<Complex64>>,
}

impl BeamformerSet {
    pub fn new(w: Vec<Vec<Complex64>>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Invalid("beamformer set is empty".into()));
        }
        let n = w[0].len();
        if w.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension("beamformers differ in length".into()));
        }
        if w.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invalid("beamformer entries must be finite".into()));
        }
        Ok(Self { w })
    }

    pub fn k(&self) -> usize {
        self.w.len()
    }

    pub fn n_t(&self) -> usize {
        self.w[0].len()
    }

    pub fn beam(&self, i: usize) -> &[Complex64] {
        &self.w[i]
    }

    pub fn beams(&self) -> &[Vec<Complex64>] {
        &self.w
    }

    pub fn power(&self, i: usize) -> f64 {
        crate::numerics::norm_sqr(&self.w[i])
    }

    pub fn total_power(&self) -> f64 {
        (0..self.k()).map(|i| self.power(i)).sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamformerFile {
    n_t: usize,
    k: usize,
    /// Per user, interleaved `[re, im, re, im, ...]`.
    beams: Vec<Vec<f64>>,
}

impl TryFrom<BeamformerFile> for BeamformerSet {
    type Error = Error;
    fn try_from(f: BeamformerFile) -> Result<Self> {
        if f.beams.len() != f.k {
            return Err(Error::Dimension(format!("{} beams listed for k = {}", f.beams.len(), f.k)));
        }
        let w = f.beams.iter().map(|b| deinterleave(b, f.n_t)).collect::<Result<Vec<_>>>()?;
        BeamformerSet::new(w)
    }
}

impl From<BeamformerSet> for BeamformerFile {
    fn from(b: BeamformerSet) -> Self {
        BeamformerFile { n_t: b.n_t(), k: b.k(), beams: b.w.iter().map(|v| interleave(v)).collect() }
    }
}

/// SINR of user `i` for actual channel `h`:
/// `|h^H w_i|² / (Σ_{k≠i} |h^H w_k|² + σ²)`.
pub fn sinr(w: &BeamformerSet, i: usize, h: &[Complex64], sigma2: f64) -> Result<f64> {
    if h.len() != w.n_t() {
        return Err(Error::Dimension(format!("channel length {} vs beamformer length {}", h.len(), w.n_t())));
    }
    if i >= w.k() {
        return Err(Error::Dimension(format!("user {i} out of range for {} beams", w.k())));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Invalid(format!("noise power must be > 0, got {sigma2}")));
    }
    Ok(sinr_unchecked(w.beams(), i, h, sigma2))
}

pub(crate) fn sinr_unchecked(w: &[Vec<Complex64>], i: usize, h: &[Complex64], sigma2: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let g = crate::numerics::inner(h, wk).norm_sqr();
        if k == i {
            signal = g;
        } else {
            interference += g;
        }
    }
    signal / (interference + sigma2)
}

/// SINR of every user at the presumed channels.
pub fn nominal_sinrs(w: &BeamformerSet, inst: &BeamformingInstance) -> Result<Vec<f64>> {
    (0..inst.k()).map(|i| sinr(w, i, inst.channel(i), inst.noise(i))).collect()
}

fn interleave(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn deinterleave(v: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if v.len() != 2 * n {
        return Err(Error::Dimension(format!("expected {} interleaved values, got {}", 2 * n, v.len())));
    }
    Ok(v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

// ---------------------------------------------------------------------------
// Instance file schema
// ---------------------------------------------------------------------------

/// On-disk instance layout (JSON).
///
/// ```text
/// {
///   "n_t": 3, "k": 3,
///   "sigma2": [0.1, 0.1, 0.1],          // noise powers, linear
///   "gamma_db": [11, 11, 11],           // SINR targets, dB
///   "rho": [0.1, 0.1, 0.1],             // outage caps, linear
///   "channels": [[re, im, ...], ...],   // presumed channels, interleaved
///   "error_model": { "type": "gaussian", "sigma_e2": 0.002, "correlation": 0.0 }
/// }
/// ```
///
/// `error_model` also accepts `{"type": "gaussian", "covariances": [...]}`
/// with explicit per-user matrices and `{"type": "uniform", "epsilon": ...}`.
/// Scalars in `sigma_e2`/`epsilon` apply to every user. Written files always
/// use the explicit forms so they round-trip exactly.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n_t: usize,
    k: usize,
    sigma2: Vec<f64>,
    gamma_db: Vec<f64>,
    rho: Vec<f64>,
    channels: Vec<Vec<f64>>,
    error_model: ErrorModelFile,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

impl ScalarOrVec {
    fn expand(&self, k: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            ScalarOrVec::Scalar(x) => Ok(vec![*x; k]),
            ScalarOrVec::Vec(v) if v.len() == k => Ok(v.clone()),
            ScalarOrVec::Vec(v) => Err(Error::Dimension(format!("{name} has {} entries for {k} users", v.len()))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ErrorModelFile {
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_e2: Option<ScalarOrVec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariances: Option<Vec<HermitianMatrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<ScalarOrVec>,
}

impl TryFrom<InstanceFile> for BeamformingInstance {
    type Error = Error;
    fn try_from(f: InstanceFile) -> Result<Self> {
        if f.channels.len() != f.k {
            return Err(Error::Dimension(format!("{} channels listed for k = {}", f.channels.len(), f.k)));
        }
        let channels = f.channels.iter().map(|c| deinterleave(c, f.n_t)).collect::<Result<Vec<_>>>()?;
        let em = f.error_model;
        let model = match em.kind.as_str() {
            "gaussian" => {
                if em.epsilon.is_some() {
                    return Err(Error::Invalid("gaussian error model does not take 'epsilon'".into()));
                }
                match (em.covariances, em.sigma_e2) {
                    (Some(c), None) if em.correlation.is_none() => ErrorModel::Gaussian { covariances: c },
                    (None, Some(s)) => {
                        let corr = em.correlation.unwrap_or(0.0);
                        let covariances = s
                            .expand(f.k, "sigma_e2")?
                            .into_iter()
                            .map(|v| HermitianMatrix::toeplitz_correlation(f.n_t, v, corr))
                            .collect();
                        ErrorModel::Gaussian { covariances }
                    }
                    _ => {
                        return Err(Error::Invalid(
                            "gaussian error model needs either 'covariances' or 'sigma_e2' (+ optional 'correlation')".into(),
                        ))
                    }
                }
            }
            "uniform" => {
                if em.sigma_e2.is_some() || em.covariances.is_some() || em.correlation.is_some() {
                    return Err(Error::Invalid("uniform error model only takes 'epsilon'".into()));
                }
                let eps = em.epsilon.ok_or_else(|| Error::Invalid("uniform error model needs 'epsilon'".into()))?;
                ErrorModel::Uniform { epsilon: eps.expand(f.k, "epsilon")? }
            }
            other => return Err(Error::Invalid(format!("unknown error model type '{other}'"))),
        };
        BeamformingInstance::new(channels, f.sigma2, f.gamma_db, f.rho, model)
    }
}

impl From<BeamformingInstance> for InstanceFile {
    fn from(inst: BeamformingInstance) -> Self {
        let error_model = match inst.error_model {
            ErrorModel::Gaussian { covariances } => ErrorModelFile {
                kind: "gaussian".into(),
                sigma_e2: None,
                correlation: None,
                covariances: Some(covariances),
                epsilon: None,
            },
            ErrorModel::Uniform { epsilon } => ErrorModelFile {
                kind: "uniform".into(),
                sigma_e2: None,
                correlation: None,
                covariances: None,
                epsilon: Some(ScalarOrVec::Vec(epsilon)),
            },
        };
        InstanceFile {
            n_t: inst.n_t,
            k: inst.channels.len(),
            sigma2: inst.noise,
            gamma_db: inst.gamma_db,
            rho: inst.rho,
            channels: inst.channels.iter().map(|c| interleave(c)).collect(),
            error_model,
        }
    }
}

//! Browser bindings for three operations: design beamformers for a random
//! instance, re-validate a design with fresh draws, and look up the sphere
//! radius of the ball-bounding method.
//!
//! Each binding wraps a plain Rust function returning JSON text, so the
//! logic is testable on native targets.

use rarbf::experiment::{run_pipeline, validate_mc, PipelineOptions};
use rarbf::model::{linear_to_db, BeamformerSet, BeamformingInstance, ErrorSpec, InstanceParams};
use rarbf::restriction::MethodSelector;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_SIDE: usize = 8;
const MAX_SAMPLES: usize = 200_000;

#[derive(Serialize)]
struct Design {
    method: &'static str,
    status: rarbf::conic::SolveStatus,
    feasible: bool,
    total_power: Option<f64>,
    total_power_db: Option<f64>,
    min_p_hat: Option<f64>,
    p_hat: Vec<f64>,
    solve_seconds: f64,
    instance: BeamformingInstance,
    beamformers: Option<BeamformerSet>,
}

#[derive(Serialize)]
struct Check {
    samples: usize,
    p_hat: Vec<f64>,
    pass: Vec<bool>,
    min_p_hat: f64,
    all_pass: bool,
}

fn check_sizes(nt: usize, k: usize, samples: usize) -> Result<(), String> {
    if !(1..=MAX_SIDE).contains(&nt) || !(1..=MAX_SIDE).contains(&k) {
        return Err(format!("antennas and users must lie in 1..={MAX_SIDE}"));
    }
    if samples > MAX_SAMPLES {
        return Err(format!("at most {MAX_SAMPLES} draws per user"));
    }
    Ok(())
}

/// Designs beamformers for trial 0 of a seeded Gaussian-error instance and
/// validates them with `samples` draws per user (0 skips validation).
#[allow(clippy::too_many_arguments)]
pub fn design(
    method: &str,
    nt: usize,
    k: usize,
    gamma_db: f64,
    rho: f64,
    sigma_e2: f64,
    seed: u64,
    samples: usize,
) -> Result<String, String> {
    check_sizes(nt, k, samples)?;
    let method: MethodSelector = method.parse().map_err(|e: rarbf::Error| e.to_string())?;
    if method.needs_uniform() {
        return Err("the demo draws Gaussian errors; pick a Gaussian method".into());
    }
    let params = InstanceParams {
        n_t: nt,
        k,
        sigma2: 0.1,
        gamma_db,
        rho,
        errors: ErrorSpec::Gaussian { sigma_e2, correlation: 0.0 },
    };
    let inst = params.generate(seed, 0).map_err(|e| e.to_string())?;
    let opts = PipelineOptions { samples, seed, ..Default::default() };
    let o = run_pipeline(&inst, &method, &opts).map_err(|e| e.to_string())?;
    let d = Design {
        method: method.name(),
        status: o.status(),
        feasible: o.feasible,
        total_power: o.total_power,
        total_power_db: o.total_power.map(linear_to_db),
        min_p_hat: o.validation.as_ref().map(|v| v.min_p_hat()),
        p_hat: o.validation.as_ref().map(|v| v.p_hat.clone()).unwrap_or_default(),
        solve_seconds: o.timings.solve,
        instance: inst,
        beamformers: o.beamformers,
    };
    serde_json::to_string(&d).map_err(|e| e.to_string())
}

/// Monte Carlo check of saved beamformers (JSON) against an instance (JSON).
pub fn validate(instance_json: &str, beamformers_json: &str, samples: usize, seed: u64) -> Result<String, String> {
    let inst = BeamformingInstance::from_json(instance_json).map_err(|e| e.to_string())?;
    let w: BeamformerSet = serde_json::from_str(beamformers_json).map_err(|e| e.to_string())?;
    check_sizes(inst.n_t(), inst.k(), samples)?;
    let r = validate_mc(&w, &inst, samples, seed, 0).map_err(|e| e.to_string())?;
    let c = Check { samples, min_p_hat: r.min_p_hat(), all_pass: r.all_pass(), p_hat: r.p_hat, pass: r.pass };
    serde_json::to_string(&c).map_err(|e| e.to_string())
}

/// Ball radius covering `1 − ρ` of a standard complex Gaussian in `nt` dimensions.
pub fn sphere_radius(nt: usize, rho: f64) -> Result<f64, String> {
    rarbf::restriction::sphere_radius(nt, rho).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = design)]
#[allow(clippy::too_many_arguments)]
pub fn design_js(
    method: &str,
    nt: usize,
    k: usize,
    gamma_db: f64,
    rho: f64,
    sigma_e2: f64,
    seed: u32,
    samples: usize,
) -> Result<String, JsError> {
    design(method, nt, k, gamma_db, rho, sigma_e2, seed as u64, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = validate)]
pub fn validate_js(instance_json: &str, beamformers_json: &str, samples: usize, seed: u32) -> Result<String, JsError> {
    validate(instance_json, beamformers_json, samples, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sphereRadius)]
pub fn sphere_radius_js(nt: usize, rho: f64) -> Result<f64, JsError> {
    sphere_radius(nt, rho).map_err(|e| JsError::new(&e))
}

use serde::{Deserialize, Serialize};

use super::{run_pipeline, PipelineOptions, PipelineOutcome};
use crate::error::{Error, Result};
use crate::model::BeamformingInstance;
use crate::restriction::{sphere_radius, MethodSelector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectionOptions {
    /// Midpoint evaluations after the nominal and loosest designs.
    pub iters: usize,
    /// Validation draws per user at every step.
    pub samples: usize,
    /// Loosest effective outage level tried for the moment-based methods.
    pub rho_max: f64,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self { iters: 6, samples: 10_000, rho_max: 0.9 }
    }
}

impl BisectionOptions {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Invalid("bisection needs at least one validation sample".into()));
        }
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return Err(Error::Domain(format!("rho_max must lie in (0, 1), got {}", self.rho_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub knob: f64,
    pub feasible: bool,
    pub total_power: Option<f64>,
    /// `p̂_i ≥ 1 − ρ_i` for all users.
    pub validated: bool,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionOutcome {
    /// Method with the knob of the returned design.
    pub method: MethodSelector,
    pub nominal_knob: f64,
    pub knob: f64,
    pub nominal_power: Option<f64>,
    pub design: PipelineOutcome,
    pub steps: Vec<BisectionStep>,
    /// The nominal design did not meet the target; it is returned as is.
    pub nominal_failed: bool,
    /// The loosest knob was accepted.
    pub bound_hit: bool,
}

impl BisectionOutcome {
    pub fn total_power(&self) -> Option<f64> {
        self.design.total_power
    }
}

/// Knob at looseness `t ∈ [0, 1]`: the radius shrinks to zero for the
/// sphere method, the effective outage level grows to `rho_max` otherwise.
fn knob_at(method: &MethodSelector, nominal: f64, rho_max: f64, t: f64) -> f64 {
    match method {
        MethodSelector::SphereBounding { .. } => nominal * (1.0 - t),
        _ => nominal + t * (rho_max - nominal),
    }
}

fn nominal_knob(inst: &BeamformingInstance, method: &MethodSelector) -> Result<f64> {
    if let Some(k) = method.knob() {
        return Ok(k);
    }
    let users = 0..inst.k();
    Ok(match method {
        // the most conservative user sets a common radius
        MethodSelector::SphereBounding { .. } => {
            users.map(|i| sphere_radius(inst.n_t(), inst.rho(i))).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max)
        }
        _ => users.map(|i| inst.rho(i)).fold(f64::INFINITY, f64::min),
    })
}

/// Loosens the method's conservatism knob as far as Monte Carlo validation
/// allows. Every step validates on the same draws, and a step is accepted
/// only if it meets the target and does not raise the power.
pub fn bisection_refine(
    inst: &BeamformingInstance,
    method: &MethodSelector,
    bopts: &BisectionOptions,
    popts: &PipelineOptions,
) -> Result<BisectionOutcome> {
    if !method.is_robust() {
        return Err(Error::Invalid("bisection needs a robust method".into()));
    }
    bopts.validate()?;
    let popts = PipelineOptions { samples: bopts.samples, ..popts.clone() };
    let k0 = nominal_knob(inst, method)?;
    if method.knob().is_none() && !matches!(method, MethodSelector::SphereBounding { .. }) && bopts.rho_max <= k0 {
        return Err(Error::Domain(format!("rho_max {} must exceed the nominal outage level {k0}", bopts.rho_max)));
    }
    let nominal = run_pipeline(inst, method, &popts)?;
    let passes = |o: &PipelineOutcome| o.feasible && o.validation.as_ref().is_some_and(|v| v.meets_target());
    let mut out = BisectionOutcome {
        method: *method,
        nominal_knob: k0,
        knob: k0,
        nominal_power: nominal.total_power,
        nominal_failed: nominal.feasible && !passes(&nominal),
        design: nominal,
        steps: vec![],
        bound_hit: false,
    };
    if !passes(&out.design) || bopts.iters == 0 {
        return Ok(out);
    }

    let step = |t: f64, out: &mut BisectionOutcome| -> Result<bool> {
        let knob = knob_at(method, k0, bopts.rho_max, t);
        let sel = method.with_knob(Some(knob));
        let o = run_pipeline(inst, &sel, &popts)?;
        let best = out.design.total_power.unwrap_or(f64::INFINITY);
        let accepted = passes(&o) && o.total_power.is_some_and(|p| p <= best);
        out.steps.push(BisectionStep {
            knob,
            feasible: o.feasible,
            total_power: o.total_power,
            validated: passes(&o),
            accepted,
        });
        if accepted {
            out.method = sel;
            out.knob = knob;
            out.design = o;
        }
        Ok(accepted)
    };

    if step(1.0, &mut out)? {
        out.bound_hit = true;
        return Ok(out);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..bopts.iters {
        let mid = 0.5 * (lo + hi);
        if step(mid, &mut out)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(out)
}

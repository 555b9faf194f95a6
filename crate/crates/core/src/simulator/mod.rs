//! Monte Carlo simulation of the Poisson network.
//!
//! Each trial samples a torus realization with the typical pair at the
//! centre, lets every other pair claim relays in a random order, and checks
//! whether the typical pair has a route whose hops all clear the SIR
//! threshold in their subslots.

mod engine;
pub mod fading;
pub mod index;
mod interference;
mod realization;

use rayon::prelude::*;

use crate::analytics::{NetworkConfig, RetransPolicy};
use crate::error::{Error, Result};

pub use engine::{plan, select_route, Plan};
pub use fading::{FadingDraws, FadingKind, NodeId};
pub use interference::{evaluate_sir, far_field_interference, pathloss, tail_interference, Link};
pub use realization::{
    sample_network, sample_network_region, window_guard, NetworkRealization, Node, Pair, Role, DEST_BIT,
    TYPICAL_SOURCE,
};

use fading::mix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    /// Depth-first search over relay chains with per-hop SIR checks.
    Dynamic,
    /// Relays nearest the equidistant points on the source–destination segment.
    PredeterminedEquidistant,
    /// No interference; each chain within the budget succeeds independently
    /// with its analytic success probability.
    SyntheticIndependent,
}

impl SimMode {
    pub fn tag(self) -> &'static str {
        match self {
            SimMode::Dynamic => "dynamic",
            SimMode::PredeterminedEquidistant => "predetermined",
            SimMode::SyntheticIndependent => "independent",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "dynamic" => Some(SimMode::Dynamic),
            "predetermined" | "predetermined_equidistant" => Some(SimMode::PredeterminedEquidistant),
            "independent" | "synthetic" | "synthetic_independent" => Some(SimMode::SyntheticIndependent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Interferers within this distance of a receiver are summed exactly;
    /// the rest contribute their mean. `None` sums the whole window.
    pub interference_radius: Option<f64>,
    /// Add the mean interference from beyond the window, so the torus
    /// stands in for the infinite plane.
    pub far_field: bool,
    /// Radius of the cheap first interference pass.
    pub near_radius: f64,
    /// Route-search expansions allowed per trial.
    pub expansion_cap: u64,
    pub parallel: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { interference_radius: Some(40.0), far_field: true, near_radius: 10.0, expansion_cap: 1_000_000, parallel: true }
    }
}

impl SimOptions {
    pub fn exact() -> Self {
        SimOptions { interference_radius: None, far_field: false, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Outage frequency.
    pub mean: f64,
    /// Standard error of `mean`.
    pub std: f64,
    /// Per-trial standard deviation.
    pub sample_std: f64,
    pub trials: u64,
    pub seed: u64,
    /// Trials whose route search was cut off.
    pub cap_hits: u64,
}

impl McEstimate {
    pub fn from_outcomes(outages: u64, trials: u64, seed: u64, cap_hits: u64) -> Self {
        let n = trials as f64;
        let p = outages as f64 / n;
        let sample_std = if trials > 1 { (p * (1.0 - p) * n / (n - 1.0)).sqrt() } else { 0.0 };
        McEstimate { mean: p, std: sample_std / n.sqrt(), sample_std, trials, seed, cap_hits }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    pub cap_hit: bool,
}

pub const MIN_TRIALS: u64 = 1000;

fn check_sim_config(cfg: &NetworkConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.policy != RetransPolicy::SingleAttempt {
        return Err(Error::InvalidConfig("the simulator models single-attempt routes only".into()));
    }
    if cfg.m == 0 {
        return Err(Error::InvalidConfig("the simulator needs at least one relay".into()));
    }
    Ok(())
}

/// Sub-seed of trial `i`; shared by all modes so runs pair up.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    mix(seed, i)
}

/// One trial of the typical pair.
pub fn run_trial(cfg: &NetworkConfig, window: f64, mode: SimMode, opts: &SimOptions, trial_seed: u64) -> Result<TrialOutcome> {
    run_planned_trial(cfg, window, mode, opts, &plan(cfg, window, mode, opts)?, trial_seed)
}

fn run_planned_trial(
    cfg: &NetworkConfig,
    window: f64,
    mode: SimMode,
    opts: &SimOptions,
    plan: &Plan,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    let rs = mix(trial_seed, 1);
    let real = match plan.rho_mat {
        Some(r) => sample_network_region(cfg, window, rs, r)?,
        None => sample_network(cfg, window, rs)?,
    };
    let mut scene = engine::Scene::build(&real, cfg, mode, opts, *plan)?;
    let out = scene.search(mode, false);
    Ok(TrialOutcome { success: out.chain.is_some(), cap_hit: out.cap_hit })
}

/// Per-trial outcomes in trial order.
pub fn trial_outcomes(
    cfg: &NetworkConfig,
    window: f64,
    trials: u64,
    mode: SimMode,
    seed: u64,
    opts: &SimOptions,
) -> Result<Vec<TrialOutcome>> {
    check_sim_config(cfg)?;
    let guard = window_guard(cfg);
    if !(window >= guard) {
        return Err(Error::DegenerateWindow { window, guard });
    }
    let plan = plan(cfg, window, mode, opts)?;
    let one = |i: u64| run_planned_trial(cfg, window, mode, opts, &plan, trial_seed(seed, i));
    if opts.parallel {
        (0..trials).into_par_iter().map(one).collect()
    } else {
        (0..trials).map(one).collect()
    }
}

/// Outage estimate of the typical pair over `trials` independent realizations.
pub fn run_outage_trials(cfg: &NetworkConfig, window: f64, trials: u64, mode: SimMode, seed: u64) -> Result<McEstimate> {
    run_outage_trials_with(cfg, window, trials, mode, seed, &SimOptions::default())
}

pub fn run_outage_trials_with(
    cfg: &NetworkConfig,
    window: f64,
    trials: u64,
    mode: SimMode,
    seed: u64,
    opts: &SimOptions,
) -> Result<McEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidConfig(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let outcomes = trial_outcomes(cfg, window, trials, mode, seed, opts)?;
    let outages = outcomes.iter().filter(|o| !o.success).count() as u64;
    let caps = outcomes.iter().filter(|o| o.cap_hit).count() as u64;
    Ok(McEstimate::from_outcomes(outages, trials, seed, caps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Largest grid density meeting the target.
    pub lambda: f64,
    /// `lambda / (m+1)`.
    pub effective: f64,
    /// Estimate at every grid point, in ascending λ.
    pub points: Vec<(f64, McEstimate)>,
}

/// Largest λ on `grid` whose simulated outage is at most `epsilon`.
#[allow(clippy::too_many_arguments)]
pub fn max_density_sweep(
    cfg: &NetworkConfig,
    epsilon: f64,
    mode: SimMode,
    grid: &[f64],
    window: f64,
    trials: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<SweepResult> {
    if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidConfig("density grid must be non-empty and positive".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut points = Vec::with_capacity(sorted.len());
    for &lambda in &sorted {
        let est = run_outage_trials_with(&cfg.with_lambda(lambda), window, trials, mode, seed, opts)?;
        if points.is_empty() && est.mean > epsilon {
            return Err(Error::NoneFound(lambda));
        }
        points.push((lambda, est));
    }
    let lambda = points.iter().filter(|p| p.1.mean <= epsilon).map(|p| p.0).fold(f64::NAN, f64::max);
    Ok(SweepResult { lambda, effective: lambda / (cfg.m as f64 + 1.0), points })
}


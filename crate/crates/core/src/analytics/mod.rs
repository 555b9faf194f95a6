//! Expected route counts, outage lower bounds, capacity upper bounds and
//! their numeric inversions.

mod capacity;
mod counts;
pub mod inversion;

pub use capacity::*;
pub use counts::*;

use std::f64::consts::PI;

use crate::channel::HopModel;
use crate::error::{Error, Result};
use crate::geometry::{min_sum_squared, AttemptVector};

#[derive(Debug, Clone, PartialEq)]
pub enum RetransPolicy {
    SingleAttempt,
    BestEffort(AttemptVector),
    TotalBudget(u32),
}

impl RetransPolicy {
    pub fn label(&self) -> String {
        match self {
            RetransPolicy::SingleAttempt => "single".to_string(),
            RetransPolicy::BestEffort(k) => {
                let parts: Vec<String> = k.as_slice().iter().map(|v| v.to_string()).collect();
                format!("best_effort({})", parts.join(";"))
            }
            RetransPolicy::TotalBudget(m) => format!("total_budget({m})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Density of all nodes.
    pub lambda: f64,
    /// Fraction of nodes that are sources (active transmitters).
    pub gamma: f64,
    /// Source–destination distance.
    pub r: f64,
    /// Number of relays.
    pub m: usize,
    /// Budget on the sum of squared hop lengths; `None` is unbounded.
    pub d_max: Option<f64>,
    pub hop: HopModel,
    pub policy: RetransPolicy,
}

impl NetworkConfig {
    pub fn new(lambda: f64, gamma: f64, r: f64, m: usize, d_max: Option<f64>, hop: HopModel) -> Self {
        NetworkConfig { lambda, gamma, r, m, d_max, hop, policy: RetransPolicy::SingleAttempt }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        NetworkConfig { lambda, ..self.clone() }
    }

    pub fn with_m(&self, m: usize) -> Self {
        NetworkConfig { m, ..self.clone() }
    }

    pub fn with_d_max(&self, d_max: Option<f64>) -> Self {
        NetworkConfig { d_max, ..self.clone() }
    }

    pub fn with_policy(&self, policy: RetransPolicy) -> Self {
        NetworkConfig { policy, ..self.clone() }
    }

    /// Checks every invariant of the configuration.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidConfig(format!("R must be positive, got {}", self.r)));
        }
        Ok(())
    }

    /// The invariants that do not involve λ or R, so λ can be swept from 0.
    pub(crate) fn check_shape(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidConfig(format!("R must be non-negative, got {}", self.r)));
        }
        if !(self.hop.g > 0.0 && self.hop.k > 0.0) {
            return Err(Error::InvalidConfig("hop model needs G > 0 and K > 0".into()));
        }
        if let Some(d) = self.d_max {
            let lo = min_sum_squared(self.r, self.m);
            if !(d > lo) {
                return Err(Error::Domain(format!("D_m = {d} must exceed R²/(m+1) = {lo}")));
            }
        }
        match &self.policy {
            RetransPolicy::SingleAttempt => {}
            RetransPolicy::BestEffort(k) => {
                if k.len() != self.m + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "best-effort attempt vector needs {} entries, got {}",
                        self.m + 1,
                        k.len()
                    )));
                }
            }
            RetransPolicy::TotalBudget(total) => {
                if (*total as usize) < self.m + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "total budget {total} is below m+1 = {}",
                        self.m + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// λ_t = λγ
    pub fn lambda_t(&self) -> f64 {
        self.lambda * self.gamma
    }

    /// Λ = λγK
    pub fn big_lambda(&self) -> f64 {
        self.lambda * self.gamma * self.hop.k
    }

    /// κ = Gπ(1−γ)/(γK)
    pub fn kappa(&self) -> f64 {
        self.hop.g * self.relay_area_factor()
    }

    /// π(1−γ)/(γK), the λ-free part of the relay intensity integral.
    pub fn relay_area_factor(&self) -> f64 {
        PI * (1.0 - self.gamma) / (self.gamma * self.hop.k)
    }

    /// λ(1−γ)
    pub fn relay_density(&self) -> f64 {
        self.lambda * (1.0 - self.gamma)
    }

    /// Subslots per slot: m+1, Σk_i or M.
    pub fn subslots(&self) -> u32 {
        match &self.policy {
            RetransPolicy::SingleAttempt => self.m as u32 + 1,
            RetransPolicy::BestEffort(k) => k.total(),
            RetransPolicy::TotalBudget(total) => *total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    /// Successful transmissions per unit area per slot; NaN when invalid.
    pub value: f64,
    pub valid: bool,
    /// Smallest achievable ε.
    pub epsilon_floor: f64,
    /// Node density λ at which the bound is attained; NaN when invalid.
    pub lambda: f64,
    /// Normalizing subslot count.
    pub subslots: u32,
}

impl CapacityResult {
    pub(crate) fn invalid(epsilon_floor: f64, subslots: u32) -> Self {
        CapacityResult { value: f64::NAN, valid: false, epsilon_floor, lambda: f64::NAN, subslots }
    }

    pub(crate) fn from_lambda(lambda: f64, gamma: f64, epsilon: f64, floor: f64, subslots: u32) -> Self {
        CapacityResult {
            value: lambda * gamma * (1.0 - epsilon) / subslots as f64,
            valid: true,
            epsilon_floor: floor,
            lambda,
            subslots,
        }
    }
}

use crate::error::{domain, Error, Result};
use crate::geometry::{min_sum_squared, AttemptVector};
use crate::special::ln_upper_gamma_q_int;

use super::inversion::{bisect, expand_upward, golden_max};
use super::{expected_count, expected_relay_sets, outage_lower_bound};
#[cfg(test)]
use super::expected_relay_sets_unbounded;
use super::{CapacityResult, NetworkConfig, RetransPolicy};

const OUTAGE_TOL: f64 = 1e-12;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    Ok(())
}

/// ε_floor = exp(−Gκ^m/(m+1)), the outage bound as λ → 0 with no budget.
pub fn epsilon_floor(cfg: &NetworkConfig) -> f64 {
    outage_lower_bound(cfg.hop.g * cfg.kappa().powi(cfg.m as i32) / (cfg.m as f64 + 1.0))
}

/// Largest λ meeting ε with no distance budget:
/// (m+1)[m ln κ + ln G − ln(m+1) − ln ln(1/ε)]/(γKR²).
pub fn closed_form_max_density(cfg: &NetworkConfig, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    cfg.check_shape()?;
    let m = cfg.m as f64;
    let bracket = m * cfg.kappa().ln() + cfg.hop.g.ln() - (m + 1.0).ln() - (1.0 / epsilon).ln().ln();
    if bracket < 0.0 {
        return Err(Error::Unachievable { epsilon, floor: epsilon_floor(cfg) });
    }
    Ok((m + 1.0) * bracket / (cfg.gamma * cfg.hop.k * cfg.r * cfg.r))
}

/// Upper bound on single-attempt transmission capacity with no budget.
pub fn tc_upper_bound(cfg: &NetworkConfig, epsilon: f64) -> Result<CapacityResult> {
    check_epsilon(epsilon)?;
    cfg.check_shape()?;
    if cfg.m == 0 {
        return Err(domain("relay count m must be at least 1"));
    }
    let floor = epsilon_floor(cfg);
    let subslots = cfg.m as u32 + 1;
    if epsilon < floor {
        return Ok(CapacityResult::invalid(floor, subslots));
    }
    let m = cfg.m as f64;
    let bracket = m * cfg.kappa().ln() + cfg.hop.g.ln() - (m + 1.0).ln() - (1.0 / epsilon).ln().ln();
    let value = bracket.max(0.0) * (1.0 - epsilon) / (cfg.hop.k * cfg.r * cfg.r);
    let lambda = value * (m + 1.0) / ((1.0 - epsilon) * cfg.gamma);
    Ok(CapacityResult { value, valid: true, epsilon_floor: floor, lambda, subslots })
}

/// T_{m+1} − T_m = [ln κ + ln((m+1)/(m+2))](1−ε)/(KR²).
pub fn tc_increment(cfg: &NetworkConfig, epsilon: f64) -> f64 {
    let m = cfg.m as f64;
    (cfg.kappa().ln() + ((m + 1.0) / (m + 2.0)).ln()) * (1.0 - epsilon) / (cfg.hop.k * cfg.r * cfg.r)
}

/// Gκ^m/((∏k) S_k) · e^{−ΛR²/S_k}: the n = k term of the best-effort count
/// with its sign and G-power normalized, the term the closed-form
/// best-effort bound inverts.
pub fn best_effort_dominant_term(cfg: &NetworkConfig, k: &AttemptVector) -> f64 {
    let s = k.harmonic_sum();
    cfg.hop.g * cfg.kappa().powi(cfg.m as i32) / (k.product() * s)
        * (-cfg.big_lambda() * cfg.r * cfg.r / s).exp()
}

/// Closed-form best-effort capacity bound
/// S_k(1−ε)[m ln κ + ln G − ln((∏k)S_k) − ln ln(1/ε)]/(KR²Σk).
pub fn tc_upper_bound_best_effort(cfg: &NetworkConfig, epsilon: f64, k: &AttemptVector) -> Result<CapacityResult> {
    check_epsilon(epsilon)?;
    cfg.check_shape()?;
    if k.len() != cfg.m + 1 {
        return Err(domain(format!("attempt vector needs {} entries, got {}", cfg.m + 1, k.len())));
    }
    let s = k.harmonic_sum();
    let coeff = cfg.hop.g * cfg.kappa().powi(cfg.m as i32) / (k.product() * s);
    let floor = outage_lower_bound(coeff);
    let subslots = k.total();
    if epsilon < floor {
        return Ok(CapacityResult::invalid(floor, subslots));
    }
    let bracket = (coeff / (1.0 / epsilon).ln()).ln().max(0.0);
    let value = s * (1.0 - epsilon) * bracket / (cfg.hop.k * cfg.r * cfg.r * subslots as f64);
    let lambda = s * bracket / (cfg.gamma * cfg.hop.k * cfg.r * cfg.r);
    Ok(CapacityResult { value, valid: true, epsilon_floor: floor, lambda, subslots })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalDensity {
    /// λ₀ = ln((m+1)D/R²) / (γK(D − R²/(m+1)))
    pub lambda0: f64,
    /// exp{Gκ^m/(m+1)[Δ^{1/(1−Δ)} − Δ^{Δ/(1−Δ)}]}, Δ = R²/((m+1)D).
    pub min_outage_bound: f64,
}

pub fn critical_density(cfg: &NetworkConfig) -> Result<CriticalDensity> {
    cfg.check_shape()?;
    let d = cfg.d_max.ok_or_else(|| domain("critical density needs a finite D_m"))?;
    let c = min_sum_squared(cfg.r, cfg.m);
    if !(c > 0.0) {
        return Err(domain("critical density needs R > 0"));
    }
    let lambda0 = ((cfg.m as f64 + 1.0) * d / (cfg.r * cfg.r)).ln() / (cfg.gamma * cfg.hop.k * (d - c));
    let delta = c / d;
    let lead = cfg.hop.g * cfg.kappa().powi(cfg.m as i32) / (cfg.m as f64 + 1.0);
    let inner = delta.powf(1.0 / (1.0 - delta)) - delta.powf(delta / (1.0 - delta));
    Ok(CriticalDensity { lambda0, min_outage_bound: (lead * inner).exp() })
}

/// The λ maximizing E(N_m) under a finite budget (minimizing the outage
/// bound). Coincides with λ₀ for m = 1; lies above it for m ≥ 2.
pub fn outage_minimizing_density(cfg: &NetworkConfig) -> Result<f64> {
    let crit = critical_density(cfg)?;
    let log_e = |lambda: f64| -> f64 {
        expected_relay_sets(&cfg.with_lambda(lambda)).map(|e| e.ln()).unwrap_or(f64::NEG_INFINITY)
    };
    let c = min_sum_squared(cfg.r, cfg.m);
    // E(λ) ≤ lead·e^{−Λc}, so beyond this λ it drops under E(λ₀).
    let lead = cfg.hop.g * cfg.kappa().powi(cfg.m as i32) / (cfg.m as f64 + 1.0);
    let e0 = log_e(crit.lambda0);
    let hi = ((lead.ln() - e0) / (cfg.gamma * cfg.hop.k * c)).max(crit.lambda0 * 2.0);
    Ok(golden_max(log_e, crit.lambda0 * 1e-3, hi, 1e-12))
}

/// Largest λ whose outage bound stays at or below ε.
///
/// With a finite budget the bound is not monotone; the search runs on the
/// increasing branch above the outage-minimizing density.
pub fn max_density_for_outage(cfg: &NetworkConfig, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    cfg.check_shape()?;
    let outage = |lambda: f64| -> f64 {
        expected_count(&cfg.with_lambda(lambda)).map(outage_lower_bound).unwrap_or(f64::NAN)
    };
    match (&cfg.policy, cfg.d_max) {
        (RetransPolicy::SingleAttempt, Some(_)) => {
            let peak = outage_minimizing_density(cfg)?;
            let floor = outage(peak);
            if epsilon < floor {
                return Err(Error::Unachievable { epsilon, floor });
            }
            let hi = expand_upward(peak * 2.0, |x| outage(x) >= epsilon)?;
            bisect(outage, epsilon, peak, hi, OUTAGE_TOL)
        }
        _ => {
            // The count is decreasing in λ; the floor is its λ → 0 limit.
            let floor = outage(0.0);
            if epsilon < floor {
                return Err(Error::Unachievable { epsilon, floor });
            }
            let start = closed_form_max_density(cfg, epsilon.max(floor)).unwrap_or(1.0).max(1e-6);
            let hi = expand_upward(start, |x| outage(x) >= epsilon)?;
            bisect(outage, epsilon, 0.0, hi, OUTAGE_TOL)
        }
    }
}

/// Capacity bound for any policy by numeric inversion of the outage bound,
/// normalized by the policy's subslot count.
pub fn capacity_for_policy(cfg: &NetworkConfig, epsilon: f64) -> Result<CapacityResult> {
    let subslots = cfg.subslots();
    match max_density_for_outage(cfg, epsilon) {
        Ok(lambda) => {
            let floor = match (&cfg.policy, cfg.d_max) {
                (RetransPolicy::SingleAttempt, Some(_)) => {
                    outage_lower_bound(expected_relay_sets(&cfg.with_lambda(outage_minimizing_density(cfg)?))?)
                }
                _ => outage_lower_bound(expected_count(&cfg.with_lambda(0.0))?),
            };
            Ok(CapacityResult::from_lambda(lambda, cfg.gamma, epsilon, floor, subslots))
        }
        Err(Error::Unachievable { floor, .. }) => Ok(CapacityResult::invalid(floor, subslots)),
        Err(e) => Err(e),
    }
}

/// Precise gap λ_∞ − λ_D between the unbounded and budgeted max densities,
/// from the fixed point δ = −ln(1 − Q(m, γK(λ_∞−δ)(D−c)))/(γKc).
pub fn distance_constraint_gap(cfg: &NetworkConfig, epsilon: f64) -> Result<f64> {
    Ok(distance_constraint_log_gap(cfg, epsilon)?.exp())
}

/// ln of `distance_constraint_gap`, usable when the gap underflows.
pub fn distance_constraint_log_gap(cfg: &NetworkConfig, epsilon: f64) -> Result<f64> {
    let d = cfg.d_max.ok_or_else(|| domain("the gap needs a finite D_m"))?;
    cfg.check_shape()?;
    let lambda_inf = closed_form_max_density(&cfg.with_d_max(None), epsilon)?;
    let c = min_sum_squared(cfg.r, cfg.m);
    let gk = cfg.gamma * cfg.hop.k;
    let mut gap = 0.0f64;
    let mut log_gap = f64::NEG_INFINITY;
    for _ in 0..200 {
        let y = gk * (lambda_inf - gap) * (d - c);
        if !(y > 0.0) {
            return Err(Error::Unachievable { epsilon, floor: f64::NAN });
        }
        let log_q = ln_upper_gamma_q_int(cfg.m as u32, y);
        // ln(−ln(1−Q)) without underflow when Q is tiny.
        let log_neg_ln = if log_q < -30.0 { log_q } else { (-(-log_q.exp()).ln_1p()).ln() };
        let next = log_neg_ln - (gk * c).ln();
        let done = (next - log_gap).abs() < 1e-13;
        log_gap = next;
        gap = next.exp();
        if !gap.is_finite() || gap >= lambda_inf {
            return Err(Error::Unachievable { epsilon, floor: f64::NAN });
        }
        if done {
            return Ok(log_gap);
        }
    }
    Err(Error::NoConvergence("distance-constraint gap fixed point".into()))
}

/// Capacity bound under predetermined equidistant routing, which behaves
/// like a single hop: (1−ε)/(KR²)·ln(G/(1−ε)).
pub fn predetermined_tc_bound(cfg: &NetworkConfig, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let ratio = cfg.hop.g / (1.0 - epsilon);
    if !(ratio > 1.0) {
        return Err(domain(format!("G/(1−ε) = {ratio} must exceed 1")));
    }
    Ok((1.0 - epsilon) * (ratio.ln() / (cfg.hop.k * cfg.r * cfg.r)))
}

/// Largest contention density λ_t with single-hop outage 1 − G e^{−λ_t K R²} ≤ ε,
/// found by bisection.
pub fn single_hop_max_contention(cfg: &NetworkConfig, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let outage = |lt: f64| 1.0 - cfg.hop.g * (-lt * cfg.hop.k * cfg.r * cfg.r).exp();
    if outage(0.0) > epsilon {
        return Err(Error::Unachievable { epsilon, floor: outage(0.0) });
    }
    let hi = expand_upward(1.0 / (cfg.hop.k * cfg.r * cfg.r), |x| outage(x) >= epsilon)?;
    bisect(outage, epsilon, 0.0, hi, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::HopModel;
    use std::f64::consts::PI;

    fn cfg(gamma: f64, m: usize, d: Option<f64>) -> NetworkConfig {
        NetworkConfig::new(0.1, gamma, 4.0, m, d, HopModel::custom(1.0, PI).unwrap())
    }

    #[test]
    fn tc_example() {
        let c = cfg(0.05, 2, None);
        let t = tc_upper_bound(&c, 0.05).unwrap();
        let expect = (2.0 * 19f64.ln() - 3f64.ln() - 20f64.ln().ln()) * 0.95 / (16.0 * PI);
        assert!(t.valid);
        assert!((t.value - expect).abs() < 1e-15);
        assert!((t.value - 0.0698).abs() < 1e-4);
        assert_eq!(t.subslots, 3);
    }

    #[test]
    fn tc_floor_example() {
        let c = cfg(0.5, 2, None);
        assert!((c.kappa() - 1.0).abs() < 1e-15);
        let t = tc_upper_bound(&c, 0.05).unwrap();
        assert!(!t.valid);
        assert!((t.epsilon_floor - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((t.epsilon_floor - 0.7165).abs() < 1e-4);
    }

    #[test]
    fn tc_round_trip() {
        let c = cfg(0.05, 2, None);
        let eps = 0.05;
        let t = tc_upper_bound(&c, eps).unwrap();
        let lambda = t.value * 3.0 / ((1.0 - eps) * c.gamma);
        let back = outage_lower_bound(expected_relay_sets_unbounded(&c.with_lambda(lambda)).unwrap());
        assert!((back - eps).abs() < 1e-10);
    }

    #[test]
    fn best_effort_all_ones_reduces() {
        let c = cfg(0.05, 2, None);
        let a = tc_upper_bound(&c, 0.05).unwrap();
        let b = tc_upper_bound_best_effort(&c, 0.05, &AttemptVector::ones(3)).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
        assert!((a.epsilon_floor - b.epsilon_floor).abs() < 1e-15);
    }

    #[test]
    fn critical_density_example() {
        let c = cfg(0.5, 1, Some(16.0));
        let crit = critical_density(&c).unwrap();
        assert!((crit.lambda0 - 2f64.ln() / (4.0 * PI)).abs() < 1e-15);
        assert!((crit.lambda0 - 0.05516).abs() < 1e-5);
        let peak = outage_minimizing_density(&c).unwrap();
        assert!((peak - crit.lambda0).abs() < 1e-7 * crit.lambda0);
        // m = 1: the bound at λ₀ equals the displayed minimum.
        let e = expected_relay_sets(&c.with_lambda(crit.lambda0)).unwrap();
        assert!((outage_lower_bound(e) - crit.min_outage_bound).abs() < 1e-12);
    }

    #[test]
    fn critical_density_vanishes_with_budget() {
        let mut prev = f64::INFINITY;
        for &d in &[1e2, 1e4, 1e6, 1e8] {
            let l0 = critical_density(&cfg(0.5, 2, Some(d))).unwrap().lambda0;
            assert!(l0 < prev);
            prev = l0;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn unbounded_inversion_matches_closed_form() {
        let c = cfg(0.05, 3, None);
        for &eps in &[0.01, 0.05, 0.2] {
            let a = max_density_for_outage(&c, eps).unwrap();
            let b = closed_form_max_density(&c, eps).unwrap();
            assert!(((a - b) / b).abs() < 1e-8, "eps={eps}: {a} vs {b}");
        }
    }

    #[test]
    fn finite_budget_unachievable() {
        let c = cfg(0.5, 1, Some(16.0));
        let crit = critical_density(&c).unwrap();
        let err = max_density_for_outage(&c, crit.min_outage_bound * 0.9).unwrap_err();
        assert!(matches!(err, Error::Unachievable { .. }));
    }

    #[test]
    fn predetermined_examples() {
        let c = cfg(0.5, 1, None);
        let t = predetermined_tc_bound(&c, 0.05).unwrap();
        assert!((t - 0.95 * (1.0f64 / 0.95).ln() / (16.0 * PI)).abs() < 1e-18);
        assert!((t - 9.69e-4).abs() < 1e-6);
        assert!(predetermined_tc_bound(&c, 1e-12).unwrap() < 1e-13);
        let lt = single_hop_max_contention(&c, 0.05).unwrap();
        assert!((lt * 0.95 - t).abs() < 1e-15);
    }
}

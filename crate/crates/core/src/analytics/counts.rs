use crate::error::{domain, Result};
use crate::geometry::{min_sum_squared, AttemptVector};
use crate::special::{binomial, binomial_u64, lower_gamma_p_int};

use super::{NetworkConfig, RetransPolicy};

fn require_single(cfg: &NetworkConfig) -> Result<()> {
    if cfg.policy != RetransPolicy::SingleAttempt {
        return Err(domain("this count is defined for single-attempt routing only"));
    }
    if cfg.m == 0 {
        return Err(domain("relay count m must be at least 1"));
    }
    Ok(())
}

/// E(N_m) under the distance budget D_m:
/// Gκ^m/(m+1) · e^{−Λc} · P(m, Λ(D_m − c)), c = R²/(m+1).
pub fn expected_relay_sets(cfg: &NetworkConfig) -> Result<f64> {
    require_single(cfg)?;
    cfg.check_shape()?;
    let d = cfg.d_max.ok_or_else(|| domain("expected_relay_sets needs a finite D_m"))?;
    let c = min_sum_squared(cfg.r, cfg.m);
    let big = cfg.big_lambda();
    let lead = cfg.kappa().powi(cfg.m as i32) * cfg.hop.g / (cfg.m as f64 + 1.0);
    Ok(lead * (-big * c).exp() * lower_gamma_p_int(cfg.m as u32, big * (d - c)))
}

/// E(N_m) with no distance budget: Gκ^m/(m+1) · e^{−ΛR²/(m+1)}.
pub fn expected_relay_sets_unbounded(cfg: &NetworkConfig) -> Result<f64> {
    require_single(cfg)?;
    cfg.check_shape()?;
    let c = min_sum_squared(cfg.r, cfg.m);
    let lead = cfg.kappa().powi(cfg.m as i32) * cfg.hop.g / (cfg.m as f64 + 1.0);
    Ok(lead * (-cfg.big_lambda() * c).exp())
}

/// Calls `f` on every integer vector n with 1 ⪯ n ⪯ upper.
fn for_each_box(upper: &[u32], mut f: impl FnMut(&[u32])) {
    let mut n = vec![1u32; upper.len()];
    loop {
        f(&n);
        let mut i = 0;
        loop {
            if i == n.len() {
                return;
            }
            if n[i] < upper[i] {
                n[i] += 1;
                break;
            }
            n[i] = 1;
            i += 1;
        }
    }
}

/// Calls `f` on every positive integer vector of length `len` with sum ≤ `total`.
fn for_each_bounded_sum(len: usize, total: u32, mut f: impl FnMut(&[u32])) {
    fn rec(v: &mut Vec<u32>, len: usize, left: u32, f: &mut dyn FnMut(&[u32])) {
        if v.len() == len {
            f(v);
            return;
        }
        let still = (len - v.len() - 1) as u32;
        if left < still + 1 {
            return;
        }
        for x in 1..=(left - still) {
            v.push(x);
            rec(v, len, left - x, f);
            v.pop();
        }
    }
    let mut v = Vec::with_capacity(len);
    rec(&mut v, len, total, &mut f);
}

/// ∫ λ̃^m ∏ (G e^{−λ_t K r_i²})^{n_i} dZ_m over the plane:
/// H^m G^{Σn} e^{−ΛR²/S_n} / ((∏n) S_n), S_n = Σ 1/n_i, H = π(1−γ)/(γK).
pub fn pure_power_count(cfg: &NetworkConfig, n: &[u32]) -> f64 {
    let s: f64 = n.iter().map(|&v| 1.0 / v as f64).sum();
    let prod: f64 = n.iter().map(|&v| v as f64).product();
    let total: i32 = n.iter().map(|&v| v as i32).sum();
    let m = n.len() as i32 - 1;
    cfg.relay_area_factor().powi(m) * cfg.hop.g.powi(total) * (-cfg.big_lambda() * cfg.r * cfg.r / s).exp()
        / (prod * s)
}

fn check_retrans(cfg: &NetworkConfig) -> Result<()> {
    if cfg.m == 0 {
        return Err(domain("relay count m must be at least 1"));
    }
    if cfg.d_max.is_some() {
        return Err(domain("retransmission counts are defined without a distance budget"));
    }
    Ok(())
}

/// Expected potential relay sets when hop i is attempted k_i times.
///
/// Σ_{1⪯n⪯k} (−1)^{m+1} H^m (−G)^{Σn} ∏binom(k_i,n_i) e^{−ΛR²/S_n} / ((∏n) S_n).
pub fn expected_relay_sets_best_effort(cfg: &NetworkConfig, k: &AttemptVector) -> Result<f64> {
    check_retrans(cfg)?;
    cfg.check_shape()?;
    if k.len() != cfg.m + 1 {
        return Err(domain(format!("attempt vector needs {} entries, got {}", cfg.m + 1, k.len())));
    }
    let mut acc = 0.0;
    for_each_box(k.as_slice(), |n| {
        let total: u32 = n.iter().sum();
        // (−1)^{m+1}(−G)^{Σn} = (−1)^{Σn−(m+1)} G^{Σn}; G^{Σn} sits in pure_power_count.
        let sign = if (total as usize - (cfg.m + 1)) % 2 == 0 { 1.0 } else { -1.0 };
        let binoms: f64 = k
            .as_slice()
            .iter()
            .zip(n)
            .map(|(&ki, &ni)| binomial(ki as u64, ni as u64))
            .product();
        acc += sign * binoms * pure_power_count(cfg, n);
    });
    Ok(acc)
}

/// Number of length-(m+1) schedules j ⪰ k with Σj ≤ M weighted by
/// ∏ binom(j_l − 1, k_l − 1). Equals binom(M, Σk).
pub fn schedule_multiplicity(k: &[u32], budget: u32) -> u64 {
    binomial_u64(budget as u64, k.iter().map(|&v| v as u64).sum())
}

/// Probability that hops with per-slot success p complete in order within
/// `budget` slots, from the inclusion–exclusion expansion
/// Σ_{k⪰1, Σk≤M} (−1)^{Σk−(m+1)} binom(M, Σk) ∏ p_i^{k_i}.
pub fn total_budget_success(p: &[f64], budget: u32) -> f64 {
    let hops = p.len();
    let mut acc = 0.0;
    for_each_bounded_sum(hops, budget, |k| {
        let total: u32 = k.iter().sum();
        let sign = if (total as usize - hops) % 2 == 0 { 1.0 } else { -1.0 };
        let w: f64 = p.iter().zip(k).map(|(&pi, &ki)| pi.powi(ki as i32)).product();
        acc += sign * schedule_multiplicity(k, budget) as f64 * w;
    });
    acc
}

/// ∏ [1 − (1 − p_i)^{k_i}] through its inclusion–exclusion expansion.
pub fn best_effort_success(p: &[f64], k: &AttemptVector) -> f64 {
    let hops = p.len();
    let mut acc = 0.0;
    for_each_box(k.as_slice(), |n| {
        let total: u32 = n.iter().sum();
        let sign = if (total as usize - hops) % 2 == 0 { 1.0 } else { -1.0 };
        let term: f64 = p
            .iter()
            .zip(n)
            .zip(k.as_slice())
            .map(|((&pi, &ni), &ki)| binomial(ki as u64, ni as u64) * pi.powi(ni as i32))
            .product();
        acc += sign * term;
    });
    acc
}

/// Expected potential relay sets when the route shares M slots in total.
pub fn expected_relay_sets_total_budget(cfg: &NetworkConfig, budget: u32) -> Result<f64> {
    check_retrans(cfg)?;
    cfg.check_shape()?;
    if (budget as usize) < cfg.m + 1 {
        return Err(domain(format!("budget {budget} is below m+1 = {}", cfg.m + 1)));
    }
    let mut acc = 0.0;
    for_each_bounded_sum(cfg.m + 1, budget, |k| {
        let total: u32 = k.iter().sum();
        let sign = if (total as usize - (cfg.m + 1)) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * schedule_multiplicity(k, budget) as f64 * pure_power_count(cfg, k);
    });
    Ok(acc)
}

/// The expected count matching `cfg.policy` and `cfg.d_max`.
pub fn expected_count(cfg: &NetworkConfig) -> Result<f64> {
    match &cfg.policy {
        RetransPolicy::SingleAttempt => match cfg.d_max {
            Some(_) => expected_relay_sets(cfg),
            None => expected_relay_sets_unbounded(cfg),
        },
        RetransPolicy::BestEffort(k) => expected_relay_sets_best_effort(cfg, k),
        RetransPolicy::TotalBudget(total) => expected_relay_sets_total_budget(cfg, *total),
    }
}

/// p_out ≥ exp(−E(N_m)).
pub fn outage_lower_bound(expected_count: f64) -> f64 {
    (-expected_count).exp()
}

//! Per-hop success coefficients: g(r) = G·exp(−λ_t·K·r²).

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::special::{beta, binomial, factorial, gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    Rayleigh,
    NakagamiLow,
    NakagamiHigh,
    PathlossLower,
    PathlossUpper,
    /// User-supplied (G, K) with no physical fading attached.
    Custom,
}

impl ChannelModel {
    pub fn tag(self) -> &'static str {
        match self {
            ChannelModel::Rayleigh => "rayleigh",
            ChannelModel::NakagamiLow => "nakagami_low",
            ChannelModel::NakagamiHigh => "nakagami_high",
            ChannelModel::PathlossLower => "pathloss_lower",
            ChannelModel::PathlossUpper => "pathloss_upper",
            ChannelModel::Custom => "custom",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "rayleigh" => ChannelModel::Rayleigh,
            "nakagami_low" => ChannelModel::NakagamiLow,
            "nakagami_high" => ChannelModel::NakagamiHigh,
            "pathloss_lower" => ChannelModel::PathlossLower,
            "pathloss_upper" => ChannelModel::PathlossUpper,
            "custom" => ChannelModel::Custom,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub alpha: f64,
    pub beta: f64,
    /// Nakagami shape, integer ≥ 1. `None` for other channels.
    pub m0: Option<u32>,
}

impl FadingSpec {
    pub fn new(alpha: f64, beta: f64) -> Self {
        FadingSpec { alpha, beta, m0: None }
    }

    pub fn nakagami(alpha: f64, beta: f64, m0: u32) -> Self {
        FadingSpec { alpha, beta, m0: Some(m0) }
    }

    fn check(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(domain(format!("path-loss exponent must exceed 2, got {}", self.alpha)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(domain(format!("SIR threshold must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    fn delta(&self) -> f64 {
        2.0 / self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageRegime {
    Low,
    High,
}

/// The (G, K) pair of the exponential per-hop success law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopModel {
    pub g: f64,
    pub k: f64,
    pub model: ChannelModel,
    /// Physical channel the coefficients came from; the simulator draws
    /// fading from it.
    pub spec: Option<FadingSpec>,
}

impl HopModel {
    pub fn custom(g: f64, k: f64) -> Result<Self> {
        if !(g > 0.0) || !(k > 0.0) || !g.is_finite() || !k.is_finite() {
            return Err(domain(format!("G and K must be positive, got G={g}, K={k}")));
        }
        Ok(HopModel { g, k, model: ChannelModel::Custom, spec: None })
    }

    pub fn from_spec(model: ChannelModel, spec: FadingSpec) -> Result<Self> {
        match model {
            ChannelModel::Rayleigh => rayleigh_coeffs(spec),
            ChannelModel::NakagamiLow => nakagami_coeffs(spec, OutageRegime::Low),
            ChannelModel::NakagamiHigh => nakagami_coeffs(spec, OutageRegime::High),
            ChannelModel::PathlossLower => pathloss_coeff_bounds(spec).map(|b| b.0),
            ChannelModel::PathlossUpper => pathloss_coeff_bounds(spec).map(|b| b.1),
            ChannelModel::Custom => Err(domain("custom channel needs explicit G and K")),
        }
    }

    pub fn success(&self, r: f64, lambda_t: f64) -> Result<f64> {
        hop_success(self, r, lambda_t)
    }
}

/// C(α) = 2πΓ(2/α)Γ(1−2/α)/α.
pub fn rayleigh_constant(alpha: f64) -> Result<f64> {
    FadingSpec::new(alpha, 1.0).check()?;
    let d = 2.0 / alpha;
    Ok(2.0 * PI * gamma(d) * gamma(1.0 - d) / alpha)
}

pub fn rayleigh_coeffs(spec: FadingSpec) -> Result<HopModel> {
    spec.check()?;
    let k = spec.beta.powf(spec.delta()) * rayleigh_constant(spec.alpha)?;
    Ok(HopModel { g: 1.0, k, model: ChannelModel::Rayleigh, spec: Some(spec) })
}

/// Ω_{m0} = (2π/α) Σ_{k<m0} binom(m0,k) B(k+2/α, m0−k−2/α).
pub fn nakagami_omega(m0: u32, alpha: f64) -> Result<f64> {
    if m0 == 0 {
        return Err(domain("Nakagami shape must be at least 1"));
    }
    let d = 2.0 / alpha;
    let mut sum = 0.0;
    for k in 0..m0 {
        let b = m0 as f64 - k as f64 - d;
        if !(b > 0.0) {
            return Err(domain(format!("Beta argument {b} is not positive (alpha = {alpha})")));
        }
        sum += binomial(m0 as u64, k as u64) * beta(k as f64 + d, b);
    }
    Ok(2.0 * PI / alpha * sum)
}

/// Partial Bell polynomials B_{n,k}(x_1, …) for 0 ≤ k ≤ n ≤ `order`,
/// indexed `table[n][k]`; `x[i-1]` holds x_i.
pub fn partial_bell_table(x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; order + 1]; order + 1];
    b[0][0] = 1.0;
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = 0.0;
            for i in 1..=(n - k + 1) {
                acc += binomial((n - 1) as u64, (i - 1) as u64) * x[i - 1] * b[n - i][k - 1];
            }
            b[n][k] = acc;
        }
    }
    b
}

fn falling_factorials(d: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order);
    let mut acc = 1.0;
    for i in 0..order {
        acc *= d - i as f64;
        out.push(acc);
    }
    out
}

/// Υ_{k,l} for 1 ≤ l ≤ k: the coefficient with
/// (−s)^k L^{(k)}(s) / (k!·L(s)) = (1/k!) Σ_l (−δx)^l Υ_{k,l},
/// where L(s) = exp(−c·s^δ), δ = 2/α and x = c·s^δ.
pub fn upsilon(k: usize, l: usize, alpha: f64) -> f64 {
    if l == 0 || l > k {
        return 0.0;
    }
    let d = 2.0 / alpha;
    let x = falling_factorials(d, k);
    let b = partial_bell_table(&x, k);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * b[k][l] / d.powi(l as i32)
}

pub fn nakagami_coeffs(spec: FadingSpec, regime: OutageRegime) -> Result<HopModel> {
    spec.check()?;
    let m0 = spec.m0.ok_or_else(|| domain("Nakagami channel needs a shape m0"))?;
    let omega = nakagami_omega(m0, spec.alpha)?;
    let k = omega * spec.beta.powf(spec.delta());
    let (g, model) = match regime {
        OutageRegime::Low => (1.0, ChannelModel::NakagamiLow),
        OutageRegime::High => (nakagami_high_outage_g(m0, spec.alpha), ChannelModel::NakagamiHigh),
    };
    Ok(HopModel { g, k, model, spec: Some(spec) })
}

/// G = 1 + Σ_{k=1}^{m0−1} Σ_{l=1}^{k} (l!/k!)(−2/α)^l Υ_{k,l}.
pub fn nakagami_high_outage_g(m0: u32, alpha: f64) -> f64 {
    let d = 2.0 / alpha;
    let order = m0.saturating_sub(1) as usize;
    let b = partial_bell_table(&falling_factorials(d, order.max(1)), order.max(1));
    let mut g = 1.0;
    for k in 1..=order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for l in 1..=k {
            let ups = sign * b[k][l] / d.powi(l as i32);
            g += factorial(l as u32) / factorial(k as u32) * (-d).powi(l as i32) * ups;
        }
    }
    g
}

/// Exact Nakagami per-hop success e^{−x} Σ_{k<m0} (1/k!) Σ_l (−δx)^l Υ_{k,l}
/// with x = λ_t·K·r².
pub fn nakagami_success_exact(spec: FadingSpec, r: f64, lambda_t: f64) -> Result<f64> {
    let hm = nakagami_coeffs(spec, OutageRegime::Low)?;
    let m0 = spec.m0.unwrap_or(1) as usize;
    let d = spec.delta();
    let x = lambda_t * hm.k * r * r;
    let order = m0 - 1;
    let b = partial_bell_table(&falling_factorials(d, order.max(1)), order.max(1));
    let mut bracket = 1.0;
    for k in 1..=order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut inner = 0.0;
        for l in 1..=k {
            inner += (-x).powi(l as i32) * sign * b[k][l];
        }
        bracket += inner / factorial(k as u32);
    }
    Ok((-x).exp() * bracket)
}

/// L(s) = exp(−λ_t Ω_{m0} (s/m0)^{2/α}), the Laplace transform of the
/// Nakagami shot-noise interference.
pub fn shot_noise_laplace(m0: u32, alpha: f64, lambda_t: f64, s: f64) -> Result<f64> {
    let omega = nakagami_omega(m0, alpha)?;
    Ok((-lambda_t * omega * (s / m0 as f64).powf(2.0 / alpha)).exp())
}

/// k-th derivative of `shot_noise_laplace` from the Υ coefficients:
/// L^{(k)}(s) = L(s) Σ_l (−δx)^l Υ_{k,l} / (−s)^k with x = λ_t Ω (s/m0)^δ.
pub fn shot_noise_laplace_derivative(m0: u32, alpha: f64, lambda_t: f64, s: f64, k: usize) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain("s must be positive"));
    }
    let l0 = shot_noise_laplace(m0, alpha, lambda_t, s)?;
    if k == 0 {
        return Ok(l0);
    }
    let d = 2.0 / alpha;
    let x = lambda_t * nakagami_omega(m0, alpha)? * (s / m0 as f64).powf(d);
    let sum: f64 = (1..=k).map(|l| (-d * x).powi(l as i32) * upsilon(k, l, alpha)).sum();
    Ok(l0 * sum / (-s).powi(k as i32))
}

/// Lower and upper path-loss-only models: K = πβ^{2/α} and (α/(α−1))πβ^{2/α}.
pub fn pathloss_coeff_bounds(spec: FadingSpec) -> Result<(HopModel, HopModel)> {
    spec.check()?;
    let lower = PI * spec.beta.powf(spec.delta());
    let upper = spec.alpha / (spec.alpha - 1.0) * lower;
    Ok((
        HopModel { g: 1.0, k: lower, model: ChannelModel::PathlossLower, spec: Some(spec) },
        HopModel { g: 1.0, k: upper, model: ChannelModel::PathlossUpper, spec: Some(spec) },
    ))
}

pub fn hop_success(model: &HopModel, r: f64, lambda_t: f64) -> Result<f64> {
    if !(r >= 0.0) || !(lambda_t >= 0.0) {
        return Err(domain(format!("need r ≥ 0 and λ_t ≥ 0, got r={r}, λ_t={lambda_t}")));
    }
    let p = model.g * (-lambda_t * model.k * r * r).exp();
    if p > 1.0 {
        return Err(Error::OutOfRegime { value: p });
    }
    Ok(p)
}

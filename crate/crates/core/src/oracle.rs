//! Brute-force references for the closed forms: direct quadrature of the
//! relay-set intensity, exhaustive retransmission schedules, and numeric
//! derivatives of the shot-noise Laplace transform.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analytics::{NetworkConfig, RetransPolicy};
use crate::error::{domain, Error, Result};
use crate::geometry::{sum_squared_distance, Point, RelayChain};
use crate::special::{factorial, gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    TensorGrid,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: QuadratureScheme,
    /// Points per axis for the grid, sample count for Monte Carlo.
    pub resolution: usize,
    /// Radial cutoff; `None` picks the radius where Λ(d − d_min) reaches 25.
    pub truncation_radius: Option<f64>,
    /// Relative tolerance the refinement check must meet.
    pub tolerance: f64,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn grid(resolution: usize) -> Self {
        QuadratureSpec {
            scheme: QuadratureScheme::TensorGrid,
            resolution,
            truncation_radius: None,
            tolerance: 1e-6,
            seed: 0,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            scheme: QuadratureScheme::MonteCarlo,
            resolution: samples,
            truncation_radius: None,
            tolerance: 1e-2,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Grid: change under halving the resolution. Monte Carlo: standard error.
    pub error_estimate: f64,
    /// Whether the error estimate is within the requested tolerance.
    pub converged: bool,
}

const TAIL_EXPONENT: f64 = 25.0;

/// ∫_{d_m ≤ D_m} λ̃^m G^{m+1} e^{−Λ d_m(Z)} dZ by direct integration.
pub fn quadrature_expected_relay_sets(cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<QuadratureEstimate> {
    if cfg.m == 0 {
        return Err(domain("quadrature needs m ≥ 1"));
    }
    if cfg.relay_density() == 0.0 {
        return Ok(QuadratureEstimate { value: 0.0, error_estimate: 0.0, converged: true });
    }
    let g = cfg.hop.g;
    let m = cfg.m;
    let big = cfg.big_lambda();
    match (spec.scheme, m) {
        (QuadratureScheme::TensorGrid, 1) => {
            integrate_single_relay(cfg, spec, |d, _, _| g * g * (-big * d).exp())
        }
        (QuadratureScheme::TensorGrid, 2) => two_relay_grid(cfg, spec),
        (QuadratureScheme::TensorGrid, _) => Err(domain("tensor grid supports m ∈ {1, 2}")),
        (QuadratureScheme::MonteCarlo, 1..=4) => gaussian_importance(cfg, spec),
        (QuadratureScheme::MonteCarlo, _) => Err(domain("Monte Carlo oracle supports m ≤ 4")),
    }
}

/// λ̃ ∫ w(d, r₁, r₂) 1[d ≤ D] dz over single-relay positions z, where r₁, r₂
/// are the hop lengths and d = r₁² + r₂². Polar grid about the midpoint:
/// composite Simpson in radius, trapezoid in angle, radial limit per ray by
/// bisection on d.
pub fn integrate_single_relay<W>(cfg: &NetworkConfig, spec: &QuadratureSpec, weight: W) -> Result<QuadratureEstimate>
where
    W: Fn(f64, f64, f64) -> f64,
{
    let n = spec.resolution.max(8) & !1;
    let fine = polar_single(cfg, spec, n, &weight)?;
    let coarse = polar_single(cfg, spec, n / 2 & !1, &weight)?;
    let err = (fine - coarse).abs();
    Ok(QuadratureEstimate {
        value: fine,
        error_estimate: err,
        converged: err <= spec.tolerance * fine.abs().max(f64::MIN_POSITIVE),
    })
}

/// Same as `integrate_single_relay`; named for the Monte Carlo-free
/// weighted-integral role it plays in the retransmission checks.
pub fn mc_integration_expected_relay_sets<W>(cfg: &NetworkConfig, spec: &QuadratureSpec, weight: W) -> Result<QuadratureEstimate>
where
    W: Fn(f64, f64, f64) -> f64,
{
    integrate_single_relay(cfg, spec, weight)
}

fn single_d(r: f64, z: Point) -> f64 {
    sum_squared_distance(&RelayChain::new(vec![z], r))
}

/// Largest t ≤ t_max along the ray center + t·dir where d stays ≤ level.
/// d is convex along the ray and minimal at t = 0.
fn ray_limit(level: f64, t_max: f64, d_at: impl Fn(f64) -> f64) -> f64 {
    if d_at(t_max) <= level {
        return t_max;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d_at(mid) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * t_max {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn simpson(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn polar_single<W>(cfg: &NetworkConfig, spec: &QuadratureSpec, n: usize, weight: &W) -> Result<f64>
where
    W: Fn(f64, f64, f64) -> f64,
{
    let r = cfg.r;
    let big = cfg.big_lambda();
    let src = Point::new(-r / 2.0, 0.0);
    let dst = Point::new(r / 2.0, 0.0);
    let d0 = single_d(r, Point::default());
    let cut_level = d0 + TAIL_EXPONENT / big;
    let level = cfg.d_max.map_or(cut_level, |d| d.min(cut_level));
    let t_max = spec.truncation_radius.unwrap_or_else(|| (cut_level - d0).sqrt() + r);
    let mut acc = 0.0;
    for j in 0..n {
        let theta = 2.0 * PI * j as f64 / n as f64;
        let (s, c) = theta.sin_cos();
        let along = |t: f64| Point::new(t * c, t * s);
        let limit = if spec.truncation_radius.is_some() && cfg.d_max.is_none() {
            t_max
        } else {
            ray_limit(level, t_max, |t| single_d(r, along(t)))
        };
        acc += simpson(n, 0.0, limit, |t| {
            let z = along(t);
            let r1 = z.dist(src);
            let r2 = z.dist(dst);
            weight(r1 * r1 + r2 * r2, r1, r2) * t
        });
    }
    Ok(cfg.relay_density() * acc * 2.0 * PI / n as f64)
}

/// m = 2 on a polar × polar grid: the outer relay about its optimal point,
/// the inner relay about the midpoint of the outer relay and destination.
fn two_relay_grid(cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<QuadratureEstimate> {
    let n = (spec.resolution.max(8) & !1).min(400);
    let fine = polar_double(cfg, n);
    let coarse = polar_double(cfg, n / 2 & !1);
    let err = (fine - coarse).abs();
    Ok(QuadratureEstimate {
        value: fine,
        error_estimate: err,
        converged: err <= spec.tolerance * fine.abs().max(f64::MIN_POSITIVE),
    })
}

fn polar_double(cfg: &NetworkConfig, n: usize) -> f64 {
    let r = cfg.r;
    let big = cfg.big_lambda();
    let g = cfg.hop.g;
    let src = Point::new(-r / 2.0, 0.0);
    let dst = Point::new(r / 2.0, 0.0);
    let d = |a: Point, b: Point| sum_squared_distance(&RelayChain::new(vec![a, b], r));
    let c1 = src.lerp(dst, 1.0 / 3.0);
    let d0 = d(c1, src.lerp(dst, 2.0 / 3.0));
    let cut_level = d0 + TAIL_EXPONENT / big;
    let level = cfg.d_max.map_or(cut_level, |dm| dm.min(cut_level));
    let t_max = (cut_level - d0).sqrt() * 2.0 + r;
    // min over the inner relay given the outer one sits at its midpoint point.
    let best_inner = |z1: Point| d(z1, z1.lerp(dst, 0.5));
    let mut acc = 0.0;
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        let (s1, c1s) = th.sin_cos();
        let outer = |t: f64| Point::new(c1.x + t * c1s, c1.y + t * s1);
        let lim1 = ray_limit(level, t_max, |t| best_inner(outer(t)));
        acc += simpson(n, 0.0, lim1, |t1| {
            let z1 = outer(t1);
            let mid = z1.lerp(dst, 0.5);
            let mut inner = 0.0;
            for i in 0..n {
                let ph = 2.0 * PI * i as f64 / n as f64;
                let (s2, c2) = ph.sin_cos();
                let along = |t: f64| Point::new(mid.x + t * c2, mid.y + t * s2);
                let lim2 = ray_limit(level, t_max, |t| d(z1, along(t)));
                inner += simpson(n, 0.0, lim2, |t2| (-big * d(z1, along(t2))).exp() * t2);
            }
            inner * 2.0 * PI / n as f64 * t1
        });
    }
    let rho = cfg.relay_density();
    rho * rho * g.powi(3) * acc * 2.0 * PI / n as f64
}

/// Cholesky factor (lower) of a symmetric positive-definite matrix.
fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NoConvergence("matrix is not positive definite".into()));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves Lᵀ x = b for lower-triangular L.
fn solve_upper_t(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

const PROPOSAL_INFLATION: f64 = 1.5;

/// Importance sampling with independent Gaussian x- and y-blocks whose
/// precision is 2ΛA_m/inflation, centred on the equidistant placement.
fn gaussian_importance(cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<QuadratureEstimate> {
    let m = cfg.m;
    let r = cfg.r;
    let big = cfg.big_lambda();
    // Hessian/2 of d_m in one coordinate block, built from the definition.
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m {
        a[i][i] = 2.0;
        if i + 1 < m {
            a[i][i + 1] = -1.0;
            a[i + 1][i] = -1.0;
        }
    }
    let precision: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(|v| 2.0 * big * v / PROPOSAL_INFLATION).collect())
        .collect();
    let l = cholesky(&precision)?;
    let log_det_half: f64 = (0..m).map(|i| l[i][i].ln()).sum();
    let mu: Vec<f64> = (1..=m).map(|i| -r / 2.0 + r * i as f64 / (m as f64 + 1.0)).collect();
    let log_norm = -(m as f64) * (2.0 * PI).ln() + 2.0 * log_det_half;
    let lead = cfg.relay_density().powi(m as i32) * cfg.hop.g.powi(m as i32 + 1);
    let d_max = cfg.d_max.unwrap_or(f64::INFINITY);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let samples = spec.resolution.max(2);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut relays = vec![Point::default(); m];
    let mut xi = vec![0.0; m];
    let mut eta = vec![0.0; m];
    for t in 0..samples {
        for v in xi.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for v in eta.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let dx = solve_upper_t(&l, &xi);
        let dy = solve_upper_t(&l, &eta);
        for i in 0..m {
            relays[i] = Point::new(mu[i] + dx[i], dy[i]);
        }
        let chain = RelayChain { relays: std::mem::take(&mut relays), r };
        let d = sum_squared_distance(&chain);
        relays = chain.relays;
        let log_q = log_norm - 0.5 * (xi.iter().map(|v| v * v).sum::<f64>() + eta.iter().map(|v| v * v).sum::<f64>());
        let w = if d <= d_max { lead * (-big * d - log_q).exp() } else { 0.0 };
        let delta = w - mean;
        mean += delta / (t + 1) as f64;
        m2 += delta * (w - mean);
    }
    let se = (m2 / (samples - 1) as f64 / samples as f64).sqrt();
    Ok(QuadratureEstimate {
        value: mean,
        error_estimate: se,
        converged: se <= spec.tolerance * mean.abs().max(f64::MIN_POSITIVE),
    })
}

/// Ground-truth end-to-end success of a retransmission policy given per-slot
/// hop success probabilities.
pub fn success_prob_retrans_bruteforce(p: &[f64], policy: &RetransPolicy) -> Result<f64> {
    if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(domain("probabilities must lie in [0,1]"));
    }
    match policy {
        RetransPolicy::SingleAttempt => Ok(p.iter().product()),
        RetransPolicy::BestEffort(k) => {
            if k.len() != p.len() {
                return Err(domain("attempt vector length must match the hop count"));
            }
            Ok(p.iter()
                .zip(k.as_slice())
                .map(|(&pi, &ki)| 1.0 - (1.0 - pi).powi(ki as i32))
                .product())
        }
        RetransPolicy::TotalBudget(budget) => {
            // state[h]: probability that h hops are done after the slots so far.
            let hops = p.len();
            let mut state = vec![0.0; hops + 1];
            state[0] = 1.0;
            for _ in 0..*budget {
                let mut next = vec![0.0; hops + 1];
                next[hops] = state[hops];
                for h in 0..hops {
                    next[h + 1] += state[h] * p[h];
                    next[h] += state[h] * (1.0 - p[h]);
                }
                state = next;
            }
            Ok(state[hops])
        }
    }
}

/// Ω_{m0} from the Gamma-function identity πΓ(1−δ)Γ(m0+δ)/Γ(m0), δ = 2/α.
pub fn omega_gamma_form(m0: u32, alpha: f64) -> f64 {
    let d = 2.0 / alpha;
    PI * gamma(1.0 - d) * gamma(m0 as f64 + d) / gamma(m0 as f64)
}

fn laplace_unit(m0: u32, alpha: f64, omega: f64, s: f64) -> f64 {
    (-omega * (s / m0 as f64).powf(2.0 / alpha)).exp()
}

/// k-th derivative of L(s) = exp(−Ω_{m0}(s/m0)^{2/α}) (unit interferer
/// density) by central differences with Richardson extrapolation.
pub fn numeric_laplace_derivative(m0: u32, alpha: f64, s: f64, k: usize) -> Result<f64> {
    if m0 == 0 || k + 1 > m0 as usize {
        return Err(domain(format!("derivative order {k} needs k ≤ m0 − 1 (m0 = {m0})")));
    }
    if !(s > 0.0) || !(alpha > 2.0) {
        return Err(domain("need s > 0 and alpha > 2"));
    }
    let omega = omega_gamma_form(m0, alpha);
    let f = |x: f64| laplace_unit(m0, alpha, omega, x);
    if k == 0 {
        return Ok(f(s));
    }
    let stencil = |h: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..=k {
            let c = factorial(k as u32) / (factorial(i as u32) * factorial((k - i) as u32));
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * c * f(s + (k as f64 / 2.0 - i as f64) * h);
        }
        acc / h.powi(k as i32)
    };
    let mut h = s / (k as f64 + 1.0) * 0.5;
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::NAN;
    let mut best_err = f64::INFINITY;
    for j in 0..12 {
        let mut row = vec![stencil(h)];
        for l in 1..=j {
            let prev = table[j - 1][l - 1];
            let cur = row[l - 1];
            row.push(cur + (cur - prev) / (4f64.powi(l as i32) - 1.0));
        }
        if j > 0 {
            let err = (row[j] - table[j - 1][j - 1]).abs();
            if err < best_err {
                best_err = err;
                best = row[j];
            }
        }
        table.push(row);
        h *= 0.5;
    }
    if best_err > 1e-8 * best.abs().max(1.0) {
        return Err(Error::NoConvergence(format!("Richardson error {best_err} exceeds 1e-8")));
    }
    Ok(best)
}

/// High-outage Nakagami G rebuilt from numeric derivatives: the bracket
/// Σ_{k<m0} (−s)^k L^{(k)}(s)/(k! L(s)) is a polynomial Σ c_l x^l in
/// x = Ω(s/m0)^δ; G = Σ c_l l!.
pub fn nakagami_g_from_laplace(m0: u32, alpha: f64) -> Result<f64> {
    let omega = omega_gamma_form(m0, alpha);
    let d = 2.0 / alpha;
    let n = m0 as usize;
    let xs: Vec<f64> = (1..=n).map(|j| 2.0 * j as f64).collect();
    let mut rows = Vec::with_capacity(n);
    for &x in &xs {
        let s = m0 as f64 * (x / omega).powf(1.0 / d);
        let l0 = laplace_unit(m0, alpha, omega, s);
        let mut bracket = 0.0;
        for k in 0..n {
            let lk = numeric_laplace_derivative(m0, alpha, s, k)?;
            bracket += (-s).powi(k as i32) * lk / (factorial(k as u32) * l0);
        }
        let mut row: Vec<f64> = (0..n).map(|l| x.powi(l as i32)).collect();
        row.push(bracket);
        rows.push(row);
    }
    let coeffs = solve_dense(rows)?;
    Ok(coeffs.iter().enumerate().map(|(l, c)| c * factorial(l as u32)).sum())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[piv][col] == 0.0 {
            return Err(Error::NoConvergence("singular system".into()));
        }
        a.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = a[i][n];
        for k in (i + 1)..n {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Ok(x)
}

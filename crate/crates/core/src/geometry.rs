//! Relay chains, sum-squared hop distances, tridiagonal determinants and
//! ellipsoid volumes.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::special::factorial;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

/// Relays between a source at (−R/2, 0) and a destination at (R/2, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RelayChain {
    pub relays: Vec<Point>,
    pub r: f64,
}

impl RelayChain {
    pub fn new(relays: Vec<Point>, r: f64) -> Self {
        RelayChain { relays, r }
    }

    pub fn m(&self) -> usize {
        self.relays.len()
    }

    pub fn source(&self) -> Point {
        Point::new(-self.r / 2.0, 0.0)
    }

    pub fn destination(&self) -> Point {
        Point::new(self.r / 2.0, 0.0)
    }

    /// Source, relays, destination in order.
    pub fn nodes(&self) -> Vec<Point> {
        let mut v = Vec::with_capacity(self.relays.len() + 2);
        v.push(self.source());
        v.extend_from_slice(&self.relays);
        v.push(self.destination());
        v
    }

    pub fn hop_lengths(&self) -> Vec<f64> {
        self.nodes().windows(2).map(|w| w[0].dist(w[1])).collect()
    }

    pub fn sum_squared_distance(&self) -> f64 {
        sum_squared_distance(self)
    }
}

/// d_m: sum of squared hop lengths along the chain.
pub fn sum_squared_distance(chain: &RelayChain) -> f64 {
    let mut prev = chain.source();
    let mut acc = 0.0;
    for &z in &chain.relays {
        acc += prev.dist2(z);
        prev = z;
    }
    acc + prev.dist2(chain.destination())
}

pub fn min_sum_squared(r: f64, m: usize) -> f64 {
    r * r / (m as f64 + 1.0)
}

/// Relays equally spaced on the source–destination segment.
pub fn equidistant_chain(r: f64, m: usize) -> RelayChain {
    let relays = (1..=m)
        .map(|i| Point::new(-r / 2.0 + r * i as f64 / (m as f64 + 1.0), 0.0))
        .collect();
    RelayChain { relays, r }
}

/// Attempts per hop, all entries ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttemptVector(Vec<u32>);

impl AttemptVector {
    pub fn new(k: Vec<u32>) -> Result<Self> {
        if k.is_empty() || k.iter().any(|&v| v == 0) {
            return Err(domain(format!("attempt vector needs positive entries, got {k:?}")));
        }
        Ok(AttemptVector(k))
    }

    pub fn ones(len: usize) -> Self {
        AttemptVector(vec![1; len])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn product(&self) -> f64 {
        self.0.iter().map(|&v| v as f64).product()
    }

    /// Σ 1/n_i
    pub fn harmonic_sum(&self) -> f64 {
        self.0.iter().map(|&v| 1.0 / v as f64).sum()
    }
}

/// det of the m×m tridiagonal matrix (2 on the diagonal, −1 off it),
/// computed with f_m = 2f_{m−1} − f_{m−2}.
pub fn tridiag_det_uniform(m: usize) -> u64 {
    let (mut f2, mut f1): (i64, i64) = (1, 2);
    if m == 0 {
        return 1;
    }
    for _ in 1..m {
        let f = 2 * f1 - f2;
        f2 = f1;
        f1 = f;
    }
    debug_assert_eq!(f1 as u64, m as u64 + 1);
    f1 as u64
}

/// det(A*_m) for attempt weights n of length m+1: diagonal n_i + n_{i+1},
/// off-diagonal −n_{i+1}. Computed by the three-term recurrence.
pub fn tridiag_det_weighted(n: &AttemptVector) -> u128 {
    let n: Vec<i128> = n.as_slice().iter().map(|&v| v as i128).collect();
    let m = n.len().saturating_sub(1);
    if m == 0 {
        return 1;
    }
    let mut f2: i128 = 1;
    let mut f1: i128 = n[0] + n[1];
    for i in 1..m {
        let f = (n[i] + n[i + 1]) * f1 - n[i] * n[i] * f2;
        f2 = f1;
        f1 = f;
    }
    f1 as u128
}

/// (∏ n_i)(Σ 1/n_i) as the integer Σ_i ∏_{j≠i} n_j.
pub fn weighted_det_closed_form(n: &AttemptVector) -> u128 {
    let n = n.as_slice();
    (0..n.len())
        .map(|i| {
            n.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v as u128)
                .product::<u128>()
        })
        .sum()
}

pub fn weighted_sum_squared(n: &AttemptVector, chain: &RelayChain) -> Result<f64> {
    if n.len() != chain.m() + 1 {
        return Err(domain(format!("need {} weights, got {}", chain.m() + 1, n.len())));
    }
    let nodes = chain.nodes();
    Ok(nodes
        .windows(2)
        .zip(n.as_slice())
        .map(|(w, &k)| k as f64 * w[0].dist2(w[1]))
        .sum())
}

/// Minimum of Σ n_i r_i² over chains: R²/(Σ 1/n_i).
pub fn weighted_min(n: &AttemptVector, r: f64) -> f64 {
    r * r / n.harmonic_sum()
}

/// Volume of {Z_m : d_m(Z_m) ≤ a}: π^m (a − R²/(m+1))^m / (m+1)!.
pub fn ellipsoid_volume(m: usize, a: f64, r: f64) -> Result<f64> {
    let lo = min_sum_squared(r, m);
    if a < lo {
        return Err(domain(format!("level {a} below the minimum {lo}")));
    }
    Ok(PI.powi(m as i32) * (a - lo).powi(m as i32) / factorial(m as u32 + 1))
}

/// Volume of {Z_m : Σ n_i r_i² ≤ a}: π^m (a − R²/S)^m / (m!·(∏n)S), S = Σ1/n.
pub fn ellipsoid_volume_weighted(n: &AttemptVector, a: f64, r: f64) -> Result<f64> {
    let lo = weighted_min(n, r);
    if a < lo {
        return Err(domain(format!("level {a} below the minimum {lo}")));
    }
    let m = n.len() - 1;
    let det = tridiag_det_weighted(n) as f64;
    Ok(PI.powi(m as i32) * (a - lo).powi(m as i32) / (factorial(m as u32) * det))
}

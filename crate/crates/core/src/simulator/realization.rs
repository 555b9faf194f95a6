//! Poisson network realizations on a torus, generated tile by tile so any
//! sub-region can be materialized on its own.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analytics::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;

use super::fading::{mix, unit_uniform, FadingDraws, FadingKind, NodeId};
use super::index::{torus_dist2, wrap};

/// Destinations are not part of the point process; their ids carry this bit.
pub const DEST_BIT: u64 = 1 << 63;
pub const TYPICAL_SOURCE: NodeId = (1 << 62) - 1;

const TILE_SIDE: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Relay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub pos: Point,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub source: Node,
    pub destination: Node,
}

/// One sampled network. `nodes` holds sources and relay-pool nodes of the
/// materialized part of the window; the typical pair sits at the centre.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub window: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub nodes: Vec<Node>,
    pub typical: Pair,
    pub fading: FadingDraws,
    /// Radius around the centre that was materialized; `None` is the whole window.
    pub region: Option<f64>,
}

/// Smallest window side the simulator accepts: 10·max(R, √D_m).
pub fn window_guard(cfg: &NetworkConfig) -> f64 {
    10.0 * cfg.r.max(cfg.d_max.map_or(0.0, f64::sqrt))
}

impl NetworkRealization {
    /// Assembles a realization from explicit parts, for hand-built scenarios.
    pub fn from_parts(
        window: f64,
        alpha: f64,
        beta: f64,
        typical: Pair,
        nodes: Vec<Node>,
        fading: FadingDraws,
    ) -> Self {
        let r = torus_dist2(typical.source.pos, typical.destination.pos, window).sqrt();
        NetworkRealization { window, r, alpha, beta, seed: 0, nodes, typical, fading, region: None }
    }

    pub fn center(&self) -> Point {
        Point::new(self.window / 2.0, self.window / 2.0)
    }

    pub fn sources(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.role == Role::Source)
    }

    pub fn pool(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.role == Role::Relay)
    }

    /// The pair a source belongs to; the direction is a hash of its id.
    pub fn pair_of(&self, source: &Node) -> Pair {
        if source.id == self.typical.source.id {
            return self.typical;
        }
        let theta = 2.0 * PI * unit_uniform(mix(self.seed ^ 0xD1, source.id));
        let (s, c) = theta.sin_cos();
        let pos = wrap(Point::new(source.pos.x + self.r * c, source.pos.y + self.r * s), self.window);
        Pair { source: *source, destination: Node { id: source.id | DEST_BIT, pos, role: Role::Relay } }
    }

    /// Shifts every position by (dx, dy) modulo the window.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let shift = |p: Point| wrap(Point::new(p.x + dx, p.y + dy), self.window);
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.pos = shift(n.pos);
        }
        out.typical.source.pos = shift(out.typical.source.pos);
        out.typical.destination.pos = shift(out.typical.destination.pos);
        out
    }
}

/// Full-window realization.
pub fn sample_network(cfg: &NetworkConfig, window: f64, seed: u64) -> Result<NetworkRealization> {
    sample_region(cfg, window, seed, None)
}

/// Realization restricted to the tiles meeting the disk of `radius` about the
/// window centre. Every node it contains is identical to the same node of the
/// full-window realization with the same seed.
pub fn sample_network_region(cfg: &NetworkConfig, window: f64, seed: u64, radius: f64) -> Result<NetworkRealization> {
    sample_region(cfg, window, seed, Some(radius))
}

fn sample_region(cfg: &NetworkConfig, window: f64, seed: u64, radius: Option<f64>) -> Result<NetworkRealization> {
    let kind = FadingKind::for_model(&cfg.hop)?;
    let spec = cfg.hop.spec.ok_or_else(|| Error::InvalidConfig("channel has no physical parameters".into()))?;
    let guard = window_guard(cfg);
    if !(window >= guard) || !window.is_finite() {
        return Err(Error::DegenerateWindow { window, guard });
    }
    if !(cfg.lambda >= 0.0) || !(cfg.gamma >= 0.0 && cfg.gamma <= 1.0) {
        return Err(Error::InvalidConfig("need λ ≥ 0 and γ in [0,1]".into()));
    }
    let tiles = (window / TILE_SIDE).ceil().max(1.0) as usize;
    let side = window / tiles as f64;
    let center = Point::new(window / 2.0, window / 2.0);
    let whole = radius.is_none_or(|r| r >= window * std::f64::consts::FRAC_1_SQRT_2);
    let mut nodes = Vec::new();
    let mean = cfg.lambda * side * side;
    let poisson = if mean > 0.0 {
        Some(Poisson::new(mean).map_err(|e| Error::InvalidConfig(e.to_string()))?)
    } else {
        None
    };
    for ty in 0..tiles {
        for tx in 0..tiles {
            let lo = Point::new(tx as f64 * side, ty as f64 * side);
            if !whole {
                // torus distance from the centre to the nearest point of the tile
                let probe = Point::new(
                    center.x.clamp(lo.x, lo.x + side),
                    center.y.clamp(lo.y, lo.y + side),
                );
                if torus_dist2(center, probe, window).sqrt() > radius.unwrap_or(0.0) {
                    continue;
                }
            }
            let tile = (ty * tiles + tx) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, tile));
            let count = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
            for k in 0..count {
                let pos = Point::new(lo.x + rng.random::<f64>() * side, lo.y + rng.random::<f64>() * side);
                let role = if rng.random::<f64>() < cfg.gamma { Role::Source } else { Role::Relay };
                nodes.push(Node { id: (tile << 24) | k, pos, role });
            }
        }
    }
    let theta = 2.0 * PI * unit_uniform(mix(seed, 0x7E));
    let (s, c) = theta.sin_cos();
    let half = cfg.r / 2.0;
    let typical = Pair {
        source: Node { id: TYPICAL_SOURCE, pos: Point::new(center.x - half * c, center.y - half * s), role: Role::Source },
        destination: Node {
            id: TYPICAL_SOURCE | DEST_BIT,
            pos: Point::new(center.x + half * c, center.y + half * s),
            role: Role::Relay,
        },
    };
    Ok(NetworkRealization {
        window,
        r: cfg.r,
        alpha: spec.alpha,
        beta: spec.beta,
        seed,
        nodes,
        typical,
        fading: FadingDraws::new(mix(seed, 0xFAD), kind),
        region: if whole { None } else { radius },
    })
}

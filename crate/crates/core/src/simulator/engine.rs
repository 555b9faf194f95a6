//! Relay claims, route search and per-hop checks for the typical pair.

use crate::analytics::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::{Point, RelayChain};

use super::fading::{mix, unit_uniform, NodeId};
use super::index::{torus_delta, torus_dist2, wrap, TorusGrid};
use super::interference::{far_field_interference, pathloss, tail_interference};
use super::realization::{NetworkRealization, Node, Role, TYPICAL_SOURCE};
use super::{SimMode, SimOptions};

const ORDER_SALT: u64 = 2;
const SYNTHETIC_SALT: u64 = 4;

/// Interference geometry for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plan {
    /// Mean interference from outside the exact radius.
    pub tail: f64,
    /// Hops longer than this cannot pass.
    pub r_cap: f64,
    /// Sources farther than this from the typical pair are ignored.
    pub rho_src: f64,
    /// Radius to materialize; `None` is the whole window.
    pub rho_mat: Option<f64>,
}

pub fn plan(cfg: &NetworkConfig, window: f64, mode: SimMode, opts: &SimOptions) -> Result<Plan> {
    let d = cfg.d_max.unwrap_or(f64::INFINITY);
    let m = cfg.m as f64;
    let whole = |rho: f64| if rho >= window * std::f64::consts::FRAC_1_SQRT_2 { None } else { Some(rho) };
    if mode == SimMode::SyntheticIndependent {
        if !d.is_finite() {
            return Err(Error::InvalidConfig("independent-link mode needs a finite distance budget".into()));
        }
        let rho = cfg.r / 2.0 + (m * d).sqrt() + 1.0;
        return Ok(Plan { tail: 0.0, r_cap: f64::INFINITY, rho_src: 0.0, rho_mat: whole(rho) });
    }
    let spec = cfg.hop.spec.ok_or_else(|| Error::InvalidConfig("channel has no physical parameters".into()))?;
    let far = if opts.far_field { far_field_interference(cfg.lambda_t(), spec.alpha, window) } else { 0.0 };
    let h_max = super::fading::FadingKind::for_model(&cfg.hop).map(|k| super::fading::FadingDraws::new(0, k).max_power())?;
    let cap = |tail: f64| if tail > 0.0 { (h_max / (spec.beta * tail)).powf(1.0 / spec.alpha) } else { f64::INFINITY };
    let Some(r_ex) = opts.interference_radius else {
        return Ok(Plan { tail: far, r_cap: cap(far), rho_src: f64::INFINITY, rho_mat: None });
    };
    let tail = tail_interference(cfg.lambda_t(), spec.alpha, window, r_ex) + far;
    let r_cap = cap(tail);
    let slack = 5.0 / cfg.relay_density().sqrt();
    // relay j lies within reach of the source in j hops and of the
    // destination in m+1−j hops
    let reach = |hops: f64| (hops * r_cap).min((hops * d).sqrt());
    let rho_eval = cfg.r / 2.0
        + (1..=cfg.m).map(|j| reach(j as f64).min(reach((cfg.m + 1 - j) as f64))).fold(0.0, f64::max);
    let rho_src = rho_eval + r_ex + cfg.r + slack;
    Ok(Plan { tail, r_cap, rho_src, rho_mat: whole(rho_src + cfg.r + slack) })
}

pub(crate) struct SearchOutcome {
    pub chain: Option<Vec<u32>>,
    pub cap_hit: bool,
}

/// Everything the typical pair's search needs from one realization.
pub(crate) struct Scene<'a> {
    real: &'a NetworkRealization,
    m: usize,
    d_max: f64,
    src: Node,
    dst: Node,
    pool_pts: Vec<Point>,
    pool_ids: Vec<NodeId>,
    grid: TorusGrid,
    available: Vec<bool>,
    tx_pts: Vec<Vec<Point>>,
    tx_ids: Vec<Vec<NodeId>>,
    tx_grid: Vec<TorusGrid>,
    plan: Plan,
    r_ex: Option<f64>,
    r_near: f64,
    near: Vec<f64>,
    full: Vec<f64>,
    success_scale: f64,
    big_lambda: f64,
    expansions: u64,
    cap: u64,
    cap_hit: bool,
}

impl<'a> Scene<'a> {
    pub fn build(real: &'a NetworkRealization, cfg: &NetworkConfig, mode: SimMode, opts: &SimOptions, plan: Plan) -> Result<Self> {
        let w = real.window;
        let m = cfg.m;
        let src = real.typical.source;
        let dst = real.typical.destination;
        let (hx, hy) = torus_delta(src.pos, dst.pos, w);
        let mid = wrap(Point::new(src.pos.x + hx / 2.0, src.pos.y + hy / 2.0), w);

        let pool: Vec<&Node> = real.nodes.iter().filter(|n| n.role == Role::Relay).collect();
        let pool_pts: Vec<Point> = pool.iter().map(|n| n.pos).collect();
        let pool_ids: Vec<NodeId> = pool.iter().map(|n| n.id).collect();
        let area = plan.rho_mat.map_or(w * w, |r| (std::f64::consts::PI * r * r).min(w * w));
        let local = pool.len() as f64 / area;
        let cell = if local > 0.0 { (1.2 / local.sqrt()).clamp(0.5, 10.0) } else { w };
        let patch = plan.rho_mat.map(|r| (mid, r + 1.0));
        let grid = TorusGrid::build_patch(w, patch, cell, &pool_pts);

        let mut available = vec![true; pool.len()];
        let mut tx_pts = vec![Vec::new(); m + 1];
        let mut tx_ids = vec![Vec::new(); m + 1];
        if mode != SimMode::SyntheticIndependent {
            let order_seed = mix(real.seed, ORDER_SALT);
            let mut pairs: Vec<(u64, &Node)> = real
                .nodes
                .iter()
                .filter(|n| n.role == Role::Source && n.id != TYPICAL_SOURCE)
                .filter(|n| torus_dist2(n.pos, mid, w) <= plan.rho_src * plan.rho_src)
                .map(|n| (mix(order_seed, n.id), n))
                .collect();
            pairs.sort_unstable_by_key(|&(k, n)| (k, n.id));
            let typical_key = mix(order_seed, TYPICAL_SOURCE);
            let mut claimed = vec![false; pool.len()];
            let mut snapshot = false;
            for (key, s) in pairs {
                if !snapshot && key > typical_key {
                    available.copy_from_slice(&claimed);
                    available.iter_mut().for_each(|a| *a = !*a);
                    snapshot = true;
                }
                let pair = real.pair_of(s);
                let (dx, dy) = torus_delta(pair.source.pos, pair.destination.pos, w);
                tx_pts[0].push(s.pos);
                tx_ids[0].push(s.id);
                for j in 1..=m {
                    let f = j as f64 / (m + 1) as f64;
                    let ideal = wrap(Point::new(s.pos.x + f * dx, s.pos.y + f * dy), w);
                    let Some((i, _)) = grid.nearest(ideal, w, &pool_pts, |i| !claimed[i as usize]) else {
                        break;
                    };
                    claimed[i as usize] = true;
                    tx_pts[j].push(pool_pts[i as usize]);
                    tx_ids[j].push(pool_ids[i as usize]);
                }
            }
            if !snapshot {
                available.iter_mut().zip(&claimed).for_each(|(a, c)| *a = !*c);
            }
        }
        let tx_cell = opts.near_radius.max(1.0) / 2.0;
        let tx_grid = tx_pts.iter().map(|p| TorusGrid::build_patch(w, patch, tx_cell, p)).collect();
        let slots = (pool.len() + 1) * (m + 1);
        Ok(Scene {
            real,
            m,
            d_max: cfg.d_max.unwrap_or(f64::INFINITY),
            src,
            dst,
            pool_pts,
            pool_ids,
            grid,
            available,
            tx_pts,
            tx_ids,
            tx_grid,
            plan,
            r_ex: opts.interference_radius,
            r_near: opts.near_radius,
            near: vec![f64::NAN; slots],
            full: vec![f64::NAN; slots],
            success_scale: cfg.hop.g.powi(m as i32 + 1),
            big_lambda: cfg.big_lambda(),
            expansions: 0,
            cap: opts.expansion_cap,
            cap_hit: false,
        })
    }

    fn pos(&self, idx: u32) -> Point {
        if idx as usize == self.pool_pts.len() {
            self.dst.pos
        } else if idx == u32::MAX {
            self.src.pos
        } else {
            self.pool_pts[idx as usize]
        }
    }

    fn id(&self, idx: u32) -> NodeId {
        if idx as usize == self.pool_pts.len() {
            self.dst.id
        } else if idx == u32::MAX {
            self.src.id
        } else {
            self.pool_ids[idx as usize]
        }
    }

    fn interference(&self, rx: u32, t: usize, radius: Option<f64>) -> f64 {
        let (rx_pos, rx_id) = (self.pos(rx), self.id(rx));
        let pts = &self.tx_pts[t];
        let ids = &self.tx_ids[t];
        let fading = &self.real.fading;
        let alpha = self.real.alpha;
        let mut acc = 0.0;
        let mut add = |i: u32, d2: f64| {
            let id = ids[i as usize];
            if id != rx_id {
                acc += fading.power(id, rx_id, t as u32) * pathloss(d2, alpha);
            }
        };
        match radius {
            Some(r) => self.tx_grid[t].for_each_within(rx_pos, r, &mut add, pts),
            None => {
                for (i, &p) in pts.iter().enumerate() {
                    add(i as u32, torus_dist2(p, rx_pos, self.real.window));
                }
            }
        }
        acc
    }

    /// Per-hop SIR check for tx → rx in subslot t, using staged bounds.
    fn link_ok(&mut self, tx: u32, rx: u32, t: usize) -> bool {
        let d2 = torus_dist2(self.pos(tx), self.pos(rx), self.real.window);
        if d2 > self.plan.r_cap * self.plan.r_cap {
            return false;
        }
        let beta = self.real.beta;
        let signal = self.real.fading.power(self.id(tx), self.id(rx), t as u32) * pathloss(d2, self.real.alpha);
        let floor = beta * self.plan.tail;
        if signal < floor {
            return false;
        }
        let slot = rx as usize * (self.m + 1) + t;
        if self.near[slot].is_nan() {
            let r = self.r_ex.map_or(self.r_near, |r| r.min(self.r_near));
            self.near[slot] = self.interference(rx, t, Some(r));
        }
        if signal < floor + beta * self.near[slot] {
            return false;
        }
        if self.full[slot].is_nan() {
            self.full[slot] = self.interference(rx, t, self.r_ex);
        }
        signal >= floor + beta * self.full[slot]
    }

    fn synthetic_accept(&self, chain: &[u32], d: f64) -> bool {
        let mut h = mix(self.real.seed, SYNTHETIC_SALT);
        for &i in chain {
            h = mix(h, self.pool_ids[i as usize]);
        }
        unit_uniform(h) <= (self.success_scale * (-self.big_lambda * d).exp()).min(1.0)
    }

    fn dst_idx(&self) -> u32 {
        self.pool_pts.len() as u32
    }

    /// Candidate next relays after `cur` with `placed` relays so far, with
    /// their lower bounds on the final sum.
    fn candidates(&self, cur: u32, placed: usize, partial: f64, chain: &[u32], bound: f64, reach: f64) -> Vec<(f64, u32, f64)> {
        let w = self.real.window;
        let rest = (self.m - placed) as f64;
        let radius = reach.min((bound - partial).max(0.0).sqrt());
        let mut out = Vec::new();
        if !radius.is_finite() {
            for i in 0..self.pool_pts.len() as u32 {
                if self.available[i as usize] && !chain.contains(&i) {
                    let d2 = torus_dist2(self.pos(cur), self.pool_pts[i as usize], w);
                    let lb = partial + d2 + torus_dist2(self.pool_pts[i as usize], self.dst.pos, w) / rest;
                    out.push((lb, i, d2));
                }
            }
        } else {
            self.grid.for_each_within(
                self.pos(cur),
                radius,
                |i, d2| {
                    if self.available[i as usize] && !chain.contains(&i) {
                        let lb = partial + d2 + torus_dist2(self.pool_pts[i as usize], self.dst.pos, w) / rest;
                        if lb <= bound {
                            out.push((lb, i, d2));
                        }
                    }
                },
                &self.pool_pts,
            );
        }
        out.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(self.pool_ids[a.1 as usize].cmp(&self.pool_ids[b.1 as usize])));
        out
    }

    fn dfs(&mut self, synthetic: bool, cur: u32, partial: f64, chain: &mut Vec<u32>, best: &mut Option<(f64, Vec<u32>)>, want_best: bool) -> bool {
        let placed = chain.len();
        let bound = best.as_ref().map_or(self.d_max, |b| b.0.min(self.d_max));
        if placed == self.m {
            let total = partial + torus_dist2(self.pos(cur), self.dst.pos, self.real.window);
            if total > bound || (want_best && best.is_some() && total >= bound) {
                return false;
            }
            let ok = if synthetic { self.synthetic_accept(chain, total) } else { self.link_ok(cur, self.dst_idx(), self.m) };
            if ok {
                *best = Some((total, chain.clone()));
                return !want_best;
            }
            return false;
        }
        let reach = if synthetic { f64::INFINITY } else { self.plan.r_cap };
        for (lb, x, d2) in self.candidates(cur, placed, partial, chain, bound, reach) {
            if let Some(b) = best {
                if lb >= b.0 {
                    break;
                }
            }
            self.expansions += 1;
            if self.expansions > self.cap {
                self.cap_hit = true;
                return true;
            }
            if !synthetic && !self.link_ok(cur, x, placed) {
                continue;
            }
            chain.push(x);
            let stop = self.dfs(synthetic, x, partial + d2, chain, best, want_best);
            chain.pop();
            if stop {
                return true;
            }
        }
        false
    }

    fn predetermined(&mut self) -> Option<Vec<u32>> {
        let w = self.real.window;
        let (dx, dy) = torus_delta(self.src.pos, self.dst.pos, w);
        let mut chain: Vec<u32> = Vec::with_capacity(self.m);
        for j in 1..=self.m {
            let f = j as f64 / (self.m + 1) as f64;
            let ideal = wrap(Point::new(self.src.pos.x + f * dx, self.src.pos.y + f * dy), w);
            let (i, _) = self.grid.nearest(ideal, w, &self.pool_pts, |i| self.available[i as usize] && !chain.contains(&i))?;
            chain.push(i);
        }
        let mut prev = u32::MAX;
        let mut d = 0.0;
        for &x in chain.iter().chain(std::iter::once(&self.dst_idx())) {
            d += torus_dist2(self.pos(prev), self.pos(x), w);
            prev = x;
        }
        if d > self.d_max {
            return None;
        }
        let mut prev = u32::MAX;
        for (t, &x) in chain.iter().chain(std::iter::once(&self.dst_idx())).enumerate() {
            if !self.link_ok(prev, x, t) {
                return None;
            }
            prev = x;
        }
        Some(chain)
    }

    /// Runs the search; `want_best` asks for the smallest-sum passing chain
    /// rather than any passing chain.
    pub fn search(&mut self, mode: SimMode, want_best: bool) -> SearchOutcome {
        let chain = match mode {
            SimMode::PredeterminedEquidistant => self.predetermined(),
            SimMode::Dynamic | SimMode::SyntheticIndependent => {
                let mut best = None;
                let mut chain = Vec::with_capacity(self.m);
                self.dfs(mode == SimMode::SyntheticIndependent, u32::MAX, 0.0, &mut chain, &mut best, want_best);
                best.map(|b| b.1)
            }
        };
        SearchOutcome { chain, cap_hit: self.cap_hit }
    }

    /// The chain in the frame with the source at (−R/2, 0) and the
    /// destination at (R/2, 0).
    pub fn to_chain(&self, idx: &[u32]) -> RelayChain {
        let w = self.real.window;
        let (hx, hy) = torus_delta(self.src.pos, self.dst.pos, w);
        let r = hx.hypot(hy);
        let (c, s) = (hx / r, hy / r);
        let relays = idx
            .iter()
            .map(|&i| {
                let (dx, dy) = torus_delta(self.src.pos, self.pool_pts[i as usize], w);
                Point::new(dx * c + dy * s - r / 2.0, -dx * s + dy * c)
            })
            .collect();
        RelayChain::new(relays, r)
    }
}

/// Route of the typical pair in `real`, or `None` if no chain works.
pub fn select_route(real: &NetworkRealization, cfg: &NetworkConfig, mode: SimMode, opts: &SimOptions) -> Result<Option<RelayChain>> {
    let mut scene = Scene::build(real, cfg, mode, opts, plan(cfg, real.window, mode, opts)?)?;
    let out = scene.search(mode, true);
    Ok(out.chain.map(|c| scene.to_chain(&c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{rayleigh_coeffs, FadingSpec};
    use crate::simulator::fading::{FadingDraws, FadingKind};
    use crate::simulator::realization::Pair;

    const W: f64 = 100.0;

    fn cfg(m: usize, d: f64) -> NetworkConfig {
        let hop = rayleigh_coeffs(FadingSpec::new(3.0, 1.0)).unwrap();
        NetworkConfig::new(0.1, 0.1, 4.0, m, Some(d), hop)
    }

    fn relay(id: u64, x: f64, y: f64) -> Node {
        Node { id, pos: Point::new(x, y), role: Role::Relay }
    }

    fn world(nodes: Vec<Node>, seed: u64) -> NetworkRealization {
        let typical = Pair {
            source: Node { id: TYPICAL_SOURCE, pos: Point::new(48.0, 50.0), role: Role::Source },
            destination: Node { id: TYPICAL_SOURCE | crate::simulator::DEST_BIT, pos: Point::new(52.0, 50.0), role: Role::Relay },
        };
        let mut real = NetworkRealization::from_parts(W, 3.0, 1.0, typical, nodes, FadingDraws::new(seed, FadingKind::Rayleigh));
        real.seed = seed;
        real
    }

    const ALL: [SimMode; 3] = [SimMode::Dynamic, SimMode::PredeterminedEquidistant, SimMode::SyntheticIndependent];

    #[test]
    fn empty_pool_has_no_route() {
        let real = world(vec![], 1);
        for mode in ALL {
            assert_eq!(select_route(&real, &cfg(1, 16.0), mode, &SimOptions::exact()).unwrap(), None);
        }
    }

    #[test]
    fn lone_midpoint_relay_is_chosen() {
        let real = world(vec![relay(5, 50.0, 50.0)], 2);
        for mode in [SimMode::Dynamic, SimMode::PredeterminedEquidistant] {
            let chain = select_route(&real, &cfg(1, 16.0), mode, &SimOptions::exact()).unwrap().unwrap();
            assert_eq!(chain.m(), 1);
            assert!(chain.relays[0].dist(Point::new(0.0, 0.0)) < 1e-9);
            assert!((chain.sum_squared_distance() - 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_excludes_distant_relays() {
        let real = world(vec![relay(5, 50.0, 56.0)], 2);
        // d = 2·(4 + 36) = 80
        assert_eq!(select_route(&real, &cfg(1, 79.0), SimMode::Dynamic, &SimOptions::exact()).unwrap(), None);
        assert!(select_route(&real, &cfg(1, 81.0), SimMode::Dynamic, &SimOptions::exact()).unwrap().is_some());
    }

    #[test]
    fn dynamic_returns_smallest_sum_without_interference() {
        let nodes = vec![
            relay(1, 49.0, 51.0),
            relay(2, 50.5, 49.0),
            relay(3, 51.0, 52.0),
            relay(4, 47.0, 47.0),
            relay(5, 53.0, 50.5),
        ];
        let real = world(nodes.clone(), 3);
        let c = cfg(2, 100.0);
        let chain = select_route(&real, &c, SimMode::Dynamic, &SimOptions::exact()).unwrap().unwrap();
        let s = Point::new(48.0, 50.0);
        let d = Point::new(52.0, 50.0);
        let mut best = f64::INFINITY;
        for a in &nodes {
            for b in &nodes {
                if a.id != b.id {
                    best = best.min(s.dist2(a.pos) + a.pos.dist2(b.pos) + b.pos.dist2(d));
                }
            }
        }
        assert!((chain.sum_squared_distance() - best).abs() < 1e-9);
    }

    fn typical_key_rank(seed: u64, id: u64) -> bool {
        let order = mix(seed, ORDER_SALT);
        mix(order, id) < mix(order, TYPICAL_SOURCE)
    }

    #[test]
    fn earlier_pair_claims_the_only_relay() {
        let seed = 11;
        let early = (0..).find(|&id| typical_key_rank(seed, id)).unwrap();
        let late = (0..).find(|&id| !typical_key_rank(seed, id)).unwrap();
        let src = |id| Node { id, pos: Point::new(5.0, 5.0), role: Role::Source };
        let lone = relay(1 << 40, 50.0, 50.0);
        let c = cfg(1, 16.0);
        let real = world(vec![lone, src(early)], seed);
        for mode in [SimMode::Dynamic, SimMode::PredeterminedEquidistant] {
            assert_eq!(select_route(&real, &c, mode, &SimOptions::exact()).unwrap(), None);
        }
        let real = world(vec![lone, src(late)], seed);
        for mode in [SimMode::Dynamic, SimMode::PredeterminedEquidistant] {
            assert!(select_route(&real, &c, mode, &SimOptions::exact()).unwrap().is_some());
        }
        // independent-link mode ignores claims
        let real = world(vec![lone, src(early)], seed);
        let mut sc = Scene::build(&real, &c, SimMode::SyntheticIndependent, &SimOptions::exact(), plan(&c, W, SimMode::SyntheticIndependent, &SimOptions::exact()).unwrap()).unwrap();
        assert!(sc.available.iter().all(|&a| a));
        sc.search(SimMode::SyntheticIndependent, false);
    }

    #[test]
    fn synthetic_acceptance_is_deterministic() {
        let nodes: Vec<Node> = (0..20).map(|i| relay(i, 48.0 + (i % 5) as f64, 48.0 + (i / 5) as f64)).collect();
        let c = cfg(1, 40.0);
        let real = world(nodes, 4);
        let a = select_route(&real, &c, SimMode::SyntheticIndependent, &SimOptions::exact()).unwrap();
        let b = select_route(&real, &c, SimMode::SyntheticIndependent, &SimOptions::exact()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plan_caps_hops_and_region() {
        let c = cfg(2, 3600.0).with_lambda(0.5);
        let p = plan(&c, 600.0, SimMode::Dynamic, &SimOptions::default()).unwrap();
        assert!(p.tail > 0.0 && p.r_cap.is_finite());
        // a hop at the cap with the largest possible draw exactly meets β·tail
        assert!((crate::simulator::fading::MAX_EXP_DRAW * p.r_cap.powi(-3) - p.tail).abs() < 1e-12);
        assert!(p.rho_mat.unwrap() < 600.0 / 2f64.sqrt());
        let exact = plan(&c, 600.0, SimMode::Dynamic, &SimOptions::exact()).unwrap();
        assert_eq!(exact.rho_mat, None);
        assert_eq!(exact.tail, 0.0);
        // truncated sum plus far field is the plane mean outside r_ex: 2πλ_t/r_ex at α=3
        let plane = 2.0 * std::f64::consts::PI * c.lambda_t() / 40.0;
        assert!((p.tail - plane).abs() < 1e-9 * plane);
        let wide = plan(&c, 6000.0, SimMode::Dynamic, &SimOptions::default()).unwrap();
        assert!((wide.tail - p.tail).abs() < 1e-9 * plane);
        assert!(plan(&c.with_d_max(None), 600.0, SimMode::SyntheticIndependent, &SimOptions::default()).is_err());
    }
}

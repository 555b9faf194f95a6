//! Uniform bucket grid on the torus [0, L)².

use crate::geometry::Point;

/// Shortest displacement from a to b on the torus of side `window`.
#[inline]
pub fn torus_delta(a: Point, b: Point, window: f64) -> (f64, f64) {
    (fold(b.x - a.x, window), fold(b.y - a.y, window))
}

/// Maps a coordinate difference into [−L/2, L/2]; exact for inputs within
/// one window of the seam, which covers all points inside [0, L)².
#[inline]
fn fold(d: f64, window: f64) -> f64 {
    let half = 0.5 * window;
    if d > half {
        let d = d - window;
        if d > half { d - window * (d / window).round() } else { d }
    } else if d < -half {
        let d = d + window;
        if d < -half { d - window * (d / window).round() } else { d }
    } else {
        d
    }
}

#[inline]
pub fn torus_dist2(a: Point, b: Point, window: f64) -> f64 {
    let (dx, dy) = torus_delta(a, b, window);
    dx * dx + dy * dy
}

pub fn wrap(p: Point, window: f64) -> Point {
    Point::new(p.x.rem_euclid(window), p.y.rem_euclid(window))
}

/// Bucket grid over either the whole torus or a square patch of it.
#[derive(Debug, Clone)]
pub struct TorusGrid {
    window: f64,
    /// Patch centre and half-side.
    center: Point,
    half: f64,
    /// Whole torus: cell indices wrap. Patch: they are clamped.
    wraps: bool,
    cell: f64,
    n: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

const MAX_CELLS_PER_SIDE: usize = 512;

impl TorusGrid {
    pub fn build(window: f64, cell_hint: f64, points: &[Point]) -> Self {
        Self::build_patch(window, None, cell_hint, points)
    }

    /// Grid over the square of half-side `half` centred at `center`. Points
    /// outside it are dropped. Falls back to the whole torus when the square
    /// would wrap onto itself.
    pub fn build_patch(window: f64, patch: Option<(Point, f64)>, cell_hint: f64, points: &[Point]) -> Self {
        let (center, half, wraps) = match patch {
            Some((c, half)) if 2.0 * half < window => (c, half, false),
            _ => (Point::new(0.0, 0.0), 0.5 * window, true),
        };
        let side = 2.0 * half;
        let n = ((side / cell_hint.max(1e-9)).floor() as usize).clamp(1, MAX_CELLS_PER_SIDE);
        let mut grid = TorusGrid { window, center, half, wraps, cell: side / n as f64, n, start: Vec::new(), items: Vec::new() };
        let mut counts = vec![0u32; n * n + 1];
        let cells: Vec<Option<usize>> = points.iter().map(|&p| grid.cell_of(p)).collect();
        for c in cells.iter().flatten() {
            counts[c + 1] += 1;
        }
        for i in 0..n * n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; counts[n * n] as usize];
        for (i, c) in cells.iter().enumerate() {
            if let Some(c) = *c {
                items[fill[c] as usize] = i as u32;
                fill[c] += 1;
            }
        }
        grid.start = counts;
        grid.items = items;
        grid
    }

    #[inline]
    fn local(&self, p: Point) -> (f64, f64) {
        if self.wraps {
            (p.x, p.y)
        } else {
            let (dx, dy) = torus_delta(self.center, p, self.window);
            (dx + self.half, dy + self.half)
        }
    }

    fn cell_of(&self, p: Point) -> Option<usize> {
        let (x, y) = self.local(p);
        let side = self.cell * self.n as f64;
        if !self.wraps && !(x >= 0.0 && y >= 0.0 && x < side && y < side) {
            return None;
        }
        let cx = ((x / self.cell) as usize).min(self.n - 1);
        let cy = ((y / self.cell) as usize).min(self.n - 1);
        Some(cy * self.n + cx)
    }

    /// Cell index on one axis, or `None` if a patch does not contain it.
    #[inline]
    fn axis(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if self.wraps {
            Some(k.rem_euclid(n) as usize)
        } else if (0..n).contains(&k) {
            Some(k as usize)
        } else {
            None
        }
    }

    fn axis_range(&self, c: f64, radius: f64) -> (i64, i64) {
        let k = (radius / self.cell).ceil() as i64;
        let base = (c / self.cell).floor() as i64;
        if self.wraps && 2 * k + 1 >= self.n as i64 {
            (0, self.n as i64 - 1)
        } else if self.wraps {
            (base - k, base + k)
        } else {
            ((base - k).max(0), (base + k).min(self.n as i64 - 1))
        }
    }

    /// Calls `f(index, squared torus distance)` for every point within `radius` of p.
    pub fn for_each_within(&self, p: Point, radius: f64, mut f: impl FnMut(u32, f64), points: &[Point]) {
        let r2 = radius * radius;
        let (lx, ly) = self.local(p);
        let (x0, x1) = self.axis_range(lx, radius);
        let (y0, y1) = self.axis_range(ly, radius);
        for cy in y0..=y1 {
            let Some(wy) = self.axis(cy) else { continue };
            for cx in x0..=x1 {
                let Some(wx) = self.axis(cx) else { continue };
                let c = wy * self.n + wx;
                for &i in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                    let d2 = torus_dist2(p, points[i as usize], self.window);
                    if d2 <= r2 {
                        f(i, d2);
                    }
                }
            }
        }
    }

    /// Nearest point to p accepted by `keep`, searching rings out to `max_radius`.
    pub fn nearest(&self, p: Point, max_radius: f64, points: &[Point], keep: impl Fn(u32) -> bool) -> Option<(u32, f64)> {
        let n = self.n as i64;
        let (lx, ly) = self.local(p);
        let bx = (lx / self.cell).floor() as i64;
        let by = (ly / self.cell).floor() as i64;
        // rings beyond this cover nothing new
        let span = if self.wraps { n } else { bx.abs().max(by.abs()).max((n - bx).abs()).max((n - by).abs()) + 1 };
        let max_ring = ((max_radius / self.cell).ceil() as i64 + 1).min(span);
        let mut best: Option<(u32, f64)> = None;
        let visit = |cx: i64, cy: i64, best: &mut Option<(u32, f64)>| {
            let (Some(wx), Some(wy)) = (self.axis(cx), self.axis(cy)) else { return };
            let c = wy * self.n + wx;
            for &i in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                if !keep(i) {
                    continue;
                }
                let d2 = torus_dist2(p, points[i as usize], self.window);
                if best.is_none_or(|(_, b)| d2 < b) {
                    *best = Some((i, d2));
                }
            }
        };
        for ring in 0..=max_ring {
            if ring == 0 {
                visit(bx, by, &mut best);
            } else {
                for k in -ring..ring {
                    visit(bx + k, by - ring, &mut best);
                    visit(bx + ring, by + k, &mut best);
                    visit(bx - k, by + ring, &mut best);
                    visit(bx - ring, by - k, &mut best);
                }
            }
            if let Some((_, b)) = best {
                let reach = ring as f64 * self.cell;
                if b <= reach * reach {
                    break;
                }
            }
            if self.wraps && 2 * ring + 1 >= n {
                break;
            }
        }
        best.filter(|&(_, d2)| d2 <= max_radius * max_radius)
    }
}

//! Per-link SIR under slotted transmissions on the torus.

use std::f64::consts::FRAC_PI_4;

use super::index::torus_dist2;
use super::realization::{NetworkRealization, Node};

/// r^{−α} from r².
#[inline]
pub fn pathloss(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else if alpha == 3.0 {
        1.0 / (d2 * d2.sqrt())
    } else {
        d2.powf(-0.5 * alpha)
    }
}

/// One transmission in a subslot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: Node,
    pub rx: Node,
}

/// Pass/fail per link: every other link's transmitter interferes.
pub fn evaluate_sir(real: &NetworkRealization, links: &[Link], subslot: u32) -> Vec<bool> {
    let w = real.window;
    links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let signal = real.fading.power(link.tx.id, link.rx.id, subslot)
                * pathloss(torus_dist2(link.tx.pos, link.rx.pos, w), real.alpha);
            let mut interference = 0.0;
            for (j, other) in links.iter().enumerate() {
                if j == i || other.tx.id == link.tx.id || other.tx.id == link.rx.id {
                    continue;
                }
                interference += real.fading.power(other.tx.id, link.rx.id, subslot)
                    * pathloss(torus_dist2(other.tx.pos, link.rx.pos, w), real.alpha);
            }
            signal >= real.beta * interference
        })
        .collect()
}

/// Mean interference from transmitters of density `lambda_t` (unit mean
/// power) spread over the torus square around a receiver, outside the disk
/// of radius `r_ex`.
pub fn tail_interference(lambda_t: f64, alpha: f64, window: f64, r_ex: f64) -> f64 {
    let half = window / 2.0;
    if r_ex >= half * std::f64::consts::SQRT_2 || lambda_t == 0.0 {
        return 0.0;
    }
    let radial = |rho: f64| {
        if rho <= r_ex {
            0.0
        } else if (alpha - 2.0).abs() < 1e-12 {
            (rho / r_ex).ln()
        } else {
            (r_ex.powf(2.0 - alpha) - rho.powf(2.0 - alpha)) / (alpha - 2.0)
        }
    };
    let f = |theta: f64| radial(half / theta.cos());
    // the integrand has a kink where the square's edge crosses the disk
    let kink = if r_ex > half { (half / r_ex).acos() } else { 0.0 };
    let simpson = |a: f64, b: f64| {
        let n = 1024;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    8.0 * lambda_t * simpson(kink, FRAC_PI_4)
}

/// Mean interference on the infinite plane from outside the torus square
/// centred on the receiver. Infinite for α ≤ 2.
pub fn far_field_interference(lambda_t: f64, alpha: f64, window: f64) -> f64 {
    if lambda_t == 0.0 {
        return 0.0;
    }
    if alpha <= 2.0 {
        return f64::INFINITY;
    }
    let half = window / 2.0;
    let beyond_disk = 2.0 * std::f64::consts::PI * lambda_t * half.powf(2.0 - alpha) / (alpha - 2.0);
    beyond_disk - tail_interference(lambda_t, alpha, window, half)
}

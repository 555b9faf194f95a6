//! Per-(link, subslot) fading powers drawn lazily from a hash of the ids.

use crate::channel::{ChannelModel, HopModel};
use crate::error::{Error, Result};

pub type NodeId = u64;

/// splitmix64 finalizer.
pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    splitmix(a ^ splitmix(b).rotate_left(17))
}

/// Uniform on (0, 1], never zero.
pub fn unit_uniform(h: u64) -> f64 {
    ((h >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Largest power any draw can produce: −ln(2^−53).
pub const MAX_EXP_DRAW: f64 = 53.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingKind {
    Rayleigh,
    /// Gamma(m0, 1/m0) power, unit mean.
    Nakagami(u32),
    /// No fading: path loss only.
    Unit,
}

impl FadingKind {
    pub fn for_model(hop: &HopModel) -> Result<Self> {
        match hop.model {
            ChannelModel::Rayleigh => Ok(FadingKind::Rayleigh),
            ChannelModel::NakagamiLow | ChannelModel::NakagamiHigh => {
                let m0 = hop.spec.and_then(|s| s.m0).unwrap_or(1);
                Ok(if m0 == 1 { FadingKind::Rayleigh } else { FadingKind::Nakagami(m0) })
            }
            ChannelModel::PathlossLower | ChannelModel::PathlossUpper => Ok(FadingKind::Unit),
            ChannelModel::Custom => Err(Error::InvalidConfig(
                "simulation needs a physical channel model, not custom (G, K)".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraws {
    pub seed: u64,
    pub kind: FadingKind,
}

impl FadingDraws {
    pub fn new(seed: u64, kind: FadingKind) -> Self {
        FadingDraws { seed, kind }
    }

    pub fn power(&self, tx: NodeId, rx: NodeId, subslot: u32) -> f64 {
        let base = mix(mix(self.seed ^ subslot as u64, tx), rx);
        match self.kind {
            FadingKind::Unit => 1.0,
            FadingKind::Rayleigh => -unit_uniform(base).ln(),
            FadingKind::Nakagami(m0) => {
                let mut acc = 0.0;
                for i in 0..m0 as u64 {
                    acc -= unit_uniform(mix(base, i + 1)).ln();
                }
                acc / m0 as f64
            }
        }
    }

    pub fn max_power(&self) -> f64 {
        match self.kind {
            FadingKind::Unit => 1.0,
            _ => MAX_EXP_DRAW,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_deterministic_and_bounded() {
        let f = FadingDraws::new(7, FadingKind::Rayleigh);
        assert_eq!(f.power(1, 2, 0), f.power(1, 2, 0));
        assert_ne!(f.power(1, 2, 0), f.power(1, 2, 1));
        assert_ne!(f.power(1, 2, 0), f.power(2, 1, 0));
        for i in 0..10_000 {
            let p = f.power(i, i + 1, 3);
            assert!(p >= 0.0 && p <= f.max_power());
        }
    }

    #[test]
    fn moments_match_the_channel() {
        let n = 200_000u64;
        for kind in [FadingKind::Rayleigh, FadingKind::Nakagami(3)] {
            let f = FadingDraws::new(11, kind);
            let (mut s, mut s2) = (0.0, 0.0);
            for i in 0..n {
                let p = f.power(i, 5, 0);
                s += p;
                s2 += p * p;
            }
            let mean = s / n as f64;
            let var = s2 / n as f64 - mean * mean;
            let expect_var = match kind {
                FadingKind::Nakagami(m0) => 1.0 / m0 as f64,
                _ => 1.0,
            };
            assert!((mean - 1.0).abs() < 0.01, "{kind:?} mean {mean}");
            assert!((var - expect_var).abs() < 0.03, "{kind:?} var {var}");
        }
        assert_eq!(FadingDraws::new(1, FadingKind::Unit).power(3, 4, 0), 1.0);
    }
}

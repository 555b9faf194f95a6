use std::f64::consts::PI;

use mhtc_core::geometry::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_chain(rng: &mut ChaCha8Rng, m: usize, r: f64, spread: f64) -> RelayChain {
    let relays = (0..m)
        .map(|_| Point::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread)))
        .collect();
    RelayChain::new(relays, r)
}

#[test]
fn random_chains_never_beat_the_equidistant_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let m = rng.random_range(1..=4);
        let r = rng.random_range(0.5..10.0);
        let c = random_chain(&mut rng, m, r, 2.0 * r);
        assert!(c.sum_squared_distance() > min_sum_squared(r, m));
    }
    for m in 1..=4 {
        let eq = equidistant_chain(4.0, m);
        assert!((eq.sum_squared_distance() - min_sum_squared(4.0, m)).abs() < 1e-12);
        // any perturbation of the equidistant placement increases the sum
        let mut bumped = eq.clone();
        bumped.relays[0].y += 1e-3;
        assert!(bumped.sum_squared_distance() > eq.sum_squared_distance());
    }
}

#[test]
fn weighted_sums_respect_cauchy_schwarz() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let m = rng.random_range(1..=4);
        let n = AttemptVector::new((0..=m).map(|_| rng.random_range(1..=5)).collect()).unwrap();
        let r = rng.random_range(0.5..10.0);
        let c = random_chain(&mut rng, m, r, 2.0 * r);
        assert!(weighted_sum_squared(&n, &c).unwrap() >= weighted_min(&n, r) * (1.0 - 1e-12));
    }
}

#[test]
fn determinant_identities() {
    for m in 1..=10 {
        assert_eq!(tridiag_det_uniform(m), m as u64 + 1);
        assert_eq!(tridiag_det_weighted(&AttemptVector::ones(m + 1)), m as u128 + 1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let len = rng.random_range(2..=9);
        let n = AttemptVector::new((0..len).map(|_| rng.random_range(1..=20)).collect()).unwrap();
        assert_eq!(tridiag_det_weighted(&n), weighted_det_closed_form(&n), "{n:?}");
    }
}

fn mc_volume(m: usize, a: f64, r: f64, samples: usize, seed: u64) -> (f64, f64) {
    // every point of the set lies within sqrt(a) of the source
    let half = a.sqrt() + r / 2.0;
    let box_vol = (2.0 * half).powi(2 * m as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let c = random_chain(&mut rng, m, r, half);
        if c.sum_squared_distance() <= a {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p * box_vol, (p * (1.0 - p) / samples as f64).sqrt() * box_vol)
}

#[test]
fn volumes_match_rejection_sampling() {
    for (m, a, r) in [(1, 10.0, 4.0), (1, 30.0, 2.0), (2, 8.0, 4.0), (2, 20.0, 3.0)] {
        let exact = ellipsoid_volume(m, a, r).unwrap();
        let (est, se) = mc_volume(m, a, r, 400_000, m as u64 * 31 + a as u64);
        assert!((est - exact).abs() <= 3.0 * se, "m={m} a={a}: {est} ± {se} vs {exact}");
    }
}

#[test]
fn weighted_volume_examples() {
    let ones = AttemptVector::ones(2);
    assert!((ellipsoid_volume_weighted(&ones, 10.0, 4.0).unwrap() - PI).abs() < 1e-12);
    let n = AttemptVector::new(vec![2, 2]).unwrap();
    // level 6 with R = 2: minimum R²/S = 4, volume π(6 − 4)/4
    assert!((ellipsoid_volume_weighted(&n, 6.0, 2.0).unwrap() - PI / 2.0).abs() < 1e-12);
    assert!(ellipsoid_volume_weighted(&n, 6.0, 4.0).is_err());
    let n = AttemptVector::new(vec![1, 2, 3]).unwrap();
    let r: f64 = 1.7;
    let a = r * r * 6.0 / 11.0 + 11.0;
    assert!((ellipsoid_volume_weighted(&n, a, r).unwrap() - 11.0 * PI * PI / 2.0).abs() < 1e-10);
    for m in 1..=4 {
        for &a in &[5.0, 12.0, 40.0] {
            let u = ellipsoid_volume(m, a, 3.0).unwrap();
            let w = ellipsoid_volume_weighted(&AttemptVector::ones(m + 1), a, 3.0).unwrap();
            assert!((u - w).abs() <= 1e-12 * u);
        }
    }
}

//! Seeded random vectors for inequality testing.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, domain,
//! index)`, so results do not depend on how samples are spread across worker
//! threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::vectors::LpVector;

/// Probability that a coordinate is exactly zero.
pub const ZERO_PROBABILITY: f64 = 0.2;
/// Tail index of the two-sided Pareto component.
pub const PARETO_TAIL: f64 = 2.5;
/// Magnitude cap of the Pareto component.
pub const PARETO_CAP: f64 = 1e6;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for sample `index` of the stream family `domain`.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

/// One coordinate: zero with probability 0.2, otherwise an equal mixture of a
/// standard normal, a capped two-sided Pareto and a `±1` atom.
pub fn coordinate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random_bool(ZERO_PROBABILITY) {
        return 0.0;
    }
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    match rng.random_range(0..3u8) {
        0 => rng.sample(StandardNormal),
        1 => {
            // Inverse transform with scale 1: U^{-1/α}, U in (0, 1].
            let u: f64 = 1.0 - rng.random::<f64>();
            sign * u.powf(-1.0 / PARETO_TAIL).min(PARETO_CAP)
        }
        _ => sign,
    }
}

pub fn random_coords<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| coordinate(rng)).collect()
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, p: f64, dim: usize) -> LpVector {
    LpVector::new(p, random_coords(rng, dim)).expect("sampled coordinates are finite")
}

/// The pair of vectors for sample `index` of `domain`.
pub fn random_pair(seed: u64, domain: u64, index: u64, p: f64, dim: usize) -> (LpVector, LpVector) {
    let mut rng = stream_rng(seed, domain, index);
    let x = random_vector(&mut rng, p, dim);
    let y = random_vector(&mut rng, p, dim);
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_pair(42, 1, 7, 1.5, 4);
        let b = random_pair(42, 1, 7, 1.5, 4);
        assert_eq!(a, b);
        assert_ne!(random_pair(42, 1, 8, 1.5, 4), a);
        assert_ne!(random_pair(42, 2, 7, 1.5, 4), a);
        assert_ne!(random_pair(43, 1, 7, 1.5, 4), a);
    }

    #[test]
    fn mixture_covers_every_component() {
        let mut rng = stream_rng(1, 0, 0);
        let draws: Vec<f64> = (0..20_000).map(|_| coordinate(&mut rng)).collect();
        let zeros = draws.iter().filter(|&&c| c == 0.0).count() as f64 / draws.len() as f64;
        assert!((zeros - ZERO_PROBABILITY).abs() < 0.02);
        assert!(draws.contains(&1.0));
        assert!(draws.iter().any(|&c| c == -1.0));
        assert!(draws.iter().any(|&c| c.abs() > 10.0));
        assert!(draws
            .iter()
            .all(|&c| c.is_finite() && c.abs() <= PARETO_CAP));
    }
}

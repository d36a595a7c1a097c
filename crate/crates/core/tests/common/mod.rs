//! Seeded random tensors shared by the integration tests.
#![allow(dead_code)]

use copositive::scalar::ratio;
use copositive::RationalTensor;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries `k/20` with `k` uniform in `lo..=20`.
pub fn random_tensor(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: i64) -> RationalTensor {
    RationalTensor::from_fn(n, d, |_| ratio(rng.random_range(lo..=20), 20)).unwrap()
}

/// Like [`random_tensor`] but with diagonal entries drawn from `0..=20`, so
/// any negativity has to come from the interior of the simplex.
pub fn random_tensor_nonneg_diagonal(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: i64) -> RationalTensor {
    RationalTensor::from_fn(n, d, |key| {
        let lo = if key.iter().all(|&i| i == key[0]) { 0 } else { lo };
        ratio(rng.random_range(lo..=20), 20)
    })
    .unwrap()
}

/// Mixed suite over `n ∈ {2,3}`, `d ∈ {2,3,4}` with entries in `[lo/20, 1]`
/// for a randomly chosen `lo`, so both copositive and non-copositive tensors
/// show up often.
pub fn mixed_suite(seed: u64, count: usize) -> Vec<RationalTensor> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(2..=3);
            let d = r.random_range(2..=4);
            let lo = [-20, -10, -5, -2, 0][r.random_range(0..5)];
            random_tensor(&mut r, n, d, lo)
        })
        .collect()
}

/// Positive diagonal, nonpositive off-diagonal entries; `d` even.
pub fn z_tensor(rng: &mut ChaCha8Rng, n: usize, d: usize) -> RationalTensor {
    let spread = rng.random_range(1..=16);
    RationalTensor::from_fn(n, d, |key| {
        if key.iter().all(|&i| i == key[0]) {
            ratio(rng.random_range(10..=20), 20)
        } else {
            ratio(-rng.random_range(0..=spread), 20)
        }
    })
    .unwrap()
}

/// `Σ_k (v_k · x)^d + ε Σ_i x_i^d` for random signed rational `v_k`; `d` even,
/// so the form is a sum of powers and `P_r` is a sum of squares.
pub fn power_sum(rng: &mut ChaCha8Rng, n: usize, d: usize, terms: usize) -> RationalTensor {
    let vs: Vec<Vec<BigRational>> = (0..terms)
        .map(|_| (0..n).map(|_| ratio(rng.random_range(-4..=4), 4)).collect())
        .collect();
    let eps = ratio(1, 10);
    RationalTensor::from_fn(n, d, |key| {
        let mut total: BigRational = vs
            .iter()
            .map(|v| key.iter().map(|&i| v[i].clone()).product::<BigRational>())
            .sum();
        if key.iter().all(|&i| i == key[0]) {
            total += eps.clone();
        }
        total
    })
    .unwrap()
}


//! Multinomial coefficients, exponent vectors and the elementary symmetric
//! constants that appear in the closed-form coefficient formula.
//!
//! Everything here is exact big-integer arithmetic: for `n = 4` and
//! `d + r = 10` multinomials already leave the `u64` range.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// A vector `α ∈ ℕ₀ⁿ`; indexes monomials `x^α` and expansion coefficients.
///
/// Ordering is lexicographic on the components, which is also the order
/// produced by [`enumerate_exponents`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(alpha: Vec<u32>) -> Self {
        ExponentVector(alpha)
    }

    pub fn zeros(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    /// `d · e_i` in dimension `n`.
    pub fn pure(n: usize, i: usize, d: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = d;
        ExponentVector(v)
    }

    /// Count vector of a (0-based) index tuple: `e_{i1} + ⋯ + e_{id}`.
    pub fn from_tuple(n: usize, tuple: &[usize]) -> Self {
        let mut v = vec![0u32; n];
        for &i in tuple {
            v[i] += 1;
        }
        ExponentVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖α‖₁`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }

    pub fn doubled(&self) -> Self {
        ExponentVector(self.0.iter().map(|&a| 2 * a).collect())
    }

    /// Componentwise half; `None` unless every component is even.
    pub fn halved(&self) -> Option<Self> {
        if self.0.iter().all(|a| a % 2 == 0) {
            Some(ExponentVector(self.0.iter().map(|&a| a / 2).collect()))
        } else {
            None
        }
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|a| a % 2 == 0)
    }

    /// Componentwise parity pattern.
    pub fn parity(&self) -> Vec<u8> {
        self.0.iter().map(|a| (a % 2) as u8).collect()
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α − β` as a signed vector (components may go negative).
    pub fn sub_signed(&self, other: &ExponentVector) -> Vec<i64> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    /// `α + e_k`.
    pub fn bumped(&self, k: usize) -> ExponentVector {
        let mut v = self.0.clone();
        v[k] += 1;
        ExponentVector(v)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, k| acc * k)
}

/// `m (m−1) ⋯ (m−k+1)`.
pub fn falling_factorial(m: u64, k: u64) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, j| acc * (m - j))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// `binomial(n, k)` as `u128`, saturating.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k as u128 {
        acc = match acc.checked_mul(n as u128 - j) {
            Some(v) => v / (j + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `c(α) = ‖α‖₁! / ∏ αᵢ!`, and `0` when any component is negative.
pub fn multinomial(alpha: &[i64]) -> BigUint {
    if alpha.iter().any(|&a| a < 0) {
        return BigUint::zero();
    }
    let total: u64 = alpha.iter().map(|&a| a as u64).sum();
    multinomial_parts(total, alpha.iter().map(|&a| a as u64))
}

pub fn multinomial_of(alpha: &ExponentVector) -> BigUint {
    let total = alpha.degree() as u64;
    multinomial_parts(total, alpha.as_slice().iter().map(|&a| a as u64))
}

// product of binomials avoids the full factorial quotient
fn multinomial_parts(total: u64, parts: impl Iterator<Item = u64>) -> BigUint {
    let mut acc = BigUint::one();
    let mut remaining = total;
    for a in parts {
        acc *= binomial(remaining, a);
        remaining -= a;
    }
    acc
}

/// Number of distinct orderings of an index tuple: `d! / ∏ (count of each index)!`.
pub fn tuple_multiplicity(tuple: &[usize]) -> BigUint {
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for &i in tuple {
        *counts.entry(i).or_insert(0) += 1;
    }
    multinomial_parts(tuple.len() as u64, counts.into_values())
}

/// All `α ∈ ℕ₀ⁿ` with `‖α‖₁ = d`, in lexicographic order.
pub fn enumerate_exponents(n: usize, d: u32) -> Vec<ExponentVector> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0u32; n];
    fill_exponents(&mut cur, 0, d, &mut out);
    out
}

fn fill_exponents(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<ExponentVector>) {
    let n = cur.len();
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(ExponentVector(cur.clone()));
        return;
    }
    for a in 0..=remaining {
        cur[pos] = a;
        fill_exponents(cur, pos + 1, remaining - a, out);
    }
}

/// All non-decreasing 0-based index tuples of length `d` over `0..n`, in
/// lexicographic order. There are `binomial(n + d − 1, d)` of them.
pub fn canonical_tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fill_tuples(n, d, 0, &mut cur, &mut out);
    out
}

fn fill_tuples(n: usize, d: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == d {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        fill_tuples(n, d, i, cur, out);
        cur.pop();
    }
}

/// Elementary symmetric polynomial `e_k(1, 2, …, m)`; `e_0 = 1`, and `0` for `k > m`.
pub fn elementary_symmetric(k: usize, m: usize) -> BigInt {
    if k > m {
        return BigInt::zero();
    }
    // e[j] after processing values 1..=v
    let mut e = vec![BigInt::zero(); k + 1];
    e[0] = BigInt::one();
    for v in 1..=m {
        for j in (1..=k.min(v)).rev() {
            let prev = e[j - 1].clone() * v;
            e[j] += prev;
        }
    }
    e[k].clone()
}

/// Memoised multinomial coefficients keyed by exponent vector.
#[derive(Debug, Default, Clone)]
pub struct CoefficientTable {
    cache: HashMap<ExponentVector, BigUint>,
}

impl CoefficientTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, alpha: &ExponentVector) -> BigUint {
        if let Some(v) = self.cache.get(alpha) {
            return v.clone();
        }
        let v = multinomial_of(alpha);
        self.cache.insert(alpha.clone(), v.clone());
        v
    }

    /// `c(α)` for a signed vector; negative components give `0` without caching.
    pub fn get_signed(&mut self, alpha: &[i64]) -> BigUint {
        if alpha.iter().any(|&a| a < 0) {
            return BigUint::zero();
        }
        self.get(&ExponentVector(alpha.iter().map(|&a| a as u32).collect()))
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&[2, 1, 0]), BigUint::from(3u32));
        assert_eq!(multinomial(&[1, -1, 2]), BigUint::zero());
        assert_eq!(multinomial(&[0, 0, 0]), BigUint::one());
        assert_eq!(multinomial(&[2, 2]), BigUint::from(6u32));
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_exponents(3, 2).len(), 6);
        assert_eq!(enumerate_exponents(1, 5), vec![ev(&[5])]);
        assert_eq!(
            enumerate_exponents(2, 3),
            vec![ev(&[0, 3]), ev(&[1, 2]), ev(&[2, 1]), ev(&[3, 0])]
        );
        assert_eq!(enumerate_exponents(4, 0), vec![ev(&[0, 0, 0, 0])]);
    }

    #[test]
    fn elementary_symmetric_examples() {
        assert_eq!(elementary_symmetric(1, 1), BigInt::from(1));
        assert_eq!(elementary_symmetric(2, 3), BigInt::from(11));
        assert_eq!(elementary_symmetric(0, 0), BigInt::from(1));
        assert_eq!(elementary_symmetric(4, 3), BigInt::zero());
        assert_eq!(elementary_symmetric(3, 3), BigInt::from(6));
    }

    #[test]
    fn falling_factorial_identity() {
        // ∏_{j=0}^{m} (ω − j) = Σ_k (−1)^k e_k(1..m) ω^{m+1−k}
        for m in 0..7usize {
            for omega in 1..=10i64 {
                let lhs: BigInt = (0..=m as i64).map(|j| BigInt::from(omega - j)).product();
                let mut rhs = BigInt::zero();
                for k in 0..=m {
                    let term = elementary_symmetric(k, m) * BigInt::from(omega).pow((m + 1 - k) as u32);
                    if k % 2 == 0 {
                        rhs += term;
                    } else {
                        rhs -= term;
                    }
                }
                assert_eq!(lhs, rhs, "m={m} omega={omega}");
            }
        }
    }

    #[test]
    fn row_sum_is_power() {
        for n in 1..=4usize {
            for d in 0..=6u32 {
                let total: BigUint = enumerate_exponents(n, d).iter().map(multinomial_of).sum();
                assert_eq!(total, BigUint::from(n).pow(d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn counts_and_uniqueness() {
        for n in 1..=4usize {
            for d in 0..=6u32 {
                let list = enumerate_exponents(n, d);
                let mut sorted = list.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted, list, "lexicographic and duplicate-free");
                assert_eq!(
                    BigUint::from(list.len()),
                    binomial((n as u64) + d as u64 - 1, d as u64)
                );
                assert!(list.iter().all(|a| a.degree() == d));
                assert_eq!(canonical_tuples(n, d as usize).len(), list.len());
            }
        }
    }

    #[test]
    fn multiplicity_matches_count_vector() {
        assert_eq!(tuple_multiplicity(&[0, 0, 1, 2]), BigUint::from(12u32));
        assert_eq!(tuple_multiplicity(&[1, 1, 1, 1]), BigUint::one());
        assert_eq!(tuple_multiplicity(&[]), BigUint::one());
    }

    #[test]
    fn table_caches() {
        let mut t = CoefficientTable::new();
        assert_eq!(t.get(&ev(&[2, 1, 0])), BigUint::from(3u32));
        assert_eq!(t.get_signed(&[1, -1]), BigUint::zero());
        assert_eq!(t.len(), 1);
    }

    proptest! {
        #[test]
        fn pascal_recurrence(alpha in proptest::collection::vec(0i64..5, 1..5)) {
            prop_assume!(alpha.iter().sum::<i64>() >= 1);
            let mut acc = BigUint::zero();
            for i in 0..alpha.len() {
                let mut a = alpha.clone();
                a[i] -= 1;
                acc += multinomial(&a);
            }
            prop_assert_eq!(multinomial(&alpha), acc);
        }

        #[test]
        fn binomial_u128_agrees(n in 0u64..60, k in 0u64..60) {
            prop_assert_eq!(BigUint::from(binomial_u128(n, k)), binomial(n, k));
        }
    }
}

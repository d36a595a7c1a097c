//! Cheap necessary conditions for copositivity.
//!
//! Two refutations are tried, both with an exact witness point:
//!
//! * a negative diagonal entry `a_(i…i)`, refuted at `e_i`;
//! * along an edge `e_i + t·e_j` of the orthant, the form is the univariate
//!   polynomial `Σ_k binom(d, k) a_(i^{d−k} j^k) t^k`. If its lowest nonzero
//!   coefficient is negative, the form is negative for small `t > 0`.
//!
//! For matrices the second rule is exactly "zero diagonal with a negative
//! entry in that row". For higher orders, a negative entry that mixes `i` with
//! two or more other indices does not by itself refute copositivity, so it is
//! not used.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::combinatorics::binomial;
use crate::tensor::RationalTensor;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScreenFailure {
    /// Diagonal entry at `(index, …, index)` is negative.
    NegativeDiagonal { index: usize },
    /// The lowest-order nonzero term of the form on the ray `e_from + t·e_toward`
    /// is negative; `entry` is the responsible canonical tuple.
    NegativeEdgeTerm {
        from: usize,
        toward: usize,
        entry: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScreenOutcome {
    Pass,
    Fail {
        reason: ScreenFailure,
        witness: Vec<BigRational>,
        value: BigRational,
    },
}

impl ScreenOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ScreenOutcome::Pass)
    }
}

fn unit(n: usize, i: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n];
    v[i] = BigRational::one();
    v
}

fn edge_key(i: usize, j: usize, k: usize, d: usize) -> Vec<usize> {
    let mut key = vec![i; d - k];
    key.extend(std::iter::repeat_n(j, k));
    key.sort_unstable();
    key
}

pub fn necessary_screen(a: &RationalTensor) -> ScreenOutcome {
    let n = a.n();
    let d = a.d();
    for i in 0..n {
        let v = a.get_canonical(&vec![i; d]);
        if v.is_negative() {
            let witness = unit(n, i);
            return ScreenOutcome::Fail {
                reason: ScreenFailure::NegativeDiagonal { index: i },
                value: v.clone(),
                witness,
            };
        }
    }
    for i in 0..n {
        if !a.get_canonical(&vec![i; d]).is_zero() {
            continue;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let coeffs: Vec<BigRational> = (0..=d)
                .map(|k| {
                    let c = BigInt::from(binomial(d as u64, k as u64));
                    a.get_canonical(&edge_key(i, j, k, d)).clone() * BigRational::from_integer(c)
                })
                .collect();
            let Some(k0) = coeffs.iter().position(|c| !c.is_zero()) else {
                continue;
            };
            if coeffs[k0].is_negative() {
                let (witness, value) = edge_witness(a, i, j, &coeffs);
                return ScreenOutcome::Fail {
                    reason: ScreenFailure::NegativeEdgeTerm {
                        from: i,
                        toward: j,
                        entry: edge_key(i, j, k0, d),
                    },
                    witness,
                    value,
                };
            }
        }
    }
    ScreenOutcome::Pass
}

/// Halves `t` until the edge polynomial is negative; terminates because the
/// lowest-order term dominates as `t → 0`.
fn edge_witness(
    a: &RationalTensor,
    i: usize,
    j: usize,
    coeffs: &[BigRational],
) -> (Vec<BigRational>, BigRational) {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut t = BigRational::one();
    loop {
        let value = coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t.clone() + c.clone());
        if value.is_negative() {
            let mut x = unit(a.n(), i);
            x[j] = t;
            return (x, value);
        }
        t *= half.clone();
    }
}

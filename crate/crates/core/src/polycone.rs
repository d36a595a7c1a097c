//! The inner hierarchy defined by nonnegative coefficients of
//! `P_r(y) = f_A(y∘y) · (Σ y_k²)^r`.
//!
//! Writing `P_r(y) = Σ_θ A_θ y^{2θ}` over `θ ∈ Iⁿ(r + d)`, three routes to the
//! coefficients are provided:
//!
//! * [`expand_pr`]: the defining sum `A_θ = Σ_t c(θ − count(t)) a_t` over all
//!   index tuples (canonical tuples with multiplicities);
//! * [`expand_pr_convolution`]: repeated multiplication by `Σ y_k²`, i.e.
//!   `A^{r+1}_θ = Σ_k A^r_{θ − e_k}`; the production path;
//! * [`expand_pr_closed_form`]: the moment formula with falling factorials.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics::{
    elementary_symmetric, enumerate_exponents, factorial, multinomial, tuple_multiplicity,
    ExponentVector,
};
use crate::scalar::Scalar;
use crate::tensor::SymTensor;

/// Coefficients `A_θ` of `P_r`, keyed by `θ` (not `2θ`).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyExpansion<T> {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub coeffs: BTreeMap<ExponentVector, T>,
}

impl<T: Scalar> PolyExpansion<T> {
    /// Total degree `s = r + d` of every `θ`.
    pub fn s(&self) -> usize {
        self.r + self.d
    }

    pub fn get(&self, theta: &ExponentVector) -> Option<&T> {
        self.coeffs.get(theta)
    }

    /// The first most-negative coefficient in lexicographic `θ` order.
    pub fn most_negative(&self) -> Option<(&ExponentVector, &T)> {
        let mut best: Option<(&ExponentVector, &T)> = None;
        for (k, v) in &self.coeffs {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k, v));
            }
        }
        best
    }

    /// Nonzero coefficients keyed by the full exponent `2θ`.
    pub fn doubled_nonzero(&self) -> BTreeMap<ExponentVector, T> {
        self.coeffs
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| (k.doubled(), v.clone()))
            .collect()
    }

    /// Multiplies by `Σ y_k²` once, giving the expansion at level `r + 1`.
    pub fn lift(&self) -> PolyExpansion<T> {
        let thetas = enumerate_exponents(self.n, (self.s() + 1) as u32);
        let coeffs = thetas
            .into_par_iter()
            .map(|theta| {
                let mut acc = T::zero();
                for k in 0..self.n {
                    if theta.as_slice()[k] == 0 {
                        continue;
                    }
                    let mut prev = theta.as_slice().to_vec();
                    prev[k] -= 1;
                    if let Some(v) = self.coeffs.get(&ExponentVector::new(prev)) {
                        acc = acc + v.clone();
                    }
                }
                (theta, acc)
            })
            .collect();
        PolyExpansion {
            n: self.n,
            d: self.d,
            r: self.r + 1,
            coeffs,
        }
    }
}

fn count_vector(n: usize, tuple: &[usize]) -> Vec<i64> {
    let mut m = vec![0i64; n];
    for &i in tuple {
        m[i] += 1;
    }
    m
}

fn big<T: Scalar>(v: impl Into<BigInt>) -> T {
    T::from_bigint(&v.into())
}

/// Canonical tuples with nonzero value, paired with multiplicity and counts.
fn support<T: Scalar>(a: &SymTensor<T>) -> Vec<(Vec<i64>, T)> {
    a.iter_canonical()
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, v)| {
            let w = big::<T>(tuple_multiplicity(&k)) * v.clone();
            (count_vector(a.n(), &k), w)
        })
        .collect()
}

/// Direct evaluation of the defining sum.
pub fn expand_pr<T: Scalar>(a: &SymTensor<T>, r: usize) -> PolyExpansion<T> {
    let n = a.n();
    let s = r + a.d();
    let terms = support(a);
    let coeffs = enumerate_exponents(n, s as u32)
        .into_par_iter()
        .map(|theta| {
            let mut acc = T::zero();
            for (m, w) in &terms {
                let shifted = theta.sub_signed(&ExponentVector::new(
                    m.iter().map(|&x| x as u32).collect(),
                ));
                let c = multinomial(&shifted);
                if !c.is_zero() {
                    acc = acc + big::<T>(c) * w.clone();
                }
            }
            (theta, acc)
        })
        .collect();
    PolyExpansion { n, d: a.d(), r, coeffs }
}

/// Level 0 read off the tensor, then `r` multiplications by `Σ y_k²`.
pub fn expand_pr_convolution<T: Scalar>(a: &SymTensor<T>, r: usize) -> PolyExpansion<T> {
    let n = a.n();
    let coeffs = a
        .iter_canonical()
        .map(|(k, v)| {
            let theta = ExponentVector::from_tuple(n, &k);
            (theta, big::<T>(tuple_multiplicity(&k)) * v.clone())
        })
        .collect();
    let mut e = PolyExpansion { n, d: a.d(), r: 0, coeffs };
    for _ in 0..r {
        e = e.lift();
    }
    e
}

/// `x(x−1)⋯(x−m+1)`.
fn falling(x: u32, m: i64) -> BigInt {
    (0..m).fold(BigInt::one(), |acc, j| acc * (BigInt::from(x) - j))
}

fn power(x: u32, m: i64) -> BigInt {
    num_traits::pow(BigInt::from(x), m as usize)
}

/// The bracket of the closed form, split into its three parts:
/// the moment `⟨A, θ^{⊗d}⟩`, the diagonal correction
/// `Σ_k (−1)^k e_k(1..d−1) ⟨A, Diag(θ^{∘(d−k)})⟩`, and the correction for
/// mixed tuples, `Σ_t mult(t) a_t (∏ (θ_k)_{m_k} − ∏ θ_k^{m_k})` over
/// non-diagonal `t`.
struct Bracket<T> {
    moment: T,
    diagonal: T,
    mixed: T,
}

fn bracket<T: Scalar>(a: &SymTensor<T>, terms: &[(Vec<i64>, T)], theta: &[u32]) -> Bracket<T> {
    let d = a.d();
    let mut moment = T::zero();
    let mut mixed = T::zero();
    for (m, w) in terms {
        let mono = m
            .iter()
            .zip(theta)
            .fold(BigInt::one(), |acc, (&mk, &tk)| acc * power(tk, mk));
        moment = moment + big::<T>(mono.clone()) * w.clone();
        if m.iter().filter(|&&mk| mk > 0).count() > 1 {
            let ff = m
                .iter()
                .zip(theta)
                .fold(BigInt::one(), |acc, (&mk, &tk)| acc * falling(tk, mk));
            mixed = mixed + big::<T>(ff - mono) * w.clone();
        }
    }
    let mut diagonal = T::zero();
    for k in 1..d {
        let beta = elementary_symmetric(k, d - 1);
        let mut inner = T::zero();
        for (i, &ti) in theta.iter().enumerate() {
            let aii = a.get_canonical(&vec![i; d]);
            if !aii.is_zero() {
                inner = inner + big::<T>(power(ti, (d - k) as i64)) * aii.clone();
            }
        }
        let term = big::<T>(beta) * inner;
        diagonal = if k % 2 == 1 { diagonal - term } else { diagonal + term };
    }
    Bracket { moment, diagonal, mixed }
}

/// `c(θ) / s(s−1)⋯(s−d+1) = r! / ∏ θ_k!`.
fn closed_form_scale(theta: &[u32], r: usize) -> BigRational {
    let den = theta
        .iter()
        .fold(BigInt::one(), |acc, &t| acc * BigInt::from(factorial(t as u64)));
    BigRational::new(BigInt::from(factorial(r as u64)), den)
}

fn closed_form_with<F>(a: &SymTensor<BigRational>, r: usize, combine: F) -> PolyExpansion<BigRational>
where
    F: Fn(Bracket<BigRational>) -> BigRational + Sync,
{
    let n = a.n();
    let terms = support(a);
    let coeffs = enumerate_exponents(n, (r + a.d()) as u32)
        .into_par_iter()
        .map(|theta| {
            let b = bracket(a, &terms, theta.as_slice());
            let v = closed_form_scale(theta.as_slice(), r) * combine(b);
            (theta, v)
        })
        .collect();
    PolyExpansion { n, d: a.d(), r, coeffs }
}

/// Closed form
/// `A_θ = r!/∏θ_k! · [⟨A, θ^{⊗d}⟩ + Σ_k (−1)^k e_k(1..d−1) ⟨A, Diag(θ^{∘(d−k)})⟩ + mixed correction]`.
///
/// The mixed correction vanishes for `d = 2` and for diagonal tensors.
pub fn expand_pr_closed_form(a: &SymTensor<BigRational>, r: usize) -> PolyExpansion<BigRational> {
    closed_form_with(a, r, |b| b.moment + b.diagonal + b.mixed)
}

/// The closed form without the mixed-tuple correction. Exact for `d ≤ 2` and
/// for diagonal tensors only; kept to exhibit the difference.
pub fn expand_pr_diagonal_only(a: &SymTensor<BigRational>, r: usize) -> PolyExpansion<BigRational> {
    closed_form_with(a, r, |b| b.moment + b.diagonal)
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoefMembership<T> {
    Member(PolyExpansion<T>),
    NotMember { theta: ExponentVector, value: T },
}

impl<T> CoefMembership<T> {
    pub fn is_member(&self) -> bool {
        matches!(self, CoefMembership::Member(_))
    }
}

/// Member iff every `A_θ ≥ −tol`. Pass zero for exact input.
pub fn member_c_r<T: Scalar>(a: &SymTensor<T>, r: usize, tol: &T) -> CoefMembership<T> {
    let e = expand_pr_convolution(a, r);
    classify(e, tol)
}

pub fn classify<T: Scalar>(e: PolyExpansion<T>, tol: &T) -> CoefMembership<T> {
    let floor = T::zero() - tol.clone();
    match e.most_negative() {
        Some((theta, v)) if *v < floor => CoefMembership::NotMember {
            theta: theta.clone(),
            value: v.clone(),
        },
        _ => CoefMembership::Member(e),
    }
}

/// Exact membership for rational tensors.
pub fn member_c_r_exact(a: &SymTensor<BigRational>, r: usize) -> CoefMembership<BigRational> {
    member_c_r(a, r, &BigRational::zero())
}

/// Default tolerance for float tensors: `1e−12 · max |entry|`.
pub fn default_float_tol(a: &SymTensor<f64>) -> f64 {
    let m = a
        .stored_entries()
        .map(|(_, v)| v.abs())
        .fold(a.default_value().abs(), f64::max);
    1e-12 * m
}

//! Symmetric tensors stored by canonical (sorted) multi-index.
//!
//! Indices in this API are 0-based. The JSON document format is 1-based and
//! converts at the boundary (see [`crate::io`]).

use std::collections::BTreeMap;
use std::ops::Div;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics::{binomial_u128, canonical_tuples, tuple_multiplicity};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sorts an index tuple after checking every component is below `n`.
pub fn canonicalize(idx: &[usize], n: usize) -> Result<Vec<usize>> {
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { component: bad, n });
    }
    let mut t = idx.to_vec();
    t.sort_unstable();
    Ok(t)
}

/// A symmetric tensor of order `d` and dimension `n`.
///
/// Entries are keyed by sorted index tuples; tuples that are not stored take
/// the `default` value. Values are immutable once built; use
/// [`SymTensorBuilder`] to construct one.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor<T> {
    n: usize,
    d: usize,
    entries: BTreeMap<Vec<usize>, T>,
    default: T,
}

pub type RationalTensor = SymTensor<BigRational>;
pub type FloatTensor = SymTensor<f64>;

#[derive(Clone, Debug)]
pub struct SymTensorBuilder<T> {
    tensor: SymTensor<T>,
}

impl<T: Scalar> SymTensorBuilder<T> {
    pub fn default_value(mut self, v: T) -> Self {
        self.tensor.default = v;
        self
    }

    /// Sets the entry for `idx` and all of its permutations.
    pub fn set(&mut self, idx: &[usize], v: T) -> Result<&mut Self> {
        let key = self.tensor.key(idx)?;
        self.tensor.entries.insert(key, v);
        Ok(self)
    }

    pub fn with(mut self, idx: &[usize], v: T) -> Result<Self> {
        self.set(idx, v)?;
        Ok(self)
    }

    /// Whether `idx` (any permutation) has been set explicitly.
    pub fn contains(&self, idx: &[usize]) -> Result<bool> {
        let key = self.tensor.key(idx)?;
        Ok(self.tensor.entries.contains_key(&key))
    }

    pub fn build(self) -> SymTensor<T> {
        self.tensor
    }
}

impl<T: Scalar> SymTensor<T> {
    pub fn builder(n: usize, d: usize) -> Result<SymTensorBuilder<T>> {
        Ok(SymTensorBuilder {
            tensor: SymTensor::filled(n, d, T::zero())?,
        })
    }

    /// Tensor with every entry equal to `value`.
    pub fn filled(n: usize, d: usize, value: T) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidShape { n, d });
        }
        Ok(SymTensor {
            n,
            d,
            entries: BTreeMap::new(),
            default: value,
        })
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Self::filled(n, d, T::zero())
    }

    /// Builds from a function of the canonical tuple.
    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let mut t = Self::zeros(n, d)?;
        for key in canonical_tuples(n, d) {
            let v = f(&key);
            if !v.is_zero() {
                t.entries.insert(key, v);
            }
        }
        Ok(t)
    }

    /// Matrix (order 2) from rows; only the upper triangle is read.
    pub fn from_matrix(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    got: row.len(),
                    expected: n,
                });
            }
        }
        Self::from_fn(n, 2, |t| rows[t[0]][t[1]].clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn default_value(&self) -> &T {
        &self.default
    }

    /// Number of distinct canonical tuples, `binomial(n + d − 1, d)`.
    pub fn num_canonical(&self) -> u128 {
        binomial_u128((self.n + self.d - 1) as u64, self.d as u64)
    }

    fn key(&self, idx: &[usize]) -> Result<Vec<usize>> {
        if idx.len() != self.d {
            return Err(Error::IndexLength {
                got: idx.len(),
                expected: self.d,
            });
        }
        canonicalize(idx, self.n)
    }

    pub fn get(&self, idx: &[usize]) -> Result<&T> {
        let key = self.key(idx)?;
        Ok(self.entries.get(&key).unwrap_or(&self.default))
    }

    /// Lookup by an already sorted in-range tuple.
    pub fn get_canonical(&self, key: &[usize]) -> &T {
        self.entries.get(key).unwrap_or(&self.default)
    }

    /// Explicitly stored entries, in canonical order.
    pub fn stored_entries(&self) -> impl Iterator<Item = (&Vec<usize>, &T)> {
        self.entries.iter()
    }

    /// Every canonical tuple with its value, in lexicographic order.
    pub fn iter_canonical(&self) -> impl Iterator<Item = (Vec<usize>, &T)> + '_ {
        canonical_tuples(self.n, self.d).into_iter().map(move |k| {
            let v = self.entries.get(&k).unwrap_or(&self.default);
            (k, v)
        })
    }

    /// Canonical tuples with their multiplicity `d!/∏ count!` and value.
    pub fn weighted_entries(&self) -> Vec<(Vec<usize>, T, T)> {
        self.iter_canonical()
            .map(|(k, v)| {
                let m = T::from_bigint(&BigInt::from(tuple_multiplicity(&k)));
                (k, m, v.clone())
            })
            .collect()
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> SymTensor<U> {
        SymTensor {
            n: self.n,
            d: self.d,
            entries: self.entries.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
            default: f(&self.default),
        }
    }

    pub fn to_f64(&self) -> FloatTensor {
        self.map(|v| v.to_f64())
    }

    fn check_vec(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                got: x.len(),
                expected: self.n,
            });
        }
        Ok(())
    }

    /// `f_A(x) = Σ a_{i1⋯id} x_{i1} ⋯ x_{id}`, summed over canonical tuples with
    /// multiplicity weights.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        self.check_vec(x)?;
        let mut acc = T::zero();
        for (k, v) in self.iter_canonical() {
            if v.is_zero() {
                continue;
            }
            let mut term = T::from_bigint(&BigInt::from(tuple_multiplicity(&k))) * v.clone();
            for &i in &k {
                term = term * x[i].clone();
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// `⟨A, B⟩` over all `n^d` tuples, computed on canonical tuples.
    pub fn inner_product(&self, other: &SymTensor<T>) -> Result<T> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::ShapeMismatch {
                n1: self.n,
                d1: self.d,
                n2: other.n,
                d2: other.d,
            });
        }
        let mut acc = T::zero();
        for (k, a) in self.iter_canonical() {
            let b = other.get_canonical(&k);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let m = T::from_bigint(&BigInt::from(tuple_multiplicity(&k)));
            acc = acc + m * a.clone() * b.clone();
        }
        Ok(acc)
    }

    /// `x ⊗ ⋯ ⊗ x` (`d` times).
    pub fn rank_one(x: &[T], d: usize) -> Result<Self> {
        let n = x.len();
        Self::from_fn(n, d, |t| {
            t.iter().fold(T::one(), |acc, &i| acc * x[i].clone())
        })
    }

    pub fn diag_vector(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.get_canonical(&vec![i; self.d]).clone())
            .collect()
    }

    /// Diagonal tensor with `theta[i]` at `(i, …, i)`.
    pub fn diag_tensor(theta: &[T], d: usize) -> Result<Self> {
        let n = theta.len();
        let mut b = Self::builder(n, d)?;
        for (i, v) in theta.iter().enumerate() {
            if !v.is_zero() {
                b.set(&vec![i; d], v.clone())?;
            }
        }
        Ok(b.build())
    }

    /// Dense row-major copy of all `n^d` entries.
    pub fn dense(&self) -> Vec<T> {
        let total = self.n.pow(self.d as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.d];
        let mut sorted = vec![0usize; self.d];
        for _ in 0..total {
            sorted.copy_from_slice(&idx);
            sorted.sort_unstable();
            out.push(self.get_canonical(&sorted).clone());
            for pos in (0..self.d).rev() {
                idx[pos] += 1;
                if idx[pos] < self.n {
                    break;
                }
                idx[pos] = 0;
            }
        }
        out
    }

    /// Polar form on a family of points: the symmetric tensor `B` of order `d`
    /// over `points.len()` indices with
    /// `B[j1..jd] = ⟨A, p_{j1} ⊗ ⋯ ⊗ p_{jd}⟩`.
    ///
    /// Computed by `d` successive mode products on the dense array, so the
    /// cost is `O(d · m · n^d)` for `m` points.
    pub fn polar_tensor(&self, points: &[Vec<T>]) -> Result<SymTensor<T>> {
        for p in points {
            self.check_vec(p)?;
        }
        let m = points.len();
        if m == 0 {
            return Err(Error::InvalidArgument("no points".into()));
        }
        let n = self.n;
        let d = self.d;
        // After processing `k` modes the array has shape m^k × n^(d−k), with the
        // transformed modes leading.
        let mut cur = self.dense();
        for k in 0..d {
            let lead = m.pow(k as u32);
            let trail = n.pow((d - k - 1) as u32);
            let mut next = vec![T::zero(); lead * m * trail];
            for a in 0..lead {
                for j in 0..m {
                    let pj = &points[j];
                    for (i, pji) in pj.iter().enumerate() {
                        if pji.is_zero() {
                            continue;
                        }
                        let src = (a * n + i) * trail;
                        let dst = (a * m + j) * trail;
                        for t in 0..trail {
                            let v = &cur[src + t];
                            if v.is_zero() {
                                continue;
                            }
                            next[dst + t] = next[dst + t].clone() + pji.clone() * v.clone();
                        }
                    }
                }
            }
            cur = next;
        }
        let mut out = SymTensor::zeros(m, d)?;
        for key in canonical_tuples(m, d) {
            let flat = key.iter().fold(0usize, |acc, &j| acc * m + j);
            let v = cur[flat].clone();
            if !v.is_zero() {
                out.entries.insert(key, v);
            }
        }
        Ok(out)
    }

    /// `⟨A, w_1 ⊗ ⋯ ⊗ w_d⟩` for `d` vectors.
    pub fn polar_value(&self, vectors: &[&[T]]) -> Result<T> {
        if vectors.len() != self.d {
            return Err(Error::IndexLength {
                got: vectors.len(),
                expected: self.d,
            });
        }
        let mut cur = self.dense();
        let n = self.n;
        for w in vectors.iter().rev() {
            self.check_vec(w)?;
            let lead = cur.len() / n;
            let mut next = vec![T::zero(); lead];
            for (a, slot) in next.iter_mut().enumerate() {
                let mut acc = T::zero();
                for i in 0..n {
                    acc = acc + cur[a * n + i].clone() * w[i].clone();
                }
                *slot = acc;
            }
            cur = next;
        }
        Ok(cur.pop().unwrap_or_else(T::zero))
    }
}

impl<T: Scalar + Div<Output = T>> SymTensor<T> {
    /// Symmetrisation of `u^{⊗a} ⊗ v^{⊗(d−a)}`, so that
    /// `⟨A, mixed_rank_one(u, v, a, d)⟩ = ⟨A, u^{⊗a} ⊗ v^{⊗(d−a)}⟩` for symmetric `A`.
    pub fn mixed_rank_one(u: &[T], v: &[T], a: usize, d: usize) -> Result<Self> {
        if d < 2 || a == 0 || a >= d {
            return Err(Error::SplitOutOfRange {
                split: a,
                max: d.saturating_sub(1),
            });
        }
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                got: v.len(),
                expected: u.len(),
            });
        }
        let n = u.len();
        let subsets = position_subsets(d, a);
        let count = T::from_bigint(&BigInt::from(subsets.len()));
        Self::from_fn(n, d, |t| {
            let mut acc = T::zero();
            for mask in &subsets {
                let mut term = T::one();
                for (pos, &i) in t.iter().enumerate() {
                    let f = if mask & (1 << pos) != 0 { &u[i] } else { &v[i] };
                    term = term * f.clone();
                }
                acc = acc + term;
            }
            acc / count.clone()
        })
    }
}

fn position_subsets(d: usize, a: usize) -> Vec<u64> {
    (0u64..(1u64 << d))
        .filter(|m| m.count_ones() as usize == a)
        .collect()
}

impl SymTensor<BigRational> {
    /// Positive common denominator `L` of all entries and the integer tensor `L · A`.
    pub fn integer_scaled(&self) -> (SymTensor<BigInt>, BigInt) {
        let mut lcm = self.default.denom().clone();
        for v in self.entries.values() {
            lcm = lcm.lcm(v.denom());
        }
        let scaled = self.map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer());
        (scaled, lcm)
    }

    /// Largest absolute entry value.
    pub fn max_abs(&self) -> BigRational {
        self.entries
            .values()
            .chain(std::iter::once(&self.default))
            .map(|v| v.abs_val())
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Scales a rational point to an integer vector by a positive factor.
pub fn integer_point(x: &[BigRational]) -> Vec<BigInt> {
    let lcm = x
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    x.iter()
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect()
}

/// Multiplicity of a canonical tuple as a big integer (re-exported for callers
/// that iterate canonical tuples themselves).
pub fn multiplicity(key: &[usize]) -> BigUint {
    tuple_multiplicity(key)
}

//! Brute-force ground truth, written without reuse of the evaluation,
//! expansion or partition code so that their bugs cannot be mirrored here.
//!
//! Every routine sums literally over all `n^d` index tuples.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::combinatorics::{binomial_u128, ExponentVector};
use crate::error::{Error, Result};
use crate::limits;
use crate::tensor::RationalTensor;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 2_718_281_828;

/// Odometer over `{0..n}^d`.
fn all_tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    let total = n.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        out.push(idx.clone());
        for pos in (0..d).rev() {
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
    out
}

/// Nonnegative integer vectors of length `n` summing to `m`, by odometer with
/// rejection.
fn simplex_lattice(n: usize, m: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut c = vec![0u32; n];
    loop {
        if c.iter().sum::<u32>() == m {
            out.push(c.clone());
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            c[pos] += 1;
            if c[pos] <= m {
                break;
            }
            c[pos] = 0;
            pos += 1;
        }
    }
}

fn tuples_checked(a: &RationalTensor) -> Result<Vec<Vec<usize>>> {
    let total = (a.n() as u128).saturating_pow(a.d() as u32);
    limits::check("index tuples", total)?;
    Ok(all_tuples(a.n(), a.d()))
}

/// Minimum of `f_A` over `{x ∈ Δ : m·x integral}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMinimum {
    pub min_value: BigRational,
    pub argmin: Vec<BigRational>,
    pub resolution: u32,
    pub points: usize,
}

pub fn simplex_grid_min(a: &RationalTensor, resolution: u32) -> Result<GridMinimum> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let n = a.n();
    let count = binomial_u128((n as u64) + resolution as u64 - 1, resolution as u64);
    limits::check("grid points", count)?;
    // The odometer visits (m+1)^n vectors.
    limits::check("lattice candidates", (resolution as u128 + 1).saturating_pow(n as u32))?;
    let tuples = tuples_checked(a)?;
    let (scaled, denom) = a.integer_scaled();
    let entries: Vec<BigInt> = tuples
        .iter()
        .map(|t| scaled.get(t).expect("valid tuple").clone())
        .collect();
    let points = simplex_lattice(n, resolution);
    let values: Vec<BigInt> = points
        .par_iter()
        .map(|c| {
            let mut acc = BigInt::zero();
            for (t, e) in tuples.iter().zip(&entries) {
                if e.is_zero() {
                    continue;
                }
                let mut term = e.clone();
                for &i in t {
                    term *= c[i];
                }
                acc += term;
            }
            acc
        })
        .collect();
    let (best, value) = values
        .iter()
        .enumerate()
        .fold(None::<(usize, &BigInt)>, |acc, (k, v)| match acc {
            Some((_, b)) if b <= v => acc,
            _ => Some((k, v)),
        })
        .expect("grid is non-empty");
    let m = BigInt::from(resolution);
    let scale = denom * num_traits::pow(m.clone(), a.d());
    Ok(GridMinimum {
        min_value: BigRational::new(value.clone(), scale),
        argmin: points[best]
            .iter()
            .map(|&k| BigRational::new(BigInt::from(k), m.clone()))
            .collect(),
        resolution,
        points: points.len(),
    })
}

type Poly = BTreeMap<Vec<u32>, BigRational>;

fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for (e1, c1) in p {
        for (e2, c2) in q {
            let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
            *out.entry(e).or_insert_with(BigRational::zero) += c1 * c2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Coefficients of `f_A(y∘y) · (Σ y_k²)^r`, keyed by full exponent, zero
/// coefficients omitted. Built by literal polynomial multiplication.
pub fn expand_bruteforce(a: &RationalTensor, r: usize) -> Result<BTreeMap<ExponentVector, BigRational>> {
    let n = a.n();
    let mut f = Poly::new();
    for t in tuples_checked(a)? {
        let mut e = vec![0u32; n];
        for &i in &t {
            e[i] += 2;
        }
        *f.entry(e).or_insert_with(BigRational::zero) += a.get(&t).expect("valid tuple").clone();
    }
    f.retain(|_, v| !v.is_zero());
    let mut sq = Poly::new();
    for k in 0..n {
        let mut e = vec![0u32; n];
        e[k] = 2;
        sq.insert(e, BigRational::one());
    }
    for _ in 0..r {
        f = poly_mul(&f, &sq);
    }
    Ok(f.into_iter().map(|(e, v)| (ExponentVector::new(e), v)).collect())
}

/// Minimum of `f_A` over sampled unit vectors of `ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMinimum {
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
    pub probes: usize,
    pub seed: u64,
}

/// Nonzero vectors with entries in `{−2, …, 2}`, for `n ≤ 4`.
pub fn lattice_probes(n: usize) -> Vec<Vec<f64>> {
    if n > 4 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for code in 0..5usize.pow(n as u32) {
        let mut c = code;
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let x = (c % 5) as f64 - 2.0;
                c /= 5;
                x
            })
            .collect();
        if v.iter().any(|&x| x != 0.0) {
            out.push(v);
        }
    }
    out
}

fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|x| x / norm).collect())
}

/// `samples` normalised standard-normal draws from a ChaCha8 stream seeded with
/// `seed`, followed by the normalised `probes`.
pub fn fullspace_sample_min(
    a: &RationalTensor,
    samples: usize,
    seed: u64,
    probes: &[Vec<f64>],
) -> Result<SampleMinimum> {
    if samples == 0 && probes.is_empty() {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let n = a.n();
    for p in probes {
        if p.len() != n {
            return Err(Error::DimensionMismatch { got: p.len(), expected: n });
        }
    }
    let tuples = tuples_checked(a)?;
    limits::check("samples", samples as u128)?;
    let entries: Vec<f64> = tuples
        .iter()
        .map(|t| crate::scalar::Scalar::to_f64(a.get(t).expect("valid tuple")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(samples + probes.len());
    while points.len() < samples {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(u) = normalize(&v) {
            points.push(u);
        }
    }
    points.extend(probes.iter().filter_map(|p| normalize(p)));
    let values: Vec<f64> = points
        .par_iter()
        .map(|x| {
            tuples
                .iter()
                .zip(&entries)
                .map(|(t, e)| t.iter().fold(*e, |acc, &i| acc * x[i]))
                .sum()
        })
        .collect();
    let (best, min_value) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });
    Ok(SampleMinimum {
        min_value,
        argmin: points[best].clone(),
        samples,
        probes: points.len() - samples,
        seed,
    })
}

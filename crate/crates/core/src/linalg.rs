//! Small dense symmetric linear algebra in `f64`.
//!
//! Eigendecomposition is cyclic Jacobi. The minimum-eigenvalue check used by
//! certificate verification deliberately avoids it and works from Cholesky
//! factorisations of shifted matrices instead.

use serde::{Deserialize, Serialize};

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Adds `v` to `(i, j)` and, when off the diagonal, to `(j, i)`.
    #[inline]
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Averages with the transpose to remove rounding asymmetry.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

/// Eigenvalues with eigenvectors stored as the columns of a row-major matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl Eigen {
    #[inline]
    pub fn vector_component(&self, row: usize, k: usize) -> f64 {
        self.vectors[row * self.n + k]
    }

    /// `Σ_k g(λ_k) v_k v_kᵀ`.
    pub fn reconstruct(&self, g: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        for k in 0..n {
            let w = g(self.values[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vector_component(i, k) * w;
                if vi == 0.0 {
                    continue;
                }
                for j in i..n {
                    out.data[i * n + j] += vi * self.vector_component(j, k);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out.data[i * n + j] = out.data[j * n + i];
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn jacobi_eigen(m: &SymMatrix) -> Eigen {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.frobenius();
    if n > 1 && scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Eigen {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
        n,
    }
}

/// Nearest PSD matrix in Frobenius norm.
pub fn project_psd(m: &SymMatrix) -> SymMatrix {
    jacobi_eigen(m).reconstruct(|l| l.max(0.0))
}

/// Whether `m + shift·I` has a Cholesky factorisation with positive pivots.
pub fn cholesky_succeeds(m: &SymMatrix, shift: f64) -> bool {
    let n = m.n;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = m.get(j, j) + shift;
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return false;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    true
}

/// Smallest eigenvalue by bisection on `λ` with the predicate
/// "`m − λ·I` is positive definite", started from Gershgorin bounds.
///
/// Returns a value within `abs_tol` below the true minimum (up to rounding in
/// the factorisation).
pub fn min_eigenvalue(m: &SymMatrix, abs_tol: f64) -> f64 {
    let n = m.n;
    if n == 0 {
        return f64::INFINITY;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
        lo = lo.min(m.get(i, i) - radius);
        hi = hi.min(m.get(i, i));
    }
    if !cholesky_succeeds(m, -lo) {
        // Gershgorin bound hit exactly; back off slightly.
        lo -= abs_tol.max(1e-300);
    }
    for _ in 0..200 {
        if hi - lo <= abs_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if cholesky_succeeds(m, -mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Least-squares minimum-norm solution of `h x = b` for symmetric `h`,
/// discarding eigenvalues below `rel_cut · max |λ|`.
pub fn pseudo_solve(h: &SymMatrix, b: &[f64], rel_cut: f64) -> Vec<f64> {
    let e = jacobi_eigen(h);
    let n = h.n;
    let top = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = vec![0.0; n];
    if top == 0.0 {
        return x;
    }
    for k in 0..n {
        let lambda = e.values[k];
        if lambda.abs() <= rel_cut * top {
            continue;
        }
        let proj: f64 = (0..n).map(|i| e.vector_component(i, k) * b[i]).sum();
        let coef = proj / lambda;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coef * e.vector_component(i, k);
        }
    }
    x
}

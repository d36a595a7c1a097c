//! Sum-of-squares certificates for `P_r(y) = f_A(y∘y) · (Σ y_k²)^r`.
//!
//! `P_r` is SOS iff there is a PSD Gram matrix `G` over the monomials of
//! degree `s = d + r` with `mᵀ G m = P_r`. Only products of monomials with the
//! same exponent parity can produce the even exponents of `P_r`, so `G` may be
//! taken block diagonal over parity classes.
//!
//! The solver alternates projections (with Dykstra's correction) between the
//! affine coefficient-matching set and the PSD cone, and periodically tries to
//! polish the iterate on the face spanned by its dominant eigenvectors. Every
//! candidate is re-checked by [`verify_certificate`], which recomputes the
//! target coefficients by a different expansion route and bounds the smallest
//! eigenvalue through Cholesky factorisations rather than the eigensolver.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_exponents, ExponentVector};
use crate::linalg::{jacobi_eigen, min_eigenvalue, pseudo_solve, SymMatrix};
use crate::polycone::{expand_pr, expand_pr_convolution, member_c_r_exact, CoefMembership};
use crate::scalar::Scalar;
use crate::tensor::RationalTensor;

#[derive(Clone, Debug)]
struct Constraint {
    target: f64,
    /// Number of ordered basis pairs whose product has this exponent.
    count: usize,
}

/// Gram feasibility problem for one tensor and level.
#[derive(Clone, Debug)]
pub struct GramProblem {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// All monomials of degree `d + r`, lexicographic.
    pub basis: Vec<ExponentVector>,
    /// Indices into `basis`, one list per block.
    pub blocks: Vec<Vec<usize>>,
    /// Required coefficient for each even exponent `2θ`.
    pub targets: BTreeMap<ExponentVector, BigRational>,
    constraints: Vec<Constraint>,
    /// Per block: `(i, j, constraint)` for local `i ≤ j`.
    pairs: Vec<Vec<(usize, usize, usize)>>,
}

fn parity_key(e: &ExponentVector) -> Vec<u8> {
    e.parity()
}

impl GramProblem {
    fn assemble(
        a: &RationalTensor,
        r: usize,
        blocks: Vec<Vec<usize>>,
        basis: Vec<ExponentVector>,
    ) -> GramProblem {
        let expansion = expand_pr_convolution(a, r);
        let targets: BTreeMap<ExponentVector, BigRational> = expansion
            .coeffs
            .into_iter()
            .map(|(theta, v)| (theta.doubled(), v))
            .collect();
        let mut index: HashMap<ExponentVector, usize> = HashMap::new();
        let mut constraints: Vec<Constraint> = Vec::new();
        let mut pairs = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let mut bp = Vec::new();
            for (li, &i) in block.iter().enumerate() {
                for (lj, &j) in block.iter().enumerate().skip(li) {
                    let e = basis[i].add(&basis[j]);
                    let c = *index.entry(e.clone()).or_insert_with(|| {
                        let target = targets.get(&e).map(|v| v.to_f64()).unwrap_or(0.0);
                        constraints.push(Constraint { target, count: 0 });
                        constraints.len() - 1
                    });
                    constraints[c].count += if li == lj { 1 } else { 2 };
                    bp.push((li, lj, c));
                }
            }
            pairs.push(bp);
        }
        GramProblem {
            n: a.n(),
            d: a.d(),
            r,
            basis,
            blocks,
            targets,
            constraints,
            pairs,
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn block_monomials(&self) -> Vec<Vec<ExponentVector>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| self.basis[i].clone()).collect())
            .collect()
    }

    fn target_scale(&self) -> f64 {
        self.constraints
            .iter()
            .fold(0.0f64, |m, c| m.max(c.target.abs()))
    }
}

/// Parity-block Gram problem.
pub fn build_gram_problem(a: &RationalTensor, r: usize) -> GramProblem {
    let basis = enumerate_exponents(a.n(), (a.d() + r) as u32);
    let mut groups: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for (i, m) in basis.iter().enumerate() {
        groups.entry(parity_key(m)).or_default().push(i);
    }
    GramProblem::assemble(a, r, groups.into_values().collect(), basis)
}

/// Single-block Gram problem over the full basis; cross-parity products must
/// vanish.
pub fn build_gram_problem_full(a: &RationalTensor, r: usize) -> GramProblem {
    let basis = enumerate_exponents(a.n(), (a.d() + r) as u32);
    let all = (0..basis.len()).collect();
    GramProblem::assemble(a, r, vec![all], basis)
}

/// Block Gram matrices with the monomials that index them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub r: usize,
    pub monomials: Vec<Vec<ExponentVector>>,
    pub matrices: Vec<SymMatrix>,
    pub residual: f64,
    pub min_eig: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub eig_tol: f64,
    pub match_tol: f64,
    pub max_iters: usize,
    /// Iterations between convergence checks.
    pub check_every: usize,
    /// Iterations between polishing attempts.
    pub polish_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eig_tol: 1e-8,
            match_tol: 1e-8,
            max_iters: 20_000,
            check_every: 10,
            polish_every: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub min_eig: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GramOutcome {
    Certified(GramCertificate),
    Unknown(SolveStats),
}

impl GramOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, GramOutcome::Certified(_))
    }
}

struct Solver<'a> {
    p: &'a GramProblem,
    scale: f64,
}

impl Solver<'_> {
    fn sums(&self, g: &[SymMatrix]) -> Vec<f64> {
        let mut cur = vec![0.0; self.p.constraints.len()];
        for (b, bp) in self.p.pairs.iter().enumerate() {
            for &(i, j, c) in bp {
                let v = g[b].get(i, j);
                cur[c] += if i == j { v } else { 2.0 * v };
            }
        }
        cur
    }

    fn target(&self, c: usize) -> f64 {
        self.p.constraints[c].target / self.scale
    }

    fn residual(&self, g: &[SymMatrix]) -> f64 {
        self.sums(g)
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (c, v)| m.max((v - self.target(c)).abs()))
    }

    fn project_affine(&self, g: &mut [SymMatrix]) {
        let cur = self.sums(g);
        let delta: Vec<f64> = cur
            .iter()
            .enumerate()
            .map(|(c, v)| (self.target(c) - v) / self.p.constraints[c].count as f64)
            .collect();
        for (b, bp) in self.p.pairs.iter().enumerate() {
            for &(i, j, c) in bp {
                g[b].add_sym(i, j, delta[c]);
            }
        }
    }

    fn project_psd(&self, g: &[SymMatrix]) -> (Vec<SymMatrix>, Vec<crate::linalg::Eigen>) {
        g.par_iter()
            .map(|m| {
                let e = jacobi_eigen(m);
                (e.reconstruct(|l| l.max(0.0)), e)
            })
            .unzip()
    }

    /// Restricts to the span of eigenvectors above `cut · λ_max`, then solves
    /// the coefficient equations on that face in the least-squares sense.
    fn polish(&self, g: &[SymMatrix], cut: f64) -> Option<Vec<SymMatrix>> {
        let eig: Vec<_> = g.iter().map(jacobi_eigen).collect();
        let top = eig.iter().fold(0.0f64, |m, e| m.max(e.max_value()));
        if top <= 0.0 {
            return None;
        }
        // Per block: kept eigenvector indices.
        let kept: Vec<Vec<usize>> = eig
            .iter()
            .map(|e| (0..e.n).filter(|&k| e.values[k] > cut * top).collect())
            .collect();
        let nc = self.p.constraints.len();
        // N_c restricted to each block's face, as dense k×k matrices.
        let mut faces: Vec<Vec<SymMatrix>> = Vec::with_capacity(g.len());
        for (b, bp) in self.p.pairs.iter().enumerate() {
            let k = kept[b].len();
            let mut nb = vec![SymMatrix::zeros(k); nc];
            if k > 0 {
                for &(i, j, c) in bp {
                    for (pa, &ka) in kept[b].iter().enumerate() {
                        let vi = eig[b].vector_component(i, ka);
                        let vj = eig[b].vector_component(j, ka);
                        for (pb, &kb) in kept[b].iter().enumerate() {
                            let mut v = vi * eig[b].vector_component(j, kb);
                            if i != j {
                                v += vj * eig[b].vector_component(i, kb);
                            }
                            nb[c].data[pa * k + pb] += v;
                        }
                    }
                }
            }
            faces.push(nb);
        }
        let s0: Vec<SymMatrix> = kept
            .iter()
            .zip(&eig)
            .map(|(ks, e)| SymMatrix::from_diag(&ks.iter().map(|&k| e.values[k]).collect::<Vec<_>>()))
            .collect();
        let mut h = SymMatrix::zeros(nc);
        let mut rhs = vec![0.0; nc];
        for c in 0..nc {
            let mut cur = 0.0;
            for b in 0..g.len() {
                cur += dot(&faces[b][c], &s0[b]);
            }
            rhs[c] = self.target(c) - cur;
            for c2 in c..nc {
                let mut v = 0.0;
                for face in &faces {
                    v += dot(&face[c], &face[c2]);
                }
                h.set(c, c2, v);
                h.set(c2, c, v);
            }
        }
        let lambda = pseudo_solve(&h, &rhs, 1e-12);
        let mut out = Vec::with_capacity(g.len());
        for b in 0..g.len() {
            let k = kept[b].len();
            let mut s = s0[b].clone();
            for (c, l) in lambda.iter().enumerate() {
                if *l != 0.0 {
                    for (x, y) in s.data.iter_mut().zip(&faces[b][c].data) {
                        *x += l * y;
                    }
                }
            }
            s.symmetrize();
            let nb = g[b].n;
            let mut full = SymMatrix::zeros(nb);
            for (pa, &ka) in kept[b].iter().enumerate() {
                for (pb, &kb) in kept[b].iter().enumerate() {
                    let w = s.data[pa * k + pb];
                    if w == 0.0 {
                        continue;
                    }
                    for i in 0..nb {
                        let vi = eig[b].vector_component(i, ka) * w;
                        for j in 0..nb {
                            full.data[i * nb + j] += vi * eig[b].vector_component(j, kb);
                        }
                    }
                }
            }
            full.symmetrize();
            out.push(full);
        }
        Some(out)
    }

    fn certificate(&self, g: &[SymMatrix], iterations: usize) -> GramCertificate {
        GramCertificate {
            r: self.p.r,
            monomials: self.p.block_monomials(),
            matrices: g.iter().map(|m| m.scaled(self.scale)).collect(),
            residual: f64::NAN,
            min_eig: f64::NAN,
            iterations,
        }
    }

    fn accept(&self, g: &[SymMatrix], iterations: usize, opts: &SolverOptions) -> Option<GramCertificate> {
        let mut cert = self.certificate(g, iterations);
        let check = check_against_targets(&self.p.targets, &cert);
        cert.residual = check.residual;
        cert.min_eig = check.min_eig;
        (check.residual <= opts.match_tol && check.min_eig >= -opts.eig_tol).then_some(cert)
    }
}

fn dot(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

/// Dykstra alternating projections with periodic face polishing.
pub fn solve_gram(p: &GramProblem, opts: &SolverOptions) -> GramOutcome {
    let scale = p.target_scale();
    let zeros: Vec<SymMatrix> = p.blocks.iter().map(|b| SymMatrix::zeros(b.len())).collect();
    if scale == 0.0 {
        let s = Solver { p, scale: 1.0 };
        return match s.accept(&zeros, 0, opts) {
            Some(c) => GramOutcome::Certified(c),
            None => GramOutcome::Unknown(SolveStats { iterations: 0, residual: f64::NAN, min_eig: f64::NAN }),
        };
    }
    let s = Solver { p, scale };
    let mut x = zeros.clone();
    let mut q = zeros;
    let mut best = SolveStats { iterations: 0, residual: f64::INFINITY, min_eig: f64::NEG_INFINITY };
    for it in 1..=opts.max_iters.max(1) {
        let mut y = x.clone();
        s.project_affine(&mut y);
        let z: Vec<SymMatrix> = y.iter().zip(&q).map(|(a, b)| a.add(b)).collect();
        let (next, eig) = s.project_psd(&z);
        q = z.iter().zip(&next).map(|(a, b)| a.sub(b)).collect();
        x = next;

        let last = it == opts.max_iters.max(1);
        if it % opts.check_every.max(1) == 0 || last {
            let res = s.residual(&x);
            let min_y = eig.iter().fold(f64::INFINITY, |m, e| m.min(e.min_value()));
            if res < best.residual {
                best = SolveStats { iterations: it, residual: res * scale, min_eig: min_y * scale };
            }
            if res * scale <= 0.5 * opts.match_tol {
                if let Some(c) = s.accept(&x, it, opts) {
                    return GramOutcome::Certified(c);
                }
            }
            if min_y * scale >= -0.5 * opts.eig_tol {
                if let Some(c) = s.accept(&y, it, opts) {
                    return GramOutcome::Certified(c);
                }
            }
        }
        if it % opts.polish_every.max(1) == 0 || last {
            for cut in [1e-2, 1e-4, 1e-6, 1e-9] {
                if let Some(g) = s.polish(&x, cut) {
                    if let Some(c) = s.accept(&g, it, opts) {
                        return GramOutcome::Certified(c);
                    }
                }
            }
        }
    }
    GramOutcome::Unknown(best)
}

/// Result of the independent certificate check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateCheck {
    pub residual: f64,
    pub min_eig: f64,
    pub ok: bool,
}

fn check_against_targets(
    targets: &BTreeMap<ExponentVector, BigRational>,
    cert: &GramCertificate,
) -> CertificateCheck {
    let mut acc: BTreeMap<ExponentVector, f64> = BTreeMap::new();
    let mut shape_ok = cert.monomials.len() == cert.matrices.len();
    let mut min_eig = f64::INFINITY;
    for (mons, g) in cert.monomials.iter().zip(&cert.matrices) {
        if g.n != mons.len() || g.data.len() != g.n * g.n {
            shape_ok = false;
            continue;
        }
        for i in 0..g.n {
            for j in 0..g.n {
                if g.get(i, j) != g.get(j, i) {
                    shape_ok = false;
                }
                *acc.entry(mons[i].add(&mons[j])).or_insert(0.0) += g.get(i, j);
            }
        }
        let scale = g.max_abs().max(1.0);
        min_eig = min_eig.min(min_eigenvalue(g, 1e-13 * scale));
    }
    let mut residual = 0.0f64;
    for (e, v) in &acc {
        let t = targets.get(e).map(|x| x.to_f64()).unwrap_or(0.0);
        residual = residual.max((v - t).abs());
    }
    for (e, t) in targets {
        if !acc.contains_key(e) {
            residual = residual.max(t.to_f64().abs());
        }
    }
    if !residual.is_finite() || !min_eig.is_finite() && !cert.matrices.iter().all(|m| m.n == 0) {
        shape_ok = false;
    }
    CertificateCheck { residual, min_eig, ok: shape_ok }
}

/// Recomputes `P_r` from the tensor by direct summation and checks the
/// certificate reproduces it with a PSD Gram matrix.
pub fn verify_certificate(
    a: &RationalTensor,
    cert: &GramCertificate,
    eig_tol: f64,
    match_tol: f64,
) -> CertificateCheck {
    let targets: BTreeMap<ExponentVector, BigRational> = expand_pr(a, cert.r)
        .coeffs
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(t, v)| (t.doubled(), v))
        .collect();
    let degree_ok = cert
        .monomials
        .iter()
        .flatten()
        .all(|m| m.len() == a.n() && m.degree() as usize == a.d() + cert.r);
    let mut c = check_against_targets(&targets, cert);
    c.ok = c.ok && degree_ok && c.residual <= match_tol && c.min_eig >= -eig_tol;
    c
}

/// Diagonal certificate from nonnegative coefficients: `G_{θθ} = A_θ`.
pub fn diagonal_certificate(a: &RationalTensor, r: usize) -> Option<GramCertificate> {
    let CoefMembership::Member(e) = member_c_r_exact(a, r) else {
        return None;
    };
    let mut groups: BTreeMap<Vec<u8>, Vec<(ExponentVector, f64)>> = BTreeMap::new();
    for (theta, v) in e.coeffs {
        debug_assert!(!v.is_negative());
        groups
            .entry(parity_key(&theta))
            .or_default()
            .push((theta, v.to_f64()));
    }
    let (monomials, matrices) = groups
        .into_values()
        .map(|g| {
            let (m, v): (Vec<_>, Vec<_>) = g.into_iter().unzip();
            (m, SymMatrix::from_diag(&v))
        })
        .unzip();
    Some(GramCertificate {
        r,
        monomials,
        matrices,
        residual: 0.0,
        min_eig: 0.0,
        iterations: 0,
    })
}

type IndexedMonomials = (Vec<ExponentVector>, HashMap<ExponentVector, usize>);

/// Certificate for `(Σ y_k²) · P_r` from one for `P_r`:
/// `G' = Σ_k S_kᵀ G S_k` where `S_k` multiplies each monomial by `y_k`.
pub fn lift_certificate(cert: &GramCertificate, n: usize) -> GramCertificate {
    let mut blocks: BTreeMap<Vec<u8>, IndexedMonomials> = BTreeMap::new();
    for mons in &cert.monomials {
        for m in mons {
            for k in 0..n {
                let lifted = m.bumped(k);
                let (list, idx) = blocks.entry(parity_key(&lifted)).or_default();
                if !idx.contains_key(&lifted) {
                    idx.insert(lifted.clone(), list.len());
                    list.push(lifted);
                }
            }
        }
    }
    let keys: Vec<Vec<u8>> = blocks.keys().cloned().collect();
    let mut matrices: Vec<SymMatrix> = keys
        .iter()
        .map(|k| SymMatrix::zeros(blocks[k].0.len()))
        .collect();
    let pos: HashMap<Vec<u8>, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    for (mons, g) in cert.monomials.iter().zip(&cert.matrices) {
        for k in 0..n {
            for i in 0..mons.len() {
                let li = mons[i].bumped(k);
                let b = pos[&parity_key(&li)];
                let ii = blocks[&keys[b]].1[&li];
                for j in 0..mons.len() {
                    let v = g.get(i, j);
                    if v == 0.0 {
                        continue;
                    }
                    let jj = blocks[&keys[b]].1[&mons[j].bumped(k)];
                    let width = matrices[b].n;
                    matrices[b].data[ii * width + jj] += v;
                }
            }
        }
    }
    GramCertificate {
        r: cert.r + 1,
        monomials: keys.into_iter().map(|k| blocks.remove(&k).unwrap().0).collect(),
        matrices,
        residual: f64::NAN,
        min_eig: f64::NAN,
        iterations: cert.iterations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertifiedBy {
    /// Nonnegative coefficients, diagonal Gram matrix.
    Coefficients,
    Solver,
    /// A certificate from level `from`, multiplied up by `(Σ y_k²)^{r − from}`.
    Lifted { from: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SosMembership {
    Certified { certificate: GramCertificate, via: CertifiedBy },
    Unknown(SolveStats),
}

impl SosMembership {
    pub fn is_certified(&self) -> bool {
        matches!(self, SosMembership::Certified { .. })
    }
}

/// Lifts `cert` one level and keeps it only if the checker accepts it.
pub fn lift_verified(a: &RationalTensor, cert: &GramCertificate, opts: &SolverOptions) -> Option<GramCertificate> {
    let mut lifted = lift_certificate(cert, a.n());
    let c = verify_certificate(a, &lifted, opts.eig_tol, opts.match_tol);
    lifted.residual = c.residual;
    lifted.min_eig = c.min_eig;
    c.ok.then_some(lifted)
}

/// Tries the coefficient fast path, then the solver, then lifting a
/// certificate from level `r − 1`. Never claims non-membership.
pub fn member_k_r(a: &RationalTensor, r: usize, opts: &SolverOptions) -> SosMembership {
    if let Some(c) = diagonal_certificate(a, r) {
        if verify_certificate(a, &c, opts.eig_tol, opts.match_tol).ok {
            return SosMembership::Certified { certificate: c, via: CertifiedBy::Coefficients };
        }
    }
    let p = build_gram_problem(a, r);
    let stats = match solve_gram(&p, opts) {
        GramOutcome::Certified(c) if verify_certificate(a, &c, opts.eig_tol, opts.match_tol).ok => {
            return SosMembership::Certified { certificate: c, via: CertifiedBy::Solver };
        }
        GramOutcome::Certified(c) => SolveStats {
            iterations: c.iterations,
            residual: c.residual,
            min_eig: c.min_eig,
        },
        GramOutcome::Unknown(s) => s,
    };
    if r > 0 {
        if let SosMembership::Certified { certificate, via } = member_k_r(a, r - 1, opts) {
            if let Some(lifted) = lift_verified(a, &certificate, opts) {
                let from = match via {
                    CertifiedBy::Lifted { from } => from,
                    _ => r - 1,
                };
                return SosMembership::Certified { certificate: lifted, via: CertifiedBy::Lifted { from } };
            }
        }
    }
    SosMembership::Unknown(stats)
}

//! Simplicial partitions of the standard simplex, the cones they define, and
//! the branch-and-bound copositivity certifier.
//!
//! All geometry is exact. Sign tests clear denominators first: the tensor is
//! scaled by the common denominator of its entries and each vertex by its own
//! common denominator, which leaves every sign unchanged.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{integer_point, RationalTensor, SymTensor};

pub type Point = Vec<BigRational>;

fn sq_dist(u: &[BigRational], v: &[BigRational]) -> BigRational {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let d = a - b;
            &d * &d
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
}

fn rational_sqrt_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::INFINITY).sqrt()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    vertices: Vec<Point>,
    depth: u32,
}

impl Simplex {
    /// Checks that there are `n` vertices in `Δ`.
    pub fn new(vertices: Vec<Point>, depth: u32) -> Result<Self> {
        let n = vertices.len();
        for v in &vertices {
            if v.len() != n {
                return Err(Error::DimensionMismatch { got: v.len(), expected: n });
            }
            if v.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidArgument("vertex has a negative coordinate".into()));
            }
            if v.iter().fold(BigRational::zero(), |a, x| a + x) != BigRational::one() {
                return Err(Error::InvalidArgument("vertex coordinates do not sum to 1".into()));
            }
        }
        Ok(Simplex { vertices, depth })
    }

    /// `conv{e_1, …, e_n}`.
    pub fn standard(n: usize) -> Self {
        let vertices = (0..n)
            .map(|i| {
                let mut v = vec![BigRational::zero(); n];
                v[i] = BigRational::one();
                v
            })
            .collect();
        Simplex { vertices, depth: 0 }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    /// First longest edge `(i, j)`, `i < j`, in lexicographic pair order, with
    /// its squared length.
    pub fn longest_edge(&self) -> Option<(usize, usize, BigRational)> {
        let mut best: Option<(usize, usize, BigRational)> = None;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let l = sq_dist(&self.vertices[i], &self.vertices[j]);
                if best.as_ref().is_none_or(|(_, _, b)| l > *b) {
                    best = Some((i, j, l));
                }
            }
        }
        best
    }

    pub fn diameter_sq(&self) -> BigRational {
        self.longest_edge()
            .map(|(_, _, l)| l)
            .unwrap_or_else(BigRational::zero)
    }

    /// Splits at the midpoint `u` of the longest edge `{v_i, v_j}`. The first
    /// child keeps `v_i` (and replaces `v_j` by `u`), the second keeps `v_j`.
    pub fn bisect(&self) -> Result<(Simplex, Simplex)> {
        let (i, j, l) = self
            .longest_edge()
            .ok_or_else(|| Error::DegenerateSimplex("a single vertex cannot be bisected".into()))?;
        if l.is_zero() {
            return Err(Error::DegenerateSimplex("repeated vertex".into()));
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mid: Point = self.vertices[i]
            .iter()
            .zip(&self.vertices[j])
            .map(|(a, b)| (a + b) * &half)
            .collect();
        let mut keep_i = self.vertices.clone();
        keep_i[j] = mid.clone();
        let mut keep_j = self.vertices.clone();
        keep_j[i] = mid;
        Ok((
            Simplex { vertices: keep_i, depth: self.depth + 1 },
            Simplex { vertices: keep_j, depth: self.depth + 1 },
        ))
    }

    fn integer_vertices(&self) -> Vec<Vec<BigInt>> {
        self.vertices.iter().map(|v| integer_point(v)).collect()
    }
}

/// A tensor with denominators cleared, for sign tests.
#[derive(Clone, Debug)]
pub struct SignTensor {
    scaled: SymTensor<BigInt>,
}

impl SignTensor {
    pub fn new(a: &RationalTensor) -> Self {
        SignTensor { scaled: a.integer_scaled().0 }
    }

    /// Polar values `⟨A, v_{j1} ⊗ ⋯ ⊗ v_{jd}⟩` up to positive factors.
    fn polar(&self, points: &[Vec<BigInt>]) -> SymTensor<BigInt> {
        self.scaled
            .polar_tensor(points)
            .expect("points have the tensor's dimension")
    }
}

/// Outcome of examining one simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
enum NodeResult {
    NegativeVertex(usize),
    Pruned,
    Split,
}

fn examine(st: &SignTensor, s: &Simplex) -> NodeResult {
    let b = st.polar(&s.integer_vertices());
    let d = b.d();
    for j in 0..s.n() {
        if b.get_canonical(&vec![j; d]).is_negative() {
            return NodeResult::NegativeVertex(j);
        }
    }
    if nonneg_everywhere(&b) {
        NodeResult::Pruned
    } else {
        NodeResult::Split
    }
}

/// `⟨A, v_{i1} ⊗ ⋯ ⊗ v_{id}⟩ ≥ 0` for every multiset of vertices of `s`.
/// Sufficient for `f_A ≥ 0` on `s`.
pub fn inner_test_full(a: &RationalTensor, s: &Simplex) -> bool {
    let st = SignTensor::new(a);
    nonneg_everywhere(&st.polar(&s.integer_vertices()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    simplices: Vec<Simplex>,
}

impl Partition {
    pub fn trivial(n: usize) -> Self {
        Partition { simplices: vec![Simplex::standard(n)] }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Deduplicated vertex set.
    pub fn vertex_set(&self) -> BTreeSet<Point> {
        self.simplices
            .iter()
            .flat_map(|s| s.vertices.iter().cloned())
            .collect()
    }

    /// Deduplicated unordered vertex pairs that share a simplex, each stored
    /// with the smaller point first.
    pub fn edge_set(&self) -> BTreeSet<(Point, Point)> {
        let mut out = BTreeSet::new();
        for s in &self.simplices {
            for i in 0..s.n() {
                for j in i + 1..s.n() {
                    let (u, v) = (&s.vertices[i], &s.vertices[j]);
                    if u < v {
                        out.insert((u.clone(), v.clone()));
                    } else {
                        out.insert((v.clone(), u.clone()));
                    }
                }
            }
        }
        out
    }

    /// Squared length of the longest edge.
    pub fn diameter_sq(&self) -> BigRational {
        self.simplices
            .iter()
            .map(Simplex::diameter_sq)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }

    /// Longest edge length (for reporting).
    pub fn diameter(&self) -> f64 {
        rational_sqrt_f64(&self.diameter_sq())
    }

    /// Bisects the simplices selected by `pick(index, simplex)`.
    pub fn refine_where(&self, mut pick: impl FnMut(usize, &Simplex) -> bool) -> Result<Partition> {
        let mut out = Vec::with_capacity(self.simplices.len() * 2);
        for (k, s) in self.simplices.iter().enumerate() {
            if pick(k, s) {
                let (a, b) = s.bisect()?;
                out.push(a);
                out.push(b);
            } else {
                out.push(s.clone());
            }
        }
        Ok(Partition { simplices: out })
    }

    /// Bisects every simplex once.
    pub fn refine_all(&self) -> Result<Partition> {
        self.refine_where(|_, _| true)
    }

    /// Uniform refinement of `Δ` until the longest edge is at most `√2 · 2^{−r}`.
    pub fn level(n: usize, r: u32) -> Partition {
        Self::level_capped(n, r, u128::MAX).expect("uncapped")
    }

    /// [`Partition::level`], failing once a refinement round would exceed
    /// `max_simplices`.
    pub fn level_capped(n: usize, r: u32, max_simplices: u128) -> Result<Partition> {
        let mut p = Partition::trivial(n);
        if n < 2 {
            return Ok(p);
        }
        let bound = BigRational::new(BigInt::from(2), BigInt::from(4).pow(r));
        while p.diameter_sq() > bound {
            let needed = 2 * p.len() as u128;
            if needed > max_simplices {
                return Err(Error::SizeCap {
                    what: "partition simplices",
                    needed,
                    limit: max_simplices,
                });
            }
            p = p.refine_all()?;
        }
        Ok(p)
    }
}

fn nonneg_everywhere(b: &SymTensor<BigInt>) -> bool {
    let ok = b.iter_canonical().all(|(_, v)| !v.is_negative());
    ok
}

/// Inner cone of a partition, edge form: `f_A(v) ≥ 0` at every vertex and
/// `⟨A, u^{⊗a} ⊗ v^{⊗(d−a)}⟩ ≥ 0` for every edge `{u, v}` and split
/// `1 ≤ a ≤ d − 1`.
pub fn member_i_p(a: &RationalTensor, p: &Partition) -> bool {
    let st = SignTensor::new(a);
    for v in p.vertex_set() {
        if st.polar(&[integer_point(&v)]).get_canonical(&vec![0; a.d()]).is_negative() {
            return false;
        }
    }
    p.edge_set()
        .into_par_iter()
        .all(|(u, v)| nonneg_everywhere(&st.polar(&[integer_point(&u), integer_point(&v)])))
}

/// Inner cone of a partition, full form: [`inner_test_full`] on every simplex.
pub fn member_i_p_full(a: &RationalTensor, p: &Partition) -> bool {
    let st = SignTensor::new(a);
    p.simplices
        .par_iter()
        .all(|s| nonneg_everywhere(&st.polar(&s.integer_vertices())))
}

/// Outer cone of a partition: `f_A(v) ≥ 0` at every vertex.
pub fn member_o_p(a: &RationalTensor, p: &Partition) -> bool {
    p.vertex_set()
        .iter()
        .all(|v| !a.eval(v).expect("vertex dimension matches").is_negative())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Copositive,
    NotCopositive,
    StrictlyIndeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub point: Point,
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionStats {
    /// Deepest simplex examined.
    pub depth: u32,
    pub simplices_examined: usize,
    pub simplices_pruned: usize,
    /// Simplices left unresolved (depth limit or budget).
    pub unresolved: usize,
    /// Longest edge over the leaves of the final partition.
    pub diameter: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: PartitionStats,
    pub method: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discipline {
    /// Breadth first; level batches may run in parallel.
    Fifo,
    /// Depth first, single threaded.
    Lifo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    pub max_depth: u32,
    pub simplex_budget: usize,
    pub discipline: Discipline,
    /// Evaluate FIFO level batches with rayon.
    pub parallel: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_depth: 32,
            simplex_budget: 1_000_000,
            discipline: Discipline::Fifo,
            parallel: true,
        }
    }
}

struct Search {
    stats: PartitionStats,
    leaf_diam_sq: BigRational,
}

impl Search {
    fn new() -> Self {
        Search {
            stats: PartitionStats {
                depth: 0,
                simplices_examined: 0,
                simplices_pruned: 0,
                unresolved: 0,
                diameter: 0.0,
            },
            leaf_diam_sq: BigRational::zero(),
        }
    }

    fn leaf(&mut self, s: &Simplex) {
        let d = s.diameter_sq();
        if d > self.leaf_diam_sq {
            self.leaf_diam_sq = d;
        }
    }

    /// Applies one examined node; returns children to enqueue or a witness.
    fn apply(
        &mut self,
        a: &RationalTensor,
        s: Simplex,
        res: NodeResult,
        opts: &CertifyOptions,
    ) -> std::result::Result<Option<(Simplex, Simplex)>, Witness> {
        self.stats.simplices_examined += 1;
        self.stats.depth = self.stats.depth.max(s.depth);
        match res {
            NodeResult::NegativeVertex(j) => {
                let point = s.vertices[j].clone();
                let value = a.eval(&point).expect("vertex dimension matches");
                debug_assert!(value.is_negative());
                Err(Witness { point, value })
            }
            NodeResult::Pruned => {
                self.stats.simplices_pruned += 1;
                self.leaf(&s);
                Ok(None)
            }
            NodeResult::Split if s.depth >= opts.max_depth || s.n() < 2 => {
                self.stats.unresolved += 1;
                self.leaf(&s);
                Ok(None)
            }
            NodeResult::Split => match s.bisect() {
                Ok(children) => Ok(Some(children)),
                Err(_) => {
                    self.stats.unresolved += 1;
                    self.leaf(&s);
                    Ok(None)
                }
            },
        }
    }

    fn finish(mut self, witness: Option<Witness>, open: &[Simplex]) -> Certificate {
        for s in open {
            self.leaf(s);
        }
        self.stats.unresolved += open.len();
        self.stats.diameter = rational_sqrt_f64(&self.leaf_diam_sq);
        let verdict = match (&witness, self.stats.unresolved) {
            (Some(_), _) => Verdict::NotCopositive,
            (None, 0) => Verdict::Copositive,
            (None, _) => Verdict::StrictlyIndeterminate,
        };
        Certificate { verdict, witness, stats: self.stats, method: "partition" }
    }
}

/// Branch and bound over longest-edge bisections of `Δ`.
///
/// Each simplex is examined once: a vertex with `f_A < 0` refutes
/// copositivity; a simplex passing [`inner_test_full`] is discarded; anything
/// else is bisected, unless it is already at `max_depth`, in which case it
/// stays unresolved. The first refutation in processing order wins.
pub fn certify_copositivity(a: &RationalTensor, opts: &CertifyOptions) -> Certificate {
    let st = SignTensor::new(a);
    match opts.discipline {
        Discipline::Fifo => certify_fifo(a, &st, opts),
        Discipline::Lifo => certify_lifo(a, &st, opts),
    }
}

fn certify_fifo(a: &RationalTensor, st: &SignTensor, opts: &CertifyOptions) -> Certificate {
    let mut search = Search::new();
    let mut frontier = vec![Simplex::standard(a.n())];
    while !frontier.is_empty() {
        let room = opts.simplex_budget.saturating_sub(search.stats.simplices_examined);
        if room == 0 {
            return search.finish(None, &frontier);
        }
        let rest = if frontier.len() > room { frontier.split_off(room) } else { Vec::new() };
        let results: Vec<NodeResult> = if opts.parallel {
            frontier.par_iter().map(|s| examine(st, s)).collect()
        } else {
            frontier.iter().map(|s| examine(st, s)).collect()
        };
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (s, res) in frontier.into_iter().zip(results) {
            match search.apply(a, s, res, opts) {
                Err(w) => return search.finish(Some(w), &[]),
                Ok(Some((c1, c2))) => {
                    next.push(c1);
                    next.push(c2);
                }
                Ok(None) => {}
            }
        }
        if !rest.is_empty() {
            // Budget ran out inside this level.
            let mut open = rest;
            open.extend(next);
            return search.finish(None, &open);
        }
        frontier = next;
    }
    search.finish(None, &[])
}

fn certify_lifo(a: &RationalTensor, st: &SignTensor, opts: &CertifyOptions) -> Certificate {
    let mut search = Search::new();
    let mut stack = VecDeque::from([Simplex::standard(a.n())]);
    while let Some(s) = stack.pop_back() {
        if search.stats.simplices_examined >= opts.simplex_budget {
            stack.push_back(s);
            let open: Vec<Simplex> = stack.into_iter().collect();
            return search.finish(None, &open);
        }
        let res = examine(st, &s);
        match search.apply(a, s, res, opts) {
            Err(w) => return search.finish(Some(w), &[]),
            Ok(Some((c1, c2))) => {
                stack.push_back(c2);
                stack.push_back(c1);
            }
            Ok(None) => {}
        }
    }
    search.finish(None, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{nonnegative_quartic, matrix, rational_matrix};
    use crate::scalar::ratio;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn standard_simplex_geometry() {
        let s = Simplex::standard(2);
        assert_eq!(s.vertices(), &[vec![q(1), q(0)], vec![q(0), q(1)]]);
        let s3 = Simplex::standard(3);
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(sq_dist(&s3.vertices()[i], &s3.vertices()[j]), q(2));
            }
        }
        assert!((Partition::trivial(3).diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_two_simplex() {
        let (a, b) = Simplex::standard(2).bisect().unwrap();
        let h = ratio(1, 2);
        assert_eq!(a.vertices(), &[vec![q(1), q(0)], vec![h.clone(), h.clone()]]);
        assert_eq!(b.vertices(), &[vec![h.clone(), h.clone()], vec![q(0), q(1)]]);
        let p = Partition::trivial(2).refine_all().unwrap();
        assert!((p.diameter() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(Simplex::standard(1).bisect().is_err());
    }

    #[test]
    fn dyadic_denominators() {
        let mut p = Partition::trivial(2);
        for k in 1..=6u32 {
            p = p.refine_all().unwrap();
            let den = BigInt::from(2).pow(k);
            for v in p.vertex_set() {
                for x in v {
                    assert!((&den % x.denom()).is_zero());
                }
            }
        }
    }

    #[test]
    fn diameter_non_increasing() {
        let mut p = Partition::trivial(3);
        let mut last = p.diameter_sq();
        for k in 0..8 {
            p = p.refine_where(|i, _| (i + k) % 3 != 0).unwrap();
            let d = p.diameter_sq();
            assert!(d <= last);
            last = d;
            for s in p.simplices() {
                assert!(Simplex::new(s.vertices().to_vec(), 0).is_ok());
            }
        }
    }

    #[test]
    fn vertex_and_edge_sets() {
        let p = Partition::trivial(3).refine_all().unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.vertex_set().len(), 4);
        assert_eq!(p.edge_set().len(), 5);
    }

    #[test]
    fn level_partitions() {
        assert_eq!(Partition::level(2, 0).len(), 1);
        assert_eq!(Partition::level(2, 2).len(), 4);
        let p = Partition::level(3, 1);
        assert!(p.diameter_sq() <= ratio(1, 2));
    }

    #[test]
    fn inner_test_examples() {
        assert!(inner_test_full(&nonnegative_quartic(), &Simplex::standard(3)));
        assert!(!inner_test_full(&matrix(&[[1, -2], [-2, 1]]), &Simplex::standard(2)));
    }

    #[test]
    fn inner_and_outer_cone_examples() {
        assert!(member_i_p(&nonnegative_quartic(), &Partition::trivial(3)));
        let a = matrix(&[[0, -1], [-1, 0]]);
        assert!(member_o_p(&a, &Partition::trivial(2)));
        assert!(!member_o_p(&a, &Partition::trivial(2).refine_all().unwrap()));
        assert!(!member_o_p(&matrix(&[[-1, 0], [0, 1]]), &Partition::trivial(2)));
    }

    #[test]
    fn certify_examples() {
        let opts = CertifyOptions::default();
        let c = certify_copositivity(&rational_matrix(&[[(1, 1), (-1, 2)], [(-1, 2), (1, 1)]]), &opts);
        assert_eq!(c.verdict, Verdict::Copositive);
        assert!(c.stats.depth <= 4);

        let c = certify_copositivity(&matrix(&[[0, -1], [-1, 0]]), &opts);
        assert_eq!(c.verdict, Verdict::NotCopositive);
        let w = c.witness.unwrap();
        assert_eq!(w.point, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(w.value, ratio(-1, 2));

        let c = certify_copositivity(&nonnegative_quartic(), &opts);
        assert_eq!(c.verdict, Verdict::Copositive);
        assert_eq!(c.stats.depth, 0);
        assert_eq!(c.stats.simplices_examined, 1);
    }

    #[test]
    fn boundary_matrix_is_indeterminate() {
        // (x₁ − 2x₂)² vanishes at (2/3, 1/3), which no bisection vertex reaches.
        let opts = CertifyOptions { max_depth: 8, ..Default::default() };
        let c = certify_copositivity(&matrix(&[[1, -2], [-2, 4]]), &opts);
        assert_eq!(c.verdict, Verdict::StrictlyIndeterminate);
        assert!(c.stats.unresolved > 0);
    }

    #[test]
    fn budget_exhaustion() {
        let opts = CertifyOptions { simplex_budget: 3, ..Default::default() };
        let c = certify_copositivity(&matrix(&[[1, -2], [-2, 4]]), &opts);
        assert_eq!(c.verdict, Verdict::StrictlyIndeterminate);
        assert_eq!(c.stats.simplices_examined, 3);
    }

    #[test]
    fn disciplines_agree() {
        for a in [
            rational_matrix(&[[(1, 1), (-9, 10)], [(-9, 10), (1, 1)]]),
            matrix(&[[1, -3], [-3, 1]]),
            nonnegative_quartic(),
        ] {
            let fifo = certify_copositivity(&a, &CertifyOptions::default());
            let lifo = certify_copositivity(
                &a,
                &CertifyOptions { discipline: Discipline::Lifo, ..Default::default() },
            );
            let seq = certify_copositivity(&a, &CertifyOptions { parallel: false, ..Default::default() });
            assert_eq!(fifo.verdict, lifo.verdict);
            assert_eq!(fifo, seq);
        }
    }
}

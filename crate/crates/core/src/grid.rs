//! The outer hierarchy given by nonnegativity on rational grids of `Δ`.
//!
//! Level `r` uses the points `x ∈ Δ` with `(r + 2)·x` integral, i.e. the
//! compositions of `m = r + 2` into `n` parts scaled by `1/m`; there are
//! `binomial(n + r + 1, r + 2)` of them. Membership at level `r` tests the
//! union of levels `0..=r`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;

use crate::combinatorics::{binomial_u128, enumerate_exponents};
use crate::error::Result;
use crate::limits;
use crate::partition::{Point, Witness};
use crate::tensor::RationalTensor;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalGrid {
    pub n: usize,
    pub r: u32,
    /// Union of levels `0..=r` rather than level `r` alone.
    pub cumulative: bool,
    pub points: Vec<Point>,
}

impl RationalGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of points at a single level.
pub fn level_size(n: usize, r: u32) -> u128 {
    binomial_u128((n as u64) + r as u64 + 1, r as u64 + 2)
}

fn level_points(n: usize, r: u32) -> Vec<Point> {
    let m = BigInt::from(r + 2);
    enumerate_exponents(n, r + 2)
        .into_iter()
        .map(|c| {
            c.as_slice()
                .iter()
                .map(|&k| BigRational::new(BigInt::from(k), m.clone()))
                .collect()
        })
        .collect()
}

pub fn grid_points(n: usize, r: u32) -> Result<RationalGrid> {
    limits::check("grid points", level_size(n, r))?;
    Ok(RationalGrid { n, r, cumulative: false, points: level_points(n, r) })
}

/// Union of levels `0..=r`, level by level, each point at its first level.
pub fn cumulative_grid(n: usize, r: u32) -> Result<RationalGrid> {
    let total: u128 = (0..=r).map(|k| level_size(n, k)).sum();
    limits::check("grid points", total)?;
    let mut seen = BTreeSet::new();
    let mut points = Vec::new();
    for k in 0..=r {
        for p in level_points(n, k) {
            if seen.insert(p.clone()) {
                points.push(p);
            }
        }
    }
    Ok(RationalGrid { n, r, cumulative: true, points })
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridMembership {
    Member { points_checked: usize },
    NotMember(Witness),
}

impl GridMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, GridMembership::Member { .. })
    }
}

/// First point of `grid` (in order) where `f_A < 0`.
pub fn first_negative(a: &RationalTensor, grid: &RationalGrid) -> Option<Witness> {
    let scaled = a.integer_scaled().0;
    let idx = grid.points.par_iter().position_first(|p| {
        let c = crate::tensor::integer_point(p);
        scaled.eval(&c).expect("grid dimension matches").is_negative()
    })?;
    let point = grid.points[idx].clone();
    let value = a.eval(&point).expect("grid dimension matches");
    Some(Witness { point, value })
}

pub fn member_o_r(a: &RationalTensor, r: u32) -> Result<GridMembership> {
    let grid = cumulative_grid(a.n(), r)?;
    Ok(match first_negative(a, &grid) {
        Some(w) => GridMembership::NotMember(w),
        None => GridMembership::Member { points_checked: grid.len() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{nonnegative_quartic, matrix};
    use crate::partition::Partition;
    use crate::scalar::ratio;

    #[test]
    fn grid_examples() {
        let g = grid_points(2, 0).unwrap();
        assert_eq!(
            g.points,
            vec![
                vec![ratio(0, 1), ratio(1, 1)],
                vec![ratio(1, 2), ratio(1, 2)],
                vec![ratio(1, 1), ratio(0, 1)],
            ]
        );
        for r in 0..5 {
            assert_eq!(grid_points(1, r).unwrap().points, vec![vec![ratio(1, 1)]]);
        }
        assert_eq!(grid_points(3, 1).unwrap().len(), 10);
    }

    #[test]
    fn grid_invariants() {
        for n in 1..=4 {
            for r in 0..=5 {
                let g = grid_points(n, r).unwrap();
                assert_eq!(g.len() as u128, level_size(n, r));
                let set: BTreeSet<_> = g.points.iter().collect();
                assert_eq!(set.len(), g.len());
                for p in &g.points {
                    assert_eq!(p.iter().sum::<BigRational>(), ratio(1, 1));
                    assert!(p.iter().all(|x| !x.is_negative()));
                    assert!(p.iter().all(|x| (BigInt::from(r + 2) % x.denom()) == BigInt::from(0)));
                }
                let c = cumulative_grid(n, r).unwrap();
                let cs: BTreeSet<_> = c.points.iter().collect();
                assert_eq!(cs.len(), c.len());
                assert!(set.is_subset(&cs));
            }
        }
    }

    #[test]
    fn membership_examples() {
        for r in 0..6 {
            assert!(member_o_r(&nonnegative_quartic(), r).unwrap().is_member());
        }
        match member_o_r(&matrix(&[[0, -1], [-1, 0]]), 0).unwrap() {
            GridMembership::NotMember(w) => {
                assert_eq!(w.point, vec![ratio(1, 2), ratio(1, 2)]);
                assert_eq!(w.value, ratio(-1, 2));
            }
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn nesting_on_a_thin_negative_region() {
        // Negative only near (1/3, 2/3)-ish points: (3x₁ − x₂)² − x₁x₂/100 style.
        let a = crate::examples::rational_matrix(&[[(9, 1), (-301, 100)], [(-301, 100), (1, 1)]]);
        let mut seen_neg = false;
        for r in 0..=12 {
            let m = member_o_r(&a, r).unwrap();
            if seen_neg {
                assert!(!m.is_member());
            }
            seen_neg |= !m.is_member();
        }
        assert!(seen_neg);
    }

    #[test]
    fn vertex_containment_reverses_cones() {
        // Partition vertices at level 2 for n = 2 are quarter points, all inside
        // the cumulative grid at r = 2, so grid membership there implies
        // partition-outer membership.
        let p = Partition::level(2, 2);
        let g = cumulative_grid(2, 2).unwrap();
        let gs: BTreeSet<_> = g.points.iter().cloned().collect();
        assert!(p.vertex_set().is_subset(&gs));
    }
}

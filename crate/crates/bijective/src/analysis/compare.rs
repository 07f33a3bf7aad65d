//! Comparison measures between two cost profiles: strict and asymptotic
//! bijective ratios (over the optimal sorted matching), stochastic dominance,
//! Max/Max and average ratios, and the counting certificate for lower bounds.
//!
//! Matching convention for zero costs: a matched pair (0, 0) contributes
//! ratio 1; a pair (a > 0, 0) makes the strict ratio infinite. The additive
//! curve c(rho) is well defined either way.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::profile::CostProfile;
use crate::error::{Error, Result};
use crate::rat::{opt_rat_serde, rat_int, rat_str, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    ADominates,
    BDominates,
    Equal,
    Incomparable,
}

/// A ratio that may be infinite (division of a positive cost by zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoBound {
    Finite(Rat),
    Infinite,
}

impl RhoBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, RhoBound::Finite(_))
    }

    pub fn finite(&self) -> Option<Rat> {
        match self {
            RhoBound::Finite(r) => Some(*r),
            RhoBound::Infinite => None,
        }
    }

    fn max_assign(&mut self, other: RhoBound) -> bool {
        let grew = other > *self;
        if grew {
            *self = other;
        }
        grew
    }
}

impl PartialOrd for RhoBound {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RhoBound {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (RhoBound::Infinite, RhoBound::Infinite) => std::cmp::Ordering::Equal,
            (RhoBound::Infinite, _) => std::cmp::Ordering::Greater,
            (_, RhoBound::Infinite) => std::cmp::Ordering::Less,
            (RhoBound::Finite(a), RhoBound::Finite(b)) => a.cmp(b),
        }
    }
}

impl Serialize for RhoBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RhoBound::Finite(r) => s.serialize_str(&rat_str(r)),
            RhoBound::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for RhoBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "infinite" {
            Ok(RhoBound::Infinite)
        } else {
            crate::rat::parse_rat(&s)
                .map(RhoBound::Finite)
                .map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(with = "crate::rat::rat_serde")]
    pub rho: Rat,
    /// c(rho) = max over ranks of (A_i - rho * B_i).
    #[serde(with = "crate::rat::rat_serde")]
    pub c: Rat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub metric: String,
    pub n: u32,
    /// Number of sequences each profile ranges over.
    pub sequences: u128,
    pub strict_rho: RhoBound,
    /// First rank attaining strict_rho.
    pub witness_rank: Option<u128>,
    pub asymptotic_curve: Vec<CurvePoint>,
    pub dominance: Dominance,
    #[serde(with = "opt_rat_serde")]
    pub maxmax: Option<Rat>,
    #[serde(with = "opt_rat_serde")]
    pub average: Option<Rat>,
    pub exact: bool,
}

fn check_compatible(a: &CostProfile, b: &CostProfile) -> Result<()> {
    if a.total() != b.total() {
        return Err(Error::LengthMismatch(a.total(), b.total()));
    }
    if a.total() == 0 {
        return Err(Error::InvalidParameter("empty profiles".into()));
    }
    Ok(())
}

/// Walk two equal-length sorted profiles rank-aligned, visiting maximal
/// stretches on which both values are constant.
fn aligned_runs<'a>(
    a: &'a CostProfile,
    b: &'a CostProfile,
) -> impl Iterator<Item = (Rat, Rat, u128, u128)> + 'a {
    struct Zip<'a> {
        a: Box<dyn Iterator<Item = (Rat, u128)> + 'a>,
        b: Box<dyn Iterator<Item = (Rat, u128)> + 'a>,
        cur_a: Option<(Rat, u128)>,
        cur_b: Option<(Rat, u128)>,
        rank: u128,
    }
    impl<'a> Iterator for Zip<'a> {
        /// (value_a, value_b, run length, starting rank)
        type Item = (Rat, Rat, u128, u128);
        fn next(&mut self) -> Option<Self::Item> {
            let (va, ca) = self.cur_a?;
            let (vb, cb) = self.cur_b?;
            let step = ca.min(cb);
            let start = self.rank;
            self.rank += step;
            self.cur_a = if ca == step {
                self.a.next()
            } else {
                Some((va, ca - step))
            };
            self.cur_b = if cb == step {
                self.b.next()
            } else {
                Some((vb, cb - step))
            };
            Some((va, vb, step, start))
        }
    }
    let mut ia = Box::new(a.runs()) as Box<dyn Iterator<Item = (Rat, u128)>>;
    let mut ib = Box::new(b.runs()) as Box<dyn Iterator<Item = (Rat, u128)>>;
    let cur_a = ia.next();
    let cur_b = ib.next();
    Zip {
        a: ia,
        b: ib,
        cur_a,
        cur_b,
        rank: 0,
    }
}

/// Ratio of a rank-matched pair under the zero convention.
fn pair_ratio(a: Rat, b: Rat) -> RhoBound {
    if b.is_zero() {
        if a.is_zero() {
            RhoBound::Finite(rat_int(1))
        } else {
            RhoBound::Infinite
        }
    } else {
        RhoBound::Finite(a / b)
    }
}

/// Full comparison of A against B over the rank-aligned sorted matching,
/// which minimizes both the max ratio and every c(rho) over all bijections.
pub fn bijective_ratio(a: &CostProfile, b: &CostProfile, rhos: &[Rat]) -> Result<ComparisonReport> {
    check_compatible(a, b)?;
    let mut strict = RhoBound::Finite(rat_int(0));
    let mut witness: Option<u128> = None;
    let mut a_le_b = true;
    let mut b_le_a = true;
    let mut curve: Vec<(Rat, Option<Rat>)> = rhos.iter().map(|&r| (r, None)).collect();
    for (va, vb, _, start) in aligned_runs(a, b) {
        if strict.max_assign(pair_ratio(va, vb)) {
            witness = Some(start);
        }
        a_le_b &= va <= vb;
        b_le_a &= vb <= va;
        for (rho, c) in curve.iter_mut() {
            let gap = va - *rho * vb;
            if c.is_none_or(|cur| gap > cur) {
                *c = Some(gap);
            }
        }
    }
    let dominance = match (a_le_b, b_le_a) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::ADominates,
        (false, true) => Dominance::BDominates,
        (false, false) => Dominance::Incomparable,
    };
    let (maxmax, average) = scalar_ratios(a, b)?;
    Ok(ComparisonReport {
        algorithm_a: a.algorithm.clone(),
        algorithm_b: b.algorithm.clone(),
        metric: a.metric.clone(),
        n: a.n,
        sequences: a.total(),
        strict_rho: strict,
        witness_rank: witness,
        asymptotic_curve: curve
            .into_iter()
            .map(|(rho, c)| CurvePoint {
                rho,
                c: c.expect("nonempty profiles"),
            })
            .collect(),
        dominance,
        maxmax,
        average,
        exact: a.exact && b.exact,
    })
}

/// c(rho) alone: the smallest additive slack making A <= rho * B + c hold
/// rank by rank under the sorted matching.
pub fn additive_slack(a: &CostProfile, b: &CostProfile, rho: Rat) -> Result<Rat> {
    check_compatible(a, b)?;
    let mut best: Option<Rat> = None;
    for (va, vb, _, _) in aligned_runs(a, b) {
        let gap = va - rho * vb;
        if best.is_none_or(|cur| gap > cur) {
            best = Some(gap);
        }
    }
    Ok(best.expect("nonempty profiles"))
}

/// Pointwise comparison of the sorted profiles; over the uniform distribution
/// on sequences this is exactly the stochastic order of the two costs.
pub fn stochastic_dominance(a: &CostProfile, b: &CostProfile) -> Result<Dominance> {
    check_compatible(a, b)?;
    let mut a_le_b = true;
    let mut b_le_a = true;
    for (va, vb, _, _) in aligned_runs(a, b) {
        a_le_b &= va <= vb;
        b_le_a &= vb <= va;
    }
    Ok(match (a_le_b, b_le_a) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::ADominates,
        (false, true) => Dominance::BDominates,
        (false, false) => Dominance::Incomparable,
    })
}

/// (max(A)/max(B), sum(A)/sum(B)); a zero denominator yields None for the
/// affected ratio.
pub fn scalar_ratios(a: &CostProfile, b: &CostProfile) -> Result<(Option<Rat>, Option<Rat>)> {
    check_compatible(a, b)?;
    let maxmax = if b.max().is_zero() {
        None
    } else {
        Some(a.max() / b.max())
    };
    let sum_b = b.sum();
    let average = if sum_b.is_zero() {
        None
    } else {
        Some(a.sum() / sum_b)
    };
    Ok((maxmax, average))
}

/// Counting certificate: fewer sequences of A-cost below rho*c than
/// sequences of B-cost at most c proves every bijection maps some cheap
/// B-sequence to an expensive A-sequence, so the ratio of A against B is at
/// least rho. Only meaningful for c > 0; requires exact profiles.
pub fn lower_bound_certificate(a: &CostProfile, b: &CostProfile, c: Rat, rho: Rat) -> Result<bool> {
    check_compatible(a, b)?;
    if !a.exact || !b.exact {
        return Err(Error::ApproximateProfile);
    }
    if c <= Rat::zero() {
        return Ok(false);
    }
    Ok(a.count_lt(rho * c) < b.count_le(c))
}

/// Largest rho certified by `lower_bound_certificate` at threshold c, if any.
pub fn certified_rho(a: &CostProfile, b: &CostProfile, c: Rat) -> Result<Option<Rat>> {
    check_compatible(a, b)?;
    if !a.exact || !b.exact {
        return Err(Error::ApproximateProfile);
    }
    if c <= Rat::zero() {
        return Ok(None);
    }
    let t = b.count_le(c);
    if t == 0 {
        return Ok(None);
    }
    // with rho = A_sorted[t-1] / c we get |{A < rho c}| <= t-1 < t
    let rho = a.value_at_rank(t - 1) / c;
    debug_assert!(lower_bound_certificate(a, b, c, rho)?);
    Ok(Some(rho))
}

/// Brute-force oracle over all |profile|! bijections; returns the minimum of
/// the max pair ratio and the minimum of max(A_i - rho * B_perm(i)). Only
/// for dense profiles of length <= 8.
pub fn best_matching_by_permutations(a: &[Rat], b: &[Rat], rho: Rat) -> Result<(RhoBound, Rat)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len() as u128, b.len() as u128));
    }
    if a.is_empty() || a.len() > 8 {
        return Err(Error::InvalidParameter(
            "permutation oracle wants 1..=8 values".into(),
        ));
    }
    let mut perm: Vec<usize> = (0..b.len()).collect();
    let mut best_ratio = RhoBound::Infinite;
    let mut best_gap: Option<Rat> = None;
    fn visit(
        perm: &mut Vec<usize>,
        i: usize,
        a: &[Rat],
        b: &[Rat],
        rho: Rat,
        best_ratio: &mut RhoBound,
        best_gap: &mut Option<Rat>,
    ) {
        if i == perm.len() {
            let mut worst = RhoBound::Finite(rat_int(0));
            let mut gap: Option<Rat> = None;
            for (j, &p) in perm.iter().enumerate() {
                worst.max_assign(pair_ratio(a[j], b[p]));
                let g = a[j] - rho * b[p];
                if gap.is_none_or(|cur| g > cur) {
                    gap = Some(g);
                }
            }
            if worst < *best_ratio {
                *best_ratio = worst;
            }
            let gap = gap.unwrap();
            if best_gap.is_none_or(|cur| gap < cur) {
                *best_gap = Some(gap);
            }
            return;
        }
        for j in i..perm.len() {
            perm.swap(i, j);
            visit(perm, i + 1, a, b, rho, best_ratio, best_gap);
            perm.swap(i, j);
        }
    }
    visit(&mut perm, 0, a, b, rho, &mut best_ratio, &mut best_gap);
    Ok((best_ratio, best_gap.unwrap()))
}

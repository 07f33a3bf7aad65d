//! Cost profiles: the multiset of an algorithm's total costs over every
//! request sequence of a given length, stored sorted ascending.
//!
//! Profiles are kept run-length encoded (distinct value, multiplicity), so
//! the anchored serve-and-return algorithms, whose per-request cost depends
//! only on the requested point, get exact profiles by convolution even when
//! m^n is far beyond anything enumerable.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kserver::{kcenter_step, AlgorithmSpec, Configuration, OnlineState, OptPrefixDp};
use crate::metric::{MetricSpace, PointId};
use crate::rat::{rat_int, Rat};

pub const DEFAULT_SEQUENCE_BUDGET: u128 = 10_000_000;

/// Yields every length-n sequence over the metric's requestable points, in
/// lexicographic order, after an upfront budget check.
#[derive(Debug)]
pub struct SequenceEnumerator {
    points: Vec<PointId>,
    digits: Option<Vec<usize>>,
}

impl SequenceEnumerator {
    pub fn total(m: &MetricSpace, n: u32) -> u128 {
        (m.requestable_count() as u128).pow(n)
    }
}

pub fn enumerate_sequences(m: &MetricSpace, n: u32, budget: u128) -> Result<SequenceEnumerator> {
    let total = SequenceEnumerator::total(m, n);
    if total > budget {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    Ok(SequenceEnumerator {
        points: m.requestable_points(),
        digits: Some(vec![0; n as usize]),
    })
}

impl Iterator for SequenceEnumerator {
    type Item = Vec<PointId>;

    fn next(&mut self) -> Option<Vec<PointId>> {
        let digits = self.digits.as_mut()?;
        let seq: Vec<PointId> = digits.iter().map(|&d| self.points[d]).collect();
        // increment least significant position last so the order is lexicographic
        let mut i = digits.len();
        loop {
            if i == 0 {
                self.digits = None;
                break;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < self.points.len() {
                break;
            }
            digits[i] = 0;
        }
        Some(seq)
    }
}

/// Sorted multiset of total costs, run-length encoded with exact counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostProfile {
    pub algorithm: String,
    pub metric: String,
    pub c0: Configuration,
    pub n: u32,
    /// False for Monte Carlo profiles, which must never feed certificates.
    pub exact: bool,
    values: Vec<Rat>,
    counts: Vec<u128>,
    total: u128,
}

impl CostProfile {
    pub fn from_value_counts(
        algorithm: String,
        metric: String,
        c0: Configuration,
        n: u32,
        exact: bool,
        map: BTreeMap<Rat, u128>,
    ) -> Self {
        let mut values = Vec::with_capacity(map.len());
        let mut counts = Vec::with_capacity(map.len());
        let mut total = 0u128;
        for (v, c) in map {
            if c == 0 {
                continue;
            }
            values.push(v);
            counts.push(c);
            total += c;
        }
        CostProfile {
            algorithm,
            metric,
            c0,
            n,
            exact,
            values,
            counts,
            total,
        }
    }

    pub fn from_unit_counts(
        algorithm: String,
        metric: String,
        c0: Configuration,
        n: u32,
        exact: bool,
        unit: Rat,
        map: BTreeMap<i64, u128>,
    ) -> Self {
        let map = map
            .into_iter()
            .map(|(v, c)| (rat_int(v as i128) * unit, c))
            .collect::<BTreeMap<_, _>>();
        Self::from_value_counts(algorithm, metric, c0, n, exact, map)
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn runs(&self) -> impl Iterator<Item = (Rat, u128)> + '_ {
        self.values.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn distinct_values(&self) -> usize {
        self.values.len()
    }

    /// Cost at the given 0-based rank of the ascending profile.
    pub fn value_at_rank(&self, rank: u128) -> Rat {
        debug_assert!(rank < self.total);
        let mut seen = 0u128;
        for (v, c) in self.runs() {
            seen += c;
            if rank < seen {
                return v;
            }
        }
        *self.values.last().expect("nonempty profile")
    }

    pub fn count_le(&self, c: Rat) -> u128 {
        self.runs()
            .take_while(|(v, _)| *v <= c)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn count_lt(&self, c: Rat) -> u128 {
        self.runs()
            .take_while(|(v, _)| *v < c)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn max(&self) -> Rat {
        self.values.last().copied().unwrap_or_else(Rat::zero)
    }

    pub fn sum(&self) -> Rat {
        self.runs()
            .fold(Rat::zero(), |acc, (v, c)| acc + v * rat_int(c as i128))
    }

    /// One CSV row per rank: rank, cost_num, cost_den. Intended for
    /// enumerated (budget-sized) profiles.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "rank,cost_num,cost_den")?;
        let mut rank = 0u128;
        for (v, c) in self.runs() {
            for _ in 0..c {
                writeln!(w, "{rank},{},{}", v.numer(), v.denom())?;
                rank += 1;
            }
        }
        Ok(())
    }

    /// Dense value list; only for small profiles (tests, permutation oracle).
    pub fn dense(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for (v, c) in self.runs() {
            for _ in 0..c {
                out.push(v);
            }
        }
        out
    }
}

/// Exact profile by exhaustive enumeration of all sequences, sharing work
/// across common prefixes.
pub fn cost_profile(
    alg: &AlgorithmSpec,
    m: &MetricSpace,
    c0: &Configuration,
    n: u32,
    budget: u128,
) -> Result<CostProfile> {
    let total = SequenceEnumerator::total(m, n);
    if total > budget {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    c0.validate(m)?;
    let points = m.requestable_points();
    let mut acc: BTreeMap<i64, u128> = BTreeMap::new();
    match alg {
        AlgorithmSpec::OfflineOpt => {
            fn rec(
                m: &MetricSpace,
                points: &[PointId],
                dp: &OptPrefixDp,
                depth: u32,
                acc: &mut BTreeMap<i64, u128>,
            ) {
                if depth == 0 {
                    *acc.entry(dp.min_cost_u()).or_insert(0) += 1;
                    return;
                }
                for &r in points {
                    rec(m, points, &dp.step(m, r), depth - 1, acc);
                }
            }
            rec(m, &points, &OptPrefixDp::new(c0), n, &mut acc);
        }
        online => {
            fn rec(
                m: &MetricSpace,
                points: &[PointId],
                state: &OnlineState,
                cost: i64,
                depth: u32,
                acc: &mut BTreeMap<i64, u128>,
            ) {
                if depth == 0 {
                    *acc.entry(cost).or_insert(0) += 1;
                    return;
                }
                for &r in points {
                    let mut child = state.clone();
                    let (step, _) = child.step_u(m, r);
                    rec(m, points, &child, cost + step, depth - 1, acc);
                }
            }
            let state = OnlineState::new(online, m, c0)?;
            rec(m, &points, &state, 0, n, &mut acc);
        }
    }
    Ok(CostProfile::from_unit_counts(
        alg.id(),
        m.id().to_owned(),
        c0.clone(),
        n,
        true,
        m.unit(),
        acc,
    ))
}

/// Exact profile for a serve-and-return algorithm anchored at `anchors`:
/// per-request costs are independent of history, so the profile over all
/// m^n sequences is the n-fold convolution of the per-point cost histogram.
/// No enumeration, hence no sequence budget.
pub fn anchored_cost_profile(
    m: &MetricSpace,
    anchors: &Configuration,
    n: u32,
    label: &str,
) -> Result<CostProfile> {
    anchors.validate(m)?;
    let mut hist: BTreeMap<i64, u128> = BTreeMap::new();
    for p in m.requestable_points() {
        let (cost, _) = kcenter_step(m, anchors, p);
        *hist.entry(cost).or_insert(0) += 1;
    }
    let mut acc: BTreeMap<i64, u128> = BTreeMap::from([(0, 1)]);
    for _ in 0..n {
        acc = convolve(&acc, &hist);
    }
    Ok(CostProfile::from_unit_counts(
        label.to_owned(),
        m.id().to_owned(),
        anchors.clone(),
        n,
        true,
        m.unit(),
        acc,
    ))
}

fn convolve(a: &BTreeMap<i64, u128>, b: &BTreeMap<i64, u128>) -> BTreeMap<i64, u128> {
    let mut out = BTreeMap::new();
    for (&va, &ca) in a {
        for (&vb, &cb) in b {
            *out.entry(va + vb).or_insert(0) += ca * cb;
        }
    }
    out
}

/// Monte Carlo profile over uniformly sampled sequences, labelled
/// approximate. If `samples` covers the whole cube the exhaustive profile is
/// returned instead (and is exact).
pub fn sample_profiles(
    alg: &AlgorithmSpec,
    m: &MetricSpace,
    c0: &Configuration,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<CostProfile> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let total = SequenceEnumerator::total(m, n);
    if u128::from(samples) >= total {
        return cost_profile(alg, m, c0, n, total);
    }
    c0.validate(m)?;
    let points = m.requestable_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc: BTreeMap<i64, u128> = BTreeMap::new();
    let mut seq = vec![0 as PointId; n as usize];
    for _ in 0..samples {
        for slot in seq.iter_mut() {
            *slot = points[rng.gen_range(0..points.len())];
        }
        let cost = match alg {
            AlgorithmSpec::OfflineOpt => crate::kserver::offline_opt_cost_u(m, c0, &seq),
            online => {
                let mut state = OnlineState::new(online, m, c0)?;
                seq.iter().map(|&r| state.step_u(m, r).0).sum()
            }
        };
        *acc.entry(cost).or_insert(0) += 1;
    }
    Ok(CostProfile::from_unit_counts(
        alg.id(),
        m.id().to_owned(),
        c0.clone(),
        n,
        false,
        m.unit(),
        acc,
    ))
}

/// Sample the same sequences for two algorithms (paired draws), so empirical
/// rank comparisons are taken over a common sequence set.
pub fn sample_profile_pair(
    alg_a: &AlgorithmSpec,
    alg_b: &AlgorithmSpec,
    m: &MetricSpace,
    c0: &Configuration,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<(CostProfile, CostProfile)> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    c0.validate(m)?;
    let points = m.requestable_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc_a: BTreeMap<i64, u128> = BTreeMap::new();
    let mut acc_b: BTreeMap<i64, u128> = BTreeMap::new();
    let mut seq = vec![0 as PointId; n as usize];
    for _ in 0..samples {
        for slot in seq.iter_mut() {
            *slot = points[rng.gen_range(0..points.len())];
        }
        for (alg, acc) in [(alg_a, &mut acc_a), (alg_b, &mut acc_b)] {
            let cost = match alg {
                AlgorithmSpec::OfflineOpt => crate::kserver::offline_opt_cost_u(m, c0, &seq),
                online => {
                    let mut state = OnlineState::new(online, m, c0)?;
                    seq.iter().map(|&r| state.step_u(m, r).0).sum()
                }
            };
            *acc.entry(cost).or_insert(0) += 1;
        }
    }
    let mk = |alg: &AlgorithmSpec, acc: BTreeMap<i64, u128>| {
        CostProfile::from_unit_counts(
            alg.id(),
            m.id().to_owned(),
            c0.clone(),
            n,
            false,
            m.unit(),
            acc,
        )
    };
    Ok((mk(alg_a, acc_a), mk(alg_b, acc_b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kserver::TieBreak;
    use crate::rat::rat;

    #[test]
    fn lexicographic_enumeration() {
        let m = MetricSpace::path(2, rat_int(1)).unwrap();
        let seqs: Vec<_> = enumerate_sequences(&m, 2, 100).unwrap().collect();
        assert_eq!(seqs, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let m3 = MetricSpace::path(3, rat_int(1)).unwrap();
        assert_eq!(enumerate_sequences(&m3, 3, 100).unwrap().count(), 27);
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        use std::collections::HashSet;
        let m = MetricSpace::cycle(6, rat_int(1)).unwrap();
        let mut seen = HashSet::new();
        let mut count = 0u64;
        for seq in enumerate_sequences(&m, 5, 10_000).unwrap() {
            assert!(seen.insert(seq));
            count += 1;
        }
        assert_eq!(count, 7776);
    }

    #[test]
    fn budget_refusal_is_explicit() {
        let m = MetricSpace::path(10, rat_int(1)).unwrap();
        match enumerate_sequences(&m, 9, 1000) {
            Err(Error::BudgetExceeded { needed, budget }) => {
                assert_eq!(needed, 1_000_000_000);
                assert_eq!(budget, 1000);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn covered_metric_gives_all_zero_profile() {
        let m = MetricSpace::path(2, rat_int(1)).unwrap();
        let c0 = Configuration::new(vec![0, 1]);
        let greedy = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        for n in 1..=4 {
            let p = cost_profile(&greedy, &m, &c0, n, 10_000).unwrap();
            assert_eq!(p.total(), 2u128.pow(n));
            assert_eq!(p.max(), Rat::zero());
        }
    }

    #[test]
    fn anchored_profile_on_the_unit_line() {
        // five points, anchors {1/4, 3/4}: sorted request costs 0,0,1/2,1/2,1/2
        let m = MetricSpace::path(5, rat(1, 4)).unwrap();
        let anchors = Configuration::new(vec![1, 3]);
        let p = cost_profile(&AlgorithmSpec::KCenter, &m, &anchors, 1, 100).unwrap();
        assert_eq!(
            p.dense(),
            vec![Rat::zero(), Rat::zero(), rat(1, 2), rat(1, 2), rat(1, 2)]
        );
        // convolution agrees with enumeration at every small n
        for n in 1..=4 {
            let by_enum = cost_profile(&AlgorithmSpec::KCenter, &m, &anchors, n, 10_000).unwrap();
            let by_conv = anchored_cost_profile(&m, &anchors, n, "kcenter").unwrap();
            assert_eq!(by_enum.dense(), by_conv.dense());
        }
    }

    #[test]
    fn profile_sum_matches_direct_total() {
        let m = MetricSpace::cycle(5, rat_int(1)).unwrap();
        let c0 = Configuration::new(vec![0, 2]);
        let greedy = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let p = cost_profile(&greedy, &m, &c0, 3, 1000).unwrap();
        let mut direct = Rat::zero();
        for seq in enumerate_sequences(&m, 3, 1000).unwrap() {
            direct = direct
                + crate::kserver::simulate(&greedy, &m, &c0, &seq)
                    .unwrap()
                    .total_cost;
        }
        assert_eq!(p.sum(), direct);
    }

    #[test]
    fn sampling_is_deterministic_and_exhaustive_when_covering() {
        let m = MetricSpace::cycle(4, rat_int(1)).unwrap();
        let c0 = Configuration::new(vec![0, 2]);
        let greedy = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let a = sample_profiles(&greedy, &m, &c0, 3, 50, 9).unwrap();
        let b = sample_profiles(&greedy, &m, &c0, 3, 50, 9).unwrap();
        assert_eq!(a, b);
        assert!(!a.exact);
        // enough samples to cover the cube switches to the exhaustive path
        let c = sample_profiles(&greedy, &m, &c0, 2, 16, 1).unwrap();
        let d = cost_profile(&greedy, &m, &c0, 2, 100).unwrap();
        assert!(c.exact);
        assert_eq!(c.dense(), d.dense());
    }

    #[test]
    fn rank_and_count_queries() {
        let mut map = BTreeMap::new();
        map.insert(Rat::zero(), 2u128);
        map.insert(rat_int(2), 3u128);
        let p = CostProfile::from_value_counts(
            "x".into(),
            "y".into(),
            Configuration::new(vec![0]),
            1,
            true,
            map,
        );
        assert_eq!(p.total(), 5);
        assert_eq!(p.value_at_rank(0), Rat::zero());
        assert_eq!(p.value_at_rank(2), rat_int(2));
        assert_eq!(p.count_le(rat_int(0)), 2);
        assert_eq!(p.count_lt(rat_int(2)), 2);
        assert_eq!(p.count_le(rat_int(2)), 5);
        assert_eq!(p.max(), rat_int(2));
        assert_eq!(p.sum(), rat_int(6));
    }

    #[test]
    fn csv_rows_per_rank() {
        let m = MetricSpace::path(5, rat_int(1)).unwrap();
        let anchors = Configuration::new(vec![1, 3]);
        let p = cost_profile(&AlgorithmSpec::KCenter, &m, &anchors, 1, 100).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "rank,cost_num,cost_den");
        assert_eq!(lines[1], "0,0,1");
        assert_eq!(lines[5], "4,2,1");
    }
}

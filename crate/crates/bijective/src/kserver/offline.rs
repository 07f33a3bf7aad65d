//! Offline optimum by dynamic programming over configurations.
//!
//! State after request i is the set of configurations containing sigma[i],
//! each with the cheapest cost of any lazy schedule reaching it. Lazy moves
//! (one server travels straight to the request) lose nothing on a metric
//! space, and the result is cross-checked against a brute force over all k^n
//! server assignments in the tests.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{Configuration, Trace, TraceStep};
use crate::error::Result;
use crate::metric::{MetricSpace, PointId};
use crate::rat::{rat_int, Rat};

/// Per-prefix DP state, cloneable so sequence enumeration can branch.
#[derive(Clone, Debug)]
pub struct OptPrefixDp {
    states: BTreeMap<Configuration, i64>,
}

impl OptPrefixDp {
    pub fn new(c0: &Configuration) -> Self {
        let mut states = BTreeMap::new();
        states.insert(c0.clone(), 0);
        OptPrefixDp { states }
    }

    pub fn step(&self, m: &MetricSpace, r: PointId) -> OptPrefixDp {
        let mut next: BTreeMap<Configuration, i64> = BTreeMap::new();
        for (cfg, &cost) in &self.states {
            for idx in 0..cfg.k() {
                let travel = m.dist_u(cfg.servers()[idx], r);
                let to = cfg.with_move(idx, r);
                let total = cost + travel;
                next.entry(to)
                    .and_modify(|c| {
                        if total < *c {
                            *c = total;
                        }
                    })
                    .or_insert(total);
            }
        }
        OptPrefixDp { states: next }
    }

    pub fn min_cost_u(&self) -> i64 {
        self.states.values().copied().min().unwrap_or(0)
    }
}

/// Optimal total cost in units, without reconstructing a schedule.
pub fn offline_opt_cost_u(m: &MetricSpace, c0: &Configuration, seq: &[PointId]) -> i64 {
    let mut dp = OptPrefixDp::new(c0);
    for &r in seq {
        dp = dp.step(m, r);
    }
    dp.min_cost_u()
}

/// Optimal cost plus one optimal lazy trace. Ties are resolved by scanning
/// configurations in canonical order and server indices ascending, keeping
/// only strict improvements, so the trace is deterministic.
pub fn offline_opt(m: &MetricSpace, c0: &Configuration, seq: &[PointId]) -> Result<(Rat, Trace)> {
    c0.validate(m)?;
    for &r in seq {
        m.check_point(r)?;
    }
    if seq.is_empty() {
        return Ok((Rat::zero(), Trace::new(vec![])));
    }

    // layers[i]: config -> (cost, predecessor config, serving index in pred)
    let mut layers: Vec<BTreeMap<Configuration, (i64, Configuration, usize)>> =
        Vec::with_capacity(seq.len());
    let mut current: BTreeMap<Configuration, (i64, Configuration, usize)> = BTreeMap::new();
    current.insert(c0.clone(), (0, c0.clone(), usize::MAX));
    for &r in seq {
        let mut next: BTreeMap<Configuration, (i64, Configuration, usize)> = BTreeMap::new();
        for (cfg, &(cost, _, _)) in &current {
            for idx in 0..cfg.k() {
                let total = cost + m.dist_u(cfg.servers()[idx], r);
                let to = cfg.with_move(idx, r);
                match next.get(&to) {
                    Some(&(best, _, _)) if best <= total => {}
                    _ => {
                        next.insert(to, (total, cfg.clone(), idx));
                    }
                }
            }
        }
        layers.push(next.clone());
        current = next;
    }

    let (mut cfg, total_u) = current
        .iter()
        .min_by_key(|(cfg, (cost, _, _))| (*cost, (*cfg).clone()))
        .map(|(cfg, &(cost, _, _))| (cfg.clone(), cost))
        .expect("nonempty DP layer");

    let mut steps: Vec<TraceStep> = Vec::with_capacity(seq.len());
    for (i, &r) in seq.iter().enumerate().rev() {
        let (cost, pred, idx) = layers[i].get(&cfg).expect("backtrack state").clone();
        let prev_cost = if i == 0 {
            0
        } else {
            layers[i - 1].get(&pred).unwrap().0
        };
        steps.push(TraceStep {
            request: r,
            server: idx,
            cost: rat_int((cost - prev_cost) as i128) * m.unit(),
            config: cfg.clone(),
        });
        cfg = pred;
    }
    steps.reverse();
    let trace = Trace::new(steps);
    debug_assert_eq!(trace.total_cost, rat_int(total_u as i128) * m.unit());
    Ok((rat_int(total_u as i128) * m.unit(), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kserver::TieBreak;
    use crate::metric::MetricSpace;
    use crate::rat::rat_int;

    fn path(m: u32) -> MetricSpace {
        MetricSpace::path(m, rat_int(1)).unwrap()
    }

    /// All k^n assignments of requests to servers, moving lazily.
    fn assignment_brute_force_u(m: &MetricSpace, c0: &Configuration, seq: &[PointId]) -> i64 {
        let k = c0.k();
        let n = seq.len();
        let mut best = i64::MAX;
        let mut choice = vec![0usize; n];
        loop {
            let mut cfg = c0.clone();
            let mut cost = 0i64;
            for (i, &r) in seq.iter().enumerate() {
                cost += m.dist_u(cfg.servers()[choice[i]], r);
                cfg = cfg.with_move(choice[i], r);
            }
            best = best.min(cost);
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                choice[i] += 1;
                if choice[i] < k {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn three_equidistant_points() {
        // servers at the two ends; the classic four-request pattern costs d
        let m = path(3);
        let c0 = Configuration::new(vec![0, 2]);
        let (cost, trace) = offline_opt(&m, &c0, &[0, 2, 1, 0]).unwrap();
        assert_eq!(cost, rat_int(1));
        assert_eq!(trace.total_cost, rat_int(1));
    }

    #[test]
    fn requests_on_servers_cost_nothing() {
        let m = path(4);
        let c0 = Configuration::new(vec![0, 3]);
        let (cost, _) = offline_opt(&m, &c0, &[0, 3, 0, 0, 3]).unwrap();
        assert_eq!(cost, rat_int(0));
    }

    #[test]
    fn short_path_example() {
        let m = path(4);
        let c0 = Configuration::new(vec![0, 3]);
        let (cost, _) = offline_opt(&m, &c0, &[1, 2]).unwrap();
        assert_eq!(cost, rat_int(2));
        assert_eq!(assignment_brute_force_u(&m, &c0, &[1, 2]), 2);
    }

    #[test]
    fn matches_assignment_brute_force_exhaustively() {
        // every sequence on small instances
        let cases = vec![
            (path(3), Configuration::new(vec![0, 2]), 4usize),
            (path(4), Configuration::new(vec![0, 3]), 3),
            (
                MetricSpace::cycle(4, rat_int(1)).unwrap(),
                Configuration::new(vec![0, 2]),
                3,
            ),
            (
                MetricSpace::spider(&[(1, rat_int(1)), (1, rat_int(1)), (2, rat_int(1))]).unwrap(),
                Configuration::new(vec![1, 4]),
                3,
            ),
        ];
        for (m, c0, n) in cases {
            let pts = m.m();
            let total = (pts as u64).pow(n as u32);
            for code in 0..total {
                let mut seq = Vec::with_capacity(n);
                let mut c = code;
                for _ in 0..n {
                    seq.push((c % pts as u64) as u32);
                    c /= pts as u64;
                }
                let dp = offline_opt_cost_u(&m, &c0, &seq);
                let bf = assignment_brute_force_u(&m, &c0, &seq);
                assert_eq!(dp, bf, "metric {m} seq {seq:?}");
            }
        }
    }

    #[test]
    fn matches_brute_force_on_sampled_longer_sequences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let metrics = vec![path(6), MetricSpace::cycle(6, rat_int(1)).unwrap()];
        for m in metrics {
            for k in [2usize, 3] {
                let c0 = Configuration::new((0..k as u32).collect());
                for _ in 0..60 {
                    let n = rng.gen_range(1..=6);
                    let seq: Vec<u32> = (0..n).map(|_| rng.gen_range(0..m.m())).collect();
                    assert_eq!(
                        offline_opt_cost_u(&m, &c0, &seq),
                        assignment_brute_force_u(&m, &c0, &seq)
                    );
                }
            }
        }
    }

    #[test]
    fn opt_is_a_lower_bound_for_greedy() {
        let m = MetricSpace::cycle(5, rat_int(1)).unwrap();
        let c0 = Configuration::new(vec![0, 2]);
        let spec = crate::kserver::AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        for code in 0..125u32 {
            let seq = vec![code % 5, (code / 5) % 5, (code / 25) % 5];
            let greedy = crate::kserver::simulate(&spec, &m, &c0, &seq).unwrap();
            let (opt, _) = offline_opt(&m, &c0, &seq).unwrap();
            assert!(opt <= greedy.total_cost);
        }
    }
}

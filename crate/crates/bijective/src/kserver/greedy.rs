//! The greedy step function and the anchor-based serve-and-return algorithm.

use super::{dmin_u, Configuration, TieBreak};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};

/// Index (into the sorted configuration) of the server that serves `r` under
/// the given tie rule. The rule only matters when several servers are
/// equidistant from the request.
pub fn nearest_server(m: &MetricSpace, cfg: &Configuration, r: PointId, tie: TieBreak) -> usize {
    let servers = cfg.servers();
    let best = servers
        .iter()
        .map(|&s| m.dist_u(s, r))
        .min()
        .expect("nonempty configuration");
    let candidates = || {
        servers
            .iter()
            .enumerate()
            .filter(move |&(_, &s)| m.dist_u(s, r) == best)
    };
    match tie {
        TieBreak::LowestPoint => candidates().next().unwrap().0,
        TieBreak::HighestPoint => candidates().next_back().unwrap().0,
        TieBreak::Clockwise => {
            if m.is_cycle() {
                // prefer the server that reaches r travelling in the direction
                // of increasing point ids
                let mm = m.m() as i64;
                for (i, &s) in candidates() {
                    if ((r as i64 - s as i64).rem_euclid(mm)) == best {
                        return i;
                    }
                }
            }
            candidates().next().unwrap().0
        }
    }
}

/// One lazy greedy move: the nearest server (under `tie`) moves to the
/// request; cost equals the distance it travels, in units.
pub fn greedy_step(
    m: &MetricSpace,
    cfg: &Configuration,
    r: PointId,
    tie: TieBreak,
) -> (Configuration, i64, usize) {
    let idx = nearest_server(m, cfg, r, tie);
    let cost = m.dist_u(cfg.servers()[idx], r);
    if cost == 0 {
        (cfg.clone(), 0, idx)
    } else {
        (cfg.with_move(idx, r), cost, idx)
    }
}

/// max over all points of the distance to the nearest server, in units.
pub fn covering_radius_u(m: &MetricSpace, cfg: &Configuration) -> i64 {
    (0..m.m()).map(|p| dmin_u(m, cfg, p)).max().unwrap()
}

/// Serve-and-return step from fixed anchors: cost is twice the distance from
/// the request to the nearest anchor, and the configuration stays put.
pub fn kcenter_step(m: &MetricSpace, anchors: &Configuration, r: PointId) -> (i64, usize) {
    let idx = nearest_server(m, anchors, r, TieBreak::LowestPoint);
    (2 * m.dist_u(anchors.servers()[idx], r), idx)
}

/// Anchor configuration minimizing the covering radius.
///
/// On paths and cycles where the evenly spread placement (a server at each
/// odd multiple of length/2k) lands on grid points, that placement is
/// returned. Otherwise all k-subsets are searched exactly; among radius
/// minimizers the one whose sorted distance-to-nearest-server vector is
/// lexicographically smallest wins (so pointwise-better anchor sets are
/// preferred), with the lexicographically smallest configuration as the
/// final tie-break.
pub fn kcenter_anchors(m: &MetricSpace, k: usize) -> Result<Configuration> {
    if k == 0 {
        return Err(Error::EmptyConfiguration);
    }
    if k > m.m() as usize {
        return Err(Error::InvalidParameter(format!(
            "k={k} exceeds m={}",
            m.m()
        )));
    }
    if k == m.m() as usize {
        return Ok(Configuration::new((0..m.m()).collect()));
    }
    if let Some(uniform) = uniform_configuration(m, k) {
        return Ok(uniform);
    }
    // exact search over all k-subsets
    let mut count: u128 = 1;
    for i in 0..k as u128 {
        count = count * (m.m() as u128 - i) / (i + 1);
        if count > 5_000_000 {
            return Err(Error::BudgetExceeded {
                needed: count,
                budget: 5_000_000,
            });
        }
    }
    let sorted_dvals = |cfg: &Configuration| -> Vec<i64> {
        let mut d: Vec<i64> = (0..m.m()).map(|p| dmin_u(m, cfg, p)).collect();
        d.sort_unstable();
        d
    };
    let mut subset: Vec<u32> = (0..k as u32).collect();
    let mut best: Option<(i64, Vec<i64>, Configuration)> = None;
    loop {
        let cfg = Configuration::new(subset.clone());
        let radius = covering_radius_u(m, &cfg);
        let better = match &best {
            None => true,
            Some((r, dv, _)) => radius < *r || (radius == *r && sorted_dvals(&cfg) < *dv),
        };
        if better {
            best = Some((radius, sorted_dvals(&cfg), cfg));
        }
        // next k-subset of 0..m in lexicographic order
        let mm = m.m();
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best.unwrap().2);
            }
            i -= 1;
            if subset[i] < mm - (k - i) as u32 {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The evenly spread configuration on a path or cycle, when it exists on the
/// grid: servers at odd multiples of (total length)/(2k).
pub fn uniform_configuration(m: &MetricSpace, k: usize) -> Option<Configuration> {
    let k = k as u64;
    if m.is_path() {
        let span = (m.m() - 1) as u64;
        let mut ids = Vec::with_capacity(k as usize);
        for t in 0..k {
            let num = span * (2 * t + 1);
            if !num.is_multiple_of(2 * k) {
                return None;
            }
            ids.push((num / (2 * k)) as u32);
        }
        Some(Configuration::new(ids))
    } else if m.is_cycle() {
        let mm = m.m() as u64;
        let mut ids = Vec::with_capacity(k as usize);
        for t in 0..k {
            let num = mm * (2 * t + 1);
            if !num.is_multiple_of(2 * k) {
                return None;
            }
            ids.push((num / (2 * k)) as u32);
        }
        Some(Configuration::new(ids))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn path(m: u32) -> MetricSpace {
        MetricSpace::path(m, rat_int(1)).unwrap()
    }

    #[test]
    fn greedy_moves_the_strictly_nearer_server() {
        let m = path(5);
        let c = Configuration::new(vec![0, 4]);
        let (next, cost, _) = greedy_step(&m, &c, 3, TieBreak::LowestPoint);
        assert_eq!(next.servers(), &[0, 3]);
        assert_eq!(cost, 1);
    }

    #[test]
    fn greedy_request_on_server_is_free() {
        let m = path(5);
        let c = Configuration::new(vec![0, 4]);
        let (next, cost, _) = greedy_step(&m, &c, 0, TieBreak::LowestPoint);
        assert_eq!(next, c);
        assert_eq!(cost, 0);
    }

    #[test]
    fn tie_rule_decides_equidistant_requests() {
        let m = path(5);
        let c = Configuration::new(vec![0, 4]);
        let (low, cost, _) = greedy_step(&m, &c, 2, TieBreak::LowestPoint);
        assert_eq!(low.servers(), &[2, 4]);
        assert_eq!(cost, 2);
        let (high, _, _) = greedy_step(&m, &c, 2, TieBreak::HighestPoint);
        assert_eq!(high.servers(), &[0, 2]);
    }

    #[test]
    fn clockwise_tie_rule_on_cycle() {
        let m = MetricSpace::cycle(4, rat_int(1)).unwrap();
        let c = Configuration::new(vec![0, 2]);
        // request 1 is equidistant; the clockwise rule picks the server at 0
        // (it travels 0 -> 1 in increasing ids)
        let idx = nearest_server(&m, &c, 1, TieBreak::Clockwise);
        assert_eq!(c.servers()[idx], 0);
        let idx = nearest_server(&m, &c, 3, TieBreak::Clockwise);
        assert_eq!(c.servers()[idx], 2);
    }

    #[test]
    fn anchors_on_the_unit_line() {
        // five points at 0, 1/4, 1/2, 3/4, 1; k = 2 anchors at 1/4 and 3/4
        let m = MetricSpace::path(5, rat(1, 4)).unwrap();
        let anchors = kcenter_anchors(&m, 2).unwrap();
        assert_eq!(anchors.servers(), &[1, 3]);
    }

    #[test]
    fn anchors_with_k_equal_m_cover_everything() {
        let m = path(4);
        let anchors = kcenter_anchors(&m, 4).unwrap();
        assert_eq!(anchors.servers(), &[0, 1, 2, 3]);
        assert_eq!(covering_radius_u(&m, &anchors), 0);
    }

    #[test]
    fn spider_anchors_match_exhaustive_search() {
        let m = MetricSpace::spider(&[(3, rat_int(1)), (3, rat_int(1)), (3, rat_int(1))]).unwrap();
        let anchors = kcenter_anchors(&m, 2).unwrap();
        let radius = covering_radius_u(&m, &anchors);
        // brute force over all pairs
        let mut best = i64::MAX;
        for a in 0..m.m() {
            for b in a + 1..m.m() {
                best = best.min(covering_radius_u(&m, &Configuration::new(vec![a, b])));
            }
        }
        assert_eq!(radius, best);
    }

    #[test]
    fn uniform_configuration_existence() {
        assert_eq!(
            uniform_configuration(&path(5), 2).unwrap().servers(),
            &[1, 3]
        );
        assert!(uniform_configuration(&path(6), 2).is_none());
        let c4 = MetricSpace::cycle(4, rat_int(1)).unwrap();
        assert_eq!(uniform_configuration(&c4, 2).unwrap().servers(), &[1, 3]);
        let c8 = MetricSpace::cycle(8, rat_int(1)).unwrap();
        assert_eq!(uniform_configuration(&c8, 2).unwrap().servers(), &[2, 6]);
        let c6 = MetricSpace::cycle(6, rat_int(1)).unwrap();
        assert_eq!(uniform_configuration(&c6, 3).unwrap().servers(), &[1, 3, 5]);
        assert!(uniform_configuration(&c6, 2).is_none());
    }

    #[test]
    fn kcenter_step_costs_twice_dmin() {
        let m = MetricSpace::cycle(8, rat_int(1)).unwrap();
        let anchors = Configuration::new(vec![1, 5]);
        let (cost, _) = kcenter_step(&m, &anchors, 3);
        assert_eq!(cost, 4);
        let (cost, _) = kcenter_step(&m, &anchors, 1);
        assert_eq!(cost, 0);
    }

    #[test]
    fn anchors_reject_oversized_k() {
        assert!(kcenter_anchors(&path(3), 4).is_err());
        assert!(kcenter_anchors(&path(3), 0).is_err());
    }
}

//! Generators for the lower-bound request sequences and instances: the
//! adaptive three-point sequence that costs any lazy algorithm twice the
//! optimum, the clustering-then-alternation sequence that pins greedy's
//! per-step cost near half the line, and the lopsided star on which anchored
//! serve-and-return is certified arbitrarily bad.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::kserver::{greedy_step, Configuration, OnlineState, TieBreak};
use crate::metric::{MetricSpace, PointId};
use crate::rat::{rat, rat_int, Rat};

/// Anything the adaptive adversaries can probe: current configuration plus a
/// serve callback.
pub trait AdaptiveTarget {
    fn config(&self) -> Configuration;
    fn serve(&mut self, m: &MetricSpace, r: PointId);
}

impl AdaptiveTarget for OnlineState {
    fn config(&self) -> Configuration {
        OnlineState::config(self).clone()
    }

    fn serve(&mut self, m: &MetricSpace, r: PointId) {
        self.step_u(m, r);
    }
}

/// Three equidistant points, two servers at the ends: after a cost-free
/// endpoint prefix, request the middle, then the endpoint the target just
/// vacated. Any lazy deterministic algorithm pays at least twice the
/// distance d between adjacent points, while the optimum pays d.
pub fn three_point_adversary(
    m: &MetricSpace,
    target: &mut dyn AdaptiveTarget,
    n: usize,
) -> Result<Vec<PointId>> {
    if !m.is_path() || m.m() != 3 {
        return Err(Error::InvalidParameter(
            "three-point adversary needs a 3-point path".into(),
        ));
    }
    if target.config() != Configuration::new(vec![0, 2]) {
        return Err(Error::InvalidParameter(
            "target must start on the endpoints {0, 2}".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("adversary needs n >= 2".into()));
    }
    let mut seq = Vec::with_capacity(n);
    for i in 0..n - 2 {
        let r = if i % 2 == 0 { 0 } else { 2 };
        target.serve(m, r);
        seq.push(r);
    }
    target.serve(m, 1);
    seq.push(1);
    let last = if target.config().contains(0) { 2 } else { 0 };
    target.serve(m, last);
    seq.push(last);
    Ok(seq)
}

/// Walk every response branch a lazy deterministic algorithm could take
/// against the three-point adversary; returns the minimum total cost over
/// all branches, in units. Covered requests leave no choice, so the branch
/// tree is tiny even though the algorithm class is astronomically large.
pub fn three_point_adversary_worst_case_u(m: &MetricSpace, n: usize) -> Result<i64> {
    if !m.is_path() || m.m() != 3 {
        return Err(Error::InvalidParameter(
            "three-point adversary needs a 3-point path".into(),
        ));
    }
    // adversary logic mirrored: endpoint prefix, middle, vacated endpoint
    fn min_cost(m: &MetricSpace, cfg: &Configuration, step_index: usize, n: usize) -> i64 {
        if step_index == n {
            return 0;
        }
        let r: PointId = if step_index < n - 2 {
            if step_index.is_multiple_of(2) {
                0
            } else {
                2
            }
        } else if step_index == n - 2 {
            1
        } else if cfg.contains(0) {
            2
        } else {
            0
        };
        if cfg.contains(r) {
            return min_cost(m, cfg, step_index + 1, n);
        }
        (0..cfg.k())
            .map(|idx| {
                let step = m.dist_u(cfg.servers()[idx], r);
                step + min_cost(m, &cfg.with_move(idx, r), step_index + 1, n)
            })
            .min()
            .unwrap()
    }
    Ok(min_cost(m, &Configuration::new(vec![0, 2]), 0, n))
}

#[derive(Debug, Clone)]
pub struct LineAdversaryOutput {
    pub sequence: Vec<PointId>,
    /// Requests before this index are setup (clustering plus the first
    /// alternation request, whose cost depends on the start configuration).
    pub suffix_start: usize,
    /// The inner alternation point.
    pub x: PointId,
    pub delta_prime: Rat,
}

/// Clustering-then-alternation sequence against greedy on a unit-length
/// path: an initial request at 0, midpoint requests dragging servers
/// 2..k-1 within delta' of each other, then requests alternating between
/// x (just past the middle) and the right end. Every alternation step after
/// the first costs greedy exactly 1 - x > 1/2 - epsilon/k.
pub fn line_clustering_adversary(
    m: &MetricSpace,
    k: usize,
    epsilon: Rat,
    tie: TieBreak,
    c0: &Configuration,
    n: usize,
) -> Result<LineAdversaryOutput> {
    if !m.is_path() {
        return Err(Error::InvalidParameter(
            "clustering adversary needs a path".into(),
        ));
    }
    if m.path_position(m.m() - 1) != rat_int(1) {
        return Err(Error::InvalidParameter("path must have unit length".into()));
    }
    if c0.k() != k || k < 2 {
        return Err(Error::InvalidParameter("need k >= 2 servers".into()));
    }
    if epsilon <= Rat::zero() || epsilon >= rat_int(1) {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1)".into()));
    }
    c0.validate(m)?;
    let delta_p = epsilon / rat_int(k as i128); // target per-step slack
    let half = rat(1, 2);

    // largest grid point strictly inside (1/2, 1/2 + delta_p)
    let grid = m.delta();
    let upper = half + delta_p;
    let mut x_id: Option<PointId> = None;
    for p in (0..m.m()).rev() {
        let pos = m.path_position(p);
        if pos > half && pos < upper {
            x_id = Some(p);
            break;
        }
        if pos <= half {
            break;
        }
    }
    let x_id = x_id.ok_or_else(|| {
        Error::TooCoarse(format!("no grid point strictly between 1/2 and {}", upper))
    })?;
    let x_pos = m.path_position(x_id);
    let delta_prime = (x_pos - half) * rat_int(2) / rat_int(k as i128 - 1);

    let mut seq: Vec<PointId> = Vec::with_capacity(n);
    let mut cfg = c0.clone();
    let push = |cfg: &mut Configuration, seq: &mut Vec<PointId>, r: PointId| {
        let (next, _, _) = greedy_step(m, cfg, r, tie);
        *cfg = next;
        seq.push(r);
    };

    // drag the leftmost server to 0
    push(&mut cfg, &mut seq, 0);
    // cluster servers 2..k-1 (1-based, left to right) towards the left
    if k >= 3 {
        if delta_prime <= grid * rat_int(2) {
            return Err(Error::TooCoarse(format!(
                "delta' = {} needs a grid finer than {}",
                delta_prime, grid
            )));
        }
        for i in 1..k - 1 {
            // d(s_{i-1}, s_i) < delta', positions re-sorted every move
            loop {
                if seq.len() >= n {
                    return Err(Error::InvalidParameter(format!(
                        "n = {n} too small for the clustering prefix"
                    )));
                }
                let left = cfg.servers()[i - 1];
                let right = cfg.servers()[i];
                if m.path_position(right) - m.path_position(left) < delta_prime {
                    break;
                }
                // first grid point strictly right of the midpoint, so greedy
                // moves the right server of the pair
                let p = (left + right) / 2 + 1;
                debug_assert!(p < right);
                push(&mut cfg, &mut seq, p);
            }
        }
    }
    let prefix_len = seq.len();
    if n < prefix_len + 2 {
        return Err(Error::InvalidParameter(format!(
            "n = {n} leaves no room for the alternation (prefix {prefix_len})"
        )));
    }
    // alternate x, 1, x, 1, ...; the first of these may still be cheap
    let right_end = m.m() - 1;
    let mut next_is_x = true;
    while seq.len() < n {
        let r = if next_is_x { x_id } else { right_end };
        push(&mut cfg, &mut seq, r);
        next_is_x = !next_is_x;
    }
    Ok(LineAdversaryOutput {
        sequence: seq,
        suffix_start: prefix_len + 1,
        x: x_id,
        delta_prime,
    })
}

#[derive(Debug, Clone)]
pub struct StarLowerBoundInstance {
    pub metric: MetricSpace,
    /// Anchors of the serve-and-return baseline: on the long ray at
    /// distances d, 5d, 9d, ...
    pub anchors_kcenter: Configuration,
    /// Rival anchors: one server at the centre, the remaining k-1 on the
    /// long ray at distances d, 5d, ...
    pub anchors_centre: Configuration,
    pub short_rays: u64,
    pub d: Rat,
}

/// The lopsided star: (kd)^3 - 1 short rays of length d plus one long ray of
/// length 4kd - d. Requests near the centre are cheap for a centre-anchored
/// algorithm and expensive for anchors strung along the long ray.
pub fn star_lowerbound_instance(k: usize, d: u64, delta: Rat) -> Result<StarLowerBoundInstance> {
    if k < 2 || d == 0 {
        return Err(Error::InvalidParameter("need k >= 2 and d >= 1".into()));
    }
    let d_rat = rat_int(d as i128);
    let per_short = d_rat / delta;
    if !per_short.is_integer() || delta <= Rat::zero() {
        return Err(Error::InvalidParameter(
            "d must be a positive multiple of delta".into(),
        ));
    }
    let per_short = per_short.to_integer() as u32;
    let long_len = 4 * (k as u64) * d - d;
    let per_long = (rat_int(long_len as i128) / delta).to_integer() as u32;
    let ray_count = ((k as u64) * d).pow(3);
    let total_points: u128 = 1 + (ray_count as u128 - 1) * per_short as u128 + per_long as u128;
    if total_points > 10_000_000 {
        return Err(Error::BudgetExceeded {
            needed: total_points,
            budget: 10_000_000,
        });
    }
    let mut rays: Vec<(u32, Rat)> = Vec::with_capacity(ray_count as usize);
    rays.push((per_long, delta));
    for _ in 1..ray_count {
        rays.push((per_short, delta));
    }
    let metric = MetricSpace::spider(&rays)?;
    // long ray is ray 0, its points are ids 1..=per_long ordered outward
    let id_at = |dist: u64| -> PointId { (rat_int(dist as i128) / delta).to_integer() as u32 };
    let mut kc = Vec::with_capacity(k);
    for i in 0..k as u64 {
        kc.push(id_at((4 * i + 1) * d));
    }
    let mut centre = vec![0 as PointId];
    centre.extend(kc.iter().take(k - 1).copied());
    Ok(StarLowerBoundInstance {
        metric,
        anchors_kcenter: Configuration::new(kc),
        anchors_centre: Configuration::new(centre),
        short_rays: ray_count - 1,
        d: d_rat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kserver::{kcenter_anchors, offline_opt, simulate, AlgorithmSpec};

    fn three_point_path() -> MetricSpace {
        MetricSpace::path(3, rat_int(1)).unwrap()
    }

    #[test]
    fn adversary_traps_lowest_tie_greedy() {
        let m = three_point_path();
        let c0 = Configuration::new(vec![0, 2]);
        let spec = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let mut alg = OnlineState::new(&spec, &m, &c0).unwrap();
        let seq = three_point_adversary(&m, &mut alg, 4).unwrap();
        // greedy with the lowest-point tie serves the middle from 0, so the
        // final request is the vacated left endpoint
        assert_eq!(&seq[2..], &[1, 0]);
        let trace = simulate(&spec, &m, &c0, &seq).unwrap();
        assert_eq!(trace.total_cost, rat_int(2));
        let (opt, _) = offline_opt(&m, &c0, &seq).unwrap();
        assert_eq!(opt, rat_int(1));
    }

    #[test]
    fn adversary_adapts_to_the_other_tie_rule() {
        let m = three_point_path();
        let c0 = Configuration::new(vec![0, 2]);
        let spec = AlgorithmSpec::Greedy {
            tie: TieBreak::HighestPoint,
        };
        let mut alg = OnlineState::new(&spec, &m, &c0).unwrap();
        let seq = three_point_adversary(&m, &mut alg, 4).unwrap();
        assert_eq!(&seq[2..], &[1, 2]);
        let trace = simulate(&spec, &m, &c0, &seq).unwrap();
        assert_eq!(trace.total_cost, rat_int(2));
    }

    #[test]
    fn every_response_branch_pays_double() {
        let m = three_point_path();
        for n in 2..=6 {
            assert_eq!(
                three_point_adversary_worst_case_u(&m, n).unwrap(),
                2,
                "n={n}"
            );
        }
    }

    #[test]
    fn clustering_adversary_on_the_standard_line() {
        let m = MetricSpace::path(101, rat(1, 100)).unwrap();
        let c0 = kcenter_anchors(&m, 2).unwrap();
        assert_eq!(c0.servers(), &[25, 75]);
        let out =
            line_clustering_adversary(&m, 2, rat(1, 5), TieBreak::LowestPoint, &c0, 60).unwrap();
        assert_eq!(out.sequence.len(), 60);
        assert_eq!(out.suffix_start, 2);
        assert_eq!(out.sequence[0], 0);
        // x = largest grid point below 1/2 + 1/10
        assert_eq!(out.x, 59);
        // every measured suffix step costs greedy exactly 1 - x = 41/100
        let spec = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let trace = simulate(&spec, &m, &c0, &out.sequence).unwrap();
        for step in &trace.steps[out.suffix_start..] {
            assert_eq!(step.cost, rat(41, 100));
            assert!(step.cost > rat(2, 5));
        }
    }

    #[test]
    fn clustering_prefix_respects_the_logarithmic_bound() {
        let m = MetricSpace::path(201, rat(1, 200)).unwrap();
        let c0 = Configuration::new(vec![0, 100, 200]);
        let out =
            line_clustering_adversary(&m, 3, rat(1, 5), TieBreak::LowestPoint, &c0, 40).unwrap();
        let prefix = out.suffix_start - 1;
        // ceil(log2(1/delta')) * (k - 2) + 1
        let inv = (rat_int(1) / out.delta_prime).ceil().to_integer() as f64;
        let bound = inv.log2().ceil() as usize * (3 - 2) + 1;
        assert!(prefix <= bound, "prefix {prefix} exceeds {bound}");
        // the clustered servers ended up within delta' of each other
        let spec = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let trace = simulate(&spec, &m, &c0, &out.sequence[..prefix]).unwrap();
        let cfg = &trace.steps.last().unwrap().config;
        let gap = m.path_position(cfg.servers()[1]) - m.path_position(cfg.servers()[0]);
        assert!(gap < out.delta_prime);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let m = MetricSpace::path(3, rat(1, 2)).unwrap();
        let c0 = Configuration::new(vec![0, 2]);
        assert!(matches!(
            line_clustering_adversary(&m, 2, rat(1, 5), TieBreak::LowestPoint, &c0, 20),
            Err(Error::TooCoarse(_))
        ));
    }

    #[test]
    fn star_instance_shape() {
        let inst = star_lowerbound_instance(2, 3, rat_int(1)).unwrap();
        assert_eq!(inst.short_rays, 215);
        // long ray length 4kd - d = 21
        assert_eq!(inst.metric.rays()[0].points.len(), 21);
        assert_eq!(inst.anchors_kcenter.servers(), &[3, 15]);
        assert_eq!(inst.anchors_centre.servers(), &[0, 3]);
        // a short-ray tip costs the centre-anchored algorithm 2d
        let tip = *inst.metric.rays()[1].points.last().unwrap();
        let (cost, _) = crate::kserver::kcenter_step(&inst.metric, &inst.anchors_centre, tip);
        assert_eq!(cost, 6);
    }

    #[test]
    fn star_instance_rejects_bad_parameters() {
        assert!(star_lowerbound_instance(1, 3, rat_int(1)).is_err());
        assert!(star_lowerbound_instance(2, 3, rat(2, 1)).is_err());
        // too many points to build
        assert!(matches!(
            star_lowerbound_instance(2, 100, rat_int(1)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}

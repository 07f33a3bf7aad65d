//! Rank orderings of points by distance to the nearest server, the
//! rank-preserving point matching between two configurations, and its lift to
//! a bijection over request sequences.

use std::io::Write;

use crate::error::Result;
use crate::kserver::{dmin_u, offline_opt, AlgorithmSpec, Configuration, OnlineState};
use crate::metric::{MetricSpace, PointId};
use crate::rat::{rat_int, rat_str, Rat};

/// All points of the metric sorted by distance to the nearest server,
/// ascending, with ties broken by ascending point id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointOrdering {
    pub points: Vec<PointId>,
    pub dvals_u: Vec<i64>,
    unit: Rat,
}

impl PointOrdering {
    pub fn dvals(&self) -> Vec<Rat> {
        self.dvals_u
            .iter()
            .map(|&d| rat_int(d as i128) * self.unit)
            .collect()
    }
}

pub fn point_ordering(m: &MetricSpace, c: &Configuration) -> PointOrdering {
    let mut rows: Vec<(i64, PointId)> = (0..m.m()).map(|p| (dmin_u(m, c, p), p)).collect();
    rows.sort_unstable();
    PointOrdering {
        points: rows.iter().map(|&(_, p)| p).collect(),
        dvals_u: rows.iter().map(|&(d, _)| d).collect(),
        unit: m.unit(),
    }
}

/// Rank-preserving matching: the rank-i point of the first ordering maps to
/// the rank-i point of the second.
#[derive(Debug, Clone)]
pub struct PointMap {
    /// (point of C1, point of C2) by rank.
    pub pairs: Vec<(PointId, PointId)>,
    /// dmin values per rank, in units, for reporting.
    pub dvals1_u: Vec<i64>,
    pub dvals2_u: Vec<i64>,
    unit: Rat,
    forward: Vec<PointId>,
}

impl PointMap {
    pub fn image(&self, p: PointId) -> PointId {
        self.forward[p as usize]
    }

    /// CSV rows: rank, point_C1, dmin_C1, point_C2, dmin_C2.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "rank,point_c1,dmin_c1,point_c2,dmin_c2")?;
        for (rank, &(p1, p2)) in self.pairs.iter().enumerate() {
            let d1 = rat_int(self.dvals1_u[rank] as i128) * self.unit;
            let d2 = rat_int(self.dvals2_u[rank] as i128) * self.unit;
            writeln!(w, "{rank},{p1},{},{p2},{}", rat_str(&d1), rat_str(&d2))?;
        }
        Ok(())
    }
}

pub fn ordered_bijection(m: &MetricSpace, c1: &Configuration, c2: &Configuration) -> PointMap {
    let o1 = point_ordering(m, c1);
    let o2 = point_ordering(m, c2);
    let mut forward = vec![0u32; m.m() as usize];
    for (a, b) in o1.points.iter().zip(&o2.points) {
        forward[*a as usize] = *b;
    }
    PointMap {
        pairs: o1
            .points
            .iter()
            .copied()
            .zip(o2.points.iter().copied())
            .collect(),
        dvals1_u: o1.dvals_u,
        dvals2_u: o2.dvals_u,
        unit: m.unit(),
        forward,
    }
}

/// Which configurations the per-request point matching is taken between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObIndexing {
    /// Both algorithms' configurations just before request i (the default).
    #[default]
    PreRequest,
    /// The first algorithm's configuration after serving request i, the
    /// second's before it; the off-by-one literal reading.
    PostServeFirst,
}

/// Tracks an algorithm's configuration along a growing sequence. Offline
/// optimum is re-planned on each prefix (its trailing configuration for the
/// prefix served so far), which keeps the construction well defined while the
/// image sequence is still being built.
enum Follower {
    Online(OnlineState),
    Offline {
        c0: Configuration,
        served: Vec<PointId>,
        cfg: Configuration,
    },
}

impl Follower {
    fn new(spec: &AlgorithmSpec, m: &MetricSpace, c0: &Configuration) -> Result<Self> {
        if spec.is_online() {
            Ok(Follower::Online(OnlineState::new(spec, m, c0)?))
        } else {
            Ok(Follower::Offline {
                c0: c0.clone(),
                served: Vec::new(),
                cfg: c0.clone(),
            })
        }
    }

    fn config(&self) -> &Configuration {
        match self {
            Follower::Online(s) => s.config(),
            Follower::Offline { cfg, .. } => cfg,
        }
    }

    fn serve(&mut self, m: &MetricSpace, r: PointId) -> Result<()> {
        match self {
            Follower::Online(s) => {
                s.step_u(m, r);
            }
            Follower::Offline { c0, served, cfg } => {
                served.push(r);
                let (_, trace) = offline_opt(m, c0, served)?;
                *cfg = trace
                    .steps
                    .last()
                    .map(|s| s.config.clone())
                    .unwrap_or_else(|| c0.clone());
            }
        }
        Ok(())
    }
}

/// Image of `seq` under the request-by-request rank-preserving bijection
/// between the configurations of `alg_a` (running on `seq`) and `alg_b`
/// (running on the image).
pub fn sequence_bijection(
    alg_a: &AlgorithmSpec,
    alg_b: &AlgorithmSpec,
    m: &MetricSpace,
    c0: &Configuration,
    seq: &[PointId],
    indexing: ObIndexing,
) -> Result<Vec<PointId>> {
    for &r in seq {
        m.check_point(r)?;
    }
    let mut a = Follower::new(alg_a, m, c0)?;
    let mut b = Follower::new(alg_b, m, c0)?;
    let mut image = Vec::with_capacity(seq.len());
    for &r in seq {
        let mapped = match indexing {
            ObIndexing::PreRequest => {
                let map = ordered_bijection(m, a.config(), b.config());
                a.serve(m, r)?;
                map.image(r)
            }
            ObIndexing::PostServeFirst => {
                let before_b = b.config().clone();
                a.serve(m, r)?;
                ordered_bijection(m, a.config(), &before_b).image(r)
            }
        };
        b.serve(m, mapped)?;
        image.push(mapped);
    }
    Ok(image)
}

/// Pointwise check `dvals1[i] <= factor * dvals2[i]`, optionally restricted to
/// ranks whose C1-point lies between two adjacent servers of C1 (always the
/// case on a cycle; on a path it means within [min server, max server]).
pub fn sorted_dmin_ratio_holds(
    m: &MetricSpace,
    c1: &Configuration,
    c2: &Configuration,
    factor: i64,
    between_servers_only: bool,
) -> bool {
    let o1 = point_ordering(m, c1);
    let o2 = point_ordering(m, c2);
    let lo = *c1.servers().first().unwrap();
    let hi = *c1.servers().last().unwrap();
    for rank in 0..o1.points.len() {
        if between_servers_only && m.is_path() {
            let p = o1.points[rank];
            if p < lo || p > hi {
                continue;
            }
        }
        if o1.dvals_u[rank] > factor * o2.dvals_u[rank] {
            return false;
        }
    }
    true
}

/// Pointwise `dvals(reference)[i] <= dvals(other)[i]` for every rank.
pub fn dvals_pointwise_le(
    m: &MetricSpace,
    reference: &Configuration,
    other: &Configuration,
) -> bool {
    let a = point_ordering(m, reference);
    let b = point_ordering(m, other);
    a.dvals_u.iter().zip(&b.dvals_u).all(|(x, y)| x <= y)
}

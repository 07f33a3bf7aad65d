//! Online and offline k-server algorithms as pure step functions, plus a
//! generic simulator producing per-request traces.

mod gadget;
mod greedy;
mod offline;
mod wfa;

pub use gadget::{gadget_thresholds, unfavourable as gadget_unfavourable, GadgetState};
pub use greedy::{
    covering_radius_u, greedy_step, kcenter_anchors, kcenter_step, nearest_server,
    uniform_configuration,
};
pub use offline::{offline_opt, offline_opt_cost_u, OptPrefixDp};
pub use wfa::{match_cost_u, WfaState};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};
use crate::rat::{rat_int, rat_str, Rat};

/// Sorted multiset of k server positions. Two configurations with the same
/// multiset compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    servers: Vec<PointId>,
}

impl Configuration {
    pub fn new(mut servers: Vec<PointId>) -> Self {
        servers.sort_unstable();
        Configuration { servers }
    }

    pub fn k(&self) -> usize {
        self.servers.len()
    }

    pub fn servers(&self) -> &[PointId] {
        &self.servers
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.servers.binary_search(&p).is_ok()
    }

    /// New configuration with the server at `idx` moved to `p`.
    pub fn with_move(&self, idx: usize, p: PointId) -> Configuration {
        let mut servers = self.servers.clone();
        servers[idx] = p;
        servers.sort_unstable();
        Configuration { servers }
    }

    pub fn validate(&self, m: &MetricSpace) -> Result<()> {
        if self.servers.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        for &s in &self.servers {
            m.check_point(s)?;
        }
        Ok(())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let servers = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad point id `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if servers.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        Ok(Configuration::new(servers))
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.servers
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// All configurations with k pairwise-distinct server positions, in
/// lexicographic order.
pub fn distinct_configurations(m: u32, k: usize) -> Vec<Configuration> {
    fn rec(m: u32, k: usize, start: u32, acc: &mut Vec<PointId>, out: &mut Vec<Configuration>) {
        if acc.len() == k {
            out.push(Configuration::new(acc.clone()));
            return;
        }
        for p in start..m {
            acc.push(p);
            rec(m, k, p + 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// All k-multiset configurations (server positions may coincide), in
/// lexicographic order.
pub fn multiset_configurations(m: u32, k: usize) -> Vec<Configuration> {
    fn rec(m: u32, k: usize, start: u32, acc: &mut Vec<PointId>, out: &mut Vec<Configuration>) {
        if acc.len() == k {
            out.push(Configuration::new(acc.clone()));
            return;
        }
        for p in start..m {
            acc.push(p);
            rec(m, k, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Distance from `p` to the nearest server of `c`, in metric units.
pub fn dmin_u(m: &MetricSpace, c: &Configuration, p: PointId) -> i64 {
    debug_assert!(!c.servers.is_empty());
    c.servers.iter().map(|&s| m.dist_u(s, p)).min().unwrap()
}

/// Distance from `p` to the nearest server of `c`.
pub fn dmin(m: &MetricSpace, c: &Configuration, p: PointId) -> Result<Rat> {
    if c.servers.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    c.validate(m)?;
    m.check_point(p)?;
    Ok(rat_int(dmin_u(m, c, p) as i128) * m.unit())
}

/// Deterministic rule selecting the serving server whenever two or more
/// servers are equidistant from the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestPoint,
    HighestPoint,
    /// On a cycle, prefer the nearest server that reaches the request moving
    /// in the direction of increasing point ids. Elsewhere it behaves like
    /// `LowestPoint`.
    Clockwise,
}

impl FromStr for TieBreak {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest" | "lowest_point" => Ok(TieBreak::LowestPoint),
            "highest" | "highest_point" => Ok(TieBreak::HighestPoint),
            "clockwise" => Ok(TieBreak::Clockwise),
            other => Err(Error::InvalidParameter(format!(
                "unknown tie rule `{other}`"
            ))),
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::LowestPoint => "lowest_point",
            TieBreak::HighestPoint => "highest_point",
            TieBreak::Clockwise => "clockwise",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub request: PointId,
    /// Index of the serving server in the pre-step sorted configuration.
    pub server: usize,
    pub cost: Rat,
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub total_cost: Rat,
}

impl Trace {
    pub fn new(steps: Vec<TraceStep>) -> Self {
        let total_cost = steps.iter().map(|s| s.cost).fold(Rat::zero(), |a, b| a + b);
        Trace { steps, total_cost }
    }

    /// CSV rows: seq_id, step, request, server, cost.
    pub fn write_csv<W: Write>(&self, seq_id: u64, w: &mut W) -> std::io::Result<()> {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                seq_id,
                i,
                s.request,
                s.server,
                rat_str(&s.cost)
            )?;
        }
        Ok(())
    }
}

/// Algorithm id plus parameters, as selected on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "alg", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Greedy {
        tie: TieBreak,
    },
    KCenter,
    Wfa,
    Gadget {
        #[serde(with = "crate::rat::rat_serde")]
        t: Rat,
        tie: TieBreak,
    },
    OfflineOpt,
}

impl AlgorithmSpec {
    pub fn parse(name: &str, tie: TieBreak, gadget_t: Option<Rat>) -> Result<Self> {
        match name {
            "greedy" => Ok(AlgorithmSpec::Greedy { tie }),
            "kcenter" | "k-center" | "k_center" => Ok(AlgorithmSpec::KCenter),
            "wfa" => Ok(AlgorithmSpec::Wfa),
            "gadget" => {
                let t = gadget_t.ok_or_else(|| {
                    Error::InvalidParameter("gadget requires a threshold t".into())
                })?;
                Ok(AlgorithmSpec::Gadget { t, tie })
            }
            "opt" | "offline_opt" => Ok(AlgorithmSpec::OfflineOpt),
            other => Err(Error::UnknownAlgorithm(other.into())),
        }
    }

    pub fn id(&self) -> String {
        match self {
            AlgorithmSpec::Greedy { tie } => format!("greedy[{tie}]"),
            AlgorithmSpec::KCenter => "kcenter".into(),
            AlgorithmSpec::Wfa => "wfa".into(),
            AlgorithmSpec::Gadget { t, tie } => format!("gadget[t={},{tie}]", rat_str(t)),
            AlgorithmSpec::OfflineOpt => "opt".into(),
        }
    }

    pub fn is_online(&self) -> bool {
        !matches!(self, AlgorithmSpec::OfflineOpt)
    }
}

/// Clonable state of a running online algorithm. Cloning is what lets the
/// profile enumerator share work across sequences with a common prefix.
#[derive(Clone)]
pub enum OnlineState {
    Greedy { cfg: Configuration, tie: TieBreak },
    KCenter { anchors: Configuration },
    Wfa(WfaState),
    Gadget(GadgetState),
}

impl OnlineState {
    pub fn new(spec: &AlgorithmSpec, m: &MetricSpace, c0: &Configuration) -> Result<Self> {
        c0.validate(m)?;
        match spec {
            AlgorithmSpec::Greedy { tie } => Ok(OnlineState::Greedy {
                cfg: c0.clone(),
                tie: *tie,
            }),
            AlgorithmSpec::KCenter => Ok(OnlineState::KCenter {
                anchors: c0.clone(),
            }),
            AlgorithmSpec::Wfa => Ok(OnlineState::Wfa(WfaState::new(m, c0)?)),
            AlgorithmSpec::Gadget { t, tie } => {
                Ok(OnlineState::Gadget(GadgetState::new(m, c0, *t, *tie)?))
            }
            AlgorithmSpec::OfflineOpt => Err(Error::InvalidParameter(
                "offline opt has no online state".into(),
            )),
        }
    }

    pub fn config(&self) -> &Configuration {
        match self {
            OnlineState::Greedy { cfg, .. } => cfg,
            OnlineState::KCenter { anchors } => anchors,
            OnlineState::Wfa(w) => w.config(),
            OnlineState::Gadget(g) => g.config(),
        }
    }

    /// Serve one request; returns (cost in units, serving server index).
    pub fn step_u(&mut self, m: &MetricSpace, r: PointId) -> (i64, usize) {
        match self {
            OnlineState::Greedy { cfg, tie } => {
                let (next, cost, idx) = greedy_step(m, cfg, r, *tie);
                *cfg = next;
                (cost, idx)
            }
            OnlineState::KCenter { anchors } => kcenter_step(m, anchors, r),
            OnlineState::Wfa(w) => w.step_u(m, r),
            OnlineState::Gadget(g) => g.step_u(m, r),
        }
    }
}

/// Run the named algorithm over `seq` and record its trace. Deterministic in
/// all arguments.
pub fn simulate(
    spec: &AlgorithmSpec,
    m: &MetricSpace,
    c0: &Configuration,
    seq: &[PointId],
) -> Result<Trace> {
    for &r in seq {
        m.check_point(r)?;
    }
    if let AlgorithmSpec::OfflineOpt = spec {
        let (_, trace) = offline_opt(m, c0, seq)?;
        return Ok(trace);
    }
    let mut state = OnlineState::new(spec, m, c0)?;
    let mut steps = Vec::with_capacity(seq.len());
    for &r in seq {
        let (cost_u, server) = state.step_u(m, r);
        steps.push(TraceStep {
            request: r,
            server,
            cost: rat_int(cost_u as i128) * m.unit(),
            config: state.config().clone(),
        });
    }
    Ok(Trace::new(steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn path(m: u32) -> MetricSpace {
        MetricSpace::path(m, rat_int(1)).unwrap()
    }

    #[test]
    fn configuration_is_canonical() {
        let a = Configuration::new(vec![4, 0]);
        let b = Configuration::new(vec![0, 4]);
        assert_eq!(a, b);
        assert_eq!(a.servers(), &[0, 4]);
        assert!(a.contains(4));
        assert!(!a.contains(2));
        let moved = a.with_move(1, 3);
        assert_eq!(moved.servers(), &[0, 3]);
    }

    #[test]
    fn dmin_examples() {
        // unit line with 5 points, uniform configuration {0.25, 0.75}
        let unit_line = MetricSpace::path(5, rat(1, 4)).unwrap();
        let uniform = Configuration::new(vec![1, 3]);
        let far: Rat = (0..5)
            .map(|p| dmin(&unit_line, &uniform, p).unwrap())
            .max()
            .unwrap();
        assert_eq!(far, rat(1, 4));

        let m = path(5);
        let c = Configuration::new(vec![0, 4]);
        assert_eq!(dmin(&m, &c, 2).unwrap(), rat_int(2));
        assert_eq!(dmin(&m, &c, 4).unwrap(), rat_int(0));
        assert!(dmin(&m, &Configuration { servers: vec![] }, 1).is_err());
    }

    #[test]
    fn dmin_never_grows_when_adding_servers() {
        let m = MetricSpace::cycle(8, rat_int(1)).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                for extra in 0..8 {
                    let c = Configuration::new(vec![a, b]);
                    let c_bigger = Configuration::new(vec![a, b, extra]);
                    for q in 0..8 {
                        assert!(dmin_u(&m, &c_bigger, q) <= dmin_u(&m, &c, q));
                    }
                }
            }
        }
    }

    #[test]
    fn simulate_greedy_on_cycle() {
        let m = MetricSpace::cycle(6, rat_int(1)).unwrap();
        let c0 = Configuration::new(vec![0, 3]);
        let spec = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let trace = simulate(&spec, &m, &c0, &[1, 4, 2]).unwrap();
        assert_eq!(trace.total_cost, rat_int(3));
        assert_eq!(trace.steps[0].cost, rat_int(1));
        assert_eq!(trace.steps[1].cost, rat_int(1));
        assert_eq!(trace.steps[2].cost, rat_int(1));
    }

    #[test]
    fn simulate_empty_sequence_costs_zero() {
        let m = path(4);
        let c0 = Configuration::new(vec![0, 3]);
        let spec = AlgorithmSpec::Greedy {
            tie: TieBreak::LowestPoint,
        };
        let trace = simulate(&spec, &m, &c0, &[]).unwrap();
        assert_eq!(trace.total_cost, Rat::zero());
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn kcenter_trace_returns_to_anchors() {
        let m = MetricSpace::cycle(8, rat_int(1)).unwrap();
        let anchors = Configuration::new(vec![1, 5]);
        let trace = simulate(&AlgorithmSpec::KCenter, &m, &anchors, &[3, 0, 7]).unwrap();
        for step in &trace.steps {
            assert_eq!(step.config, anchors);
        }
        assert_eq!(trace.steps[0].cost, rat_int(4)); // 2 * d({1,5}, 3)
    }

    #[test]
    fn unknown_algorithm_is_rejected() {
        assert!(matches!(
            AlgorithmSpec::parse("mystery", TieBreak::LowestPoint, None),
            Err(Error::UnknownAlgorithm(_))
        ));
    }
}

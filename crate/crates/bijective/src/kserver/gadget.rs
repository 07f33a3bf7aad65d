//! A 2-server line algorithm that shadows greedy but, from an unfavourable
//! configuration, plays a fixed 3-request deviation designed to beat greedy
//! on average. The block always ends by re-synchronizing: serving the third
//! request consists of moving both servers to wherever greedy would stand
//! after it, paying the cheapest matching. In between, a missed second
//! window is served greedily from the deviation's own configuration.

use super::wfa::serving_index_for;
use super::{greedy_step, match_cost_u, Configuration, TieBreak};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};
use crate::rat::{rat, Rat};

/// (x1, x2) with x1 <= t/3 and 2t/3 <= x2 <= t, positions on the line.
pub fn unfavourable(m: &MetricSpace, cfg: &Configuration, t: Rat) -> bool {
    let x1 = m.path_position(cfg.servers()[0]);
    let x2 = m.path_position(cfg.servers()[1]);
    x1 * rat(3, 1) <= t && rat(2, 3) * t <= x2 && x2 <= t
}

/// Deviation window endpoints for a given unfavourable (x1, x2).
pub fn gadget_thresholds(x1: Rat, x2: Rat) -> (Rat, Rat) {
    let x3 = rat(5, 8) * x2 + rat(3, 8) * x1;
    let x4 = rat(10, 1) * x2;
    (x3, x4)
}

#[derive(Clone)]
enum Phase {
    Tracking,
    /// Served the first deviation request; `success` marks whether the
    /// deviation window was hit.
    AfterFirst {
        success: bool,
        x2_id: PointId,
        x4: Rat,
    },
    /// One request away from re-synchronizing with greedy.
    AfterSecond,
}

#[derive(Clone)]
pub struct GadgetState {
    cfg: Configuration,
    greedy_cfg: Configuration,
    tie: TieBreak,
    t: Rat,
    phase: Phase,
}

impl GadgetState {
    pub fn new(m: &MetricSpace, c0: &Configuration, t: Rat, tie: TieBreak) -> Result<Self> {
        if !m.is_path() {
            return Err(Error::InvalidParameter(
                "gadget runs on a path metric only".into(),
            ));
        }
        if c0.k() != 2 {
            return Err(Error::InvalidParameter("gadget requires k = 2".into()));
        }
        if t <= rat(0, 1) || t >= rat(23, 80) {
            return Err(Error::InvalidParameter(
                "gadget threshold t must lie in (0, 23/80)".into(),
            ));
        }
        Ok(GadgetState {
            cfg: c0.clone(),
            greedy_cfg: c0.clone(),
            tie,
            t,
            phase: Phase::Tracking,
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.cfg
    }

    pub fn step_u(&mut self, m: &MetricSpace, r: PointId) -> (i64, usize) {
        // greedy's shadow always advances
        let (greedy_next, _, _) = greedy_step(m, &self.greedy_cfg, r, self.tie);
        let (cost, server, next_phase) = match self.phase.clone() {
            Phase::Tracking => {
                if unfavourable(m, &self.cfg, self.t) {
                    let x1_id = self.cfg.servers()[0];
                    let x2_id = self.cfg.servers()[1];
                    let x1 = m.path_position(x1_id);
                    let x2 = m.path_position(x2_id);
                    let (x3, x4) = gadget_thresholds(x1, x2);
                    let pos = m.path_position(r);
                    let mid = (x1 + x2) / rat(2, 1);
                    if mid <= pos && pos <= x3 {
                        // deviate: the left server takes a request greedy
                        // would hand to the right server
                        let cost = m.dist_u(x1_id, r);
                        self.cfg = self.cfg.with_move(0, r);
                        (
                            cost,
                            0,
                            Phase::AfterFirst {
                                success: true,
                                x2_id,
                                x4,
                            },
                        )
                    } else {
                        let (c, idx) = self.mirror_greedy(m, &greedy_next, r);
                        (
                            c,
                            idx,
                            Phase::AfterFirst {
                                success: false,
                                x2_id,
                                x4,
                            },
                        )
                    }
                } else {
                    let (c, idx) = self.mirror_greedy(m, &greedy_next, r);
                    (c, idx, Phase::Tracking)
                }
            }
            Phase::AfterFirst { success, x2_id, x4 } => {
                if success && m.path_position(r) >= x4 {
                    let idx = self.cfg.servers().iter().position(|&s| s == x2_id).unwrap();
                    let cost = m.dist_u(x2_id, r);
                    self.cfg = self.cfg.with_move(idx, r);
                    (cost, idx, Phase::AfterSecond)
                } else {
                    // missed window: serve from our own configuration; the
                    // block-ending resynchronization happens on the next
                    // request
                    let (next, cost, idx) = greedy_step(m, &self.cfg, r, self.tie);
                    self.cfg = next;
                    (cost, idx, Phase::AfterSecond)
                }
            }
            Phase::AfterSecond => {
                let (c, idx) = self.mirror_greedy(m, &greedy_next, r);
                (c, idx, Phase::Tracking)
            }
        };
        self.greedy_cfg = greedy_next;
        self.phase = next_phase;
        (cost, server)
    }

    /// Place both servers where greedy has them. When the configurations
    /// already agree this is exactly greedy's own move.
    fn mirror_greedy(
        &mut self,
        m: &MetricSpace,
        greedy_next: &Configuration,
        r: PointId,
    ) -> (i64, usize) {
        let cost = match_cost_u(m, &self.cfg, greedy_next);
        let idx = serving_index_for(m, &self.cfg, greedy_next, r, cost);
        self.cfg = greedy_next.clone();
        (cost, idx)
    }
}

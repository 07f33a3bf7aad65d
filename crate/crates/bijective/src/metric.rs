//! Discrete metric spaces: uniformly spaced paths and cycles, spiders (rays
//! joined at a centre), and weighted stars (one leaf per page at half the
//! eviction cost).
//!
//! Every pairwise distance is an integer multiple of a common rational `unit`
//! (the gcd of all edge lengths), so hot loops can run on `i64` unit counts
//! while staying exact.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{parse_rat, rat_div_exact, rat_gcd, rat_int, rat_str, Rat};

pub type PointId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Path,
    Cycle,
    Spider,
    WeightedStar,
}

/// Declarative description, readable from JSON:
/// `{"kind":"cycle","m":6,"delta":"1"}` or `{"kind":"spider","rays":[[3,"1"],[3,"1"]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Path {
        m: u32,
        #[serde(default = "default_delta")]
        delta: String,
    },
    Cycle {
        m: u32,
        #[serde(default = "default_delta")]
        delta: String,
    },
    /// Rays given as (number of points beyond the centre, per-edge length).
    Spider { rays: Vec<(u32, String)> },
    /// One leaf per page at the given distance from the centre.
    WeightedStar { half_costs: Vec<String> },
}

fn default_delta() -> String {
    "1".to_owned()
}

impl MetricSpec {
    pub fn build(&self) -> Result<MetricSpace> {
        MetricSpace::build(self)
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    /// Shorthand forms: `path:5`, `path:5:1/4`, `cycle:6`, `spider:3,3,3`,
    /// `spider:3,3:1/2`, `star:1,5`. Inline JSON is accepted as well.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s)
                .map_err(|e| Error::InvalidMetric(format!("bad metric JSON: {e}")));
        }
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or("");
        let body = parts
            .next()
            .ok_or_else(|| Error::InvalidMetric(format!("missing size in `{s}`")))?;
        let delta = parts.next().map(str::to_owned);
        if parts.next().is_some() {
            return Err(Error::InvalidMetric(format!("too many `:` in `{s}`")));
        }
        let delta = delta.unwrap_or_else(default_delta);
        let parse_m = |b: &str| -> Result<u32> {
            b.parse()
                .map_err(|_| Error::InvalidMetric(format!("bad point count `{b}`")))
        };
        match kind {
            "path" => Ok(MetricSpec::Path {
                m: parse_m(body)?,
                delta,
            }),
            "cycle" => Ok(MetricSpec::Cycle {
                m: parse_m(body)?,
                delta,
            }),
            "spider" => {
                let rays = body
                    .split(',')
                    .map(|c| Ok((parse_m(c)?, delta.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(MetricSpec::Spider { rays })
            }
            "star" => {
                let half_costs = body.split(',').map(str::to_owned).collect();
                Ok(MetricSpec::WeightedStar { half_costs })
            }
            other => Err(Error::InvalidMetric(format!(
                "unknown metric kind `{other}`"
            ))),
        }
    }
}

/// One ray of a spider or star: the centre is not included in `points`.
#[derive(Debug, Clone)]
pub struct Ray {
    pub edge_len: Rat,
    /// Point ids ordered from the centre outward.
    pub points: Vec<PointId>,
}

#[derive(Debug, Clone)]
pub struct MetricSpace {
    kind: MetricKind,
    m: u32,
    /// Path/cycle spacing; for spiders this is the gcd of the ray edge lengths.
    unit: Rat,
    delta: Rat,
    rays: Vec<Ray>,
    /// Spider/star only: ray index per point (centre maps to u32::MAX).
    point_ray: Vec<u32>,
    point_depth: Vec<u32>,
    centre_dist_u: Vec<i64>,
    id: String,
}

impl MetricSpace {
    pub fn build(spec: &MetricSpec) -> Result<Self> {
        match spec {
            MetricSpec::Path { m, delta } => Self::path(*m, parse_rat(delta)?),
            MetricSpec::Cycle { m, delta } => Self::cycle(*m, parse_rat(delta)?),
            MetricSpec::Spider { rays } => {
                let rays = rays
                    .iter()
                    .map(|(n, l)| Ok((*n, parse_rat(l)?)))
                    .collect::<Result<Vec<_>>>()?;
                Self::spider(&rays)
            }
            MetricSpec::WeightedStar { half_costs } => {
                let w = half_costs
                    .iter()
                    .map(|c| parse_rat(c))
                    .collect::<Result<Vec<_>>>()?;
                Self::weighted_star(&w)
            }
        }
    }

    pub fn path(m: u32, delta: Rat) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidMetric(format!("path needs m >= 2, got {m}")));
        }
        if delta <= Rat::zero() {
            return Err(Error::InvalidMetric("delta must be positive".into()));
        }
        Ok(MetricSpace {
            kind: MetricKind::Path,
            m,
            unit: delta,
            delta,
            rays: Vec::new(),
            point_ray: Vec::new(),
            point_depth: Vec::new(),
            centre_dist_u: Vec::new(),
            id: format!("path:{m}:{}", rat_str(&delta)),
        })
    }

    pub fn cycle(m: u32, delta: Rat) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidMetric(format!("cycle needs m >= 3, got {m}")));
        }
        if delta <= Rat::zero() {
            return Err(Error::InvalidMetric("delta must be positive".into()));
        }
        Ok(MetricSpace {
            kind: MetricKind::Cycle,
            m,
            unit: delta,
            delta,
            rays: Vec::new(),
            point_ray: Vec::new(),
            point_depth: Vec::new(),
            centre_dist_u: Vec::new(),
            id: format!("cycle:{m}:{}", rat_str(&delta)),
        })
    }

    /// Rays given as (point count beyond the centre, per-edge length).
    /// The centre gets id 0 and rays are numbered outward, ray by ray.
    pub fn spider(rays: &[(u32, Rat)]) -> Result<Self> {
        Self::spider_like(MetricKind::Spider, rays)
    }

    /// Weighted star: one single-point ray per page, edge length = half the
    /// eviction cost. Requests to the centre are disallowed on this kind.
    pub fn weighted_star(half_costs: &[Rat]) -> Result<Self> {
        let rays: Vec<(u32, Rat)> = half_costs.iter().map(|w| (1, *w)).collect();
        Self::spider_like(MetricKind::WeightedStar, &rays)
    }

    fn spider_like(kind: MetricKind, rays: &[(u32, Rat)]) -> Result<Self> {
        if rays.is_empty() {
            return Err(Error::InvalidMetric("spider needs at least one ray".into()));
        }
        let mut unit = Rat::zero();
        for &(count, len) in rays {
            if count == 0 {
                return Err(Error::InvalidMetric("spider ray must be nonempty".into()));
            }
            if len <= Rat::zero() {
                return Err(Error::InvalidMetric("edge lengths must be positive".into()));
            }
            unit = rat_gcd(&unit, &len);
        }
        let m_total: u64 = 1 + rays.iter().map(|&(c, _)| c as u64).sum::<u64>();
        let m =
            u32::try_from(m_total).map_err(|_| Error::InvalidMetric("spider too large".into()))?;

        let mut point_ray = vec![u32::MAX; m as usize];
        let mut point_depth = vec![0u32; m as usize];
        let mut centre_dist_u = vec![0i64; m as usize];
        let mut built_rays = Vec::with_capacity(rays.len());
        let mut next: PointId = 1;
        for (ri, &(count, len)) in rays.iter().enumerate() {
            let step_u = rat_div_exact(&len, &unit);
            let mut points = Vec::with_capacity(count as usize);
            for depth in 1..=count {
                let p = next;
                next += 1;
                point_ray[p as usize] = ri as u32;
                point_depth[p as usize] = depth;
                centre_dist_u[p as usize] = step_u as i64 * depth as i64;
                points.push(p);
            }
            built_rays.push(Ray {
                edge_len: len,
                points,
            });
        }
        let id = match kind {
            MetricKind::WeightedStar => format!(
                "star:{}",
                rays.iter()
                    .map(|(_, l)| rat_str(l))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            _ => format!(
                "spider:{}",
                rays.iter()
                    .map(|(c, l)| format!("{c}x{}", rat_str(l)))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        };
        Ok(MetricSpace {
            kind,
            m,
            unit,
            delta: unit,
            rays: built_rays,
            point_ray,
            point_depth,
            centre_dist_u,
            id,
        })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Path/cycle spacing. For spiders this is the gcd of ray edge lengths.
    pub fn delta(&self) -> Rat {
        self.delta
    }

    /// Positive rational such that every pairwise distance is an integer
    /// multiple of it.
    pub fn unit(&self) -> Rat {
        self.unit
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_path(&self) -> bool {
        self.kind == MetricKind::Path
    }

    pub fn is_cycle(&self) -> bool {
        self.kind == MetricKind::Cycle
    }

    pub fn is_spider_like(&self) -> bool {
        matches!(self.kind, MetricKind::Spider | MetricKind::WeightedStar)
    }

    pub fn centre(&self) -> Option<PointId> {
        self.is_spider_like().then_some(0)
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    /// (ray id, points outward from the centre, per-edge length) rows.
    pub fn ray_structure(&self) -> Vec<(u32, Vec<PointId>, Rat)> {
        self.rays
            .iter()
            .enumerate()
            .map(|(i, r)| (i as u32, r.points.clone(), r.edge_len))
            .collect()
    }

    /// Spider/star: (ray index, depth from the centre) of a non-centre point.
    pub fn ray_of(&self, p: PointId) -> Option<(u32, u32)> {
        if !self.is_spider_like() || p == 0 || p >= self.m {
            return None;
        }
        Some((self.point_ray[p as usize], self.point_depth[p as usize]))
    }

    pub fn check_point(&self, p: PointId) -> Result<()> {
        if p < self.m {
            Ok(())
        } else {
            Err(Error::InvalidPoint(p))
        }
    }

    /// Points requests may land on: all of them, except that weighted stars
    /// exclude the centre.
    pub fn requestable_points(&self) -> Vec<PointId> {
        let start = if self.kind == MetricKind::WeightedStar {
            1
        } else {
            0
        };
        (start..self.m).collect()
    }

    pub fn requestable_count(&self) -> u32 {
        if self.kind == MetricKind::WeightedStar {
            self.m - 1
        } else {
            self.m
        }
    }

    /// Distance in units (multiples of `self.unit()`).
    pub fn dist_u(&self, x: PointId, y: PointId) -> i64 {
        debug_assert!(x < self.m && y < self.m);
        match self.kind {
            MetricKind::Path => (x as i64 - y as i64).abs(),
            MetricKind::Cycle => {
                let d = (x as i64 - y as i64).abs();
                d.min(self.m as i64 - d)
            }
            MetricKind::Spider | MetricKind::WeightedStar => {
                if x == y {
                    0
                } else if self.point_ray[x as usize] == self.point_ray[y as usize] {
                    (self.centre_dist_u[x as usize] - self.centre_dist_u[y as usize]).abs()
                } else {
                    // rays only meet at the centre (centre itself has dist 0)
                    self.centre_dist_u[x as usize] + self.centre_dist_u[y as usize]
                }
            }
        }
    }

    pub fn distance(&self, x: PointId, y: PointId) -> Result<Rat> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(rat_int(self.dist_u(x, y) as i128) * self.unit)
    }

    pub fn diameter_u(&self) -> i64 {
        match self.kind {
            MetricKind::Path => self.m as i64 - 1,
            MetricKind::Cycle => self.m as i64 / 2,
            MetricKind::Spider | MetricKind::WeightedStar => {
                let mut lens: Vec<i64> = self
                    .rays
                    .iter()
                    .map(|r| {
                        *self
                            .centre_dist_u
                            .get(*r.points.last().unwrap() as usize)
                            .unwrap()
                    })
                    .collect();
                lens.sort_unstable_by(|a, b| b.cmp(a));
                if lens.len() >= 2 {
                    lens[0] + lens[1]
                } else {
                    lens[0]
                }
            }
        }
    }

    pub fn diameter(&self) -> Rat {
        rat_int(self.diameter_u() as i128) * self.unit
    }

    /// Position of a point along a path, measured from point 0. Used by the
    /// line-specific algorithms that reason about [0, 1] coordinates.
    pub fn path_position(&self, p: PointId) -> Rat {
        debug_assert!(self.is_path());
        rat_int(p as i128) * self.delta
    }
}

impl fmt::Display for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn path(m: u32) -> MetricSpace {
        MetricSpace::path(m, rat_int(1)).unwrap()
    }

    fn cycle(m: u32) -> MetricSpace {
        MetricSpace::cycle(m, rat_int(1)).unwrap()
    }

    #[test]
    fn path_distance_is_id_difference() {
        let m = path(5);
        assert_eq!(m.distance(0, 4).unwrap(), rat_int(4));
        assert_eq!(m.distance(1, 3).unwrap(), rat_int(2));
        assert_eq!(m.distance(3, 1).unwrap(), rat_int(2));
    }

    #[test]
    fn cycle_wraps_around() {
        let m = cycle(4);
        assert_eq!(m.distance(0, 3).unwrap(), rat_int(1));
        let m6 = cycle(6);
        assert_eq!(m6.distance(0, 4).unwrap(), rat_int(2));
    }

    #[test]
    fn spider_goes_through_centre() {
        let m = MetricSpace::spider(&[(3, rat_int(1)), (3, rat_int(1))]).unwrap();
        assert_eq!(m.m(), 7);
        let tip_a = 3;
        let tip_b = 6;
        assert_eq!(m.distance(tip_a, tip_b).unwrap(), rat_int(6));
        assert_eq!(m.distance(0, tip_a).unwrap(), rat_int(3));
        assert_eq!(m.distance(1, 2).unwrap(), rat_int(1));
    }

    #[test]
    fn weighted_star_sums_ray_lengths() {
        let m = MetricSpace::weighted_star(&[rat_int(1), rat_int(5)]).unwrap();
        assert_eq!(m.distance(1, 2).unwrap(), rat_int(6));
        assert_eq!(m.requestable_points(), vec![1, 2]);
        // unit is the gcd of the leg lengths
        assert_eq!(m.unit(), rat_int(1));
        let m2 = MetricSpace::weighted_star(&[rat(1, 2), rat_int(2)]).unwrap();
        assert_eq!(m2.unit(), rat(1, 2));
        assert_eq!(m2.dist_u(1, 2), 5);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(MetricSpace::path(1, rat_int(1)).is_err());
        assert!(MetricSpace::path(5, rat_int(0)).is_err());
        assert!(MetricSpace::path(5, rat(-1, 2)).is_err());
        assert!(MetricSpace::spider(&[]).is_err());
        assert!(MetricSpace::spider(&[(0, rat_int(1))]).is_err());
        assert!(MetricSpace::weighted_star(&[rat_int(0)]).is_err());
        assert!(path(5).distance(0, 5).is_err());
    }

    #[test]
    fn adjacent_points_are_delta_apart() {
        for m in [path(7), cycle(7)] {
            for p in 0..6 {
                assert_eq!(m.distance(p, p + 1).unwrap(), rat_int(1));
            }
        }
        let fine = MetricSpace::path(5, rat(1, 4)).unwrap();
        assert_eq!(fine.distance(2, 3).unwrap(), rat(1, 4));
    }

    #[test]
    fn triangle_inequality_small_spaces() {
        let spaces = vec![
            path(6),
            cycle(6),
            cycle(7),
            MetricSpace::spider(&[(2, rat_int(1)), (3, rat(1, 2)), (1, rat_int(2))]).unwrap(),
            MetricSpace::weighted_star(&[rat_int(1), rat_int(5), rat(3, 2)]).unwrap(),
        ];
        for sp in spaces {
            let m = sp.m();
            for x in 0..m {
                for y in 0..m {
                    let dxy = sp.dist_u(x, y);
                    assert_eq!(dxy, sp.dist_u(y, x));
                    assert_eq!(dxy == 0, x == y);
                    assert!(dxy >= 0);
                    for z in 0..m {
                        assert!(sp.dist_u(x, z) <= sp.dist_u(x, y) + sp.dist_u(y, z));
                    }
                }
            }
        }
    }

    #[test]
    fn cycle_distance_at_most_half_circumference() {
        for m in 3..=12 {
            let sp = cycle(m);
            for x in 0..m {
                for y in 0..m {
                    assert!(sp.dist_u(x, y) as u32 * 2 <= m);
                }
            }
        }
    }

    #[test]
    fn spec_roundtrip_and_shorthand() {
        let spec: MetricSpec =
            serde_json::from_str(r#"{"kind":"cycle","m":6,"delta":"1"}"#).unwrap();
        let m = spec.build().unwrap();
        assert!(m.is_cycle());
        assert_eq!(m.m(), 6);

        let spec: MetricSpec =
            serde_json::from_str(r#"{"kind":"spider","rays":[[3,"1"],[3,"1"]]}"#).unwrap();
        assert_eq!(spec.build().unwrap().m(), 7);

        let m: MetricSpec = "path:5:1/4".parse().unwrap();
        assert_eq!(m.build().unwrap().delta(), rat(1, 4));
        let m: MetricSpec = "spider:3,3,3".parse().unwrap();
        assert_eq!(m.build().unwrap().m(), 10);
        let m: MetricSpec = "star:1,5".parse().unwrap();
        assert_eq!(m.build().unwrap().requestable_count(), 2);
        assert!("blob:4".parse::<MetricSpec>().is_err());
    }

    #[test]
    fn diameter_matches_brute_force() {
        let spaces = vec![
            path(9),
            cycle(9),
            cycle(8),
            MetricSpace::spider(&[(3, rat_int(1)), (2, rat_int(2)), (4, rat_int(1))]).unwrap(),
        ];
        for sp in spaces {
            let mut best = 0;
            for x in 0..sp.m() {
                for y in 0..sp.m() {
                    best = best.max(sp.dist_u(x, y));
                }
            }
            assert_eq!(best, sp.diameter_u(), "diameter of {sp}");
        }
    }
}

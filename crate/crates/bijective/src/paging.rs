//! Weighted paging as k-server on a weighted star: one leaf per page at half
//! its eviction cost. A fault moves a server from the evicted page's leaf to
//! the requested leaf, so it costs c_evicted/2 + c_requested/2.

use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::analysis::profile::CostProfile;
use crate::error::{Error, Result};
use crate::kserver::Configuration;
use crate::metric::{MetricSpace, PointId};
use crate::rat::{parse_rat, rat, Rat};

pub type PageId = u32;

/// JSON form: {"costs":["1","1","4"],"k":2,"initial_cache":[0,1]}.
/// `initial_cache` defaults to the k cheapest pages (lowest id on ties); its
/// order seeds the residency and recency ages used by FIFO and LRU.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PagingSpec {
    pub costs: Vec<String>,
    pub k: usize,
    #[serde(default)]
    pub initial_cache: Option<Vec<PageId>>,
}

impl PagingSpec {
    pub fn build(&self) -> Result<(PagingInstance, Vec<PageId>)> {
        let costs = self
            .costs
            .iter()
            .map(|c| parse_rat(c))
            .collect::<Result<Vec<_>>>()?;
        let inst = PagingInstance::new(costs, self.k)?;
        let cache = match &self.initial_cache {
            Some(c) => {
                inst.validate_cache(c)?;
                c.clone()
            }
            None => inst.default_initial_cache(),
        };
        Ok((inst, cache))
    }
}

impl FromStr for PagingSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s.trim())
            .map_err(|e| Error::InvalidParameter(format!("bad paging JSON: {e}")))
    }
}

#[derive(Debug, Clone)]
pub struct PagingInstance {
    costs: Vec<Rat>,
    k: usize,
}

impl PagingInstance {
    pub fn new(costs: Vec<Rat>, k: usize) -> Result<Self> {
        if k == 0 || k >= costs.len() {
            return Err(Error::InvalidParameter(format!(
                "cache size {k} must satisfy 0 < k < {} pages",
                costs.len()
            )));
        }
        if costs.iter().any(|c| *c <= Rat::zero()) {
            return Err(Error::InvalidParameter(
                "eviction costs must be positive".into(),
            ));
        }
        Ok(PagingInstance { costs, k })
    }

    pub fn pages(&self) -> usize {
        self.costs.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cost(&self, page: PageId) -> Rat {
        self.costs[page as usize]
    }

    pub fn validate_cache(&self, cache: &[PageId]) -> Result<()> {
        if cache.len() != self.k {
            return Err(Error::WrongConfigurationSize {
                got: cache.len(),
                expected: self.k,
            });
        }
        let mut sorted = cache.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.k || sorted.iter().any(|&p| p as usize >= self.pages()) {
            return Err(Error::InvalidParameter(format!(
                "bad initial cache {cache:?}"
            )));
        }
        Ok(())
    }

    /// The k cheapest pages, ids ascending on equal costs.
    pub fn default_initial_cache(&self) -> Vec<PageId> {
        let mut order: Vec<PageId> = (0..self.pages() as u32).collect();
        order.sort_by_key(|&p| (self.costs[p as usize], p));
        let mut cache = order[..self.k].to_vec();
        cache.sort_unstable();
        cache
    }

    /// Leaf point of a page on the reduced star (the centre is point 0).
    pub fn leaf(&self, page: PageId) -> PointId {
        page + 1
    }

    pub fn page_of_leaf(&self, leaf: PointId) -> PageId {
        leaf - 1
    }

    /// The reduced star plus the server configuration for an initial cache.
    pub fn to_star(&self, cache: &[PageId]) -> Result<(MetricSpace, Configuration)> {
        self.validate_cache(cache)?;
        let half: Vec<Rat> = self.costs.iter().map(|c| *c * rat(1, 2)).collect();
        let m = MetricSpace::weighted_star(&half)?;
        let cfg = Configuration::new(cache.iter().map(|&p| self.leaf(p)).collect());
        Ok((m, cfg))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PagingPolicy {
    /// On a fault, evict a cached page of smallest cost (lowest id on ties).
    GreedyMinCost,
    /// Evict a cached page of largest cost (lowest id on ties).
    MaxCost,
    /// Evict the page resident longest.
    Fifo,
    /// Evict the least recently used page.
    Lru,
}

impl FromStr for PagingPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy_min_cost" | "greedy" => Ok(PagingPolicy::GreedyMinCost),
            "max_cost" => Ok(PagingPolicy::MaxCost),
            "fifo" => Ok(PagingPolicy::Fifo),
            "lru" => Ok(PagingPolicy::Lru),
            other => Err(Error::UnknownAlgorithm(other.into())),
        }
    }
}

impl PagingPolicy {
    pub fn id(&self) -> &'static str {
        match self {
            PagingPolicy::GreedyMinCost => "greedy_min_cost",
            PagingPolicy::MaxCost => "max_cost",
            PagingPolicy::Fifo => "fifo",
            PagingPolicy::Lru => "lru",
        }
    }

    pub fn all() -> [PagingPolicy; 4] {
        [
            PagingPolicy::GreedyMinCost,
            PagingPolicy::MaxCost,
            PagingPolicy::Fifo,
            PagingPolicy::Lru,
        ]
    }
}

#[derive(Debug, Clone)]
struct Slot {
    page: PageId,
    entered: u64,
    last_used: u64,
}

#[derive(Debug, Clone)]
pub struct PagingState {
    slots: Vec<Slot>,
    clock: u64,
}

impl PagingState {
    pub fn new(cache: &[PageId]) -> Self {
        let slots = cache
            .iter()
            .enumerate()
            .map(|(i, &page)| Slot {
                page,
                entered: i as u64,
                last_used: i as u64,
            })
            .collect::<Vec<_>>();
        PagingState {
            clock: slots.len() as u64,
            slots,
        }
    }

    pub fn cached(&self) -> Vec<PageId> {
        let mut pages: Vec<PageId> = self.slots.iter().map(|s| s.page).collect();
        pages.sort_unstable();
        pages
    }
}

/// One request: a hit refreshes recency at no cost; a fault evicts per policy
/// and pays c_evicted/2 + c_requested/2. Cost ties among pages break to the
/// lowest page id.
pub fn paging_step(
    inst: &PagingInstance,
    policy: PagingPolicy,
    state: &mut PagingState,
    request: PageId,
) -> Rat {
    state.clock += 1;
    if let Some(slot) = state.slots.iter_mut().find(|s| s.page == request) {
        slot.last_used = state.clock;
        return Rat::zero();
    }
    let victim_index = match policy {
        PagingPolicy::GreedyMinCost => (0..state.slots.len())
            .min_by_key(|&i| (inst.cost(state.slots[i].page), state.slots[i].page))
            .unwrap(),
        PagingPolicy::MaxCost => (0..state.slots.len())
            .min_by_key(|&i| {
                let s = &state.slots[i];
                (std::cmp::Reverse(inst.cost(s.page)), s.page)
            })
            .unwrap(),
        PagingPolicy::Fifo => (0..state.slots.len())
            .min_by_key(|&i| state.slots[i].entered)
            .unwrap(),
        PagingPolicy::Lru => (0..state.slots.len())
            .min_by_key(|&i| state.slots[i].last_used)
            .unwrap(),
    };
    let victim = state.slots[victim_index].page;
    state.slots[victim_index] = Slot {
        page: request,
        entered: state.clock,
        last_used: state.clock,
    };
    (inst.cost(victim) + inst.cost(request)) * rat(1, 2)
}

pub fn simulate_paging(
    inst: &PagingInstance,
    policy: PagingPolicy,
    cache: &[PageId],
    seq: &[PageId],
) -> Result<Rat> {
    inst.validate_cache(cache)?;
    let mut state = PagingState::new(cache);
    let mut total = Rat::zero();
    for &r in seq {
        if r as usize >= inst.pages() {
            return Err(Error::InvalidPoint(r));
        }
        total += paging_step(inst, policy, &mut state, r);
    }
    Ok(total)
}

/// Offline optimum through the reduced star's configuration DP.
pub fn offline_opt_paging(inst: &PagingInstance, cache: &[PageId], seq: &[PageId]) -> Result<Rat> {
    let (m, c0) = inst.to_star(cache)?;
    let leaf_seq: Vec<PointId> = seq.iter().map(|&p| inst.leaf(p)).collect();
    let (cost, _) = crate::kserver::offline_opt(&m, &c0, &leaf_seq)?;
    Ok(cost)
}

/// Exact profile of a policy over all pages^n request sequences.
pub fn paging_profile(
    inst: &PagingInstance,
    policy: PagingPolicy,
    cache: &[PageId],
    n: u32,
    budget: u128,
) -> Result<CostProfile> {
    inst.validate_cache(cache)?;
    let total = (inst.pages() as u128).pow(n);
    if total > budget {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let mut acc: std::collections::BTreeMap<Rat, u128> = std::collections::BTreeMap::new();
    fn rec(
        inst: &PagingInstance,
        policy: PagingPolicy,
        state: &PagingState,
        cost: Rat,
        depth: u32,
        acc: &mut std::collections::BTreeMap<Rat, u128>,
    ) {
        if depth == 0 {
            *acc.entry(cost).or_insert(0) += 1;
            return;
        }
        for page in 0..inst.pages() as u32 {
            let mut child = state.clone();
            let step = paging_step(inst, policy, &mut child, page);
            rec(inst, policy, &child, cost + step, depth - 1, acc);
        }
    }
    rec(
        inst,
        policy,
        &PagingState::new(cache),
        Rat::zero(),
        n,
        &mut acc,
    );
    let (star, c0) = inst.to_star(cache)?;
    Ok(CostProfile::from_value_counts(
        policy.id().to_owned(),
        star.id().to_owned(),
        c0,
        n,
        true,
        acc,
    ))
}

/// Offline-optimum profile over all pages^n sequences, via the reduced star.
pub fn paging_opt_profile(
    inst: &PagingInstance,
    cache: &[PageId],
    n: u32,
    budget: u128,
) -> Result<CostProfile> {
    let (m, c0) = inst.to_star(cache)?;
    crate::analysis::profile::cost_profile(
        &crate::kserver::AlgorithmSpec::OfflineOpt,
        &m,
        &c0,
        n,
        budget,
    )
}

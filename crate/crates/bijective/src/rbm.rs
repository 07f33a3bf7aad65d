//! Reordering buffer management: coloured items stream through a size-k
//! buffer; items matching the active colour are served as they appear, and
//! the station switches colour only when it can make no progress otherwise.
//! Cost is the number of colour switches; the first activation counts as a
//! switch, and after the input ends the buffer is drained (one switch per
//! remaining colour block).

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::profile::CostProfile;
use crate::error::{Error, Result};
use crate::kserver::Configuration;
use crate::rat::rat_int;

pub type Colour = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbmPolicy {
    /// Switch to a colour with the most buffered items; ties prefer the
    /// waiting item's colour when it is among them, else the lowest id.
    /// A fixed-id tie is beaten from a full mixed buffer, so the waiting
    /// item must take part in the tie-break.
    GreedyMaxBlock,
    /// Switch to a colour with the fewest buffered items (lowest id on ties).
    MinBlock,
    /// Switch to the colour of the oldest buffered item.
    FifoColour,
}

impl FromStr for RbmPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy_max_block" | "greedy" => Ok(RbmPolicy::GreedyMaxBlock),
            "min_block" => Ok(RbmPolicy::MinBlock),
            "fifo_colour" | "fifo_color" | "fifo" => Ok(RbmPolicy::FifoColour),
            other => Err(Error::UnknownAlgorithm(other.into())),
        }
    }
}

impl RbmPolicy {
    pub fn id(&self) -> &'static str {
        match self {
            RbmPolicy::GreedyMaxBlock => "greedy_max_block",
            RbmPolicy::MinBlock => "min_block",
            RbmPolicy::FifoColour => "fifo_colour",
        }
    }

    pub fn all() -> [RbmPolicy; 3] {
        [
            RbmPolicy::GreedyMaxBlock,
            RbmPolicy::MinBlock,
            RbmPolicy::FifoColour,
        ]
    }
}

/// "aabc" -> [0, 0, 1, 2]; letters beyond 'a' name colours by offset.
pub fn parse_colour_sequence(s: &str) -> Result<Vec<Colour>> {
    s.trim()
        .bytes()
        .map(|b| {
            if b.is_ascii_lowercase() {
                Ok((b - b'a') as Colour)
            } else {
                Err(Error::InvalidParameter(format!(
                    "bad colour letter `{}`",
                    b as char
                )))
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SwitchEvent {
    /// Items read from the input when the switch happens.
    pub consumed: usize,
    pub colour: Colour,
}

#[derive(Debug, Clone)]
struct Buffer {
    /// Buffered items in arrival order.
    items: Vec<Colour>,
    active: Option<Colour>,
    k: usize,
}

impl Buffer {
    fn new(k: usize) -> Self {
        Buffer {
            items: Vec::with_capacity(k),
            active: None,
            k,
        }
    }

    /// Serve matching items and pull input while there is room. Returns how
    /// many items were consumed from `input`.
    fn pump(&mut self, input: &[Colour]) -> usize {
        let mut consumed = 0;
        loop {
            if let Some(a) = self.active {
                if self.items.contains(&a) {
                    self.items.retain(|&c| c != a);
                    continue;
                }
            }
            if consumed < input.len() && self.items.len() < self.k {
                self.items.push(input[consumed]);
                consumed += 1;
                continue;
            }
            return consumed;
        }
    }

    fn block_counts(&self) -> BTreeMap<Colour, usize> {
        let mut counts = BTreeMap::new();
        for &c in &self.items {
            *counts.entry(c).or_insert(0) += 1;
        }
        counts
    }
}

/// Run a policy over the whole sequence; returns the switch count and the
/// switch log.
pub fn rbm_run(policy: RbmPolicy, k: usize, seq: &[Colour]) -> Result<(u64, Vec<SwitchEvent>)> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "buffer size must be at least 1".into(),
        ));
    }
    let mut buf = Buffer::new(k);
    let mut consumed = 0usize;
    let mut switches = 0u64;
    let mut log = Vec::new();
    loop {
        consumed += buf.pump(&seq[consumed..]);
        if buf.items.is_empty() && consumed == seq.len() {
            return Ok((switches, log));
        }
        // stuck: no buffered item matches the active colour
        let pending = seq.get(consumed).copied();
        let colour = switch_choice(policy, &buf, pending);
        switches += 1;
        buf.active = Some(colour);
        log.push(SwitchEvent { consumed, colour });
    }
}

fn switch_choice(policy: RbmPolicy, buf: &Buffer, pending: Option<Colour>) -> Colour {
    let counts = buf.block_counts();
    match policy {
        RbmPolicy::GreedyMaxBlock => {
            let best = *counts.values().max().expect("stuck with a nonempty buffer");
            if let Some(p) = pending {
                if counts.get(&p) == Some(&best) {
                    return p;
                }
            }
            counts
                .iter()
                .find(|&(_, n)| *n == best)
                .map(|(&c, _)| c)
                .unwrap()
        }
        RbmPolicy::MinBlock => counts
            .iter()
            .min_by_key(|&(c, n)| (*n, *c))
            .map(|(&c, _)| c)
            .unwrap(),
        RbmPolicy::FifoColour => buf.items.first().copied().unwrap(),
    }
}

/// Minimum switches over all lazy schedules: exhaustive search over switch
/// choices with memoization on (items consumed, buffer multiset, active).
pub fn offline_opt_rbm(k: usize, seq: &[Colour], budget: u128) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "buffer size must be at least 1".into(),
        ));
    }
    // state space: consumed position x buffer multiset x active colour
    let colours = seq.iter().copied().max().map_or(1, |c| c + 1) as u128;
    let mut multisets: u128 = 1; // C(colours + k, k)
    for i in 1..=k as u128 {
        multisets = multisets * (colours + i) / i;
    }
    let states = multisets * (seq.len() as u128 + 1) * (colours + 1);
    if states > budget {
        return Err(Error::BudgetExceeded {
            needed: states,
            budget,
        });
    }
    type Key = (usize, Vec<Colour>, Option<Colour>);
    fn go(
        memo: &mut HashMap<Key, u64>,
        k: usize,
        seq: &[Colour],
        consumed: usize,
        buf: &Buffer,
    ) -> u64 {
        let mut buf = buf.clone();
        let mut consumed = consumed;
        consumed += buf.pump(&seq[consumed..]);
        if buf.items.is_empty() && consumed == seq.len() {
            return 0;
        }
        let mut key_items = buf.items.clone();
        key_items.sort_unstable();
        let key = (consumed, key_items, buf.active);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let mut best = u64::MAX;
        for &colour in buf.block_counts().keys() {
            let mut child = buf.clone();
            child.active = Some(colour);
            best = best.min(1 + go(memo, k, seq, consumed, &child));
        }
        memo.insert(key, best);
        best
    }
    let mut memo = HashMap::new();
    Ok(go(&mut memo, k, seq, 0, &Buffer::new(k)))
}

/// Exact profile of a policy over all colours^n sequences.
pub fn rbm_profile(
    policy: RbmPolicy,
    colours: u32,
    k: usize,
    n: u32,
    budget: u128,
) -> Result<CostProfile> {
    let total = (colours as u128).pow(n);
    if total > budget {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let mut acc: BTreeMap<crate::rat::Rat, u128> = BTreeMap::new();
    let mut seq = vec![0 as Colour; n as usize];
    loop {
        let (switches, _) = rbm_run(policy, k, &seq)?;
        *acc.entry(rat_int(switches as i128)).or_insert(0) += 1;
        let mut i = seq.len();
        loop {
            if i == 0 {
                return Ok(CostProfile::from_value_counts(
                    policy.id().to_owned(),
                    format!("rbm:{colours}c"),
                    Configuration::new(vec![0; k]),
                    n,
                    true,
                    acc,
                ));
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < colours {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// Profile of the lazy offline optimum over all colours^n sequences.
pub fn rbm_opt_profile(colours: u32, k: usize, n: u32, budget: u128) -> Result<CostProfile> {
    let total = (colours as u128).pow(n);
    if total > budget {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let mut acc: BTreeMap<crate::rat::Rat, u128> = BTreeMap::new();
    let mut seq = vec![0 as Colour; n as usize];
    loop {
        let switches = offline_opt_rbm(k, &seq, budget)?;
        *acc.entry(rat_int(switches as i128)).or_insert(0) += 1;
        let mut i = seq.len();
        loop {
            if i == 0 {
                return Ok(CostProfile::from_value_counts(
                    "opt".into(),
                    format!("rbm:{colours}c"),
                    Configuration::new(vec![0; k]),
                    n,
                    true,
                    acc,
                ));
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < colours {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// State for behaviour enumeration: buffered colour counts plus the active
/// colour fully determine the future cost dynamics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct EnumState {
    buffer: Vec<Colour>, // sorted multiset
    active: Option<Colour>,
}

impl EnumState {
    fn to_buffer(&self, k: usize) -> Buffer {
        Buffer {
            items: self.buffer.clone(),
            active: self.active,
            k,
        }
    }

    fn of_buffer(buf: &Buffer) -> Self {
        let mut b = buf.items.clone();
        b.sort_unstable();
        EnumState {
            buffer: b,
            active: buf.active,
        }
    }
}

/// All (state, switches spent) alternatives after revealing one more item,
/// branching over forced-switch colour choices.
fn reveal(state: &EnumState, k: usize, item: Colour) -> Vec<(EnumState, u64)> {
    let mut buf = state.to_buffer(k);
    let input = [item];
    let consumed = buf.pump(&input);
    if consumed == 1 {
        return vec![(EnumState::of_buffer(&buf), 0)];
    }
    // stuck with a full buffer: a switch must happen before the item enters
    let mut out = Vec::new();
    for &colour in buf.block_counts().keys() {
        let mut child = buf.clone();
        child.active = Some(colour);
        let consumed = child.pump(&input);
        debug_assert_eq!(consumed, 1);
        out.push((EnumState::of_buffer(&child), 1));
    }
    out
}

fn drain_switches(state: &EnumState) -> u64 {
    let mut colours: Vec<Colour> = state.buffer.clone();
    colours.dedup();
    colours.len() as u64
}

#[derive(Debug, Clone, Serialize)]
pub struct RbmOracleOutcome {
    pub behaviour_count: u128,
    pub sequence_count: u128,
    pub dominant: bool,
    /// Rank at which some behaviour's sorted profile beats the reference.
    pub counterexample_rank: Option<u64>,
}

/// Enumerate every lazy deterministic online policy as a decision tree over
/// observed prefixes (one colour choice per forced switch) and test whether
/// the reference policy's sorted switch-count profile is pointwise minimal.
pub fn rbm_optimality_oracle(
    colours: u32,
    k: usize,
    n: u32,
    reference: RbmPolicy,
    budget: u128,
) -> Result<RbmOracleOutcome> {
    if colours == 0 || k == 0 || n == 0 {
        return Err(Error::InvalidParameter("need colours, k, n >= 1".into()));
    }
    let behaviour_count = count_behaviours(colours, k, n, budget)?;

    // profile sets, as histograms over 0..=n switches
    let grid = n as usize + 1;
    let root = EnumState {
        buffer: Vec::new(),
        active: None,
    };
    let profiles = profile_set(&root, colours, k, n, 0, grid, budget)?;

    let ref_profile = rbm_profile(reference, colours, k, n, budget)?;
    let mut ref_cum = vec![0u128; grid];
    let mut acc = 0u128;
    for v in 0..grid {
        acc += ref_profile
            .runs()
            .find(|(val, _)| *val == rat_int(v as i128))
            .map(|(_, c)| c)
            .unwrap_or(0);
        ref_cum[v] = acc;
    }

    let mut counterexample_rank = None;
    'outer: for hist in &profiles {
        let mut cum = 0u128;
        for v in 0..grid {
            cum += hist[v] as u128;
            if cum > ref_cum[v] {
                counterexample_rank = Some(ref_cum[v] as u64);
                break 'outer;
            }
        }
    }
    Ok(RbmOracleOutcome {
        behaviour_count,
        sequence_count: (colours as u128).pow(n),
        dominant: counterexample_rank.is_none(),
        counterexample_rank,
    })
}

fn count_behaviours(colours: u32, k: usize, n: u32, budget: u128) -> Result<u128> {
    fn go(
        memo: &mut HashMap<(EnumState, u32), u128>,
        state: &EnumState,
        colours: u32,
        k: usize,
        depth: u32,
        budget: u128,
    ) -> Result<u128> {
        if depth == 0 {
            return Ok(1);
        }
        if let Some(&v) = memo.get(&(state.clone(), depth)) {
            return Ok(v);
        }
        let mut product: u128 = 1;
        for item in 0..colours {
            let mut branch_total: u128 = 0;
            for (next, _) in reveal(state, k, item) {
                branch_total += go(memo, &next, colours, k, depth - 1, budget)?;
            }
            product = product
                .checked_mul(branch_total)
                .ok_or(Error::BudgetExceeded {
                    needed: u128::MAX,
                    budget,
                })?;
            if product > budget {
                return Err(Error::BudgetExceeded {
                    needed: product,
                    budget,
                });
            }
        }
        memo.insert((state.clone(), depth), product);
        Ok(product)
    }
    let root = EnumState {
        buffer: Vec::new(),
        active: None,
    };
    go(&mut HashMap::new(), &root, colours, k, n, budget)
}

/// All distinct switch-count profiles achievable by some behaviour from this
/// state, as histograms shifted by the switches already spent on this path.
fn profile_set(
    state: &EnumState,
    colours: u32,
    k: usize,
    depth: u32,
    spent: u64,
    grid: usize,
    budget: u128,
) -> Result<Vec<Vec<u64>>> {
    if depth == 0 {
        let mut hist = vec![0u64; grid];
        hist[(spent + drain_switches(state)) as usize] += 1;
        return Ok(vec![hist]);
    }
    // per revealed colour: the union over switch choices of the child sets
    let mut per_colour: Vec<Vec<Vec<u64>>> = Vec::with_capacity(colours as usize);
    for item in 0..colours {
        let mut set: Vec<Vec<u64>> = Vec::new();
        for (next, cost) in reveal(state, k, item) {
            for hist in profile_set(&next, colours, k, depth - 1, spent + cost, grid, budget)? {
                if !set.contains(&hist) {
                    set.push(hist);
                }
            }
        }
        per_colour.push(set);
    }
    // cartesian combination across colours, deduplicated
    let mut combined: Vec<Vec<u64>> = vec![vec![0u64; grid]];
    for set in per_colour {
        let mut next: Vec<Vec<u64>> = Vec::new();
        for base in &combined {
            for hist in &set {
                let mut merged = base.clone();
                for (m, h) in merged.iter_mut().zip(hist) {
                    *m += h;
                }
                if !next.contains(&merged) {
                    next.push(merged);
                }
            }
        }
        if next.len() as u128 > budget {
            return Err(Error::BudgetExceeded {
                needed: next.len() as u128,
                budget,
            });
        }
        combined = next;
    }
    Ok(combined)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_colour_needs_one_switch() {
        for k in 1..=4 {
            let (s, log) = rbm_run(RbmPolicy::GreedyMaxBlock, k, &[0, 0, 0, 0]).unwrap();
            assert_eq!(s, 1, "k={k}");
            assert_eq!(log.len(), 1);
        }
    }

    #[test]
    fn two_blocks_need_two_switches() {
        let seq = parse_colour_sequence("aabb").unwrap();
        let (s, _) = rbm_run(RbmPolicy::GreedyMaxBlock, 2, &seq).unwrap();
        assert_eq!(s, 2);
    }

    #[test]
    fn alternating_streams_through_the_tied_switch() {
        // abab with k=2: switch to a (tie, lowest id), stream both a's
        // through, then one switch for the b's
        let seq = parse_colour_sequence("abab").unwrap();
        let (s, log) = rbm_run(RbmPolicy::GreedyMaxBlock, 2, &seq).unwrap();
        assert_eq!(s, 2);
        assert_eq!(log[0].colour, 0);
        assert_eq!(log[1].colour, 1);
        assert_eq!(offline_opt_rbm(2, &seq, 1 << 20).unwrap(), 2);
    }

    #[test]
    fn empty_sequence_needs_no_switch() {
        let (s, _) = rbm_run(RbmPolicy::GreedyMaxBlock, 3, &[]).unwrap();
        assert_eq!(s, 0);
        assert_eq!(offline_opt_rbm(3, &[], 1 << 20).unwrap(), 0);
    }

    #[test]
    fn optimum_lower_bounds_every_policy() {
        for colours in 2..=3u32 {
            for k in [2usize, 3] {
                let total = colours.pow(5);
                for code in 0..total {
                    let mut seq = Vec::new();
                    let mut c = code;
                    for _ in 0..5 {
                        seq.push(c % colours);
                        c /= colours;
                    }
                    let opt = offline_opt_rbm(k, &seq, 1 << 20).unwrap();
                    for policy in RbmPolicy::all() {
                        let (s, _) = rbm_run(policy, k, &seq).unwrap();
                        assert!(opt <= s, "{policy:?} on {seq:?}: {s} < opt {opt}");
                    }
                }
            }
        }
    }

    #[test]
    fn optimum_is_monotone_in_buffer_size() {
        // shrinking the buffer never lowers the optimal switch count
        for code in 0..729u32 {
            let mut seq = Vec::new();
            let mut c = code;
            for _ in 0..6 {
                seq.push(c % 3);
                c /= 3;
            }
            let mut prev = u64::MAX;
            for k in 1..=4usize {
                let opt = offline_opt_rbm(k, &seq, 1 << 20).unwrap();
                assert!(
                    opt <= prev,
                    "seq {seq:?}: opt grew from k={} to k={k}",
                    k - 1
                );
                prev = opt;
            }
        }
    }

    #[test]
    fn greedy_is_monotone_in_buffer_size_at_desk_scale() {
        for code in 0..729u32 {
            let mut seq = Vec::new();
            let mut c = code;
            for _ in 0..6 {
                seq.push(c % 3);
                c /= 3;
            }
            let mut prev = u64::MAX;
            for k in 1..=4usize {
                let (s, _) = rbm_run(RbmPolicy::GreedyMaxBlock, k, &seq).unwrap();
                assert!(s <= prev, "seq {seq:?} k={k}");
                prev = s;
            }
        }
    }

    #[test]
    fn behaviour_enumeration_contains_the_named_policies() {
        // every policy's profile must appear among the enumerated behaviour
        // profiles
        let (colours, k, n) = (2u32, 2usize, 4u32);
        let root = EnumState {
            buffer: Vec::new(),
            active: None,
        };
        let grid = n as usize + 1;
        let set = profile_set(&root, colours, k, n, 0, grid, 1 << 30).unwrap();
        for policy in RbmPolicy::all() {
            let p = rbm_profile(policy, colours, k, n, 1 << 20).unwrap();
            let mut hist = vec![0u64; grid];
            for (v, c) in p.runs() {
                hist[v.to_integer() as usize] += c as u64;
            }
            assert!(set.contains(&hist), "{policy:?} profile missing");
        }
    }

    #[test]
    fn oracle_confirms_dominance_at_several_sizes() {
        for (colours, k, n) in [
            (2u32, 2usize, 3u32),
            (2, 2, 4),
            (2, 2, 5),
            (3, 2, 3),
            (2, 3, 4),
        ] {
            let out =
                rbm_optimality_oracle(colours, k, n, RbmPolicy::GreedyMaxBlock, 1 << 26).unwrap();
            assert!(
                out.dominant,
                "beaten at colours={colours} k={k} n={n}: rank {:?}",
                out.counterexample_rank
            );
        }
    }

    #[test]
    fn parse_colours() {
        assert_eq!(parse_colour_sequence("abca").unwrap(), vec![0, 1, 2, 0]);
        assert!(parse_colour_sequence("aB").is_err());
    }
}

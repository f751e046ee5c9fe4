//! Depth-first branch-and-bound over per-demand lightpath choices.
//!
//! Demands are assigned one at a time. The next demand is the one with the
//! fewest open channels that can still host it (at its length bound when
//! lengths are priced), ties broken by the static order: decreasing length
//! bound, then id. For each demand the candidates are `(channel, path)` or
//! `(channel, working, protection)` choices grouped into stages
//! `(opens new channel?, total length)` visited in order of objective
//! increase; inside a stage channels ascend and paths follow link-id order.
//! Paths of a given length are enumerated once per demand over the whole
//! network and filtered against channel occupancy, so no path is excluded.
//!
//! Channel `c` may only be opened when channels `0..c` are already in use.
//!
//! Bound at a node, in objective units scaled to integers: the cheaper of
//!
//! * staying on the open channels: `w1 * used + w2 * (wlu + sum of residual
//!   lengths)`, where a residual length is the shortest free route (or
//!   disjoint pair) of an unassigned demand on its best open channel, and
//! * opening more: `w1 * max(wc_lb, used + 1) + w2 * (wlu + sum of
//!   min(residual, static bound))`.
//!
//! `wc_lb` combines the channels in use, total slots over the link count,
//! node-set cut bounds over the whole demand set and per-node bounds on the
//! free outgoing and incoming links of each open channel; a channel carries
//! at most `degree / 2` disjoint pairs through a cut.
//!
//! The warm start is the best of first-fit, shortest-fit, squeaky-wheel
//! packing into fewer channels and, when lengths are priced, a squeaky-wheel
//! pass for shorter routes.

use std::rc::Rc;
use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::error::RwaError;
use crate::model::{DesignConfig, Rational};
use crate::topology::{LinkId, NetworkTopology};
use crate::traffic::{Demand, TrafficMatrix};

use super::heuristic::{greedy, polish, squeaky_wheel, Fit};
use super::paths::{Network, PathList, UNREACHABLE};
use super::{Lightpath, Role, RwaSolution, SolveStatus, SolverOptions};

/// A demand with its static length bounds, in branching order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OrderedDemand {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub protected: bool,
    /// Shortest path length.
    pub shortest: usize,
    /// Lower bound on links used: shortest path, or shortest disjoint pair.
    pub lb: usize,
}

/// Demands sorted by decreasing length bound, then id. `None` when some
/// demand cannot be routed (or protected) even on an empty network.
pub(crate) fn branching_order(net: &Network, demands: &[Demand]) -> Option<Vec<OrderedDemand>> {
    let mut order = Vec::with_capacity(demands.len());
    for d in demands {
        let (src, dst) = (d.src.0, d.dst.0);
        let shortest = net.distances_to(dst, |_| true)[src];
        if shortest == UNREACHABLE {
            return None;
        }
        let lb = if d.protected {
            let (a, b) = net.disjoint_pair(src, dst, |_| true)?;
            a.len() + b.len()
        } else {
            shortest as usize
        };
        order.push(OrderedDemand { id: d.id, src, dst, protected: d.protected, shortest: shortest as usize, lb });
    }
    order.sort_by_key(|d| (std::cmp::Reverse(d.lb), d.id));
    Some(order)
}

/// Shortest free length (pair total when protected) of `d` on a channel
/// with occupancy `occ`, with the occupancy mask of the witness.
fn residual(net: &Network, d: &OrderedDemand, occ: &[u64], words: usize) -> (u32, Vec<u64>) {
    let free = |l: usize| occ[l / 64] & (1 << (l % 64)) == 0;
    let paths = if d.protected {
        net.disjoint_pair(d.src, d.dst, free).map(|(a, b)| [a, b].concat())
    } else {
        net.shortest_path(d.src, d.dst, free)
    };
    let mut mask = vec![0; words];
    match paths {
        Some(links) => {
            for &l in &links {
                mask[l / 64] |= 1 << (l % 64);
            }
            (links.len() as u32, mask)
        }
        None => (UNREACHABLE, mask),
    }
}

fn initial_residuals(p: &Problem<'_>) -> (Vec<u32>, Vec<u64>) {
    let empty = vec![0; p.words];
    let mut resid = Vec::with_capacity(p.order.len() * p.channels);
    let mut witness = Vec::with_capacity(p.order.len() * p.channels * p.words);
    for d in &p.order {
        let (len, mask) = residual(p.net, d, &empty, p.words);
        for _ in 0..p.channels {
            resid.push(len);
            witness.extend_from_slice(&mask);
        }
    }
    (resid, witness)
}

/// Fresh channels needed on a cut of `cap` links that must still carry
/// `slots` lightpaths, `protected` of them as disjoint pairs, given the free
/// crossing links of each open channel. A channel carries at most
/// `cap / 2` pairs.
fn extra_channels(protected: u32, slots: u32, cap: u32, free: impl Iterator<Item = u32>) -> usize {
    let (mut pairs, mut total) = (0, 0);
    for f in free {
        pairs += f / 2;
        total += f;
    }
    let by_slots = if slots > total { (slots - total).div_ceil(cap.max(1)) } else { 0 };
    let by_pairs = match (protected > pairs, cap / 2) {
        (false, _) => 0,
        (true, 0) => u32::MAX,
        (true, half) => (protected - pairs).div_ceil(half),
    };
    by_slots.max(by_pairs) as usize
}

/// Largest channel requirement of a node-set cut `S -> V \ S` over every
/// set when the network is small, singletons otherwise.
pub(crate) fn cut_bound(net: &Network, order: &[OrderedDemand]) -> usize {
    let n = net.nodes;
    let sets: Box<dyn Iterator<Item = u64>> =
        if n <= 16 { Box::new(1..(1u64 << n) - 1) } else { Box::new((0..n).map(|v| 1u64 << v)) };
    let inside = |set: u64, v: usize| set >> v & 1 == 1;
    let mut best = 0;
    for set in sets {
        let cap = (0..net.links()).filter(|&l| inside(set, net.link_src[l]) && !inside(set, net.link_dst[l])).count();
        let (mut slots, mut protected) = (0, 0);
        for d in order.iter().filter(|d| inside(set, d.src) && !inside(set, d.dst)) {
            slots += 1 + u32::from(d.protected);
            protected += u32::from(d.protected);
        }
        if slots > 0 {
            best = best.max(extra_channels(protected, slots, cap as u32, std::iter::empty()));
        }
    }
    best
}

/// Counters from one exact run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed: Duration,
    /// Objective of the warm-start incumbent, if any.
    pub warm_start: Option<Rational>,
    /// Bound at the root of the search tree.
    pub root_bound: Option<Rational>,
}

struct Problem<'a> {
    net: &'a Network,
    order: Vec<OrderedDemand>,
    channels: usize,
    words: usize,
    w1: i64,
    w2: i64,
    scale: i64,
    dist_to: Vec<Vec<u32>>,
    outdeg: Vec<u32>,
    indeg: Vec<u32>,
    /// Static channel bound from node-set cuts.
    cut_lb: usize,
}

struct Shared {
    incumbent: AtomicI64,
    best: Mutex<Option<Vec<Lightpath>>>,
    stop: AtomicBool,
    limit_hit: AtomicBool,
    nodes: AtomicU64,
    deadline: Instant,
    node_limit: Option<u64>,
}

impl Shared {
    fn incumbent(&self) -> i64 {
        self.incumbent.load(Ordering::Acquire)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cand {
    channel: usize,
    wlen: usize,
    widx: usize,
    /// `(length, index)` of the protection path.
    protection: Option<(usize, usize)>,
}

const TICK: u64 = 256;

/// Passes of the squeaky-wheel warm start per channel target.
const WHEEL_ROUNDS: usize = 400;

struct Worker<'a> {
    p: &'a Problem<'a>,
    shared: &'a Shared,
    /// Path lists per branching position and length.
    lists: Vec<Vec<Option<Rc<PathList>>>>,
    occ: Vec<u64>,
    channel_load: Vec<u32>,
    used: usize,
    wlu: usize,
    /// Occupied outgoing / incoming links per `(node, channel)`.
    out_used: Vec<u32>,
    in_used: Vec<u32>,
    /// Slots still required by unassigned demands leaving / entering a node.
    out_need: Vec<u32>,
    in_need: Vec<u32>,
    /// Unassigned protected demands per source / destination.
    out_prot: Vec<u32>,
    in_prot: Vec<u32>,
    rem_lb: usize,
    /// Shortest free length per `(position, channel)`, `UNREACHABLE` if none.
    resid: Vec<u32>,
    /// Occupancy mask of the path(s) attaining `resid`.
    witness: Vec<u64>,
    /// Entries overwritten by the placement at each position.
    saved: Vec<Vec<(usize, u32)>>,
    saved_masks: Vec<Vec<u64>>,
    choices: Vec<Option<Cand>>,
    assigned: Vec<bool>,
    local_nodes: u64,
}

impl<'a> Worker<'a> {
    fn new(p: &'a Problem<'a>, shared: &'a Shared) -> Self {
        let n = p.net.nodes;
        let mut out_need = vec![0; n];
        let mut in_need = vec![0; n];
        let mut out_prot = vec![0; n];
        let mut in_prot = vec![0; n];
        for d in &p.order {
            let k = if d.protected { 2 } else { 1 };
            out_need[d.src] += k;
            in_need[d.dst] += k;
            out_prot[d.src] += u32::from(d.protected);
            in_prot[d.dst] += u32::from(d.protected);
        }
        let max_len = n.max(p.net.links()) + 1;
        let (resid, witness) = initial_residuals(p);

        Worker {
            p,
            shared,
            lists: vec![vec![None; max_len + 1]; p.order.len()],
            occ: vec![0; p.channels * p.words],
            channel_load: vec![0; p.channels],
            used: 0,
            wlu: 0,
            out_used: vec![0; n * p.channels],
            in_used: vec![0; n * p.channels],
            out_need,
            in_need,
            out_prot,
            in_prot,

            rem_lb: p.order.iter().map(|d| d.lb).sum(),
            resid,
            witness,
            saved: vec![Vec::new(); p.order.len()],
            saved_masks: vec![Vec::new(); p.order.len()],
            choices: vec![None; p.order.len()],
            assigned: vec![false; p.order.len()],
            local_nodes: 0,
        }
    }

    fn paths(&mut self, pos: usize, len: usize) -> Rc<PathList> {
        if let Some(list) = &self.lists[pos][len] {
            return Rc::clone(list);
        }
        let d = self.p.order[pos];
        let list = Rc::new(PathList::enumerate(self.p.net, d.src, d.dst, len, &self.p.dist_to[d.dst], self.p.words));
        self.lists[pos][len] = Some(Rc::clone(&list));
        list
    }

    fn is_free(&self, mask: &[u64], channel: usize) -> bool {
        let occ = &self.occ[channel * self.p.words..(channel + 1) * self.p.words];
        mask.iter().zip(occ).all(|(m, o)| m & o == 0)
    }

    fn wc_lower_bound(&self) -> usize {
        let (links, channels) = (self.p.net.links().max(1), self.p.channels);
        let mut lb = self.used.max(self.p.cut_lb).max((self.wlu + self.rem_lb).div_ceil(links));
        for v in 0..self.p.net.nodes {
            let open = v * channels..v * channels + self.used;
            if self.out_need[v] > 0 {
                let deg = self.p.outdeg[v];
                let free = self.out_used[open.clone()].iter().map(|&u| deg - u);
                lb = lb.max(self.used + extra_channels(self.out_prot[v], self.out_need[v], deg, free));
            }
            if self.in_need[v] > 0 {
                let deg = self.p.indeg[v];
                let free = self.in_used[open].iter().map(|&u| deg - u);
                lb = lb.max(self.used + extra_channels(self.in_prot[v], self.in_need[v], deg, free));
            }
        }
        lb.min(channels + 1)
    }

    /// Refreshes the residual lengths on `channel` of every
    /// unassigned demand whose witness now collides with the channel's
    /// occupancy; overwritten entries are saved under `pos`.
    fn update_residuals(&mut self, pos: usize, channel: usize) {
        let (words, channels) = (self.p.words, self.p.channels);
        let occ = &self.occ[channel * words..(channel + 1) * words];
        for j in 0..self.p.order.len() {
            if self.assigned[j] {
                continue;
            }
            let slot = j * channels + channel;
            if self.resid[slot] == UNREACHABLE {
                continue;
            }
            let wit = &self.witness[slot * words..(slot + 1) * words];
            if wit.iter().zip(occ).all(|(a, b)| a & b == 0) {
                continue;
            }
            self.saved[pos].push((slot, self.resid[slot]));
            self.saved_masks[pos].extend_from_slice(wit);
            let (len, mask) = residual(self.p.net, &self.p.order[j], occ, words);
            self.resid[slot] = len;
            self.witness[slot * words..(slot + 1) * words].copy_from_slice(&mask);
        }
    }

    /// Smallest residual length of demand `pos` over open channels.
    fn best_open(&self, pos: usize) -> u32 {
        let base = pos * self.p.channels;
        self.resid[base..base + self.used].iter().copied().min().unwrap_or(UNREACHABLE)
    }

    fn touch(&mut self, pos: usize, cand: Cand, add: bool) {
        let d = self.p.order[pos];
        let words = self.p.words;
        let base = cand.channel * words;
        let mut lists = vec![(cand.wlen, cand.widx)];
        lists.extend(cand.protection);
        for (len, idx) in lists {
            let list = self.paths(pos, len);
            for w in 0..words {
                if add {
                    self.occ[base + w] |= list.mask(idx)[w];
                } else {
                    self.occ[base + w] &= !list.mask(idx)[w];
                }
            }
            for &l in list.path(idx) {
                let (s, t) = (self.p.net.link_src[l as usize], self.p.net.link_dst[l as usize]);
                let (s, t) = (s * self.p.channels + cand.channel, t * self.p.channels + cand.channel);
                if add {
                    self.out_used[s] += 1;
                    self.in_used[t] += 1;
                } else {
                    self.out_used[s] -= 1;
                    self.in_used[t] -= 1;
                }
            }
        }
        let total = cand.wlen + cand.protection.map_or(0, |(len, _)| len);
        let k = if d.protected { 2 } else { 1 };
        if add {
            self.assigned[pos] = true;
            self.update_residuals(pos, cand.channel);
            self.channel_load[cand.channel] += 1;
            self.used = self.used.max(cand.channel + 1);
            self.wlu += total;
            self.out_need[d.src] -= k;
            self.in_need[d.dst] -= k;
            self.out_prot[d.src] -= u32::from(d.protected);
            self.in_prot[d.dst] -= u32::from(d.protected);
            self.rem_lb -= d.lb;
            self.choices[pos] = Some(cand);
        } else {
            self.channel_load[cand.channel] -= 1;
            while self.used > 0 && self.channel_load[self.used - 1] == 0 {
                self.used -= 1;
            }
            self.wlu -= total;
            self.out_need[d.src] += k;
            self.in_need[d.dst] += k;
            self.out_prot[d.src] += u32::from(d.protected);
            self.in_prot[d.dst] += u32::from(d.protected);
            self.rem_lb += d.lb;
            self.choices[pos] = None;
            self.assigned[pos] = false;
            let words = self.p.words;
            for (k, &(slot, value)) in self.saved[pos].iter().enumerate() {
                self.resid[slot] = value;
                self.witness[slot * words..(slot + 1) * words]
                    .copy_from_slice(&self.saved_masks[pos][k * words..(k + 1) * words]);
            }
            self.saved[pos].clear();
            self.saved_masks[pos].clear();
        }
    }

    /// Returns true when the search must stop.
    fn tick(&mut self) -> bool {
        self.local_nodes += 1;
        if self.local_nodes.is_multiple_of(TICK) {
            let total = self.shared.nodes.fetch_add(TICK, Ordering::Relaxed) + TICK;
            let over_nodes = self.shared.node_limit.is_some_and(|limit| total >= limit);
            if over_nodes || Instant::now() >= self.shared.deadline {
                self.shared.limit_hit.store(true, Ordering::Release);
                self.shared.stop.store(true, Ordering::Release);
            }
        }
        self.shared.stop.load(Ordering::Relaxed)
    }

    fn stopped(&self) -> bool {
        self.shared.stop.load(Ordering::Relaxed)
    }

    fn leaf(&mut self) {
        let cost = self.p.w1 * self.used as i64 + self.p.w2 * self.wlu as i64;
        if cost >= self.shared.incumbent() {
            return;
        }
        let mut best = self.shared.best.lock().expect("incumbent lock");
        if cost >= self.shared.incumbent() {
            return;
        }
        let mut lightpaths = Vec::with_capacity(self.p.order.len() * 2);
        for pos in 0..self.p.order.len() {
            let cand = self.choices[pos].expect("leaf has every demand assigned");
            let id = self.p.order[pos].id;
            let mut roles = vec![(Role::Working, cand.wlen, cand.widx)];
            if let Some((len, idx)) = cand.protection {
                roles.push((Role::Protection, len, idx));
            }
            for (role, len, idx) in roles {
                let list = self.paths(pos, len);
                lightpaths.push(Lightpath {
                    demand: id,
                    role,
                    links: list.path(idx).iter().map(|&l| LinkId(l as usize)).collect(),
                    channel: cand.channel,
                });
            }
        }
        *best = Some(lightpaths);
        self.shared.incumbent.store(cost, Ordering::Release);
    }

    fn stages(&self, d: &OrderedDemand) -> Vec<(bool, usize)> {
        let n = self.p.net.nodes;
        let max_len = if d.protected { (2 * (n - 1)).min(self.p.net.links()) } else { n - 1 };
        let mut stages = Vec::new();
        for new in [false, true] {
            if (!new && self.used == 0) || (new && self.used >= self.p.channels) {
                continue;
            }
            stages.extend((d.lb..=max_len).map(|len| (new, len)));
        }
        let (w1, w2) = (self.p.w1, self.p.w2);
        stages.sort_by_key(|&(new, len)| (w1 * i64::from(new) + w2 * len as i64, new, len));
        stages
    }

    /// Calls `visit` for every candidate of the demand at `pos` whose
    /// bound beats the incumbent; stops early when `visit` returns false.
    fn expand(&mut self, pos: usize, wc_lb: usize, visit: &mut dyn FnMut(&mut Self, Cand) -> bool) {
        let d = self.p.order[pos];
        for (new, len) in self.stages(&d) {
            let wc = wc_lb.max(self.used + usize::from(new));
            if wc > self.p.channels {
                continue;
            }
            let stage_bound = self.p.w1 * wc as i64 + self.p.w2 * (self.wlu + self.rem_lb - d.lb + len) as i64;
            if stage_bound >= self.shared.incumbent() {
                continue;
            }
            let channels = if new { self.used..self.used + 1 } else { 0..self.used };
            'stage: for channel in channels {
                if self.resid[pos * self.p.channels + channel] as usize > len {
                    continue;
                }
                if !d.protected {
                    let list = self.paths(pos, len);
                    for i in 0..list.count() {
                        if stage_bound >= self.shared.incumbent() {
                            break 'stage;
                        }
                        if self.is_free(list.mask(i), channel)
                            && !visit(self, Cand { channel, wlen: len, widx: i, protection: None })
                        {
                            return;
                        }
                    }
                    continue;
                }
                for wlen in d.shortest..=len / 2 {
                    let plen = len - wlen;
                    if plen < d.shortest {
                        continue;
                    }
                    let (a, b) = (self.paths(pos, wlen), self.paths(pos, plen));
                    for i in 0..a.count() {
                        if !self.is_free(a.mask(i), channel) {
                            continue;
                        }
                        let first = if wlen == plen { i + 1 } else { 0 };
                        for j in first..b.count() {
                            if stage_bound >= self.shared.incumbent() {
                                break 'stage;
                            }
                            let disjoint = a.mask(i).iter().zip(b.mask(j)).all(|(x, y)| x & y == 0);
                            if disjoint
                                && self.is_free(b.mask(j), channel)
                                && !visit(self, Cand { channel, wlen, widx: i, protection: Some((plen, j)) })
                            {
                                return;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Bound for the current subtree: the cheaper of finishing on the open
    /// channels (residual lengths) and opening more.
    fn node_bound(&self, wc_lb: usize) -> i64 {
        let (w1, w2) = (self.p.w1, self.p.w2);
        let mut stay = Some(0usize);
        for j in (0..self.p.order.len()).filter(|&j| !self.assigned[j]) {
            let best = self.best_open(j);
            if best == UNREACHABLE {
                stay = None;
                break;
            }
            stay = stay.map(|s| s + best as usize);
        }
        let stay = stay.filter(|_| wc_lb <= self.used).map(|s| w1 * self.used as i64 + w2 * (self.wlu + s) as i64);
        let grow = (self.used < self.p.channels).then(|| {
            let rest: usize = (0..self.p.order.len())
                .filter(|&j| !self.assigned[j])
                .map(|j| (self.best_open(j) as usize).min(self.p.order[j].lb))
                .sum();
            w1 * wc_lb.max(self.used + 1) as i64 + w2 * (self.wlu + rest) as i64
        });
        match (stay, grow) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => i64::MAX,
        }
    }

    /// First-fail: the unassigned demand with the fewest open channels that
    /// still fit it (at its length bound when lengths are priced), then
    /// branching order.
    fn select(&self) -> usize {
        let channels = self.p.channels;
        let fresh = usize::from(self.used < channels);
        let priced = self.p.w2 > 0;
        (0..self.p.order.len())
            .filter(|&j| !self.assigned[j])
            .min_by_key(|&j| {
                let lb = self.p.order[j].lb as u32;
                let open = &self.resid[j * channels..j * channels + self.used];
                let fits = open.iter().filter(|&&r| if priced { r == lb } else { r != UNREACHABLE }).count();
                (fits + fresh, j)
            })
            .expect("an unassigned demand remains")
    }

    /// `depth` counts assigned demands.
    fn dfs(&mut self, depth: usize) {
        if self.tick() {
            return;
        }
        if depth == self.p.order.len() {
            self.leaf();
            return;
        }
        let wc_lb = self.wc_lower_bound();
        if wc_lb > self.p.channels || self.node_bound(wc_lb) >= self.shared.incumbent() {
            return;
        }
        let pos = self.select();
        self.expand(pos, wc_lb, &mut |w, cand| {
            w.touch(pos, cand, true);
            w.dfs(depth + 1);
            w.touch(pos, cand, false);
            !w.stopped()
        });
    }
}

/// Exact solve; see [`solve_exact_report`].
pub fn solve_exact(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    cfg: &DesignConfig,
    opts: &SolverOptions,
) -> Result<RwaSolution, RwaError> {
    solve_exact_report(topology, traffic, cfg, opts).map(|(s, _)| s)
}

/// Minimizes `alpha1 * wavelength_count + alpha2 * wavelength_link_usage`
/// exactly by branch-and-bound, warm-started from greedy assignments.
///
/// On a time or node limit the best incumbent is returned as `feasible`
/// (or `timeout` when none exists). With one thread the result is fully
/// deterministic; with more, the objective and status are, the witness may
/// not be.
pub fn solve_exact_report(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    cfg: &DesignConfig,
    opts: &SolverOptions,
) -> Result<(RwaSolution, SearchStats), RwaError> {
    cfg.check_instance(topology, traffic)?;
    if opts.time_limit.is_zero() || opts.thread_count == 0 {
        return Err(RwaError::MalformedConfig("time limit and thread count must be positive".into()));
    }
    let start = Instant::now();
    let net = Network::new(topology);
    let mut stats = SearchStats { nodes: 0, elapsed: Duration::ZERO, warm_start: None, root_bound: None };
    let Some(order) = branching_order(&net, &traffic.demands) else {
        stats.elapsed = start.elapsed();
        return Ok((RwaSolution::empty(SolveStatus::Infeasible), stats));
    };
    let (w1, w2) = cfg.weights.scaled();
    let problem = Problem {
        net: &net,
        channels: cfg.capacity,
        words: net.links().div_ceil(64).max(1),
        w1,
        w2,
        scale: cfg.weights.scale(),
        dist_to: (0..net.nodes).map(|t| net.distances_to(t, |_| true)).collect(),
        outdeg: net.out.iter().map(|o| o.len() as u32).collect(),
        indeg: net.inc.iter().map(|i| i.len() as u32).collect(),
        cut_lb: cut_bound(&net, &order),
        order,
    };
    let to_rational = |cost: i64| Rational::new(cost, problem.scale);

    // Warm start: the better of first-fit and shortest-fit (first-fit on ties).
    let mut warm: Option<(i64, Vec<Lightpath>)> = None;
    for fit in [Fit::First, Fit::Shortest] {
        if let Some(lps) = greedy(&net, &problem.order, cfg.capacity, fit) {
            let sol = RwaSolution::from_lightpaths(lps, &cfg.weights, SolveStatus::Feasible);
            let cost = w1 * sol.wavelength_count as i64 + w2 * sol.wavelength_link_usage as i64;
            if warm.as_ref().is_none_or(|(best, _)| cost < *best) {
                warm = Some((cost, sol.lightpaths));
            }
        }
    }
    // Then try to pack into fewer channels, down to the static bound.
    let static_lb = problem.cut_lb.max(problem.order.iter().map(|d| d.lb).sum::<usize>().div_ceil(net.links().max(1)));
    if let Some((_, lps)) = &warm {
        let mut target =
            RwaSolution::from_lightpaths(lps.clone(), &cfg.weights, SolveStatus::Feasible).wavelength_count;
        while target > static_lb.max(1) {
            let Some(lps) = squeaky_wheel(&net, &problem.order, target - 1, WHEEL_ROUNDS) else { break };
            let sol = RwaSolution::from_lightpaths(lps, &cfg.weights, SolveStatus::Feasible);
            target = sol.wavelength_count;
            let cost = w1 * sol.wavelength_count as i64 + w2 * sol.wavelength_link_usage as i64;
            if warm.as_ref().is_none_or(|(best, _)| cost < *best) {
                warm = Some((cost, sol.lightpaths));
            }
        }
    }
    // Shorter routes on the incumbent's channel count.
    if let (Some((_, lps)), true) = (&warm, w2 > 0) {
        let channels = RwaSolution::from_lightpaths(lps.clone(), &cfg.weights, SolveStatus::Feasible).wavelength_count;
        if let Some(lps) = polish(&net, &problem.order, channels, WHEEL_ROUNDS) {
            let sol = RwaSolution::from_lightpaths(lps, &cfg.weights, SolveStatus::Feasible);
            let cost = w1 * sol.wavelength_count as i64 + w2 * sol.wavelength_link_usage as i64;
            if warm.as_ref().is_none_or(|(best, _)| cost < *best) {
                warm = Some((cost, sol.lightpaths));
            }
        }
    }
    stats.warm_start = warm.as_ref().map(|(c, _)| to_rational(*c));

    let shared = Shared {
        incumbent: AtomicI64::new(warm.as_ref().map_or(i64::MAX, |(c, _)| *c)),
        best: Mutex::new(warm.map(|(_, l)| l)),
        stop: AtomicBool::new(false),
        limit_hit: AtomicBool::new(false),
        nodes: AtomicU64::new(0),
        deadline: start + opts.time_limit,
        node_limit: opts.node_limit,
    };

    let mut root = Worker::new(&problem, &shared);
    let root_lb = root.wc_lower_bound();
    let root_bound = root.node_bound(root_lb);
    stats.root_bound = (root_bound != i64::MAX).then(|| to_rational(root_bound));
    if problem.order.is_empty() {
        root.leaf();
    } else if opts.thread_count == 1 {
        root.dfs(0);
    } else if root_lb <= problem.channels && root_bound < shared.incumbent() {
        let first = root.select();
        let mut tasks = Vec::new();
        root.expand(first, root_lb, &mut |_, cand| {
            tasks.push(cand);
            true
        });
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..opts.thread_count {
                scope.spawn(|| {
                    let mut worker = Worker::new(&problem, &shared);
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= tasks.len() || worker.stopped() {
                            break;
                        }
                        worker.touch(first, tasks[i], true);
                        worker.dfs(1);
                        worker.touch(first, tasks[i], false);
                    }
                    shared.nodes.fetch_add(worker.local_nodes % TICK, Ordering::Relaxed);
                });
            }
        });
    }
    shared.nodes.fetch_add(root.local_nodes % TICK, Ordering::Relaxed);

    let limit_hit = shared.limit_hit.load(Ordering::Acquire);
    let best = shared.best.into_inner().expect("incumbent lock");
    let solution = match (best, limit_hit) {
        (Some(l), false) => RwaSolution::from_lightpaths(l, &cfg.weights, SolveStatus::Optimal),
        (Some(l), true) => RwaSolution::from_lightpaths(l, &cfg.weights, SolveStatus::Feasible),
        (None, false) => RwaSolution::empty(SolveStatus::Infeasible),
        (None, true) => RwaSolution::empty(SolveStatus::Timeout),
    };
    stats.nodes = shared.nodes.load(Ordering::Relaxed);
    stats.elapsed = start.elapsed();
    Ok((solution, stats))
}

use crate::error::RwaError;
use crate::model::DesignConfig;
use crate::topology::{LinkId, NetworkTopology};
use crate::traffic::TrafficMatrix;

use super::exact::{branching_order, OrderedDemand};
use super::paths::Network;
use super::{Lightpath, Role, RwaSolution, SolveStatus};

/// How a greedy pass picks the channel for each demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Fit {
    /// Lowest-index channel on which the demand can be routed at all.
    First,
    /// Among channels already in use, the one giving the shortest route;
    /// a new channel only when no used channel can host the demand.
    Shortest,
}

fn route_on_channel(net: &Network, d: &OrderedDemand, busy: &[bool]) -> Option<(Vec<usize>, Option<Vec<usize>>)> {
    let free = |l: usize| !busy[l];
    if !d.protected {
        return net.shortest_path(d.src, d.dst, free).map(|p| (p, None));
    }
    if let Some(working) = net.shortest_path(d.src, d.dst, free) {
        let blocked = |l: usize| !busy[l] && !working.contains(&l);
        if let Some(protection) = net.shortest_path(d.src, d.dst, blocked) {
            return Some((working, Some(protection)));
        }
    }
    net.disjoint_pair(d.src, d.dst, free).map(|(w, p)| (w, Some(p)))
}

/// Places demands in the given order; returns the lightpaths of the placed
/// demands and the positions (in `order`) of those that did not fit.
fn place<'a>(
    net: &Network,
    order: impl Iterator<Item = (usize, &'a OrderedDemand)>,
    channels: usize,
    fit: Fit,
) -> (Vec<Lightpath>, Vec<usize>) {
    let mut busy = vec![vec![false; net.links()]; channels];
    let mut used = 0;
    let mut lightpaths = Vec::new();
    let mut failed = Vec::new();
    for (pos, d) in order {
        let choice = match fit {
            Fit::First => (0..channels).find_map(|c| route_on_channel(net, d, &busy[c]).map(|r| (c, r))),
            Fit::Shortest => {
                let length = |r: &(Vec<usize>, Option<Vec<usize>>)| r.0.len() + r.1.as_ref().map_or(0, Vec::len);
                (0..used)
                    .filter_map(|c| route_on_channel(net, d, &busy[c]).map(|r| (c, r)))
                    .min_by_key(|(c, r)| (length(r), *c))
                    .or_else(|| (used..channels).find_map(|c| route_on_channel(net, d, &busy[c]).map(|r| (c, r))))
            }
        };
        let Some((channel, (working, protection))) = choice else {
            failed.push(pos);
            continue;
        };
        used = used.max(channel + 1);
        for path in std::iter::once(&working).chain(protection.iter()) {
            for &l in path {
                busy[channel][l] = true;
            }
        }
        lightpaths.push(Lightpath {
            demand: d.id,
            role: Role::Working,
            links: working.into_iter().map(LinkId).collect(),
            channel,
        });
        if let Some(p) = protection {
            lightpaths.push(Lightpath {
                demand: d.id,
                role: Role::Protection,
                links: p.into_iter().map(LinkId).collect(),
                channel,
            });
        }
    }
    (lightpaths, failed)
}

/// Greedy assignment in branching order; `None` if some demand could not be placed.
pub(crate) fn greedy(net: &Network, order: &[OrderedDemand], channels: usize, fit: Fit) -> Option<Vec<Lightpath>> {
    let (lightpaths, failed) = place(net, order.iter().enumerate(), channels, fit);
    failed.is_empty().then_some(lightpaths)
}

/// Squeaky-wheel packing into `channels` channels: repeated first-fit
/// passes where demands that failed move to the front of the next pass.
pub(crate) fn squeaky_wheel(
    net: &Network,
    order: &[OrderedDemand],
    channels: usize,
    rounds: usize,
) -> Option<Vec<Lightpath>> {
    let mut priority: Vec<usize> = (0..order.len()).collect();
    for _ in 0..rounds {
        let (lightpaths, failed) = place(net, priority.iter().map(|&i| (i, &order[i])), channels, Fit::First);
        if failed.is_empty() {
            return Some(lightpaths);
        }
        let mut next = failed.clone();
        next.extend(priority.iter().copied().filter(|i| !failed.contains(i)));
        priority = next;
    }
    None
}

/// Squeaky-wheel search for short routes on at most `channels` channels:
/// shortest-fit passes where the demands routed furthest above their
/// length bound (and any that failed) move to the front. Returns the
/// shortest complete assignment seen.
pub(crate) fn polish(net: &Network, order: &[OrderedDemand], channels: usize, rounds: usize) -> Option<Vec<Lightpath>> {
    let mut priority: Vec<usize> = (0..order.len()).collect();
    let mut best: Option<(usize, Vec<Lightpath>)> = None;
    let position: std::collections::HashMap<usize, usize> = order.iter().enumerate().map(|(i, d)| (d.id, i)).collect();
    for _ in 0..rounds {
        let (lightpaths, failed) = place(net, priority.iter().map(|&i| (i, &order[i])), channels, Fit::Shortest);
        let mut excess = vec![0usize; order.len()];
        for lp in &lightpaths {
            excess[position[&lp.demand]] += lp.links.len();
        }
        for (i, d) in order.iter().enumerate() {
            excess[i] = excess[i].saturating_sub(d.lb);
        }
        if failed.is_empty() {
            let total: usize = lightpaths.iter().map(|l| l.links.len()).sum();
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, lightpaths));
            }
        }
        let mut next = failed.clone();
        let mut rest: Vec<usize> = priority.iter().copied().filter(|i| !failed.contains(i)).collect();
        rest.sort_by_key(|&i| std::cmp::Reverse(excess[i]));
        next.extend(rest);
        if next == priority {
            break;
        }
        priority = next;
    }
    best.map(|(_, l)| l)
}

/// First-fit baseline: demands in branching order, each on the lowest-index
/// channel where a shortest free route (or disjoint route pair) exists.
///
/// The result is `feasible` when every demand was placed and `infeasible`
/// otherwise; the latter only means the greedy pass failed.
pub fn solve_heuristic(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    cfg: &DesignConfig,
) -> Result<RwaSolution, RwaError> {
    cfg.check_instance(topology, traffic)?;
    let net = Network::new(topology);
    let Some(order) = branching_order(&net, &traffic.demands) else {
        return Ok(RwaSolution::empty(SolveStatus::Infeasible));
    };
    Ok(match greedy(&net, &order, cfg.capacity, Fit::First) {
        Some(lightpaths) => RwaSolution::from_lightpaths(lightpaths, &cfg.weights, SolveStatus::Feasible),
        None => RwaSolution::empty(SolveStatus::Infeasible),
    })
}

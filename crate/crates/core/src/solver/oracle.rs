//! Exhaustive enumeration for micro-instances.
//!
//! Shares nothing with the branch-and-bound beyond the public types: its own
//! path enumeration, no bounds, no symmetry breaking, every ordered
//! working/protection pair on every channel.

use std::collections::{BTreeSet, HashSet};

use crate::error::RwaError;
use crate::model::{DesignConfig, Rational};
use crate::topology::{LinkId, NetworkTopology};
use crate::traffic::TrafficMatrix;

use super::{Lightpath, Role, RwaSolution, SolveStatus};

pub const ORACLE_MAX_NODES: usize = 5;
pub const ORACLE_MAX_DEMANDS: usize = 4;
pub const ORACLE_MAX_CHANNELS: usize = 3;

fn simple_paths(topology: &NetworkTopology, src: usize, dst: usize) -> Vec<Vec<usize>> {
    fn walk(
        t: &NetworkTopology,
        v: usize,
        dst: usize,
        visited: &mut Vec<usize>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == dst {
            out.push(path.clone());
            return;
        }
        for link in t.links().iter().filter(|l| l.src.0 == v) {
            if visited.contains(&link.dst.0) {
                continue;
            }
            visited.push(link.dst.0);
            path.push(link.id.0);
            walk(t, link.dst.0, dst, visited, path, out);
            path.pop();
            visited.pop();
        }
    }
    let mut out = Vec::new();
    walk(topology, src, dst, &mut vec![src], &mut Vec::new(), &mut out);
    out
}

/// One way to serve a demand: channel, working links, protection links.
type Choice = (usize, Vec<usize>, Option<Vec<usize>>);

fn demand_options(topology: &NetworkTopology, traffic: &TrafficMatrix, channels: usize) -> Vec<Vec<Choice>> {
    traffic
        .demands
        .iter()
        .map(|d| {
            let paths = simple_paths(topology, d.src.0, d.dst.0);
            let mut options = Vec::new();
            for c in 0..channels {
                for w in &paths {
                    if d.protected {
                        for p in &paths {
                            if w.iter().all(|l| !p.contains(l)) {
                                options.push((c, w.clone(), Some(p.clone())));
                            }
                        }
                    } else {
                        options.push((c, w.clone(), None));
                    }
                }
            }
            options
        })
        .collect()
}

fn check_guard(topology: &NetworkTopology, traffic: &TrafficMatrix, channels: usize) -> Result<(), RwaError> {
    if topology.node_count() > ORACLE_MAX_NODES || traffic.len() > ORACLE_MAX_DEMANDS || channels > ORACLE_MAX_CHANNELS
    {
        return Err(RwaError::InstanceTooLarge(format!(
            "|V|={}, |D|={}, |C|={} (limits {ORACLE_MAX_NODES}, {ORACLE_MAX_DEMANDS}, {ORACLE_MAX_CHANNELS})",
            topology.node_count(),
            traffic.len(),
            channels
        )));
    }
    Ok(())
}

/// Visits every complete conflict-free assignment.
fn enumerate(options: &[Vec<Choice>], visit: &mut dyn FnMut(&[&Choice])) {
    fn rec<'a>(
        options: &'a [Vec<Choice>],
        i: usize,
        taken: &mut HashSet<(usize, usize)>,
        chosen: &mut Vec<&'a Choice>,
        visit: &mut dyn FnMut(&[&Choice]),
    ) {
        if i == options.len() {
            visit(chosen);
            return;
        }
        for opt in &options[i] {
            let (c, w, p) = opt;
            let cells: Vec<(usize, usize)> = w.iter().chain(p.iter().flatten()).map(|&l| (l, *c)).collect();
            if cells.iter().any(|cell| taken.contains(cell)) {
                continue;
            }
            taken.extend(cells.iter().copied());
            chosen.push(opt);
            rec(options, i + 1, taken, chosen, visit);
            chosen.pop();
            for cell in &cells {
                taken.remove(cell);
            }
        }
    }
    rec(options, 0, &mut HashSet::new(), &mut Vec::new(), visit);
}

fn metrics(chosen: &[&Choice]) -> (usize, usize) {
    let channels: BTreeSet<usize> = chosen.iter().map(|o| o.0).collect();
    let usage = chosen.iter().map(|o| o.1.len() + o.2.as_ref().map_or(0, Vec::len)).sum();
    (channels.len(), usage)
}

/// Exact optimum by brute force. Only for `|V| <= 5`, `|D| <= 4`, `|C| <= 3`.
pub fn solve_oracle(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    cfg: &DesignConfig,
) -> Result<RwaSolution, RwaError> {
    cfg.check_instance(topology, traffic)?;
    check_guard(topology, traffic, cfg.capacity)?;
    let options = demand_options(topology, traffic, cfg.capacity);
    let mut best: Option<(Rational, Vec<Choice>)> = None;
    enumerate(&options, &mut |chosen| {
        let (wc, wlu) = metrics(chosen);
        let value = cfg.weights.objective(wc, wlu);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, chosen.iter().map(|&o| o.clone()).collect()));
        }
    });
    let Some((_, chosen)) = best else {
        return Ok(RwaSolution::empty(SolveStatus::Infeasible));
    };
    let mut lightpaths = Vec::new();
    for (d, (c, w, p)) in traffic.demands.iter().zip(chosen) {
        let to_links = |v: Vec<usize>| v.into_iter().map(LinkId).collect();
        lightpaths.push(Lightpath { demand: d.id, role: Role::Working, links: to_links(w), channel: c });
        if let Some(p) = p {
            lightpaths.push(Lightpath { demand: d.id, role: Role::Protection, links: to_links(p), channel: c });
        }
    }
    Ok(RwaSolution::from_lightpaths(lightpaths, &cfg.weights, SolveStatus::Optimal))
}

/// Every `(wavelength_count, wavelength_link_usage)` pair attained by some
/// feasible assignment on `channels` wavelengths, with the protection flags
/// taken from `traffic`. Same size limits as [`solve_oracle`].
pub fn feasible_metric_pairs(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    channels: usize,
) -> Result<BTreeSet<(usize, usize)>, RwaError> {
    check_guard(topology, traffic, channels)?;
    let options = demand_options(topology, traffic, channels);
    let mut pairs = BTreeSet::new();
    enumerate(&options, &mut |chosen| {
        pairs.insert(metrics(chosen));
    });
    Ok(pairs)
}

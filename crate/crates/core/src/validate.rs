//! Independent checking of lightpath assignments against an instance.
//!
//! Structural checks, one class each:
//!
//! * (a) provisioning: one working lightpath per demand, one protection
//!   lightpath per protected demand, none otherwise
//! * (b) routing: each lightpath is a simple directed path `src -> dst`
//! * (c) channel sharing: working and protection of a demand share one channel
//! * (d) uniqueness: no `(link, channel)` pair carries two demands
//! * (e) disjointness: working and protection of a demand share no link
//! * (f) channel range: every channel index is below the capacity
//!
//! When those pass, the x/y/theta/gamma/delta values are rebuilt from the
//! lightpaths and every constraint of the binary program is re-evaluated;
//! stored metrics and objective are recomputed as well.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::model::{build_model, Assignment, ConstraintClass, DesignConfig, IlpModel, VariableRef};
use crate::solver::{Role, RwaSolution};
use crate::topology::NetworkTopology;
use crate::traffic::TrafficMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationClass {
    #[serde(rename = "a")]
    Provisioning,
    #[serde(rename = "b")]
    Routing,
    #[serde(rename = "c")]
    ChannelSharing,
    #[serde(rename = "d")]
    Uniqueness,
    #[serde(rename = "e")]
    Disjointness,
    #[serde(rename = "f")]
    ChannelRange,
    /// Stored metrics or objective disagree with the lightpaths.
    #[serde(rename = "metrics")]
    Metrics,
}

impl ViolationClass {
    pub fn label(self) -> &'static str {
        match self {
            ViolationClass::Provisioning => "a",
            ViolationClass::Routing => "b",
            ViolationClass::ChannelSharing => "c",
            ViolationClass::Uniqueness => "d",
            ViolationClass::Disjointness => "e",
            ViolationClass::ChannelRange => "f",
            ViolationClass::Metrics => "metrics",
        }
    }

    pub fn constraint(self) -> &'static str {
        match self {
            ViolationClass::Provisioning => "provisioning",
            ViolationClass::Routing => "flow-conservation",
            ViolationClass::ChannelSharing => "single-channel",
            ViolationClass::Uniqueness => "wavelength-uniqueness",
            ViolationClass::Disjointness => "link-disjointness",
            ViolationClass::ChannelRange => "channel-range",
            ViolationClass::Metrics => "metrics",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub class: ViolationClass,
    pub constraint: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demand: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}: {}", self.class.label(), self.constraint, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn classes(&self) -> BTreeSet<ViolationClass> {
        self.violations.iter().map(|v| v.class).collect()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, class: ViolationClass, demand: Option<usize>, link: Option<usize>, message: String) {
        self.0.push(Violation { class, constraint: class.constraint(), demand, link, message });
    }
}

/// `(wavelength_count, wavelength_link_usage)` recomputed from lightpaths.
pub fn compute_metrics(solution: &RwaSolution) -> (usize, usize) {
    let channels: BTreeSet<usize> = solution.lightpaths.iter().map(|l| l.channel).collect();
    (channels.len(), solution.lightpaths.iter().map(|l| l.links.len()).sum())
}

/// Rebuilds the binary variable values a lightpath assignment implies.
/// Lightpaths must be structurally valid.
pub fn reconstruct_assignment(model: &IlpModel, solution: &RwaSolution) -> Assignment {
    let mut values: Assignment = model.variables.iter().map(|&v| (v, 0)).collect();
    for lp in &solution.lightpaths {
        let channel = lp.channel;
        values.insert(VariableRef::Theta { demand: lp.demand, channel }, 1);
        values.insert(VariableRef::Delta { channel }, 1);
        for link in &lp.links {
            let link = link.0;
            let var = match lp.role {
                Role::Working => VariableRef::X { demand: lp.demand, link, channel },
                Role::Protection => VariableRef::Y { demand: lp.demand, link, channel },
            };
            values.insert(var, 1);
            values.insert(VariableRef::Gamma { link, channel }, 1);
        }
    }
    values
}

fn check_route(topology: &NetworkTopology, src: usize, dst: usize, links: &[usize]) -> Result<(), String> {
    if links.is_empty() {
        return Err("empty path".into());
    }
    if let Some(&bad) = links.iter().find(|&&l| l >= topology.link_count()) {
        return Err(format!("unknown link {bad}"));
    }
    let mut at = src;
    let mut visited = vec![src];
    for &l in links {
        let link = &topology.links()[l];
        if link.src.0 != at {
            return Err(format!("link {l} starts at {} but the path is at {at}", link.src));
        }
        at = link.dst.0;
        if visited.contains(&at) {
            return Err(format!("node {at} visited twice"));
        }
        visited.push(at);
    }
    if at != dst {
        return Err(format!("path ends at {at} instead of {dst}"));
    }
    Ok(())
}

/// Checks `solution` against the instance; violations are data, not errors.
pub fn check_solution(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    cfg: &DesignConfig,
    solution: &RwaSolution,
) -> ValidationReport {
    use ViolationClass::*;
    let mut out = Collector(Vec::new());
    let demands: HashMap<usize, _> = traffic.demands.iter().map(|d| (d.id, d)).collect();

    // (a)
    let mut by_demand: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, lp) in solution.lightpaths.iter().enumerate() {
        if !demands.contains_key(&lp.demand) {
            out.push(Provisioning, Some(lp.demand), None, format!("lightpath {i} serves unknown demand {}", lp.demand));
            continue;
        }
        let entry = by_demand.entry(lp.demand).or_default();
        match lp.role {
            Role::Working => entry.0.push(i),
            Role::Protection => entry.1.push(i),
        }
    }
    for d in &traffic.demands {
        let (working, protection) = by_demand.get(&d.id).map_or((0, 0), |(w, p)| (w.len(), p.len()));
        if working != 1 {
            out.push(Provisioning, Some(d.id), None, format!("demand {} has {working} working lightpaths", d.id));
        }
        let expected = usize::from(d.protected);
        if protection != expected {
            out.push(
                Provisioning,
                Some(d.id),
                None,
                format!("demand {} has {protection} protection lightpaths, expected {expected}", d.id),
            );
        }
    }

    // (b), (f)
    for lp in &solution.lightpaths {
        let Some(d) = demands.get(&lp.demand) else { continue };
        let links: Vec<usize> = lp.links.iter().map(|l| l.0).collect();
        if let Err(msg) = check_route(topology, d.src.0, d.dst.0, &links) {
            let link = links.iter().copied().find(|&l| l < topology.link_count());
            out.push(Routing, Some(d.id), link, format!("{:?} path of demand {}: {msg}", lp.role, d.id));
        }
        if lp.channel >= cfg.capacity {
            out.push(
                ChannelRange,
                Some(d.id),
                None,
                format!("demand {} uses channel {} but only {} exist", d.id, lp.channel, cfg.capacity),
            );
        }
    }

    // (c), (e)
    for (&id, (working, protection)) in &by_demand {
        for &w in working {
            for &p in protection {
                let (w, p) = (&solution.lightpaths[w], &solution.lightpaths[p]);
                if w.channel != p.channel {
                    out.push(
                        ChannelSharing,
                        Some(id),
                        None,
                        format!("demand {id}: working on channel {}, protection on {}", w.channel, p.channel),
                    );
                }
                for link in w.links.iter().filter(|l| p.links.contains(l)) {
                    out.push(
                        Disjointness,
                        Some(id),
                        Some(link.0),
                        format!("demand {id}: working and protection share link {link}"),
                    );
                }
            }
        }
    }

    // (d)
    let mut cells: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for lp in &solution.lightpaths {
        for link in &lp.links {
            cells.entry((link.0, lp.channel)).or_default().insert(lp.demand);
        }
    }
    for ((link, channel), users) in cells.into_iter().filter(|(_, u)| u.len() > 1) {
        out.push(
            Uniqueness,
            users.first().copied(),
            Some(link),
            format!("link {link} channel {channel} carries demands {users:?}"),
        );
    }

    let (wc, wlu) = compute_metrics(solution);
    if solution.status.has_solution() {
        if (wc, wlu) != (solution.wavelength_count, solution.wavelength_link_usage) {
            out.push(
                Metrics,
                None,
                None,
                format!(
                    "stored metrics ({}, {}) but lightpaths give ({wc}, {wlu})",
                    solution.wavelength_count, solution.wavelength_link_usage
                ),
            );
        }
        let objective = cfg.weights.objective(wc, wlu);
        if objective != solution.objective_value {
            out.push(
                Metrics,
                None,
                None,
                format!("stored objective {} but lightpaths give {objective}", solution.objective_value),
            );
        }
    }

    if out.0.is_empty() {
        if let Ok(model) = build_model(topology, traffic, cfg) {
            let assignment = reconstruct_assignment(&model, solution);
            let violated = model.violated_constraints(&assignment).expect("reconstructed assignment is complete");
            for name in violated {
                let class = model
                    .constraints
                    .iter()
                    .find(|c| c.name == name)
                    .map(|c| match c.class {
                        ConstraintClass::Provisioning => Provisioning,
                        ConstraintClass::WorkingFlow | ConstraintClass::ProtectionFlow => Routing,
                        ConstraintClass::Uniqueness => Uniqueness,
                        ConstraintClass::ChannelUsage => ChannelRange,
                    })
                    .unwrap_or(Metrics);
                out.push(class, None, None, format!("constraint {name} violated by the rebuilt assignment"));
            }
        }
    }

    ValidationReport { valid: out.0.is_empty(), violations: out.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Rational, Variant};
    use crate::solver::{Lightpath, SolveStatus};
    use crate::topology::LinkId;
    use crate::traffic::LoadLevel;

    fn lp(demand: usize, role: Role, links: &[usize], channel: usize) -> Lightpath {
        Lightpath { demand, role, links: links.iter().copied().map(LinkId).collect(), channel }
    }

    #[test]
    fn empty_solution_metrics() {
        assert_eq!(compute_metrics(&RwaSolution::empty(SolveStatus::Optimal)), (0, 0));
    }

    #[test]
    fn shared_cell_is_a_uniqueness_violation() {
        // ring 0-1-2 with links 0:0->1 1:1->0 2:1->2 3:2->1 4:2->0 5:0->2
        let t = NetworkTopology::from_fiber_pairs("ring", 3, 2, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = TrafficMatrix::from_pairs([(0, 1, false), (0, 2, false)], 0, LoadLevel::Custom).unwrap();
        let cfg = DesignConfig::new(Variant::RwaWc, &t);
        let good = RwaSolution::from_lightpaths(
            vec![lp(0, Role::Working, &[0], 0), lp(1, Role::Working, &[5], 0)],
            &cfg.weights,
            SolveStatus::Optimal,
        );
        assert!(check_solution(&t, &m, &cfg, &good).valid);
        let bad = RwaSolution::from_lightpaths(
            vec![lp(0, Role::Working, &[0], 0), lp(1, Role::Working, &[0, 2], 0)],
            &cfg.weights,
            SolveStatus::Optimal,
        );
        let report = check_solution(&t, &m, &cfg, &bad);
        assert_eq!(report.classes(), BTreeSet::from([ViolationClass::Uniqueness]));
        assert_eq!(report.violations[0].link, Some(0));
    }

    #[test]
    fn stale_metrics_are_reported() {
        let t = NetworkTopology::from_fiber_pairs("ring", 3, 1, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = TrafficMatrix::from_pairs([(0, 1, false)], 0, LoadLevel::Custom).unwrap();
        let cfg = DesignConfig::new(Variant::RwaWc, &t);
        let mut s =
            RwaSolution::from_lightpaths(vec![lp(0, Role::Working, &[0], 0)], &cfg.weights, SolveStatus::Optimal);
        s.objective_value = Rational::from_integer(2);
        let report = check_solution(&t, &m, &cfg, &s);
        assert_eq!(report.classes(), BTreeSet::from([ViolationClass::Metrics]));
        assert!(report.to_json().contains("\"class\": \"metrics\""));
    }
}

//! Single-fault mutants of an optimal protected solution.

use std::collections::BTreeSet;

use rwa_core::validate::ViolationClass;
use rwa_core::{
    check_solution, solve_exact, DesignConfig, Lightpath, LinkId, LoadLevel, NetworkTopology, Role, RwaSolution,
    SolveStatus, SolverOptions, TrafficMatrix, Variant,
};

use super::{config, simple_paths};

pub struct Case {
    pub topology: NetworkTopology,
    pub traffic: TrafficMatrix,
    pub cfg: DesignConfig,
    pub base: RwaSolution,
}

pub fn case() -> Case {
    let topology = NetworkTopology::from_fiber_pairs("ring4", 4, 3, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let traffic =
        TrafficMatrix::from_pairs([(0, 2, false), (1, 2, false), (0, 3, true)], 0, LoadLevel::Custom).unwrap();
    let cfg = config(Variant::RwaIntwcP, &topology);
    let base = solve_exact(&topology, &traffic, &cfg, &SolverOptions::default()).unwrap();
    assert_eq!(base.status, SolveStatus::Optimal);
    assert!(check_solution(&topology, &traffic, &cfg, &base).valid);
    Case { topology, traffic, cfg, base }
}

fn rebuild(c: &Case, edit: impl FnOnce(&mut Vec<Lightpath>)) -> RwaSolution {
    let mut lps = c.base.lightpaths.clone();
    edit(&mut lps);
    RwaSolution::from_lightpaths(lps, &c.cfg.weights, SolveStatus::Optimal)
}

pub fn rejected_as(c: &Case, mutant: &RwaSolution) -> BTreeSet<ViolationClass> {
    let report = check_solution(&c.topology, &c.traffic, &c.cfg, mutant);
    assert!(!report.valid);
    report.classes()
}

fn index(lps: &[Lightpath], demand: usize, role: Role) -> usize {
    lps.iter().position(|l| l.demand == demand && l.role == role).unwrap()
}

/// One mutant per structural class, each breaking only that class.
pub fn mutants(c: &Case) -> Vec<(ViolationClass, RwaSolution)> {
    let unused = (0..c.cfg.capacity).find(|ch| c.base.lightpaths.iter().all(|l| l.channel != *ch)).unwrap();
    vec![
        (
            ViolationClass::Provisioning,
            rebuild(c, |lps| {
                lps.remove(index(lps, 2, Role::Protection));
            }),
        ),
        (
            ViolationClass::Routing,
            rebuild(c, |lps| {
                let i = index(lps, 0, Role::Working);
                lps[i].links.pop();
            }),
        ),
        (
            ViolationClass::ChannelSharing,
            rebuild(c, |lps| {
                let i = index(lps, 2, Role::Protection);
                lps[i].channel = unused;
            }),
        ),
        (
            ViolationClass::Uniqueness,
            rebuild(c, |lps| {
                // reroute demand 1 onto a path colliding with demand 0's working path
                let other = lps[index(lps, 0, Role::Working)].clone();
                let path = simple_paths(&c.topology, 1, 2)
                    .into_iter()
                    .find(|p| p.iter().any(|l| other.links.contains(&LinkId(*l))))
                    .unwrap();
                let i = index(lps, 1, Role::Working);
                lps[i].links = path.into_iter().map(LinkId).collect();
                lps[i].channel = other.channel;
            }),
        ),
        (
            ViolationClass::Disjointness,
            rebuild(c, |lps| {
                let w = lps[index(lps, 2, Role::Working)].links.clone();
                let i = index(lps, 2, Role::Protection);
                lps[i].links = w;
            }),
        ),
        (
            ViolationClass::ChannelRange,
            rebuild(c, |lps| {
                let i = index(lps, 1, Role::Working);
                lps[i].channel = c.cfg.capacity;
            }),
        ),
    ]
}

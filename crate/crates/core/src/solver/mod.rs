//! Exact and heuristic solvers producing lightpath assignments.
//!
//! * [`solve_exact`]: depth-first branch-and-bound over per-demand
//!   `(path, channel)` choices with unrestricted path enumeration.
//! * [`solve_oracle`]: exhaustive enumeration for micro-instances, used to
//!   cross-check the branch-and-bound.
//! * [`solve_heuristic`]: first-fit baseline, also the warm start of the
//!   exact search.

mod exact;
mod heuristic;
mod oracle;
pub(crate) mod paths;

pub use exact::{solve_exact, solve_exact_report, SearchStats};
pub use heuristic::solve_heuristic;
pub use oracle::{feasible_metric_pairs, solve_oracle, ORACLE_MAX_CHANNELS, ORACLE_MAX_DEMANDS, ORACLE_MAX_NODES};

use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{parse_rational, rational_to_string, Rational, WeightPair};
use crate::topology::LinkId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Working,
    Protection,
}

/// A path plus a single wavelength channel carrying one role of a demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lightpath {
    pub demand: usize,
    pub role: Role,
    pub links: Vec<LinkId>,
    pub channel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    /// Proven optimal.
    Optimal,
    /// Valid solution without an optimality proof.
    Feasible,
    /// No assignment exists (or, for the heuristic, none was found).
    Infeasible,
    /// Limit reached before any solution was found.
    Timeout,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

fn deserialize_rational<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(d)?;
    parse_rational(&text).ok_or_else(|| serde::de::Error::custom(format!("invalid rational `{text}`")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RwaSolution {
    pub status: SolveStatus,
    #[serde(rename = "objective", serialize_with = "serialize_rational", deserialize_with = "deserialize_rational")]
    pub objective_value: Rational,
    pub wavelength_count: usize,
    pub wavelength_link_usage: usize,
    pub lightpaths: Vec<Lightpath>,
}

impl RwaSolution {
    /// Builds a solution, sorting lightpaths by `(demand, role)` and
    /// deriving the metrics and objective.
    pub fn from_lightpaths(mut lightpaths: Vec<Lightpath>, weights: &WeightPair, status: SolveStatus) -> Self {
        lightpaths.sort_by_key(|l| (l.demand, l.role));
        let wavelength_count = lightpaths.iter().map(|l| l.channel).collect::<BTreeSet<_>>().len();
        let wavelength_link_usage = lightpaths.iter().map(|l| l.links.len()).sum();
        RwaSolution {
            status,
            objective_value: weights.objective(wavelength_count, wavelength_link_usage),
            wavelength_count,
            wavelength_link_usage,
            lightpaths,
        }
    }

    /// A solution-less result (`infeasible` or `timeout`).
    pub fn empty(status: SolveStatus) -> Self {
        RwaSolution {
            status,
            objective_value: Rational::from_integer(0),
            wavelength_count: 0,
            wavelength_link_usage: 0,
            lightpaths: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("solution serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Limits for the exact search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub time_limit: Duration,
    pub thread_count: usize,
    pub node_limit: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { time_limit: Duration::from_secs(60), thread_count: 1, node_limit: None }
    }
}

impl SolverOptions {
    pub fn with_time_limit(time_limit: Duration) -> Self {
        SolverOptions { time_limit, ..Default::default() }
    }
}

//! Binary ILP formulation of routing and wavelength assignment.
//!
//! Variables (all binary):
//!
//! * `x_d{d}_e{e}_c{c}`: link `e` on channel `c` carries the working path of `d`
//! * `y_d{d}_e{e}_c{c}`: same for the protection path (protected demands only)
//! * `theta_d{d}_c{c}`: demand `d` is carried on channel `c`
//! * `gamma_e{e}_c{c}`: channel `c` is occupied on link `e`
//! * `delta_c{c}`: channel `c` is used anywhere in the network
//!
//! Constraints: one channel per demand, working and protection flow
//! conservation per (node, demand, channel), wavelength uniqueness per
//! (link, channel) and channel-usage linking per channel. The objective is
//! `alpha1 * sum(delta) + alpha2 * sum(gamma)`, kept as exact rationals.

mod export;

pub use export::{export_model, parse_variable_name, ExportFormat};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::RwaError;
use crate::topology::NetworkTopology;
use crate::traffic::TrafficMatrix;

/// Exact rational used for weights and objective values.
pub type Rational = Ratio<i64>;

/// Formats a rational as `p/q` (denominator always present).
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a plain integer.
pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then_some(())?;
            Some(Ratio::new(p.trim().parse().ok()?, q))
        }
        None => Some(Ratio::from_integer(s.trim().parse().ok()?)),
    }
}

/// The four benchmarked designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "rwa_wc")]
    RwaWc,
    #[serde(rename = "rwa_wc_p")]
    RwaWcP,
    #[serde(rename = "rwa_intwc")]
    RwaIntwc,
    #[serde(rename = "rwa_intwc_p")]
    RwaIntwcP,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::RwaWc, Variant::RwaWcP, Variant::RwaIntwc, Variant::RwaIntwcP];

    pub fn name(self) -> &'static str {
        match self {
            Variant::RwaWc => "rwa_wc",
            Variant::RwaWcP => "rwa_wc_p",
            Variant::RwaIntwc => "rwa_intwc",
            Variant::RwaIntwcP => "rwa_intwc_p",
        }
    }

    /// Dedicated protection is provisioned for flagged demands.
    pub fn protection(self) -> bool {
        matches!(self, Variant::RwaWcP | Variant::RwaIntwcP)
    }

    /// Wavelength count first, wavelength-link usage second.
    pub fn lexicographic(self) -> bool {
        matches!(self, Variant::RwaIntwc | Variant::RwaIntwcP)
    }

    /// The single-objective design with the same protection setting.
    pub fn single_objective(self) -> Variant {
        if self.protection() {
            Variant::RwaWcP
        } else {
            Variant::RwaWc
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown design `{s}`; valid designs are rwa_wc, rwa_wc_p, rwa_intwc, rwa_intwc_p"))
    }
}

/// Weight coefficients of the integrated objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightPair {
    pub alpha1: Rational,
    pub alpha2: Rational,
}

impl WeightPair {
    pub fn new(alpha1: Rational, alpha2: Rational) -> Self {
        WeightPair { alpha1, alpha2 }
    }

    /// Wavelength count only.
    pub fn wavelength_count_only() -> Self {
        WeightPair { alpha1: Rational::one(), alpha2: Rational::zero() }
    }

    /// True when one more channel always outweighs any change in
    /// wavelength-link usage: `alpha1 > links * channels * alpha2`.
    pub fn is_lexicographic(&self, links: usize, channels: usize) -> bool {
        self.alpha1 > self.alpha2 * Rational::from_integer((links * channels) as i64)
    }

    /// Smallest positive integer `k` such that `k*alpha1` and `k*alpha2` are integers.
    pub fn scale(&self) -> i64 {
        let (a, b) = (*self.alpha1.denom(), *self.alpha2.denom());
        a / gcd(a, b) * b
    }

    /// Weights scaled to integers by [`WeightPair::scale`].
    pub fn scaled(&self) -> (i64, i64) {
        let k = Rational::from_integer(self.scale());
        ((self.alpha1 * k).to_integer(), (self.alpha2 * k).to_integer())
    }

    /// `alpha1 * wc + alpha2 * wlu`.
    pub fn objective(&self, wavelength_count: usize, wavelength_link_usage: usize) -> Rational {
        self.alpha1 * Rational::from_integer(wavelength_count as i64)
            + self.alpha2 * Rational::from_integer(wavelength_link_usage as i64)
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Weights `(1, 1/(1 + |C||E|))` ordering wavelength count strictly before
/// wavelength-link usage.
pub fn lexicographic_weights(topology: &NetworkTopology) -> WeightPair {
    let cells = (topology.capacity() * topology.link_count()) as i64;
    WeightPair { alpha1: Rational::one(), alpha2: Ratio::new(1, 1 + cells) }
}

/// Which design to build, its weights and the wavelength budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignConfig {
    pub variant: Variant,
    pub weights: WeightPair,
    pub capacity: usize,
}

impl DesignConfig {
    /// Standard weights for `variant` on `topology`.
    pub fn new(variant: Variant, topology: &NetworkTopology) -> Self {
        let weights =
            if variant.lexicographic() { lexicographic_weights(topology) } else { WeightPair::wavelength_count_only() };
        DesignConfig { variant, weights, capacity: topology.capacity() }
    }

    /// Checks consistency with `topology` and the variant's weight rules.
    pub fn check(&self, topology: &NetworkTopology) -> Result<(), RwaError> {
        if self.capacity != topology.capacity() {
            return Err(RwaError::CapacityMismatch { design: self.capacity, topology: topology.capacity() });
        }
        let WeightPair { alpha1, alpha2 } = self.weights;
        if alpha1 <= Rational::zero() || alpha2 < Rational::zero() {
            return Err(RwaError::MalformedConfig(format!(
                "weights must satisfy alpha1 > 0 and alpha2 >= 0, got ({alpha1}, {alpha2})"
            )));
        }
        if self.variant.lexicographic() {
            if alpha2.is_zero() || !self.weights.is_lexicographic(topology.link_count(), self.capacity) {
                return Err(RwaError::MalformedConfig(format!(
                    "{} needs 0 < alpha2 and alpha1 > |E||C| alpha2, got ({alpha1}, {alpha2})",
                    self.variant
                )));
            }
        } else if !alpha2.is_zero() {
            return Err(RwaError::MalformedConfig(format!("{} is single-objective: alpha2 must be 0", self.variant)));
        }
        Ok(())
    }

    /// Checks `self` and the demands of `traffic` against `topology`.
    pub fn check_instance(&self, topology: &NetworkTopology, traffic: &TrafficMatrix) -> Result<(), RwaError> {
        self.check(topology)?;
        for d in &traffic.demands {
            for node in [d.src, d.dst] {
                if !topology.contains(node) {
                    return Err(RwaError::DemandEndpoint { demand: d.id, node: node.0 });
                }
            }
            if d.src == d.dst {
                return Err(RwaError::MalformedConfig(format!("demand {} has identical endpoints", d.id)));
            }
            if d.protected && !self.variant.protection() {
                return Err(RwaError::UnexpectedProtection { demand: d.id, design: self.variant.to_string() });
            }
        }
        Ok(())
    }
}

/// A binary decision variable of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariableRef {
    X { demand: usize, link: usize, channel: usize },
    Y { demand: usize, link: usize, channel: usize },
    Theta { demand: usize, channel: usize },
    Gamma { link: usize, channel: usize },
    Delta { channel: usize },
}

impl fmt::Display for VariableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VariableRef::X { demand, link, channel } => write!(f, "x_d{demand}_e{link}_c{channel}"),
            VariableRef::Y { demand, link, channel } => write!(f, "y_d{demand}_e{link}_c{channel}"),
            VariableRef::Theta { demand, channel } => write!(f, "theta_d{demand}_c{channel}"),
            VariableRef::Gamma { link, channel } => write!(f, "gamma_e{link}_c{channel}"),
            VariableRef::Delta { channel } => write!(f, "delta_c{channel}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// Family a constraint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintClass {
    /// Every demand gets exactly one channel.
    Provisioning,
    WorkingFlow,
    ProtectionFlow,
    /// At most one lightpath per (link, channel).
    Uniqueness,
    /// Ties per-link occupancy to channel usage.
    ChannelUsage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub class: ConstraintClass,
    /// `(variable index, coefficient)`
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    fn holds(&self, values: &[i64]) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(v, a)| a * values[v]).sum();
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelMetadata {
    pub topology: String,
    pub nodes: usize,
    pub links: usize,
    pub channels: usize,
    pub demands: usize,
    pub protected_demands: usize,
    pub variant: Variant,
}

/// Solver-neutral binary program.
#[derive(Debug, Clone)]
pub struct IlpModel {
    pub variables: Vec<VariableRef>,
    index: HashMap<VariableRef, usize>,
    pub constraints: Vec<LinearConstraint>,
    /// Objective coefficients; zero weights produce no entries.
    pub objective: Vec<(usize, Rational)>,
    pub weights: WeightPair,
    pub metadata: ModelMetadata,
}

/// Binary values keyed by variable.
pub type Assignment = HashMap<VariableRef, i64>;

impl IlpModel {
    pub fn variable_index(&self, var: &VariableRef) -> Option<usize> {
        self.index.get(var).copied()
    }

    pub fn constraint_count(&self, class: ConstraintClass) -> usize {
        self.constraints.iter().filter(|c| c.class == class).count()
    }

    fn dense_values(&self, assignment: &Assignment) -> Result<Vec<i64>, RwaError> {
        let mut values = vec![None; self.variables.len()];
        for (var, &value) in assignment {
            let idx = self
                .variable_index(var)
                .ok_or_else(|| RwaError::Assignment(format!("{var} is not a model variable")))?;
            if value != 0 && value != 1 {
                return Err(RwaError::Assignment(format!("{var} = {value} is not binary")));
            }
            values[idx] = Some(value);
        }
        values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| RwaError::Assignment(format!("missing value for {}", self.variables[i]))))
            .collect()
    }

    /// Exact objective value of a complete binary assignment.
    pub fn evaluate_objective(&self, assignment: &Assignment) -> Result<Rational, RwaError> {
        let values = self.dense_values(assignment)?;
        Ok(self
            .objective
            .iter()
            .fold(Rational::zero(), |acc, &(v, coef)| acc + coef * Rational::from_integer(values[v])))
    }

    /// Names of the constraints violated by a complete binary assignment.
    pub fn violated_constraints(&self, assignment: &Assignment) -> Result<Vec<String>, RwaError> {
        let values = self.dense_values(assignment)?;
        Ok(self.constraints.iter().filter(|c| !c.holds(&values)).map(|c| c.name.clone()).collect())
    }
}

struct ModelBuilder {
    variables: Vec<VariableRef>,
    index: HashMap<VariableRef, usize>,
}

impl ModelBuilder {
    fn add(&mut self, var: VariableRef) -> usize {
        let idx = self.variables.len();
        self.variables.push(var);
        self.index.insert(var, idx);
        idx
    }

    fn get(&self, var: VariableRef) -> usize {
        self.index[&var]
    }
}

/// Builds the full binary program for one design on one instance.
pub fn build_model(
    topology: &NetworkTopology,
    traffic: &TrafficMatrix,
    cfg: &DesignConfig,
) -> Result<IlpModel, RwaError> {
    cfg.check_instance(topology, traffic)?;
    let channels = cfg.capacity;
    let links = topology.link_count();
    let demands = &traffic.demands;
    let mut b = ModelBuilder { variables: Vec::new(), index: HashMap::new() };

    for d in demands {
        for link in 0..links {
            for channel in 0..channels {
                b.add(VariableRef::X { demand: d.id, link, channel });
            }
        }
    }
    for d in demands.iter().filter(|d| d.protected) {
        for link in 0..links {
            for channel in 0..channels {
                b.add(VariableRef::Y { demand: d.id, link, channel });
            }
        }
    }
    for d in demands {
        for channel in 0..channels {
            b.add(VariableRef::Theta { demand: d.id, channel });
        }
    }
    for link in 0..links {
        for channel in 0..channels {
            b.add(VariableRef::Gamma { link, channel });
        }
    }
    for channel in 0..channels {
        b.add(VariableRef::Delta { channel });
    }

    let mut constraints = Vec::new();
    for d in demands {
        constraints.push(LinearConstraint {
            name: format!("provision_d{}", d.id),
            class: ConstraintClass::Provisioning,
            terms: (0..channels).map(|c| (b.get(VariableRef::Theta { demand: d.id, channel: c }), 1)).collect(),
            sense: Sense::Eq,
            rhs: 1,
        });
    }
    let flow = |b: &ModelBuilder, d: &crate::traffic::Demand, protection: bool, out: &mut Vec<LinearConstraint>| {
        for v in topology.nodes() {
            for channel in 0..channels {
                let var = |link: usize| {
                    if protection {
                        VariableRef::Y { demand: d.id, link, channel }
                    } else {
                        VariableRef::X { demand: d.id, link, channel }
                    }
                };
                let mut terms: Vec<(usize, i64)> = topology.outgoing(v).iter().map(|l| (b.get(var(l.0)), 1)).collect();
                terms.extend(topology.incoming(v).iter().map(|l| (b.get(var(l.0)), -1)));
                let theta = b.get(VariableRef::Theta { demand: d.id, channel });
                if v == d.src {
                    terms.push((theta, -1));
                } else if v == d.dst {
                    terms.push((theta, 1));
                }
                let (prefix, class) = if protection {
                    ("flow_y", ConstraintClass::ProtectionFlow)
                } else {
                    ("flow_x", ConstraintClass::WorkingFlow)
                };
                out.push(LinearConstraint {
                    name: format!("{prefix}_d{}_v{}_c{channel}", d.id, v),
                    class,
                    terms,
                    sense: Sense::Eq,
                    rhs: 0,
                });
            }
        }
    };
    for d in demands {
        flow(&b, d, false, &mut constraints);
    }
    for d in demands.iter().filter(|d| d.protected) {
        flow(&b, d, true, &mut constraints);
    }
    for link in 0..links {
        for channel in 0..channels {
            let mut terms: Vec<(usize, i64)> =
                demands.iter().map(|d| (b.get(VariableRef::X { demand: d.id, link, channel }), 1)).collect();
            terms.extend(
                demands
                    .iter()
                    .filter(|d| d.protected)
                    .map(|d| (b.get(VariableRef::Y { demand: d.id, link, channel }), 1)),
            );
            terms.push((b.get(VariableRef::Gamma { link, channel }), -1));
            constraints.push(LinearConstraint {
                name: format!("unique_e{link}_c{channel}"),
                class: ConstraintClass::Uniqueness,
                terms,
                sense: Sense::Eq,
                rhs: 0,
            });
        }
    }
    for channel in 0..channels {
        let mut terms: Vec<(usize, i64)> =
            (0..links).map(|link| (b.get(VariableRef::Gamma { link, channel }), 1)).collect();
        terms.push((b.get(VariableRef::Delta { channel }), -(links as i64)));
        constraints.push(LinearConstraint {
            name: format!("usage_c{channel}"),
            class: ConstraintClass::ChannelUsage,
            terms,
            sense: Sense::Le,
            rhs: 0,
        });
    }

    let mut objective = Vec::new();
    if !cfg.weights.alpha1.is_zero() {
        objective.extend((0..channels).map(|c| (b.get(VariableRef::Delta { channel: c }), cfg.weights.alpha1)));
    }
    if !cfg.weights.alpha2.is_zero() {
        for link in 0..links {
            for channel in 0..channels {
                objective.push((b.get(VariableRef::Gamma { link, channel }), cfg.weights.alpha2));
            }
        }
    }

    Ok(IlpModel {
        variables: b.variables,
        index: b.index,
        constraints,
        objective,
        weights: cfg.weights,
        metadata: ModelMetadata {
            topology: topology.name().to_string(),
            nodes: topology.node_count(),
            links,
            channels,
            demands: demands.len(),
            protected_demands: traffic.protected_count(),
            variant: cfg.variant,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::LoadLevel;

    fn ring(capacity: usize) -> NetworkTopology {
        NetworkTopology::from_fiber_pairs("ring", 3, capacity, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn lexicographic_weight_examples() {
        let t = NetworkTopology::cost239();
        let w = lexicographic_weights(&t);
        assert_eq!((w.alpha1, w.alpha2), (Rational::one(), Ratio::new(1, 521)));
        assert!(w.is_lexicographic(52, 10));
        let single = NetworkTopology::new("pair", 2, 1, [(0, 1)]).unwrap();
        let w = lexicographic_weights(&single);
        assert_eq!(w.alpha2, Ratio::new(1, 2));
        assert_eq!(w.scaled(), (2, 1));
    }

    #[test]
    fn ring_variable_counts() {
        let t = ring(2);
        let m = TrafficMatrix::from_pairs([(0, 1, false)], 0, LoadLevel::Custom).unwrap();
        let model = build_model(&t, &m, &DesignConfig::new(Variant::RwaWc, &t)).unwrap();
        assert_eq!(model.variables.len(), 28);
        let mp = m.with_protection(true);
        let model = build_model(&t, &mp, &DesignConfig::new(Variant::RwaWcP, &t)).unwrap();
        assert_eq!(model.variables.len(), 40);
    }

    #[test]
    fn cost239_high_x_count() {
        let t = NetworkTopology::cost239();
        let m = crate::traffic::generate_traffic(&t, LoadLevel::High, false, 1);
        let model = build_model(&t, &m, &DesignConfig::new(Variant::RwaIntwc, &t)).unwrap();
        let xs = model.variables.iter().filter(|v| matches!(v, VariableRef::X { .. })).count();
        assert_eq!(xs, 57200);
    }

    #[test]
    fn config_errors() {
        let t = ring(2);
        let m = TrafficMatrix::from_pairs([(0, 1, true)], 0, LoadLevel::Custom).unwrap();
        let cfg = DesignConfig::new(Variant::RwaWc, &t);
        assert!(matches!(build_model(&t, &m, &cfg), Err(RwaError::UnexpectedProtection { demand: 0, .. })));
        let mut cfg = DesignConfig::new(Variant::RwaIntwc, &t);
        cfg.capacity = 3;
        assert!(matches!(build_model(&t, &m, &cfg), Err(RwaError::CapacityMismatch { .. })));
        let mut cfg = DesignConfig::new(Variant::RwaIntwc, &t);
        cfg.weights.alpha2 = Ratio::new(1, 12);
        assert!(matches!(cfg.check(&t), Err(RwaError::MalformedConfig(_))));
        let mut cfg = DesignConfig::new(Variant::RwaWc, &t);
        cfg.weights.alpha2 = Ratio::new(1, 100);
        assert!(matches!(cfg.check(&t), Err(RwaError::MalformedConfig(_))));
    }

    #[test]
    fn objective_examples() {
        let w = WeightPair::wavelength_count_only();
        assert_eq!(w.objective(2, 3), Rational::from_integer(2));
        let w = WeightPair::new(Rational::one(), Ratio::new(1, 521));
        assert_eq!(w.objective(1, 4), Rational::one() + Ratio::new(4, 521));
        assert_eq!(w.objective(0, 0), Rational::zero());
    }

    #[test]
    fn evaluate_objective_checks_assignment() {
        let t = ring(1);
        let m = TrafficMatrix::from_pairs([(0, 1, false)], 0, LoadLevel::Custom).unwrap();
        let model = build_model(&t, &m, &DesignConfig::new(Variant::RwaIntwc, &t)).unwrap();
        let mut a: Assignment = model.variables.iter().map(|&v| (v, 0)).collect();
        assert_eq!(model.evaluate_objective(&a).unwrap(), Rational::zero());
        a.insert(VariableRef::Delta { channel: 0 }, 1);
        a.insert(VariableRef::Gamma { link: 0, channel: 0 }, 1);
        assert_eq!(model.evaluate_objective(&a).unwrap(), Rational::one() + Ratio::new(1, 7));
        a.insert(VariableRef::Delta { channel: 0 }, 2);
        assert!(matches!(model.evaluate_objective(&a), Err(RwaError::Assignment(_))));
        a.remove(&VariableRef::Delta { channel: 0 });
        assert!(matches!(model.evaluate_objective(&a), Err(RwaError::Assignment(m)) if m.contains("missing")));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rational_to_string(&Ratio::new(6, 4)), "3/2");
        assert_eq!(rational_to_string(&Rational::from_integer(2)), "2/1");
        assert_eq!(parse_rational("522/521"), Some(Ratio::new(522, 521)));
        assert_eq!(parse_rational("3"), Some(Rational::from_integer(3)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        let err = "rwa_pc".parse::<Variant>().unwrap_err();
        assert!(err.contains("rwa_intwc_p"));
    }
}

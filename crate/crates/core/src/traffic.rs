//! Static traffic matrices of unit-capacity demands.
//!
//! Text format:
//!
//! ```text
//! traffic seed=<s> load=<low|medium|high|custom>
//! demand <src> <dst> <0|1>    # last field: dedicated protection flag
//! ```
//!
//! Random generation samples ordered node pairs without replacement. The
//! sampler is a ChaCha8 stream seeded with `ChaCha8Rng::seed_from_u64(seed)`
//! driving a descending Fisher-Yates shuffle over the pairs listed in
//! lexicographic `(src, dst)` order; index `j` for position `i` is drawn by
//! rejection sampling `next_u64()` below the largest multiple of `i + 1`.
//! The first `k` shuffled pairs are kept and re-sorted by `(src, dst)`.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::topology::{NetworkTopology, NodeId};

/// A unit-capacity request from `src` to `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Demand {
    pub id: usize,
    pub src: NodeId,
    pub dst: NodeId,
    pub protected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadLevel {
    Low,
    Medium,
    High,
    Custom,
}

impl LoadLevel {
    pub const GENERATED: [LoadLevel; 3] = [LoadLevel::Low, LoadLevel::Medium, LoadLevel::High];

    /// Fraction of ordered node pairs carrying a demand, as `(num, den)`.
    pub fn fraction(self) -> Option<(usize, usize)> {
        match self {
            LoadLevel::Low => Some((3, 10)),
            LoadLevel::Medium => Some((7, 10)),
            LoadLevel::High => Some((1, 1)),
            LoadLevel::Custom => None,
        }
    }

    /// Number of demands generated on a topology with `nodes` nodes:
    /// `round(p * n * (n - 1))`, halves rounded up.
    pub fn demand_count(self, nodes: usize) -> Option<usize> {
        let (num, den) = self.fraction()?;
        let pairs = nodes * nodes.saturating_sub(1);
        Some((2 * num * pairs + den) / (2 * den))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LoadLevel::Low => "low",
            LoadLevel::Medium => "medium",
            LoadLevel::High => "high",
            LoadLevel::Custom => "custom",
        }
    }
}

impl fmt::Display for LoadLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LoadLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(LoadLevel::Low),
            "medium" => Ok(LoadLevel::Medium),
            "high" => Ok(LoadLevel::High),
            "custom" => Ok(LoadLevel::Custom),
            other => Err(format!("unknown load level `{other}` (expected low, medium, high or custom)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficMatrix {
    pub demands: Vec<Demand>,
    pub seed: u64,
    pub load: LoadLevel,
}

impl TrafficMatrix {
    /// Builds a matrix from `(src, dst, protected)` triples; ids follow input order.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (usize, usize, bool)>,
        seed: u64,
        load: LoadLevel,
    ) -> Result<Self, ParseError> {
        let demands = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (src, dst, protected))| Demand { id, src: NodeId(src), dst: NodeId(dst), protected })
            .collect();
        let matrix = TrafficMatrix { demands, seed, load };
        matrix.check_structure()?;
        Ok(matrix)
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn protected_count(&self) -> usize {
        self.demands.iter().filter(|d| d.protected).count()
    }

    /// Same demand set with every protection flag set to `protected`.
    pub fn with_protection(&self, protected: bool) -> Self {
        let mut out = self.clone();
        for d in &mut out.demands {
            d.protected = protected;
        }
        out
    }

    fn check_structure(&self) -> Result<(), ParseError> {
        let mut seen = HashSet::new();
        for (i, d) in self.demands.iter().enumerate() {
            if d.id != i {
                return Err(ParseError::Traffic(format!("demand ids must be dense, found {} at {i}", d.id)));
            }
            if d.src == d.dst {
                return Err(ParseError::Traffic(format!("demand {i} has identical endpoints {}", d.src)));
            }
            if !seen.insert((d.src, d.dst)) {
                return Err(ParseError::Traffic(format!(
                    "duplicate demand for ordered pair {} -> {} (demand {i})",
                    d.src, d.dst
                )));
            }
        }
        Ok(())
    }

    /// Checks every endpoint against `topology`.
    pub fn check_endpoints(&self, topology: &NetworkTopology) -> Result<(), ParseError> {
        for d in &self.demands {
            for node in [d.src, d.dst] {
                if !topology.contains(node) {
                    return Err(ParseError::Traffic(format!(
                        "demand {} references node {node} but topology `{}` has {} nodes",
                        d.id,
                        topology.name(),
                        topology.node_count()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut header = None;
        let mut triples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "traffic" => {
                    if header.is_some() {
                        return Err(ParseError::syntax(line_no, "duplicate traffic header"));
                    }
                    if fields.len() != 3 {
                        return Err(ParseError::syntax(line_no, "expected `traffic seed=<s> load=<label>`"));
                    }
                    let seed = field_value(fields[1], "seed", line_no)?
                        .parse::<u64>()
                        .map_err(|_| ParseError::syntax(line_no, "seed must be a 64-bit unsigned integer"))?;
                    let load = field_value(fields[2], "load", line_no)?
                        .parse::<LoadLevel>()
                        .map_err(|e| ParseError::syntax(line_no, e))?;
                    header = Some((seed, load));
                }
                "demand" => {
                    if header.is_none() {
                        return Err(ParseError::syntax(line_no, "demand before traffic header"));
                    }
                    if fields.len() != 4 {
                        return Err(ParseError::syntax(line_no, "expected `demand <src> <dst> <0|1>`"));
                    }
                    let node = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|_| ParseError::syntax(line_no, format!("expected node index, found `{s}`")))
                    };
                    let protected = match fields[3] {
                        "0" => false,
                        "1" => true,
                        other => {
                            return Err(ParseError::syntax(
                                line_no,
                                format!("protection flag must be 0 or 1, found `{other}`"),
                            ))
                        }
                    };
                    triples.push((node(fields[1])?, node(fields[2])?, protected));
                }
                other => return Err(ParseError::syntax(line_no, format!("unknown directive `{other}`"))),
            }
        }
        let (seed, load) = header.ok_or_else(|| ParseError::syntax(1, "missing `traffic` header line"))?;
        Self::from_pairs(triples, seed, load)
    }

    /// Parses and checks endpoints against `topology`.
    pub fn parse_for(text: &str, topology: &NetworkTopology) -> Result<Self, ParseError> {
        let matrix = Self::parse(text)?;
        matrix.check_endpoints(topology)?;
        Ok(matrix)
    }

    pub fn load(mut source: impl std::io::Read) -> Result<Self, ParseError> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "traffic seed={} load={}", self.seed, self.load).unwrap();
        for d in &self.demands {
            writeln!(out, "demand {} {} {}", d.src, d.dst, u8::from(d.protected)).unwrap();
        }
        out
    }

    pub fn save(&self, mut sink: impl std::io::Write) -> std::io::Result<()> {
        sink.write_all(self.to_text().as_bytes())
    }
}

fn field_value<'a>(field: &'a str, key: &str, line: usize) -> Result<&'a str, ParseError> {
    field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| ParseError::syntax(line, format!("expected `{key}=<value>`, found `{field}`")))
}

/// Uniform index in `0..bound` by rejection sampling.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Draws a random traffic matrix at one of the three generated load levels.
///
/// `high` covers every ordered pair; `low` and `medium` keep a seeded uniform
/// sample of 30% and 70% of them. `LoadLevel::Custom` yields an empty matrix.
pub fn generate_traffic(topology: &NetworkTopology, load: LoadLevel, protected: bool, seed: u64) -> TrafficMatrix {
    let n = topology.node_count();
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|s| (0..n).filter(move |&d| d != s).map(move |d| (s, d))).collect();
    let count = load.demand_count(n).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..pairs.len()).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        pairs.swap(i, j);
    }
    pairs.truncate(count);
    pairs.sort_unstable();
    TrafficMatrix::from_pairs(pairs.into_iter().map(|(s, d)| (s, d, protected)), seed, load)
        .expect("generated pairs are distinct and loop-free")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demand_counts() {
        let cost = NetworkTopology::cost239();
        assert_eq!(generate_traffic(&cost, LoadLevel::High, false, 1).len(), 110);
        assert_eq!(generate_traffic(&cost, LoadLevel::Low, false, 1).len(), 33);
        assert_eq!(generate_traffic(&cost, LoadLevel::Medium, false, 1).len(), 77);
        let nsf = NetworkTopology::nsfnet();
        assert_eq!(generate_traffic(&nsf, LoadLevel::Medium, false, 1).len(), 127);
        assert_eq!(generate_traffic(&nsf, LoadLevel::Low, false, 1).len(), 55);
    }

    #[test]
    fn generation_is_deterministic() {
        let cost = NetworkTopology::cost239();
        let a = generate_traffic(&cost, LoadLevel::Low, true, 7);
        let b = generate_traffic(&cost, LoadLevel::Low, true, 7);
        assert_eq!(a, b);
        assert!(a.demands.iter().all(|d| d.protected));
        let c = generate_traffic(&cost, LoadLevel::Low, true, 8);
        assert_ne!(a.demands, c.demands);
    }

    #[test]
    fn save_load_round_trip() {
        let cost = NetworkTopology::cost239();
        let m = generate_traffic(&cost, LoadLevel::Medium, false, 42);
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert_eq!(TrafficMatrix::load(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn duplicate_pair_rejected() {
        let text = "traffic seed=0 load=custom\ndemand 0 1 0\ndemand 0 1 1\n";
        assert!(matches!(TrafficMatrix::parse(text), Err(ParseError::Traffic(m)) if m.contains("duplicate")));
    }

    #[test]
    fn endpoint_outside_topology() {
        let text = "traffic seed=0 load=custom\ndemand 0 99 0\n";
        let err = TrafficMatrix::parse_for(text, &NetworkTopology::cost239()).unwrap_err();
        assert!(matches!(err, ParseError::Traffic(m) if m.contains("node 99")));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            TrafficMatrix::parse("traffic seed=1 load=low\ndemand 0 1 2\n"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
        assert!(matches!(TrafficMatrix::parse("traffic seed=1 load=heavy\n"), Err(ParseError::Syntax { line: 1, .. })));
        assert!(matches!(TrafficMatrix::parse("demand 0 1 0\n"), Err(ParseError::Syntax { line: 1, .. })));
    }
}

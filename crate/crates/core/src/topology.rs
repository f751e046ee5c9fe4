//! Physical fiber networks as directed multigraphs.
//!
//! A topology is a set of nodes `0..n`, a list of directed fiber links and a
//! uniform per-link wavelength capacity. Topologies are immutable once built
//! and are shared read-only by model builders and solvers.
//!
//! Text format (line oriented, `#` starts a comment line):
//!
//! ```text
//! topology <name> nodes=<n> capacity=<c>
//! link <a> <b>     # fiber pair: a->b gets the lower id, b->a the next one
//! arc <a> <b>      # single directed link
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{ParseError, RwaError};

const COST239: &str = include_str!("../data/cost239.topo");
const NSFNET: &str = include_str!("../data/nsfnet.topo");

/// Index of a node, dense in `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

/// Index of a directed fiber link, dense in `0..link_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A directed fiber link `src -> dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberLink {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
}

/// Undirected degree statistics of a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: Ratio<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    name: String,
    node_count: usize,
    links: Vec<FiberLink>,
    capacity: usize,
    outgoing: Vec<Vec<LinkId>>,
    incoming: Vec<Vec<LinkId>>,
}

impl NetworkTopology {
    /// Builds and validates a topology from directed `(src, dst)` pairs.
    /// Link ids follow the order of `arcs`.
    pub fn new(
        name: impl Into<String>,
        node_count: usize,
        capacity: usize,
        arcs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ParseError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(ParseError::Topology(format!("invalid name `{name}`")));
        }
        if node_count == 0 {
            return Err(ParseError::Topology("topology has no nodes".into()));
        }
        if capacity == 0 {
            return Err(ParseError::Topology("capacity must be positive".into()));
        }
        let mut links = Vec::new();
        let mut outgoing = vec![Vec::new(); node_count];
        let mut incoming = vec![Vec::new(); node_count];
        for (i, (src, dst)) in arcs.into_iter().enumerate() {
            for node in [src, dst] {
                if node >= node_count {
                    return Err(ParseError::Topology(format!(
                        "link {i} has dangling endpoint {node} (nodes are 0..{node_count})"
                    )));
                }
            }
            if src == dst {
                return Err(ParseError::Topology(format!("link {i} is a self-loop at node {src}")));
            }
            let id = LinkId(i);
            links.push(FiberLink { id, src: NodeId(src), dst: NodeId(dst) });
            outgoing[src].push(id);
            incoming[dst].push(id);
        }
        let topo = NetworkTopology { name, node_count, links, capacity, outgoing, incoming };
        if !topo.is_weakly_connected() {
            return Err(ParseError::Topology(format!("topology `{}` is disconnected", topo.name)));
        }
        Ok(topo)
    }

    /// Builds a topology where every `(a, b)` contributes `a->b` and `b->a`.
    pub fn from_fiber_pairs(
        name: impl Into<String>,
        node_count: usize,
        capacity: usize,
        pairs: &[(usize, usize)],
    ) -> Result<Self, ParseError> {
        let arcs = pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]);
        Self::new(name, node_count, capacity, arcs)
    }

    /// Returns the same network with a different wavelength capacity.
    pub fn with_capacity(&self, capacity: usize) -> Result<Self, ParseError> {
        if capacity == 0 {
            return Err(ParseError::Topology("capacity must be positive".into()));
        }
        let mut topo = self.clone();
        topo.capacity = capacity;
        Ok(topo)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Wavelength channels per link.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn links(&self) -> &[FiberLink] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &FiberLink {
        &self.links[id.0]
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count
    }

    /// Links leaving `v`, in id order.
    pub fn outgoing(&self, v: NodeId) -> &[LinkId] {
        &self.outgoing[v.0]
    }

    /// Links entering `v`, in id order.
    pub fn incoming(&self, v: NodeId) -> &[LinkId] {
        &self.incoming[v.0]
    }

    /// Outgoing and incoming links of `v`.
    pub fn adjacency(&self, v: NodeId) -> Result<(Vec<FiberLink>, Vec<FiberLink>), RwaError> {
        if !self.contains(v) {
            return Err(RwaError::UnknownNode(v.0));
        }
        let out = self.outgoing[v.0].iter().map(|&l| self.links[l.0]).collect();
        let inc = self.incoming[v.0].iter().map(|&l| self.links[l.0]).collect();
        Ok((out, inc))
    }

    /// Degree statistics of the undirected support graph; an opposite-direction
    /// pair (or any parallel bundle) between two nodes counts once.
    pub fn node_degree_stats(&self) -> DegreeStats {
        let mut neighbours = vec![BTreeSet::new(); self.node_count];
        for link in &self.links {
            neighbours[link.src.0].insert(link.dst.0);
            neighbours[link.dst.0].insert(link.src.0);
        }
        let degrees: Vec<usize> = neighbours.iter().map(BTreeSet::len).collect();
        let total: usize = degrees.iter().sum();
        DegreeStats {
            min: degrees.iter().copied().min().unwrap_or(0),
            max: degrees.iter().copied().max().unwrap_or(0),
            mean: Ratio::new(total, self.node_count),
        }
    }

    /// True when every link has an opposite-direction partner.
    pub fn is_bidirectional(&self) -> bool {
        let mut arcs: Vec<(usize, usize)> = self.links.iter().map(|l| (l.src.0, l.dst.0)).collect();
        let mut reversed: Vec<(usize, usize)> = arcs.iter().map(|&(a, b)| (b, a)).collect();
        arcs.sort_unstable();
        reversed.sort_unstable();
        arcs == reversed
    }

    fn is_weakly_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let out = self.outgoing[v].iter().map(|l| self.links[l.0].dst.0);
            let inc = self.incoming[v].iter().map(|l| self.links[l.0].src.0);
            for w in out.chain(inc) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Parses the topology text format.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut header: Option<(String, usize, usize)> = None;
        let mut arcs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "topology" => {
                    if header.is_some() {
                        return Err(ParseError::syntax(line_no, "duplicate topology header"));
                    }
                    if fields.len() != 4 {
                        return Err(ParseError::syntax(line_no, "expected `topology <name> nodes=<n> capacity=<c>`"));
                    }
                    let nodes = parse_key(fields[2], "nodes", line_no)?;
                    let capacity = parse_key(fields[3], "capacity", line_no)?;
                    header = Some((fields[1].to_string(), nodes, capacity));
                }
                kind @ ("link" | "arc") => {
                    if header.is_none() {
                        return Err(ParseError::syntax(line_no, "link before topology header"));
                    }
                    if fields.len() != 3 {
                        return Err(ParseError::syntax(line_no, format!("expected `{kind} <src> <dst>`")));
                    }
                    let src = parse_index(fields[1], line_no)?;
                    let dst = parse_index(fields[2], line_no)?;
                    arcs.push((src, dst));
                    if kind == "link" {
                        arcs.push((dst, src));
                    }
                }
                other => return Err(ParseError::syntax(line_no, format!("unknown directive `{other}`"))),
            }
        }
        let (name, nodes, capacity) = header.ok_or_else(|| ParseError::syntax(1, "missing `topology` header line"))?;
        Self::new(name, nodes, capacity, arcs)
    }

    /// Reads a topology from any byte stream.
    pub fn load(mut source: impl std::io::Read) -> Result<Self, ParseError> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    /// Serializes to the text format. Consecutive opposite-direction links
    /// `(2k, 2k+1)` are written back as fiber pairs so ids survive a round-trip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "topology {} nodes={} capacity={}", self.name, self.node_count, self.capacity).unwrap();
        let mut i = 0;
        while i < self.links.len() {
            let link = &self.links[i];
            match self.links.get(i + 1) {
                Some(next) if next.src == link.dst && next.dst == link.src => {
                    writeln!(out, "link {} {}", link.src, link.dst).unwrap();
                    i += 2;
                }
                _ => {
                    writeln!(out, "arc {} {}", link.src, link.dst).unwrap();
                    i += 1;
                }
            }
        }
        out
    }

    /// Bundled 11-node COST239 network (capacity 10).
    pub fn cost239() -> Self {
        Self::parse(COST239).expect("bundled COST239 topology is valid")
    }

    /// Bundled 14-node NSFNET network (capacity 30).
    pub fn nsfnet() -> Self {
        Self::parse(NSFNET).expect("bundled NSFNET topology is valid")
    }

    /// Looks up a bundled topology by name (`cost239` or `nsfnet`).
    pub fn bundled(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cost239" => Some(Self::cost239()),
            "nsfnet" => Some(Self::nsfnet()),
            _ => None,
        }
    }
}

fn parse_key(field: &str, key: &str, line: usize) -> Result<usize, ParseError> {
    let value = field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| ParseError::syntax(line, format!("expected `{key}=<value>`, found `{field}`")))?;
    value
        .parse()
        .map_err(|_| ParseError::syntax(line, format!("`{key}` must be a non-negative integer, found `{value}`")))
}

fn parse_index(field: &str, line: usize) -> Result<usize, ParseError> {
    field.parse().map_err(|_| ParseError::syntax(line, format!("expected node index, found `{field}`")))
}

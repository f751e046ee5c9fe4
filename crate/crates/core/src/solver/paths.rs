//! Path utilities over a compact directed-graph view.

use std::collections::VecDeque;

use crate::topology::NetworkTopology;

pub(crate) const UNREACHABLE: u32 = u32::MAX;

/// Adjacency view of a topology with plain indices.
#[derive(Debug, Clone)]
pub(crate) struct Network {
    pub nodes: usize,
    pub link_src: Vec<usize>,
    pub link_dst: Vec<usize>,
    /// `(link, head)` per node, sorted by link id.
    pub out: Vec<Vec<(usize, usize)>>,
    /// `(link, tail)` per node, sorted by link id.
    pub inc: Vec<Vec<(usize, usize)>>,
}

impl Network {
    pub fn new(topology: &NetworkTopology) -> Self {
        let nodes = topology.node_count();
        let mut out = vec![Vec::new(); nodes];
        let mut inc = vec![Vec::new(); nodes];
        let mut link_src = Vec::with_capacity(topology.link_count());
        let mut link_dst = Vec::with_capacity(topology.link_count());
        for l in topology.links() {
            out[l.src.0].push((l.id.0, l.dst.0));
            inc[l.dst.0].push((l.id.0, l.src.0));
            link_src.push(l.src.0);
            link_dst.push(l.dst.0);
        }
        Network { nodes, link_src, link_dst, out, inc }
    }

    pub fn links(&self) -> usize {
        self.link_src.len()
    }

    /// Hop distance from every node to `target` over links accepted by `free`.
    pub fn distances_to(&self, target: usize, free: impl Fn(usize) -> bool) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.nodes];
        dist[target] = 0;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &(link, tail) in &self.inc[v] {
                if dist[tail] == UNREACHABLE && free(link) {
                    dist[tail] = dist[v] + 1;
                    queue.push_back(tail);
                }
            }
        }
        dist
    }

    /// Shortest path over free links; among shortest paths the
    /// lexicographically smallest link-id sequence.
    pub fn shortest_path(&self, src: usize, dst: usize, free: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let dist = self.distances_to(dst, &free);
        if dist[src] == UNREACHABLE {
            return None;
        }
        let mut path = Vec::with_capacity(dist[src] as usize);
        let mut v = src;
        while v != dst {
            let &(link, head) = self.out[v]
                .iter()
                .find(|&&(link, head)| free(link) && dist[head] != UNREACHABLE && dist[head] + 1 == dist[v])
                .expect("distance labels are consistent");
            path.push(link);
            v = head;
        }
        Some(path)
    }

    /// Two link-disjoint paths of minimum total length (unit-capacity
    /// min-cost flow of value two). Returned shorter first, ties broken by
    /// link-id sequence.
    pub fn disjoint_pair(
        &self,
        src: usize,
        dst: usize,
        free: impl Fn(usize) -> bool,
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        let m = self.links();
        let mut flow = vec![false; m];
        for _ in 0..2 {
            // Bellman-Ford on the residual graph: forward arcs cost +1,
            // reverse arcs of used links cost -1.
            let mut dist = vec![i64::MAX; self.nodes];
            let mut pred: Vec<Option<(usize, bool)>> = vec![None; self.nodes];
            dist[src] = 0;
            for _ in 0..self.nodes {
                let mut changed = false;
                for link in 0..m {
                    if !free(link) {
                        continue;
                    }
                    let (a, b) = (self.link_src[link], self.link_dst[link]);
                    let (from, to, cost, forward) = if flow[link] { (b, a, -1, false) } else { (a, b, 1, true) };
                    if dist[from] != i64::MAX && dist[from] + cost < dist[to] {
                        dist[to] = dist[from] + cost;
                        pred[to] = Some((link, forward));
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[dst] == i64::MAX {
                return None;
            }
            let mut v = dst;
            while v != src {
                let (link, forward) = pred[v].expect("predecessor chain reaches the source");
                flow[link] = forward;
                v = if forward { self.link_src[link] } else { self.link_dst[link] };
            }
        }
        let walk = |flow: &mut Vec<bool>| {
            let mut path = Vec::new();
            let mut v = src;
            while v != dst {
                let &(link, head) = self.out[v].iter().find(|&&(link, _)| flow[link])?;
                flow[link] = false;
                path.push(link);
                v = head;
            }
            Some(path)
        };
        let first = walk(&mut flow)?;
        let second = walk(&mut flow)?;
        Some(if (second.len(), &second) < (first.len(), &first) { (second, first) } else { (first, second) })
    }
}

/// All simple paths of one exact length between two nodes, stored flat:
/// link sequences plus occupancy bitmasks.
#[derive(Debug, Default)]
pub(crate) struct PathList {
    pub len: usize,
    pub words: usize,
    pub links: Vec<u16>,
    pub masks: Vec<u64>,
}

impl PathList {
    pub fn count(&self) -> usize {
        if self.len == 0 {
            0
        } else {
            self.links.len() / self.len
        }
    }

    pub fn path(&self, i: usize) -> &[u16] {
        &self.links[i * self.len..(i + 1) * self.len]
    }

    pub fn mask(&self, i: usize) -> &[u64] {
        &self.masks[i * self.words..(i + 1) * self.words]
    }

    /// Enumerates simple `src -> dst` paths with exactly `len` links in
    /// lexicographic link-id order. `dist_to_dst` prunes prefixes that
    /// cannot reach `dst` in the remaining budget.
    pub fn enumerate(net: &Network, src: usize, dst: usize, len: usize, dist_to_dst: &[u32], words: usize) -> Self {
        let mut list = PathList { len, words, links: Vec::new(), masks: Vec::new() };
        if len == 0 || dist_to_dst[src] == UNREACHABLE || dist_to_dst[src] as usize > len {
            return list;
        }
        let mut on_path = vec![false; net.nodes];
        let mut stack: Vec<u16> = Vec::with_capacity(len);
        on_path[src] = true;
        enumerate_rec(net, src, dst, len, dist_to_dst, &mut on_path, &mut stack, &mut list);
        list
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    net: &Network,
    v: usize,
    dst: usize,
    len: usize,
    dist: &[u32],
    on_path: &mut [bool],
    stack: &mut Vec<u16>,
    list: &mut PathList,
) {
    let remaining = len - stack.len();
    for &(link, head) in &net.out[v] {
        if on_path[head] || dist[head] == UNREACHABLE || dist[head] as usize + 1 > remaining {
            continue;
        }
        if head == dst {
            if remaining == 1 {
                stack.push(link as u16);
                list.links.extend_from_slice(stack);
                let base = list.masks.len();
                list.masks.resize(base + list.words, 0);
                for &l in stack.iter() {
                    list.masks[base + l as usize / 64] |= 1 << (l % 64);
                }
                stack.pop();
            }
            continue;
        }
        on_path[head] = true;
        stack.push(link as u16);
        enumerate_rec(net, head, dst, len, dist, on_path, stack, list);
        stack.pop();
        on_path[head] = false;
    }
}

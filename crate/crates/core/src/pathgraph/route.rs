//! Shortest routes over the embedded graph.
//!
//! Edge weights are polyline lengths quantized to whole micrometers so that
//! route lengths are exact integer sums and ties are well defined. Among
//! equal-length routes the lexicographically smallest edge-id sequence wins:
//! a Dijkstra pass from the target gives exact distances-to-go, then a greedy
//! walk from the source takes the smallest edge id that stays on a shortest
//! route.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::{Deployment, Edge, EdgeId, NodeId, TravelDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteStep {
    pub edge: EdgeId,
    pub direction: TravelDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Route {
    pub steps: Vec<RouteStep>,
    pub length_um: u64,
}

impl Route {
    pub fn length_m(&self) -> f64 {
        self.length_um as f64 / 1e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoRoute;

impl core::fmt::Display for NoRoute {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("no route")
    }
}

/// Routing weight of an edge: its length in micrometers, at least 1.
pub fn edge_weight_um(e: &Edge) -> u64 {
    let um = libm::round(e.length() * 1e6);
    if um < 1.0 {
        1
    } else {
        um as u64
    }
}

struct Graph<'a> {
    index: BTreeMap<NodeId, usize>,
    // (edge, neighbor index, weight), sorted by edge id
    adj: Vec<Vec<(&'a Edge, usize, u64)>>,
}

impl<'a> Graph<'a> {
    fn new(d: &'a Deployment, enabled_only: bool) -> Self {
        let index: BTreeMap<NodeId, usize> =
            d.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut adj = vec![Vec::new(); d.nodes.len()];
        for e in &d.edges {
            if (enabled_only && !e.enabled) || e.from == e.to {
                continue;
            }
            let (Some(&a), Some(&b)) = (index.get(&e.from), index.get(&e.to)) else {
                continue;
            };
            let w = edge_weight_um(e);
            adj[a].push((e, b, w));
            adj[b].push((e, a, w));
        }
        for list in &mut adj {
            list.sort_by_key(|(e, _, _)| e.id);
        }
        Self { index, adj }
    }

    fn distances_to(&self, target: usize) -> Vec<Option<u64>> {
        let mut dist = vec![None; self.adj.len()];
        let mut heap = BinaryHeap::new();
        dist[target] = Some(0);
        heap.push(Reverse((0u64, target)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u].is_some_and(|best| d > best) {
                continue;
            }
            for &(_, v, w) in &self.adj[u] {
                let nd = d + w;
                if dist[v].is_none_or(|cur| nd < cur) {
                    dist[v] = Some(nd);
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }
}

/// Shortest route from `from` to `to` by polyline length.
///
/// Returns `NoRoute` if either node is unknown or unreachable under the
/// `enabled_only` filter. `from == to` yields an empty route.
pub fn shortest_route(
    d: &Deployment,
    from: NodeId,
    to: NodeId,
    enabled_only: bool,
) -> Result<Route, NoRoute> {
    let g = Graph::new(d, enabled_only);
    let (&src, &dst) = match (g.index.get(&from), g.index.get(&to)) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(NoRoute),
    };
    let dist = g.distances_to(dst);
    let total = dist[src].ok_or(NoRoute)?;

    let mut steps = Vec::new();
    let mut u = src;
    while u != dst {
        let remaining = dist[u].ok_or(NoRoute)?;
        let &(e, v, _) = g.adj[u]
            .iter()
            .find(|&&(_, v, w)| dist[v].is_some_and(|dv| dv + w == remaining))
            .ok_or(NoRoute)?;
        let here = d.nodes[u].id;
        let direction = if e.from == here { TravelDirection::Forward } else { TravelDirection::Backward };
        steps.push(RouteStep { edge: e.id, direction });
        u = v;
    }
    Ok(Route { steps, length_um: total })
}

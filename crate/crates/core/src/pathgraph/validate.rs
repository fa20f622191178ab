//! Deployment validation.
//!
//! Planarity is checked on the embedding: edge segments may only meet at the
//! position of a node both edges are incident to (or, within one edge, at the
//! vertex two consecutive segments share). Segment pairs are found with a
//! sort-and-sweep over x extents.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{observed_pair, Deployment, EdgeId, NodeId, QrId, MAX_ANCHOR_OFFSET, MIN_NODE_SEPARATION};
use crate::geometry::{segment_contact, Point2, SegmentContact};
use crate::palette::ColorPair;

/// Tolerance for "this contact point is the shared node".
const NODE_TOUCH_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Ids that do not resolve, duplicated ids, or malformed edges.
    Structure { message: alloc::string::String },
    /// Two segments meet somewhere other than a shared node.
    Crossing { edge_a: EdgeId, segment_a: usize, edge_b: EdgeId, segment_b: usize },
    /// Two edges leaving `node` show the same ordered pair.
    AmbiguousPair { node: NodeId, pair: ColorPair, edges: (EdgeId, EdgeId) },
    MissingAnchor { node: NodeId },
    NodesTooClose { a: NodeId, b: NodeId, distance: f64 },
    OutOfBounds { message: alloc::string::String },
}

impl Violation {
    fn rank(&self) -> u8 {
        match self {
            Violation::Structure { .. } => 0,
            Violation::Crossing { .. } => 1,
            Violation::AmbiguousPair { .. } => 2,
            Violation::MissingAnchor { .. } => 3,
            Violation::NodesTooClose { .. } => 4,
            Violation::OutOfBounds { .. } => 5,
        }
    }
}

/// Violations in deterministic order; empty means valid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn crossings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| matches!(v, Violation::Crossing { .. }))
    }
}

pub fn validate_deployment(d: &Deployment) -> ValidationReport {
    let mut out = Vec::new();
    structure(d, &mut out);
    crossings(d, &mut out);
    ambiguity(d, &mut out);
    anchors(d, &mut out);
    separation(d, &mut out);
    bounds(d, &mut out);
    // Each check emits in id order; a stable sort by kind keeps that.
    out.sort_by_key(Violation::rank);
    ValidationReport { violations: out }
}

fn structure(d: &Deployment, out: &mut Vec<Violation>) {
    use alloc::format;
    let mut push = |m: alloc::string::String| out.push(Violation::Structure { message: m });

    let mut seen = BTreeSet::new();
    for n in &d.nodes {
        if !seen.insert(n.id) {
            push(format!("duplicate node id {}", n.id));
        }
        if !n.position.is_finite() {
            push(format!("node {} has a non-finite position", n.id));
        }
    }
    let mut seen = BTreeSet::new();
    for e in &d.edges {
        if !seen.insert(e.id) {
            push(format!("duplicate edge id {}", e.id));
        }
        let (from, to) = (d.node(e.from), d.node(e.to));
        if from.is_none() || to.is_none() {
            push(format!("edge {} references a missing node", e.id));
        }
        if e.polyline.len() < 2 {
            push(format!("edge {} polyline has fewer than 2 points", e.id));
            continue;
        }
        if e.polyline.iter().any(|p| !p.is_finite()) {
            push(format!("edge {} has non-finite points", e.id));
        }
        if e.polyline.windows(2).any(|w| w[0] == w[1]) {
            push(format!("edge {} repeats a polyline point", e.id));
        }
        if e.color_pair.0 == e.color_pair.1 {
            push(format!("edge {} uses the same color twice", e.id));
        }
        let ends_ok = |n: Option<&super::Node>, p: Point2| n.is_none_or(|n| n.position.distance(p) <= NODE_TOUCH_EPS);
        if !ends_ok(from, e.polyline[0]) || !ends_ok(to, e.polyline[e.polyline.len() - 1]) {
            push(format!("edge {} polyline does not start/end at its nodes", e.id));
        }
    }
    let mut seen: BTreeSet<QrId> = BTreeSet::new();
    for a in &d.anchors {
        if !seen.insert(a.qr_id) {
            push(format!("duplicate qr id {}", a.qr_id));
        }
        match d.node(a.node) {
            None => push(format!("anchor {} references missing node {}", a.qr_id, a.node)),
            Some(n) if n.position.distance(a.position) > MAX_ANCHOR_OFFSET => {
                push(format!("anchor {} is more than {MAX_ANCHOR_OFFSET} m from node {}", a.qr_id, a.node))
            }
            _ => {}
        }
        if !(a.size > 0.0) {
            push(format!("anchor {} has non-positive size", a.qr_id));
        }
    }
}

struct Seg {
    edge: usize,
    index: usize,
    a: Point2,
    b: Point2,
    min_x: f64,
    max_x: f64,
}

fn crossings(d: &Deployment, out: &mut Vec<Violation>) {
    let mut segs = Vec::new();
    for (ei, e) in d.edges.iter().enumerate() {
        for (index, (a, b)) in e.segments().enumerate() {
            segs.push(Seg { edge: ei, index, a, b, min_x: a.x.min(b.x), max_x: a.x.max(b.x) });
        }
    }
    segs.sort_by(|s, t| s.min_x.total_cmp(&t.min_x));

    let mut found = Vec::new();
    for i in 0..segs.len() {
        let s = &segs[i];
        for t in &segs[i + 1..] {
            if t.min_x > s.max_x + 1e-9 {
                break;
            }
            if t.a.y.max(t.b.y) < s.a.y.min(s.b.y) - 1e-9 || t.a.y.min(t.b.y) > s.a.y.max(s.b.y) + 1e-9 {
                continue;
            }
            if is_illegal_contact(d, s, t) {
                let (x, y) = if (d.edges[s.edge].id, s.index) <= (d.edges[t.edge].id, t.index) { (s, t) } else { (t, s) };
                found.push(Violation::Crossing {
                    edge_a: d.edges[x.edge].id,
                    segment_a: x.index,
                    edge_b: d.edges[y.edge].id,
                    segment_b: y.index,
                });
            }
        }
    }
    found.sort_by_key(|v| match v {
        Violation::Crossing { edge_a, segment_a, edge_b, segment_b } => (*edge_a, *segment_a, *edge_b, *segment_b),
        _ => unreachable!(),
    });
    out.extend(found);
}

fn is_illegal_contact(d: &Deployment, s: &Seg, t: &Seg) -> bool {
    let point = match segment_contact(s.a, s.b, t.a, t.b) {
        SegmentContact::None => return false,
        SegmentContact::Overlap => return true,
        SegmentContact::Point(p) => p,
    };
    let es = &d.edges[s.edge];
    let et = &d.edges[t.edge];
    let at_node = |n: NodeId| d.node(n).is_some_and(|n| n.position.distance(point) <= NODE_TOUCH_EPS);
    if s.edge == t.edge {
        let last = es.polyline.len() - 2;
        let (lo, hi) = (s.index.min(t.index), s.index.max(t.index));
        if hi == lo + 1 {
            // Consecutive segments share exactly one vertex.
            return point.distance(es.polyline[hi]) > NODE_TOUCH_EPS;
        }
        // A loop edge closes on its own node.
        return !(lo == 0 && hi == last && es.from == es.to && at_node(es.from));
    }
    let shared = [es.from, es.to]
        .into_iter()
        .filter(|n| *n == et.from || *n == et.to)
        .any(at_node);
    !shared
}

fn ambiguity(d: &Deployment, out: &mut Vec<Violation>) {
    let mut ids: Vec<NodeId> = d.nodes.iter().map(|n| n.id).collect();
    ids.sort();
    for node in ids {
        let mut seen: BTreeMap<ColorPair, EdgeId> = BTreeMap::new();
        let mut leaving = Vec::new();
        for e in d.incident_edges(node) {
            if e.from == node {
                leaving.push((e.id, observed_pair(e, super::TravelDirection::Forward)));
            }
            if e.to == node {
                leaving.push((e.id, observed_pair(e, super::TravelDirection::Backward)));
            }
        }
        leaving.sort();
        for (edge, pair) in leaving {
            match seen.get(&pair) {
                Some(&first) => out.push(Violation::AmbiguousPair { node, pair, edges: (first, edge) }),
                None => {
                    seen.insert(pair, edge);
                }
            }
        }
    }
}

fn anchors(d: &Deployment, out: &mut Vec<Violation>) {
    let mut ids: Vec<NodeId> = d.nodes.iter().map(|n| n.id).collect();
    ids.sort();
    for node in ids {
        if d.anchors_of(node).next().is_none() {
            out.push(Violation::MissingAnchor { node });
        }
    }
}

fn separation(d: &Deployment, out: &mut Vec<Violation>) {
    let mut nodes: Vec<_> = d.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let distance = a.position.distance(b.position);
            if distance < MIN_NODE_SEPARATION {
                out.push(Violation::NodesTooClose { a: a.id, b: b.id, distance });
            }
        }
    }
}

fn bounds(d: &Deployment, out: &mut Vec<Violation>) {
    use alloc::format;
    let r = d.floor_bounds;
    let mut nodes: Vec<_> = d.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    for n in nodes {
        if !r.contains(n.position) {
            out.push(Violation::OutOfBounds { message: format!("node {}", n.id) });
        }
    }
    let mut edges: Vec<_> = d.edges.iter().collect();
    edges.sort_by_key(|e| e.id);
    for e in edges {
        if e.polyline.iter().any(|p| !r.contains(*p)) {
            out.push(Violation::OutOfBounds { message: format!("edge {}", e.id) });
        }
    }
    let mut anchors: Vec<_> = d.anchors.iter().collect();
    anchors.sort_by_key(|a| a.qr_id);
    for a in anchors {
        let h = a.size / 2.0;
        let corners = [(-h, -h), (h, h)].map(|(dx, dy)| a.position + Point2::new(dx, dy));
        if corners.iter().any(|c| !r.contains(*c)) {
            out.push(Violation::OutOfBounds { message: format!("anchor {}", a.qr_id) });
        }
    }
}

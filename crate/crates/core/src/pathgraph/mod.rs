//! Deployed path graph: nodes at intersections and points of interest, edges
//! made of two parallel colored strips, and the floor markers anchoring each
//! node.

mod route;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{closest_on_segment, polyline_length, Point2, Rect};
use crate::palette::{ColorId, ColorPair};

pub use route::{edge_weight_um, shortest_route, NoRoute, Route, RouteStep};
pub use validate::{validate_deployment, ValidationReport, Violation};

/// Minimum allowed distance between two nodes, in meters.
pub const MIN_NODE_SEPARATION: f64 = 0.5;
/// Maximum distance between an anchor and its node, in meters.
pub const MAX_ANCHOR_OFFSET: f64 = 0.5;
pub const DEFAULT_MARKER_SIZE: f64 = 0.20;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident, $inner:ty) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub $inner);

        impl core::fmt::Display for $name {
            fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(NodeId, u32);
id_type!(EdgeId, u32);
id_type!(
    /// Key printed into a node marker.
    QrId,
    u16
);
id_type!(DeploymentId, u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Intersection,
    PointOfInterest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub position: Point2,
    pub kind: NodeKind,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub polyline: Vec<Point2>,
    pub color_pair: ColorPair,
    pub enabled: bool,
}

impl Edge {
    pub fn length(&self) -> f64 {
        polyline_length(&self.polyline)
    }

    /// Node at the far end when leaving `node` along this edge.
    pub fn other_end(&self, node: NodeId) -> Option<NodeId> {
        if node == self.from {
            Some(self.to)
        } else if node == self.to {
            Some(self.from)
        } else {
            None
        }
    }

    /// Travel direction when leaving `node` along this edge.
    pub fn direction_from(&self, node: NodeId) -> Option<TravelDirection> {
        if node == self.from {
            Some(TravelDirection::Forward)
        } else if node == self.to {
            Some(TravelDirection::Backward)
        } else {
            None
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.polyline.windows(2).map(|w| (w[0], w[1]))
    }

    /// Point and unit tangent (in the Forward sense) at arc length `s` from
    /// the from-node, clamped to the polyline.
    pub fn point_at(&self, s: f64) -> (Point2, Point2) {
        let mut left = s.max(0.0);
        let mut last = (self.polyline[0], Point2::new(1.0, 0.0));
        for (a, b) in self.segments() {
            let len = a.distance(b);
            if len == 0.0 {
                continue;
            }
            let t = (b - a) * (1.0 / len);
            if left <= len {
                return (a + t * left, t);
            }
            left -= len;
            last = (b, t);
        }
        last
    }

    /// Arc length from the from-node of the polyline point closest to `p`.
    pub fn project(&self, p: Point2) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut walked = 0.0;
        for (a, b) in self.segments() {
            let (q, _) = closest_on_segment(p, a, b);
            let d = p.distance(q);
            if d < best.0 {
                best = (d, walked + a.distance(q));
            }
            walked += a.distance(b);
        }
        best.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrAnchor {
    pub qr_id: QrId,
    pub node: NodeId,
    pub position: Point2,
    #[serde(default = "default_marker_size")]
    pub size: f64,
}

fn default_marker_size() -> f64 {
    DEFAULT_MARKER_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub deployment_id: DeploymentId,
    pub version: u64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub anchors: Vec<QrAnchor>,
    pub floor_bounds: Rect,
}

impl Deployment {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn edge_mut(&mut self, id: EdgeId) -> Option<&mut Edge> {
        self.edges.iter_mut().find(|e| e.id == id)
    }

    pub fn anchor(&self, qr: QrId) -> Option<&QrAnchor> {
        self.anchors.iter().find(|a| a.qr_id == qr)
    }

    pub fn anchors_of(&self, node: NodeId) -> impl Iterator<Item = &QrAnchor> {
        self.anchors.iter().filter(move |a| a.node == node)
    }

    /// Edges touching `node`, in id order.
    pub fn incident_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == node || e.to == node)
    }

    pub fn node_by_label(&self, label: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.label.as_deref() == Some(label))
    }
}

/// Which way an edge is walked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TravelDirection {
    /// from → to
    Forward,
    /// to → from
    Backward,
}

impl TravelDirection {
    pub fn reverse(self) -> Self {
        match self {
            TravelDirection::Forward => TravelDirection::Backward,
            TravelDirection::Backward => TravelDirection::Forward,
        }
    }
}

/// Strip colors in left-to-right order for a walker facing along `dir`.
pub fn observed_pair(e: &Edge, dir: TravelDirection) -> ColorPair {
    let (c1, c2) = e.color_pair;
    match dir {
        TravelDirection::Forward => (c1, c2),
        TravelDirection::Backward => (c2, c1),
    }
}

/// Distance from `p` to the nearest point of the edge polyline.
pub fn cross_track_distance(p: Point2, e: &Edge) -> f64 {
    e.segments()
        .map(|(a, b)| p.distance(closest_on_segment(p, a, b).0))
        .fold(f64::INFINITY, f64::min)
}

/// Distinct ordered pairs, all 30 of them.
pub fn all_color_pairs() -> impl Iterator<Item = ColorPair> {
    ColorId::ALL
        .into_iter()
        .flat_map(|a| ColorId::ALL.into_iter().map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
}

//! Built-in demo: a U-shaped corridor with a shortcut.
//!
//! ```text
//!   B(1,9) ──e1── C(5,9)
//!   │  ╲            │
//!   e0   e3         e2
//!   │      ╲        │
//!   │        ╲    D(5,5) Exhibit
//!   │
//!   A(1,1) Entrance
//! ```
//!
//! From the entrance to the exhibit the route takes the diagonal e3 at the
//! T-junction B. The admin script disables e3 while the walker is still on
//! e0, so the scan at B sends it around the U instead.
//!
//! Strips of neighboring edges that meet in a corner at a node have
//! different colors, so they never fuse into one blob.

use arianna_core::palette::ColorId::*;
use arianna_core::pathgraph::{Deployment, DeploymentId, Edge, EdgeId, Node, NodeId, NodeKind, QrAnchor, QrId};
use arianna_core::geometry::Rect;
use arianna_core::Point2;

use super::{ScheduledPatch, SimConfig};
use crate::pathserver::AdminPatch;

pub const ENTRANCE: NodeId = NodeId(0);
pub const EXHIBIT: NodeId = NodeId(3);
pub const BRANCH: EdgeId = EdgeId(3);
pub const DEFAULT_PATCH_AT: f64 = 10.0;

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

pub fn demo_deployment() -> Deployment {
    let node = |id, x, y, kind, label: Option<&str>| Node {
        id: NodeId(id),
        position: p(x, y),
        kind,
        label: label.map(Into::into),
    };
    let nodes = vec![
        node(0, 1.0, 1.0, NodeKind::PointOfInterest, Some("Entrance")),
        node(1, 1.0, 9.0, NodeKind::Intersection, None),
        node(2, 5.0, 9.0, NodeKind::Intersection, None),
        node(3, 5.0, 5.0, NodeKind::PointOfInterest, Some("Exhibit")),
    ];
    let edge = |id, from: usize, to: usize, pair| Edge {
        id: EdgeId(id),
        from: nodes[from].id,
        to: nodes[to].id,
        polyline: vec![nodes[from].position, nodes[to].position],
        color_pair: pair,
        enabled: true,
    };
    let edges = vec![
        edge(0, 0, 1, (Red, Blue)),
        edge(1, 1, 2, (Green, Yellow)),
        edge(2, 2, 3, (Magenta, Red)),
        edge(3, 1, 3, (Cyan, Magenta)),
    ];
    let anchors = nodes
        .iter()
        .map(|n| QrAnchor { qr_id: QrId(11 + n.id.0 as u16), node: n.id, position: n.position, size: 0.2 })
        .collect();
    Deployment {
        deployment_id: DeploymentId(2013),
        version: 1,
        nodes,
        edges,
        anchors,
        floor_bounds: Rect::new(p(0.0, 0.0), p(7.0, 11.0)),
    }
}

/// Entrance to exhibit, with the branch disabled at `patch_at` seconds
/// (`None` for the unpatched baseline).
pub fn demo_config(patch_at: Option<f64>) -> SimConfig {
    SimConfig {
        from: ENTRANCE,
        to: EXHIBIT,
        patches: patch_at
            .map(|at| vec![ScheduledPatch { at, patch: AdminPatch::disable_edge(BRANCH) }])
            .unwrap_or_default(),
        ..SimConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use arianna_core::pathgraph::{shortest_route, validate_deployment};

    #[test]
    fn validates_cleanly() {
        assert_eq!(validate_deployment(&demo_deployment()).violations, vec![]);
    }

    #[test]
    fn branch_is_the_shortcut() {
        let mut d = demo_deployment();
        let r = shortest_route(&d, ENTRANCE, EXHIBIT, true).unwrap();
        assert_eq!(r.steps.iter().map(|s| s.edge.0).collect::<Vec<_>>(), [0, 3]);
        d.edge_mut(BRANCH).unwrap().enabled = false;
        let r = shortest_route(&d, ENTRANCE, EXHIBIT, true).unwrap();
        assert_eq!(r.steps.iter().map(|s| s.edge.0).collect::<Vec<_>>(), [0, 1, 2]);
    }
}

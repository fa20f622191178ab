//! Seeded generator of valid deployments.
//!
//! Nodes sit on a jittered grid, on a 4-connected set of cells; corridors
//! join grid neighbors with a 45° diagonal leg followed by an axis-aligned leg (either order), so every
//! segment direction is a multiple of 45°. A spanning tree is grown first
//! (randomized Kruskal over neighbor candidates), then a few extra corridors
//! close loops. Candidates that cross, crowd another lane or node, or leave a
//! node too close in angle to an existing corridor are rejected. All
//! coordinates are kept on the millimeter grid.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{segment_distance, Point2, Rect};
use crate::palette::ColorPair;
use crate::pathgraph::{
    all_color_pairs, validate_deployment, Deployment, DeploymentId, Edge, EdgeId, Node, NodeId, NodeKind, QrAnchor,
    QrId,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    pub seed: u64,
    /// Inclusive range.
    pub node_count: (u32, u32),
    pub floor_size: (f64, f64),
    pub strip_width: f64,
    pub strip_gap: f64,
    pub marker_size: f64,
    /// Fraction of leftover neighbor candidates tried as loop-closing corridors.
    pub extra_edge_ratio: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            seed: 0,
            node_count: (4, 8),
            floor_size: (10.0, 10.0),
            strip_width: 0.05,
            strip_gap: 0.05,
            marker_size: 0.20,
            extra_edge_ratio: 0.3,
        }
    }
}

impl WorldParams {
    /// Raster settings matching this world's strip geometry.
    pub fn raster_params(&self) -> super::RasterParams {
        super::RasterParams { strip_width: self.strip_width, strip_gap: self.strip_gap, ..Default::default() }
    }

    pub fn check(&self) -> Result<(), GenerationFailure> {
        let bad = |m: &str| Err(GenerationFailure(m.into()));
        if self.node_count.0 < 2 || self.node_count.0 > self.node_count.1 {
            return bad("node_count must be an increasing range starting at 2 or more");
        }
        if !(self.strip_width > 0.0 && self.strip_gap > 0.0 && self.marker_size > 0.0) {
            return bad("strip width, gap and marker size must be positive");
        }
        if !(self.floor_size.0 >= 2.0 && self.floor_size.1 >= 2.0) {
            return bad("floor must be at least 2 m on each side");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationFailure(pub alloc::string::String);

impl core::fmt::Display for GenerationFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "world generation failed: {}", self.0)
    }
}

const MARGIN_MM: i64 = 700;
const MIN_SPACING_MM: i64 = 1200;
const MAX_SPACING_MM: i64 = 2500;
const ATTEMPTS: usize = 64;
const LANE_CLEARANCE: f64 = 0.35;
const NODE_CLEARANCE: f64 = 0.45;
/// cos of the smallest allowed angle between corridors leaving one node (44°).
const MAX_DEPARTURE_COS: f64 = 0.7193;

type Mm = (i64, i64);

fn mm_point(p: Mm) -> Point2 {
    Point2::new(p.0 as f64 / 1000.0, p.1 as f64 / 1000.0)
}

/// Generates a deployment that passes [`validate_deployment`].
pub fn generate_world(params: &WorldParams) -> Result<Deployment, GenerationFailure> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = rng.random_range(params.node_count.0..=params.node_count.1) as usize;

    let w_mm = libm::round(params.floor_size.0 * 1000.0) as i64;
    let h_mm = libm::round(params.floor_size.1 * 1000.0) as i64;
    let usable = (w_mm - 2 * MARGIN_MM, h_mm - 2 * MARGIN_MM);
    // Largest spacing that still fits n grid cells.
    let mut spacing = MAX_SPACING_MM;
    while spacing >= MIN_SPACING_MM && cells(usable, spacing) < n {
        spacing -= 100;
    }
    if spacing < MIN_SPACING_MM {
        return Err(GenerationFailure(format!("{n} nodes do not fit a {w_mm}x{h_mm} mm floor")));
    }

    for _ in 0..ATTEMPTS {
        if let Some(d) = attempt(params, &mut rng, n, spacing, usable, (w_mm, h_mm)) {
            if validate_deployment(&d).is_valid() {
                return Ok(d);
            }

        }
    }
    Err(GenerationFailure(format!("no valid layout after {ATTEMPTS} attempts")))
}

fn cells(usable: Mm, spacing: i64) -> usize {
    if usable.0 < 0 || usable.1 < 0 {
        return 0;
    }
    ((usable.0 / spacing + 1) * (usable.1 / spacing + 1)) as usize
}

fn attempt(
    params: &WorldParams,
    rng: &mut ChaCha8Rng,
    n: usize,
    spacing: i64,
    usable: Mm,
    floor: Mm,
) -> Option<Deployment> {
    let cols = usable.0 / spacing + 1;
    let rows = usable.1 / spacing + 1;
    // Grow a 4-connected set of grid cells from a random seed cell.
    let mut grid: Vec<(i64, i64)> = vec![(rng.random_range(0..cols), rng.random_range(0..rows))];
    while grid.len() < n {
        let mut frontier: Vec<(i64, i64)> = grid
            .iter()
            .flat_map(|&(c, r)| [(c + 1, r), (c - 1, r), (c, r + 1), (c, r - 1)])
            .filter(|&(c, r)| (0..cols).contains(&c) && (0..rows).contains(&r))
            .filter(|q| !grid.contains(q))
            .collect();
        frontier.sort();
        frontier.dedup();
        grid.push(frontier[rng.random_range(0..frontier.len())]);
    }
    grid.sort();

    // Center the grid on the floor, then jitter by up to 15% of the spacing.
    let off_x = (floor.0 - (cols - 1) * spacing) / 2;
    let off_y = (floor.1 - (rows - 1) * spacing) / 2;
    let jitter = spacing * 15 / 100;
    let cells: Vec<(i64, i64)> = grid.clone();
    let pos: Vec<Mm> = grid
        .iter()
        .map(|&(c, r)| {
            (
                off_x + c * spacing + rng.random_range(-jitter..=jitter),
                off_y + r * spacing + rng.random_range(-jitter..=jitter),
            )
        })
        .collect();

    // Grid neighbors (8-connectivity) as candidates, in random order.
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (dc, dr) = (cells[i].0 - cells[j].0, cells[i].1 - cells[j].1);
            if dc.abs() <= 1 && dr.abs() <= 1 {
                candidates.push((i, j));
            }
        }
    }
    candidates.shuffle(rng);

    let mut uf: Vec<usize> = (0..n).collect();
    let mut corridors: Vec<(usize, usize, Vec<Mm>)> = Vec::new();
    let mut leftovers = Vec::new();
    for (i, j) in candidates {
        if find(&mut uf, i) == find(&mut uf, j) {
            leftovers.push((i, j));
            continue;
        }
        if let Some(poly) = fitting_corridor(rng, &pos, &corridors, i, j) {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            uf[ri] = rj;
            corridors.push((i, j, poly));
        }
    }
    let root = find(&mut uf, 0);
    if (0..n).any(|i| find(&mut uf, i) != root) {
        return None;
    }
    for (i, j) in leftovers {
        if !rng.random_bool(params.extra_edge_ratio.clamp(0.0, 1.0)) {
            continue;
        }
        if let Some(poly) = fitting_corridor(rng, &pos, &corridors, i, j) {
            corridors.push((i, j, poly));
        }
    }

    let mut degree = vec![0usize; n];
    for (i, j, _) in &corridors {
        degree[*i] += 1;
        degree[*j] += 1;
    }
    let mut nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            id: NodeId(i as u32),
            position: mm_point(pos[i]),
            kind: if degree[i] == 1 { NodeKind::PointOfInterest } else { NodeKind::Intersection },
            label: None,
        })
        .collect();
    if !nodes.iter().any(|n| n.kind == NodeKind::PointOfInterest) {
        nodes[0].kind = NodeKind::PointOfInterest;
    }
    for n in &mut nodes {
        if n.kind == NodeKind::PointOfInterest {
            n.label = Some(format!("POI {}", n.id));
        }
    }

    let mut edges: Vec<Edge> = Vec::new();
    for (k, (i, j, poly)) in corridors.into_iter().enumerate() {
        let color_pair = pick_colors(rng, &edges, NodeId(i as u32), NodeId(j as u32))?;
        edges.push(Edge {
            id: EdgeId(k as u32),
            from: NodeId(i as u32),
            to: NodeId(j as u32),
            polyline: poly.into_iter().map(mm_point).collect(),
            color_pair,
            enabled: true,
        });
    }

    let anchors = nodes
        .iter()
        .map(|n| QrAnchor { qr_id: QrId(100 + n.id.0 as u16), node: n.id, position: n.position, size: params.marker_size })
        .collect();

    Some(Deployment {
        deployment_id: DeploymentId((params.seed & 0xffff) as u16),
        version: 1,
        nodes,
        edges,
        anchors,
        floor_bounds: Rect::new(Point2::new(0.0, 0.0), mm_point(floor)),
    })
}

fn find(uf: &mut [usize], mut i: usize) -> usize {
    while uf[i] != i {
        uf[i] = uf[uf[i]];
        i = uf[i];
    }
    i
}

/// Either corridor shape between nodes `i` and `j` that fits, tried in
/// random order.
fn fitting_corridor(
    rng: &mut ChaCha8Rng,
    pos: &[Mm],
    corridors: &[(usize, usize, Vec<Mm>)],
    i: usize,
    j: usize,
) -> Option<Vec<Mm>> {
    let first = rng.random_bool(0.5);
    [first, !first].into_iter().map(|d| corridor(pos[i], pos[j], d)).find(|poly| fits(pos, corridors, i, j, poly))
}

/// Polyline from `a` to `b` made of a 45° leg and an axis-aligned leg.
fn corridor(a: Mm, b: Mm, diagonal_first: bool) -> Vec<Mm> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let m = dx.abs().min(dy.abs());
    if m == 0 || dx.abs() == dy.abs() {
        return vec![a, b];
    }
    let diag = (dx.signum() * m, dy.signum() * m);
    let bend = if diagonal_first { (a.0 + diag.0, a.1 + diag.1) } else { (b.0 - diag.0, b.1 - diag.1) };
    vec![a, bend, b]
}

fn fits(pos: &[Mm], corridors: &[(usize, usize, Vec<Mm>)], i: usize, j: usize, poly: &[Mm]) -> bool {
    let pts: Vec<Point2> = poly.iter().copied().map(mm_point).collect();
    let segs: Vec<(Point2, Point2)> = pts.windows(2).map(|w| (w[0], w[1])).collect();

    // Keep clear of unrelated nodes.
    for (k, &p) in pos.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        let q = mm_point(p);
        if segs.iter().any(|&(a, b)| crate::geometry::point_segment_distance(q, a, b) < NODE_CLEARANCE) {
            return false;
        }
    }

    for (ci, cj, other) in corridors {
        let opts: Vec<Point2> = other.iter().copied().map(mm_point).collect();
        let shared: Vec<usize> = [i, j].into_iter().filter(|v| v == ci || v == cj).collect();
        if shared.len() == 2 {
            return false;
        }
        // Departure angles at a shared node.
        if let Some(&s) = shared.first() {
            let here = mm_point(pos[s]);
            let mine = departure(&pts, here);
            let theirs = departure(&opts, here);
            if mine.dot(theirs) > MAX_DEPARTURE_COS {
                return false;
            }
        }
        for (si, &(a, b)) in segs.iter().enumerate() {
            for (ti, w) in opts.windows(2).enumerate() {
                let (c, d) = (w[0], w[1]);
                let touches_shared = shared.first().is_some_and(|&s| {
                    let here = mm_point(pos[s]);
                    let mine_end = (si == 0 && a == here) || (si == segs.len() - 1 && b == here);
                    let theirs_end = (ti == 0 && c == here) || (ti == opts.len() - 2 && d == here);
                    mine_end && theirs_end
                });
                if touches_shared {
                    continue;
                }
                if segment_distance(a, b, c, d) < LANE_CLEARANCE {
                    return false;
                }
            }
        }
    }
    true
}

/// Unit direction of the polyline leaving `node` (either end).
fn departure(pts: &[Point2], node: Point2) -> Point2 {
    let (a, b) = if pts[0] == node { (pts[0], pts[1]) } else { (pts[pts.len() - 1], pts[pts.len() - 2]) };
    let d = b - a;
    d * (1.0 / d.norm())
}

/// Random ordered pair that keeps both endpoints unambiguous.
fn pick_colors(rng: &mut ChaCha8Rng, edges: &[Edge], from: NodeId, to: NodeId) -> Option<ColorPair> {
    let leaving = |node: NodeId| -> Vec<ColorPair> {
        edges
            .iter()
            .filter_map(|e| e.direction_from(node).map(|dir| crate::pathgraph::observed_pair(e, dir)))
            .collect()
    };
    let at_from = leaving(from);
    let at_to = leaving(to);
    let mut pairs: Vec<ColorPair> = all_color_pairs().collect();
    pairs.shuffle(rng);
    pairs.into_iter().find(|&(c1, c2)| {
        let fwd = (c1, c2);
        let back = (c2, c1);
        !at_from.contains(&fwd) && !at_to.contains(&back)
    })
}

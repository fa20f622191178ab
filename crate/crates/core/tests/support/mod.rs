//! Reference implementations and generators shared by integration tests.
//!
//! The oracles here are deliberately naive: dense Floyd–Warshall for
//! routing, exact integer segment intersection over every pair for
//! planarity, bit-at-a-time CRC-8. They share no code with the library.

#![allow(dead_code)]

use arianna_core::geometry::{Point2, Rect};
use arianna_core::navigator::{Assignment, NavConfig, Navigator, Touch};
use arianna_core::palette::ColorPair;
use arianna_core::pathgraph::{
    all_color_pairs, observed_pair, Deployment, DeploymentId, Edge, EdgeId, Node, NodeId, NodeKind, QrAnchor, QrId,
    TravelDirection,
};
use arianna_core::scene::{generate_world, rasterize_floor, render_frame, CameraIntrinsics, FloorRaster, Pose, WorldParams};
use arianna_core::vision::{detect_lane, segment_colors, VisionParams};
use arianna_core::ColorId;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- fixtures

pub fn straight_edge(length: f64) -> Deployment {
    let a = Node { id: NodeId(0), position: Point2::new(1.0, 1.0), kind: NodeKind::PointOfInterest, label: None };
    let b = Node { id: NodeId(1), position: Point2::new(1.0, 1.0 + length), kind: NodeKind::PointOfInterest, label: None };
    Deployment {
        deployment_id: DeploymentId(1),
        version: 1,
        edges: vec![Edge {
            id: EdgeId(0),
            from: a.id,
            to: b.id,
            polyline: vec![a.position, b.position],
            color_pair: (ColorId::Red, ColorId::Blue),
            enabled: true,
        }],
        anchors: vec![
            QrAnchor { qr_id: QrId(1), node: a.id, position: a.position, size: 0.2 },
            QrAnchor { qr_id: QrId(2), node: b.id, position: b.position, size: 0.2 },
        ],
        nodes: vec![a, b],
        floor_bounds: Rect::new(Point2::new(0.0, 0.0), Point2::new(2.0, length + 2.0)),
    }
}

/// Generated world and its floor raster.
pub fn world(seed: u64) -> (Deployment, FloorRaster) {
    let wp = WorldParams { seed, ..Default::default() };
    let d = generate_world(&wp).expect("default world params generate");
    let r = rasterize_floor(&d, &wp.raster_params());
    (d, r)
}

/// Random pose on a random edge: within 0.3 m of the axis, heading within
/// 20° of the travel direction, at least half a meter from either end node.
pub fn sample_on_lane(d: &Deployment, rng: &mut ChaCha8Rng) -> Option<(Pose, EdgeId, TravelDirection)> {
    let e = &d.edges[rng.random_range(0..d.edges.len())];
    let len = e.length();
    if len < 1.2 {
        return None;
    }
    let dir = if rng.random_bool(0.5) { TravelDirection::Forward } else { TravelDirection::Backward };
    let s = rng.random_range(0.5..len - 0.5);
    let (pt, t) = e.point_at(s);
    let t = if dir == TravelDirection::Forward { t } else { -t };
    let lateral = rng.random_range(-0.3..0.3);
    let heading = t.y.atan2(t.x) + rng.random_range(-20f64..20.0).to_radians();
    Some((Pose::new(pt + t.perp() * lateral, heading), e.id, dir))
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CodecTally {
    pub total: usize,
    pub correct: usize,
    /// Detections reading the expected colors in swapped order.
    pub reversed: usize,
}

impl CodecTally {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.total.max(1) as f64
    }
}

/// Render → segment → detect on `per_world` on-lane poses in each world.
pub fn codec_chain(worlds: std::ops::Range<u64>, per_world: usize, rng: &mut ChaCha8Rng) -> CodecTally {
    let k = CameraIntrinsics::default();
    let p = VisionParams::default();
    let mut tally = CodecTally::default();
    for seed in worlds {
        let (d, raster) = world(seed);
        let mut n = 0;
        while n < per_world {
            let Some((pose, eid, dir)) = sample_on_lane(&d, rng) else { continue };
            n += 1;
            tally.total += 1;
            let want = observed_pair(d.edge(eid).unwrap(), dir);
            let f = render_frame(&raster, &pose, &k);
            match detect_lane(&segment_colors(&f, &p), &p) {
                Some(det) if det.ordered_pair == want => tally.correct += 1,
                Some(det) if det.ordered_pair == (want.1, want.0) => tally.reversed += 1,
                _ => {}
            }
        }
    }
    tally
}

// ----------------------------------------------------------------- routing

/// Small random connected graph on an integer grid: a random spanning tree
/// plus extra (possibly parallel) edges, some of them bent, some disabled.
/// Grid coordinates make equal-length alternatives common.
pub fn routing_deployment(rng: &mut ChaCha8Rng) -> Deployment {
    let n = rng.random_range(2..=20usize);
    let mut cells: Vec<(i32, i32)> = (0..12).flat_map(|x| (0..12).map(move |y| (x, y))).collect();
    let mut nodes = Vec::new();
    for i in 0..n {
        let k = rng.random_range(0..cells.len());
        let (x, y) = cells.swap_remove(k);
        nodes.push(Node {
            id: NodeId(i as u32 * 3 + 1),
            position: Point2::new(x as f64, y as f64),
            kind: NodeKind::Intersection,
            label: None,
        });
    }
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((rng.random_range(0..i), i));
    }
    for _ in 0..rng.random_range(0..=n) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.push((a, b));
        }
    }
    let mut ids: Vec<u32> = (0..pairs.len() as u32 * 2).collect();
    ids.shuffle(rng);
    let palette = all_color_pairs().collect::<Vec<_>>();
    let edges = pairs
        .iter()
        .zip(ids)
        .map(|(&(a, b), id)| {
            let (pa, pb) = (nodes[a].position, nodes[b].position);
            let mut polyline = vec![pa];
            if rng.random_bool(0.4) {
                let bend = Point2::new(rng.random_range(-1..13) as f64, rng.random_range(-1..13) as f64);
                if bend != pa && bend != pb {
                    polyline.push(bend);
                }
            }
            polyline.push(pb);
            Edge {
                id: EdgeId(id),
                from: nodes[a].id,
                to: nodes[b].id,
                polyline,
                color_pair: *palette.choose(rng).unwrap(),
                enabled: rng.random_bool(0.85),
            }
        })
        .collect();
    Deployment {
        deployment_id: DeploymentId(9),
        version: 1,
        anchors: Vec::new(),
        nodes,
        edges,
        floor_bounds: Rect::new(Point2::new(-2.0, -2.0), Point2::new(14.0, 14.0)),
    }
}

/// Micrometers, rounded, floor of one.
pub fn oracle_weight(e: &Edge) -> u64 {
    let mut len = 0.0;
    for w in e.polyline.windows(2) {
        len += ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
    }
    ((len * 1e6).round() as u64).max(1)
}

pub struct AllPairs {
    pub ids: Vec<NodeId>,
    pub dist: Vec<Vec<Option<u64>>>,
}

impl AllPairs {
    pub fn index(&self, n: NodeId) -> usize {
        self.ids.iter().position(|&m| m == n).unwrap()
    }
}

pub fn floyd_warshall(d: &Deployment, enabled_only: bool) -> AllPairs {
    let ids: Vec<NodeId> = d.nodes.iter().map(|n| n.id).collect();
    let n = ids.len();
    let idx = |id: NodeId| ids.iter().position(|&m| m == id).unwrap();
    let mut dist = vec![vec![None::<u64>; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in d.edges.iter().filter(|e| e.enabled || !enabled_only) {
        let (a, b) = (idx(e.from), idx(e.to));
        if a == b {
            continue;
        }
        let w = oracle_weight(e);
        for (x, y) in [(a, b), (b, a)] {
            if dist[x][y].is_none_or(|cur| w < cur) {
                dist[x][y] = Some(w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(ik), Some(kj)) = (dist[i][k], dist[k][j]) {
                    if dist[i][j].is_none_or(|cur| ik + kj < cur) {
                        dist[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    AllPairs { ids, dist }
}

/// Lexicographically smallest edge-id sequence among shortest routes: at
/// each node take the smallest incident edge that stays shortest.
pub fn oracle_route(d: &Deployment, ap: &AllPairs, from: NodeId, to: NodeId, enabled_only: bool) -> Option<Vec<EdgeId>> {
    let dst = ap.index(to);
    ap.dist[ap.index(from)][dst]?;
    let mut out = Vec::new();
    let mut u = from;
    while u != to {
        let remaining = ap.dist[ap.index(u)][dst].unwrap();
        let mut incident: Vec<&Edge> = d
            .edges
            .iter()
            .filter(|e| (e.enabled || !enabled_only) && e.from != e.to && (e.from == u || e.to == u))
            .collect();
        incident.sort_by_key(|e| e.id);
        let e = incident
            .into_iter()
            .find(|e| {
                let v = if e.from == u { e.to } else { e.from };
                ap.dist[ap.index(v)][dst].is_some_and(|dv| dv + oracle_weight(e) == remaining)
            })
            .unwrap();
        out.push(e.id);
        u = if e.from == u { e.to } else { e.from };
    }
    Some(out)
}

// --------------------------------------------------------------- planarity

/// Edges over nodes on a coarse integer grid, with up to two bends each, so
/// that crossings, touches and collinear overlaps all occur.
pub fn planarity_edge_set(rng: &mut ChaCha8Rng) -> Deployment {
    let n = rng.random_range(3..=7usize);
    let mut cells: Vec<(i32, i32)> = (0..6).flat_map(|x| (0..6).map(move |y| (x, y))).collect();
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            let (x, y) = cells.swap_remove(rng.random_range(0..cells.len()));
            Node { id: NodeId(i as u32), position: Point2::new(x as f64, y as f64), kind: NodeKind::Intersection, label: None }
        })
        .collect();
    let m = rng.random_range(1..=5usize);
    let mut edges = Vec::new();
    for id in 0..m {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n);
        if a == b {
            b = (a + 1) % n;
        }
        let mut polyline = vec![nodes[a].position];
        let bends = if rng.random_bool(0.3) { rng.random_range(1..=2) } else { 0 };
        for _ in 0..bends {
            let p = Point2::new(rng.random_range(0..6) as f64, rng.random_range(0..6) as f64);
            if *polyline.last().unwrap() != p {
                polyline.push(p);
            }
        }
        if *polyline.last().unwrap() == nodes[b].position {
            polyline.pop();
        }
        polyline.push(nodes[b].position);
        if polyline.len() < 2 {
            continue;
        }
        edges.push(Edge {
            id: EdgeId(id as u32),
            from: nodes[a].id,
            to: nodes[b].id,
            polyline,
            color_pair: (ColorId::Red, ColorId::Blue),
            enabled: true,
        });
    }
    Deployment {
        deployment_id: DeploymentId(3),
        version: 1,
        anchors: Vec::new(),
        nodes,
        edges,
        floor_bounds: Rect::new(Point2::new(-1.0, -1.0), Point2::new(7.0, 7.0)),
    }
}

type P = (i128, i128);

fn ip(p: Point2) -> P {
    assert!(p.x.fract() == 0.0 && p.y.fract() == 0.0);
    (p.x as i128, p.y as i128)
}

fn cross(a: P, b: P) -> i128 {
    a.0 * b.1 - a.1 * b.0
}

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

/// Intersection of two closed segments, exactly.
enum Meet {
    None,
    /// Homogeneous point (x, y, w), w > 0.
    Point(i128, i128, i128),
    Overlap,
}

fn meet(p1: P, p2: P, q1: P, q2: P) -> Meet {
    let r = sub(p2, p1);
    let s = sub(q2, q1);
    let qp = sub(q1, p1);
    let mut den = cross(r, s);
    if den != 0 {
        let mut t = cross(qp, s);
        let mut u = cross(qp, r);
        if den < 0 {
            den = -den;
            t = -t;
            u = -u;
        }
        if t < 0 || t > den || u < 0 || u > den {
            return Meet::None;
        }
        return Meet::Point(p1.0 * den + t * r.0, p1.1 * den + t * r.1, den);
    }
    if cross(qp, r) != 0 {
        return Meet::None;
    }
    let rr = r.0 * r.0 + r.1 * r.1;
    let t0 = qp.0 * r.0 + qp.1 * r.1;
    let t1 = (q2.0 - p1.0) * r.0 + (q2.1 - p1.1) * r.1;
    let lo = t0.min(t1).max(0);
    let hi = t0.max(t1).min(rr);
    if lo > hi {
        Meet::None
    } else if lo < hi {
        Meet::Overlap
    } else {
        Meet::Point(p1.0 * rr + lo * r.0, p1.1 * rr + lo * r.1, rr)
    }
}

fn at(x: i128, y: i128, w: i128, q: P) -> bool {
    x == q.0 * w && y == q.1 * w
}

/// Every illegal segment contact as (edge_a, seg_a, edge_b, seg_b) with the
/// smaller (edge, segment) first, sorted. Contacts are legal only at a node
/// both edges end on, or between consecutive segments of one edge at their
/// shared vertex.
pub fn brute_force_crossings(d: &Deployment) -> Vec<(EdgeId, usize, EdgeId, usize)> {
    let pos = |n: NodeId| ip(d.node(n).unwrap().position);
    let mut out = Vec::new();
    for (i, e) in d.edges.iter().enumerate() {
        for f in &d.edges[i..] {
            let same = e.id == f.id;
            let shared: Vec<P> = [e.from, e.to].into_iter().filter(|n| *n == f.from || *n == f.to).map(pos).collect();
            for (si, s) in e.polyline.windows(2).enumerate() {
                for (ti, t) in f.polyline.windows(2).enumerate() {
                    if same && ti <= si {
                        continue;
                    }
                    let illegal = match meet(ip(s[0]), ip(s[1]), ip(t[0]), ip(t[1])) {
                        Meet::None => false,
                        Meet::Overlap => true,
                        Meet::Point(x, y, w) => {
                            if same {
                                ti != si + 1 || !at(x, y, w, ip(e.polyline[ti]))
                            } else {
                                !shared.iter().any(|&q| at(x, y, w, q))
                            }
                        }
                    };
                    if illegal {
                        let (a, b) = if (e.id, si) <= (f.id, ti) { ((e.id, si), (f.id, ti)) } else { ((f.id, ti), (e.id, si)) };
                        out.push((a.0, a.1, b.0, b.1));
                    }
                }
            }
        }
    }
    out.sort();
    out
}

// ------------------------------------------------------------------ marker

/// CRC-8 (poly 0x07, init 0), one bit at a time.
pub fn crc8_bitwise(data: &[u8]) -> u8 {
    let mut crc = 0u8;
    for &byte in data {
        for i in (0..8).rev() {
            let bit = (byte >> i) & 1;
            let top = crc >> 7;
            crc <<= 1;
            if top ^ bit == 1 {
                crc ^= 0x07;
            }
        }
    }
    crc
}

// ------------------------------------------------------------------ haptic

pub enum Assign {
    None,
    Correct,
    Reversed,
    Other(ColorPair),
}

/// Whether a touch at (u, v) lies within `r` of some lane pixel, checked
/// over every pixel of the mask.
pub fn brute_within(mask: &arianna_core::vision::PixelMask, u: f64, v: f64, r: f64) -> bool {
    (0..mask.height).any(|y| {
        (0..mask.width).any(|x| mask.contains(x, y) && (x as f64 - u).powi(2) + (y as f64 - v).powi(2) <= r * r)
    })
}

pub struct HapticCase {
    pub vibrating: bool,
    pub active: bool,
    pub expected_active: bool,
}

/// Renders `pose`, sets the assignment, steps the navigator twice (at `t`
/// and `t + dt`) with the same touch and reports the second step against a
/// per-pixel recomputation of the contract.
pub fn haptic_case(
    d: &Deployment,
    raster: &FloorRaster,
    pose: &Pose,
    lane_pair: ColorPair,
    assign: Assign,
    touch: Option<Touch>,
    t: f64,
    dt: f64,
) -> HapticCase {
    let k = CameraIntrinsics::default();
    let frame = render_frame(raster, pose, &k);
    let mut nav = Navigator::new(NavConfig::default());
    let pair = match assign {
        Assign::None => None,
        Assign::Correct => Some(lane_pair),
        Assign::Reversed => Some((lane_pair.1, lane_pair.0)),
        Assign::Other(p) => Some(p),
    };
    nav.state.assigned = pair.map(|p| Assignment { edge: d.edges[0].id, direction: TravelDirection::Forward, expected_pair: p });
    let vp = nav.config.vision;
    nav.step(&frame, touch, t);
    let out = nav.step(&frame, touch, t + dt);
    let expected_active = match (&out.lane, touch) {
        (Some(lane), Some(tc)) => {
            pair.is_none_or(|p| p == lane.ordered_pair) && brute_within(&lane.lane_mask, tc.u, tc.v, vp.dilation_radius)
        }
        _ => false,
    };
    HapticCase { vibrating: out.vibrating, active: out.haptic.active, expected_active }
}

/// Touch biased toward the lane: half the time near a random lane pixel.
pub fn touch_near_lane(raster_frame_lane: Option<&arianna_core::vision::PixelMask>, rng: &mut ChaCha8Rng) -> Option<Touch> {
    if rng.random_bool(0.1) {
        return None;
    }
    if let Some(mask) = raster_frame_lane.filter(|m| !m.is_empty() && rng.random_bool(0.5)) {
        let on: Vec<(u32, u32)> =
            (0..mask.height).flat_map(|y| (0..mask.width).map(move |x| (x, y))).filter(|&(x, y)| mask.contains(x, y)).collect();
        let &(x, y) = on.choose(rng).unwrap();
        return Some(Touch::new(x as f64 + rng.random_range(-16.0..16.0), y as f64 + rng.random_range(-16.0..16.0)));
    }
    Some(Touch::new(rng.random_range(0.0..320.0), rng.random_range(0.0..240.0)))
}

/// One random haptic-contract case on a generated world.
pub fn random_haptic_case(worlds: &[(Deployment, FloorRaster)], rng: &mut ChaCha8Rng) -> HapticCase {
    loop {
        let (d, raster) = &worlds[rng.random_range(0..worlds.len())];
        let Some((pose, eid, dir)) = sample_on_lane(d, rng) else { continue };
        let lane_pair = observed_pair(d.edge(eid).unwrap(), dir);
        let frame = render_frame(raster, &pose, &CameraIntrinsics::default());
        let vp = VisionParams::default();
        let lane = detect_lane(&segment_colors(&frame, &vp), &vp);
        let touch = touch_near_lane(lane.as_ref().map(|l| &l.lane_mask), rng);
        let assign = match rng.random_range(0..4) {
            0 => Assign::None,
            1 | 2 => Assign::Correct,
            _ if rng.random_bool(0.5) => Assign::Reversed,
            _ => Assign::Other(*all_color_pairs().collect::<Vec<_>>().choose(rng).unwrap()),
        };
        let t = rng.random_range(0.0..5.0);
        let dt = rng.random_range(0..6) as f64 * 0.1;
        return haptic_case(d, raster, &pose, lane_pair, assign, touch, t, dt);
    }
}

impl HapticCase {
    /// vibrating ⟹ active ⟹ (touch within dilated mask ∧ pair matches), and
    /// the converse of the second implication.
    pub fn holds(&self) -> bool {
        (!self.vibrating || self.active) && self.active == self.expected_active
    }
}

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{closest_on_segment, Point2, Rect};
use crate::palette::Rgb;
use crate::pathgraph::{Deployment, Edge, QrId};
use crate::vision::{encode_marker, MarkerGrid, MarkerKind, MarkerPayload, MARKER_CELLS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterParams {
    /// Cells per meter. At 200 a 0.2 m marker's 2.5 cm cells are drawn a
    /// whole number of raster cells wide.
    pub resolution: f64,
    pub strip_width: f64,
    pub strip_gap: f64,
    /// Arc-length spacing of edge markers; `None` draws none.
    pub edge_marker_interval: Option<f64>,
    /// Perpendicular offset of edge markers to the right of the lane axis.
    pub edge_marker_offset: f64,
    pub edge_marker_size: f64,
}

impl Default for RasterParams {
    fn default() -> Self {
        Self {
            resolution: 200.0,
            strip_width: 0.05,
            strip_gap: 0.05,
            edge_marker_interval: None,
            edge_marker_offset: 0.3,
            edge_marker_size: 0.2,
        }
    }
}

/// Top-down color map of the floor. Row 0 is the `min.y` edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorRaster {
    pub bounds: Rect,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Rgb>,
}

impl FloorRaster {
    pub fn new(bounds: Rect, resolution: f64) -> Self {
        let width = libm::ceil(bounds.width() * resolution) as usize;
        let height = libm::ceil(bounds.height() * resolution) as usize;
        Self { bounds, resolution, width, height, cells: vec![Rgb::FLOOR; width * height] }
    }

    #[inline]
    pub fn cell_of(&self, p: Point2) -> Option<(usize, usize)> {
        let cx = libm::floor((p.x - self.bounds.min.x) * self.resolution);
        let cy = libm::floor((p.y - self.bounds.min.y) * self.resolution);
        if cx < 0.0 || cy < 0.0 || cx >= self.width as f64 || cy >= self.height as f64 {
            return None;
        }
        Some((cx as usize, cy as usize))
    }

    /// Nearest-neighbor sample; `None` outside the floor.
    #[inline]
    pub fn sample(&self, p: Point2) -> Option<Rgb> {
        self.cell_of(p).map(|(x, y)| self.cells[y * self.width + x])
    }

    pub fn cell_center(&self, x: usize, y: usize) -> Point2 {
        Point2::new(
            self.bounds.min.x + (x as f64 + 0.5) / self.resolution,
            self.bounds.min.y + (y as f64 + 0.5) / self.resolution,
        )
    }

    fn cell_range(&self, lo: Point2, hi: Point2) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n);
        let x0 = clamp(libm::floor((lo.x - self.bounds.min.x) * self.resolution), self.width);
        let x1 = clamp(libm::ceil((hi.x - self.bounds.min.x) * self.resolution) + 1.0, self.width);
        let y0 = clamp(libm::floor((lo.y - self.bounds.min.y) * self.resolution), self.height);
        let y1 = clamp(libm::ceil((hi.y - self.bounds.min.y) * self.resolution) + 1.0, self.height);
        (x0..x1, y0..y1)
    }

    fn draw_strips(&mut self, e: &Edge, params: &RasterParams) {
        let inner = params.strip_gap / 2.0;
        let outer = inner + params.strip_width;
        let (mut lo, mut hi) = (e.polyline[0], e.polyline[0]);
        for p in &e.polyline {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let pad = Point2::new(outer, outer);
        let (xs, ys) = self.cell_range(lo - pad, hi + pad);
        let (left, right) = (e.color_pair.0.rgb(), e.color_pair.1.rgb());
        for y in ys {
            for x in xs.clone() {
                let c = self.cell_center(x, y);
                let mut best = f64::INFINITY;
                let mut side = 0.0;
                for (a, b) in e.segments() {
                    let (q, _) = closest_on_segment(c, a, b);
                    let d = c.distance(q);
                    if d < best {
                        best = d;
                        side = (b - a).cross(c - a);
                    }
                }
                if best >= inner && best <= outer {
                    self.cells[y * self.width + x] = if side > 0.0 { left } else { right };
                }
            }
        }
    }

    /// Draws an axis-aligned marker centered at `center`. Grid row 0 is the
    /// far (+y) side, column 0 the −x side.
    pub fn draw_marker(&mut self, grid: &MarkerGrid, center: Point2, size: f64) {
        let h = size / 2.0;
        let cell = size / MARKER_CELLS as f64;
        let (x0, y1) = (center.x - h, center.y + h);
        let (xs, ys) = self.cell_range(center - Point2::new(h, h), center + Point2::new(h, h));
        for y in ys {
            for x in xs.clone() {
                let c = self.cell_center(x, y);
                let col = libm::floor((c.x - x0) / cell);
                let row = libm::floor((y1 - c.y) / cell);
                if !(0.0..MARKER_CELLS as f64).contains(&col) || !(0.0..MARKER_CELLS as f64).contains(&row) {
                    continue;
                }
                let black = grid.get(row as usize, col as usize);
                self.cells[y * self.width + x] = if black { Rgb::BLACK } else { Rgb::WHITE };
            }
        }
    }
}

/// Paints strips for every edge and a node marker at every anchor.
///
/// Walking an edge Forward, `color_pair.0` lies on the left and
/// `color_pair.1` on the right, each strip `strip_width` wide and separated
/// by `strip_gap` across the polyline.
pub fn rasterize_floor(d: &Deployment, params: &RasterParams) -> FloorRaster {
    let mut r = FloorRaster::new(d.floor_bounds, params.resolution);
    let mut edges: Vec<&Edge> = d.edges.iter().collect();
    edges.sort_by_key(|e| e.id);
    for e in &edges {
        if e.polyline.len() >= 2 {
            r.draw_strips(e, params);
        }
    }
    if let Some(interval) = params.edge_marker_interval.filter(|i| *i > 0.0) {
        for e in &edges {
            for (center, aux) in edge_marker_sites(e, interval, params.edge_marker_offset) {
                let grid = encode_marker(&MarkerPayload { kind: MarkerKind::Edge, id: e.id.0 as u16, aux });
                r.draw_marker(&grid, center, params.edge_marker_size);
            }
        }
    }
    let mut anchors: Vec<_> = d.anchors.iter().collect();
    anchors.sort_by_key(|a| a.qr_id);
    for a in anchors {
        r.draw_marker(&node_marker(a.qr_id), a.position, a.size);
    }
    r
}

fn node_marker(qr: QrId) -> MarkerGrid {
    encode_marker(&MarkerPayload { kind: MarkerKind::Node, id: qr.0, aux: 0 })
}

/// Edge marker centers (to the right of the axis) and their distance-from-start
/// payloads in decimeters. Sites closer than one interval to either end are
/// skipped.
fn edge_marker_sites(e: &Edge, interval: f64, offset: f64) -> Vec<(Point2, u8)> {
    let total = e.length();
    let mut out = Vec::new();
    let mut s = interval;
    while s <= total - interval + 1e-9 {
        let mut walked = 0.0;
        for (a, b) in e.segments() {
            let len = a.distance(b);
            if walked + len >= s {
                let dir = (b - a) * (1.0 / len);
                let on = a + dir * (s - walked);
                let aux = libm::round(s * 10.0).min(255.0) as u8;
                out.push((on - dir.perp() * offset, aux));
                break;
            }
            walked += len;
        }
        s += interval;
    }
    out
}

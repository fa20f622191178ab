//! Floor fiducial: an 8×8 cell square with a solid black border and a
//! 36-bit CRC-protected interior.
//!
//! Interior bit sequence: sync `1 0 1`, kind bit, 16-bit id (big-endian),
//! 8-bit aux, CRC-8. The CRC runs over the bytes `[kind, id_hi, id_lo, aux]`;
//! with a zero initial value the leading kind byte is transparent for node
//! markers.
//!
//! The three sync bits sit on interior corners (0,0), (0,5) and (5,0); the
//! other 33 bits fill the remaining interior cells row-major. Under any
//! quarter turn some sync cell lands on a sync cell of the opposite value,
//! so only the upright reading can pass the sync check and orientation is
//! never ambiguous. With the sync bits in the first row instead, about one
//! payload in 1,400 has a rotation that is itself a valid marker.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::blobs::components;
use super::segment::{Label, LabelMask};
use super::VisionParams;
use crate::scene::Frame;

pub const MARKER_CELLS: usize = 8;
const INTERIOR: usize = MARKER_CELLS - 2;
const SYNC: [bool; 3] = [true, false, true];

/// Interior cell (row-major index) holding each bit of the sequence.
const CELL_OF_BIT: [usize; INTERIOR * INTERIOR] = {
    let sync_cells = [0, INTERIOR - 1, (INTERIOR - 1) * INTERIOR];
    let mut out = [0usize; INTERIOR * INTERIOR];
    out[0] = sync_cells[0];
    out[1] = sync_cells[1];
    out[2] = sync_cells[2];
    let mut bit = 3;
    let mut cell = 0;
    while cell < INTERIOR * INTERIOR {
        if cell != sync_cells[0] && cell != sync_cells[1] && cell != sync_cells[2] {
            out[bit] = cell;
            bit += 1;
        }
        cell += 1;
    }
    out
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerKind {
    Node,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MarkerPayload {
    pub kind: MarkerKind,
    /// QR id for node markers, edge id for edge markers.
    pub id: u16,
    /// Edge markers: decimeters from the edge's from-node, saturating.
    pub aux: u8,
}

impl MarkerPayload {
    pub fn node(id: u16) -> Self {
        Self { kind: MarkerKind::Node, id, aux: 0 }
    }

    pub fn edge(id: u16, aux: u8) -> Self {
        Self { kind: MarkerKind::Edge, id, aux }
    }

    fn bytes(&self) -> [u8; 4] {
        let [hi, lo] = self.id.to_be_bytes();
        [self.kind as u8, hi, lo, self.aux]
    }
}

/// Cell grid, `true` = black. Row 0 is the top row in the grid's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkerGrid {
    pub cells: [[bool; MARKER_CELLS]; MARKER_CELLS],
}

impl MarkerGrid {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, black: bool) {
        self.cells[row][col] = black;
    }

    /// Quarter turn clockwise.
    pub fn rotated(&self) -> Self {
        let mut out = [[false; MARKER_CELLS]; MARKER_CELLS];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.cells[MARKER_CELLS - 1 - c][r];
            }
        }
        Self { cells: out }
    }

    pub fn border_is_black(&self) -> bool {
        let n = MARKER_CELLS - 1;
        (0..MARKER_CELLS).all(|i| self.cells[0][i] && self.cells[n][i] && self.cells[i][0] && self.cells[i][n])
    }

    fn bit(&self, b: usize) -> bool {
        let c = CELL_OF_BIT[b];
        self.cells[1 + c / INTERIOR][1 + c % INTERIOR]
    }

    fn bits(&self, from: usize, count: usize) -> u32 {
        (from..from + count).fold(0, |acc, b| (acc << 1) | self.bit(b) as u32)
    }
}

const CRC_TABLE: [u8; 256] = {
    let mut t = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u8;
        let mut k = 0;
        while k < 8 {
            c = if c & 0x80 != 0 { (c << 1) ^ 0x07 } else { c << 1 };
            k += 1;
        }
        t[i] = c;
        i += 1;
    }
    t
};

/// CRC-8, polynomial 0x07, initial value 0, no reflection, no final xor.
pub fn crc8(data: &[u8]) -> u8 {
    data.iter().fold(0u8, |crc, &b| CRC_TABLE[(crc ^ b) as usize])
}

pub fn encode_marker(p: &MarkerPayload) -> MarkerGrid {
    let mut bits = [false; INTERIOR * INTERIOR];
    bits[..3].copy_from_slice(&SYNC);
    bits[3] = p.kind == MarkerKind::Edge;
    let mut put = |from: usize, width: usize, value: u32| {
        for i in 0..width {
            bits[from + i] = (value >> (width - 1 - i)) & 1 == 1;
        }
    };
    put(4, 16, p.id as u32);
    put(20, 8, p.aux as u32);
    put(28, 8, crc8(&p.bytes()) as u32);

    let mut g = MarkerGrid { cells: [[true; MARKER_CELLS]; MARKER_CELLS] };
    for (b, &v) in bits.iter().enumerate() {
        let c = CELL_OF_BIT[b];
        g.cells[1 + c / INTERIOR][1 + c % INTERIOR] = v;
    }
    g
}

fn read_upright(g: &MarkerGrid) -> Option<MarkerPayload> {
    if (0..3).any(|i| g.bit(i) != SYNC[i]) {
        return None;
    }
    let kind = if g.bit(3) { MarkerKind::Edge } else { MarkerKind::Node };
    let p = MarkerPayload { kind, id: g.bits(4, 16) as u16, aux: g.bits(20, 8) as u8 };
    if kind == MarkerKind::Node && p.aux != 0 {
        return None;
    }
    (crc8(&p.bytes()) == g.bits(28, 8) as u8).then_some(p)
}

/// Decode under whichever rotation yields a valid payload. The sync layout
/// admits at most one; the smallest payload is kept regardless so that the
/// result never depends on the starting rotation.
pub fn decode_grid(g: &MarkerGrid) -> Option<MarkerPayload> {
    if !g.border_is_black() {
        return None;
    }
    let mut best: Option<MarkerPayload> = None;
    let mut r = *g;
    for _ in 0..4 {
        if let Some(p) = read_upright(&r) {
            best = Some(best.map_or(p, |b| b.min(p)));
        }
        r = r.rotated();
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerSighting {
    pub payload: MarkerPayload,
    /// Image coordinates of the quad center, pixels.
    pub centroid: (f64, f64),
    /// Quad area, square pixels.
    pub area: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkerDetections {
    pub sightings: Vec<MarkerSighting>,
    /// Candidates large enough to be markers that failed to decode.
    pub rejected: usize,
}

pub fn detect_markers(f: &Frame, mask: &LabelMask, p: &VisionParams) -> MarkerDetections {
    let mut out = MarkerDetections::default();
    let w = mask.width as usize;
    for c in components(mask, |l| l == Label::MarkerBlack) {
        // Even a fully black quad of the minimum area needs this many pixels
        // of border ring.
        if (c.area() as f64) < p.min_marker_area * 0.25 {
            continue;
        }
        let pts: Vec<(i64, i64)> = c.pixels.iter().map(|&i| ((i as usize % w) as i64, (i as usize / w) as i64)).collect();
        let Some(quad) = best_quad(&pts) else { continue };
        let area = quad_area(&quad);
        if area < p.min_marker_area {
            continue;
        }
        let grid = sample_grid(f, &quad);
        match decode_grid(&grid) {
            Some(payload) => {
                let centroid = (
                    quad.iter().map(|q| q.0).sum::<f64>() / 4.0,
                    quad.iter().map(|q| q.1).sum::<f64>() / 4.0,
                );
                let s = MarkerSighting { payload, centroid, area };
                match out.sightings.iter_mut().find(|o| o.payload.kind == payload.kind && o.payload.id == payload.id) {
                    Some(o) if o.area < area => *o = s,
                    Some(_) => {}
                    None => out.sightings.push(s),
                }
            }
            None => out.rejected += 1,
        }
    }
    out
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut h: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: &mut dyn Iterator<Item = &(i64, i64)> =
            if pass == 0 { &mut pts.iter() } else { &mut pts.iter().rev() };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

/// Largest-area quadrilateral on the convex hull, corners clockwise on
/// screen starting from the top-most, as pixel centers.
fn best_quad(pts: &[(i64, i64)]) -> Option<[(f64, f64); 4]> {
    // Only row extremes can be hull vertices.
    let mut by_row: Vec<(i64, i64, i64)> = Vec::new();
    for &(x, y) in pts {
        match by_row.iter_mut().find(|r| r.0 == y) {
            Some(r) => {
                r.1 = r.1.min(x);
                r.2 = r.2.max(x);
            }
            None => by_row.push((y, x, x)),
        }
    }
    let cand: Vec<(i64, i64)> = by_row.iter().flat_map(|&(y, a, b)| [(a, y), (b, y)]).collect();
    let h = hull(cand);
    let n = h.len();
    if n < 4 {
        return None;
    }
    let mut best = (0i64, [0usize; 4]);
    for i in 0..n {
        for j in i + 2..n {
            let (mut k, mut kd) = (usize::MAX, 0);
            for t in i + 1..j {
                let d = cross(h[i], h[j], h[t]).abs();
                if d > kd {
                    (k, kd) = (t, d);
                }
            }
            let (mut m, mut md) = (usize::MAX, 0);
            for t in (j + 1..n).chain(0..i) {
                let d = cross(h[i], h[j], h[t]).abs();
                if d > md {
                    (m, md) = (t, d);
                }
            }
            if k != usize::MAX && m != usize::MAX && kd + md > best.0 {
                best = (kd + md, [i, k, j, m]);
            }
        }
    }
    if best.0 == 0 {
        return None;
    }
    // Hull order is counter-clockwise in (x, y) with y down, i.e. clockwise
    // on screen.
    let mut q = best.1.map(|i| (h[i].0 as f64, h[i].1 as f64));
    let top = (0..4).min_by(|&a, &b| q[a].1.total_cmp(&q[b].1).then(q[a].0.total_cmp(&q[b].0))).unwrap();
    q.rotate_left(top);
    // Push corners half a pixel outward so the quad covers whole pixels.
    let cx = q.iter().map(|c| c.0).sum::<f64>() / 4.0;
    let cy = q.iter().map(|c| c.1).sum::<f64>() / 4.0;
    for c in &mut q {
        let (dx, dy) = (c.0 - cx, c.1 - cy);
        let len = libm::hypot(dx, dy);
        if len > 0.0 {
            c.0 += 0.5 * dx / len;
            c.1 += 0.5 * dy / len;
        }
    }
    Some(q)
}

fn quad_area(q: &[(f64, f64); 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let (a, b) = (q[i], q[(i + 1) % 4]);
        s += a.0 * b.1 - b.0 * a.1;
    }
    s.abs() / 2.0
}

/// Bilinear rectification: corner 0 is cell (0, 0)'s outer corner, corners
/// proceed clockwise.
fn sample_grid(f: &Frame, q: &[(f64, f64); 4]) -> MarkerGrid {
    let mut g = MarkerGrid { cells: [[false; MARKER_CELLS]; MARKER_CELLS] };
    let n = MARKER_CELLS as f64;
    for r in 0..MARKER_CELLS {
        for c in 0..MARKER_CELLS {
            let (s, t) = ((c as f64 + 0.5) / n, (r as f64 + 0.5) / n);
            let x = (1.0 - s) * (1.0 - t) * q[0].0 + s * (1.0 - t) * q[1].0 + s * t * q[2].0 + (1.0 - s) * t * q[3].0;
            let y = (1.0 - s) * (1.0 - t) * q[0].1 + s * (1.0 - t) * q[1].1 + s * t * q[2].1 + (1.0 - s) * t * q[3].1;
            let (px, py) = (libm::floor(x), libm::floor(y));
            let inside = px >= 0.0 && py >= 0.0 && px < f.width as f64 && py < f.height as f64;
            g.cells[r][c] = inside && {
                let rgb = f.pixel(px as u32, py as u32);
                (rgb.0 as u32 + rgb.1 as u32 + rgb.2 as u32) < 3 * 128
            };
        }
    }
    g
}

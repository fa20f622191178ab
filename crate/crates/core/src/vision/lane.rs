//! Strip pairing.
//!
//! Each palette blob gets a principal-axis fit over its lowest rows, the part
//! nearest the walker, so a bend further up does not skew it. Two blobs of different colors
//! pair when their axes are nearly parallel, their centroids sit a plausible
//! lane gap apart across the axis and they run side by side. Among valid
//! pairs the one reaching lowest in the frame wins; near ties go to the lane
//! whose axis passes closest to the walker's feet. Left and right are
//! judged facing along the axis toward the top of the image, which is away
//! from the walker.

use alloc::vec;
use alloc::vec::Vec;

use super::blobs::{components, Component};
use super::segment::{Label, LabelMask};
use super::VisionParams;
use crate::palette::{ColorId, ColorPair};

/// Screen-space pixel set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// True if some set pixel lies within `radius` of `(x, y)`.
    pub fn within(&self, x: f64, y: f64, radius: f64) -> bool {
        let r = radius.max(0.0);
        let x0 = libm::floor(x - r).max(0.0) as i64;
        let x1 = (libm::ceil(x + r) as i64).min(self.width as i64 - 1);
        let y0 = libm::floor(y - r).max(0.0) as i64;
        let y1 = (libm::ceil(y + r) as i64).min(self.height as i64 - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let (dx, dy) = (px as f64 - x, py as f64 - y);
                if dx * dx + dy * dy <= r * r && self.contains(px as u32, py as u32) {
                    return true;
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneDetection {
    /// Strip colors left to right.
    pub ordered_pair: ColorPair,
    /// Image-space lane direction, radians clockwise from image up, in (−π/2, π/2].
    pub axis_angle: f64,
    pub lane_mask: PixelMask,
    pub confidence: f64,
}

#[derive(Debug, Clone)]
struct Strip {
    color: ColorId,
    area: usize,
    centroid: (f64, f64),
    /// Unit axis direction with non-positive v (pointing up the image).
    dir: (f64, f64),
    /// Lowest image row reached (largest v).
    bottom: u32,
    /// Pixels within the fit window above `bottom`.
    near: Vec<u32>,
    component: usize,
}

/// Principal axis of a pixel set: centroid, unit direction pointing up the
/// image, and the spread across the axis (standard deviation, pixels).
fn principal_axis(pixels: &[u32], width: u32) -> ((f64, f64), (f64, f64), f64) {
    let w = width as usize;
    let n = pixels.len() as f64;
    let (mut su, mut sv) = (0.0, 0.0);
    for &i in pixels {
        su += (i as usize % w) as f64;
        sv += (i as usize / w) as f64;
    }
    let (mu, mv) = (su / n, sv / n);
    let (mut cuu, mut cvv, mut cuv) = (0.0, 0.0, 0.0);
    for &i in pixels {
        let du = (i as usize % w) as f64 - mu;
        let dv = (i as usize / w) as f64 - mv;
        cuu += du * du;
        cvv += dv * dv;
        cuv += du * dv;
    }
    let (cuu, cvv, cuv) = (cuu / n, cvv / n, cuv / n);
    let minor = (cuu + cvv) / 2.0 - libm::hypot((cuu - cvv) / 2.0, cuv);
    let theta = 0.5 * libm::atan2(2.0 * cuv, cuu - cvv);
    let (mut du, mut dv) = (libm::cos(theta), libm::sin(theta));
    if dv > 0.0 || (dv == 0.0 && du < 0.0) {
        du = -du;
        dv = -dv;
    }
    ((mu, mv), (du, dv), libm::sqrt(minor.max(0.0)))
}

fn fit_strip(c: &Component, width: u32, p: &VisionParams, index: usize) -> Option<Strip> {
    let color = c.label.color()?;
    let bottom = c.pixels.iter().map(|&i| i / width).max()?;
    // Shrink the window while the strip still looks bent inside it.
    let mut window = p.fit_window;
    loop {
        let near: Vec<u32> = c.pixels.iter().copied().filter(|&i| i / width + window >= bottom).collect();
        let (centroid, dir, spread) = principal_axis(&near, width);
        if spread <= p.max_strip_spread || window <= MIN_FIT_WINDOW {
            return Some(Strip { color, area: c.pixels.len(), centroid, dir, bottom, near, component: index });
        }
        window /= 2;
    }
}

const MIN_FIT_WINDOW: u32 = 20;

/// Clockwise angle from image up, folded into (−π/2, π/2].
fn axis_angle(dir: (f64, f64)) -> f64 {
    let a = libm::atan2(dir.0, -dir.1);
    if a <= -core::f64::consts::FRAC_PI_2 {
        a + core::f64::consts::PI
    } else if a > core::f64::consts::FRAC_PI_2 {
        a - core::f64::consts::PI
    } else {
        a
    }
}

pub fn detect_lane(mask: &LabelMask, p: &VisionParams) -> Option<LaneDetection> {
    detect_lane_preferring(mask, p, None)
}

/// Like [`detect_lane`], but when some lane in view shows `wanted` the choice
/// is made among those lanes only.
pub fn detect_lane_preferring(mask: &LabelMask, p: &VisionParams, wanted: Option<ColorPair>) -> Option<LaneDetection> {
    let blobs = components(mask, |l| matches!(l, Label::Color(_)));
    let strips: Vec<Strip> = blobs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.area() >= p.min_blob_area)
        .filter_map(|(i, c)| fit_strip(c, mask.width, p, i))
        .collect();

    let cos_limit = libm::cos(p.max_pair_angle);
    let feet = (mask.width as f64 / 2.0, mask.height as f64 * p.feet_row);
    let mut candidates: Vec<Candidate> = Vec::new();
    for (i, a) in strips.iter().enumerate() {
        for (j, b) in strips.iter().enumerate().skip(i + 1) {
            if a.color == b.color {
                continue;
            }
            let dot = a.dir.0 * b.dir.0 + a.dir.1 * b.dir.1;
            if dot.abs() < cos_limit {
                continue;
            }
            let s = if dot < 0.0 { -1.0 } else { 1.0 };
            let (mu, mv) = (a.dir.0 + s * b.dir.0, a.dir.1 + s * b.dir.1);
            let len = libm::hypot(mu, mv);
            let mut axis = (mu / len, mv / len);
            if axis.1 > 0.0 || (axis.1 == 0.0 && axis.0 < 0.0) {
                axis = (-axis.0, -axis.1);
            }
            let normal = (-axis.1, axis.0);
            let gap = ((b.centroid.0 - a.centroid.0) * normal.0 + (b.centroid.1 - a.centroid.1) * normal.1).abs();
            if gap < p.gap_range.0 || gap > p.gap_range.1 {
                continue;
            }
            // Strips of one lane run side by side; strips of two lanes meeting
            // at a node mostly line up end to end.
            if !side_by_side(&a.near, &b.near, mask.width, axis) {
                continue;
            }
            let mid = ((a.centroid.0 + b.centroid.0) / 2.0, (a.centroid.1 + b.centroid.1) / 2.0);
            let miss = ((feet.0 - mid.0) * normal.0 + (feet.1 - mid.1) * normal.1).abs();
            // Left of an up-pointing axis (u, v) is (v, −u) on screen.
            let side = |s: &Strip| s.centroid.0 * axis.1 - s.centroid.1 * axis.0;
            let pair = if side(a) >= side(b) { (a.color, b.color) } else { (b.color, a.color) };
            candidates.push(Candidate { a: i, b: j, axis, pair, bottom: a.bottom.min(b.bottom), area: a.area + b.area, miss });
        }
    }
    if wanted.is_some_and(|w| candidates.iter().any(|c| c.pair == w)) {
        candidates.retain(|c| Some(c.pair) == wanted);
    }
    // The lane underfoot reaches furthest down the frame. Among lanes that
    // come about as close, the one whose axis runs nearest the feet wins.
    let lowest = candidates.iter().map(|c| c.bottom).max()?;
    let best = candidates
        .iter()
        .filter(|c| c.bottom + p.bottom_tolerance >= lowest)
        .min_by(|x, y| x.miss.total_cmp(&y.miss).then(y.area.cmp(&x.area)))?;
    let (a, b, axis, strip_area, ordered_pair) = (&strips[best.a], &strips[best.b], best.axis, best.area, best.pair);

    let lane_mask = corridor_mask(mask.width, mask.height, &[&blobs[a.component], &blobs[b.component]]);
    let covered = lane_mask.count().max(1) as f64;
    let confidence = (strip_area as f64 / (p.strip_fill_ratio * covered)).clamp(0.0, 1.0);

    Some(LaneDetection { ordered_pair, axis_angle: axis_angle(axis), lane_mask, confidence })
}

struct Candidate {
    a: usize,
    b: usize,
    axis: (f64, f64),
    pair: ColorPair,
    bottom: u32,
    area: usize,
    /// Distance from the walker's feet to the lane axis, pixels.
    miss: f64,
}

fn extent(pixels: &[u32], width: u32, axis: (f64, f64)) -> (f64, f64) {
    let w = width as usize;
    pixels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        let t = (i as usize % w) as f64 * axis.0 + (i as usize / w) as f64 * axis.1;
        (lo.min(t), hi.max(t))
    })
}

fn side_by_side(a: &[u32], b: &[u32], width: u32, axis: (f64, f64)) -> bool {
    let (a0, a1) = extent(a, width, axis);
    let (b0, b1) = extent(b, width, axis);
    let overlap = a1.min(b1) - a0.max(b0);
    overlap >= MIN_AXIAL_OVERLAP * (a1 - a0).min(b1 - b0)
}

/// Shared length along the axis, as a fraction of the shorter strip.
const MIN_AXIAL_OVERLAP: f64 = 0.5;

/// Filled convex hull of the given blobs.
fn corridor_mask(width: u32, height: u32, parts: &[&Component]) -> PixelMask {
    let w = width as usize;
    // Row extremes are enough to carry the hull.
    let mut row_min = vec![i64::MAX; height as usize];
    let mut row_max = vec![i64::MIN; height as usize];
    for c in parts {
        for &i in &c.pixels {
            let (x, y) = ((i as usize % w) as i64, i as usize / w);
            row_min[y] = row_min[y].min(x);
            row_max[y] = row_max[y].max(x);
        }
    }
    let mut pts: Vec<(i64, i64)> = Vec::new();
    for y in 0..height as usize {
        if row_min[y] <= row_max[y] {
            pts.push((row_min[y], y as i64));
            if row_max[y] != row_min[y] {
                pts.push((row_max[y], y as i64));
            }
        }
    }
    let hull = convex_hull(pts);
    let mut m = PixelMask::new(width, height);
    if hull.is_empty() {
        return m;
    }
    let (y0, y1) = (hull.iter().map(|p| p.1).min().unwrap(), hull.iter().map(|p| p.1).max().unwrap());
    let (x0, x1) = (hull.iter().map(|p| p.0).min().unwrap(), hull.iter().map(|p| p.0).max().unwrap());
    for y in y0..=y1 {
        for x in x0..=x1 {
            if inside_hull(&hull, (x, y)) {
                m.bits[y as usize * w + x as usize] = true;
            }
        }
    }
    m
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone chain; counter-clockwise in (x, y) without collinear points.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn inside_hull(hull: &[(i64, i64)], p: (i64, i64)) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => cross(hull[0], hull[1], p) == 0 && {
            let (a, b) = (hull[0], hull[1]);
            p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
        },
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palette::Rgb;
    use crate::scene::Frame;
    use crate::vision::segment_colors;

    fn paint(f: &mut Frame, x0: u32, x1: u32, c: Rgb) {
        for y in 20..220 {
            for x in x0..x1 {
                f.set_pixel(x, y, c);
            }
        }
    }

    #[test]
    fn empty_mask_has_no_lane() {
        let f = Frame::filled(320, 240, Rgb::FLOOR);
        let m = segment_colors(&f, &VisionParams::default());
        assert_eq!(detect_lane(&m, &VisionParams::default()), None);
    }

    #[test]
    fn a_single_strip_is_not_a_lane() {
        let mut f = Frame::filled(320, 240, Rgb::FLOOR);
        paint(&mut f, 140, 150, ColorId::Red.rgb());
        let m = segment_colors(&f, &VisionParams::default());
        assert_eq!(detect_lane(&m, &VisionParams::default()), None);
    }

    #[test]
    fn same_color_strips_do_not_pair() {
        let mut f = Frame::filled(320, 240, Rgb::FLOOR);
        paint(&mut f, 140, 150, ColorId::Red.rgb());
        paint(&mut f, 160, 170, ColorId::Red.rgb());
        let m = segment_colors(&f, &VisionParams::default());
        assert_eq!(detect_lane(&m, &VisionParams::default()), None);
    }

    #[test]
    fn vertical_pair_reads_left_to_right() {
        let mut f = Frame::filled(320, 240, Rgb::FLOOR);
        paint(&mut f, 140, 150, ColorId::Green.rgb());
        paint(&mut f, 160, 170, ColorId::Cyan.rgb());
        let p = VisionParams::default();
        let det = detect_lane(&segment_colors(&f, &p), &p).unwrap();
        assert_eq!(det.ordered_pair, (ColorId::Green, ColorId::Cyan));
        assert!(det.axis_angle.abs() < 1e-9);
        // Strips plus the 10 px gap: 30 x 200 px, strips cover 2/3.
        assert_eq!(det.lane_mask.count(), 30 * 200);
        assert!((det.confidence - 1.0).abs() < 1e-9);
        assert!(det.lane_mask.contains(155, 100));
        assert!(!det.lane_mask.contains(139, 100));
    }

    #[test]
    fn strips_too_far_apart_do_not_pair() {
        let mut f = Frame::filled(320, 240, Rgb::FLOOR);
        paint(&mut f, 40, 50, ColorId::Green.rgb());
        paint(&mut f, 200, 210, ColorId::Cyan.rgb());
        let p = VisionParams::default();
        assert_eq!(detect_lane(&segment_colors(&f, &p), &p), None);
    }

    #[test]
    fn mask_dilation_lookup() {
        let mut m = PixelMask::new(64, 64);
        m.bits[10 * 64 + 10] = true;
        assert!(m.within(10.0, 22.0, 12.0));
        assert!(!m.within(10.0, 22.5, 12.0));
        assert!(m.within(18.0, 18.0, 12.0));
    }

    #[test]
    fn axis_angle_convention() {
        // Up is 0, up-right is positive (clockwise on screen).
        assert!(axis_angle((0.0, -1.0)).abs() < 1e-12);
        let a = axis_angle((libm::sqrt(0.5), -libm::sqrt(0.5)));
        assert!((a - core::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((axis_angle((1.0, 0.0)) - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}

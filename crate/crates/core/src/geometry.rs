//! Planar floor geometry in meters.

use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Orientation tolerance in square meters. Coordinates live on a millimeter
/// grid, so exact orientation values are multiples of 1e-6 m².
pub const ORIENT_EPS: f64 = 1e-9;

/// A point (or vector) on the floor plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3-D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(libm::cos(theta), libm::sin(theta))
    }

    /// Rounds both coordinates to the millimeter grid.
    pub fn to_mm_grid(self) -> Self {
        Self::new(round_mm(self.x), round_mm(self.y))
    }
}

pub fn round_mm(v: f64) -> f64 {
    // `+ 0.0` folds -0.0 into 0.0.
    libm::round(v * 1000.0) / 1000.0 + 0.0
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

// Serialized as `[x, y]` rounded to millimeters.
impl Serialize for Point2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [round_mm(self.x), round_mm(self.y)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Ok(Self::new(x, y))
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Sign of the turn a→b→c: 1 counter-clockwise, -1 clockwise, 0 collinear.
pub fn orientation(a: Point2, b: Point2, c: Point2) -> i8 {
    let v = (b - a).cross(c - a);
    if v > ORIENT_EPS {
        1
    } else if v < -ORIENT_EPS {
        -1
    } else {
        0
    }
}

/// Closest point on segment `a`-`b` to `p`, with its parameter in `[0, 1]`.
pub fn closest_on_segment(p: Point2, a: Point2, b: Point2) -> (Point2, f64) {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    (a + d * t, t)
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    p.distance(closest_on_segment(p, a, b).0)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - 1e-9
        && p.x <= a.x.max(b.x) + 1e-9
        && p.y >= a.y.min(b.y) - 1e-9
        && p.y <= a.y.max(b.y) + 1e-9
}

/// Intersection of two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentContact {
    None,
    Point(Point2),
    /// Collinear overlap of positive length.
    Overlap,
}

pub fn segment_contact(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> SegmentContact {
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);

    if o1 == 0 && o2 == 0 {
        // Collinear: project on the dominant axis of p.
        let d = p2 - p1;
        let key = |p: Point2| if d.x.abs() >= d.y.abs() { p.x } else { p.y };
        let (pa, pb) = minmax(key(p1), key(p2));
        let (qa, qb) = minmax(key(q1), key(q2));
        let lo = pa.max(qa);
        let hi = pb.min(qb);
        if hi < lo - 1e-9 {
            return SegmentContact::None;
        }
        if hi - lo > 1e-9 {
            return SegmentContact::Overlap;
        }
        // Single shared point.
        let pick = [p1, p2, q1, q2]
            .into_iter()
            .find(|&p| (key(p) - lo).abs() <= 1e-9 && on_segment(p1, p2, p) && on_segment(q1, q2, p))
            .unwrap_or(p1);
        return SegmentContact::Point(pick);
    }

    if o1 != o2 && o3 != o4 {
        // Touching configurations report the touching endpoint exactly.
        if o1 == 0 {
            return SegmentContact::Point(q1);
        }
        if o2 == 0 {
            return SegmentContact::Point(q2);
        }
        if o3 == 0 {
            return SegmentContact::Point(p1);
        }
        if o4 == 0 {
            return SegmentContact::Point(p2);
        }
        let r = p2 - p1;
        let s = q2 - q1;
        let t = (q1 - p1).cross(s) / r.cross(s);
        return SegmentContact::Point(p1 + r * t);
    }
    SegmentContact::None
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Minimum distance between two segments.
pub fn segment_distance(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> f64 {
    if !matches!(segment_contact(p1, p2, q1, q2), SegmentContact::None) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

/// Total length of a polyline.
pub fn polyline_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use core::f64::consts::PI;
    let mut a = libm::fmod(a, 2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

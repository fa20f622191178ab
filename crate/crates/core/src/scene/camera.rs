use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

/// Largest cane-sweep angle the phone can be held at, radians (70°).
pub const MAX_PHONE_YAW: f64 = 1.22;

/// Walker body and hand-held phone.
///
/// Headings are counter-clockwise from the floor +x axis. A positive
/// `phone_yaw_offset` points the phone to the walker's left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    pub body_heading: f64,
    pub phone_yaw_offset: f64,
    pub camera_height: f64,
    /// Radians below horizontal.
    pub camera_pitch: f64,
}

impl Pose {
    pub fn new(position: Point2, body_heading: f64) -> Self {
        Self {
            position,
            body_heading,
            phone_yaw_offset: 0.0,
            camera_height: 1.3,
            camera_pitch: core::f64::consts::FRAC_PI_3,
        }
    }

    pub fn camera_yaw(&self) -> f64 {
        self.body_heading + self.phone_yaw_offset
    }

    pub fn is_valid(&self) -> bool {
        self.position.is_finite()
            && self.camera_pitch > 0.0
            && self.camera_pitch < core::f64::consts::FRAC_PI_2
            && self.phone_yaw_offset.abs() <= MAX_PHONE_YAW
            && self.camera_height > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub width: u32,
    pub height: u32,
    /// Horizontal field of view, radians.
    pub hfov: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self { width: 320, height: 240, hfov: core::f64::consts::FRAC_PI_3 }
    }
}

impl CameraIntrinsics {
    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.width as f64 / 2.0) / libm::tan(self.hfov / 2.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    pub fn is_valid(&self) -> bool {
        self.width >= 64 && self.height >= 64 && self.hfov > 0.0 && self.hfov < core::f64::consts::PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundHit {
    Floor(Point2),
    AboveHorizon,
}

impl GroundHit {
    pub fn floor(self) -> Option<Point2> {
        match self {
            GroundHit::Floor(p) => Some(p),
            GroundHit::AboveHorizon => None,
        }
    }
}

/// Camera basis in world coordinates (x, y on the floor, z up).
#[derive(Debug, Clone, Copy)]
pub(crate) struct CameraFrame {
    origin: (f64, f64, f64),
    forward: (f64, f64, f64),
    right: (f64, f64, f64),
    down: (f64, f64, f64),
    focal: f64,
    cx: f64,
    cy: f64,
}

impl CameraFrame {
    pub(crate) fn new(pose: &Pose, k: &CameraIntrinsics) -> Self {
        let yaw = pose.camera_yaw();
        let (sy, cy) = (libm::sin(yaw), libm::cos(yaw));
        let (sp, cp) = (libm::sin(pose.camera_pitch), libm::cos(pose.camera_pitch));
        let (ccx, ccy) = k.center();
        Self {
            origin: (pose.position.x, pose.position.y, pose.camera_height),
            forward: (cp * cy, cp * sy, -sp),
            right: (sy, -cy, 0.0),
            // Image "down" is minus camera-up; camera-up = sp * horizontal + cp * z.
            down: (-sp * cy, -sp * sy, -cp),
            focal: k.focal(),
            cx: ccx,
            cy: ccy,
        }
    }

    #[inline]
    pub(crate) fn ground(&self, u: f64, v: f64) -> GroundHit {
        let du = u - self.cx;
        let dv = v - self.cy;
        let dz = self.forward.2 * self.focal + self.right.2 * du + self.down.2 * dv;
        if dz >= 0.0 {
            return GroundHit::AboveHorizon;
        }
        let dx = self.forward.0 * self.focal + self.right.0 * du + self.down.0 * dv;
        let dy = self.forward.1 * self.focal + self.right.1 * du + self.down.1 * dv;
        let t = -self.origin.2 / dz;
        GroundHit::Floor(Point2::new(self.origin.0 + t * dx, self.origin.1 + t * dy))
    }
}

/// Floor point seen through image position `(u, v)`.
///
/// Pixel `(i, j)` spans `[i, i+1) × [j, j+1)`; the principal ray passes
/// through `(width/2, height/2)`.
pub fn project_ground(pose: &Pose, k: &CameraIntrinsics, pixel: (f64, f64)) -> GroundHit {
    CameraFrame::new(pose, k).ground(pixel.0, pixel.1)
}

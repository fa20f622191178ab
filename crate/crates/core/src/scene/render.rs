use alloc::vec;
use alloc::vec::Vec;

use super::camera::{CameraFrame, CameraIntrinsics, GroundHit, Pose};
use super::raster::FloorRaster;
use crate::palette::Rgb;

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0; width as usize * height as usize * 3] }
    }

    pub fn filled(width: u32, height: u32, c: Rgb) -> Self {
        let mut f = Self::new(width, height);
        for px in f.data.chunks_exact_mut(3) {
            px.copy_from_slice(&[c.0, c.1, c.2]);
        }
        f
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        Rgb(self.data[i], self.data[i + 1], self.data[i + 2])
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, c: Rgb) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&[c.0, c.1, c.2]);
    }

    pub fn pixels(&self) -> impl Iterator<Item = Rgb> + '_ {
        self.data.chunks_exact(3).map(|c| Rgb(c[0], c[1], c[2]))
    }
}

/// Renders the camera view: each pixel center is projected to the floor and
/// nearest-neighbor sampled. Rays above the horizon or outside the floor get
/// [`Rgb::HORIZON`].
pub fn render_frame(raster: &FloorRaster, pose: &Pose, k: &CameraIntrinsics) -> Frame {
    let cam = CameraFrame::new(pose, k);
    let mut f = Frame::new(k.width, k.height);
    for y in 0..k.height {
        for x in 0..k.width {
            let c = match cam.ground(x as f64 + 0.5, y as f64 + 0.5) {
                GroundHit::Floor(p) => raster.sample(p).unwrap_or(Rgb::HORIZON),
                GroundHit::AboveHorizon => Rgb::HORIZON,
            };
            f.set_pixel(x, y, c);
        }
    }
    f
}

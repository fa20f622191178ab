//! Synthetic world: deployment generator, floor rasterizer and the phone
//! camera.

mod camera;
mod raster;
mod render;
mod world;

pub use camera::{project_ground, CameraIntrinsics, GroundHit, Pose, MAX_PHONE_YAW};
pub use raster::{rasterize_floor, FloorRaster, RasterParams};
pub use render::{render_frame, Frame};
pub use world::{generate_world, GenerationFailure, WorldParams};

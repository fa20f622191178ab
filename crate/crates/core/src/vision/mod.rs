//! Sensing half of the visual-to-haptic transducer: palette segmentation,
//! strip pairing into an oriented lane, and the floor-marker codec.

mod blobs;
mod lane;
mod marker;
mod segment;

use serde::{Deserialize, Serialize};

pub use blobs::{components, Component};
pub use lane::{detect_lane, detect_lane_preferring, LaneDetection, PixelMask};
pub use marker::{
    crc8, decode_grid, detect_markers, encode_marker, MarkerDetections, MarkerGrid, MarkerKind, MarkerPayload,
    MarkerSighting, MARKER_CELLS,
};
pub use segment::{segment_colors, Label, LabelMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisionParams {
    /// Euclidean RGB distance for a pixel to take a reference color's label.
    pub color_threshold: f64,
    /// Smallest strip blob, pixels.
    pub min_blob_area: usize,
    /// Largest axis-angle difference for two strips to pair, radians.
    pub max_pair_angle: f64,
    /// Accepted perpendicular distance between paired strip centroids, pixels.
    pub gap_range: (f64, f64),
    /// Touches within this many pixels of the lane mask count as on-lane.
    pub dilation_radius: f64,
    /// Strip axes are fitted over this many rows above each strip's lowest pixel.
    pub fit_window: u32,
    /// Largest cross-axis standard deviation of a straight strip, pixels.
    pub max_strip_spread: f64,
    /// Image row of the walker's feet as a multiple of frame height; lies
    /// below the frame for a forward-pitched phone.
    pub feet_row: f64,
    /// Pairs whose lowest pixel is within this many rows of the lowest pair
    /// compete on distance to the feet.
    pub bottom_tolerance: u32,
    /// Fraction of the lane corridor covered by strips (2w / (2w + gap)).
    pub strip_fill_ratio: f64,
    /// Smallest marker quadrilateral, square pixels.
    pub min_marker_area: f64,
}

impl Default for VisionParams {
    fn default() -> Self {
        Self {
            color_threshold: 60.0,
            min_blob_area: 80,
            max_pair_angle: 10f64.to_radians(),
            gap_range: (4.0, 60.0),
            dilation_radius: 12.0,
            fit_window: 80,
            max_strip_spread: 5.0,
            feet_row: 1.2,
            bottom_tolerance: 8,
            strip_fill_ratio: 2.0 / 3.0,
            min_marker_area: 400.0,
        }
    }
}

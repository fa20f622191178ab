//! On-disk formats: deployment and world-parameter JSON, PPM/PNG frames and
//! diagnostic overlays.

use std::io::Cursor;
use std::path::Path;

use arianna_core::palette::Rgb;
use arianna_core::pathgraph::Deployment;
use arianna_core::scene::{FloorRaster, Frame, WorldParams};
use arianna_core::vision::{LabelMask, LaneDetection, MarkerDetections};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {cause}")]
    Io { path: String, cause: std::io::Error },
    #[error("{path}: {cause}")]
    Json { path: String, cause: serde_json::Error },
    #[error("png encoding: {0}")]
    Png(#[from] image::ImageError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |cause| FormatError::Io { path: path.display().to_string(), cause }
}

/// Canonical repository text of a deployment: pretty JSON, millimeter
/// coordinates, trailing newline.
pub fn deployment_json(d: &Deployment) -> String {
    let mut s = serde_json::to_string_pretty(d).expect("deployments always serialize");
    s.push('\n');
    s
}

pub fn parse_deployment(text: &str, origin: &str) -> Result<Deployment, FormatError> {
    serde_json::from_str(text).map_err(|cause| FormatError::Json { path: origin.into(), cause })
}

pub fn load_deployment(path: &Path) -> Result<Deployment, FormatError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_deployment(&text, &path.display().to_string())
}

pub fn save_deployment(path: &Path, d: &Deployment) -> Result<(), FormatError> {
    write_atomic(path, deployment_json(d).as_bytes())
}

pub fn load_world_params(path: &Path) -> Result<WorldParams, FormatError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|cause| FormatError::Json { path: path.display().to_string(), cause })
}

/// Writes to a sibling temp file, syncs it and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(io_err(path))?;
    // Make the rename itself durable.
    if let Ok(d) = std::fs::File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

/// Binary PPM (P6).
pub fn ppm_bytes(f: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", f.width, f.height).into_bytes();
    out.extend_from_slice(&f.data);
    out
}

pub fn write_ppm(path: &Path, f: &Frame) -> Result<(), FormatError> {
    std::fs::write(path, ppm_bytes(f)).map_err(io_err(path))
}

pub fn png_bytes(f: &Frame) -> Result<Vec<u8>, FormatError> {
    let img = image::RgbImage::from_raw(f.width, f.height, f.data.clone()).expect("frame size matches data");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn write_png(path: &Path, f: &Frame) -> Result<(), FormatError> {
    std::fs::write(path, png_bytes(f)?).map_err(io_err(path))
}

/// Picks PNG or PPM from the extension (PPM unless `.png`).
pub fn write_image(path: &Path, f: &Frame) -> Result<(), FormatError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("png") => write_png(path, f),
        _ => write_ppm(path, f),
    }
}

/// Segmentation as an image. Legend: palette colors as themselves, marker
/// black/white as black/white, background as mid grey.
pub fn label_image(m: &LabelMask) -> Frame {
    let mut out = Frame::new(m.width, m.height);
    for y in 0..m.height {
        for x in 0..m.width {
            out.set_pixel(x, y, m.get(x, y).display_rgb());
        }
    }
    out
}

/// Top-down floor map as an image, north (+y) up.
pub fn raster_image(r: &FloorRaster) -> Frame {
    let mut out = Frame::new(r.width as u32, r.height as u32);
    for y in 0..r.height {
        for x in 0..r.width {
            out.set_pixel(x as u32, (r.height - 1 - y) as u32, r.cells[y * r.width + x]);
        }
    }
    out
}

/// Frame with the lane mask tinted and a cross on each decoded marker.
pub fn overlay(f: &Frame, lane: Option<&LaneDetection>, markers: &MarkerDetections) -> Frame {
    let mut out = f.clone();
    if let Some(l) = lane {
        for y in 0..f.height {
            for x in 0..f.width {
                if l.lane_mask.contains(x, y) {
                    let Rgb(r, g, b) = f.pixel(x, y);
                    out.set_pixel(x, y, Rgb(r / 2 + 127, g / 2 + 127, b / 2));
                }
            }
        }
    }
    for s in &markers.sightings {
        let (cx, cy) = (s.centroid.0.round() as i64, s.centroid.1.round() as i64);
        for d in -6..=6i64 {
            for (x, y) in [(cx + d, cy), (cx, cy + d)] {
                if x >= 0 && y >= 0 && (x as u32) < f.width && (y as u32) < f.height {
                    out.set_pixel(x as u32, y as u32, Rgb(255, 0, 255));
                }
            }
        }
    }
    out
}

use alloc::vec::Vec;

use super::VisionParams;
use crate::palette::{ColorId, Rgb};
use crate::scene::Frame;

/// Per-pixel class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Label {
    Background,
    Color(ColorId),
    MarkerBlack,
    MarkerWhite,
}

impl Label {
    pub fn color(self) -> Option<ColorId> {
        match self {
            Label::Color(c) => Some(c),
            _ => None,
        }
    }

    /// Representative RGB for diagnostic overlays.
    pub fn display_rgb(self) -> Rgb {
        match self {
            Label::Background => Rgb(96, 96, 96),
            Label::Color(c) => c.rgb(),
            Label::MarkerBlack => Rgb::BLACK,
            Label::MarkerWhite => Rgb::WHITE,
        }
    }
}

/// Reference colors in tie-break order: palette, then black, then white.
const REFERENCES: [(Label, Rgb); 8] = [
    (Label::Color(ColorId::Red), ColorId::Red.rgb()),
    (Label::Color(ColorId::Green), ColorId::Green.rgb()),
    (Label::Color(ColorId::Blue), ColorId::Blue.rgb()),
    (Label::Color(ColorId::Yellow), ColorId::Yellow.rgb()),
    (Label::Color(ColorId::Magenta), ColorId::Magenta.rgb()),
    (Label::Color(ColorId::Cyan), ColorId::Cyan.rgb()),
    (Label::MarkerBlack, Rgb::BLACK),
    (Label::MarkerWhite, Rgb::WHITE),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<Label>,
}

impl LabelMask {
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Label {
        self.labels[y as usize * self.width as usize + x as usize]
    }
}

pub fn classify(c: Rgb, threshold: f64) -> Label {
    let limit = threshold * threshold;
    let mut best = (u32::MAX, Label::Background);
    for (label, rgb) in REFERENCES {
        let d = c.distance_sq(rgb);
        if d < best.0 {
            best = (d, label);
        }
    }
    if (best.0 as f64) <= limit {
        best.1
    } else {
        Label::Background
    }
}

/// Labels each pixel with the nearest reference color within the threshold.
pub fn segment_colors(f: &Frame, p: &VisionParams) -> LabelMask {
    // A frame rarely has more than a handful of distinct colors.
    let mut cache: Vec<(Rgb, Label)> = Vec::new();
    let labels = f
        .pixels()
        .map(|c| {
            if let Some(&(_, l)) = cache.iter().find(|(k, _)| *k == c) {
                return l;
            }
            let l = classify(c, p.color_threshold);
            if cache.len() < 32 {
                cache.push((c, l));
            }
            l
        })
        .collect();
    LabelMask { width: f.width, height: f.height, labels }
}

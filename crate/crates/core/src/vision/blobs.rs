use alloc::vec;
use alloc::vec::Vec;

use super::segment::{Label, LabelMask};

/// 4-connected region of one label.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub label: Label,
    /// Pixel indices (`y * width + x`), in discovery order.
    pub pixels: Vec<u32>,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Connected components of every pixel whose label satisfies `keep`, in
/// raster order of their first pixel.
pub fn components(mask: &LabelMask, keep: impl Fn(Label) -> bool) -> Vec<Component> {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        let label = mask.labels[start];
        if seen[start] || !keep(label) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            pixels.push(i as u32);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if !seen[j] && mask.labels[j] == label {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        out.push(Component { label, pixels });
    }
    out
}

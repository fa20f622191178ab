//! The closed six-color tape palette.

use serde::{Deserialize, Serialize};

/// 8-bit RGB triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);
    pub const FLOOR: Rgb = Rgb(128, 128, 128);
    pub const HORIZON: Rgb = Rgb(40, 40, 40);

    pub fn distance_sq(self, o: Rgb) -> u32 {
        let d = |a: u8, b: u8| {
            let v = a as i32 - b as i32;
            (v * v) as u32
        };
        d(self.0, o.0) + d(self.1, o.1) + d(self.2, o.2)
    }
}

/// Tape color. Declaration order is the canonical total order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ColorId {
    Red,
    Green,
    Blue,
    Yellow,
    Magenta,
    Cyan,
}

impl ColorId {
    pub const ALL: [ColorId; 6] = [
        ColorId::Red,
        ColorId::Green,
        ColorId::Blue,
        ColorId::Yellow,
        ColorId::Magenta,
        ColorId::Cyan,
    ];

    pub const fn rgb(self) -> Rgb {
        match self {
            ColorId::Red => Rgb(220, 30, 30),
            ColorId::Green => Rgb(30, 180, 60),
            ColorId::Blue => Rgb(30, 60, 220),
            ColorId::Yellow => Rgb(230, 220, 40),
            ColorId::Magenta => Rgb(200, 40, 200),
            ColorId::Cyan => Rgb(40, 200, 210),
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            ColorId::Red => "RED",
            ColorId::Green => "GREEN",
            ColorId::Blue => "BLUE",
            ColorId::Yellow => "YELLOW",
            ColorId::Magenta => "MAGENTA",
            ColorId::Cyan => "CYAN",
        }
    }
}

impl core::fmt::Display for ColorId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered strip pair, left strip first.
pub type ColorPair = (ColorId, ColorId);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_threshold_balls_are_disjoint() {
        // Blue/Cyan is the closest pair at ~140.7.
        for (i, a) in ColorId::ALL.iter().enumerate() {
            for b in &ColorId::ALL[i + 1..] {
                let d = libm::sqrt(a.rgb().distance_sq(b.rgb()) as f64);
                assert!(d > 2.0 * 60.0, "{a} vs {b}: {d}");
            }
        }
    }

    #[test]
    fn colors_serialize_uppercase() {
        assert_eq!(serde_json::to_string(&ColorId::Magenta).unwrap(), "\"MAGENTA\"");
        let c: ColorId = serde_json::from_str("\"CYAN\"").unwrap();
        assert_eq!(c, ColorId::Cyan);
    }
}

use serde::{Deserialize, Serialize};

use crate::palette::ColorPair;
use crate::vision::{LaneDetection, VisionParams};

/// Finger position on the phone screen, pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Touch {
    pub u: f64,
    pub v: f64,
}

impl Touch {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// Whole-device vibration: a square-wave pulse train while active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HapticState {
    pub active: bool,
    /// Hz, within the 1–10 Hz band felt best at low modulation rates.
    pub pulse_rate: f64,
    pub duty: f64,
}

impl Default for HapticState {
    fn default() -> Self {
        Self { active: false, pulse_rate: 5.0, duty: 0.5 }
    }
}

impl HapticState {
    pub fn is_valid(&self) -> bool {
        (1.0..=10.0).contains(&self.pulse_rate) && self.duty > 0.0 && self.duty < 1.0
    }
}

/// Motor state at `t` seconds into the pulse train.
pub fn vibration_sample(h: &HapticState, t: f64) -> bool {
    if !h.active {
        return false;
    }
    let x = t * h.pulse_rate;
    let mut phase = x - libm::floor(x);
    // Tick times like 0.3 - 0.1 land a hair below a whole period.
    if 1.0 - phase < 1e-9 {
        phase = 0.0;
    }
    phase < h.duty
}

/// Whether the finger rests on the lane the walker should follow.
///
/// A reversed or foreign pair is silent when an edge is assigned; with no
/// assignment any detected lane counts.
pub fn touch_feedback(
    det: Option<&LaneDetection>,
    assigned: Option<ColorPair>,
    touch: Option<Touch>,
    p: &VisionParams,
) -> bool {
    let (Some(det), Some(touch)) = (det, touch) else { return false };
    if assigned.is_some_and(|pair| pair != det.ordered_pair) {
        return false;
    }
    det.lane_mask.within(touch.u, touch.v, p.dilation_radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palette::ColorId::*;
    use crate::vision::PixelMask;

    fn detection() -> LaneDetection {
        let mut lane_mask = PixelMask::new(320, 240);
        for y in 0..240 {
            for x in 150..170 {
                lane_mask.bits[y * 320 + x] = true;
            }
        }
        LaneDetection { ordered_pair: (Red, Blue), axis_angle: 0.0, lane_mask, confidence: 1.0 }
    }

    #[test]
    fn pulse_train_samples() {
        let on = HapticState { active: true, ..Default::default() };
        assert!(vibration_sample(&on, 0.05));
        assert!(!vibration_sample(&on, 0.15));
        assert!(vibration_sample(&on, 0.0));
        assert!(!vibration_sample(&HapticState::default(), 0.05));
    }

    #[test]
    fn touch_on_assigned_lane() {
        let p = VisionParams::default();
        let d = detection();
        assert!(touch_feedback(Some(&d), Some((Red, Blue)), Some(Touch::new(160.0, 120.0)), &p));
        assert!(touch_feedback(Some(&d), None, Some(Touch::new(160.0, 120.0)), &p));
        // Dilation reaches 12 px past the mask edge.
        assert!(touch_feedback(Some(&d), None, Some(Touch::new(181.0, 120.0)), &p));
        assert!(!touch_feedback(Some(&d), None, Some(Touch::new(209.0, 120.0)), &p));
    }

    #[test]
    fn reversed_pair_is_silent() {
        let p = VisionParams::default();
        let d = detection();
        assert!(!touch_feedback(Some(&d), Some((Blue, Red)), Some(Touch::new(160.0, 120.0)), &p));
    }

    #[test]
    fn no_touch_or_no_lane_is_silent() {
        let p = VisionParams::default();
        assert!(!touch_feedback(Some(&detection()), None, None, &p));
        assert!(!touch_feedback(None, None, Some(Touch::new(160.0, 120.0)), &p));
    }
}

//! Scripted blind walker.
//!
//! The walker sweeps the phone like a cane (or runs a finger across the
//! screen) and perceives nothing but the motor. When vibration starts after a
//! quiet spell, the current sweep angle says where the lane lies and the body
//! turns part of the way toward it. Walking is at constant speed.
//!
//! A walker that feels nothing for `lost_timeout` seconds stops and searches:
//! a wide, slow sweep on the spot, the finger moving to a different screen
//! height (so a different distance on the floor) on each sweep and the body
//! turning a quarter to the right after each silent sweep, until vibration
//! gives a direction to walk off in. With
//! `lost_timeout: None` the walker keeps walking straight when nothing is
//! felt.

use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Point2};
use crate::navigator::Touch;
use crate::scene::{CameraIntrinsics, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchMode {
    /// Finger parked at the screen center while the phone sweeps.
    FixedCenter,
    /// Phone held straight, finger runs across the screen.
    FingerScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentParams {
    pub tick_rate: f64,
    /// m/s.
    pub walking_speed: f64,
    /// Radians either side of straight ahead.
    pub sweep_amplitude: f64,
    /// Full left-right-left cycles per second.
    pub sweep_frequency: f64,
    pub steering_gain: f64,
    pub touch_mode: TouchMode,
    /// Crossings of the screen width per second.
    pub finger_scan_rate: f64,
    /// Seconds without vibration before the walker stops to search.
    pub lost_timeout: Option<f64>,
    pub search_amplitude: f64,
    pub search_frequency: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            tick_rate: 10.0,
            walking_speed: 0.5,
            sweep_amplitude: 40f64.to_radians(),
            sweep_frequency: 1.0,
            steering_gain: 0.6,
            touch_mode: TouchMode::FixedCenter,
            finger_scan_rate: 2.0,
            lost_timeout: Some(2.0),
            search_amplitude: 1.2,
            search_frequency: 0.5,
        }
    }
}

impl AgentParams {
    pub fn is_valid(&self) -> bool {
        let positive = [
            self.tick_rate,
            self.walking_speed,
            self.sweep_amplitude,
            self.sweep_frequency,
            self.steering_gain,
            self.finger_scan_rate,
            self.search_amplitude,
            self.search_frequency,
        ];
        positive.iter().all(|v| *v > 0.0 && v.is_finite())
            && self.sweep_amplitude <= 70f64.to_radians()
            && self.search_amplitude <= crate::scene::MAX_PHONE_YAW
            && self.lost_timeout.is_none_or(|t| t > 0.0)
    }
}

/// Triangle wave with period 1: 0 at phase 0, +1 at 0.25, −1 at 0.75.
pub fn triangle(phase: f64) -> f64 {
    let x = phase + 0.25;
    1.0 - 4.0 * libm::fabs(x - libm::floor(x) - 0.5)
}

/// Finger height, as a fraction of the screen, on successive search sweeps:
/// middle distance, far, then close to the feet.
const SEARCH_ROWS: [f64; 3] = [0.5, 0.2, 0.85];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    Walking,
    Searching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionCause {
    /// Turn toward the sweep angle at which vibration began.
    Onset,
    /// Quarter turn after a silent search sweep.
    SearchTurn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    /// Heading change, radians, counter-clockwise positive.
    pub delta: f64,
    pub cause: CorrectionCause,
}

/// What one tick of walking did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentStep {
    /// Pose for the next tick, phone already swung to its next angle.
    pub pose: Pose,
    pub onset: bool,
    pub correction: Option<Correction>,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub params: AgentParams,
    camera: CameraIntrinsics,
    tick: u64,
    mode: AgentMode,
    /// Sweep phase is measured from the tick the current mode began.
    mode_tick: u64,
    quiet_ticks: u64,
    /// Ticks without vibration since walking (re)started or last felt.
    silent_ticks: u64,
}

impl Agent {
    pub fn new(params: AgentParams, camera: CameraIntrinsics, mode: AgentMode) -> Self {
        Self { params, camera, tick: 0, mode, mode_tick: 0, quiet_ticks: u64::MAX / 2, silent_ticks: 0 }
    }

    pub fn mode(&self) -> AgentMode {
        self.mode
    }

    fn local_time(&self) -> f64 {
        (self.tick - self.mode_tick) as f64 / self.params.tick_rate
    }

    fn finger_scanning(&self) -> bool {
        self.mode == AgentMode::Walking && self.params.touch_mode == TouchMode::FingerScan
    }

    /// Phone yaw relative to the body this tick.
    pub fn phone_yaw(&self) -> f64 {
        let t = self.local_time();
        match self.mode {
            AgentMode::Searching => self.params.search_amplitude * triangle(self.params.search_frequency * t),
            AgentMode::Walking if self.finger_scanning() => 0.0,
            AgentMode::Walking => self.params.sweep_amplitude * triangle(self.params.sweep_frequency * t),
        }
    }

    /// Finger position this tick.
    pub fn touch(&self) -> Touch {
        let (cx, cy) = self.camera.center();
        if self.mode == AgentMode::Searching {
            let sweep = libm::floor(self.local_time() * self.params.search_frequency) as usize;
            return Touch::new(cx, SEARCH_ROWS[sweep % SEARCH_ROWS.len()] * self.camera.height as f64);
        }
        if !self.finger_scanning() {
            return Touch::new(cx, cy);
        }
        // One crossing per 1/rate seconds, so a full cycle is twice that.
        let phase = self.params.finger_scan_rate / 2.0 * self.local_time();
        let u = (cx + cx * triangle(phase)).clamp(0.0, self.camera.width as f64 - 0.5);
        Touch::new(u, cy)
    }

    /// Direction, relative to the body, that the touched point looks along.
    pub fn sweep_angle(&self) -> f64 {
        let touch = self.touch();
        let (cx, _) = self.camera.center();
        self.phone_yaw() - libm::atan((touch.u - cx) / self.camera.focal())
    }

    /// Pose with the phone swung to this tick's angle.
    pub fn pose_now(&self, body: &Pose) -> Pose {
        Pose { phone_yaw_offset: self.phone_yaw(), ..*body }
    }

    /// Feel the motor for this tick, then steer and walk.
    pub fn step(&mut self, pose: &Pose, vibrating: bool) -> AgentStep {
        let onset = vibrating && self.quiet_ticks >= 2;
        let angle = self.sweep_angle();
        let mut heading = pose.body_heading;
        let mut position = pose.position;
        let mut correction = None;
        let mut next_mode = self.mode;

        match self.mode {
            AgentMode::Walking => {
                if onset {
                    let delta = self.params.steering_gain * angle;
                    heading += delta;
                    correction = Some(Correction { delta, cause: CorrectionCause::Onset });
                }
                let stride = self.params.walking_speed / self.params.tick_rate;
                position = position + Point2::from_angle(heading) * stride;
                self.silent_ticks = if vibrating { 0 } else { self.silent_ticks + 1 };
                if let Some(limit) = self.params.lost_timeout {
                    if self.silent_ticks as f64 >= limit * self.params.tick_rate {
                        next_mode = AgentMode::Searching;
                    }
                }
            }
            AgentMode::Searching => {
                if onset {
                    heading += angle;
                    correction = Some(Correction { delta: angle, cause: CorrectionCause::Onset });
                    next_mode = AgentMode::Walking;
                    self.silent_ticks = 0;
                } else {
                    let period = libm::round(self.params.tick_rate / self.params.search_frequency) as u64;
                    let elapsed = self.tick + 1 - self.mode_tick;
                    if period > 0 && elapsed % period == 0 {
                        let delta = -core::f64::consts::FRAC_PI_2;
                        heading += delta;
                        correction = Some(Correction { delta, cause: CorrectionCause::SearchTurn });
                    }
                }
            }
        }

        self.quiet_ticks = if vibrating { 0 } else { self.quiet_ticks.saturating_add(1) };
        self.tick += 1;
        if next_mode != self.mode {
            self.mode = next_mode;
            self.mode_tick = self.tick;
        }
        let body = Pose { position, body_heading: wrap_angle(heading), ..*pose };
        AgentStep { pose: self.pose_now(&body), onset, correction }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walker(params: AgentParams) -> Agent {
        Agent::new(params, CameraIntrinsics::default(), AgentMode::Walking)
    }

    #[test]
    fn sweep_samples_at_ten_hertz() {
        let mut a = walker(AgentParams::default());
        let mut pose = Pose::new(Point2::new(0.0, 0.0), 0.0);
        let mut deg = std::vec::Vec::new();
        for _ in 0..10 {
            deg.push(libm::round(a.phone_yaw().to_degrees()));
            pose = a.step(&pose, false).pose;
        }
        assert_eq!(deg, [0.0, 16.0, 32.0, 32.0, 16.0, 0.0, -16.0, -32.0, -32.0, -16.0]);
    }

    #[test]
    fn no_vibration_walks_straight() {
        let params = AgentParams { lost_timeout: None, ..Default::default() };
        let mut a = walker(params);
        let mut pose = Pose::new(Point2::new(0.0, 0.0), 0.3);
        for _ in 0..100 {
            let s = a.step(&pose, false);
            assert!(s.correction.is_none());
            pose = s.pose;
        }
        assert_eq!(pose.body_heading, 0.3);
        let d = pose.position;
        assert!((d.norm() - 5.0).abs() < 1e-9);
        assert!((d.y.atan2(d.x) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn symmetric_onsets_cancel() {
        // Vibration felt at +16° and −16° once per sweep each.
        let mut a = walker(AgentParams { lost_timeout: None, ..Default::default() });
        let mut pose = Pose::new(Point2::new(0.0, 0.0), 0.0);
        for k in 0..10 {
            pose = a.step(&pose, k == 1 || k == 6).pose;
        }
        assert!(pose.body_heading.abs() < 1e-12);
    }

    #[test]
    fn onset_needs_a_quiet_spell() {
        let mut a = walker(AgentParams { lost_timeout: None, ..Default::default() });
        let mut pose = Pose::new(Point2::new(0.0, 0.0), 0.0);
        let pattern = [false, true, false, true, false, false, true];
        let onsets: std::vec::Vec<bool> = pattern
            .iter()
            .map(|&v| {
                let s = a.step(&pose, v);
                pose = s.pose;
                s.onset
            })
            .collect();
        assert_eq!(onsets, [false, true, false, false, false, false, true]);
    }

    #[test]
    fn lost_walker_stops_and_turns() {
        let mut a = walker(AgentParams::default());
        let mut pose = Pose::new(Point2::new(0.0, 0.0), 0.0);
        for _ in 0..20 {
            pose = a.step(&pose, false).pose;
        }
        assert_eq!(a.mode(), AgentMode::Searching);
        let stop = pose.position;
        let mut turns = 0;
        for _ in 0..20 {
            let s = a.step(&pose, false);
            turns += s.correction.is_some() as u32;
            pose = s.pose;
        }
        assert_eq!(pose.position, stop);
        assert_eq!(turns, 1);
        assert!((pose.body_heading + core::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn finger_scan_keeps_phone_straight() {
        let params = AgentParams { touch_mode: TouchMode::FingerScan, ..Default::default() };
        let mut a = walker(params);
        let mut pose = Pose::new(Point2::new(0.0, 0.0), 0.0);
        let mut us = std::vec::Vec::new();
        for _ in 0..10 {
            assert_eq!(pose.phone_yaw_offset, 0.0);
            us.push(a.touch().u);
            let phi = a.sweep_angle();
            // Right of center looks right (negative angle).
            assert!((a.touch().u - 160.0) * phi <= 0.0);
            pose = a.step(&pose, false).pose;
        }
        assert_eq!(us[0], 160.0);
        assert!(us.iter().any(|&u| u > 280.0) && us.iter().any(|&u| u < 40.0));
    }
}

//! The phone app: turns each camera frame and the finger position into the
//! vibration signal, raises server requests on marker sightings and applies
//! the guidance that comes back.
//!
//! The navigator knows nothing of the walker's position between markers.
//! Requests are returned to the caller, which delivers the answer through
//! [`Navigator::receive`]; in offline mode sightings resolve against the
//! local deployment copy inside [`Navigator::step`].

mod guidance;
mod haptic;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::palette::ColorPair;
use crate::pathgraph::{Deployment, EdgeId, NodeId, QrId, TravelDirection};
use crate::scene::Frame;
use crate::vision::{
    detect_lane_preferring, detect_markers, segment_colors, LaneDetection, MarkerDetections, MarkerKind, MarkerPayload,
    VisionParams,
};

pub use guidance::{offline_next_edge, EdgeHint, Guidance, NextEdge, ResolveError, ResolveRequest, SessionId};
pub use haptic::{touch_feedback, vibration_sample, HapticState, Touch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavMode {
    /// Looking for a lane, or for the assigned lane after losing it.
    Searching,
    OnEdge,
    /// Guidance received at a node; the next lane is not yet under the phone.
    AtNode,
    Arrived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub edge: EdgeId,
    pub direction: TravelDirection,
    pub expected_pair: ColorPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub mode: NavMode,
    pub assigned: Option<Assignment>,
    pub last_node: Option<NodeId>,
    pub session: Option<SessionId>,
    pub destination: Option<NodeId>,
    pub deployment_version_seen: u64,
    pub offline_copy: Option<Deployment>,
}

impl Default for NavState {
    fn default() -> Self {
        Self {
            mode: NavMode::Searching,
            assigned: None,
            last_node: None,
            session: None,
            destination: None,
            deployment_version_seen: 0,
            offline_copy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NavEventKind {
    MarkerSeen { payload: MarkerPayload },
    GuidanceReceived { guidance: Guidance },
    EdgeAcquired,
    EdgeLost,
    Arrived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: NavEventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavConfig {
    pub vision: VisionParams,
    /// Pulse rate and duty of the vibration; `active` is ignored.
    pub haptic: HapticState,
    /// Consecutive ticks before a lane counts as acquired or lost.
    pub debounce_ticks: u32,
    /// Seconds before the same marker may trigger again.
    pub retrigger_after: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self { vision: VisionParams::default(), haptic: HapticState::default(), debounce_ticks: 3, retrigger_after: 5.0 }
    }
}

/// Everything one tick produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub haptic: HapticState,
    /// Motor state this tick.
    pub vibrating: bool,
    pub events: Vec<NavEvent>,
    pub request: Option<ResolveRequest>,
    pub lane: Option<LaneDetection>,
    pub markers: MarkerDetections,
}

#[derive(Debug, Clone)]
pub struct Navigator {
    pub config: NavConfig,
    pub state: NavState,
    last_marker: Option<(MarkerPayload, f64)>,
    last_edge_marker: Option<(EdgeHint, f64)>,
    match_run: u32,
    miss_run: u32,
    lane_held: bool,
    /// Start of the current activation; pulses are phased from it.
    active_since: Option<f64>,
}

impl Navigator {
    pub fn new(config: NavConfig) -> Self {
        Self {
            config,
            state: NavState::default(),
            last_marker: None,
            last_edge_marker: None,
            match_run: 0,
            miss_run: 0,
            lane_held: false,
            active_since: None,
        }
    }

    /// Online mode: sightings become requests carrying this session.
    pub fn with_session(config: NavConfig, session: SessionId, destination: NodeId) -> Self {
        let mut n = Self::new(config);
        n.state.session = Some(session);
        n.state.destination = Some(destination);
        n
    }

    /// Offline mode: sightings resolve against a local deployment copy.
    pub fn offline(config: NavConfig, copy: Deployment, destination: NodeId) -> Self {
        let mut n = Self::new(config);
        n.state.deployment_version_seen = copy.version;
        n.state.offline_copy = Some(copy);
        n.state.destination = Some(destination);
        n
    }

    /// New destination; the current assignment no longer applies.
    pub fn set_destination(&mut self, destination: NodeId, session: Option<SessionId>) {
        self.state.destination = Some(destination);
        if session.is_some() {
            self.state.session = session;
        }
        self.state.assigned = None;
        self.state.mode = NavMode::Searching;
        self.last_marker = None;
        self.lane_held = false;
        self.match_run = 0;
        self.miss_run = 0;
    }

    pub fn assigned_pair(&self) -> Option<ColorPair> {
        self.state.assigned.map(|a| a.expected_pair)
    }

    /// One camera tick at time `t` (seconds, non-decreasing).
    pub fn step(&mut self, frame: &Frame, touch: Option<Touch>, t: f64) -> StepOutput {
        let vp = &self.config.vision;
        let mask = segment_colors(frame, vp);
        // The app knows which pair it wants; other lanes in view only matter
        // when that one is not.
        let lane = detect_lane_preferring(&mask, vp, self.assigned_pair());
        let markers = detect_markers(frame, &mask, vp);
        let mut events = Vec::new();

        // Haptics use the assignment in force when the frame was taken.
        let active = touch_feedback(lane.as_ref(), self.assigned_pair(), touch, vp);
        let haptic = HapticState { active, ..self.config.haptic };
        let since = match (active, self.active_since) {
            (false, _) => None,
            (true, None) => Some(t),
            (true, Some(s)) => Some(s),
        };
        self.active_since = since;
        let vibrating = since.is_some_and(|s| vibration_sample(&haptic, t - s));

        let matched = lane.as_ref().is_some_and(|l| self.assigned_pair().is_none_or(|p| p == l.ordered_pair));
        self.track_lane(matched, t, &mut events);

        let request = self.on_markers(&markers, t, &mut events);
        StepOutput { haptic, vibrating, events, request, lane, markers }
    }

    fn track_lane(&mut self, matched: bool, t: f64, events: &mut Vec<NavEvent>) {
        let n = self.config.debounce_ticks.max(1);
        if matched {
            self.match_run += 1;
            self.miss_run = 0;
        } else {
            self.miss_run += 1;
            self.match_run = 0;
        }
        if !self.lane_held && self.match_run >= n {
            self.lane_held = true;
            events.push(NavEvent { t, kind: NavEventKind::EdgeAcquired });
            if self.state.assigned.is_some() && self.state.mode != NavMode::Arrived {
                self.state.mode = NavMode::OnEdge;
            }
        } else if self.lane_held && self.miss_run >= n {
            self.lane_held = false;
            events.push(NavEvent { t, kind: NavEventKind::EdgeLost });
            if self.state.mode == NavMode::OnEdge {
                self.state.mode = NavMode::Searching;
            }
        }
    }

    fn on_markers(&mut self, markers: &MarkerDetections, t: f64, events: &mut Vec<NavEvent>) -> Option<ResolveRequest> {
        for s in &markers.sightings {
            if s.payload.kind == MarkerKind::Edge {
                let hint = EdgeHint { edge: EdgeId(s.payload.id as u32), decimeters: s.payload.aux };
                self.last_edge_marker = Some((hint, t));
            }
        }
        let retrigger = self.config.retrigger_after;
        let fresh = |p: &MarkerPayload| match self.last_marker {
            Some((last, at)) => last != *p || t - at >= retrigger,
            None => true,
        };
        let scan = markers
            .sightings
            .iter()
            .filter(|s| s.payload.kind == MarkerKind::Node && fresh(&s.payload))
            .max_by(|a, b| a.area.total_cmp(&b.area))?;
        let payload = scan.payload;
        self.last_marker = Some((payload, t));
        events.push(NavEvent { t, kind: NavEventKind::MarkerSeen { payload } });

        let qr_id = QrId(payload.id);
        if self.state.offline_copy.is_some() {
            let result = self.resolve_offline(qr_id);
            events.extend(self.receive(result, t));
            return None;
        }
        let edge_hint = self.last_edge_marker.filter(|(_, at)| t - at < retrigger).map(|(h, _)| h);
        Some(ResolveRequest { qr_id, session: self.state.session, edge_hint })
    }

    fn resolve_offline(&self, qr: QrId) -> Result<Guidance, ResolveError> {
        let d = self.state.offline_copy.as_ref().ok_or(ResolveError::Unavailable)?;
        let dest = self.state.destination.ok_or(ResolveError::Unauthorized)?;
        let node = d.anchor(qr).ok_or(ResolveError::NotFound)?.node;
        offline_next_edge(d, node, dest).map_err(|_| ResolveError::NoRoute)
    }

    /// Applies the answer to the last request. Failures keep the previous
    /// assignment; an unreachable server also re-arms the marker so the next
    /// sighting retries.
    pub fn receive(&mut self, result: Result<Guidance, ResolveError>, t: f64) -> Vec<NavEvent> {
        let mut events = Vec::new();
        let g = match result {
            Ok(g) => g,
            Err(ResolveError::Unavailable) => {
                self.last_marker = None;
                return events;
            }
            Err(_) => return events,
        };
        self.state.deployment_version_seen = g.deployment_version;
        self.state.last_node = Some(g.node);
        events.push(NavEvent { t, kind: NavEventKind::GuidanceReceived { guidance: g } });
        if g.destination_reached {
            self.state.assigned = None;
            if self.state.mode != NavMode::Arrived {
                self.state.mode = NavMode::Arrived;
                events.push(NavEvent { t, kind: NavEventKind::Arrived });
            }
            return events;
        }
        if let Some(next) = g.next {
            let a = Assignment { edge: next.edge, direction: next.direction, expected_pair: next.expected_pair };
            if self.state.assigned != Some(a) {
                self.state.assigned = Some(a);
                self.state.mode = NavMode::AtNode;
                // The new pair has to be acquired afresh.
                self.lane_held = false;
                self.match_run = 0;
                self.miss_run = 0;
            }
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palette::ColorId::*;
    use crate::palette::Rgb;

    fn lane_frame() -> Frame {
        let mut f = Frame::filled(320, 240, Rgb::FLOOR);
        for y in 20..240 {
            for x in 140..150 {
                f.set_pixel(x, y, Red.rgb());
            }
            for x in 160..170 {
                f.set_pixel(x, y, Blue.rgb());
            }
        }
        f
    }

    fn assign(n: &mut Navigator, pair: ColorPair) {
        let g = Guidance {
            node: NodeId(0),
            destination_reached: false,
            next: Some(NextEdge { edge: EdgeId(4), direction: TravelDirection::Forward, expected_pair: pair, remaining_distance: 3.0 }),
            deployment_version: 1,
        };
        n.receive(Ok(g), 0.0);
    }

    #[test]
    fn acquisition_takes_three_ticks() {
        let mut n = Navigator::new(NavConfig::default());
        assign(&mut n, (Red, Blue));
        let f = lane_frame();
        let touch = Some(Touch::new(155.0, 200.0));
        for k in 0..2 {
            let out = n.step(&f, touch, 0.1 * k as f64);
            assert!(out.haptic.active);
            assert!(out.events.is_empty());
            assert_eq!(n.state.mode, NavMode::AtNode);
        }
        let out = n.step(&f, touch, 0.2);
        assert_eq!(out.events, [NavEvent { t: 0.2, kind: NavEventKind::EdgeAcquired }]);
        assert_eq!(n.state.mode, NavMode::OnEdge);

        let bare = Frame::filled(320, 240, Rgb::FLOOR);
        let lost: Vec<_> = (3..6).flat_map(|k| n.step(&bare, touch, 0.1 * k as f64).events).collect();
        assert_eq!(lost.len(), 1);
        assert_eq!(lost[0].kind, NavEventKind::EdgeLost);
        assert_eq!(n.state.mode, NavMode::Searching);
    }

    #[test]
    fn reversed_lane_is_silent_and_never_acquired() {
        let mut n = Navigator::new(NavConfig::default());
        assign(&mut n, (Blue, Red));
        let f = lane_frame();
        for k in 0..5 {
            let out = n.step(&f, Some(Touch::new(155.0, 200.0)), 0.1 * k as f64);
            assert!(!out.haptic.active && !out.vibrating);
            assert!(out.events.is_empty());
        }
    }

    #[test]
    fn no_touch_no_vibration() {
        let mut n = Navigator::new(NavConfig::default());
        let out = n.step(&lane_frame(), None, 0.0);
        assert!(out.lane.is_some());
        assert!(!out.haptic.active && !out.vibrating);
    }

    #[test]
    fn pulses_start_with_the_activation() {
        let mut n = Navigator::new(NavConfig::default());
        let f = lane_frame();
        let touch = Some(Touch::new(155.0, 200.0));
        // Activation at an odd tick still opens with a pulse.
        n.step(&f, None, 0.0);
        let first = n.step(&f, touch, 0.1);
        let second = n.step(&f, touch, 0.2);
        let third = n.step(&f, touch, 0.3);
        assert_eq!((first.vibrating, second.vibrating, third.vibrating), (true, false, true));
    }

    #[test]
    fn unavailable_server_keeps_assignment() {
        let mut n = Navigator::new(NavConfig::default());
        assign(&mut n, (Red, Blue));
        let before = n.state.clone();
        assert!(n.receive(Err(ResolveError::Unavailable), 1.0).is_empty());
        assert!(n.receive(Err(ResolveError::NoRoute), 1.1).is_empty());
        assert_eq!(n.state, before);
    }

    #[test]
    fn arrival_is_reported_once() {
        let mut n = Navigator::new(NavConfig::default());
        let g = Guidance { node: NodeId(3), destination_reached: true, next: None, deployment_version: 2 };
        let ev = n.receive(Ok(g), 4.0);
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[1].kind, NavEventKind::Arrived);
        assert_eq!(n.state.mode, NavMode::Arrived);
        assert_eq!(n.receive(Ok(g), 4.5).len(), 1);
    }

    #[test]
    fn event_json_shape() {
        let e = NavEvent { t: 1.5, kind: NavEventKind::EdgeAcquired };
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"t":1.5,"type":"edge_acquired"}"#);
        let e = NavEvent { t: 0.0, kind: NavEventKind::MarkerSeen { payload: MarkerPayload::node(7) } };
        let back: NavEvent = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}

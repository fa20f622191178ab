//! Trace records and the metrics computed from them.
//!
//! A trace is JSON lines: one [`TraceHeader`] line carrying the deployment
//! and run settings, then one [`TraceRecord`] per tick, ticks contiguous from
//! 0. Metrics are always recomputed from the records, so a trace re-read from
//! disk gives the same numbers as the run that wrote it.

use arianna_core::agent::{AgentMode, Correction, CorrectionCause};
use arianna_core::navigator::{Assignment, Guidance, NavEvent, NavEventKind, NavMode, ResolveError, ResolveRequest, Touch};
use arianna_core::palette::ColorPair;
use arianna_core::pathgraph::{cross_track_distance, Deployment, NodeId};
use arianna_core::scene::Pose;
use serde::{Deserialize, Serialize};

use crate::pathserver::AdminPatch;

pub const TRACE_FORMAT: &str = "arianna-trace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub from: NodeId,
    pub to: NodeId,
    pub seed: u64,
    pub tick_rate: f64,
    pub haptics: bool,
    pub noise_sigma: f64,
    /// Floor and graph as of tick 0.
    pub deployment: Deployment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub pair: ColorPair,
    pub confidence: f64,
}

/// One exchange with the path server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundTrip {
    CreateSession { destination: NodeId, session: Option<String>, error: Option<String> },
    Resolve { request: ResolveRequest, response: Result<Guidance, ResolveError> },
    Patch { patch: AdminPatch, version: Option<u64>, error: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub t: f64,
    /// Pose the frame was taken from.
    pub pose: Pose,
    /// Body-relative direction of the touched point, radians.
    pub sweep_angle: f64,
    pub touch: Option<Touch>,
    /// What the walker felt.
    pub vibration: bool,
    pub haptic_active: bool,
    pub detection: Option<Detection>,
    pub markers: Vec<u16>,
    pub assigned: Option<Assignment>,
    pub nav_mode: NavMode,
    pub agent_mode: AgentMode,
    pub onset: bool,
    pub correction: Option<Correction>,
    pub events: Vec<NavEvent>,
    pub round_trips: Vec<RoundTrip>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(ParseError { line: 1, message: "empty trace".into() })?;
        let header: TraceHeader =
            serde_json::from_str(first).map_err(|e| ParseError { line: 1, message: e.to_string() })?;
        if header.format != TRACE_FORMAT {
            return Err(ParseError { line: 1, message: format!("unknown trace format {:?}", header.format) });
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let r: TraceRecord =
                serde_json::from_str(line).map_err(|e| ParseError { line: i + 1, message: e.to_string() })?;
            if r.tick != records.len() as u64 {
                return Err(ParseError { line: i + 1, message: format!("tick {} out of sequence", r.tick) });
            }
            records.push(r);
        }
        Ok(Self { header, records })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub reached: bool,
    /// Seconds; `None` unless reached.
    pub time_to_goal: Option<f64>,
    pub mean_cross_track: f64,
    pub max_cross_track: f64,
    pub duty_cycle: f64,
    pub marker_scans: u32,
    pub reroutes: u32,
    pub ticks: u64,
    pub round_trips: u32,
    pub heading_corrections: u32,
    /// Fraction of heading corrections made on a tick with a vibration
    /// onset or right after one.
    pub haptic_causality: f64,
}

/// Guidance that contradicts the plan the previous guidance implied: either
/// a different next edge at the same node, or arrival at the expected next
/// node with a remaining distance other than the planned one.
fn is_reroute(prev: &Guidance, g: &Guidance, d: &Deployment) -> bool {
    let Some(p) = prev.next else { return false };
    let Some(edge) = d.edge(p.edge) else { return true };
    let far = match p.direction {
        arianna_core::pathgraph::TravelDirection::Forward => edge.to,
        arianna_core::pathgraph::TravelDirection::Backward => edge.from,
    };
    if g.node == prev.node {
        return g.next.map(|n| n.edge) != Some(p.edge);
    }
    if g.node != far {
        return true;
    }
    let planned = p.remaining_distance - edge.length();
    let now = g.next.map_or(0.0, |n| n.remaining_distance);
    (now - planned).abs() > 1e-5
}

pub fn eval_trace(trace: &Trace) -> RunMetrics {
    let d = &trace.header.deployment;
    let n = trace.records.len();
    let mut reached_at = None;
    let mut xt = Vec::new();
    let mut on = 0usize;
    let mut scans = 0u32;
    let mut reroutes = 0u32;
    let mut round_trips = 0u32;
    let mut corrections = 0u32;
    let mut caused = 0u32;
    let mut last_guidance: Option<Guidance> = None;

    for (i, r) in trace.records.iter().enumerate() {
        on += r.vibration as usize;
        round_trips += r.round_trips.len() as u32;
        if let Some(e) = r.assigned.and_then(|a| d.edge(a.edge)) {
            xt.push(cross_track_distance(r.pose.position, e));
        }
        for ev in &r.events {
            match &ev.kind {
                NavEventKind::MarkerSeen { .. } => scans += 1,
                NavEventKind::GuidanceReceived { guidance } => {
                    if last_guidance.as_ref().is_some_and(|p| is_reroute(p, guidance, d)) {
                        reroutes += 1;
                    }
                    last_guidance = Some(*guidance);
                }
                NavEventKind::Arrived if reached_at.is_none() => reached_at = Some(ev.t),
                _ => {}
            }
        }
        if r.correction.is_some() {
            corrections += 1;
            let onset_at = |k: usize| {
                let rec = &trace.records[k];
                let quiet = |j: Option<usize>| j.is_none_or(|j| !trace.records[j].vibration);
                rec.vibration && quiet(k.checked_sub(1)) && quiet(k.checked_sub(2))
            };
            if onset_at(i) || (i > 0 && onset_at(i - 1)) {
                caused += 1;
            }
        }
    }

    let mean = if xt.is_empty() { 0.0 } else { xt.iter().sum::<f64>() / xt.len() as f64 };
    RunMetrics {
        reached: reached_at.is_some(),
        time_to_goal: reached_at,
        mean_cross_track: mean,
        max_cross_track: xt.iter().copied().fold(0.0, f64::max),
        duty_cycle: if n == 0 { 0.0 } else { on as f64 / n as f64 },
        marker_scans: scans,
        reroutes,
        ticks: n as u64,
        round_trips,
        heading_corrections: corrections,
        haptic_causality: if corrections == 0 { 1.0 } else { caused as f64 / corrections as f64 },
    }
}

/// Corrections by cause, for reports.
pub fn correction_counts(trace: &Trace) -> (u32, u32) {
    trace.records.iter().filter_map(|r| r.correction).fold((0, 0), |(o, s), c| match c.cause {
        CorrectionCause::Onset => (o + 1, s),
        CorrectionCause::SearchTurn => (o, s + 1),
    })
}

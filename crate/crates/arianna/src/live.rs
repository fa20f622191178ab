//! Live simulation channel for an interactive client, over one WebSocket.
//!
//! The client steers a walker by hand (turn, step, finger position, phone
//! angle) and gets one `tick` message per simulated tick at 10 Hz carrying
//! the vibration state. Frames and the map are sent only on request, so a
//! blind-mode client never has to receive anything but ticks.
//!
//! Each connection runs its own simulation thread against the shared path
//! server; admin patches sent here reach every connection.

use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use arianna_core::navigator::{Guidance, NavEvent, NavEventKind, Touch};
use arianna_core::pathgraph::{Deployment, NodeId, NodeKind};
use arianna_core::scene::{Pose, MAX_PHONE_YAW};
use arianna_core::Point2;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::format::png_bytes;
use crate::pathserver::{AdminPatch, PathServer};
use crate::sim::{SimConfig, Simulation};

/// Radians per second while a turn key is held.
pub const TURN_RATE: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Input {
    #[serde(default)]
    pub turn: i8,
    #[serde(default)]
    pub step: bool,
    #[serde(default)]
    pub touch: Option<Touch>,
    #[serde(default)]
    pub sweep_override: Option<f64>,
}

impl Default for Input {
    fn default() -> Self {
        Self { turn: 0, step: false, touch: None, sweep_override: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMsg {
    Input(Input),
    SetDestination { node: NodeId },
    AdminPatch(AdminPatch),
    GetMap,
    GetFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMsg {
    Tick {
        t: f64,
        pose: Pose,
        vibration: bool,
        frame_id: u64,
        events: Vec<NavEvent>,
        guidance: Option<Guidance>,
    },
    Frame { frame_id: u64, png_base64: String },
    Map { deployment: Deployment },
    PatchResult { version: Option<u64>, error: Option<String> },
    Error { message: String },
}

/// Settings for new connections.
#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub tick_rate: f64,
    /// `None` picks the lowest-id point of interest.
    pub start: Option<NodeId>,
    /// `None` picks the highest-id point of interest.
    pub destination: Option<NodeId>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self { tick_rate: 10.0, start: None, destination: None }
    }
}

#[derive(Clone)]
struct LiveState {
    server: Arc<PathServer>,
    config: Arc<LiveConfig>,
}

pub fn router(server: Arc<PathServer>, config: LiveConfig) -> Router {
    Router::new().route("/sim", get(upgrade)).with_state(LiveState { server, config: Arc::new(config) })
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<LiveState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

fn pois(d: &Deployment) -> Vec<NodeId> {
    let mut v: Vec<NodeId> = d.nodes.iter().filter(|n| n.kind == NodeKind::PointOfInterest).map(|n| n.id).collect();
    if v.is_empty() {
        v = d.nodes.iter().map(|n| n.id).collect();
    }
    v.sort();
    v
}

/// Simulation for one connection.
pub fn new_session(server: &Arc<PathServer>, config: &LiveConfig) -> Result<Simulation<Arc<PathServer>>, String> {
    let d = server.snapshot().deployment.clone();
    let p = pois(&d);
    let from = config.start.or(p.first().copied()).ok_or("empty deployment")?;
    let to = config.destination.or(p.last().copied()).ok_or("empty deployment")?;
    let mut cfg = SimConfig { from, to, ..SimConfig::default() };
    cfg.agent.tick_rate = config.tick_rate;
    let mut sim = Simulation::new(d, cfg, Some(server.clone())).map_err(|e| e.to_string())?;
    // Hand-held: phone straight until the client says otherwise.
    sim.pose.phone_yaw_offset = 0.0;
    Ok(sim)
}

/// Applies one client input to the walker and runs the tick.
pub fn manual_tick(sim: &mut Simulation<Arc<PathServer>>, input: &Input, guidance: &mut Option<Guidance>) -> ServerMsg {
    let rate = sim.config.agent.tick_rate;
    let mut pose = sim.pose;
    pose.body_heading = arianna_core::geometry::wrap_angle(pose.body_heading + input.turn.signum() as f64 * TURN_RATE / rate);
    if input.step {
        pose.position = pose.position + Point2::from_angle(pose.body_heading) * (sim.config.agent.walking_speed / rate);
    }
    pose.phone_yaw_offset = input.sweep_override.unwrap_or(0.0).clamp(-MAX_PHONE_YAW, MAX_PHONE_YAW);
    let t = sim.time();
    let frame_id = sim.tick();
    let sensed = sim.step_with(pose, input.touch);
    for e in &sensed.out.events {
        if let NavEventKind::GuidanceReceived { guidance: g } = e.kind {
            *guidance = Some(g);
        }
    }
    ServerMsg::Tick { t, pose, vibration: sensed.out.vibrating, frame_id, events: sensed.out.events, guidance: *guidance }
}

fn handle(sim: &mut Simulation<Arc<PathServer>>, msg: ClientMsg, input: &mut Input, out: &mut Vec<ServerMsg>) {
    match msg {
        ClientMsg::Input(i) => *input = i,
        ClientMsg::SetDestination { node } => {
            if let Err(e) = sim.set_destination(node) {
                out.push(ServerMsg::Error { message: e.to_string() });
            }
        }
        ClientMsg::AdminPatch(p) => {
            let r = sim.service().map(|s| s.apply_patch(&p));
            out.push(match r {
                Some(Ok(v)) => ServerMsg::PatchResult { version: Some(v), error: None },
                Some(Err(e)) => ServerMsg::PatchResult { version: None, error: Some(e.to_string()) },
                None => ServerMsg::Error { message: "no server".into() },
            });
        }
        ClientMsg::GetMap => {
            let d = sim.service().map(|s| s.snapshot().deployment.clone()).unwrap_or_else(|| sim.deployment.clone());
            out.push(ServerMsg::Map { deployment: d });
        }
        ClientMsg::GetFrame => match sim.last_frame.as_ref().map(png_bytes) {
            Some(Ok(png)) => out.push(ServerMsg::Frame {
                frame_id: sim.tick().saturating_sub(1),
                png_base64: base64::engine::general_purpose::STANDARD.encode(png),
            }),
            Some(Err(e)) => out.push(ServerMsg::Error { message: e.to_string() }),
            None => out.push(ServerMsg::Error { message: "no frame yet".into() }),
        },
    }
}

/// Simulation thread: drains client messages, ticks on schedule, and stops
/// when the client goes away.
fn run_loop(mut sim: Simulation<Arc<PathServer>>, rx: mpsc::Receiver<ClientMsg>, tx: tokio::sync::mpsc::UnboundedSender<ServerMsg>) {
    let period = Duration::from_secs_f64(1.0 / sim.config.agent.tick_rate);
    let mut input = Input::default();
    let mut guidance = None;
    let mut next = Instant::now();
    loop {
        let mut out = Vec::new();
        loop {
            match rx.try_recv() {
                Ok(m) => handle(&mut sim, m, &mut input, &mut out),
                Err(mpsc::TryRecvError::Empty) => break,
                Err(mpsc::TryRecvError::Disconnected) => return,
            }
        }
        out.push(manual_tick(&mut sim, &input, &mut guidance));
        for m in out {
            if tx.send(m).is_err() {
                return;
            }
        }
        next += period;
        let now = Instant::now();
        if next > now {
            std::thread::sleep(next - now);
        } else {
            next = now;
        }
    }
}

async fn connection(socket: WebSocket, state: LiveState) {
    use futures_util::{SinkExt, StreamExt};
    let (mut sink, mut stream) = socket.split();
    let sim = match new_session(&state.server, &state.config) {
        Ok(s) => s,
        Err(message) => {
            let text = serde_json::to_string(&ServerMsg::Error { message }).expect("serializes");
            let _ = sink.send(Message::Text(text.into())).await;
            return;
        }
    };
    let (in_tx, in_rx) = mpsc::channel();
    let (out_tx, mut out_rx) = tokio::sync::mpsc::unbounded_channel();
    let err_tx = out_tx.clone();
    std::thread::spawn(move || run_loop(sim, in_rx, out_tx));

    let writer = tokio::spawn(async move {
        while let Some(m) = out_rx.recv().await {
            let text = serde_json::to_string(&m).expect("server messages serialize");
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        match serde_json::from_str::<ClientMsg>(&text) {
            Ok(m) => {
                if in_tx.send(m).is_err() {
                    break;
                }
            }
            Err(e) => {
                let _ = err_tx.send(ServerMsg::Error { message: format!("bad message: {e}") });
            }
        }
    }
    drop(in_tx);
    writer.abort();
}

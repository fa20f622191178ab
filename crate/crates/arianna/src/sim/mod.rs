//! Closed-loop simulation: floor → camera → vision → navigator → path server
//! → walker, one tick at a time.
//!
//! Everything is driven by simulated time and one seeded ChaCha8 stream
//! (frame noise only), so a (config, deployment) pair always produces the
//! same trace.

pub mod demo;
pub mod trace;

use arianna_core::agent::{Agent, AgentMode, AgentParams};
use arianna_core::navigator::{NavConfig, NavEventKind, Navigator, StepOutput, Touch};
use arianna_core::pathgraph::{shortest_route, validate_deployment, Deployment, NodeId, TravelDirection};
use arianna_core::scene::{rasterize_floor, render_frame, CameraIntrinsics, FloorRaster, Frame, Pose, RasterParams};
use arianna_core::Point2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::client::PathService;
use crate::pathserver::AdminPatch;
use trace::{Detection, TraceHeader, TRACE_FORMAT};
pub use trace::{eval_trace, RoundTrip, RunMetrics, Trace, TraceRecord};

/// Where the walker is put down: `back` meters before the start node along
/// the first route edge, facing along it, shifted `lateral` meters to the
/// left and turned `heading_error` radians counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StartPlacement {
    pub back: f64,
    pub lateral: f64,
    pub heading_error: f64,
}

impl Default for StartPlacement {
    fn default() -> Self {
        Self { back: 0.5, lateral: 0.0, heading_error: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledPatch {
    /// Simulated seconds.
    pub at: f64,
    pub patch: AdminPatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub from: NodeId,
    pub to: NodeId,
    pub start: StartPlacement,
    pub agent: AgentParams,
    pub nav: NavConfig,
    pub camera: CameraIntrinsics,
    pub raster: RasterParams,
    /// When false the walker never feels the motor.
    pub haptics: bool,
    /// Per-channel Gaussian frame noise, 8-bit units.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Simulated seconds.
    pub timeout: f64,
    pub patches: Vec<ScheduledPatch>,
    /// Resolve scans against a local copy instead of the server.
    pub offline: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            from: NodeId(0),
            to: NodeId(0),
            start: StartPlacement::default(),
            agent: AgentParams::default(),
            nav: NavConfig::default(),
            camera: CameraIntrinsics::default(),
            raster: RasterParams::default(),
            haptics: true,
            noise_sigma: 0.0,
            seed: 0,
            timeout: 120.0,
            patches: Vec::new(),
            offline: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("deployment is invalid: {0} violation(s)")]
    InvalidDeployment(usize),
    #[error("no enabled route from {0} to {1}")]
    NoRoute(NodeId, NodeId),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("server: {0}")]
    Server(String),
}

/// Start pose for `cfg` on `d`.
pub fn start_pose(d: &Deployment, cfg: &SimConfig) -> Result<Pose, ConfigError> {
    let node = d.node(cfg.from).ok_or(ConfigError::UnknownNode(cfg.from))?;
    d.node(cfg.to).ok_or(ConfigError::UnknownNode(cfg.to))?;
    let route = shortest_route(d, cfg.from, cfg.to, true).map_err(|_| ConfigError::NoRoute(cfg.from, cfg.to))?;
    let dir = match route.steps.first() {
        Some(s) => {
            let e = d.edge(s.edge).expect("route edges exist");
            match s.direction {
                TravelDirection::Forward => e.point_at(0.0).1,
                TravelDirection::Backward => -e.point_at(e.length()).1,
            }
        }
        None => Point2::new(0.0, 1.0),
    };
    let p = node.position - dir * cfg.start.back + dir.perp() * cfg.start.lateral;
    Ok(Pose::new(p, dir.y.atan2(dir.x) + cfg.start.heading_error))
}

/// What one camera tick produced.
pub struct Sensed {
    pub out: StepOutput,
    pub round_trips: Vec<RoundTrip>,
}

pub struct Simulation<S: PathService> {
    pub config: SimConfig,
    pub deployment: Deployment,
    raster: FloorRaster,
    pub navigator: Navigator,
    service: Option<S>,
    pub agent: Agent,
    /// Body pose with the phone at this tick's sweep angle.
    pub pose: Pose,
    tick: u64,
    noise: Option<(ChaCha8Rng, Normal<f64>)>,
    pending: Vec<RoundTrip>,
    patches_done: usize,
    pub last_frame: Option<Frame>,
    arrived: bool,
}

impl<S: PathService> Simulation<S> {
    /// Builds the world and opens a navigation session. `service` may be
    /// `None` only for offline runs.
    pub fn new(d: Deployment, config: SimConfig, mut service: Option<S>) -> Result<Self, ConfigError> {
        if !config.agent.is_valid() {
            return Err(ConfigError::Parameter("agent parameters out of range".into()));
        }
        if !config.camera.is_valid() || !(config.noise_sigma >= 0.0) || !(config.timeout > 0.0) {
            return Err(ConfigError::Parameter("camera, noise or timeout out of range".into()));
        }
        let report = validate_deployment(&d);
        if !report.is_valid() {
            return Err(ConfigError::InvalidDeployment(report.violations.len()));
        }
        let pose = start_pose(&d, &config)?;
        let mut pending = Vec::new();
        let navigator = if config.offline {
            Navigator::offline(config.nav, d.clone(), config.to)
        } else {
            let svc = service.as_mut().ok_or_else(|| ConfigError::Server("online run without a server".into()))?;
            let created = svc.create_session(config.to);
            pending.push(RoundTrip::CreateSession {
                destination: config.to,
                session: created.as_ref().ok().map(|s| s.to_string()),
                error: created.as_ref().err().map(|e| e.to_string()),
            });
            let session = created.map_err(|e| ConfigError::Server(e.to_string()))?;
            Navigator::with_session(config.nav, session, config.to)
        };
        let noise = (config.noise_sigma > 0.0).then(|| {
            (ChaCha8Rng::seed_from_u64(config.seed), Normal::new(0.0, config.noise_sigma).expect("finite sigma"))
        });
        let raster = rasterize_floor(&d, &config.raster);
        let agent = Agent::new(config.agent, config.camera, AgentMode::Walking);
        let pose = agent.pose_now(&pose);
        Ok(Self {
            config,
            deployment: d,
            raster,
            navigator,
            service,
            agent,
            pose,
            tick: 0,
            noise,
            pending,
            patches_done: 0,
            last_frame: None,
            arrived: false,
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 / self.config.agent.tick_rate
    }

    pub fn arrived(&self) -> bool {
        self.arrived
    }

    pub fn service(&mut self) -> Option<&mut S> {
        self.service.as_mut()
    }

    pub fn header(&self) -> TraceHeader {
        TraceHeader {
            format: TRACE_FORMAT.into(),
            from: self.config.from,
            to: self.config.to,
            seed: self.config.seed,
            tick_rate: self.config.agent.tick_rate,
            haptics: self.config.haptics,
            noise_sigma: self.config.noise_sigma,
            deployment: self.deployment.clone(),
        }
    }

    /// Sends an admin patch now; recorded with the next tick.
    pub fn admin_patch(&mut self, patch: AdminPatch) {
        let Some(svc) = self.service.as_mut() else { return };
        let r = svc.apply_patch(&patch);
        self.pending.push(RoundTrip::Patch {
            patch,
            version: r.as_ref().ok().copied(),
            error: r.as_ref().err().map(|e| e.to_string()),
        });
    }

    pub fn render(&mut self, pose: &Pose) -> Frame {
        let mut f = render_frame(&self.raster, pose, &self.config.camera);
        if let Some((rng, normal)) = self.noise.as_mut() {
            for v in f.data.iter_mut() {
                *v = (*v as f64 + normal.sample(rng)).round().clamp(0.0, 255.0) as u8;
            }
        }
        f
    }

    /// Camera tick at `pose`: scheduled patches, vision, navigator and any
    /// server exchange it triggers.
    pub fn sense(&mut self, pose: &Pose, touch: Option<Touch>) -> Sensed {
        let t = self.time();
        while let Some(p) = self.config.patches.get(self.patches_done).filter(|p| p.at <= t + 1e-9) {
            let patch = p.patch.clone();
            self.patches_done += 1;
            self.admin_patch(patch);
        }
        let frame = self.render(pose);
        let mut out = self.navigator.step(&frame, touch, t);
        self.last_frame = Some(frame);
        let mut round_trips = std::mem::take(&mut self.pending);
        if let Some(req) = out.request {
            let response = match self.service.as_mut() {
                Some(svc) => svc.resolve(&req),
                None => Err(arianna_core::navigator::ResolveError::Unavailable),
            };
            out.events.extend(self.navigator.receive(response, t));
            round_trips.push(RoundTrip::Resolve { request: req, response });
        }
        if out.events.iter().any(|e| matches!(e.kind, NavEventKind::Arrived)) {
            self.arrived = true;
        }
        Sensed { out, round_trips }
    }

    /// One tick with the walker moved from outside: the frame is taken at
    /// `pose`, which becomes the current pose.
    pub fn step_with(&mut self, pose: Pose, touch: Option<Touch>) -> Sensed {
        let sensed = self.sense(&pose, touch);
        self.pose = pose;
        self.tick += 1;
        sensed
    }

    /// New destination mid-run: a fresh session (or just a new target when
    /// offline).
    pub fn set_destination(&mut self, to: NodeId) -> Result<(), ConfigError> {
        self.deployment.node(to).ok_or(ConfigError::UnknownNode(to))?;
        let session = match self.service.as_mut() {
            Some(svc) if !self.config.offline => {
                let created = svc.create_session(to);
                self.pending.push(RoundTrip::CreateSession {
                    destination: to,
                    session: created.as_ref().ok().map(|s| s.to_string()),
                    error: created.as_ref().err().map(|e| e.to_string()),
                });
                Some(created.map_err(|e| ConfigError::Server(e.to_string()))?)
            }
            _ => None,
        };
        self.config.to = to;
        self.navigator.set_destination(to, session);
        self.arrived = false;
        Ok(())
    }

    /// One tick of the scripted walker.
    pub fn step(&mut self) -> TraceRecord {
        let pose = self.pose;
        let touch = self.agent.touch();
        let sweep_angle = self.agent.sweep_angle();
        let agent_mode = self.agent.mode();
        let Sensed { out, round_trips } = self.sense(&pose, Some(touch));
        let felt = out.vibrating && self.config.haptics;
        let step = self.agent.step(&pose, felt);
        let record = TraceRecord {
            tick: self.tick,
            t: self.time(),
            pose,
            sweep_angle,
            touch: Some(touch),
            vibration: felt,
            haptic_active: out.haptic.active,
            detection: out.lane.as_ref().map(|l| Detection { pair: l.ordered_pair, confidence: l.confidence }),
            markers: out.markers.sightings.iter().map(|s| s.payload.id).collect(),
            assigned: self.navigator.state.assigned,
            nav_mode: self.navigator.state.mode,
            agent_mode,
            onset: step.onset,
            correction: step.correction,
            events: out.events,
            round_trips,
        };
        self.pose = step.pose;
        self.tick += 1;
        record
    }

    /// Runs the walker until arrival or timeout.
    pub fn run(&mut self) -> Trace {
        let mut records = Vec::new();
        while !self.arrived && self.time() < self.config.timeout - 1e-9 {
            records.push(self.step());
        }
        Trace { header: self.header(), records }
    }
}

/// Runs `cfg` on `d` against `service` (or the local copy when offline).
pub fn run_sim<S: PathService>(d: Deployment, cfg: SimConfig, service: Option<S>) -> Result<(Trace, RunMetrics), ConfigError> {
    let mut sim = Simulation::new(d, cfg, service)?;
    // Metrics describe the trace as written: poses and coordinates go to disk
    // at millimeter precision.
    let trace = Trace::parse(&sim.run().to_jsonl()).expect("traces re-read");
    let metrics = eval_trace(&trace);
    Ok((trace, metrics))
}

/// Runs against a fresh in-memory path server.
pub fn run_in_process(d: Deployment, cfg: SimConfig) -> Result<(Trace, RunMetrics), ConfigError> {
    let server = crate::pathserver::PathServer::in_memory(d.clone()).map_err(|e| ConfigError::Server(e.to_string()))?;
    run_sim(d, cfg, Some(std::sync::Arc::new(server)))
}


//! The path server.
//!
//! Holds the deployment repository as an immutable snapshot behind an
//! `RwLock<Arc<_>>`: every request clones the `Arc` once and answers from it,
//! so a patch landing mid-request never mixes two versions. Patches go
//! through a single writer lock, are validated, persisted (temp file + rename)
//! and only then swapped in.

mod http;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use arianna_core::navigator::{offline_next_edge, EdgeHint, Guidance, ResolveError, SessionId};
use arianna_core::pathgraph::{validate_deployment, Deployment, EdgeId, NodeId, QrId, ValidationReport};
use serde::{Deserialize, Serialize};

use crate::format::{deployment_json, parse_deployment, write_atomic, FormatError};

pub use http::{router, PatchApplied, SessionCreated, SessionRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PatchOp {
    SetEdgeEnabled { edge: EdgeId, enabled: bool },
    ReplaceDeployment { deployment: Deployment },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdminPatch {
    pub ops: Vec<PatchOp>,
}

impl AdminPatch {
    pub fn disable_edge(edge: EdgeId) -> Self {
        Self { ops: vec![PatchOp::SetEdgeEnabled { edge, enabled: false }] }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServerError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("unknown session")]
    Unauthorized,
    #[error("no enabled route")]
    NoRoute,
    #[error("patch rejected: {} violation(s)", .0.violations.len())]
    Rejected(ValidationReport),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("storage: {0}")]
    Storage(String),
}

impl ServerError {
    pub fn status(&self) -> u16 {
        match self {
            ServerError::NotFound(_) => 404,
            ServerError::Unauthorized => 401,
            ServerError::NoRoute => 409,
            ServerError::Rejected(_) => 422,
            ServerError::BadRequest(_) => 400,
            ServerError::Storage(_) => 500,
        }
    }

    /// The navigator's view of a failed resolve.
    pub fn to_resolve_error(&self) -> ResolveError {
        match self {
            ServerError::NotFound(_) => ResolveError::NotFound,
            ServerError::Unauthorized => ResolveError::Unauthorized,
            ServerError::NoRoute => ResolveError::NoRoute,
            _ => ResolveError::Unavailable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: SessionId,
    pub destination: NodeId,
    /// Seconds since server start.
    pub created_at: f64,
    pub last_node: Option<NodeId>,
    pub deployment_version_at_creation: u64,
}

/// One deployment version and its exact repository text.
#[derive(Debug)]
pub struct Snapshot {
    pub deployment: Deployment,
    pub json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub op: String,
    pub status: u16,
    /// Deployment version the request was answered from.
    pub version: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub version: u64,
    /// Seconds.
    pub uptime: f64,
}

pub struct PathServer {
    repo: Option<PathBuf>,
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    sessions: Mutex<HashMap<SessionId, Session>>,
    session_counter: AtomicU64,
    session_salt: u64,
    started: Instant,
    log: Mutex<Vec<LogEntry>>,
}

// Bijective 64-bit mix, so distinct counters give distinct ids.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl PathServer {
    /// Serves `d` without persistence.
    pub fn in_memory(d: Deployment) -> Result<Self, ServerError> {
        let json = deployment_json(&d);
        Self::from_parts(None, d, json)
    }

    /// Opens a repository file. The snapshot text stays byte-identical to the
    /// file until the first patch.
    pub fn open(repo: &Path) -> Result<Self, ServerError> {
        let json = std::fs::read_to_string(repo).map_err(|e| ServerError::Storage(format!("{}: {e}", repo.display())))?;
        let d = parse_deployment(&json, &repo.display().to_string()).map_err(|e| ServerError::Storage(e.to_string()))?;
        Self::from_parts(Some(repo.to_path_buf()), d, json)
    }

    /// Writes `d` as a fresh repository at `repo` and opens it.
    pub fn create(repo: &Path, d: Deployment) -> Result<Self, ServerError> {
        let json = deployment_json(&d);
        write_atomic(repo, json.as_bytes()).map_err(storage)?;
        Self::from_parts(Some(repo.to_path_buf()), d, json)
    }

    fn from_parts(repo: Option<PathBuf>, d: Deployment, json: String) -> Result<Self, ServerError> {
        let report = validate_deployment(&d);
        if !report.is_valid() {
            return Err(ServerError::Rejected(report));
        }
        Ok(Self {
            repo,
            current: RwLock::new(Arc::new(Snapshot { deployment: d, json })),
            writer: Mutex::new(()),
            sessions: Mutex::new(HashMap::new()),
            session_counter: AtomicU64::new(1),
            session_salt: 0,
            started: Instant::now(),
            log: Mutex::new(Vec::new()),
        })
    }

    /// Salt for session ids; ids stay unique for any salt.
    pub fn with_session_salt(mut self, salt: u64) -> Self {
        self.session_salt = salt;
        self
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn version(&self) -> u64 {
        self.snapshot().deployment.version
    }

    fn record(&self, op: String, status: u16, version: u64) {
        let mut log = self.log.lock().expect("log lock");
        let seq = log.len() as u64;
        log.push(LogEntry { seq, op, status, version });
    }

    pub fn request_log(&self) -> Vec<LogEntry> {
        self.log.lock().expect("log lock").clone()
    }

    pub fn create_session(&self, destination: NodeId) -> Result<SessionId, ServerError> {
        let snap = self.snapshot();
        let version = snap.deployment.version;
        let result = match snap.deployment.node(destination) {
            None => Err(ServerError::NotFound(format!("node {destination}"))),
            Some(_) => {
                let n = self.session_counter.fetch_add(1, Ordering::Relaxed);
                let id = SessionId(mix64(n ^ self.session_salt));
                let s = Session {
                    id,
                    destination,
                    created_at: self.started.elapsed().as_secs_f64(),
                    last_node: None,
                    deployment_version_at_creation: version,
                };
                self.sessions.lock().expect("session lock").insert(id, s);
                Ok(id)
            }
        };
        self.record(format!("create_session {destination}"), result.as_ref().map_or_else(|e| e.status(), |_| 200), version);
        result
    }

    pub fn session(&self, id: SessionId) -> Option<Session> {
        self.sessions.lock().expect("session lock").get(&id).cloned()
    }

    /// Next-edge guidance for a scan of `qr` within `session`. The edge hint
    /// is accepted and logged but does not influence the answer.
    pub fn resolve_qr(&self, qr: QrId, session: SessionId, edge_hint: Option<EdgeHint>) -> Result<Guidance, ServerError> {
        let snap = self.snapshot();
        let result = self.resolve_in(&snap.deployment, qr, session);
        let hint = edge_hint.map(|h| format!(" hint={}:{}", h.edge, h.decimeters)).unwrap_or_default();
        let status = result.as_ref().map_or_else(|e| e.status(), |_| 200);
        self.record(format!("resolve qr={qr} session={session}{hint}"), status, snap.deployment.version);
        result
    }

    fn resolve_in(&self, d: &Deployment, qr: QrId, session: SessionId) -> Result<Guidance, ServerError> {
        let destination = self.session(session).ok_or(ServerError::Unauthorized)?.destination;
        let node = d.anchor(qr).ok_or_else(|| ServerError::NotFound(format!("qr {qr}")))?.node;
        if d.node(destination).is_none() {
            return Err(ServerError::NotFound(format!("destination node {destination}")));
        }
        let g = offline_next_edge(d, node, destination).map_err(|_| ServerError::NoRoute)?;
        if let Some(s) = self.sessions.lock().expect("session lock").get_mut(&session) {
            s.last_node = Some(node);
        }
        Ok(g)
    }

    /// Applies `patch` atomically and returns the new version.
    pub fn apply_patch(&self, patch: &AdminPatch) -> Result<u64, ServerError> {
        let _w = self.writer.lock().expect("writer lock");
        let base = self.snapshot();
        let result = self.patched(&base.deployment, patch).and_then(|next| {
            let json = deployment_json(&next);
            if let Some(repo) = &self.repo {
                write_atomic(repo, json.as_bytes()).map_err(storage)?;
            }
            let version = next.version;
            *self.current.write().expect("snapshot lock") = Arc::new(Snapshot { deployment: next, json });
            Ok(version)
        });
        let status = result.as_ref().map_or_else(|e| e.status(), |_| 200);
        let version = *result.as_ref().unwrap_or(&base.deployment.version);
        self.record(format!("patch ops={}", patch.ops.len()), status, version);
        result
    }

    fn patched(&self, base: &Deployment, patch: &AdminPatch) -> Result<Deployment, ServerError> {
        let mut d = base.clone();
        for op in &patch.ops {
            match op {
                PatchOp::SetEdgeEnabled { edge, enabled } => {
                    d.edge_mut(*edge).ok_or_else(|| ServerError::NotFound(format!("edge {edge}")))?.enabled = *enabled;
                }
                PatchOp::ReplaceDeployment { deployment } => d = deployment.clone(),
            }
        }
        d.version = base.version + 1;
        let report = validate_deployment(&d);
        if !report.is_valid() {
            return Err(ServerError::Rejected(report));
        }
        Ok(d)
    }

    /// Current repository text.
    pub fn deployment_json(&self) -> String {
        let snap = self.snapshot();
        self.record("deployment".into(), 200, snap.deployment.version);
        snap.json.clone()
    }

    pub fn health(&self) -> Health {
        Health { version: self.version(), uptime: self.started.elapsed().as_secs_f64() }
    }
}

fn storage(e: FormatError) -> ServerError {
    ServerError::Storage(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::demo::demo_deployment;

    #[test]
    fn session_ids_are_distinct() {
        let s = PathServer::in_memory(demo_deployment()).unwrap();
        let a = s.create_session(NodeId(3)).unwrap();
        let b = s.create_session(NodeId(3)).unwrap();
        assert_ne!(a, b);
        assert_eq!(s.session(a).unwrap().destination, NodeId(3));
        assert_eq!(s.create_session(NodeId(9999)), Err(ServerError::NotFound("node 9999".into())));
    }

    #[test]
    fn unknown_session_and_qr() {
        let s = PathServer::in_memory(demo_deployment()).unwrap();
        assert_eq!(s.resolve_qr(QrId(11), SessionId(7), None), Err(ServerError::Unauthorized));
        let id = s.create_session(NodeId(3)).unwrap();
        assert!(matches!(s.resolve_qr(QrId(999), id, None), Err(ServerError::NotFound(_))));
    }

    #[test]
    fn patches_bump_versions_in_order() {
        let s = PathServer::in_memory(demo_deployment()).unwrap();
        let v = s.version();
        assert_eq!(s.apply_patch(&AdminPatch::disable_edge(EdgeId(3))).unwrap(), v + 1);
        assert_eq!(s.apply_patch(&AdminPatch::disable_edge(EdgeId(1))).unwrap(), v + 2);
        let d = &s.snapshot().deployment;
        assert!(!d.edge(EdgeId(3)).unwrap().enabled && !d.edge(EdgeId(1)).unwrap().enabled);
        assert!(matches!(s.apply_patch(&AdminPatch::disable_edge(EdgeId(77))), Err(ServerError::NotFound(_))));
        assert_eq!(s.version(), v + 2);
    }
}

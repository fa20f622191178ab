//! How a simulated phone reaches the path server: directly in-process, or
//! over HTTP.

use std::sync::Arc;
use std::time::Duration;

use arianna_core::navigator::{Guidance, ResolveError, ResolveRequest, SessionId};
use arianna_core::pathgraph::{Deployment, NodeId};

use crate::pathserver::{AdminPatch, PatchApplied, PathServer, ServerError, SessionCreated, SessionRequest};

pub trait PathService {
    fn create_session(&mut self, destination: NodeId) -> Result<SessionId, ServerError>;
    fn resolve(&mut self, req: &ResolveRequest) -> Result<Guidance, ResolveError>;
    fn apply_patch(&mut self, patch: &AdminPatch) -> Result<u64, ServerError>;
    fn deployment(&mut self) -> Result<Deployment, ServerError>;
}

impl PathService for Arc<PathServer> {
    fn create_session(&mut self, destination: NodeId) -> Result<SessionId, ServerError> {
        PathServer::create_session(self, destination)
    }

    fn resolve(&mut self, req: &ResolveRequest) -> Result<Guidance, ResolveError> {
        let session = req.session.ok_or(ResolveError::Unauthorized)?;
        self.resolve_qr(req.qr_id, session, req.edge_hint).map_err(|e| e.to_resolve_error())
    }

    fn apply_patch(&mut self, patch: &AdminPatch) -> Result<u64, ServerError> {
        PathServer::apply_patch(self, patch)
    }

    fn deployment(&mut self) -> Result<Deployment, ServerError> {
        Ok(self.snapshot().deployment.clone())
    }
}

/// Blocking HTTP client. Requests slower than the timeout count as the
/// server being unavailable.
pub struct HttpClient {
    base: String,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(base: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { base: base.trim_end_matches('/').to_string(), agent }
    }

    fn decode<T: serde::de::DeserializeOwned>(mut resp: ureq::http::Response<ureq::Body>) -> Result<T, ServerError> {
        let status = resp.status().as_u16();
        let body: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| ServerError::Storage(format!("bad response: {e}")))?;
        if status == 200 {
            return serde_json::from_value(body).map_err(|e| ServerError::Storage(format!("bad response: {e}")));
        }
        let msg = body.get("error").and_then(|m| m.as_str()).unwrap_or_default().to_string();
        Err(match status {
            404 => ServerError::NotFound(msg),
            401 => ServerError::Unauthorized,
            409 => ServerError::NoRoute,
            422 => ServerError::Rejected(
                body.get("report").and_then(|r| serde_json::from_value(r.clone()).ok()).unwrap_or_default(),
            ),
            400 => ServerError::BadRequest(msg),
            _ => ServerError::Storage(format!("HTTP {status}: {msg}")),
        })
    }

    fn transport(e: ureq::Error) -> ServerError {
        ServerError::Storage(format!("transport: {e}"))
    }
}

impl PathService for HttpClient {
    fn create_session(&mut self, destination: NodeId) -> Result<SessionId, ServerError> {
        let resp = self
            .agent
            .post(format!("{}/session", self.base))
            .send_json(SessionRequest { destination })
            .map_err(Self::transport)?;
        Self::decode::<SessionCreated>(resp).map(|c| c.session_id)
    }

    fn resolve(&mut self, req: &ResolveRequest) -> Result<Guidance, ResolveError> {
        let session = req.session.ok_or(ResolveError::Unauthorized)?;
        let mut r = self.agent.get(format!("{}/qr/{}", self.base, req.qr_id)).query("session", session.to_string());
        if let Some(h) = req.edge_hint {
            r = r.query("edge_hint", format!("{}:{}", h.edge, h.decimeters));
        }
        let resp = r.call().map_err(|_| ResolveError::Unavailable)?;
        Self::decode::<Guidance>(resp).map_err(|e| e.to_resolve_error())
    }

    fn apply_patch(&mut self, patch: &AdminPatch) -> Result<u64, ServerError> {
        let resp = self.agent.put(format!("{}/admin/patch", self.base)).send_json(patch).map_err(Self::transport)?;
        Self::decode::<PatchApplied>(resp).map(|p| p.version)
    }

    fn deployment(&mut self) -> Result<Deployment, ServerError> {
        let resp = self.agent.get(format!("{}/deployment", self.base)).call().map_err(Self::transport)?;
        Self::decode(resp)
    }
}

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::palette::ColorPair;
use crate::pathgraph::{observed_pair, shortest_route, Deployment, EdgeId, NoRoute, NodeId, QrId, TravelDirection};

/// Opaque navigation session token. Travels as 16 hex digits so it survives
/// JSON consumers limited to 53-bit integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SessionId(pub u64);

impl core::fmt::Display for SessionId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl core::str::FromStr for SessionId {
    type Err = core::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(SessionId)
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{self}"))
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NextEdge {
    pub edge: EdgeId,
    pub direction: TravelDirection,
    pub expected_pair: ColorPair,
    /// Length of the whole remaining route, meters.
    pub remaining_distance: f64,
}

/// Answer to a marker scan: where the walker is and which lane to take.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guidance {
    pub node: NodeId,
    pub destination_reached: bool,
    pub next: Option<NextEdge>,
    pub deployment_version: u64,
}

/// Optional hint from the most recent edge marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeHint {
    pub edge: EdgeId,
    /// Decimeters from the edge's from-node.
    pub decimeters: u8,
}

/// Outbound request raised by a marker sighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveRequest {
    pub qr_id: QrId,
    pub session: Option<SessionId>,
    pub edge_hint: Option<EdgeHint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolveError {
    NotFound,
    Unauthorized,
    NoRoute,
    /// Server unreachable or too slow.
    Unavailable,
}

impl core::fmt::Display for ResolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            ResolveError::NotFound => "not found",
            ResolveError::Unauthorized => "unknown session",
            ResolveError::NoRoute => "no enabled route",
            ResolveError::Unavailable => "server unavailable",
        })
    }
}

/// Next-edge guidance from `at` toward `dest` over enabled edges. The path
/// server answers scans with exactly this.
pub fn offline_next_edge(d: &Deployment, at: NodeId, dest: NodeId) -> Result<Guidance, NoRoute> {
    let route = shortest_route(d, at, dest, true)?;
    let next = route.steps.first().map(|s| {
        let e = d.edge(s.edge).expect("route edges exist");
        NextEdge {
            edge: s.edge,
            direction: s.direction,
            expected_pair: observed_pair(e, s.direction),
            remaining_distance: route.length_m(),
        }
    });
    Ok(Guidance { node: at, destination_reached: next.is_none(), next, deployment_version: d.version })
}

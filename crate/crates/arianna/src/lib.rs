//! Path server, closed-loop simulator, file formats and the UI channel for
//! the strip-pair navigation system. The pure logic lives in `arianna-core`.

pub mod client;
pub mod format;
pub mod live;
pub mod pathserver;
pub mod sim;

pub use arianna_core as core;

//! Core of the strip-pair indoor navigation simulator.
//!
//! Everything in this crate is a pure function of its inputs and runs without
//! `std`: the path graph model and router, the synthetic floor and camera, the
//! lane/marker vision pipeline, the phone-side navigator state machine, and the
//! cane-sweep walker policy. IO, persistence, networking and the CLI live in the
//! `arianna` companion crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agent;
pub mod geometry;
pub mod navigator;
pub mod palette;
pub mod pathgraph;
pub mod scene;
pub mod vision;

pub use geometry::Point2;
pub use palette::{ColorId, Rgb};

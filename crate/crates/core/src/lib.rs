//! Simulation core for hierarchical multi-layered clustering in wireless
//! sensor networks.
//!
//! The crate is `no_std` (it needs `alloc`). It covers deployment and
//! geometry, the first-order radio model, the EEMA hierarchy builder, four
//! baseline clustering protocols (LEACH, HEED, DWEHC, EEDC), a round-driven
//! simulation engine with lifetime and delay metrics, and closed-form
//! calculators for the expected cluster sizes, energy rates, message counts
//! and delays. File formats, the CLI and parallel experiment drivers live in
//! the `eema-sim` crate.
//!
//! Every run draws all randomness from one [`SimRng`] seeded per run:
//! deployment first (x then y per node, in id order), then per-round protocol
//! draws in node id order.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod baseline;
pub mod control;
pub mod eema;
pub mod error;
pub mod geometry;
pub mod model;
pub mod radio;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{distance, Position};
pub use model::{deploy, Hop, NodeId, NodeState, Role, ScenarioConfig, Topology};
pub use radio::RadioParams;

/// The generator behind every seeded run.
pub type SimRng = rand_chacha::ChaCha8Rng;

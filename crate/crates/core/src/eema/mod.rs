//! Energy-efficient multi-layered hierarchy: cluster head election, recursive
//! super cluster head election and parent assignment.
//!
//! Every round the network is rebuilt bottom-up. Layer 1 holds regular nodes,
//! layer 2 the cluster heads (CHs) and layers 3 and above the super cluster
//! heads (SCHs). Each head aggregates everything it receives, plus its own
//! reading, into a single frame for its parent; the base station is the root.

mod election;
mod hierarchy;

pub use election::{
    ch_score, elect_cluster_heads, elect_super_cluster_heads, layer_range, sch_weight, ChScore,
    SchWeight, RS_EPSILON,
};
pub use hierarchy::{assign_parents, build_hierarchy, AggregationTree};

use serde::{Deserialize, Serialize};

/// How many layers the hierarchy may grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerPolicy {
    /// Heads within the current layer's range of the base station attach to it
    /// directly. Layering stops once every remaining head is within `r_t` of
    /// the base station or the range schedule saturates.
    Adaptive,
    /// Exactly this many head layers (2 = cluster heads only). Only the top
    /// layer talks to the base station.
    Fixed(u8),
}

/// What a top head does when the base station is beyond `r_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrandedPolicy {
    /// Relay through a head that already reaches the base station and is
    /// closer to it, picking the cheapest route in radio energy.
    #[default]
    Relay,
    /// Transmit to the base station at the actual distance.
    Direct,
}

/// Tunables of the EEMA election.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EemaParams {
    /// Timer constant of the super cluster head race.
    pub alpha: f64,
    /// Use `k / Σd` instead of the mean neighbor distance as centrality factor.
    pub invert_centrality: bool,
    pub layers: LayerPolicy,
    pub stranded: StrandedPolicy,
}

impl Default for EemaParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            invert_centrality: false,
            layers: LayerPolicy::Adaptive,
            stranded: StrandedPolicy::Relay,
        }
    }
}

/// Layer guard against pathological geometries; far above anything a square
/// field at sane ranges produces.
pub(crate) const MAX_LAYER: u8 = 64;

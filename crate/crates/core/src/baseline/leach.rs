use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ClusteringResult;
use crate::control::{broadcast, MessageKind};
use crate::model::Topology;

/// Rotation memory carried across rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeachState {
    /// Rounds in one rotation epoch, `round(1/p)`.
    pub period: u32,
    /// Last round each node served as cluster head.
    pub last_head_round: Vec<Option<u32>>,
}

impl LeachState {
    pub fn new(n_nodes: usize, p: f64) -> Self {
        let period = libm::round(1.0 / p).max(1.0) as u32;
        Self {
            period,
            last_head_round: vec![None; n_nodes],
        }
    }

    /// A node that headed a cluster sits out the next `period - 1` rounds.
    pub fn eligible(&self, i: usize, round: u32) -> bool {
        match self.last_head_round[i] {
            None => true,
            Some(r) => round.saturating_sub(r) >= self.period,
        }
    }
}

/// `T(n) = p / (1 - p (r mod 1/p))`, clamped to 1.
pub fn leach_threshold(p: f64, round: u32, period: u32) -> f64 {
    let phase = f64::from(round % period.max(1));
    let denom = 1.0 - p * phase;
    if denom <= 0.0 {
        1.0
    } else {
        (p / denom).min(1.0)
    }
}

/// One LEACH election with multi-hop delivery between heads.
///
/// Every alive node draws one uniform number in id order (eligible or not);
/// eligible nodes whose draw falls below the threshold become heads. Members
/// join the nearest head. If nobody is elected every node reports directly,
/// which is modelled as each node heading its own cluster.
pub fn leach_elect<R: Rng + ?Sized>(
    t: &Topology,
    p: f64,
    round: u32,
    state: &mut LeachState,
    rng: &mut R,
    r_t: f64,
) -> ClusteringResult {
    let threshold = leach_threshold(p, round, state.period);
    let mut result = ClusteringResult::new(t);
    for i in t.alive_ids() {
        let draw: f64 = rng.gen();
        if state.eligible(i.index(), round) && draw < threshold {
            result.ch_set.push(i);
            state.last_head_round[i.index()] = Some(round);
        }
    }
    if result.ch_set.is_empty() {
        result.ch_set = t.alive_ids().collect();
    } else {
        for &h in &result.ch_set {
            result.control.push(broadcast(h, MessageKind::ChAdv, r_t));
        }
    }
    result.join_nearest(t, None);
    result.route_heads(t, r_t);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::test_support::assert_well_formed;
    use crate::model::deploy;
    use crate::{ScenarioConfig, SimRng};
    use rand::SeedableRng;

    #[test]
    fn threshold_formula() {
        assert!((leach_threshold(0.1, 0, 10) - 0.1).abs() < 1e-15);
        assert!((leach_threshold(0.1, 5, 10) - 0.2).abs() < 1e-15);
        assert_eq!(leach_threshold(0.1, 9, 10), 1.0);
        assert_eq!(leach_threshold(1.0, 0, 1), 1.0);
    }

    #[test]
    fn probability_one_elects_everyone() {
        let t = deploy(&ScenarioConfig::scenario1(), 1).unwrap();
        let mut state = LeachState::new(t.len(), 0.999);
        let mut rng = SimRng::seed_from_u64(3);
        let r = leach_elect(&t, 0.999, 0, &mut state, &mut rng, 300.0);
        assert_eq!(r.ch_set.len(), t.len());
        assert_well_formed(&t, &r);
    }

    #[test]
    fn expected_head_count() {
        // Fresh state per draw so every node is eligible at round 0.
        let t = deploy(&ScenarioConfig::scenario1(), 2).unwrap();
        let p = 0.1;
        let mut total = 0usize;
        let draws = 60;
        for seed in 0..draws {
            let mut state = LeachState::new(t.len(), p);
            let mut rng = SimRng::seed_from_u64(seed);
            total += leach_elect(&t, p, 0, &mut state, &mut rng, 300.0).ch_set.len();
        }
        let mean = total as f64 / draws as f64;
        let expected = p * t.len() as f64;
        assert!((mean - expected).abs() <= 0.2 * expected, "mean {mean}");
    }

    #[test]
    fn heads_rest_for_a_period() {
        let t = deploy(&ScenarioConfig::scenario1(), 3).unwrap();
        let p = 0.1;
        let mut state = LeachState::new(t.len(), p);
        let mut rng = SimRng::seed_from_u64(11);
        let mut last: Vec<Option<u32>> = vec![None; t.len()];
        for round in 0..40 {
            let r = leach_elect(&t, p, round, &mut state, &mut rng, 300.0);
            assert_well_formed(&t, &r);
            if r.ch_set.len() == t.len() {
                continue; // nobody elected: everyone reports directly
            }
            for &h in &r.ch_set {
                if let Some(prev) = last[h.index()] {
                    assert!(round - prev >= 10, "node {h} headed at {prev} and {round}");
                }
                last[h.index()] = Some(round);
            }
        }
    }
}

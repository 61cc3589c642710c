//! First-order radio energy model and energy accounting on nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NodeState;

/// Radio constants, all in SI units (joules, meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioParams {
    /// Electronics energy per bit (J/bit).
    pub e_el: f64,
    /// Free-space amplifier energy (J/bit/m²).
    pub eps_fs: f64,
    /// Multipath amplifier energy (J/bit/m⁴).
    pub eps_mp: f64,
    /// Crossover distance between the two amplifier regimes (m).
    pub d0: f64,
    /// Aggregation energy (J/bit/signal).
    pub e_da: f64,
}

impl RadioParams {
    /// 50 nJ/bit electronics, 10 pJ/bit/m² and 0.0013 pJ/bit/m⁴ amplifiers,
    /// 5 nJ/bit/signal aggregation and an 87 m crossover.
    pub const fn table_one() -> Self {
        Self {
            e_el: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            d0: 87.0,
            e_da: 5e-9,
        }
    }

    /// Same constants with `d0` set to the derived crossover.
    pub fn with_derived_crossover(mut self) -> Self {
        self.d0 = crossover_distance(&self);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.e_el) {
            return Err(Error::config("radio.e_el", "must be positive"));
        }
        if !positive(self.eps_fs) {
            return Err(Error::config("radio.eps_fs", "must be positive"));
        }
        if !positive(self.eps_mp) {
            return Err(Error::config("radio.eps_mp", "must be positive"));
        }
        if !positive(self.d0) {
            return Err(Error::config("radio.d0", "must be positive"));
        }
        if !positive(self.e_da) {
            return Err(Error::config("radio.e_da", "must be positive"));
        }
        Ok(())
    }

    /// Relative deviation of the configured `d0` from `sqrt(eps_fs / eps_mp)`.
    pub fn crossover_deviation(&self) -> f64 {
        let derived = crossover_distance(self);
        libm::fabs(self.d0 - derived) / derived
    }

    /// True when the configured crossover is more than 5% off the derived one.
    pub fn crossover_needs_warning(&self) -> bool {
        self.crossover_deviation() > 0.05
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        Self::table_one()
    }
}

/// Distance at which the free-space and multipath amplifier costs agree.
pub fn crossover_distance(p: &RadioParams) -> f64 {
    libm::sqrt(p.eps_fs / p.eps_mp)
}

/// Energy to transmit `bits` over `d` meters.
pub fn tx_energy(p: &RadioParams, bits: u64, d: f64) -> Result<f64> {
    if bits == 0 {
        return Err(Error::Domain("transmitted frame must carry at least one bit"));
    }
    if !(d >= 0.0) {
        return Err(Error::Domain("distance must be non-negative"));
    }
    Ok(tx_energy_unchecked(p, bits, d))
}

#[inline]
pub(crate) fn tx_energy_unchecked(p: &RadioParams, bits: u64, d: f64) -> f64 {
    let l = bits as f64;
    if d <= p.d0 {
        l * (p.e_el + p.eps_fs * d * d)
    } else {
        let d2 = d * d;
        l * (p.e_el + p.eps_mp * d2 * d2)
    }
}

/// Energy to receive `bits`.
pub fn rx_energy(p: &RadioParams, bits: u64) -> Result<f64> {
    if bits == 0 {
        return Err(Error::Domain("received frame must carry at least one bit"));
    }
    Ok(rx_energy_unchecked(p, bits))
}

#[inline]
pub(crate) fn rx_energy_unchecked(p: &RadioParams, bits: u64) -> f64 {
    bits as f64 * p.e_el
}

/// Energy to fuse `n_signals` frames of `bits` each into one.
pub fn aggregate_energy(p: &RadioParams, bits: u64, n_signals: u64) -> f64 {
    bits as f64 * p.e_da * n_signals as f64
}

/// Result of debiting a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Charge {
    /// Energy actually removed from the battery.
    pub deducted: f64,
    /// Requested energy the battery could not cover (clamped away).
    pub shortfall: f64,
    /// The node crossed from alive to dead on this charge.
    pub died: bool,
}

impl Charge {
    /// The node had enough energy for the whole action.
    pub fn completed(&self) -> bool {
        self.shortfall == 0.0
    }
}

/// Debit `amount` joules from `node`, clamping at zero.
///
/// A charge that exceeds the residual energy drains the node to zero and kills
/// it; the requested action is considered failed.
pub fn charge(node: &mut NodeState, amount: f64) -> Result<Charge> {
    if !(amount >= 0.0) {
        return Err(Error::Domain("charged amount must be non-negative"));
    }
    if !node.alive {
        return Ok(Charge {
            deducted: 0.0,
            shortfall: amount,
            died: false,
        });
    }
    if amount < node.e_res {
        node.e_res -= amount;
        return Ok(Charge {
            deducted: amount,
            shortfall: 0.0,
            died: false,
        });
    }
    let deducted = node.e_res;
    node.e_res = 0.0;
    node.alive = false;
    Ok(Charge {
        deducted,
        shortfall: amount - deducted,
        died: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Position;
    use crate::model::{NodeId, NodeState};
    use approx::assert_relative_eq;

    const FRAME: u64 = 4000;

    #[test]
    fn crossover_from_table_one() {
        let d = crossover_distance(&RadioParams::table_one());
        assert!((d - 87.71).abs() < 0.01, "{d}");
    }

    #[test]
    fn equal_amplifiers_cross_at_one_meter() {
        let p = RadioParams {
            eps_fs: 3e-12,
            eps_mp: 3e-12,
            ..RadioParams::table_one()
        };
        assert_relative_eq!(crossover_distance(&p), 1.0);
    }

    #[test]
    fn configured_crossover_within_one_percent() {
        let p = RadioParams::table_one();
        assert!(p.crossover_deviation() < 0.01);
        assert!(!p.crossover_needs_warning());
        let off = RadioParams { d0: 70.0, ..p };
        assert!(off.crossover_needs_warning());
    }

    #[test]
    fn tx_free_space_branch() {
        let e = tx_energy(&RadioParams::table_one(), FRAME, 50.0).unwrap();
        assert_relative_eq!(e, 3.0e-4, max_relative = 1e-12);
    }

    #[test]
    fn tx_multipath_branch() {
        let e = tx_energy(&RadioParams::table_one(), FRAME, 100.0).unwrap();
        assert_relative_eq!(e, 7.2e-4, max_relative = 1e-12);
    }

    #[test]
    fn tx_edge_cases() {
        let p = RadioParams::table_one();
        assert!(tx_energy(&p, 0, 10.0).is_err());
        assert!(tx_energy(&p, FRAME, -1.0).is_err());
        assert!(tx_energy(&p, FRAME, f64::NAN).is_err());
        assert_relative_eq!(tx_energy(&p, FRAME, 0.0).unwrap(), FRAME as f64 * p.e_el);
    }

    #[test]
    fn rx_values() {
        let p = RadioParams::table_one();
        assert_relative_eq!(rx_energy(&p, FRAME).unwrap(), 2.0e-4, max_relative = 1e-12);
        assert_eq!(rx_energy(&p, 1).unwrap(), p.e_el);
        assert!(rx_energy(&p, 0).is_err());
        for d in [0.1, 1.0, 50.0, 87.0, 300.0] {
            assert!(rx_energy(&p, FRAME).unwrap() < tx_energy(&p, FRAME, d).unwrap());
        }
    }

    #[test]
    fn aggregation_values() {
        let p = RadioParams::table_one();
        assert_relative_eq!(aggregate_energy(&p, FRAME, 1), 2.0e-5, max_relative = 1e-12);
        assert_eq!(aggregate_energy(&p, FRAME, 0), 0.0);
        for n in [1, 3, 17] {
            assert_relative_eq!(
                aggregate_energy(&p, FRAME, 2 * n),
                2.0 * aggregate_energy(&p, FRAME, n)
            );
        }
    }

    #[test]
    fn branches_meet_at_derived_crossover() {
        let p = RadioParams::table_one().with_derived_crossover();
        let l = FRAME as f64;
        let fs = l * (p.e_el + p.eps_fs * p.d0 * p.d0);
        let mp = l * (p.e_el + p.eps_mp * p.d0.powi(4));
        assert_relative_eq!(fs, mp, max_relative = 1e-12);
    }

    fn node(e: f64) -> NodeState {
        NodeState::new(NodeId(0), Position::new(0.0, 0.0), e)
    }

    #[test]
    fn charge_arithmetic() {
        let mut n = node(1e-3);
        let c = charge(&mut n, 3e-4).unwrap();
        assert_relative_eq!(n.e_res, 7e-4, max_relative = 1e-12);
        assert!(n.alive && !c.died && c.completed());
    }

    #[test]
    fn charge_clamps_and_kills() {
        let mut n = node(1e-4);
        let c = charge(&mut n, 3e-4).unwrap();
        assert_eq!(n.e_res, 0.0);
        assert!(!n.alive && c.died);
        assert_relative_eq!(c.deducted, 1e-4);
        assert_relative_eq!(c.shortfall, 2e-4, max_relative = 1e-12);
    }

    #[test]
    fn charge_zero_and_negative() {
        let mut n = node(5.0);
        charge(&mut n, 0.0).unwrap();
        assert_eq!(n, node(5.0));
        assert!(charge(&mut n, -1.0).is_err());
    }
}

//! Closed-form expectations for cluster sizes, head energy rates, message
//! counts and delays. Used directly by the `analyze` command and as oracles
//! against the simulator.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ScenarioConfig;
use crate::radio::{aggregate_energy, rx_energy_unchecked, tx_energy_unchecked, RadioParams};

/// Inputs shared by the expected-value formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalInputs {
    pub n: u32,
    pub m_field: f64,
    pub r_c: f64,
    pub r_s: f64,
    pub r_t: f64,
    pub l: u64,
    pub radio: RadioParams,
}

impl AnalyticalInputs {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        AnalyticalInputs {
            n: cfg.n_nodes,
            m_field: cfg.field_size_m,
            r_c: cfg.r_c,
            r_s: cfg.r_s,
            r_t: cfg.r_t,
            l: cfg.data_frame_bits,
            radio: cfg.radio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if !(self.m_field > 0.0) || !(self.r_c > 0.0) || !(self.r_t > 0.0) || self.l == 0 {
            return Err(Error::config("m_field/r_c/r_t/l", "must be positive"));
        }
        if !rs_admissible(self.r_s, self.r_c) {
            return Err(Error::config("r_s", "must lie in [r_c, 6 r_c)"));
        }
        Ok(())
    }

    /// Every quantity, with head transmit distances `d_ch` and `d_sch`.
    pub fn report(&self, d_ch: f64, d_sch: f64) -> Result<AnalyticalReport> {
        self.validate()?;
        let lambda = expected_density(self.n, self.m_field)?;
        let n_c_real = expected_cluster_members(lambda, self.r_c)?;
        let n_c = libm::floor(n_c_real).max(1.0) as u64;
        let n_s = expected_supercluster_members(self.r_s, self.r_c)?;
        let n_s_count = libm::floor(n_s).max(1.0) as u64;
        let k_c = expected_cluster_count(self.m_field, self.r_c)?;
        let k_s = expected_supercluster_count(self.m_field, self.r_s)?;
        let e_ch = ch_energy_rate(&self.radio, self.l, n_c, d_ch)?;
        let e_sch = sch_energy_rate(&self.radio, self.l, n_s_count, d_sch)?;
        let (rs_lo, rs_hi) = rs_bounds(self.r_c)?;
        Ok(AnalyticalReport {
            lambda,
            n_c_real,
            n_c,
            n_s,
            k_c,
            k_s,
            d_ch,
            d_sch,
            e_ch,
            e_sch,
            ch_to_sch_ratio: e_ch / e_sch,
            rs_lo,
            rs_hi,
        })
    }
}

/// Output of [`AnalyticalInputs::report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalReport {
    pub lambda: f64,
    pub n_c_real: f64,
    /// Floored member count used in the energy rate.
    pub n_c: u64,
    pub n_s: f64,
    pub k_c: f64,
    pub k_s: f64,
    pub d_ch: f64,
    pub d_sch: f64,
    pub e_ch: f64,
    pub e_sch: f64,
    pub ch_to_sch_ratio: f64,
    pub rs_lo: f64,
    /// Exclusive.
    pub rs_hi: f64,
}

fn positive(v: f64, what: &'static str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(what))
    }
}

/// Node density `n / m²` per square metre.
pub fn expected_density(n: u32, m_field: f64) -> Result<f64> {
    let m = positive(m_field, "field size must be positive")?;
    Ok(f64::from(n) / (m * m))
}

/// Expected nodes inside one cluster disk, `λπr_c²`. Real valued; callers
/// floor it when they need a count.
pub fn expected_cluster_members(lambda: f64, r_c: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(r_c >= 0.0) {
        return Err(Error::Domain("density and range must be non-negative"));
    }
    Ok(lambda * PI * r_c * r_c)
}

/// Clusters needed to tile the field, `m² / (πr_c²)`.
pub fn expected_cluster_count(m_field: f64, r_c: f64) -> Result<f64> {
    let m = positive(m_field, "field size must be positive")?;
    let r = positive(r_c, "range must be positive")?;
    Ok(m * m / (PI * r * r))
}

/// Super-clusters needed to tile the field, `m² / (πr_s²)`.
pub fn expected_supercluster_count(m_field: f64, r_s: f64) -> Result<f64> {
    expected_cluster_count(m_field, r_s)
}

/// Heads per super-cluster, `r_s² / r_c²`.
pub fn expected_supercluster_members(r_s: f64, r_c: f64) -> Result<f64> {
    let r_c = positive(r_c, "r_c must be positive")?;
    if !(r_s >= r_c) {
        return Err(Error::Domain("r_s must be at least r_c"));
    }
    Ok((r_s * r_s) / (r_c * r_c))
}

fn head_rate(radio: &RadioParams, l: u64, n: u64, d_tx: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("a head aggregates at least its own reading"));
    }
    if l == 0 {
        return Err(Error::Domain("frame size must be positive"));
    }
    if !(d_tx >= 0.0) {
        return Err(Error::Domain("distance must be non-negative"));
    }
    let rx = rx_energy_unchecked(radio, l) * (n - 1) as f64;
    Ok(rx + aggregate_energy(radio, l, n) + tx_energy_unchecked(radio, l, d_tx))
}

/// Energy a cluster head spends per frame: `n_c - 1` receptions, aggregation
/// of `n_c` signals and one transmission over `d_tx`.
pub fn ch_energy_rate(radio: &RadioParams, l: u64, n_c: u64, d_tx: f64) -> Result<f64> {
    head_rate(radio, l, n_c, d_tx)
}

/// Same accounting for a super-cluster head with `n_s` inputs.
pub fn sch_energy_rate(radio: &RadioParams, l: u64, n_s: u64, d_tx: f64) -> Result<f64> {
    head_rate(radio, l, n_s, d_tx)
}

/// Admissible super-cluster ranges, `[r_c, 6 r_c)` as `(lo, hi)`.
pub fn rs_bounds(r_c: f64) -> Result<(f64, f64)> {
    let r_c = positive(r_c, "r_c must be positive")?;
    Ok((r_c, 6.0 * r_c))
}

/// Whether `r_s` falls inside [`rs_bounds`].
pub fn rs_admissible(r_s: f64, r_c: f64) -> bool {
    rs_bounds(r_c).is_ok_and(|(lo, hi)| r_s >= lo && r_s < hi)
}

/// Messages exchanged while electing super-cluster heads: an advertisement
/// and a join per super-cluster, one join per cluster head, minus the `k_l`
/// heads that are themselves elected.
pub fn sch_message_count(k_s: u64, k_c: u64, k_l: u64) -> Result<u64> {
    (2 * k_s + k_c)
        .checked_sub(k_l)
        .filter(|_| k_l <= k_s + k_c)
        .ok_or(Error::Domain("k_l exceeds k_s + k_c"))
}

/// Delay over `m_nodes` positions (source to base station inclusive) with
/// uniform link time `t_l`: `(m-1) t_l + (m-2) t_p`, without the processing
/// term when the path is predetermined.
pub fn closed_form_delay(m_nodes: u32, t_l: f64, t_p: f64, predetermined: bool) -> Result<f64> {
    if m_nodes < 2 {
        return Err(Error::Domain("a path needs at least two positions"));
    }
    let links = f64::from(m_nodes - 1);
    let relays = if predetermined { 0.0 } else { f64::from(m_nodes - 2) };
    Ok(links * t_l + relays * t_p)
}

use serde::{Deserialize, Serialize};

use super::EnvError;

/// Thermal noise density at room temperature (dBm/Hz).
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub block_loss_db: f64,
    pub block_prob: f64,
    /// Spectral-efficiency ceiling (bit/s/Hz).
    pub se_cap_bps_hz: f64,
    pub sidelobe_gain_dbi: f64,
    /// Lumped hardware, polarization and processing losses on every link.
    pub implementation_loss_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 15.0,
            carrier_ghz: 60.0,
            bandwidth_hz: 2.16e9,
            noise_figure_db: 7.0,
            block_loss_db: 20.0,
            block_prob: 0.13,
            se_cap_bps_hz: 4.6,
            sidelobe_gain_dbi: -10.0,
            implementation_loss_db: 29.0,
        }
    }
}

impl LinkBudget {
    pub fn noise_power_dbm(&self) -> f64 {
        noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)
    }

    pub fn max_rate_bps(&self) -> f64 {
        self.bandwidth_hz * self.se_cap_bps_hz
    }

    /// Capped Shannon rate (bit/s) at the given SNR.
    pub fn rate_bps(&self, snr_db: f64) -> f64 {
        let snr = 10f64.powf(snr_db / 10.0);
        self.bandwidth_hz * (1.0 + snr).log2().min(self.se_cap_bps_hz)
    }
}

pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Line-of-sight path loss `28 + 22 log10(d) + 20 log10(f_c) + shadowing`, with
/// `d` in meters and `f_c` in GHz.
pub fn path_loss_db(distance_m: f64, carrier_ghz: f64, shadowing_db: f64) -> Result<f64, EnvError> {
    if !(distance_m > 0.0) {
        return Err(EnvError::NonPositiveDistance(distance_m));
    }
    if !(carrier_ghz > 0.0) {
        return Err(EnvError::NonPositiveCarrier(carrier_ghz));
    }
    Ok(28.0 + 22.0 * distance_m.log10() + 20.0 * carrier_ghz.log10() + shadowing_db)
}

pub fn snr_db(budget: &LinkBudget, path_loss_db: f64, g_tx_dbi: f64, g_rx_dbi: f64, blocked: bool) -> f64 {
    let block = if blocked { budget.block_loss_db } else { 0.0 };
    budget.tx_power_dbm + g_tx_dbi + g_rx_dbi - path_loss_db - block - budget.implementation_loss_db - budget.noise_power_dbm()
}

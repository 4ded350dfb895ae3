//! Link-level mmWave environment: one base station at a fixed position and a
//! single user wandering and rotating inside a disc.

mod channel;
mod codebook;
mod mobility;
mod sweep;

pub use channel::{noise_power_dbm, path_loss_db, snr_db, LinkBudget};
pub use codebook::{beam_gain_dbi, mainlobe_gain_dbi, Codebook, CodebookSide};
pub use mobility::{draw_slot_conditions, init_realization, step_mobility, MobilityParams, WorldState};
pub use sweep::{link_snr_db, slot_effective_rate, sweep, BeamPair, Codebooks, SweepResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EnvError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("carrier frequency must be positive, got {0} GHz")]
    NonPositiveCarrier(f64),
    #[error("beam {beam} does not exist in a {sectors}-sector codebook")]
    BeamOutOfRange { beam: usize, sectors: usize },
    #[error("a sweep needs at least one base-station beam")]
    EmptySweep,
    #[error("slot duration must be positive, got {0} s")]
    NonPositiveSlot(f64),
    #[error("overhead must be non-negative, got {0} s")]
    NegativeOverhead(f64),
}

/// Every physical constant of the environment. Defaults follow the
/// link-level parameter table, with the gaps filled by the values below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    pub budget: LinkBudget,
    pub mobility: MobilityParams,
    /// Standard deviation of the per-slot log-normal shadowing (dB).
    pub shadowing_std_db: f64,
    pub bs_position_m: [f64; 2],
    pub el_beamwidth_deg: f64,
    pub ue_sectors: usize,
    /// Duration of one beam-pair measurement (s).
    pub measurement_s: f64,
    pub quasi_omni_gain_dbi: f64,
    /// Stage-1 SNR at or above which a swept beam "connects" the user (dB).
    pub connect_threshold_db: f64,
    /// Data-phase integration step (s).
    pub substep_s: f64,
    pub min_distance_m: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            budget: LinkBudget::default(),
            mobility: MobilityParams::default(),
            shadowing_std_db: std::f64::consts::SQRT_2,
            bs_position_m: [0.0, 0.0],
            el_beamwidth_deg: 75.0,
            ue_sectors: 16,
            measurement_s: 10e-6,
            quasi_omni_gain_dbi: 0.0,
            connect_threshold_db: -30.0,
            substep_s: 1e-3,
            min_distance_m: 1.0,
        }
    }
}

impl EnvParams {
    pub fn bs_codebook(&self, num_sectors: usize) -> Codebook {
        Codebook::new(CodebookSide::Bs, num_sectors, self.el_beamwidth_deg, self.budget.sidelobe_gain_dbi)
    }

    pub fn ue_codebook(&self) -> Codebook {
        Codebook::new(CodebookSide::Ue, self.ue_sectors, self.el_beamwidth_deg, self.budget.sidelobe_gain_dbi)
    }

    pub fn codebooks(&self, bs_sectors: usize) -> Codebooks {
        Codebooks { bs: self.bs_codebook(bs_sectors), ue: self.ue_codebook() }
    }

    /// Normalization constant for rewards: the largest physical rate (bit/s).
    pub fn max_rate_bps(&self) -> f64 {
        self.budget.max_rate_bps()
    }
}

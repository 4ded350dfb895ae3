use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::EnvError;

/// Solid angle of the full sphere in square degrees, rounded.
const SPHERE_SQ_DEG: f64 = 41253.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodebookSide {
    Bs,
    Ue,
}

/// `N_s` flat-top azimuth sectors tiling 360 degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub side: CodebookSide,
    pub num_sectors: usize,
    pub el_beamwidth_deg: f64,
    pub sidelobe_gain_dbi: f64,
    boresights_rad: Vec<f64>,
}

impl Codebook {
    pub fn new(side: CodebookSide, num_sectors: usize, el_beamwidth_deg: f64, sidelobe_gain_dbi: f64) -> Self {
        let step = TAU / num_sectors as f64;
        let boresights_rad = (0..num_sectors).map(|i| i as f64 * step).collect();
        Self { side, num_sectors, el_beamwidth_deg, sidelobe_gain_dbi, boresights_rad }
    }

    pub fn az_beamwidth_deg(&self) -> f64 {
        360.0 / self.num_sectors as f64
    }

    pub fn az_beamwidth_rad(&self) -> f64 {
        TAU / self.num_sectors as f64
    }

    pub fn boresights_rad(&self) -> &[f64] {
        &self.boresights_rad
    }

    pub fn mainlobe_gain_dbi(&self) -> f64 {
        mainlobe_gain_dbi(self.az_beamwidth_deg(), self.el_beamwidth_deg)
    }

    /// The beam whose sector contains `angle_rad` (absolute, codebook frame).
    pub fn beam_covering(&self, angle_rad: f64) -> usize {
        let step = self.az_beamwidth_rad();
        let k = (angle_rad.rem_euclid(TAU) / step).round() as usize;
        k % self.num_sectors
    }
}

pub fn mainlobe_gain_dbi(az_beamwidth_deg: f64, el_beamwidth_deg: f64) -> f64 {
    10.0 * (SPHERE_SQ_DEG / (az_beamwidth_deg * el_beamwidth_deg)).log10()
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI { w - TAU } else { w }
}

/// Flat-top sector gain toward `los_angle`. `pointing_angle` rotates the
/// codebook (the user's body orientation for UE codebooks, zero at the BS).
pub fn beam_gain_dbi(codebook: &Codebook, beam: usize, los_angle: f64, pointing_angle: f64) -> Result<f64, EnvError> {
    let boresight = *codebook
        .boresights_rad
        .get(beam)
        .ok_or(EnvError::BeamOutOfRange { beam, sectors: codebook.num_sectors })?;
    let offset = wrap_angle(los_angle - boresight - pointing_angle).abs();
    Ok(if offset <= 0.5 * codebook.az_beamwidth_rad() {
        codebook.mainlobe_gain_dbi()
    } else {
        codebook.sidelobe_gain_dbi
    })
}

use std::f64::consts::PI;

use rand::Rng;

use super::{beam_gain_dbi, path_loss_db, snr_db, step_mobility, Codebook, EnvError, EnvParams, WorldState};

#[derive(Debug, Clone, PartialEq)]
pub struct Codebooks {
    pub bs: Codebook,
    pub ue: Codebook,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BeamPair {
    pub bs_beam: usize,
    pub ue_beam: usize,
}

/// Outcome of a two-stage sweep.
///
/// Stage 1 measures every swept BS beam against a quasi-omni UE pattern;
/// stage 2 measures the best stage-1 beam against every UE beam.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `(bs_beam, snr_db)` in sweep order.
    pub stage1_snr_db: Vec<(usize, f64)>,
    /// `(ue_beam, snr_db)` for the winning BS beam.
    pub stage2_snr_db: Vec<(usize, f64)>,
    pub best_pair: BeamPair,
    pub best_snr_db: f64,
    pub overhead_s: f64,
    /// `(bs_beam, connects)` in sweep order.
    pub connects: Vec<(usize, bool)>,
}

impl SweepResult {
    pub fn measurements(&self) -> usize {
        self.stage1_snr_db.len() + self.stage2_snr_db.len()
    }
}

struct Geometry {
    path_loss_db: f64,
    /// Direction of the user seen from the BS.
    bs_los: f64,
    /// Direction of the BS seen from the user, absolute frame.
    ue_los: f64,
}

fn geometry(world: &WorldState, params: &EnvParams) -> Result<Geometry, EnvError> {
    let dx = world.position[0] - params.bs_position_m[0];
    let dy = world.position[1] - params.bs_position_m[1];
    let distance = dx.hypot(dy).max(params.min_distance_m);
    let bs_los = dy.atan2(dx);
    Ok(Geometry {
        path_loss_db: path_loss_db(distance, params.budget.carrier_ghz, world.shadowing_db)?,
        bs_los,
        ue_los: bs_los + PI,
    })
}

/// SNR of a fixed beam pair in the current world state.
pub fn link_snr_db(world: &WorldState, codebooks: &Codebooks, pair: BeamPair, params: &EnvParams) -> Result<f64, EnvError> {
    let geo = geometry(world, params)?;
    let g_bs = beam_gain_dbi(&codebooks.bs, pair.bs_beam, geo.bs_los, 0.0)?;
    let g_ue = beam_gain_dbi(&codebooks.ue, pair.ue_beam, geo.ue_los, world.orientation)?;
    Ok(snr_db(&params.budget, geo.path_loss_db, g_bs, g_ue, world.blocked))
}

fn first_max(values: &[(usize, f64)]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .fold((values[0].0, f64::NEG_INFINITY), |best, v| if v.1 > best.1 { v } else { best })
}

pub fn sweep(world: &WorldState, codebooks: &Codebooks, swept_bs_beams: &[usize], params: &EnvParams) -> Result<SweepResult, EnvError> {
    if swept_bs_beams.is_empty() {
        return Err(EnvError::EmptySweep);
    }
    let geo = geometry(world, params)?;
    let budget = &params.budget;

    let stage1 = swept_bs_beams
        .iter()
        .map(|&b| {
            let g = beam_gain_dbi(&codebooks.bs, b, geo.bs_los, 0.0)?;
            Ok((b, snr_db(budget, geo.path_loss_db, g, params.quasi_omni_gain_dbi, world.blocked)))
        })
        .collect::<Result<Vec<_>, EnvError>>()?;
    let (bs_beam, _) = first_max(&stage1);

    let g_bs = beam_gain_dbi(&codebooks.bs, bs_beam, geo.bs_los, 0.0)?;
    let stage2 = (0..codebooks.ue.num_sectors)
        .map(|u| {
            let g = beam_gain_dbi(&codebooks.ue, u, geo.ue_los, world.orientation)?;
            Ok((u, snr_db(budget, geo.path_loss_db, g_bs, g, world.blocked)))
        })
        .collect::<Result<Vec<_>, EnvError>>()?;
    let (ue_beam, best_snr_db) = first_max(&stage2);

    let connects = stage1.iter().map(|&(b, s)| (b, s >= params.connect_threshold_db)).collect();
    let overhead_s = (stage1.len() + stage2.len()) as f64 * params.measurement_s;
    Ok(SweepResult {
        stage1_snr_db: stage1,
        stage2_snr_db: stage2,
        best_pair: BeamPair { bs_beam, ue_beam },
        best_snr_db,
        overhead_s,
        connects,
    })
}

/// Data delivered over one slot divided by the slot duration (Gbit/s).
///
/// The world is advanced through the whole slot: first across the sweep
/// overhead, then across the data phase in sub-steps, re-evaluating the
/// fixed beam pair after every sub-step.
pub fn slot_effective_rate<R: Rng + ?Sized>(
    world: &mut WorldState,
    codebooks: &Codebooks,
    pair: BeamPair,
    slot_s: f64,
    overhead_s: f64,
    params: &EnvParams,
    rng: &mut R,
) -> Result<f64, EnvError> {
    if !(slot_s > 0.0) {
        return Err(EnvError::NonPositiveSlot(slot_s));
    }
    if !(overhead_s >= 0.0) {
        return Err(EnvError::NegativeOverhead(overhead_s));
    }
    if overhead_s >= slot_s {
        step_mobility(world, &params.mobility, slot_s, rng);
        return Ok(0.0);
    }
    if overhead_s > 0.0 {
        step_mobility(world, &params.mobility, overhead_s, rng);
    }
    let data_s = slot_s - overhead_s;
    let steps = ((data_s / params.substep_s) - 1e-9).ceil().max(1.0) as usize;
    let mut bits = 0.0;
    let mut elapsed = 0.0;
    for i in 0..steps {
        let dt = if i + 1 == steps { data_s - elapsed } else { params.substep_s };
        step_mobility(world, &params.mobility, dt, rng);
        let snr = link_snr_db(world, codebooks, pair, params)?;
        bits += params.budget.rate_bps(snr) * dt;
        elapsed += dt;
    }
    Ok(bits / slot_s / 1e9)
}

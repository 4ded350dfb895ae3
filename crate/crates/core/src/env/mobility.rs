use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::EnvParams;

/// Reflections handled within one step before falling back to a radial clamp.
const MAX_REFLECTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityParams {
    pub center_m: [f64; 2],
    pub radius_m: f64,
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub max_rotation_deg_s: f64,
    /// Heading random-walk intensity (degrees per square-root second).
    pub heading_noise_deg_sqrt_s: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            center_m: [21.21, 21.21],
            radius_m: 10.0,
            speed_min_mps: 5.0,
            speed_max_mps: 10.0,
            max_rotation_deg_s: 10.0,
            heading_noise_deg_sqrt_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub position: [f64; 2],
    pub heading: f64,
    pub speed: f64,
    pub orientation: f64,
    pub rotation_rate: f64,
    pub blocked: bool,
    pub shadowing_db: f64,
}

impl WorldState {
    pub fn distance_from(&self, point: [f64; 2]) -> f64 {
        (self.position[0] - point[0]).hypot(self.position[1] - point[1])
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn draw_rotation_rate<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> f64 {
    let magnitude = uniform(rng, 0.0, params.max_rotation_deg_s).to_radians();
    if rng.random::<bool>() { magnitude } else { -magnitude }
}

/// Places the user uniformly in the disc and draws its motion parameters.
pub fn init_realization<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> WorldState {
    let r = params.radius_m;
    let position = if r > 0.0 {
        loop {
            let x = uniform(rng, -r, r);
            let y = uniform(rng, -r, r);
            if x * x + y * y <= r * r {
                break [params.center_m[0] + x, params.center_m[1] + y];
            }
        }
    } else {
        params.center_m
    };
    let heading = uniform(rng, 0.0, TAU);
    let speed = uniform(rng, params.speed_min_mps, params.speed_max_mps);
    let orientation = uniform(rng, 0.0, TAU);
    let rotation_rate = draw_rotation_rate(params, rng);
    WorldState { position, heading, speed, orientation, rotation_rate, blocked: false, shadowing_db: 0.0 }
}

/// Redraws the slot-level conditions: blockage, shadowing and rotation rate.
pub fn draw_slot_conditions<R: Rng + ?Sized>(state: &mut WorldState, params: &EnvParams, rng: &mut R) {
    state.blocked = rng.random::<f64>() < params.budget.block_prob;
    let z: f64 = StandardNormal.sample(rng);
    state.shadowing_db = params.shadowing_std_db * z;
    state.rotation_rate = draw_rotation_rate(&params.mobility, rng);
}

/// Advances the user by `dt` seconds. The disc boundary reflects the velocity
/// about the local normal; the heading then takes a Gaussian random-walk step.
pub fn step_mobility<R: Rng + ?Sized>(state: &mut WorldState, params: &MobilityParams, dt: f64, rng: &mut R) {
    let [cx, cy] = params.center_m;
    let r = params.radius_m;
    if r <= 0.0 {
        state.position = params.center_m;
    } else {
        let mut px = state.position[0] - cx;
        let mut py = state.position[1] - cy;
        let (mut dx, mut dy) = (state.heading.cos(), state.heading.sin());
        let mut remaining = state.speed * dt;
        let mut reflections = 0;
        while remaining > 0.0 {
            // Distance along (dx, dy) to the circle.
            let pd = px * dx + py * dy;
            let c = px * px + py * py - r * r;
            let hit = -pd + (pd * pd - c).max(0.0).sqrt();
            if remaining <= hit || reflections == MAX_REFLECTIONS {
                px += remaining * dx;
                py += remaining * dy;
                break;
            }
            px += hit * dx;
            py += hit * dy;
            let norm = px.hypot(py);
            let (nx, ny) = (px / norm, py / norm);
            px = nx * r;
            py = ny * r;
            let dn = dx * nx + dy * ny;
            dx -= 2.0 * dn * nx;
            dy -= 2.0 * dn * ny;
            remaining -= hit;
            reflections += 1;
        }
        let norm = px.hypot(py);
        if norm > r {
            px *= r / norm;
            py *= r / norm;
        }
        state.position = [cx + px, cy + py];
        state.heading = dy.atan2(dx);
    }
    let z: f64 = StandardNormal.sample(rng);
    state.heading = (state.heading + params.heading_noise_deg_sqrt_s.to_radians() * dt.sqrt() * z).rem_euclid(TAU);
    state.orientation = (state.orientation + state.rotation_rate * dt).rem_euclid(TAU);
}

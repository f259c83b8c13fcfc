//! Agile imaging: attitude maneuvers, image quality and candidate
//! observation epochs.
//!
//! A visibility window admits many look geometries. The window is
//! discretized into candidate observation epochs; each candidate carries
//! the body attitude that points the camera at the target, the slewing
//! time and energy needed to reach that attitude, and a reward equal to
//! the ratio of nadir to achieved ground sample distance, so that steep
//! side looks earn less than near-nadir shots.

use serde::{Deserialize, Serialize};

use crate::geometry::{
    cross, dot, incidence_deg, scale, sub, surface_point_ecef, unit,
    ConstellationSpec, SatId, Target, Vec3, VisibilityWindow,
};
use crate::{Error, Result};

/// Default spacing of candidate observation epochs inside a window.
pub const DEFAULT_EPOCH_STEP_S: f64 = 10.0;

/// Body attitude as roll, pitch, yaw Euler angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

/// Slew magnitude between two attitudes: the 1-norm of the Euler angle
/// differences, in degrees.
pub fn slew_angle_deg(a: Attitude, b: Attitude) -> f64 {
    (a.roll_deg - b.roll_deg).abs()
        + (a.pitch_deg - b.pitch_deg).abs()
        + (a.yaw_deg - b.yaw_deg).abs()
}

/// Attitude envelope and maneuver energetics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgilitySpec {
    pub roll_limit_deg: f64,
    pub pitch_limit_deg: f64,
    pub yaw_limit_deg: f64,
    /// Actuator draw while slewing, W.
    pub p_man_w: f64,
    /// Maneuver energy budget per satellite and episode, J.
    pub e_max_j: f64,
}

impl Default for AgilitySpec {
    fn default() -> Self {
        AgilitySpec {
            roll_limit_deg: 45.0,
            pitch_limit_deg: 45.0,
            yaw_limit_deg: 90.0,
            p_man_w: 2.0,
            e_max_j: 1000.0,
        }
    }
}

impl AgilitySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.roll_limit_deg > 0.0 && self.pitch_limit_deg > 0.0 && self.yaw_limit_deg >= 0.0)
        {
            return Err(Error::Config("attitude limits must be positive".into()));
        }
        if !(self.p_man_w > 0.0) || !(self.e_max_j > 0.0) {
            return Err(Error::Config("maneuver power and energy budget must be positive".into()));
        }
        Ok(())
    }

    pub fn admits(&self, a: Attitude) -> bool {
        a.roll_deg.abs() <= self.roll_limit_deg + 1e-9
            && a.pitch_deg.abs() <= self.pitch_limit_deg + 1e-9
            && a.yaw_deg.abs() <= self.yaw_limit_deg + 1e-9
    }

    pub fn maneuver_energy_j(&self, alpha_deg: f64) -> Result<f64> {
        Ok(self.p_man_w * transition_time_s(alpha_deg)?)
    }
}

/// Slew-and-stabilize time for a maneuver of `alpha` degrees.
///
/// Piecewise in the slew magnitude; the settling floor dominates small
/// slews. Continuous at 30, 60 and 90 degrees, and nearly so at 10.
pub fn transition_time_s(alpha_deg: f64) -> Result<f64> {
    if !(alpha_deg >= 0.0) {
        return Err(Error::Domain(format!("slew angle {alpha_deg} must be non-negative")));
    }
    Ok(if alpha_deg <= 10.0 {
        11.66
    } else if alpha_deg <= 30.0 {
        5.0 + alpha_deg / 1.5
    } else if alpha_deg <= 60.0 {
        10.0 + alpha_deg / 2.0
    } else if alpha_deg <= 90.0 {
        16.0 + alpha_deg / 2.5
    } else {
        22.0 + alpha_deg / 3.0
    })
}

/// Shortest possible transition, the settling floor.
pub const MIN_TRANSITION_S: f64 = 11.66;

/// Imaging payload: frames per observation and their sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    /// Frames captured per observation.
    pub n_img: usize,
    /// Raw frame size, bits.
    pub d_img_bits: f64,
    /// Detection result size per frame, bits.
    pub ship_bits: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec {
            n_img: 2601,
            d_img_bits: 788_513.0,
            ship_bits: 336.0,
            width_px: 600,
            height_px: 600,
        }
    }
}

impl FrameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_img == 0 || !(self.d_img_bits > 0.0) || !(self.ship_bits > 0.0) {
            return Err(Error::Config("frame counts and sizes must be positive".into()));
        }
        Ok(())
    }

    /// Raw data volume of one observation, bits.
    pub fn observation_bits(&self) -> f64 {
        self.n_img as f64 * self.d_img_bits
    }
}

/// Camera resolution model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticsSpec {
    /// Ground sample distance straight down from the reference orbit, m.
    pub gsd_nadir_m: f64,
}

impl Default for OpticsSpec {
    fn default() -> Self {
        OpticsSpec { gsd_nadir_m: 0.31 }
    }
}

/// Achieved ground sample distance for a look geometry: the nadir value
/// stretched by slant range and by the cosine of the incidence angle at
/// the target.
pub fn gsd_m(optics: &OpticsSpec, slant_range_m: f64, altitude_m: f64, incidence: f64) -> f64 {
    optics.gsd_nadir_m * (slant_range_m / altitude_m) / incidence.to_radians().cos()
}

/// Observation reward: nadir over achieved ground sample distance, 1 at
/// nadir and decaying toward the swath edge.
pub fn reward(optics: &OpticsSpec, slant_range_m: f64, altitude_m: f64, incidence: f64) -> f64 {
    optics.gsd_nadir_m / gsd_m(optics, slant_range_m, altitude_m, incidence)
}

/// One candidate observation: a satellite, a target, an epoch inside a
/// visibility window and the geometry frozen at that epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    /// Global index, ascending in (time, sat, target).
    pub id: usize,
    pub sat: SatId,
    pub target_id: usize,
    /// Index of the source visibility window in its input slice.
    pub vtw_index: usize,
    /// Candidate observation epoch, s.
    pub time_s: f64,
    pub window_start_s: f64,
    pub window_end_s: f64,
    pub attitude: Attitude,
    pub profit: f64,
    pub slant_range_m: f64,
    pub incidence_deg: f64,
}

/// Attitude that points the boresight from the satellite to the target,
/// in the local orbital frame: z down, x along velocity, zero yaw.
pub fn pointing_attitude(sat_pos: Vec3, sat_vel: Vec3, ground_pos: Vec3) -> Attitude {
    let z_hat = unit(scale(sat_pos, -1.0));
    let y_hat = unit(cross(z_hat, sat_vel));
    let x_hat = cross(y_hat, z_hat);
    let d = unit(sub(ground_pos, sat_pos));
    let pitch = dot(d, x_hat).atan2(dot(d, z_hat)).to_degrees();
    let roll = dot(d, y_hat).atan2(dot(d, z_hat)).to_degrees();
    Attitude { roll_deg: roll, pitch_deg: pitch, yaw_deg: 0.0 }
}

/// Expands visibility windows into candidate observation epochs spaced
/// `step_s` apart, keeping only candidates inside the attitude envelope.
/// Output is sorted by (time, sat, target) and ids match positions.
pub fn discretize_windows(
    spec: &ConstellationSpec,
    windows: &[VisibilityWindow],
    targets: &[Target],
    agility: &AgilitySpec,
    optics: &OpticsSpec,
    step_s: f64,
) -> Result<Vec<ObservationWindow>> {
    if !(step_s > 0.0) {
        return Err(Error::Config(format!("epoch step {step_s} must be positive")));
    }
    agility.validate()?;
    let mut out = Vec::new();
    for (w_idx, w) in windows.iter().enumerate() {
        let target = targets
            .iter()
            .find(|t| t.id == w.target_id)
            .ok_or_else(|| Error::Config(format!("window references unknown target {}", w.target_id)))?;
        let ground = surface_point_ecef(target.lat_deg, target.lon_deg, spec.earth_radius_km);
        let altitude_m = match w.sat {
            SatId::Edge(_) => spec.altitude_e_km * 1e3,
            SatId::Obs(i) => {
                spec.obs_sats
                    .get(i)
                    .ok_or_else(|| Error::Config(format!("unknown satellite {}", w.sat)))?
                    .altitude_km
                    * 1e3
            }
        };
        let mut k = 0usize;
        loop {
            let t = w.start_s + k as f64 * step_s;
            if t > w.end_s + 1e-9 {
                break;
            }
            k += 1;
            let (pos, vel) = spec.state_ecef(w.sat, t)?;
            let att = pointing_attitude(pos, vel, ground);
            if !agility.admits(att) {
                continue;
            }
            let slant = crate::geometry::norm(sub(ground, pos));
            let inc = incidence_deg(ground, pos);
            // Grazing geometries have no resolution worth scheduling.
            if inc >= 89.0 {
                continue;
            }
            out.push(ObservationWindow {
                id: 0,
                sat: w.sat,
                target_id: w.target_id,
                vtw_index: w_idx,
                time_s: t,
                window_start_s: w.start_s,
                window_end_s: w.end_s,
                attitude: att,
                profit: reward(optics, slant, altitude_m, inc),
                slant_range_m: slant,
                incidence_deg: inc,
            });
        }
    }
    out.sort_by(|a, b| {
        a.time_s
            .total_cmp(&b.time_s)
            .then_with(|| a.sat.cmp(&b.sat))
            .then_with(|| a.target_id.cmp(&b.target_id))
    });
    for (i, o) in out.iter_mut().enumerate() {
        o.id = i;
    }
    Ok(out)
}

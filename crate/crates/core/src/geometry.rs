//! Circular-orbit constellation geometry.
//!
//! Satellites move on circular orbits around a spherical Earth. The edge
//! constellation is a single evenly phased ring; observation satellites are
//! described by explicit orbital elements so Walker-style multi-plane sets
//! can be expressed. Positions are reported in an Earth-fixed frame (ECEF)
//! whose rotation uses the sidereal rate; the inertial frame (ECI) shares
//! the same origin and z axis.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const EARTH_MU_M3_S2: f64 = 3.986004418e14;
/// Sidereal rotation rate of Earth.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Default coarse sampling step for visibility sweeps.
pub const DEFAULT_VISIBILITY_STEP_S: f64 = 1.0;
/// Window edges are refined to this tolerance.
pub const WINDOW_EDGE_TOLERANCE_S: f64 = 0.05;

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn unit(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Circular-orbit elements; `phase_deg` is the argument of latitude at t=0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitElements {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub phase_deg: f64,
}

/// Edge ring plus observation satellites.
///
/// Edge satellites are spread evenly over `n_planes` planes (ring topology
/// requires a single plane). Observation satellites carry their own
/// elements; with `obs_sats` empty the observer is co-hosted on the ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationSpec {
    pub n_sats_edge: usize,
    pub altitude_e_km: f64,
    pub inclination_e_deg: f64,
    #[serde(default)]
    pub raan_e_deg: f64,
    #[serde(default)]
    pub phase_e_deg: f64,
    #[serde(default = "default_n_planes")]
    pub n_planes: usize,
    #[serde(default)]
    pub obs_sats: Vec<OrbitElements>,
    #[serde(default = "default_earth_radius")]
    pub earth_radius_km: f64,
}

fn default_n_planes() -> usize {
    1
}

fn default_earth_radius() -> f64 {
    EARTH_RADIUS_KM
}

/// Identifies a satellite within a [`ConstellationSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SatId {
    Edge(usize),
    Obs(usize),
}

impl std::fmt::Display for SatId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SatId::Edge(i) => write!(f, "edge{i}"),
            SatId::Obs(i) => write!(f, "obs{i}"),
        }
    }
}

impl ConstellationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sats_edge < 2 {
            return Err(Error::InvalidTopology(format!(
                "edge ring needs at least 2 satellites, got {}",
                self.n_sats_edge
            )));
        }
        if self.n_planes == 0 {
            return Err(Error::InvalidTopology("n_planes must be >= 1".into()));
        }
        if self.altitude_e_km <= 0.0 || self.earth_radius_km <= 0.0 {
            return Err(Error::InvalidTopology(
                "altitude and Earth radius must be positive".into(),
            ));
        }
        Ok(())
    }

    fn elements(&self, sat: SatId) -> Result<OrbitElements> {
        match sat {
            SatId::Edge(i) => {
                if i >= self.n_sats_edge {
                    return Err(Error::InvalidTopology(format!(
                        "edge index {i} out of range (ring size {})",
                        self.n_sats_edge
                    )));
                }
                let per_plane = self.n_sats_edge / self.n_planes.max(1);
                let plane = if per_plane == 0 { 0 } else { i / per_plane.max(1) };
                let slot = if per_plane == 0 { i } else { i % per_plane.max(1) };
                let raan = self.raan_e_deg + 360.0 * plane as f64 / self.n_planes as f64;
                let phase = self.phase_e_deg
                    + 360.0 * slot as f64 / per_plane.max(1) as f64;
                Ok(OrbitElements {
                    altitude_km: self.altitude_e_km,
                    inclination_deg: self.inclination_e_deg,
                    raan_deg: raan,
                    phase_deg: phase,
                })
            }
            SatId::Obs(i) => self.obs_sats.get(i).copied().ok_or_else(|| {
                Error::InvalidTopology(format!(
                    "observation satellite {i} not defined (have {})",
                    self.obs_sats.len()
                ))
            }),
        }
    }

    /// Orbital period of the given satellite.
    pub fn period_s(&self, sat: SatId) -> Result<f64> {
        let el = self.elements(sat)?;
        Ok(orbital_period_s(el.altitude_km, self.earth_radius_km))
    }

    /// Inertial position at time `t` in meters.
    pub fn propagate_eci(&self, sat: SatId, t_s: f64) -> Result<Vec3> {
        Ok(self.state_eci(sat, t_s)?.0)
    }

    /// Earth-fixed position at time `t` in meters.
    pub fn propagate(&self, sat: SatId, t_s: f64) -> Result<Vec3> {
        let eci = self.propagate_eci(sat, t_s)?;
        Ok(rot_z(eci, -EARTH_ROTATION_RAD_S * t_s))
    }

    /// Earth-fixed position and inertial velocity (expressed in Earth-fixed
    /// axes); the velocity defines the along-track direction for attitude.
    pub fn state_ecef(&self, sat: SatId, t_s: f64) -> Result<(Vec3, Vec3)> {
        let (p, v) = self.state_eci(sat, t_s)?;
        let ang = -EARTH_ROTATION_RAD_S * t_s;
        Ok((rot_z(p, ang), rot_z(v, ang)))
    }

    fn state_eci(&self, sat: SatId, t_s: f64) -> Result<(Vec3, Vec3)> {
        let el = self.elements(sat)?;
        let a = (self.earth_radius_km + el.altitude_km) * 1e3;
        let n = (EARTH_MU_M3_S2 / a.powi(3)).sqrt();
        let u = el.phase_deg.to_radians() + n * t_s;
        let (su, cu) = u.sin_cos();
        let in_plane = [a * cu, a * su, 0.0];
        let vel_plane = [-a * n * su, a * n * cu, 0.0];
        let i = el.inclination_deg.to_radians();
        let raan = el.raan_deg.to_radians();
        let orient = |p: Vec3| rot_z(rot_x(p, i), raan);
        Ok((orient(in_plane), orient(vel_plane)))
    }
}

fn rot_z(v: Vec3, ang: f64) -> Vec3 {
    let (s, c) = ang.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

fn rot_x(v: Vec3, ang: f64) -> Vec3 {
    let (s, c) = ang.sin_cos();
    [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]]
}

/// Kepler period for a circular orbit at the given altitude.
pub fn orbital_period_s(altitude_km: f64, earth_radius_km: f64) -> f64 {
    let a = (earth_radius_km + altitude_km) * 1e3;
    2.0 * std::f64::consts::PI * (a.powi(3) / EARTH_MU_M3_S2).sqrt()
}

/// A ground target fixed on the Earth surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: usize,
    pub lat_deg: f64,
    pub lon_deg: f64,
}

/// Earth-fixed position of a surface point.
pub fn surface_point_ecef(lat_deg: f64, lon_deg: f64, earth_radius_km: f64) -> Vec3 {
    let lat = lat_deg.to_radians();
    let lon = lon_deg.to_radians();
    let r = earth_radius_km * 1e3;
    [
        r * lat.cos() * lon.cos(),
        r * lat.cos() * lon.sin(),
        r * lat.sin(),
    ]
}

/// Angle between the satellite's nadir direction and the line of sight.
pub fn off_nadir_deg(sat_pos: Vec3, ground_pos: Vec3) -> f64 {
    let nadir = scale(unit(sat_pos), -1.0);
    let los = unit(sub(ground_pos, sat_pos));
    dot(nadir, los).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Elevation of the satellite above the local horizon of a ground point.
pub fn elevation_deg(ground_pos: Vec3, sat_pos: Vec3) -> f64 {
    let up = unit(ground_pos);
    let los = unit(sub(sat_pos, ground_pos));
    dot(up, los).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Incidence angle at the ground point, measured from local vertical.
pub fn incidence_deg(ground_pos: Vec3, sat_pos: Vec3) -> f64 {
    90.0 - elevation_deg(ground_pos, sat_pos)
}

/// A contiguous interval during which a target is observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityWindow {
    pub sat: SatId,
    pub target_id: usize,
    /// Orbit counter of the pass, start time divided by the orbital period.
    pub orbit_index: usize,
    pub start_s: f64,
    pub end_s: f64,
}

/// Sweeps `[t_begin, t_end]` and returns all visibility windows, sorted by
/// (satellite, target, start). Edges are refined by bisection well below
/// [`WINDOW_EDGE_TOLERANCE_S`].
pub fn compute_visibility_windows(
    spec: &ConstellationSpec,
    sats: &[SatId],
    targets: &[Target],
    t_begin_s: f64,
    t_end_s: f64,
    max_off_nadir_deg: f64,
    step_s: f64,
) -> Result<Vec<VisibilityWindow>> {
    if !(t_end_s > t_begin_s) || !(step_s > 0.0) {
        return Err(Error::Domain(format!(
            "bad sweep interval [{t_begin_s}, {t_end_s}] step {step_s}"
        )));
    }
    let mut out = Vec::new();
    for &sat in sats {
        let period = spec.period_s(sat)?;
        for tgt in targets {
            let tgt_pos = surface_point_ecef(tgt.lat_deg, tgt.lon_deg, spec.earth_radius_km);
            let margin = |t: f64| -> Result<f64> {
                let sat_pos = spec.propagate(sat, t)?;
                let m1 = max_off_nadir_deg - off_nadir_deg(sat_pos, tgt_pos);
                let m2 = elevation_deg(tgt_pos, sat_pos);
                Ok(m1.min(m2))
            };
            let mut t = t_begin_s;
            let mut prev_t = t_begin_s;
            let mut prev_vis = margin(t)? >= 0.0;
            let mut open_start = if prev_vis { Some(t_begin_s) } else { None };
            while t < t_end_s {
                t = (t + step_s).min(t_end_s);
                let vis = margin(t)? >= 0.0;
                if vis != prev_vis {
                    let edge = refine_edge(&margin, prev_t, t)?;
                    if vis {
                        open_start = Some(edge);
                    } else if let Some(s) = open_start.take() {
                        push_window(&mut out, sat, tgt.id, period, s, edge);
                    }
                }
                prev_t = t;
                prev_vis = vis;
            }
            if let Some(s) = open_start {
                push_window(&mut out, sat, tgt.id, period, s, t_end_s);
            }
        }
    }
    out.sort_by(|a, b| {
        (a.sat, a.target_id)
            .cmp(&(b.sat, b.target_id))
            .then(a.start_s.total_cmp(&b.start_s))
    });
    Ok(out)
}

fn push_window(
    out: &mut Vec<VisibilityWindow>,
    sat: SatId,
    target_id: usize,
    period: f64,
    start: f64,
    end: f64,
) {
    if end > start {
        out.push(VisibilityWindow {
            sat,
            target_id,
            orbit_index: (start / period).floor() as usize,
            start_s: start,
            end_s: end,
        });
    }
}

fn refine_edge<F: Fn(f64) -> Result<f64>>(margin: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    // Invariant: sign(margin) differs between lo and hi.
    let flo = margin(lo)?;
    for _ in 0..40 {
        if hi - lo < WINDOW_EDGE_TOLERANCE_S * 0.1 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (margin(mid)? >= 0.0) == (flo >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A ground station with its elevation mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStation {
    pub id: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub min_elevation_deg: f64,
}

/// The ground segment; order is the tie-break order for contact selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStationSet {
    pub stations: Vec<GroundStation>,
}

/// Polar-network station list shipped as the default ground segment
/// (approximate coordinates of a commercial 26-site network).
const DEFAULT_STATIONS_CSV: &str = include_str!("../data/ground_stations.csv");

impl GroundStationSet {
    pub fn validate(&self) -> Result<()> {
        if self.stations.is_empty() {
            return Err(Error::Config("ground station set is empty".into()));
        }
        for s in &self.stations {
            if !(-90.0..=90.0).contains(&s.lat_deg) {
                return Err(Error::Config(format!(
                    "station {}: latitude {} outside [-90, 90]",
                    s.id, s.lat_deg
                )));
            }
            if !(0.0..90.0).contains(&s.min_elevation_deg) {
                return Err(Error::Config(format!(
                    "station {}: elevation mask {} outside [0, 90)",
                    s.id, s.min_elevation_deg
                )));
            }
        }
        Ok(())
    }

    /// Parses a `name,lat_deg,lon_deg` CSV with one station per line.
    pub fn from_csv(text: &str, min_elevation_deg: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut stations = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("station csv: {e}")))?;
            if rec.len() < 3 {
                return Err(Error::Parse(format!(
                    "station csv: expected name,lat,lon, got {} fields",
                    rec.len()
                )));
            }
            let lat: f64 = rec[1]
                .parse()
                .map_err(|_| Error::Parse(format!("station csv: bad latitude {:?}", &rec[1])))?;
            let lon: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Parse(format!("station csv: bad longitude {:?}", &rec[2])))?;
            stations.push(GroundStation {
                id: rec[0].to_string(),
                lat_deg: lat,
                lon_deg: lon,
                min_elevation_deg,
            });
        }
        let set = GroundStationSet { stations };
        set.validate()?;
        Ok(set)
    }

    /// The built-in polar-heavy default network.
    pub fn builtin_default(min_elevation_deg: f64) -> Self {
        Self::from_csv(DEFAULT_STATIONS_CSV, min_elevation_deg)
            .expect("embedded station list is valid")
    }
}

/// Best edge-ring contact for one station at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactInfo {
    pub station_index: usize,
    pub sat_index: usize,
    pub slant_range_m: f64,
    pub elevation_deg: f64,
}

/// For each station, the highest-elevation edge satellite above its mask.
/// Stations without any satellite in view are omitted.
pub fn gs_contacts(
    spec: &ConstellationSpec,
    gs: &GroundStationSet,
    t_s: f64,
) -> Result<Vec<ContactInfo>> {
    let sat_pos: Vec<Vec3> = (0..spec.n_sats_edge)
        .map(|i| spec.propagate(SatId::Edge(i), t_s))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (gi, st) in gs.stations.iter().enumerate() {
        let gpos = surface_point_ecef(st.lat_deg, st.lon_deg, spec.earth_radius_km);
        let mut best: Option<ContactInfo> = None;
        for (si, &sp) in sat_pos.iter().enumerate() {
            let el = elevation_deg(gpos, sp);
            if el < st.min_elevation_deg {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => el > b.elevation_deg,
            };
            if better {
                best = Some(ContactInfo {
                    station_index: gi,
                    sat_index: si,
                    slant_range_m: norm(sub(sp, gpos)),
                    elevation_deg: el,
                });
            }
        }
        if let Some(b) = best {
            out.push(b);
        }
    }
    Ok(out)
}

/// Chord length between ring neighbors: 2 (R_E + h) sin(pi / N).
pub fn isl_slant_range_km(n_sats: usize, altitude_km: f64, earth_radius_km: f64) -> Result<f64> {
    if n_sats < 2 {
        return Err(Error::InvalidTopology(format!(
            "ring needs at least 2 satellites, got {n_sats}"
        )));
    }
    let r = earth_radius_km + altitude_km;
    Ok(2.0 * r * (std::f64::consts::PI / n_sats as f64).sin())
}

/// Slant range to a satellite at altitude `h` seen at elevation `el`.
pub fn slant_range_km(elevation_deg: f64, altitude_km: f64, earth_radius_km: f64) -> f64 {
    let r = earth_radius_km;
    let se = elevation_deg.to_radians().sin();
    ((r * r * se * se + 2.0 * r * altitude_km + altitude_km * altitude_km).sqrt()) - r * se
}

//! Declarative run configuration: a scenario file names every model
//! constant one run reads, so experiments are diffable and repeatable.
//! TOML is the native format; JSON is accepted on load and chosen by
//! file extension on save.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::{AgilitySpec, FrameSpec, OpticsSpec};
use crate::atmosphere::{TurbulenceModel, DEFAULT_CN2_THRESHOLD};
use crate::compute::{PlatformSpec, WorkloadSpec};
use crate::geometry::{
    cross, norm, scale, sub, ConstellationSpec, GroundStation, GroundStationSet, SatId, Target,
    EARTH_RADIUS_KM,
};
use crate::network::LinkSpec;
use crate::obs_sched::SolverKind;
use crate::pipeline::EpisodeConfig;
use crate::proc_sched::RawSlotConvention;
use crate::{Error, Result};

/// A processor choice: a catalog name or a full custom block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlatformRef {
    Named(String),
    Custom(PlatformSpec),
}

impl PlatformRef {
    pub fn resolve(&self) -> Result<PlatformSpec> {
        match self {
            PlatformRef::Named(name) => PlatformSpec::by_name(name),
            PlatformRef::Custom(p) => {
                p.validate()?;
                Ok(p.clone())
            }
        }
    }
}

/// Where the ground segment comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StationSource {
    /// The built-in polar-heavy network.
    Builtin { min_elevation_deg: f64 },
    /// A CSV file with id, latitude and longitude columns.
    File { path: PathBuf, min_elevation_deg: f64 },
    /// Stations written out in the scenario itself.
    Inline { stations: Vec<GroundStation> },
}

impl StationSource {
    pub fn resolve(&self) -> Result<GroundStationSet> {
        match self {
            StationSource::Builtin { min_elevation_deg } => {
                Ok(GroundStationSet::builtin_default(*min_elevation_deg))
            }
            StationSource::File { path, min_elevation_deg } => {
                let text = std::fs::read_to_string(path)?;
                GroundStationSet::from_csv(&text, *min_elevation_deg)
            }
            StationSource::Inline { stations } => {
                let set = GroundStationSet { stations: stations.clone() };
                set.validate()?;
                Ok(set)
            }
        }
    }
}

/// Experiment-shaping knobs; the defaults match the shipped studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentKnobs {
    /// Instance sizes for the scheduling benchmark.
    pub observe_target_counts: Vec<usize>,
    /// Contended instances per size.
    pub observe_instances: usize,
    /// Genetic-solver restarts averaged per instance.
    pub ga_restarts: usize,
    /// Monte Carlo realizations per acquisition in the gating study.
    pub mc_realizations: usize,
    /// Consecutive scheduling horizons in the rescheduling study.
    pub rescheduling_horizons: usize,
    /// Constellation-wide target counts for the rescheduling study.
    pub rescheduling_target_counts: Vec<usize>,
    /// Satellites sharing the rescheduling instances.
    pub rescheduling_sats: usize,
    /// Slot durations for the feasibility sweep, s.
    pub sweep_t_slots: Vec<f64>,
    /// Onboard platforms swept over the ring.
    pub sweep_platforms: Vec<String>,
    /// Load grid step for the capacity curves, FPS.
    pub capacity_load_step_fps: f64,
}

impl Default for ExperimentKnobs {
    fn default() -> Self {
        ExperimentKnobs {
            observe_target_counts: vec![80, 100, 120, 140],
            observe_instances: 30,
            ga_restarts: 20,
            mc_realizations: 1000,
            rescheduling_horizons: 10,
            rescheduling_target_counts: vec![150, 200, 250, 300],
            rescheduling_sats: 4,
            sweep_t_slots: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            sweep_platforms: vec![
                "jetson_agx".into(),
                "jetson_nano".into(),
                "satellite_cpu".into(),
            ],
            capacity_load_step_fps: 10.0,
        }
    }
}

/// One fully-specified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    /// Monte Carlo replicas of the episode.
    pub replicas: usize,
    pub constellation: ConstellationSpec,
    #[serde(default = "default_observers")]
    pub observers: Vec<SatId>,
    pub targets: Vec<Target>,
    pub ground_stations: StationSource,
    #[serde(default)]
    pub agility: AgilitySpec,
    #[serde(default)]
    pub optics: OpticsSpec,
    #[serde(default)]
    pub frame: FrameSpec,
    #[serde(default = "WorkloadSpec::detection_default")]
    pub workload: WorkloadSpec,
    pub edge_platform: Option<PlatformRef>,
    pub ground_platform: Option<PlatformRef>,
    #[serde(default = "LinkSpec::baseline")]
    pub link: LinkSpec,
    #[serde(default = "TurbulenceModel::default_lognormal")]
    pub turbulence: TurbulenceModel,
    #[serde(default = "default_cn2_threshold")]
    pub cn2_threshold: f64,
    #[serde(default)]
    pub gate_acquisitions: bool,
    #[serde(default = "default_exec_cov")]
    pub exec_cov: f64,
    pub t_slot_s: f64,
    pub horizon_s: f64,
    #[serde(default = "default_max_off_nadir")]
    pub max_off_nadir_deg: f64,
    #[serde(default = "default_epoch_step")]
    pub epoch_step_s: f64,
    #[serde(default = "default_scan_step")]
    pub window_scan_step_s: f64,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default = "default_convention")]
    pub convention: RawSlotConvention,
    #[serde(default)]
    pub experiments: ExperimentKnobs,
}

fn default_observers() -> Vec<SatId> {
    vec![SatId::Edge(0)]
}

fn default_cn2_threshold() -> f64 {
    DEFAULT_CN2_THRESHOLD
}

fn default_exec_cov() -> f64 {
    0.13
}

fn default_max_off_nadir() -> f64 {
    35.0
}

fn default_epoch_step() -> f64 {
    5.0
}

fn default_scan_step() -> f64 {
    2.0
}

fn default_solver() -> SolverKind {
    SolverKind::Ga
}

fn default_convention() -> RawSlotConvention {
    RawSlotConvention::RawAtCaptureSlot
}

impl Scenario {
    /// Reports every validation problem at once, not just the first.
    pub fn validate_all(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut check = |r: Result<()>| {
            if let Err(e) = r {
                errs.push(e.to_string());
            }
        };
        check(self.constellation.validate());
        check(self.agility.validate());
        check(self.link.validate());
        check(self.turbulence.validate());
        check(self.ground_stations.resolve().map(|_| ()));
        if let Some(p) = &self.edge_platform {
            check(p.resolve().map(|_| ()));
        }
        if let Some(p) = &self.ground_platform {
            check(p.resolve().map(|_| ()));
        }
        if self.name.trim().is_empty() {
            errs.push("scenario name is empty".into());
        }
        if self.replicas == 0 {
            errs.push("replicas must be at least 1".into());
        }
        if self.workload.rho < 1.0 {
            errs.push(format!(
                "compression ratio {} must be at least 1: results cannot outgrow the raw frames",
                self.workload.rho
            ));
        }
        if !(self.workload.flops_per_image > 0.0) {
            errs.push("per-image work must be positive".into());
        }
        if self.targets.is_empty() {
            errs.push("target list is empty".into());
        }
        let mut ids: Vec<usize> = self.targets.iter().map(|t| t.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.targets.len() {
            errs.push("target ids are not unique".into());
        }
        if self.observers.is_empty() {
            errs.push("observer list is empty".into());
        }
        for o in &self.observers {
            let ok = match o {
                SatId::Edge(i) => *i < self.constellation.n_sats_edge,
                SatId::Obs(i) => *i < self.constellation.obs_sats.len(),
            };
            if !ok {
                errs.push(format!("observer {o} is outside the constellation"));
            }
        }
        if self.edge_platform.is_none() && self.ground_platform.is_none() {
            errs.push("no processor anywhere: need an edge or a ground platform".into());
        }
        if !(self.t_slot_s > 0.0) {
            errs.push(format!("slot duration {} must be positive", self.t_slot_s));
        }
        if !(self.horizon_s > self.t_slot_s) {
            errs.push(format!(
                "horizon {} must exceed one slot {}",
                self.horizon_s, self.t_slot_s
            ));
        }
        if !(self.cn2_threshold > 0.0) {
            errs.push("turbulence threshold must be positive".into());
        }
        if !(self.exec_cov >= 0.0 && self.exec_cov < 1.0) {
            errs.push(format!("execution-time variation {} outside [0, 1)", self.exec_cov));
        }
        if !(self.epoch_step_s > 0.0) || !(self.window_scan_step_s > 0.0) {
            errs.push("discretization steps must be positive".into());
        }
        if !(self.max_off_nadir_deg > 0.0 && self.max_off_nadir_deg < 90.0) {
            errs.push(format!(
                "off-nadir limit {} outside (0, 90) degrees",
                self.max_off_nadir_deg
            ));
        }
        let k = &self.experiments;
        if k.observe_target_counts.is_empty() {
            errs.push("observe experiment needs at least one instance size".into());
        }
        if k.observe_instances == 0 || k.ga_restarts == 0 {
            errs.push("observe experiment needs instances and restarts".into());
        }
        if k.mc_realizations == 0 {
            errs.push("gating study needs at least one realization".into());
        }
        if k.rescheduling_horizons == 0 {
            errs.push("rescheduling study needs at least one horizon".into());
        }
        if k.rescheduling_sats == 0
            || k.rescheduling_target_counts.is_empty()
            || k.rescheduling_target_counts.iter().any(|&c| c < k.rescheduling_sats)
        {
            errs.push("rescheduling study needs satellites and at least as many targets".into());
        }
        if k.sweep_t_slots.is_empty()
            || k.sweep_t_slots.iter().any(|&t| !(t > 0.0))
            || k.sweep_t_slots.windows(2).any(|w| w[0] >= w[1])
        {
            errs.push("sweep slot durations must be positive and ascending".into());
        }
        for name in &k.sweep_platforms {
            if let Err(e) = PlatformSpec::by_name(name) {
                errs.push(e.to_string());
            }
        }
        if !(k.capacity_load_step_fps > 0.0) {
            errs.push("capacity load step must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Resolves references into the concrete episode configuration.
    pub fn to_episode_config(&self) -> Result<EpisodeConfig> {
        Ok(EpisodeConfig {
            constellation: self.constellation.clone(),
            observers: self.observers.clone(),
            targets: self.targets.clone(),
            ground_stations: self.ground_stations.resolve()?,
            agility: self.agility,
            optics: self.optics,
            frame: self.frame.clone(),
            workload: self.workload,
            edge_platform: self.edge_platform.as_ref().map(|p| p.resolve()).transpose()?,
            ground_platform: self.ground_platform.as_ref().map(|p| p.resolve()).transpose()?,
            link: self.link.clone(),
            turbulence: self.turbulence.clone(),
            cn2_threshold: self.cn2_threshold,
            gate_acquisitions: self.gate_acquisitions,
            exec_cov: self.exec_cov,
            t_slot_s: self.t_slot_s,
            horizon_s: self.horizon_s,
            max_off_nadir_deg: self.max_off_nadir_deg,
            epoch_step_s: self.epoch_step_s,
            window_scan_step_s: self.window_scan_step_s,
            solver: self.solver,
            convention: self.convention,
        })
    }

    /// The shipped episode: a 23-satellite ring at 617 km imaging 32
    /// along-track targets over 2000 s, entering over the Arctic ground
    /// network and losing it toward the equator.
    pub fn baseline() -> Scenario {
        let constellation = ConstellationSpec {
            n_sats_edge: 23,
            altitude_e_km: 617.0,
            inclination_e_deg: 98.6,
            raan_e_deg: 0.0,
            phase_e_deg: 80.0,
            n_planes: 1,
            obs_sats: Vec::new(),
            earth_radius_km: EARTH_RADIUS_KM,
        };
        let targets = (0..32)
            .map(|k| {
                let t = 70.0 + 58.0 * k as f64;
                let off_km = if k % 2 == 0 { 25.0 } else { -25.0 };
                cross_track_target(&constellation, SatId::Edge(0), t, off_km, k)
                    .expect("baseline geometry is well-formed")
            })
            .collect();
        Scenario {
            name: "worldview3_baseline".into(),
            seed: 1,
            replicas: 100,
            constellation,
            observers: default_observers(),
            targets,
            ground_stations: StationSource::Builtin { min_elevation_deg: 5.0 },
            agility: AgilitySpec::default(),
            optics: OpticsSpec::default(),
            frame: FrameSpec::default(),
            workload: WorkloadSpec::detection_default(),
            edge_platform: Some(PlatformRef::Named("jetson_agx".into())),
            ground_platform: Some(PlatformRef::Named("cloud_cpu".into())),
            link: LinkSpec::baseline(),
            turbulence: TurbulenceModel::default_lognormal(),
            cn2_threshold: DEFAULT_CN2_THRESHOLD,
            gate_acquisitions: false,
            exec_cov: default_exec_cov(),
            t_slot_s: 10.0,
            horizon_s: 2000.0,
            max_off_nadir_deg: default_max_off_nadir(),
            epoch_step_s: default_epoch_step(),
            window_scan_step_s: default_scan_step(),
            solver: default_solver(),
            convention: default_convention(),
            experiments: ExperimentKnobs::default(),
        }
    }
}

/// A surface point offset cross-track from the sub-satellite point.
fn cross_track_target(
    spec: &ConstellationSpec,
    sat: SatId,
    t_s: f64,
    offset_km: f64,
    id: usize,
) -> Result<Target> {
    let p = spec.propagate(sat, t_s)?;
    let v = sub(spec.propagate(sat, t_s + 1.0)?, p);
    let c = cross(p, v);
    let eps = offset_km / spec.earth_radius_km;
    let dir = [
        p[0] / norm(p) + eps * c[0] / norm(c),
        p[1] / norm(p) + eps * c[1] / norm(c),
        p[2] / norm(p) + eps * c[2] / norm(c),
    ];
    let g = scale(dir, spec.earth_radius_km * 1e3 / norm(dir));
    Ok(Target {
        id,
        lat_deg: (g[2] / norm(g)).asin().to_degrees(),
        lon_deg: g[1].atan2(g[0]).to_degrees(),
    })
}

/// Loads and fully validates a scenario; `.json` selects JSON, anything
/// else parses as TOML.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let scenario: Scenario = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
    };
    scenario.validate_all()?;
    Ok(scenario)
}

/// Writes a scenario in the format the extension names.
pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(scenario)
            .map_err(|e| Error::Parse(format!("serializing scenario: {e}")))?
    } else {
        toml::to_string_pretty(scenario)
            .map_err(|e| Error::Parse(format!("serializing scenario: {e}")))?
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_validates_and_resolves() {
        let s = Scenario::baseline();
        s.validate_all().unwrap();
        let cfg = s.to_episode_config().unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.targets.len(), 32);
        assert_eq!(cfg.ground_stations.stations.len(), 26);
        assert_eq!(cfg.edge_platform.as_ref().unwrap().name, "jetson_agx");
        assert_eq!(cfg.ground_platform.as_ref().unwrap().name, "cloud_cpu");
    }

    #[test]
    fn baseline_targets_sit_under_the_observer_track() {
        let s = Scenario::baseline();
        // First targets are deep in the Arctic, later ones well south.
        assert!(s.targets[0].lat_deg > 70.0, "got {}", s.targets[0].lat_deg);
        assert!(s.targets[31].lat_deg < 0.0, "got {}", s.targets[31].lat_deg);
    }

    #[test]
    fn toml_and_json_round_trips_are_lossless() {
        let s = Scenario::baseline();
        let dir = std::env::temp_dir().join("leo-edge-scenario-roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let t = dir.join("s.toml");
        let j = dir.join("s.json");
        save_scenario(&t, &s).unwrap();
        save_scenario(&j, &s).unwrap();
        assert_eq!(load_scenario(&t).unwrap(), s);
        assert_eq!(load_scenario(&j).unwrap(), s);
    }

    #[test]
    fn every_validation_problem_is_reported_at_once() {
        let mut s = Scenario::baseline();
        s.replicas = 0;
        s.workload.rho = 0.5;
        s.targets.clear();
        s.observers = vec![SatId::Edge(99)];
        s.t_slot_s = -1.0;
        let err = s.validate_all().unwrap_err();
        match err {
            Error::Validation(list) => {
                assert!(list.len() >= 5, "got {list:?}");
                assert!(list.iter().any(|m| m.contains("replicas")));
                assert!(list.iter().any(|m| m.contains("compression ratio")));
                assert!(list.iter().any(|m| m.contains("target list")));
                assert!(list.iter().any(|m| m.contains("outside the constellation")));
                assert!(list.iter().any(|m| m.contains("slot duration")));
            }
            other => panic!("expected a validation list, got {other}"),
        }
    }

    #[test]
    fn unknown_platform_names_are_rejected() {
        let mut s = Scenario::baseline();
        s.edge_platform = Some(PlatformRef::Named("abacus".into()));
        let err = s.validate_all().unwrap_err();
        assert!(err.to_string().contains("abacus"));
    }

    #[test]
    fn parse_errors_name_the_file() {
        let dir = std::env::temp_dir().join("leo-edge-scenario-parse");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("broken.toml");
        std::fs::write(&p, "name = [unclosed").unwrap();
        let err = load_scenario(&p).unwrap_err();
        assert!(err.to_string().contains("broken.toml"));
    }
}

//! Slotted end-to-end episode simulation.
//!
//! Observations are captured per the solved schedule. The frames of an
//! observation captured in slot k scatter over the ring during k, are
//! processed during k+1 and gathered toward the ground during k+2; the
//! delivery deadline is the end of slot k+2. Schedules and allocations
//! are planned once per episode; Monte Carlo replicas re-draw only the
//! stochastic parts, turbulence and execution times.

use serde::{Deserialize, Serialize};

use crate::acquisition::{
    discretize_windows, AgilitySpec, FrameSpec, OpticsSpec,
};
use crate::atmosphere::{Cn2Sampler, TurbulenceModel};
use crate::compute::{power_w, ExecTimeModel, PlatformSpec, WorkloadSpec};
use crate::geometry::{
    compute_visibility_windows, elevation_deg, gs_contacts, isl_slant_range_km, norm, sub,
    surface_point_ecef, ConstellationSpec, GroundStationSet, SatId, Target, SPEED_OF_LIGHT_M_S,
};
use crate::network::LinkSpec;
use crate::obs_sched::{solve, Schedule, SchedulingInstance, SolverKind, DEFAULT_NODE_CAP};
use crate::proc_sched::{
    account_energy, build_snapshot, solve as solve_allocation, Allocation, ProcessingInstance,
    RawSlotConvention, SnapshotConfig,
};
use crate::rng::stream;
use crate::{Error, Result};

/// Everything one episode needs, resolved to concrete numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub constellation: ConstellationSpec,
    /// Satellites that image; everything on the ring can relay.
    pub observers: Vec<SatId>,
    pub targets: Vec<Target>,
    pub ground_stations: GroundStationSet,
    pub agility: AgilitySpec,
    pub optics: OpticsSpec,
    pub frame: FrameSpec,
    pub workload: WorkloadSpec,
    /// Platform run on every ring satellite; None sends everything down.
    pub edge_platform: Option<PlatformSpec>,
    /// Ground processor reachable through the feeder link.
    pub ground_platform: Option<PlatformSpec>,
    pub link: LinkSpec,
    pub turbulence: TurbulenceModel,
    pub cn2_threshold: f64,
    /// Whether acquisitions are gated on a turbulence draw.
    pub gate_acquisitions: bool,
    /// Coefficient of variation of per-image execution time on jittery
    /// platforms; 0 disables the stochastic execution model.
    pub exec_cov: f64,
    pub t_slot_s: f64,
    pub horizon_s: f64,
    pub max_off_nadir_deg: f64,
    /// Step of the candidate epoch grid inside each visibility window.
    pub epoch_step_s: f64,
    /// Step of the coarse visibility scan.
    pub window_scan_step_s: f64,
    pub solver: SolverKind,
    pub convention: RawSlotConvention,
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        self.constellation.validate()?;
        self.ground_stations.validate()?;
        self.agility.validate()?;
        self.link.validate()?;
        self.turbulence.validate()?;
        if self.observers.is_empty() {
            return Err(Error::Config("episode needs at least one observer".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Config("episode needs at least one target".into()));
        }
        if !(self.t_slot_s > 0.0) {
            return Err(Error::Config(format!("slot duration {} must be positive", self.t_slot_s)));
        }
        if !(self.horizon_s > self.t_slot_s) {
            return Err(Error::Config(format!(
                "horizon {} must exceed one slot {}",
                self.horizon_s, self.t_slot_s
            )));
        }
        if !(self.cn2_threshold > 0.0) {
            return Err(Error::Config("turbulence threshold must be positive".into()));
        }
        if !(self.exec_cov >= 0.0 && self.exec_cov < 1.0) {
            return Err(Error::Config(format!(
                "execution-time variation {} outside [0, 1)",
                self.exec_cov
            )));
        }
        if self.edge_platform.is_none() && self.ground_platform.is_none() {
            return Err(Error::Config("no processor anywhere: need edge or ground".into()));
        }
        Ok(())
    }
}

/// Compensated accumulator; order-stable totals over many small terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Energy split by cause, J.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub maneuver_j: f64,
    pub scatter_isl_j: f64,
    pub scatter_dl_j: f64,
    pub processing_edge_j: f64,
    pub processing_ground_j: f64,
    pub gather_isl_j: f64,
    pub gather_dl_j: f64,
}

impl EnergySplit {
    pub fn total_j(&self) -> f64 {
        self.maneuver_j
            + self.scatter_isl_j
            + self.scatter_dl_j
            + self.processing_edge_j
            + self.processing_ground_j
            + self.gather_isl_j
            + self.gather_dl_j
    }

    /// Constellation-side energy; ground processing runs on grid power.
    pub fn satellite_j(&self) -> f64 {
        self.total_j() - self.processing_ground_j
    }
}

/// Episode-wide running totals with compensated summation per category.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    maneuver: KahanSum,
    scatter_isl: KahanSum,
    scatter_dl: KahanSum,
    processing_edge: KahanSum,
    processing_ground: KahanSum,
    gather_isl: KahanSum,
    gather_dl: KahanSum,
}

impl EnergyLedger {
    pub fn add(&mut self, split: &EnergySplit) {
        self.maneuver.add(split.maneuver_j);
        self.scatter_isl.add(split.scatter_isl_j);
        self.scatter_dl.add(split.scatter_dl_j);
        self.processing_edge.add(split.processing_edge_j);
        self.processing_ground.add(split.processing_ground_j);
        self.gather_isl.add(split.gather_isl_j);
        self.gather_dl.add(split.gather_dl_j);
    }

    pub fn totals(&self) -> EnergySplit {
        EnergySplit {
            maneuver_j: self.maneuver.value(),
            scatter_isl_j: self.scatter_isl.value(),
            scatter_dl_j: self.scatter_dl.value(),
            processing_edge_j: self.processing_edge.value(),
            processing_ground_j: self.processing_ground.value(),
            gather_isl_j: self.gather_isl.value(),
            gather_dl_j: self.gather_dl.value(),
        }
    }
}

/// One ground contact choice: station, relaying satellite, rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsChoice {
    pub station_index: usize,
    pub station_id: String,
    pub sat_index: usize,
    pub rate_bps: f64,
    pub slant_range_m: f64,
}

/// Highest-rate (station, edge satellite) pair at `t_s`; ties fall to the
/// lexicographically first station id. None when nothing is in view.
pub fn select_gs(
    spec: &ConstellationSpec,
    gs: &GroundStationSet,
    link: &LinkSpec,
    t_s: f64,
) -> Result<Option<GsChoice>> {
    let mut best: Option<GsChoice> = None;
    for c in gs_contacts(spec, gs, t_s)? {
        let rate = link.downlink_rate_bps(c.slant_range_m)?;
        if rate <= 0.0 {
            continue;
        }
        let id = &gs.stations[c.station_index].id;
        let better = match &best {
            None => true,
            Some(b) => {
                rate > b.rate_bps || (rate == b.rate_bps && id.as_str() < b.station_id.as_str())
            }
        };
        if better {
            best = Some(GsChoice {
                station_index: c.station_index,
                station_id: id.clone(),
                sat_index: c.sat_index,
                rate_bps: rate,
                slant_range_m: c.slant_range_m,
            });
        }
    }
    Ok(best)
}

/// Best station rate for one specific ring satellite at `t_s`; the raw
/// fraction beams straight from the capturing satellite.
pub fn contact_rate_for_sat(
    spec: &ConstellationSpec,
    gs: &GroundStationSet,
    link: &LinkSpec,
    sat_index: usize,
    t_s: f64,
) -> Result<Option<GsChoice>> {
    let sp = spec.propagate(SatId::Edge(sat_index), t_s)?;
    let mut best: Option<GsChoice> = None;
    for (gi, st) in gs.stations.iter().enumerate() {
        let gpos = surface_point_ecef(st.lat_deg, st.lon_deg, spec.earth_radius_km);
        let el = elevation_deg(gpos, sp);
        if el < st.min_elevation_deg {
            continue;
        }
        let d = norm(sub(sp, gpos));
        let rate = link.downlink_rate_bps(d)?;
        if rate <= 0.0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                rate > b.rate_bps || (rate == b.rate_bps && st.id.as_str() < b.station_id.as_str())
            }
        };
        if better {
            best = Some(GsChoice {
                station_index: gi,
                station_id: st.id.clone(),
                sat_index,
                rate_bps: rate,
                slant_range_m: d,
            });
        }
    }
    Ok(best)
}

/// Ring index whose satellite carries this observation's frames: the
/// observer itself when co-hosted, otherwise the closest ring satellite
/// at capture time. A detached observer hands its frames over without a
/// ledgered cross-link cost.
fn source_ring_index(spec: &ConstellationSpec, sat: SatId, t_s: f64) -> Result<usize> {
    match sat {
        SatId::Edge(i) => Ok(i),
        SatId::Obs(_) => {
            let op = spec.propagate(sat, t_s)?;
            let mut best = (0usize, f64::INFINITY);
            for i in 0..spec.n_sats_edge {
                let d = norm(sub(spec.propagate(SatId::Edge(i), t_s)?, op));
                if d < best.1 {
                    best = (i, d);
                }
            }
            Ok(best.0)
        }
    }
}

/// One capture slot with its solved allocation.
#[derive(Debug, Clone)]
pub struct PlannedSlot {
    pub slot: usize,
    pub source: usize,
    /// Candidate ids captured here.
    pub otw_ids: Vec<usize>,
    pub n_images: usize,
    pub raw_contact: Option<GsChoice>,
    pub gather_contact: Option<GsChoice>,
    pub instance: Option<ProcessingInstance>,
    pub allocation: Option<Allocation>,
    /// Deterministic per-slot energy at the planned operating point,
    /// maneuvers excluded.
    pub energy: EnergySplit,
    pub feasible: bool,
}

/// Everything decided before the first replica runs.
pub struct EpisodePlan {
    pub instance: SchedulingInstance,
    pub schedule: Schedule,
    pub solver_used: SolverKind,
    pub slots: Vec<PlannedSlot>,
    pub exec_models: ExecModels,
    pub t_prop_hop_s: f64,
    pub t_delay_s: f64,
}

/// Fitted execution-time models, one per distinct jittery platform.
#[derive(Default)]
pub struct ExecModels {
    entries: Vec<(String, ExecTimeModel)>,
}

impl ExecModels {
    pub fn get(&self, name: &str) -> Option<&ExecTimeModel> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

/// Delivery record for one scheduled observation in one replica.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationOutcome {
    pub otw_id: usize,
    pub target_id: usize,
    pub sat: SatId,
    pub time_s: f64,
    pub capture_slot: usize,
    pub profit: f64,
    /// Turbulence draw cancelled the acquisition.
    pub gated: bool,
    /// No feasible allocation or no ground contact for the results.
    pub dropped: bool,
    pub delivered: bool,
    /// When the last result bit reached the ground, absolute seconds.
    pub completion_s: Option<f64>,
    pub energy: EnergySplit,
}

/// Per-slot telemetry of one replica.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub t_start_s: f64,
    pub n_observations: usize,
    pub n_images: usize,
    pub source: usize,
    pub station: Option<String>,
    pub downlink_sat: Option<usize>,
    pub raw_rate_bps: f64,
    pub result_rate_bps: f64,
    pub ground_share: f64,
    pub processing_actual_s: f64,
    pub energy_j: f64,
    pub delivered: usize,
}

/// One replica's full result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub replica: usize,
    pub observations: Vec<ObservationOutcome>,
    pub slots: Vec<SlotRecord>,
    pub totals: EnergySplit,
    pub delivered: usize,
    pub gated: usize,
    pub dropped: usize,
}

/// Distribution of one observation's constellation-side energy across
/// replicas; ground processing runs on grid power and is excluded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationStats {
    pub otw_id: usize,
    pub target_id: usize,
    pub time_s: f64,
    pub n_delivered: usize,
    pub mean_j: f64,
    pub q05_j: f64,
    pub q95_j: f64,
}

/// Replica-averaged episode metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub replicas: usize,
    pub scheduled: usize,
    pub mean_delivered: f64,
    pub mean_gated: f64,
    pub mean_dropped: f64,
    pub mean_profit: f64,
    pub mean_energy: EnergySplit,
    /// Constellation power averaged over the horizon.
    pub mean_power_w: f64,
    /// Same with maneuvers excluded: the processing and transport power.
    pub mean_power_excl_maneuver_w: f64,
    pub per_observation: Vec<ObservationStats>,
}

/// Solves the schedule and every slot allocation once.
pub fn plan_episode(cfg: &EpisodeConfig, seed: u64) -> Result<EpisodePlan> {
    cfg.validate()?;
    let spec = &cfg.constellation;
    let windows = compute_visibility_windows(
        spec,
        &cfg.observers,
        &cfg.targets,
        0.0,
        cfg.horizon_s,
        cfg.max_off_nadir_deg,
        cfg.window_scan_step_s,
    )?;
    let otws = discretize_windows(
        spec,
        &windows,
        &cfg.targets,
        &cfg.agility,
        &cfg.optics,
        cfg.epoch_step_s,
    )?;
    let (schedule, solver_used, instance);
    if otws.is_empty() {
        instance = SchedulingInstance::new(Vec::new(), cfg.agility)?;
        schedule = Schedule::empty();
        solver_used = cfg.solver;
    } else {
        instance = SchedulingInstance::new(otws, cfg.agility)?;
        let (s, used) = solve(&instance, cfg.solver, seed, DEFAULT_NODE_CAP)?;
        schedule = s;
        solver_used = used;
    }

    let d_isl_m = isl_slant_range_km(spec.n_sats_edge, spec.altitude_e_km, spec.earth_radius_km)?
        * 1e3;
    let t_prop_hop_s = d_isl_m / SPEED_OF_LIGHT_M_S;
    // Propagation reserve on the shared feeder budget: worst ring path
    // plus a representative downlink hop.
    let t_delay_s = (spec.n_sats_edge / 2) as f64 * t_prop_hop_s
        + 1.5 * spec.altitude_e_km * 1e3 / SPEED_OF_LIGHT_M_S;

    let mut exec_models = ExecModels::default();
    if cfg.exec_cov > 0.0 {
        for p in [&cfg.edge_platform, &cfg.ground_platform].into_iter().flatten() {
            if p.exec_jitter && exec_models.get(&p.name).is_none() {
                let model = ExecTimeModel::synthetic_for(
                    p,
                    &cfg.workload,
                    cfg.exec_cov,
                    crate::rng::substream_seed(seed, "exec-model", exec_models.entries.len() as u64),
                )?;
                exec_models.entries.push((p.name.clone(), model));
            }
        }
    }

    // Group scheduled observations into capture slots per source.
    let mut groups: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for obs in &schedule.observations {
        let slot = (obs.time_s / cfg.t_slot_s).floor() as usize;
        let source = source_ring_index(spec, obs.sat, obs.time_s)?;
        match groups.iter_mut().find(|(k, s, _)| *k == slot && *s == source) {
            Some((_, _, ids)) => ids.push(obs.otw_id),
            None => groups.push((slot, source, vec![obs.otw_id])),
        }
    }
    groups.sort();

    let mut slots = Vec::with_capacity(groups.len());
    for (slot, source, otw_ids) in groups {
        let n_images = otw_ids.len() * cfg.frame.n_img;
        let capture_t = slot as f64 * cfg.t_slot_s;
        let gather_t = (slot + 2) as f64 * cfg.t_slot_s;
        let raw_contact = if cfg.ground_platform.is_some() {
            contact_rate_for_sat(spec, &cfg.ground_stations, &cfg.link, source, capture_t)?
        } else {
            None
        };
        let gather_contact = select_gs(spec, &cfg.ground_stations, &cfg.link, gather_t)?;

        let mut planned = PlannedSlot {
            slot,
            source,
            otw_ids,
            n_images,
            raw_contact: raw_contact.clone(),
            gather_contact: gather_contact.clone(),
            instance: None,
            allocation: None,
            energy: EnergySplit::default(),
            feasible: false,
        };
        let Some(gather) = gather_contact else {
            // Results cannot reach the ground; the slot is lost.
            slots.push(planned);
            continue;
        };
        // The raw fraction exists only while the source sees a station.
        let ground_platform = match (&cfg.ground_platform, &raw_contact) {
            (Some(p), Some(_)) => Some(p.clone()),
            _ => None,
        };
        if cfg.edge_platform.is_none() && ground_platform.is_none() {
            slots.push(planned);
            continue;
        }
        let snapshot = SnapshotConfig {
            n_edge: spec.n_sats_edge,
            source,
            downlink: gather.sat_index,
            edge_platform: cfg.edge_platform.clone(),
            ground_platform,
            link: cfg.link.clone(),
            t_slot_s: cfg.t_slot_s,
            load_fps: n_images as f64 / cfg.t_slot_s,
            workload: cfg.workload.clone(),
            d_img_bits: cfg.frame.d_img_bits,
            r_raw_bps: planned.raw_contact.as_ref().map(|c| c.rate_bps).unwrap_or(1.0),
            r_result_bps: gather.rate_bps,
            t_delay_s,
            convention: cfg.convention,
        };
        let inst = build_snapshot(&snapshot)?;
        match solve_allocation(&inst) {
            Ok(alloc) => {
                let split = account_energy(&inst, &alloc.shares)?;
                planned.energy = EnergySplit {
                    maneuver_j: 0.0,
                    scatter_isl_j: split.scatter_isl_j,
                    scatter_dl_j: split.downlink_raw_j,
                    processing_edge_j: split.processing_edge_j,
                    processing_ground_j: split.processing_ground_j,
                    gather_isl_j: split.gather_isl_j,
                    gather_dl_j: split.downlink_result_j,
                };
                planned.instance = Some(inst);
                planned.allocation = Some(alloc);
                planned.feasible = true;
            }
            Err(Error::InfeasibleLoad(_)) | Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(e),
        }
        slots.push(planned);
    }

    Ok(EpisodePlan {
        instance,
        schedule,
        solver_used,
        slots,
        exec_models,
        t_prop_hop_s,
        t_delay_s,
    })
}

/// Wall-clock spent moving the gathered results: the busiest ring link,
/// then the feeder transmission, then propagation. `frac` scales the
/// surviving bits; propagation does not shrink with them.
fn gather_span_s(plan: &PlannedSlot, link: &LinkSpec, t_delay_s: f64, rho: f64, frac: f64) -> f64 {
    let (Some(inst), Some(alloc)) = (&plan.instance, &plan.allocation) else {
        return 0.0;
    };
    if frac <= 0.0 {
        return 0.0;
    }
    let d_batch = frac * plan.n_images as f64 * inst.d_img_bits;
    let mut link_bits = std::collections::BTreeMap::new();
    let mut result_bits = 0.0;
    for (p, w) in inst.workers.iter().enumerate() {
        if w.ground {
            continue;
        }
        let share_bits = alloc.shares[p] * d_batch / rho;
        result_bits += share_bits;
        for &l in &w.gather_links {
            *link_bits.entry(l).or_insert(0.0) += share_bits;
        }
    }
    let isl_busy = link_bits
        .values()
        .map(|b| b / link.r_isl_bps)
        .fold(0.0, f64::max);
    let rate = plan.gather_contact.as_ref().map(|c| c.rate_bps).unwrap_or(0.0);
    let dl = if rate > 0.0 { result_bits / rate } else { 0.0 };
    isl_busy + dl + t_delay_s
}

/// Runs one replica: draws turbulence gates and execution times against
/// the fixed plan and settles deliveries and energies.
pub fn run_replica(
    cfg: &EpisodeConfig,
    plan: &EpisodePlan,
    seed: u64,
    replica: usize,
) -> Result<EpisodeOutcome> {
    let mut turb = Cn2Sampler::new(cfg.turbulence.clone(), seed, replica as u64)?;
    let mut exec_rng = stream(seed, "exec", replica as u64);
    let mut ledger = EnergyLedger::default();
    let mut observations = Vec::with_capacity(plan.schedule.observations.len());
    let mut slot_records = Vec::with_capacity(plan.slots.len());
    let mut delivered_n = 0;
    let mut gated_n = 0;
    let mut dropped_n = 0;

    // Gate draws run in schedule order so replicas stay comparable no
    // matter how slots group.
    let mut gate_of = std::collections::BTreeMap::new();
    for obs in &plan.schedule.observations {
        let gated = if cfg.gate_acquisitions {
            !turb.attempt(cfg.cn2_threshold).1
        } else {
            false
        };
        gate_of.insert(obs.otw_id, gated);
    }

    for planned in &plan.slots {
        let t_start = planned.slot as f64 * cfg.t_slot_s;
        let deadline = (planned.slot + 3) as f64 * cfg.t_slot_s;
        let members: Vec<&crate::obs_sched::ScheduledObservation> = plan
            .schedule
            .observations
            .iter()
            .filter(|o| planned.otw_ids.contains(&o.otw_id))
            .collect();
        let live: Vec<usize> = members
            .iter()
            .filter(|o| !gate_of[&o.otw_id])
            .map(|o| o.otw_id)
            .collect();

        // Slot energy scales with the surviving fraction of the batch:
        // gated acquisitions never produce frames.
        let frac = if planned.otw_ids.is_empty() {
            0.0
        } else {
            live.len() as f64 / planned.otw_ids.len() as f64
        };

        let mut processing_actual = 0.0f64;
        let mut slot_energy = EnergySplit::default();
        let mut slot_delivered = 0;

        if !live.is_empty() && planned.feasible {
            let inst = planned.instance.as_ref().expect("feasible slot has an instance");
            let alloc = planned.allocation.as_ref().expect("feasible slot has an allocation");
            // Execution times: jittery platforms draw their batch span,
            // deterministic ones take the planned mean.
            let mut actual_edge_j = KahanSum::default();
            for (p, w) in inst.workers.iter().enumerate() {
                if alloc.shares[p] <= 0.0 {
                    continue;
                }
                let n_img = alloc.shares[p] * frac * planned.n_images as f64;
                if n_img <= 0.0 {
                    continue;
                }
                let f = alloc.frequencies_hz[p];
                let planned_span =
                    n_img * crate::compute::mean_exec_time_s(&w.platform, f, &inst.workload)?;
                let span = match plan.exec_models.get(&w.platform.name) {
                    Some(m) if w.platform.exec_jitter => {
                        m.batch(f, n_img)?.sample(&mut exec_rng)
                    }
                    _ => planned_span,
                };
                processing_actual = processing_actual.max(span);
                if !w.ground {
                    actual_edge_j.add(power_w(&w.platform, f) * span);
                }
            }
            slot_energy.scatter_isl_j = frac * planned.energy.scatter_isl_j;
            slot_energy.scatter_dl_j = frac * planned.energy.scatter_dl_j;
            slot_energy.processing_edge_j = actual_edge_j.value();
            slot_energy.processing_ground_j = frac * planned.energy.processing_ground_j;
            slot_energy.gather_isl_j = frac * planned.energy.gather_isl_j;
            slot_energy.gather_dl_j = frac * planned.energy.gather_dl_j;

            let gather_start = (t_start + 2.0 * cfg.t_slot_s)
                .max(t_start + cfg.t_slot_s + processing_actual);
            let completion = gather_start
                + gather_span_s(planned, &cfg.link, plan.t_delay_s, inst.workload.rho, frac);
            if completion <= deadline + 1e-9 {
                slot_delivered = live.len();
            }
            for obs in &members {
                let gated = gate_of[&obs.otw_id];
                let share = if live.is_empty() { 0.0 } else { 1.0 / live.len() as f64 };
                let mut energy = EnergySplit { maneuver_j: obs.maneuver_energy_j, ..Default::default() };
                let delivered = !gated && slot_delivered > 0;
                if !gated {
                    energy.scatter_isl_j = slot_energy.scatter_isl_j * share;
                    energy.scatter_dl_j = slot_energy.scatter_dl_j * share;
                    energy.processing_edge_j = slot_energy.processing_edge_j * share;
                    energy.processing_ground_j = slot_energy.processing_ground_j * share;
                    energy.gather_isl_j = slot_energy.gather_isl_j * share;
                    energy.gather_dl_j = slot_energy.gather_dl_j * share;
                }
                observations.push(ObservationOutcome {
                    otw_id: obs.otw_id,
                    target_id: obs.target_id,
                    sat: obs.sat,
                    time_s: obs.time_s,
                    capture_slot: planned.slot,
                    profit: obs.profit,
                    gated,
                    dropped: false,
                    delivered,
                    completion_s: delivered.then_some(completion),
                    energy,
                });
                if gated {
                    gated_n += 1;
                } else if delivered {
                    delivered_n += 1;
                } else {
                    dropped_n += 1;
                }
            }
        } else {
            // Nothing can be processed: maneuvers already happened, the
            // frames are lost.
            for obs in &members {
                let gated = gate_of[&obs.otw_id];
                observations.push(ObservationOutcome {
                    otw_id: obs.otw_id,
                    target_id: obs.target_id,
                    sat: obs.sat,
                    time_s: obs.time_s,
                    capture_slot: planned.slot,
                    profit: obs.profit,
                    gated,
                    dropped: !gated,
                    delivered: false,
                    completion_s: None,
                    energy: EnergySplit {
                        maneuver_j: obs.maneuver_energy_j,
                        ..Default::default()
                    },
                });
                if gated {
                    gated_n += 1;
                } else {
                    dropped_n += 1;
                }
            }
        }

        for obs in &observations[observations.len() - members.len()..] {
            ledger.add(&obs.energy);
        }

        slot_records.push(SlotRecord {
            slot: planned.slot,
            t_start_s: t_start,
            n_observations: planned.otw_ids.len(),
            n_images: (frac * planned.n_images as f64).round() as usize,
            source: planned.source,
            station: planned.gather_contact.as_ref().map(|c| c.station_id.clone()),
            downlink_sat: planned.gather_contact.as_ref().map(|c| c.sat_index),
            raw_rate_bps: planned.raw_contact.as_ref().map(|c| c.rate_bps).unwrap_or(0.0),
            result_rate_bps: planned.gather_contact.as_ref().map(|c| c.rate_bps).unwrap_or(0.0),
            ground_share: planned
                .instance
                .as_ref()
                .zip(planned.allocation.as_ref())
                .map(|(inst, alloc)| {
                    // An empty float sum is -0.0; keep the sign clean.
                    inst.workers
                        .iter()
                        .zip(&alloc.shares)
                        .filter(|(w, _)| w.ground)
                        .map(|(_, x)| *x)
                        .sum::<f64>()
                        + 0.0
                })
                .unwrap_or(0.0),
            processing_actual_s: processing_actual,
            energy_j: slot_energy.total_j()
                + members.iter().map(|o| o.maneuver_energy_j).sum::<f64>(),
            delivered: slot_delivered,
        });
    }

    Ok(EpisodeOutcome {
        replica,
        observations,
        slots: slot_records,
        totals: ledger.totals(),
        delivered: delivered_n,
        gated: gated_n,
        dropped: dropped_n,
    })
}

/// Interpolated empirical quantile of an ascending slice.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let w = pos - lo as f64;
            sorted[lo] * (1.0 - w) + sorted[hi] * w
        }
    }
}

/// Plans once, runs every replica, reduces the statistics.
pub fn run_episode(
    cfg: &EpisodeConfig,
    seed: u64,
    replicas: usize,
) -> Result<(EpisodePlan, Vec<EpisodeOutcome>, EpisodeSummary)> {
    if replicas == 0 {
        return Err(Error::Config("need at least one replica".into()));
    }
    let plan = plan_episode(cfg, seed)?;
    let outcomes: Vec<EpisodeOutcome> = (0..replicas)
        .map(|r| run_replica(cfg, &plan, seed, r))
        .collect::<Result<_>>()?;

    let k = replicas as f64;
    let mut mean_energy = EnergySplit::default();
    let mut delivered = KahanSum::default();
    let mut gated = KahanSum::default();
    let mut dropped = KahanSum::default();
    let mut profit = KahanSum::default();
    for o in &outcomes {
        mean_energy.maneuver_j += o.totals.maneuver_j / k;
        mean_energy.scatter_isl_j += o.totals.scatter_isl_j / k;
        mean_energy.scatter_dl_j += o.totals.scatter_dl_j / k;
        mean_energy.processing_edge_j += o.totals.processing_edge_j / k;
        mean_energy.processing_ground_j += o.totals.processing_ground_j / k;
        mean_energy.gather_isl_j += o.totals.gather_isl_j / k;
        mean_energy.gather_dl_j += o.totals.gather_dl_j / k;
        delivered.add(o.delivered as f64);
        gated.add(o.gated as f64);
        dropped.add(o.dropped as f64);
        profit.add(o.observations.iter().filter(|x| x.delivered).map(|x| x.profit).sum());
    }

    let mut per_observation = Vec::new();
    for obs in &plan.schedule.observations {
        let mut energies: Vec<f64> = outcomes
            .iter()
            .flat_map(|o| {
                o.observations
                    .iter()
                    .filter(|x| x.otw_id == obs.otw_id && x.delivered)
                    .map(|x| x.energy.satellite_j())
            })
            .collect();
        energies.sort_by(f64::total_cmp);
        let n = energies.len();
        let mean = if n == 0 {
            f64::NAN
        } else {
            let mut s = KahanSum::default();
            for &e in &energies {
                s.add(e);
            }
            s.value() / n as f64
        };
        per_observation.push(ObservationStats {
            otw_id: obs.otw_id,
            target_id: obs.target_id,
            time_s: obs.time_s,
            n_delivered: n,
            mean_j: mean,
            q05_j: empirical_quantile(&energies, 0.05),
            q95_j: empirical_quantile(&energies, 0.95),
        });
    }

    let sat_energy = mean_energy.satellite_j();
    let summary = EpisodeSummary {
        replicas,
        scheduled: plan.schedule.observations.len(),
        mean_delivered: delivered.value() / k,
        mean_gated: gated.value() / k,
        mean_dropped: dropped.value() / k,
        mean_profit: profit.value() / k,
        mean_energy,
        mean_power_w: sat_energy / cfg.horizon_s,
        mean_power_excl_maneuver_w: (sat_energy - mean_energy.maneuver_j) / cfg.horizon_s,
        per_observation,
    };
    Ok((plan, outcomes, summary))
}

/// One grid point of the slot-duration sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub platform: String,
    pub t_slot_s: f64,
    /// Every capture slot admitted a feasible allocation.
    pub feasible: bool,
    /// Transport and processing power from the deterministic plan,
    /// maneuvers excluded, W.
    pub mean_power_w: f64,
    pub scheduled: usize,
    pub planned_slots: usize,
    pub feasible_slots: usize,
}

/// Feasibility frontier and mean power over slot durations and onboard
/// platforms; works from deterministic plans so the frontier is exact.
pub fn sweep_slot_durations(
    cfg: &EpisodeConfig,
    platforms: &[PlatformSpec],
    t_slots: &[f64],
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for p in platforms {
        for &t in t_slots {
            let mut c = cfg.clone();
            c.edge_platform = Some(p.clone());
            c.ground_platform = None;
            c.t_slot_s = t;
            c.exec_cov = 0.0;
            c.gate_acquisitions = false;
            let plan = plan_episode(&c, seed)?;
            let mut energy = KahanSum::default();
            let mut feasible_slots = 0;
            for s in &plan.slots {
                if s.feasible {
                    feasible_slots += 1;
                    let e = s.energy;
                    energy.add(e.total_j() - e.processing_ground_j);
                }
            }
            rows.push(SweepRow {
                platform: p.name.clone(),
                t_slot_s: t,
                feasible: feasible_slots == plan.slots.len() && !plan.slots.is_empty(),
                mean_power_w: energy.value() / c.horizon_s,
                scheduled: plan.schedule.observations.len(),
                planned_slots: plan.slots.len(),
                feasible_slots,
            });
        }
    }
    Ok(rows)
}

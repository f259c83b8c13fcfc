//! Slow reference implementations used to cross-check the fast solvers.
//!
//! Everything here trades speed for transparency. The closed-form rules
//! are restated from their defining tables rather than shared with the
//! production code, the scheduling optimum comes from exhaustive dynamic
//! programming over target subsets and the allocation optimum from a
//! dense grid walk. Tests compare the optimizers against these and fail
//! on any disagreement.

use std::collections::{BTreeMap, HashMap};

use crate::acquisition::Attitude;
use crate::obs_sched::SchedulingInstance;
use crate::proc_sched::{account_energy, ProcessingInstance};
use crate::{Error, Result};

/// Target count past which the subset DP is not attempted.
pub const MAX_ORACLE_TARGETS: usize = 12;

/// Worker count past which the allocation grid is not attempted.
pub const MAX_ORACLE_WORKERS: usize = 4;

/// Allocation grid resolution in share units.
pub const GRID_STEP: f64 = 0.01;

/// Attitude transition time restated as a segment table: rows hold the
/// segment's upper edge, its base time and its slope divisor.
const TRANSITION_SEGMENTS: [(f64, f64, f64); 4] = [
    (30.0, 5.0, 1.5),
    (60.0, 10.0, 2.0),
    (90.0, 16.0, 2.5),
    (f64::INFINITY, 22.0, 3.0),
];

/// Settling floor below 10 degrees, then the first matching segment.
pub fn reference_transition_time_s(alpha_deg: f64) -> Result<f64> {
    if !(alpha_deg >= 0.0) {
        return Err(Error::Domain(format!("slew angle {alpha_deg} must be non-negative")));
    }
    if alpha_deg <= 10.0 {
        return Ok(11.66);
    }
    let (_, base, div) = TRANSITION_SEGMENTS
        .iter()
        .find(|&&(hi, _, _)| alpha_deg <= hi)
        .expect("last segment is unbounded");
    Ok(base + alpha_deg / div)
}

/// Slew magnitude as a fold over the axis components.
pub fn reference_slew_angle_deg(a: Attitude, b: Attitude) -> f64 {
    [a.roll_deg - b.roll_deg, a.pitch_deg - b.pitch_deg, a.yaw_deg - b.yaw_deg]
        .iter()
        .map(|d| d.abs())
        .sum()
}

/// Re-derives every schedule constraint from the raw candidate data and
/// lists what the selection breaks. Empty means feasible.
pub fn reference_violations(inst: &SchedulingInstance, chosen: &[usize]) -> Vec<String> {
    let mut found = Vec::new();
    let mut ids: Vec<usize> = chosen.iter().copied().filter(|&id| id < inst.otws.len()).collect();
    if ids.len() != chosen.len() {
        found.push("selection names a candidate the instance does not have".into());
    }
    ids.sort_by(|&a, &b| inst.otws[a].time_s.total_cmp(&inst.otws[b].time_s).then(a.cmp(&b)));
    ids.dedup();

    let mut per_target: BTreeMap<usize, usize> = BTreeMap::new();
    for &id in &ids {
        *per_target.entry(inst.otws[id].target_id).or_insert(0) += 1;
    }
    for (t, n) in per_target {
        if n > 1 {
            found.push(format!("target {t} is imaged {n} times"));
        }
    }
    for &id in &ids {
        let o = &inst.otws[id];
        if o.time_s < o.window_start_s - 1e-9 || o.time_s > o.window_end_s + 1e-9 {
            found.push(format!("candidate {id} sits outside its visibility span"));
        }
    }
    for &sat in &inst.sats {
        let chain: Vec<usize> = ids.iter().copied().filter(|&id| inst.otws[id].sat == sat).collect();
        let mut energy = 0.0;
        for pair in chain.windows(2) {
            let (a, b) = (&inst.otws[pair[0]], &inst.otws[pair[1]]);
            let dt = reference_transition_time_s(reference_slew_angle_deg(a.attitude, b.attitude))
                .expect("1-norm slew is non-negative");
            let gap = b.time_s - a.time_s;
            if dt > gap + 1e-9 {
                found.push(format!(
                    "chain on {sat}: {} to {} needs {dt:.3} s, gap is {gap:.3} s",
                    pair[0], pair[1]
                ));
            }
            energy += inst.agility.p_man_w * dt;
        }
        if energy > inst.agility.e_max_j + 1e-6 {
            found.push(format!(
                "chain on {sat}: maneuvers cost {energy:.2} J against a budget of {:.2} J",
                inst.agility.e_max_j
            ));
        }
    }
    found
}

/// Non-dominated (profit, energy) pairs; more profit for less energy wins.
fn push_pareto(front: &mut Vec<(f64, f64)>, profit: f64, energy: f64) {
    if front.iter().any(|&(p, e)| p >= profit && e <= energy) {
        return;
    }
    front.retain(|&(p, e)| !(profit >= p && energy <= e));
    front.push((profit, energy));
}

/// Per-satellite table: best chain profit for each exactly-used target
/// set, NEG_INFINITY where no feasible chain exists.
fn sat_profit_table(
    inst: &SchedulingInstance,
    cand: &[usize],
    bit_of: &BTreeMap<usize, usize>,
) -> Vec<f64> {
    let size = 1usize << bit_of.len();
    let mut table = vec![f64::NEG_INFINITY; size];
    table[0] = 0.0;
    // states[j] holds Pareto frontiers of chains ending at cand[j],
    // keyed by the set of targets the chain has used.
    let mut states: Vec<HashMap<u16, Vec<(f64, f64)>>> = vec![HashMap::new(); cand.len()];
    for j in 0..cand.len() {
        let (done, rest) = states.split_at_mut(j);
        let cur = &mut rest[0];
        let oj = &inst.otws[cand[j]];
        let bj = 1u16 << bit_of[&oj.target_id];
        push_pareto(cur.entry(bj).or_default(), oj.profit, 0.0);
        for i in 0..j {
            let oi = &inst.otws[cand[i]];
            let dt = reference_transition_time_s(reference_slew_angle_deg(oi.attitude, oj.attitude))
                .expect("1-norm slew is non-negative");
            if oi.time_s + dt > oj.time_s + 1e-9 {
                continue;
            }
            let de = inst.agility.p_man_w * dt;
            for (&mask, front) in &done[i] {
                if mask & bj != 0 {
                    continue;
                }
                for &(p, e) in front {
                    if e + de <= inst.agility.e_max_j + 1e-9 {
                        push_pareto(cur.entry(mask | bj).or_default(), p + oj.profit, e + de);
                    }
                }
            }
        }
        for (&mask, front) in cur.iter() {
            let best = front.iter().map(|&(p, _)| p).fold(f64::NEG_INFINITY, f64::max);
            let slot = &mut table[mask as usize];
            *slot = slot.max(best);
        }
    }
    table
}

/// Optimal total profit by dynamic programming: per-satellite subset
/// tables combined with a max-plus convolution over disjoint target
/// sets. Exhaustive, so only small instances are accepted.
pub fn reference_best_profit(inst: &SchedulingInstance) -> Result<f64> {
    inst.validate()?;
    let targets = inst.target_ids();
    if targets.len() > MAX_ORACLE_TARGETS {
        return Err(Error::SolverCap(format!(
            "{} targets exceed the oracle's subset range of {MAX_ORACLE_TARGETS}",
            targets.len()
        )));
    }
    let bit_of: BTreeMap<usize, usize> =
        targets.iter().enumerate().map(|(b, &t)| (t, b)).collect();
    let size = 1usize << targets.len();

    let mut acc = vec![f64::NEG_INFINITY; size];
    acc[0] = 0.0;
    for &sat in &inst.sats {
        let cand: Vec<usize> =
            (0..inst.otws.len()).filter(|&id| inst.otws[id].sat == sat).collect();
        let table = sat_profit_table(inst, &cand, &bit_of);
        let mut next = vec![f64::NEG_INFINITY; size];
        for mask in 0..size {
            if acc[mask] == f64::NEG_INFINITY {
                continue;
            }
            let comp = (size - 1) & !mask;
            let mut sub = comp;
            loop {
                if table[sub] > f64::NEG_INFINITY {
                    let joint = mask | sub;
                    next[joint] = next[joint].max(acc[mask] + table[sub]);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & comp;
            }
        }
        acc = next;
    }
    Ok(acc.iter().cloned().fold(0.0, f64::max))
}

/// Best feasible allocation on a dense share grid: every composition of
/// the batch into hundredths is priced and checked against the box and
/// link-time constraints. Returns the winning shares and their cost.
pub fn reference_grid_allocation(inst: &ProcessingInstance) -> Result<(Vec<f64>, f64)> {
    inst.validate()?;
    let n = inst.workers.len();
    if n > MAX_ORACLE_WORKERS {
        return Err(Error::SolverCap(format!(
            "{n} workers exceed the oracle's grid range of {MAX_ORACLE_WORKERS}"
        )));
    }
    let steps = (1.0 / GRID_STEP).round() as usize;
    let upper: Vec<f64> = (0..n).map(|p| inst.share_upper(p)).collect();
    let rows = inst.rows();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut counts = vec![0usize; n];
    // Walk all compositions of `steps` into n parts.
    fn walk(
        p: usize,
        left: usize,
        counts: &mut Vec<usize>,
        eval: &mut dyn FnMut(&[usize]),
    ) {
        if p + 1 == counts.len() {
            counts[p] = left;
            eval(counts);
            return;
        }
        for k in 0..=left {
            counts[p] = k;
            walk(p + 1, left - k, counts, eval);
        }
    }
    let mut eval = |counts: &[usize]| {
        let shares: Vec<f64> = counts.iter().map(|&k| k as f64 * GRID_STEP).collect();
        for p in 0..n {
            if shares[p] > upper[p] + 1e-9 {
                return;
            }
        }
        for row in &rows {
            let load: f64 = row.coeffs.iter().zip(&shares).map(|(c, x)| c * x).sum();
            if load > row.bound + 1e-9 {
                return;
            }
        }
        let Ok(split) = account_energy(inst, &shares) else { return };
        let cost = split.satellite_j();
        if best.as_ref().map_or(true, |(_, b)| cost < *b) {
            best = Some((shares, cost));
        }
    };
    walk(0, steps, &mut counts, &mut eval);
    best.ok_or_else(|| {
        Error::InfeasibleLoad("no grid point satisfies the box and link-time limits".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{slew_angle_deg, transition_time_s};
    use crate::compute::{PlatformSpec, WorkloadSpec};
    use crate::network::LinkSpec;
    use crate::obs_sched::{
        check_schedule, contended_instance, solve_exact, solve_fifo, solve_ga, GaParams,
        DEFAULT_NODE_CAP,
    };
    use crate::proc_sched::{build_snapshot, solve, RawSlotConvention, SnapshotConfig};
    use approx::assert_relative_eq;

    #[test]
    fn transition_restatement_agrees_over_a_dense_sweep() {
        let mut alpha = 0.0;
        while alpha <= 180.0 {
            let a = transition_time_s(alpha).unwrap();
            let b = reference_transition_time_s(alpha).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
            alpha += 0.25;
        }
        assert!(reference_transition_time_s(-1.0).is_err());
    }

    #[test]
    fn slew_restatement_agrees_on_signed_attitudes() {
        let pairs = [
            (Attitude { roll_deg: -12.5, pitch_deg: 3.0, yaw_deg: 40.0 },
             Attitude { roll_deg: 7.5, pitch_deg: -9.0, yaw_deg: 40.0 }),
            (Attitude { roll_deg: 0.0, pitch_deg: 0.0, yaw_deg: 0.0 },
             Attitude { roll_deg: 0.0, pitch_deg: 0.0, yaw_deg: 0.0 }),
            (Attitude { roll_deg: 44.0, pitch_deg: -44.0, yaw_deg: 89.0 },
             Attitude { roll_deg: -1.0, pitch_deg: 1.0, yaw_deg: -89.0 }),
        ];
        for (a, b) in pairs {
            assert_relative_eq!(slew_angle_deg(a, b), reference_slew_angle_deg(a, b));
        }
    }

    #[test]
    fn subset_dp_confirms_the_exact_solver() {
        for (sats, per_sat, seed) in [(2, 3, 11), (2, 4, 12), (3, 3, 13), (2, 3, 207)] {
            let inst = contended_instance(sats, per_sat, 40.0, seed).unwrap();
            let sched = solve_exact(&inst, DEFAULT_NODE_CAP).unwrap();
            let bound = reference_best_profit(&inst).unwrap();
            assert_relative_eq!(sched.profit, bound, max_relative = 1e-9);
            let ids: Vec<usize> = sched.observations.iter().map(|o| o.otw_id).collect();
            assert!(reference_violations(&inst, &ids).is_empty());
        }
    }

    #[test]
    fn heuristics_stay_inside_the_dp_bound() {
        let inst = contended_instance(2, 4, 35.0, 99).unwrap();
        let bound = reference_best_profit(&inst).unwrap();
        let ga = solve_ga(&inst, 7, &GaParams::default()).unwrap();
        let fifo = solve_fifo(&inst).unwrap();
        for sched in [&ga, &fifo] {
            assert!(sched.profit <= bound + 1e-9);
            let ids: Vec<usize> = sched.observations.iter().map(|o| o.otw_id).collect();
            assert!(reference_violations(&inst, &ids).is_empty());
            assert!(check_schedule(&inst, &ids).is_ok());
        }
        assert!(ga.profit >= fifo.profit - 1e-9);
    }

    #[test]
    fn checker_restatement_flags_a_broken_selection() {
        let inst = contended_instance(2, 3, 40.0, 5).unwrap();
        let all: Vec<usize> = (0..inst.otws.len()).collect();
        let ours = reference_violations(&inst, &all);
        assert!(!ours.is_empty());
        assert!(check_schedule(&inst, &all).is_err());
    }

    fn small_edge_pool(n_edge: usize, load_fps: f64) -> ProcessingInstance {
        build_snapshot(&SnapshotConfig {
            n_edge,
            source: 0,
            downlink: n_edge - 1,
            edge_platform: Some(PlatformSpec::jetson_agx()),
            ground_platform: None,
            link: LinkSpec::baseline(),
            t_slot_s: 10.0,
            load_fps,
            workload: WorkloadSpec::detection_default(),
            d_img_bits: 788_513.0,
            r_raw_bps: 2.3018e9,
            r_result_bps: 2.3018e9,
            t_delay_s: 0.0,
            convention: RawSlotConvention::RawAtCaptureSlot,
        })
        .unwrap()
    }

    fn mixed_ground_pool() -> ProcessingInstance {
        build_snapshot(&SnapshotConfig {
            n_edge: 2,
            source: 0,
            downlink: 1,
            edge_platform: Some(PlatformSpec::jetson_nano()),
            ground_platform: Some(PlatformSpec::cloud_cpu()),
            link: LinkSpec::baseline(),
            t_slot_s: 10.0,
            load_fps: 60.0,
            workload: WorkloadSpec::detection_default(),
            d_img_bits: 788_513.0,
            r_raw_bps: 0.03e9,
            r_result_bps: 2.3018e9,
            t_delay_s: 0.0698,
            convention: RawSlotConvention::RawAtCaptureSlot,
        })
        .unwrap()
    }

    #[test]
    fn grid_walk_confirms_allocation_optimality() {
        for inst in [small_edge_pool(3, 80.0), mixed_ground_pool()] {
            let alloc = solve(&inst).unwrap();
            let (grid_shares, grid_cost) = reference_grid_allocation(&inst).unwrap();
            // The solver works on the continuum, so it may only improve on
            // the grid, and the grid can lag only by its resolution.
            assert!(alloc.objective_j <= grid_cost + 1e-6 * grid_cost.max(1.0));
            assert!((grid_cost - alloc.objective_j) / alloc.objective_j < 0.05);
            let rows = inst.rows();
            for row in &rows {
                let load: f64 =
                    row.coeffs.iter().zip(&grid_shares).map(|(c, x)| c * x).sum();
                assert!(load <= row.bound + 1e-9);
            }
        }
    }

    #[test]
    fn oracle_ranges_are_enforced() {
        let inst = contended_instance(4, 4, 30.0, 3).unwrap();
        assert!(matches!(reference_best_profit(&inst), Err(Error::SolverCap(_))));
        let pool = small_edge_pool(6, 80.0);
        assert!(matches!(reference_grid_allocation(&pool), Err(Error::SolverCap(_))));
    }
}

//! Observation scheduling: which candidate epochs to image, on which
//! satellite, in which order.
//!
//! A schedule is a set of candidate observations, at most one per target,
//! that forms a time-feasible chain on every satellite: consecutive
//! observations leave room for the attitude transition between them, and
//! the summed maneuver energy of each chain stays inside the per-episode
//! budget. The first observation of a chain is free, the satellite points
//! itself before the horizon starts.
//!
//! Three solvers share one feasibility core: a first-fit baseline, an
//! exact best-first branch-and-bound, and a genetic algorithm for
//! instances past the exact solver's reach.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    slew_angle_deg, transition_time_s, AgilitySpec, ObservationWindow, MIN_TRANSITION_S,
};
use crate::geometry::SatId;
use crate::{Error, Result};

/// Satellites the exact solver can handle per instance.
pub const MAX_EXACT_SATS: usize = 4;

/// Search-tree size at which the exact solver gives up.
pub const DEFAULT_NODE_CAP: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Ga,
    Fifo,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Exact => "exact",
            SolverKind::Ga => "ga",
            SolverKind::Fifo => "fifo",
        })
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "ga" => Ok(SolverKind::Ga),
            "fifo" => Ok(SolverKind::Fifo),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

/// One scheduling problem: candidate observations sorted by epoch, the
/// satellites they run on and the shared agility envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulingInstance {
    pub otws: Vec<ObservationWindow>,
    pub sats: Vec<SatId>,
    pub agility: AgilitySpec,
}

impl SchedulingInstance {
    /// Wraps sorted candidates; satellite list is derived.
    pub fn new(otws: Vec<ObservationWindow>, agility: AgilitySpec) -> Result<Self> {
        agility.validate()?;
        let mut sats: Vec<SatId> = otws.iter().map(|o| o.sat).collect::<BTreeSet<_>>().into_iter().collect();
        sats.sort();
        let inst = SchedulingInstance { otws, sats, agility };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, o) in self.otws.iter().enumerate() {
            if o.id != i {
                return Err(Error::Config(format!(
                    "candidate {} is stored at position {i}; ids must match positions",
                    o.id
                )));
            }
            if i > 0 && o.time_s < self.otws[i - 1].time_s {
                return Err(Error::Config("candidates must ascend in time".into()));
            }
            if !(o.profit > 0.0) || o.profit > 1.0 + 1e-9 {
                return Err(Error::Config(format!(
                    "candidate {} has reward {} outside (0, 1]",
                    o.id, o.profit
                )));
            }
            if o.time_s < o.window_start_s - 1e-9 || o.time_s > o.window_end_s + 1e-9 {
                return Err(Error::Config(format!(
                    "candidate {} epoch {} escapes its window",
                    o.id, o.time_s
                )));
            }
            if !self.sats.contains(&o.sat) {
                return Err(Error::Config(format!("candidate {} on unlisted satellite", o.id)));
            }
        }
        Ok(())
    }

    /// Distinct target ids, ascending.
    pub fn target_ids(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.otws.iter().map(|o| o.target_id).collect();
        set.into_iter().collect()
    }

    fn sat_index(&self, sat: SatId) -> usize {
        self.sats.iter().position(|&s| s == sat).expect("validated sat")
    }
}

/// Attitude transition time between two scheduled candidates.
pub fn transition_between(a: &ObservationWindow, b: &ObservationWindow) -> f64 {
    transition_time_s(slew_angle_deg(a.attitude, b.attitude)).expect("1-norm is non-negative")
}

/// One row of a solved schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledObservation {
    pub otw_id: usize,
    pub sat: SatId,
    pub target_id: usize,
    pub time_s: f64,
    pub profit: f64,
    /// Energy of the transition into this observation; the chain head
    /// pays nothing.
    pub maneuver_energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Ascending in time.
    pub observations: Vec<ScheduledObservation>,
    pub profit: f64,
    pub energy_by_sat: Vec<(SatId, f64)>,
}

impl Schedule {
    pub fn empty() -> Self {
        Schedule { observations: Vec::new(), profit: 0.0, energy_by_sat: Vec::new() }
    }

    pub fn chain_of(&self, sat: SatId) -> Vec<&ScheduledObservation> {
        self.observations.iter().filter(|o| o.sat == sat).collect()
    }
}

/// Verifies a candidate selection against every schedule constraint and
/// prices it. All violations are reported, not just the first.
pub fn check_schedule(inst: &SchedulingInstance, chosen: &[usize]) -> Result<Schedule> {
    let mut violations = Vec::new();
    let mut ids: Vec<usize> = chosen.to_vec();
    for &id in &ids {
        if id >= inst.otws.len() {
            return Err(Error::Infeasible(vec![format!("unknown_candidate:{id}")]));
        }
    }
    ids.sort_by(|&a, &b| {
        inst.otws[a]
            .time_s
            .total_cmp(&inst.otws[b].time_s)
            .then_with(|| a.cmp(&b))
    });
    ids.dedup();

    let mut seen_targets = BTreeSet::new();
    for &id in &ids {
        let o = &inst.otws[id];
        if !seen_targets.insert(o.target_id) {
            violations.push(format!("duplicate_target:{}", o.target_id));
        }
        if o.time_s < o.window_start_s - 1e-9 || o.time_s > o.window_end_s + 1e-9 {
            violations.push(format!("window_bounds:{id}"));
        }
    }

    let mut observations = Vec::with_capacity(ids.len());
    let mut energy_by_sat = Vec::new();
    for &sat in &inst.sats {
        let chain: Vec<usize> = ids.iter().copied().filter(|&id| inst.otws[id].sat == sat).collect();
        let mut energy = 0.0;
        for (k, &id) in chain.iter().enumerate() {
            let o = &inst.otws[id];
            let mut man = 0.0;
            if k > 0 {
                let prev = &inst.otws[chain[k - 1]];
                let dt = transition_between(prev, o);
                if prev.time_s + dt > o.time_s + 1e-9 {
                    violations.push(format!("transition_time:{}->{}", prev.id, o.id));
                }
                man = inst.agility.p_man_w * dt;
            }
            energy += man;
            observations.push(ScheduledObservation {
                otw_id: id,
                sat,
                target_id: o.target_id,
                time_s: o.time_s,
                profit: o.profit,
                maneuver_energy_j: man,
            });
        }
        if energy > inst.agility.e_max_j + 1e-6 {
            violations.push(format!("energy_budget:{sat}:{energy:.1}"));
        }
        if !chain.is_empty() {
            energy_by_sat.push((sat, energy));
        }
    }
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    observations.sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then_with(|| a.otw_id.cmp(&b.otw_id)));
    let profit = observations.iter().map(|o| o.profit).sum();
    Ok(Schedule { observations, profit, energy_by_sat })
}

/// Per-satellite chain under construction.
#[derive(Debug, Clone, Copy)]
struct ChainTail {
    last: Option<usize>,
    energy_j: f64,
}

/// Energy of appending `cand` to the chain, or None when the transition
/// does not fit in time or budget.
fn append_cost(inst: &SchedulingInstance, tail: &ChainTail, cand: usize) -> Option<f64> {
    let o = &inst.otws[cand];
    match tail.last {
        None => Some(0.0),
        Some(prev_id) => {
            let prev = &inst.otws[prev_id];
            let dt = transition_between(prev, o);
            if prev.time_s + dt > o.time_s + 1e-9 {
                return None;
            }
            let de = inst.agility.p_man_w * dt;
            if tail.energy_j + de > inst.agility.e_max_j + 1e-9 {
                return None;
            }
            Some(de)
        }
    }
}

/// First-fit baseline: walk candidates in epoch order and take each
/// target the first time its candidate extends a chain feasibly.
pub fn solve_fifo(inst: &SchedulingInstance) -> Result<Schedule> {
    let mut tails = vec![ChainTail { last: None, energy_j: 0.0 }; inst.sats.len()];
    let mut taken = BTreeSet::new();
    let mut chosen = Vec::new();
    for o in &inst.otws {
        if taken.contains(&o.target_id) {
            continue;
        }
        let s = inst.sat_index(o.sat);
        if let Some(de) = append_cost(inst, &tails[s], o.id) {
            tails[s] = ChainTail { last: Some(o.id), energy_j: tails[s].energy_j + de };
            taken.insert(o.target_id);
            chosen.push(o.id);
        }
    }
    check_schedule(inst, &chosen)
}

const NO_SAT_SLOT: u32 = u32::MAX;

#[derive(Clone)]
struct BnbNode {
    parent: u32,
    /// Candidate added at this node; u32::MAX for the root.
    otw: u32,
    taken: u128,
    last: [u32; MAX_EXACT_SATS],
    energy: [f64; MAX_EXACT_SATS],
    profit: f64,
}

struct HeapEntry {
    bound: f64,
    profit: f64,
    idx: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| self.profit.total_cmp(&other.profit))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Exact solver: best-first branch and bound over chain extensions.
///
/// Nodes are partial selections listed in ascending candidate order, so
/// each subset is generated exactly once; every node is itself feasible and
/// updates the incumbent. The bound adds to the node profit the best
/// remaining reward of each unserved target, truncated to the number of
/// observations the chains can still absorb under the energy budget and
/// the settling floor.
pub fn solve_exact(inst: &SchedulingInstance, node_cap: usize) -> Result<Schedule> {
    if inst.sats.len() > MAX_EXACT_SATS {
        return Err(Error::Config(format!(
            "exact solver handles up to {MAX_EXACT_SATS} satellites, instance has {}",
            inst.sats.len()
        )));
    }
    let targets = inst.target_ids();
    if targets.len() > 128 {
        return Err(Error::Config(format!(
            "exact solver handles up to 128 targets, instance has {}",
            targets.len()
        )));
    }
    let n = inst.otws.len();
    let tpos =
        |target_id: usize| targets.binary_search(&target_id).expect("target from instance");

    // best_from[i][t]: highest reward of target t among candidates i...
    let mut best_from = vec![vec![0.0f64; targets.len()]; n + 1];
    for i in (0..n).rev() {
        let row = best_from[i + 1].clone();
        best_from[i] = row;
        let o = &inst.otws[i];
        let t = tpos(o.target_id);
        if o.profit > best_from[i][t] {
            best_from[i][t] = o.profit;
        }
    }

    let e_step = inst.agility.p_man_w * MIN_TRANSITION_S;
    let remaining_capacity = |node: &BnbNode| -> usize {
        let mut q = 0usize;
        for s in 0..inst.sats.len() {
            let budget = inst.agility.e_max_j - node.energy[s];
            let steps = (budget / e_step + 1e-9).floor().max(0.0) as usize;
            q += if node.last[s] == NO_SAT_SLOT { steps + 1 } else { steps };
        }
        q
    };
    let bound_of = |node: &BnbNode, from: usize, scratch: &mut Vec<f64>| -> f64 {
        scratch.clear();
        for (t, &v) in best_from[from].iter().enumerate() {
            if v > 0.0 && node.taken & (1u128 << t) == 0 {
                scratch.push(v);
            }
        }
        scratch.sort_unstable_by(|a, b| b.total_cmp(a));
        let q = remaining_capacity(node).min(scratch.len());
        node.profit + scratch[..q].iter().sum::<f64>()
    };

    let root = BnbNode {
        parent: u32::MAX,
        otw: u32::MAX,
        taken: 0,
        last: [NO_SAT_SLOT; MAX_EXACT_SATS],
        energy: [0.0; MAX_EXACT_SATS],
        profit: 0.0,
    };
    let mut scratch = Vec::new();
    let root_bound = bound_of(&root, 0, &mut scratch);
    let mut arena = vec![root];
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(HeapEntry { bound: root_bound, profit: 0.0, idx: 0 });
    let mut best_profit = 0.0f64;
    let mut best_idx = 0u32;

    while let Some(e) = heap.pop() {
        if e.bound <= best_profit + 1e-9 {
            break;
        }
        let node = arena[e.idx as usize].clone();
        let from = if node.otw == u32::MAX { 0 } else { node.otw as usize + 1 };
        for j in from..n {
            let o = &inst.otws[j];
            let t = tpos(o.target_id);
            if node.taken & (1u128 << t) != 0 {
                continue;
            }
            let s = inst.sat_index(o.sat);
            let tail = ChainTail {
                last: if node.last[s] == NO_SAT_SLOT { None } else { Some(node.last[s] as usize) },
                energy_j: node.energy[s],
            };
            let Some(de) = append_cost(inst, &tail, j) else { continue };
            let mut child = node.clone();
            child.parent = e.idx;
            child.otw = j as u32;
            child.taken |= 1u128 << t;
            child.last[s] = j as u32;
            child.energy[s] += de;
            child.profit += o.profit;
            let child_bound = bound_of(&child, j + 1, &mut scratch);
            let improves = child.profit > best_profit + 1e-12;
            if !improves && child_bound <= best_profit + 1e-9 {
                continue;
            }
            if arena.len() >= node_cap {
                return Err(Error::SolverCap(format!(
                    "search tree exceeded {node_cap} nodes"
                )));
            }
            let idx = arena.len() as u32;
            let child_profit = child.profit;
            arena.push(child);
            if improves {
                best_profit = child_profit;
                best_idx = idx;
            }
            if child_bound > best_profit + 1e-9 {
                heap.push(HeapEntry { bound: child_bound, profit: child_profit, idx });
            }
        }
    }

    let mut chosen = Vec::new();
    let mut cursor = best_idx;
    while cursor != 0 {
        let node = &arena[cursor as usize];
        chosen.push(node.otw as usize);
        cursor = node.parent;
    }
    chosen.reverse();
    check_schedule(inst, &chosen)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub tournament: usize,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 20,
            generations: 100,
            p_crossover: 0.2,
            p_mutation: 0.2,
            tournament: 3,
            elitism: 2,
        }
    }
}

#[derive(Clone)]
struct Individual {
    /// Order in which targets try to enter the schedule.
    perm: Vec<usize>,
    /// Per-target candidate choice, indexed like `targets`.
    gene: Vec<usize>,
    fitness: f64,
    chosen: Vec<usize>,
}

/// Greedy chain-insertion decode shared by every genetic operator.
fn ga_decode(
    inst: &SchedulingInstance,
    grouped: &[Vec<usize>],
    perm: &[usize],
    gene: &[usize],
) -> (f64, Vec<usize>) {
    let mut chains: Vec<Vec<usize>> = vec![Vec::new(); inst.sats.len()];
    let mut energies = vec![0.0f64; inst.sats.len()];
    let mut profit = 0.0;
    let mut chosen = Vec::new();
    for &t in perm {
        let options = &grouped[t];
        let id = options[gene[t] % options.len()];
        let o = &inst.otws[id];
        let s = inst.sat_index(o.sat);
        let chain = &chains[s];
        let pos = chain.partition_point(|&c| {
            inst.otws[c].time_s < o.time_s || (inst.otws[c].time_s == o.time_s && c < id)
        });
        let pred = pos.checked_sub(1).map(|p| chain[p]);
        let succ = chain.get(pos).copied();
        let mut delta = 0.0;
        let mut ok = true;
        if let Some(p) = pred {
            let dt = transition_between(&inst.otws[p], o);
            if inst.otws[p].time_s + dt > o.time_s + 1e-9 {
                ok = false;
            }
            delta += inst.agility.p_man_w * dt;
        }
        if ok {
            if let Some(q) = succ {
                let dt = transition_between(o, &inst.otws[q]);
                if o.time_s + dt > inst.otws[q].time_s + 1e-9 {
                    ok = false;
                }
                delta += inst.agility.p_man_w * dt;
                if let Some(p) = pred {
                    delta -= inst.agility.p_man_w * transition_between(&inst.otws[p], &inst.otws[q]);
                }
            }
        }
        if ok && energies[s] + delta <= inst.agility.e_max_j + 1e-9 {
            chains[s].insert(pos, id);
            energies[s] += delta;
            profit += o.profit;
            chosen.push(id);
        }
    }
    (profit, chosen)
}

/// Genetic solver: permutation of targets plus per-target candidate
/// choice, decoded by greedy chain insertion.
pub fn solve_ga(inst: &SchedulingInstance, seed: u64, params: &GaParams) -> Result<Schedule> {
    let targets = inst.target_ids();
    if targets.is_empty() {
        return Ok(Schedule::empty());
    }
    let grouped: Vec<Vec<usize>> = targets
        .iter()
        .map(|&t| inst.otws.iter().filter(|o| o.target_id == t).map(|o| o.id).collect())
        .collect();
    let mut rng = crate::rng::stream(seed, "ga", 0);
    let n_t = targets.len();

    let make = |perm: Vec<usize>, gene: Vec<usize>| -> Individual {
        let (fitness, chosen) = ga_decode(inst, &grouped, &perm, &gene);
        Individual { perm, gene, fitness, chosen }
    };

    let mut pop = Vec::with_capacity(params.population);
    // One seeded greedy individual: identity order, peak-reward choices.
    let peak_gene: Vec<usize> = grouped
        .iter()
        .map(|opts| {
            opts.iter()
                .enumerate()
                .max_by(|a, b| inst.otws[*a.1].profit.total_cmp(&inst.otws[*b.1].profit))
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
        .collect();
    pop.push(make((0..n_t).collect(), peak_gene));
    while pop.len() < params.population {
        let mut perm: Vec<usize> = (0..n_t).collect();
        perm.shuffle(&mut rng);
        let gene: Vec<usize> = grouped.iter().map(|o| rng.random_range(0..o.len())).collect();
        pop.push(make(perm, gene));
    }

    let by_fitness = |a: &Individual, b: &Individual| b.fitness.total_cmp(&a.fitness);
    for _ in 0..params.generations {
        pop.sort_by(by_fitness);
        let mut next: Vec<Individual> = pop[..params.elitism.min(pop.len())].to_vec();
        while next.len() < params.population {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
                let mut best = rng.random_range(0..pop.len());
                for _ in 1..params.tournament {
                    let c = rng.random_range(0..pop.len());
                    if pop[c].fitness > pop[best].fitness {
                        best = c;
                    }
                }
                best
            };
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let (mut perm, mut gene) = if rng.random::<f64>() < params.p_crossover {
                // One-point order crossover; candidate genes follow their
                // target through whichever parent supplies it.
                let cut = rng.random_range(0..=n_t);
                let mut perm: Vec<usize> = pop[a].perm[..cut].to_vec();
                let head: BTreeSet<usize> = perm.iter().copied().collect();
                perm.extend(pop[b].perm.iter().copied().filter(|t| !head.contains(t)));
                let gene: Vec<usize> = (0..n_t)
                    .map(|t| if head.contains(&t) { pop[a].gene[t] } else { pop[b].gene[t] })
                    .collect();
                (perm, gene)
            } else {
                let src = if pop[a].fitness >= pop[b].fitness { a } else { b };
                (pop[src].perm.clone(), pop[src].gene.clone())
            };
            if rng.random::<f64>() < params.p_mutation && n_t >= 2 {
                let i = rng.random_range(0..n_t);
                let j = rng.random_range(0..n_t);
                perm.swap(i, j);
                let t = rng.random_range(0..n_t);
                gene[t] = rng.random_range(0..grouped[t].len());
            }
            next.push(make(perm, gene));
        }
        pop = next;
    }
    pop.sort_by(by_fitness);
    check_schedule(inst, &pop[0].chosen)
}

/// Runs the requested solver; the exact solver falls back to the genetic
/// one when the instance is past its reach, and the answer reports which
/// solver produced it.
pub fn solve(
    inst: &SchedulingInstance,
    kind: SolverKind,
    seed: u64,
    node_cap: usize,
) -> Result<(Schedule, SolverKind)> {
    match kind {
        SolverKind::Fifo => Ok((solve_fifo(inst)?, SolverKind::Fifo)),
        SolverKind::Ga => Ok((solve_ga(inst, seed, &GaParams::default())?, SolverKind::Ga)),
        SolverKind::Exact => match solve_exact(inst, node_cap) {
            Ok(s) => Ok((s, SolverKind::Exact)),
            Err(Error::SolverCap(_)) | Err(Error::Config(_)) => {
                Ok((solve_ga(inst, seed, &GaParams::default())?, SolverKind::Ga))
            }
            Err(e) => Err(e),
        },
    }
}

/// Outcome of repeated scheduling under the turbulence gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReschedulingReport {
    pub horizons: usize,
    pub n_targets: usize,
    /// Targets acquired by the end.
    pub served: usize,
    /// Acquisition attempts across all horizons.
    pub attempts: usize,
    /// Targets whose first attempt was cancelled by turbulence.
    pub first_attempt_failures: usize,
    /// Targets attempted at least once.
    pub attempted: usize,
}

impl ReschedulingReport {
    pub fn attempts_per_served(&self) -> f64 {
        self.attempts as f64 / self.served.max(1) as f64
    }
    /// Fraction of attempted targets that needed another pass.
    pub fn rescheduled_fraction(&self) -> f64 {
        self.first_attempt_failures as f64 / self.attempted.max(1) as f64
    }
    pub fn success_rate(&self) -> f64 {
        self.served as f64 / self.n_targets.max(1) as f64
    }
}

/// Re-solves the instance each revisit with only the still-unserved
/// targets, gating every scheduled observation on a turbulence draw.
/// Window geometry repeats horizon to horizon.
pub fn simulate_rescheduling(
    inst: &SchedulingInstance,
    kind: SolverKind,
    model: &crate::atmosphere::TurbulenceModel,
    threshold: f64,
    horizons: usize,
    seed: u64,
    node_cap: usize,
) -> Result<ReschedulingReport> {
    let all_targets = inst.target_ids();
    let mut pending: BTreeSet<usize> = all_targets.iter().copied().collect();
    let mut attempted = BTreeSet::new();
    let mut report = ReschedulingReport {
        horizons: 0,
        n_targets: all_targets.len(),
        served: 0,
        attempts: 0,
        first_attempt_failures: 0,
        attempted: 0,
    };
    for h in 0..horizons {
        if pending.is_empty() {
            break;
        }
        report.horizons = h + 1;
        let mut otws: Vec<ObservationWindow> =
            inst.otws.iter().filter(|o| pending.contains(&o.target_id)).cloned().collect();
        for (i, o) in otws.iter_mut().enumerate() {
            o.id = i;
        }
        let sub = SchedulingInstance::new(otws, inst.agility)?;
        let (schedule, _) = solve(&sub, kind, crate::rng::substream_seed(seed, "resched-solve", h as u64), node_cap)?;
        let mut sampler = crate::atmosphere::Cn2Sampler::new(model.clone(), seed, h as u64)?;
        for obs in &schedule.observations {
            let first_try = attempted.insert(obs.target_id);
            report.attempts += 1;
            let (_, ok) = sampler.attempt(threshold);
            if ok {
                pending.remove(&obs.target_id);
                report.served += 1;
            } else if first_try {
                report.first_attempt_failures += 1;
            }
        }
    }
    report.attempted = attempted.len();
    Ok(report)
}

/// Synthetic benchmark family: per satellite a string of targets whose
/// candidate rewards ramp up to a mid-window peak, so first-fit grabs
/// cheap early epochs while an optimizing solver waits for the peaks.
/// A fraction of targets is also visible from the next satellite, which
/// couples the chains.
pub fn contended_instance(
    n_sats: usize,
    targets_per_sat: usize,
    spacing_s: f64,
    seed: u64,
) -> Result<SchedulingInstance> {
    let mut rng = crate::rng::stream(seed, "instance", 0);
    let agility = AgilitySpec::default();
    let mut otws = Vec::new();
    let half_window = 30.0;
    let step = 10.0;
    for s in 0..n_sats {
        for k in 0..targets_per_sat {
            let target_id = s * targets_per_sat + k;
            let peak_t = 60.0 + k as f64 * spacing_s + rng.random_range(-2.0..2.0);
            let peak_sigma = rng.random_range(0.85..0.95);
            let roll = rng.random_range(-8.0..8.0);
            let mirrored = rng.random::<f64>() < 0.3 && n_sats > 1;
            let emit = |sat: usize, t0: f64, otws: &mut Vec<ObservationWindow>| {
                let mut j = 0;
                loop {
                    let t = t0 - half_window + j as f64 * step;
                    if t > t0 + half_window + 1e-9 {
                        break;
                    }
                    j += 1;
                    let dt = t - t0;
                    let sigma = peak_sigma - 0.011 * dt.abs();
                    otws.push(ObservationWindow {
                        id: 0,
                        sat: SatId::Edge(sat),
                        target_id,
                        vtw_index: 0,
                        time_s: t,
                        window_start_s: t0 - half_window,
                        window_end_s: t0 + half_window,
                        attitude: crate::acquisition::Attitude {
                            roll_deg: roll,
                            pitch_deg: 0.7 * dt,
                            yaw_deg: 0.0,
                        },
                        profit: sigma,
                        slant_range_m: 650e3,
                        incidence_deg: 20.0,
                    });
                }
            };
            emit(s, peak_t, &mut otws);
            if mirrored {
                emit((s + 1) % n_sats, peak_t + rng.random_range(5.0..15.0), &mut otws);
            }
        }
    }
    otws.sort_by(|a, b| {
        a.time_s
            .total_cmp(&b.time_s)
            .then_with(|| a.sat.cmp(&b.sat))
            .then_with(|| a.target_id.cmp(&b.target_id))
    });
    for (i, o) in otws.iter_mut().enumerate() {
        o.id = i;
    }
    SchedulingInstance::new(otws, agility)
}

//! Energy-minimal allocation of a slot's frames across the processing
//! pool.
//!
//! Every capture slot produces a batch of frames on the source satellite.
//! The batch is split into shares: each edge worker receives its share
//! over ring links, processes it at the lowest clock that fills the slot,
//! and forwards the compressed results toward the downlink satellite; an
//! optional ground worker receives raw frames over the space-to-ground
//! channel instead. In steady state every slot carries one batch's
//! scatter and an earlier batch's gather, so link-time constraints sum
//! both flows.
//!
//! The program minimizes constellation energy, linear transport terms
//! plus the cubic-clock processing energy, over the share simplex with
//! per-worker capacity boxes and link-time rows. It is solved exactly by
//! dual ascent on the link rows around a waterfilling bisection on the
//! simplex multiplier, and every answer ships with its measured
//! optimality residuals.

use serde::{Deserialize, Serialize};

use crate::compute::{mean_exec_time_s, power_w, PlatformSpec, WorkloadSpec};
use crate::network::LinkSpec;
use crate::{Error, Result};

/// Relative residual the solver must reach before an answer counts as
/// optimal.
pub const KKT_TOLERANCE: f64 = 1e-6;

/// Which slot's downlink rate prices raw frames sent to the ground
/// worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawSlotConvention {
    /// The source downlinks raw frames during the capture slot itself.
    #[default]
    RawAtCaptureSlot,
    /// Raw frames ride the ring and drop at the gather slot's rate.
    RawAtGatherSlot,
}

/// One member of the processing pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub name: String,
    pub platform: PlatformSpec,
    /// Ring links its raw share crosses.
    pub scatter_links: Vec<usize>,
    /// Ring links its results cross toward the downlink satellite.
    pub gather_links: Vec<usize>,
    pub ground: bool,
}

/// A solvable allocation problem with all rates resolved to numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessingInstance {
    pub workers: Vec<Worker>,
    pub link: LinkSpec,
    /// Ring links indexable by the workers' routes.
    pub n_links: usize,
    pub t_slot_s: f64,
    /// Frames arriving per slot.
    pub n_images: usize,
    pub d_img_bits: f64,
    pub workload: WorkloadSpec,
    /// Downlink rate pricing raw frames, per the convention.
    pub r_raw_bps: f64,
    /// Downlink rate for results at the gather slot.
    pub r_result_bps: f64,
    /// Propagation reserve carved out of the downlink slot budget.
    pub t_delay_s: f64,
    pub convention: RawSlotConvention,
}

impl ProcessingInstance {
    pub fn validate(&self) -> Result<()> {
        if self.workers.is_empty() {
            return Err(Error::Config("processing pool is empty".into()));
        }
        if self.n_images == 0 {
            return Err(Error::Config("a slot with no frames needs no allocation".into()));
        }
        if !(self.t_slot_s > 0.0) || !(self.d_img_bits > 0.0) {
            return Err(Error::Config("slot length and frame size must be positive".into()));
        }
        if self.t_delay_s < 0.0 || self.t_delay_s >= self.t_slot_s {
            return Err(Error::Config(format!(
                "propagation reserve {} must sit inside the {} s slot",
                self.t_delay_s, self.t_slot_s
            )));
        }
        self.workload.validate()?;
        self.link.validate()?;
        let mut names = std::collections::BTreeSet::new();
        for w in &self.workers {
            w.platform.validate()?;
            if !names.insert(&w.name) {
                return Err(Error::Config(format!("duplicate worker name {}", w.name)));
            }
            for &l in w.scatter_links.iter().chain(&w.gather_links) {
                if l >= self.n_links {
                    return Err(Error::Config(format!(
                        "worker {} references link {l} of {}",
                        w.name, self.n_links
                    )));
                }
            }
            if w.ground && !w.gather_links.is_empty() {
                return Err(Error::Config(format!(
                    "ground worker {} keeps results on the ground",
                    w.name
                )));
            }
        }
        let any_edge = self.workers.iter().any(|w| !w.ground);
        if any_edge && !(self.r_result_bps > 0.0) {
            return Err(Error::Config(
                "edge workers need a positive result downlink rate".into(),
            ));
        }
        if self.workers.iter().any(|w| w.ground) && !(self.r_raw_bps > 0.0) {
            return Err(Error::Config("ground worker needs a positive raw downlink rate".into()));
        }
        Ok(())
    }

    /// Raw bits of one slot's batch.
    pub fn batch_bits(&self) -> f64 {
        self.n_images as f64 * self.d_img_bits
    }

    /// Share at which a worker's slot-filling clock reaches its maximum.
    pub fn share_cap(&self, p: usize) -> f64 {
        let w = &self.workers[p];
        let mu = mean_exec_time_s(&w.platform, w.platform.f_max_hz, &self.workload)
            .expect("f_max is in domain");
        self.t_slot_s / (self.n_images as f64 * mu)
    }

    /// Box upper bound for a share.
    pub fn share_upper(&self, p: usize) -> f64 {
        self.share_cap(p).min(1.0)
    }

    /// Slot-filling clock for a share; zero share idles the worker.
    pub fn share_frequency_hz(&self, p: usize, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let w = &self.workers[p];
        crate::compute::optimal_frequency_hz(
            &w.platform,
            &self.workload,
            x * self.n_images as f64,
            self.t_slot_s,
        )
    }

    /// Processing energy of a share over one slot: P_max T (f*/f_max)^3.
    pub fn processing_energy_j(&self, p: usize, x: f64) -> Result<f64> {
        let f = self.share_frequency_hz(p, x)?;
        Ok(power_w(&self.workers[p].platform, f) * self.t_slot_s)
    }

    /// Marginal constellation energy of a share beyond transport: zero
    /// for ground workers, whose processing burns grid power.
    fn objective_prime(&self, p: usize, x: f64) -> f64 {
        if self.workers[p].ground {
            0.0
        } else {
            self.processing_energy_prime(p, x)
        }
    }

    /// Derivative of the processing energy in the share.
    fn processing_energy_prime(&self, p: usize, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let w = &self.workers[p];
        let n = self.n_images as f64;
        let a = w.platform.work_cycles(self.workload.flops_per_image);
        let m = w.platform.mu_sync_s;
        let t = self.t_slot_s;
        let denom = t - m * n * x;
        debug_assert!(denom > 0.0);
        let phi = a * n * x / denom;
        let phi_prime = a * n * t / (denom * denom);
        3.0 * w.platform.p_max_w * t * phi * phi * phi_prime / w.platform.f_max_hz.powi(3)
    }

    /// Linear transport energy per unit share, charged to the
    /// constellation.
    fn linear_coeff_j(&self, p: usize) -> f64 {
        let w = &self.workers[p];
        let d = self.batch_bits();
        let isl = self.link.p_isl_w / self.link.r_isl_bps;
        let mut c = d * isl * w.scatter_links.len() as f64;
        if w.ground {
            c += d * self.link.p_dl_w / self.r_raw_bps;
        } else {
            c += d / self.workload.rho
                * (isl * w.gather_links.len() as f64 + self.link.p_dl_w / self.r_result_bps);
        }
        c
    }

    /// Link-time rows A x <= b. One shared downlink row and one row per
    /// used ring link; each sums the slot's scatter with the steady-state
    /// gather riding the same link.
    pub fn rows(&self) -> Vec<ConstraintRow> {
        let d = self.batch_bits();
        let mut rows = Vec::new();
        let mut dl = vec![0.0; self.workers.len()];
        let mut any_dl = false;
        for (p, w) in self.workers.iter().enumerate() {
            if w.ground {
                dl[p] = d / self.r_raw_bps;
            } else {
                dl[p] = d / self.workload.rho / self.r_result_bps;
            }
            any_dl = true;
        }
        if any_dl {
            rows.push(ConstraintRow {
                label: "downlink_time".into(),
                coeffs: dl,
                bound: self.t_slot_s - self.t_delay_s,
            });
        }
        for l in 0..self.n_links {
            let mut coeffs = vec![0.0; self.workers.len()];
            let mut used = false;
            for (p, w) in self.workers.iter().enumerate() {
                let mut c = 0.0;
                if w.scatter_links.contains(&l) {
                    c += d;
                }
                if w.gather_links.contains(&l) {
                    c += d / self.workload.rho;
                }
                if c > 0.0 {
                    coeffs[p] = c / self.link.r_isl_bps;
                    used = true;
                }
            }
            if used {
                rows.push(ConstraintRow {
                    label: format!("isl_link_{l}"),
                    coeffs,
                    bound: self.t_slot_s,
                });
            }
        }
        rows
    }

    /// Highest steady load, frames per second, the pool can absorb.
    pub fn max_supported_load_fps(&self) -> f64 {
        let mus: Vec<f64> = self
            .workers
            .iter()
            .map(|w| {
                mean_exec_time_s(&w.platform, w.platform.f_max_hz, &self.workload)
                    .expect("f_max is in domain")
            })
            .collect();
        // Sum of min(1, 1/(load mu)) falls below 1 past the capacity.
        let mut lo = 0.0;
        let mut hi = mus.iter().map(|m| 1.0 / m).sum::<f64>() + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let coverage: f64 = mus.iter().map(|&m| (1.0 / (mid * m)).min(1.0)).sum();
            if coverage >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub label: String,
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

/// Measured optimality residuals of a returned allocation, all relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Box-projected gradient residual over the marginal-energy scale.
    pub stationarity: f64,
    /// Simplex, box and link-row violation over each row's bound.
    pub primal_feasibility: f64,
    /// Multiplier times slack over the objective scale.
    pub complementarity: f64,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity.max(self.primal_feasibility).max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Share of the batch per worker, summing to one.
    pub shares: Vec<f64>,
    /// Slot-filling clock per worker, Hz.
    pub frequencies_hz: Vec<f64>,
    /// Constellation energy of one slot, J.
    pub objective_j: f64,
    /// Multipliers of the link-time rows, in row order.
    pub duals: Vec<f64>,
    pub kkt: KktReport,
}

/// Energy of one slot under given shares, split by category. Ground
/// processing burns grid power and stays outside the satellite total.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub scatter_isl_j: f64,
    pub downlink_raw_j: f64,
    pub processing_edge_j: f64,
    pub processing_ground_j: f64,
    pub gather_isl_j: f64,
    pub downlink_result_j: f64,
}

impl EnergyBreakdown {
    pub fn satellite_j(&self) -> f64 {
        self.scatter_isl_j
            + self.downlink_raw_j
            + self.processing_edge_j
            + self.gather_isl_j
            + self.downlink_result_j
    }
    pub fn total_j(&self) -> f64 {
        self.satellite_j() + self.processing_ground_j
    }
}

/// Prices an arbitrary share vector category by category.
pub fn account_energy(inst: &ProcessingInstance, shares: &[f64]) -> Result<EnergyBreakdown> {
    if shares.len() != inst.workers.len() {
        return Err(Error::Config(format!(
            "{} shares for {} workers",
            shares.len(),
            inst.workers.len()
        )));
    }
    let d = inst.batch_bits();
    let isl = inst.link.p_isl_w / inst.link.r_isl_bps;
    let mut out = EnergyBreakdown::default();
    for (p, w) in inst.workers.iter().enumerate() {
        let x = shares[p];
        if x <= 0.0 {
            continue;
        }
        out.scatter_isl_j += x * d * isl * w.scatter_links.len() as f64;
        let e_proc = inst.processing_energy_j(p, x)?;
        if w.ground {
            out.downlink_raw_j += x * d * inst.link.p_dl_w / inst.r_raw_bps;
            out.processing_ground_j += e_proc;
        } else {
            out.processing_edge_j += e_proc;
            out.gather_isl_j += x * d / inst.workload.rho * isl * w.gather_links.len() as f64;
            out.downlink_result_j += x * d / inst.workload.rho * inst.link.p_dl_w / inst.r_result_bps;
        }
    }
    Ok(out)
}

/// Mean power over a slot, W, per category.
pub fn mean_power_w(inst: &ProcessingInstance, shares: &[f64]) -> Result<EnergyBreakdown> {
    let e = account_energy(inst, shares)?;
    let t = inst.t_slot_s;
    Ok(EnergyBreakdown {
        scatter_isl_j: e.scatter_isl_j / t,
        downlink_raw_j: e.downlink_raw_j / t,
        processing_edge_j: e.processing_edge_j / t,
        processing_ground_j: e.processing_ground_j / t,
        gather_isl_j: e.gather_isl_j / t,
        downlink_result_j: e.downlink_result_j / t,
    })
}

/// Shares minimizing the penalized separable objective at a given simplex
/// multiplier nu: per coordinate, the box-clamped solution of
/// E'_p(x) = nu - c_p.
fn shares_at_nu(
    inst: &ProcessingInstance,
    lin: &[f64],
    upper: &[f64],
    nu: f64,
) -> Vec<f64> {
    let mut x = vec![0.0; lin.len()];
    for p in 0..lin.len() {
        let target = nu - lin[p];
        if target <= 0.0 || upper[p] <= 0.0 {
            continue;
        }
        let at_upper = inst.objective_prime(p, upper[p] * (1.0 - 1e-12));
        if at_upper <= target {
            x[p] = upper[p];
            continue;
        }
        let (mut lo, mut hi) = (0.0, upper[p]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if inst.objective_prime(p, mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x[p] = 0.5 * (lo + hi);
    }
    x
}

/// Solves the share simplex for given penalized linear coefficients,
/// waterfilling on the simplex multiplier.
fn solve_simplex(
    inst: &ProcessingInstance,
    lin: &[f64],
    upper: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let sum_at = |nu: f64| shares_at_nu(inst, lin, upper, nu).iter().sum::<f64>();
    let mut lo = lin.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = lo.max(0.0) + 1.0;
    for _ in 0..200 {
        if sum_at(hi) >= 1.0 {
            break;
        }
        hi = hi * 2.0 + 1.0;
    }
    if sum_at(hi) < 1.0 - 1e-9 {
        return Err(Error::InfeasibleLoad(format!(
            "pool capacity {:.4} of the batch at unbounded marginal energy",
            sum_at(hi)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = shares_at_nu(inst, lin, upper, hi);
    // Ground shares cost nothing beyond transport, so their waterfilled
    // value jumps 0 to upper as nu crosses the linear coefficient and the
    // bisection can overshoot the simplex. Trimming those flat
    // coordinates, costliest first, restores the budget exactly.
    let mut excess = x.iter().sum::<f64>() - 1.0;
    if excess > 0.0 {
        let mut flat: Vec<usize> = (0..x.len())
            .filter(|&p| inst.workers[p].ground && x[p] > 0.0)
            .collect();
        flat.sort_by(|&a, &b| lin[b].total_cmp(&lin[a]));
        for p in flat {
            let cut = x[p].min(excess);
            x[p] -= cut;
            excess -= cut;
            if excess <= 0.0 {
                break;
            }
        }
    }
    Ok((x, hi))
}

/// Exact solve by cyclic dual ascent on the link-time rows: each row's
/// multiplier is bisected so the row's load meets its bound exactly (or
/// the multiplier drops to zero when the row holds for free), which
/// keeps every accepted multiplier complementary by construction.
pub fn solve(inst: &ProcessingInstance) -> Result<Allocation> {
    inst.validate()?;
    let n = inst.workers.len();
    let upper: Vec<f64> = (0..n).map(|p| inst.share_upper(p)).collect();
    let capacity: f64 = upper.iter().sum();
    if capacity < 1.0 - 1e-9 {
        return Err(Error::InfeasibleLoad(format!(
            "pool absorbs at most {:.4} of the batch per slot",
            capacity
        )));
    }
    let lin: Vec<f64> = (0..n).map(|p| inst.linear_coeff_j(p)).collect();
    let rows = inst.rows();

    // Row-wise minimum over the box-capped simplex shows hard
    // infeasibility before any ascent.
    for row in &rows {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| row.coeffs[a].total_cmp(&row.coeffs[b]));
        let mut remaining = 1.0;
        let mut least = 0.0;
        for &p in &order {
            let take = upper[p].min(remaining);
            least += take * row.coeffs[p];
            remaining -= take;
            if remaining <= 1e-12 {
                break;
            }
        }
        if least > row.bound + 1e-9 {
            return Err(Error::Infeasible(vec![row.label.clone()]));
        }
    }

    let obj_scale = lin
        .iter()
        .cloned()
        .fold(1.0f64, f64::max)
        .max((0..n).map(|p| inst.objective_prime(p, upper[p] * 0.999)).fold(0.0, f64::max));
    let solve_at = |lambda: &[f64]| -> Result<(Vec<f64>, f64)> {
        let pen: Vec<f64> = (0..n)
            .map(|p| lin[p] + rows.iter().zip(lambda).map(|(r, l)| l * r.coeffs[p]).sum::<f64>())
            .collect();
        solve_simplex(inst, &pen, &upper)
    };
    let row_load = |x: &[f64], r: usize| -> f64 {
        rows[r].coeffs.iter().zip(x).map(|(c, xi)| c * xi).sum()
    };

    let mut lambda = vec![0.0f64; rows.len()];
    let (mut shares, mut nu) = solve_at(&lambda)?;
    for _sweep in 0..100 {
        let mut moved = false;
        for r in 0..rows.len() {
            // A row that holds without its multiplier releases it.
            let mut trial = lambda.clone();
            trial[r] = 0.0;
            let (x0, nu0) = solve_at(&trial)?;
            if row_load(&x0, r) <= rows[r].bound * (1.0 + 1e-12) {
                moved |= lambda[r] != 0.0;
                lambda = trial;
                shares = x0;
                nu = nu0;
                continue;
            }
            // Otherwise bisect the multiplier onto the bound; the load
            // falls monotonically in it.
            let mut hi = obj_scale.max(lambda[r]).max(1e-9);
            let mut capped = None;
            for _ in 0..60 {
                trial[r] = hi;
                let (xh, nuh) = solve_at(&trial)?;
                if row_load(&xh, r) <= rows[r].bound {
                    capped = Some((xh, nuh));
                    break;
                }
                hi *= 2.0;
            }
            let Some((mut xr, mut nur)) = capped else {
                return Err(Error::InfeasibleLoad(format!(
                    "row {} cannot be brought inside its bound",
                    rows[r].label
                )));
            };
            let mut lo = 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                trial[r] = mid;
                let (xm, num) = solve_at(&trial)?;
                if row_load(&xm, r) <= rows[r].bound {
                    hi = mid;
                    xr = xm;
                    nur = num;
                } else {
                    lo = mid;
                }
            }
            trial[r] = hi;
            moved |= (lambda[r] - hi).abs() > 1e-12 * obj_scale.max(1.0);
            lambda = trial;
            shares = xr;
            nu = nur;
        }
        let feasible = (0..rows.len()).all(|r| row_load(&shares, r) <= rows[r].bound * (1.0 + 1e-9));
        if feasible && !moved {
            break;
        }
    }

    // Final multipliers from the converged shares: re-derive the
    // penalized gradient and measure every optimality condition.
    let pen: Vec<f64> = (0..n)
        .map(|p| lin[p] + rows.iter().zip(&lambda).map(|(r, l)| l * r.coeffs[p]).sum::<f64>())
        .collect();
    let mut stationarity = 0.0f64;
    for p in 0..n {
        let grad = pen[p] + inst.objective_prime(p, shares[p]) - nu;
        let viol = if shares[p] <= 1e-12 {
            (-grad).max(0.0)
        } else if shares[p] >= upper[p] - 1e-12 {
            grad.max(0.0)
        } else {
            grad.abs()
        };
        stationarity = stationarity.max(viol / obj_scale);
    }
    let mut primal = (shares.iter().sum::<f64>() - 1.0).abs();
    for (p, &x) in shares.iter().enumerate() {
        primal = primal.max(-x).max(x - upper[p]);
    }
    let mut compl = 0.0f64;
    for (r, row) in rows.iter().enumerate() {
        let load: f64 = row.coeffs.iter().zip(&shares).map(|(c, xi)| c * xi).sum();
        primal = primal.max((load - row.bound) / row.bound);
        compl = compl.max(lambda[r] * (row.bound - load).max(0.0) / (row.bound * obj_scale));
    }
    let kkt = KktReport { stationarity, primal_feasibility: primal.max(0.0), complementarity: compl };

    let frequencies_hz: Vec<f64> =
        (0..n).map(|p| inst.share_frequency_hz(p, shares[p])).collect::<Result<_>>()?;
    let objective_j = account_energy(inst, &shares)?.satellite_j();
    Ok(Allocation { shares, frequencies_hz, objective_j, duals: lambda, kkt })
}

/// Rebuilds the instance with the propagation reserve taken from the
/// hops actually used, then solves once more. Two passes reach the fixed
/// point because shrinking the reserve only widens the feasible set.
pub fn solve_with_delay_refinement(
    inst: &ProcessingInstance,
    t_prop_per_hop_s: f64,
) -> Result<(Allocation, f64)> {
    let first = solve(inst)?;
    let used_delay = |alloc: &Allocation| -> f64 {
        inst.workers
            .iter()
            .zip(&alloc.shares)
            .filter(|(_, &x)| x > 1e-9)
            .map(|(w, _)| w.gather_links.len().max(w.scatter_links.len()) as f64)
            .fold(0.0, f64::max)
            * t_prop_per_hop_s
    };
    let refined_delay = used_delay(&first);
    if (refined_delay - inst.t_delay_s).abs() < 1e-12 {
        return Ok((first, refined_delay));
    }
    let mut tighter = inst.clone();
    tighter.t_delay_s = refined_delay;
    let second = solve(&tighter)?;
    Ok((second, refined_delay))
}

/// Pool description for a single steady-state snapshot on the ring.
#[derive(Debug, Clone)]
pub struct SnapshotConfig {
    pub n_edge: usize,
    pub source: usize,
    pub downlink: usize,
    /// Platform run on every edge satellite; None fields the ground only.
    pub edge_platform: Option<PlatformSpec>,
    pub ground_platform: Option<PlatformSpec>,
    pub link: LinkSpec,
    pub t_slot_s: f64,
    pub load_fps: f64,
    pub workload: WorkloadSpec,
    pub d_img_bits: f64,
    pub r_raw_bps: f64,
    pub r_result_bps: f64,
    pub t_delay_s: f64,
    pub convention: RawSlotConvention,
}

/// Builds the allocation instance for one snapshot: every edge satellite
/// is a worker with min-hop scatter and gather routes, plus the optional
/// ground worker.
pub fn build_snapshot(cfg: &SnapshotConfig) -> Result<ProcessingInstance> {
    if cfg.source >= cfg.n_edge || cfg.downlink >= cfg.n_edge {
        return Err(Error::Config("source and downlink must sit on the ring".into()));
    }
    let ring = crate::network::RingTopology::new(cfg.n_edge, 1.0)?;
    let mut workers = Vec::new();
    if let Some(p) = &cfg.edge_platform {
        for i in 0..cfg.n_edge {
            workers.push(Worker {
                name: format!("edge{i}"),
                platform: p.clone(),
                scatter_links: ring.route(cfg.source, i)?.links,
                gather_links: ring.route(i, cfg.downlink)?.links,
                ground: false,
            });
        }
    }
    if let Some(p) = &cfg.ground_platform {
        let scatter = match cfg.convention {
            RawSlotConvention::RawAtCaptureSlot => Vec::new(),
            RawSlotConvention::RawAtGatherSlot => ring.route(cfg.source, cfg.downlink)?.links,
        };
        workers.push(Worker {
            name: "ground".into(),
            platform: p.clone(),
            scatter_links: scatter,
            gather_links: Vec::new(),
            ground: true,
        });
    }
    let n_images = (cfg.load_fps * cfg.t_slot_s).round() as usize;
    let inst = ProcessingInstance {
        workers,
        link: cfg.link.clone(),
        n_links: cfg.n_edge,
        t_slot_s: cfg.t_slot_s,
        n_images,
        d_img_bits: cfg.d_img_bits,
        workload: cfg.workload,
        r_raw_bps: cfg.r_raw_bps,
        r_result_bps: cfg.r_result_bps,
        t_delay_s: cfg.t_delay_s,
        convention: cfg.convention,
    };
    inst.validate()?;
    Ok(inst)
}

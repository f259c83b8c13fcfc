//! Solves one contended scheduling instance with all three solvers and
//! compares their schedules under the shared maneuver-energy budget.

use leo_edge::obs_sched::{
    contended_instance, solve, SolverKind,
};
use leo_edge::Result;

fn main() -> Result<()> {
    // Two satellites, 25 targets each, candidates 16 s apart: tight
    // enough that greedy epoch choices cost profit.
    let inst = contended_instance(2, 25, 16.0, 42)?;
    println!(
        "{} candidate observations for {} targets\n",
        inst.otws.len(),
        inst.target_ids().len()
    );

    println!("solver   profit   observed   energy_per_sat_j");
    for kind in [SolverKind::Exact, SolverKind::Ga, SolverKind::Fifo] {
        let (schedule, used) = solve(&inst, kind, 7, 1_000_000)?;
        let energy: Vec<String> = schedule
            .energy_by_sat
            .iter()
            .map(|(_, e)| format!("{e:.1}"))
            .collect();
        println!(
            "{:<6}   {:>6.2}   {:>8}   {}",
            used.to_string(),
            schedule.profit,
            schedule.observations.len(),
            energy.join(" / ")
        );
    }

    let (best, _) = solve(&inst, SolverKind::Exact, 7, 1_000_000)?;
    println!("\nhead of the optimal chain:");
    println!("  time_s   target   profit   maneuver_j");
    for obs in best.observations.iter().take(8) {
        println!(
            "  {:>6.1}   {:>6}   {:>6.3}   {:>10.2}",
            obs.time_s, obs.target_id, obs.profit, obs.maneuver_energy_j
        );
    }
    Ok(())
}

//! Computes visibility windows for the shipped baseline: which targets
//! the observing satellite can see, when, and at what look angle.

use leo_edge::geometry::{
    compute_visibility_windows, off_nadir_deg, surface_point_ecef,
};
use leo_edge::scenario::Scenario;
use leo_edge::Result;

fn main() -> Result<()> {
    let s = Scenario::baseline();
    let spec = &s.constellation;
    let windows = compute_visibility_windows(
        spec,
        &s.observers,
        &s.targets,
        0.0,
        s.horizon_s,
        s.max_off_nadir_deg,
        s.window_scan_step_s,
    )?;

    println!(
        "{} windows for {} targets over {} s (max off-nadir {} deg)\n",
        windows.len(),
        s.targets.len(),
        s.horizon_s,
        s.max_off_nadir_deg
    );
    println!("target      start_s        end_s   span_s   mid_off_nadir_deg");
    for w in &windows {
        let mid = 0.5 * (w.start_s + w.end_s);
        let sat = spec.propagate(w.sat, mid)?;
        let t = &s.targets[w.target_id];
        let ground = surface_point_ecef(t.lat_deg, t.lon_deg, spec.earth_radius_km);
        println!(
            "{:>6}   {:>10.2}   {:>10.2}   {:>6.2}   {:>17.2}",
            w.target_id,
            w.start_s,
            w.end_s,
            w.end_s - w.start_s,
            off_nadir_deg(sat, ground)
        );
    }
    Ok(())
}

//! Allocates one slot's batch across the ring and the ground station,
//! showing the energy-optimal shares, clocks and the binding link rows.

use leo_edge::compute::PlatformSpec;
use leo_edge::network::LinkSpec;
use leo_edge::proc_sched::{
    build_snapshot, mean_power_w, solve, RawSlotConvention, SnapshotConfig,
};
use leo_edge::Result;

fn main() -> Result<()> {
    let cfg = SnapshotConfig {
        n_edge: 23,
        source: 0,
        downlink: 5,
        edge_platform: Some(PlatformSpec::jetson_agx()),
        ground_platform: Some(PlatformSpec::cloud_cpu()),
        link: LinkSpec::baseline(),
        t_slot_s: 10.0,
        load_fps: 260.1,
        workload: leo_edge::compute::WorkloadSpec::detection_default(),
        d_img_bits: 788_513.0,
        r_raw_bps: 2.3018e9,
        r_result_bps: 2.3018e9,
        t_delay_s: 0.0698,
        convention: RawSlotConvention::RawAtCaptureSlot,
    };
    let inst = build_snapshot(&cfg)?;
    println!(
        "allocating {} frames per {} s slot across {} workers \
         (pool sustains up to {:.1} fps)\n",
        inst.n_images,
        inst.t_slot_s,
        inst.workers.len(),
        inst.max_supported_load_fps()
    );

    let alloc = solve(&inst)?;
    println!("worker    share     f/f_max   power_w");
    for (i, w) in inst.workers.iter().enumerate() {
        if alloc.shares[i] <= 1e-12 {
            continue;
        }
        println!(
            "{:<7}   {:.4}   {:>7.3}   {:>7.2}",
            w.name,
            alloc.shares[i],
            alloc.frequencies_hz[i] / w.platform.f_max_hz,
            leo_edge::compute::power_w(&w.platform, alloc.frequencies_hz[i])
        );
    }

    let power = mean_power_w(&inst, &alloc.shares)?;
    println!("\nslot energy objective: {:.1} J (satellite side)", alloc.objective_j);
    println!(
        "mean power: satellites {:.2} W, ground {:.2} W",
        power.satellite_j(),
        power.processing_ground_j
    );
    println!("kkt residual: {:.2e}", alloc.kkt.max_residual());

    for (row, dual) in inst.rows().iter().zip(&alloc.duals) {
        if *dual > 1e-9 {
            println!("binding link row {:?} with multiplier {dual:.3}", row.label);
        }
    }
    Ok(())
}

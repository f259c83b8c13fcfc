//! Prices the detection workload on every platform: batch execution
//! time, peak throughput and the energy of one processed image.

use leo_edge::compute::{
    energy_per_image_j, fps_max, mean_exec_time_s, power_w, PlatformSpec, WorkloadSpec,
};
use leo_edge::Result;

fn main() -> Result<()> {
    let w = WorkloadSpec::detection_default();
    println!(
        "workload: {:.1} GFLOPs per image, result compression {}x\n",
        w.flops_per_image / 1e9,
        w.rho
    );
    println!("platform        cores   f_max_ghz   p_max_w   exec_ms   fps_max   j_per_image");
    for p in [
        PlatformSpec::cloud_cpu(),
        PlatformSpec::satellite_cpu(),
        PlatformSpec::jetson_nano(),
        PlatformSpec::jetson_agx(),
    ] {
        println!(
            "{:<13}   {:>5}   {:>9.2}   {:>7}   {:>7.2}   {:>7.2}   {:>11.2}",
            p.name,
            p.n_cores,
            p.f_max_hz / 1e9,
            p.p_max_w,
            1e3 * mean_exec_time_s(&p, p.f_max_hz, &w)?,
            fps_max(&p, &w),
            energy_per_image_j(&p, p.f_max_hz, &w)?,
        );
    }

    // Cubic dynamic power makes half clock an eighth of the draw; the
    // slot-filling allocator lives off this margin.
    let agx = PlatformSpec::jetson_agx();
    println!("\njetson_agx power over clock:");
    for frac in [1.0, 0.75, 0.5, 0.25] {
        let f = frac * agx.f_max_hz;
        println!(
            "  {:>4.2} f_max: {:>6.2} W, {:>6.2} fps",
            frac,
            power_w(&agx, f),
            1.0 / mean_exec_time_s(&agx, f, &w)?
        );
    }
    Ok(())
}

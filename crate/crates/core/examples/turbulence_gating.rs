//! Samples the optical-turbulence model and shows how thresholding the
//! structure constant gates acquisitions.

use leo_edge::atmosphere::{Cn2Sampler, TurbulenceModel, DEFAULT_CN2_THRESHOLD};
use leo_edge::Result;

fn main() -> Result<()> {
    let model = TurbulenceModel::default_lognormal();

    println!("threshold_cn2   P(acquisition succeeds)");
    for thr in [5e-15, 1.1e-14, DEFAULT_CN2_THRESHOLD, 5e-14, 1e-13] {
        println!("{thr:>13.2e}   {:>23.4}", model.success_probability(thr));
    }

    let n = 20_000;
    let mut sampler = Cn2Sampler::new(model.clone(), 11, 0)?;
    let mut ok = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (cn2, passed) = sampler.attempt(DEFAULT_CN2_THRESHOLD);
        if passed {
            ok += 1;
        }
        worst = worst.max(cn2);
    }
    println!(
        "\n{n} draws at the default threshold {DEFAULT_CN2_THRESHOLD:.1e}: \
         {:.4} passed (model says {:.4}), worst seeing {worst:.2e}",
        ok as f64 / n as f64,
        model.success_probability(DEFAULT_CN2_THRESHOLD)
    );
    Ok(())
}

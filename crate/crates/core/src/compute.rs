//! Bulk-synchronous-parallel (BSP) execution model for image processing.
//!
//! A platform runs a batch of identical inference tasks, one image per core
//! group, in supersteps: per-image compute time scales inversely with clock
//! frequency while a fixed synchronization overhead does not. Dynamic power
//! follows the usual cubic law in frequency. On top of the deterministic
//! model sits a stochastic execution-time model: per-frequency Gamma fits
//! whose parameters are smoothed by cubic regression over frequency, so
//! batch durations have a closed Gamma form.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::{Error, Result};

/// Where a processor lives; satellite platforms are energy-constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatformKind {
    Satellite,
    Ground,
}

/// A processing platform described by its BSP constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub name: String,
    pub kind: PlatformKind,
    pub n_cores: u32,
    pub f_max_hz: f64,
    pub p_max_w: f64,
    /// FLOPs retired per core per cycle.
    pub n_flops_per_cycle: f64,
    /// Computation inefficiency factor, >= 1 for real platforms.
    pub mu_c: f64,
    /// Per-batch synchronization overhead in seconds.
    pub mu_sync_s: f64,
    /// Whether execution times jitter (GPU pipelines) or are effectively
    /// deterministic (CPU batch processing).
    pub exec_jitter: bool,
}

impl PlatformSpec {
    /// 64-core server CPU used as the ground-station processor.
    pub fn cloud_cpu() -> Self {
        PlatformSpec {
            name: "cloud_cpu".into(),
            kind: PlatformKind::Ground,
            n_cores: 64,
            f_max_hz: 2.6e9,
            p_max_w: 280.0,
            n_flops_per_cycle: 32.0,
            mu_c: 1.079,
            mu_sync_s: 0.0,
            exec_jitter: false,
        }
    }

    /// 8-core mobile-class CPU flown on small satellites.
    pub fn satellite_cpu() -> Self {
        PlatformSpec {
            name: "satellite_cpu".into(),
            kind: PlatformKind::Satellite,
            n_cores: 8,
            f_max_hz: 1.8e9,
            p_max_w: 6.0,
            n_flops_per_cycle: 32.0,
            mu_c: 1.079,
            mu_sync_s: 0.0,
            exec_jitter: false,
        }
    }

    /// Entry-level embedded GPU module.
    pub fn jetson_nano() -> Self {
        PlatformSpec {
            name: "jetson_nano".into(),
            kind: PlatformKind::Satellite,
            n_cores: 1024,
            f_max_hz: 1.02e9,
            p_max_w: 25.0,
            n_flops_per_cycle: 2.0,
            mu_c: 1.071,
            mu_sync_s: 17.48e-3,
            exec_jitter: true,
        }
    }

    /// High-end embedded GPU module.
    pub fn jetson_agx() -> Self {
        PlatformSpec {
            name: "jetson_agx".into(),
            kind: PlatformKind::Satellite,
            n_cores: 2048,
            f_max_hz: 1.3e9,
            p_max_w: 60.0,
            n_flops_per_cycle: 2.0,
            mu_c: 1.122,
            mu_sync_s: 14.14e-3,
            exec_jitter: true,
        }
    }

    /// Looks a catalog platform up by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cloud_cpu" => Ok(Self::cloud_cpu()),
            "satellite_cpu" => Ok(Self::satellite_cpu()),
            "jetson_nano" => Ok(Self::jetson_nano()),
            "jetson_agx" => Ok(Self::jetson_agx()),
            other => Err(Error::Config(format!(
                "unknown platform {other:?}; known: cloud_cpu, satellite_cpu, jetson_nano, jetson_agx"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cores == 0
            || self.f_max_hz <= 0.0
            || self.p_max_w <= 0.0
            || self.n_flops_per_cycle <= 0.0
            || self.mu_c < 1.0
            || self.mu_sync_s < 0.0
        {
            return Err(Error::Config(format!("platform {:?} has invalid constants", self.name)));
        }
        Ok(())
    }

    /// Work seconds-Hz per image: mu_c W / (N_cores N_flops).
    pub fn work_cycles(&self, flops_per_image: f64) -> f64 {
        self.mu_c * flops_per_image / (f64::from(self.n_cores) * self.n_flops_per_cycle)
    }
}

/// Inference workload constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    /// FLOPs needed to process one image.
    pub flops_per_image: f64,
    /// Compression ratio from raw image bits to shipped semantic bits.
    pub rho: f64,
}

impl WorkloadSpec {
    /// Object-detection workload with aggressive semantic compression.
    pub fn detection_default() -> Self {
        WorkloadSpec { flops_per_image: 79.1e9, rho: 2346.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.flops_per_image <= 0.0 {
            return Err(Error::Config("flops_per_image must be positive".into()));
        }
        if self.rho < 1.0 {
            return Err(Error::Config(format!("compression ratio {} must be >= 1", self.rho)));
        }
        Ok(())
    }
}

/// Mean per-image execution time at clock `f`: work / f + sync overhead.
pub fn mean_exec_time_s(p: &PlatformSpec, f_hz: f64, w: &WorkloadSpec) -> Result<f64> {
    if !(f_hz > 0.0) || f_hz > p.f_max_hz * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "frequency {:.3e} Hz outside (0, {:.3e}] for {}",
            f_hz, p.f_max_hz, p.name
        )));
    }
    Ok(p.work_cycles(w.flops_per_image) / f_hz + p.mu_sync_s)
}

/// Dynamic power at clock `f`: P_max (f / f_max)^3.
pub fn power_w(p: &PlatformSpec, f_hz: f64) -> f64 {
    p.p_max_w * (f_hz / p.f_max_hz).powi(3)
}

/// Energy to process one image at clock `f`.
pub fn energy_per_image_j(p: &PlatformSpec, f_hz: f64, w: &WorkloadSpec) -> Result<f64> {
    Ok(power_w(p, f_hz) * mean_exec_time_s(p, f_hz, w)?)
}

/// Peak throughput in images per second, at maximum clock.
pub fn fps_max(p: &PlatformSpec, w: &WorkloadSpec) -> f64 {
    1.0 / mean_exec_time_s(p, p.f_max_hz, w).expect("f_max is in domain")
}

/// Lowest clock that finishes `images` within `t_slot`, so the batch ends
/// exactly at the slot boundary: f* = work / (t_slot / images - mu_sync).
pub fn optimal_frequency_hz(
    p: &PlatformSpec,
    w: &WorkloadSpec,
    images: f64,
    t_slot_s: f64,
) -> Result<f64> {
    if !(images > 0.0) || !(t_slot_s > 0.0) {
        return Err(Error::Domain(format!(
            "need positive images ({images}) and slot ({t_slot_s})"
        )));
    }
    let budget = t_slot_s / images - p.mu_sync_s;
    if budget <= 0.0 {
        return Err(Error::InfeasibleLoad(format!(
            "{}: sync overhead alone exceeds the {:.3} ms per-image budget",
            p.name,
            1e3 * t_slot_s / images
        )));
    }
    let f = p.work_cycles(w.flops_per_image) / budget;
    if f > p.f_max_hz * (1.0 + 1e-9) {
        return Err(Error::InfeasibleLoad(format!(
            "{}: {images:.1} images in {t_slot_s:.1} s needs {:.3e} Hz > f_max {:.3e} Hz",
            p.name, f, p.f_max_hz
        )));
    }
    Ok(f.min(p.f_max_hz))
}

// ---------------------------------------------------------------------------
// Stochastic execution-time model.

/// Per-frequency Gamma parameters smoothed by cubic polynomials over the
/// normalized frequency u = f / f_ref.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecTimeModel {
    pub f_ref_hz: f64,
    /// Fitted frequency range, informational.
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    /// Coefficients of alpha(u), lowest order first.
    pub alpha: [f64; 4],
    /// Coefficients of theta(u) in seconds.
    pub theta: [f64; 4],
}

fn poly3(c: &[f64; 4], u: f64) -> f64 {
    ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
}

impl ExecTimeModel {
    pub fn alpha_at(&self, f_hz: f64) -> Result<f64> {
        let a = poly3(&self.alpha, f_hz / self.f_ref_hz);
        if a > 0.0 {
            Ok(a)
        } else {
            Err(Error::Domain(format!("alpha({f_hz:.3e}) = {a:.3e} is not positive")))
        }
    }

    pub fn theta_at(&self, f_hz: f64) -> Result<f64> {
        let t = poly3(&self.theta, f_hz / self.f_ref_hz);
        if t > 0.0 {
            Ok(t)
        } else {
            Err(Error::Domain(format!("theta({f_hz:.3e}) = {t:.3e} is not positive")))
        }
    }

    /// Model mean per-image time, alpha * theta.
    pub fn mean_exec_s(&self, f_hz: f64) -> Result<f64> {
        Ok(self.alpha_at(f_hz)? * self.theta_at(f_hz)?)
    }

    /// Distribution of the total time for `n_img` independent images.
    pub fn batch(&self, f_hz: f64, n_img: f64) -> Result<BatchExecDistribution> {
        if !(n_img > 0.0) {
            return Err(Error::Domain(format!("batch size {n_img} must be positive")));
        }
        Ok(BatchExecDistribution {
            shape: n_img * self.alpha_at(f_hz)?,
            scale_s: self.theta_at(f_hz)?,
        })
    }

    /// Fits per-frequency Gamma parameters by the method of moments and
    /// smooths them with least-squares cubics over frequency.
    ///
    /// Needs at least 4 distinct frequencies and 30 samples per frequency.
    pub fn fit(samples: &[(f64, Vec<f64>)]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::Fit(format!(
                "need at least 4 frequencies, got {}",
                samples.len()
            )));
        }
        let f_ref = samples.iter().map(|(f, _)| *f).fold(0.0, f64::max);
        if !(f_ref > 0.0) {
            return Err(Error::Fit("frequencies must be positive".into()));
        }
        let mut pts_alpha = Vec::new();
        let mut pts_theta = Vec::new();
        let mut f_lo = f64::INFINITY;
        for (f, times) in samples {
            if times.len() < 30 {
                return Err(Error::Fit(format!(
                    "frequency {f:.3e}: {} samples < 30",
                    times.len()
                )));
            }
            let n = times.len() as f64;
            let mean = times.iter().sum::<f64>() / n;
            let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
            // Relative floor catches constant logs whose float-rounded
            // variance is tiny but nonzero.
            if !(var > 1e-12 * mean * mean) || !(mean > 0.0) {
                return Err(Error::Fit(format!(
                    "frequency {f:.3e}: degenerate sample moments (mean {mean:.3e}, var {var:.3e})"
                )));
            }
            // Method of moments: alpha = mean^2/var, theta = var/mean.
            pts_alpha.push((f / f_ref, mean * mean / var));
            pts_theta.push((f / f_ref, var / mean));
            f_lo = f_lo.min(*f);
        }
        let alpha = fit_cubic(&pts_alpha)?;
        let theta = fit_cubic(&pts_theta)?;
        Ok(ExecTimeModel { f_ref_hz: f_ref, f_lo_hz: f_lo, f_hi_hz: f_ref, alpha, theta })
    }

    /// Fits a model to synthetic logs generated from the BSP mean with the
    /// given coefficient of variation; the standard way to get a plausible
    /// stochastic model when no measurement campaign is available.
    pub fn synthetic_for(
        p: &PlatformSpec,
        w: &WorkloadSpec,
        cov: f64,
        seed: u64,
    ) -> Result<Self> {
        let freqs: Vec<f64> = (0..8).map(|i| p.f_max_hz * (0.25 + 0.75 * i as f64 / 7.0)).collect();
        let log = synthetic_exec_log(p, w, &freqs, 240, cov, seed)?;
        Self::fit(&log)
    }
}

/// Total-time distribution of a batch: Gamma(shape, scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchExecDistribution {
    pub shape: f64,
    pub scale_s: f64,
}

impl BatchExecDistribution {
    pub fn mean_s(&self) -> f64 {
        self.shape * self.scale_s
    }

    pub fn var_s2(&self) -> f64 {
        self.shape * self.scale_s * self.scale_s
    }

    /// Exact Gamma quantile.
    pub fn quantile_s(&self, q: f64) -> Result<f64> {
        let g = statrs::distribution::Gamma::new(self.shape, 1.0 / self.scale_s)
            .map_err(|e| Error::Domain(format!("gamma({}, {}): {e}", self.shape, self.scale_s)))?;
        Ok(g.inverse_cdf(q))
    }

    /// Central-limit approximation of the same quantile.
    pub fn normal_quantile_s(&self, q: f64) -> Result<f64> {
        let n = statrs::distribution::Normal::new(self.mean_s(), self.var_s2().sqrt())
            .map_err(|e| Error::Domain(format!("normal: {e}")))?;
        Ok(n.inverse_cdf(q))
    }

    pub fn cdf(&self, t_s: f64) -> Result<f64> {
        let g = statrs::distribution::Gamma::new(self.shape, 1.0 / self.scale_s)
            .map_err(|e| Error::Domain(format!("gamma({}, {}): {e}", self.shape, self.scale_s)))?;
        Ok(g.cdf(t_s))
    }

    /// One random batch duration.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Gamma::new(self.shape, self.scale_s)
            .expect("valid gamma parameters")
            .sample(rng)
    }
}

/// Draws per-frequency execution-time logs: Gamma with mean equal to the BSP
/// model and the given coefficient of variation.
pub fn synthetic_exec_log(
    p: &PlatformSpec,
    w: &WorkloadSpec,
    freqs: &[f64],
    samples_per_freq: usize,
    cov: f64,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if !(cov > 0.0 && cov < 1.0) {
        return Err(Error::Domain(format!("coefficient of variation {cov} outside (0, 1)")));
    }
    let shape = 1.0 / (cov * cov);
    let mut out = Vec::with_capacity(freqs.len());
    for (i, &f) in freqs.iter().enumerate() {
        let mean = mean_exec_time_s(p, f, w)?;
        let gamma = rand_distr::Gamma::new(shape, mean / shape)
            .map_err(|e| Error::Domain(format!("gamma: {e}")))?;
        let mut rng = crate::rng::stream(seed, "exec-log", i as u64);
        let times: Vec<f64> = (0..samples_per_freq).map(|_| gamma.sample(&mut rng)).collect();
        out.push((f, times));
    }
    Ok(out)
}

fn fit_cubic(pts: &[(f64, f64)]) -> Result<[f64; 4]> {
    // Normal equations for the basis [1, u, u^2, u^3].
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for &(u, y) in pts {
        let basis = [1.0, u, u * u, u * u * u];
        for r in 0..4 {
            atb[r] += basis[r] * y;
            for c in 0..4 {
                ata[r][c] += basis[r] * basis[c];
            }
        }
    }
    solve4(ata, atb).ok_or_else(|| Error::Fit("singular regression system".into()))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-30 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let m = a[row][col] / a[col][col];
            for c in col..4 {
                a[row][c] -= m * a[col][c];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for c in row + 1..4 {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wl() -> WorkloadSpec {
        WorkloadSpec::detection_default()
    }

    #[test]
    fn peak_throughput_matches_datasheet_calibration() {
        // Frozen from direct evaluation of the BSP mean at f_max.
        let cases = [
            (PlatformSpec::cloud_cpu(), 62.3887, 62.377),
            (PlatformSpec::satellite_cpu(), 5.39902, 5.398),
            (PlatformSpec::jetson_nano(), 17.2312, 17.231),
            (PlatformSpec::jetson_agx(), 32.4598, 32.45),
        ];
        for (p, derived, published) in cases {
            let fps = fps_max(&p, &wl());
            assert_relative_eq!(fps, derived, max_relative = 1e-4);
            assert_relative_eq!(fps, published, max_relative = 1e-3);
        }
    }

    #[test]
    fn power_is_cubic_in_frequency() {
        let agx = PlatformSpec::jetson_agx();
        assert_relative_eq!(power_w(&agx, agx.f_max_hz), 60.0);
        assert_relative_eq!(power_w(&agx, agx.f_max_hz / 2.0), 7.5);
        assert_relative_eq!(power_w(&agx, 0.0), 0.0);
    }

    #[test]
    fn energy_per_image_expands_as_quadratic_plus_cubic() {
        // P(f) mu_T(f) = (P_max / f_max^3)(a f^2 + mu_sync f^3).
        let p = PlatformSpec::jetson_agx();
        let a = p.work_cycles(wl().flops_per_image);
        for frac in [0.2, 0.5, 0.9, 1.0] {
            let f = frac * p.f_max_hz;
            let direct = energy_per_image_j(&p, f, &wl()).unwrap();
            let expanded = p.p_max_w / p.f_max_hz.powi(3) * (a * f * f + p.mu_sync_s * f.powi(3));
            assert_relative_eq!(direct, expanded, max_relative = 1e-12);
        }
        assert_relative_eq!(
            energy_per_image_j(&p, p.f_max_hz, &wl()).unwrap(),
            1.8484,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            energy_per_image_j(&PlatformSpec::satellite_cpu(), 1.8e9, &wl()).unwrap(),
            1.1113,
            max_relative = 1e-3
        );
    }

    #[test]
    fn frequency_domain_is_enforced() {
        let p = PlatformSpec::jetson_agx();
        assert!(mean_exec_time_s(&p, 0.0, &wl()).is_err());
        assert!(mean_exec_time_s(&p, -1.0, &wl()).is_err());
        assert!(mean_exec_time_s(&p, p.f_max_hz * 1.01, &wl()).is_err());
    }

    #[test]
    fn optimal_frequency_fills_the_slot_exactly() {
        let p = PlatformSpec::jetson_agx();
        // Frozen by inverting the BSP mean for 200 images in 10 s.
        let f = optimal_frequency_hz(&p, &wl(), 200.0, 10.0).unwrap();
        assert_relative_eq!(f, 604.23e6, max_relative = 1e-4);
        let batch = 200.0 * mean_exec_time_s(&p, f, &wl()).unwrap();
        assert!((batch - 10.0).abs() <= 1e-9 * 10.0);
    }

    #[test]
    fn optimal_frequency_refuses_impossible_loads() {
        let p = PlatformSpec::jetson_agx();
        // 400 images in 10 s would need ~2 GHz.
        assert!(matches!(
            optimal_frequency_hz(&p, &wl(), 400.0, 10.0),
            Err(Error::InfeasibleLoad(_))
        ));
        // Sync overhead alone exceeds the per-image budget.
        assert!(optimal_frequency_hz(&p, &wl(), 800.0, 10.0).is_err());
    }

    #[test]
    fn fitted_model_tracks_bsp_mean_within_5_percent() {
        let p = PlatformSpec::jetson_agx();
        let model = ExecTimeModel::synthetic_for(&p, &wl(), 0.13, 42).unwrap();
        for frac in [0.3, 0.5, 0.7, 0.85, 1.0] {
            let f = frac * p.f_max_hz;
            let bsp = mean_exec_time_s(&p, f, &wl()).unwrap();
            let fit = model.mean_exec_s(f).unwrap();
            assert!(
                (fit - bsp).abs() / bsp < 0.05,
                "f={f:.3e}: fitted {fit:.5} vs bsp {bsp:.5}"
            );
        }
    }

    #[test]
    fn slot_filling_batches_have_tight_quantiles() {
        // With batch sizes that fill a 10 s slot, the 5th/95th quantiles sit
        // within 1.8% of the mean for both GPU platforms.
        for p in [PlatformSpec::jetson_nano(), PlatformSpec::jetson_agx()] {
            let model = ExecTimeModel::synthetic_for(&p, &wl(), 0.13, 7).unwrap();
            let n = (10.0 / mean_exec_time_s(&p, p.f_max_hz, &wl()).unwrap()).floor();
            let batch = model.batch(p.f_max_hz, n).unwrap();
            let mean = batch.mean_s();
            for q in [0.05, 0.95] {
                let dev = (batch.quantile_s(q).unwrap() - mean).abs() / mean;
                assert!(dev <= 0.018, "{}: quantile {q} deviates {dev:.4}", p.name);
            }
        }
    }

    #[test]
    fn batch_gamma_and_clt_quantiles_agree_at_scale() {
        let p = PlatformSpec::jetson_agx();
        let model = ExecTimeModel::synthetic_for(&p, &wl(), 0.13, 7).unwrap();
        let batch = model.batch(p.f_max_hz, 300.0).unwrap();
        for q in [0.05, 0.5, 0.95] {
            let g = batch.quantile_s(q).unwrap();
            let n = batch.normal_quantile_s(q).unwrap();
            assert!((g - n).abs() / g < 5e-3, "q={q}: gamma {g} vs normal {n}");
        }
    }

    #[test]
    fn fit_rejects_thin_or_degenerate_logs() {
        let p = PlatformSpec::jetson_agx();
        let freqs: Vec<f64> = (0..3).map(|i| p.f_max_hz * (0.5 + 0.2 * i as f64)).collect();
        let log = synthetic_exec_log(&p, &wl(), &freqs, 100, 0.1, 1).unwrap();
        assert!(matches!(ExecTimeModel::fit(&log), Err(Error::Fit(_))));

        let short: Vec<(f64, Vec<f64>)> =
            (0..4).map(|i| (1e9 + i as f64 * 1e8, vec![0.01; 10])).collect();
        assert!(matches!(ExecTimeModel::fit(&short), Err(Error::Fit(_))));

        let constant: Vec<(f64, Vec<f64>)> =
            (0..4).map(|i| (1e9 + i as f64 * 1e8, vec![0.01; 40])).collect();
        assert!(matches!(ExecTimeModel::fit(&constant), Err(Error::Fit(_))));
    }

    #[test]
    fn model_roundtrips_through_json() {
        let p = PlatformSpec::jetson_nano();
        let model = ExecTimeModel::synthetic_for(&p, &wl(), 0.13, 3).unwrap();
        let text = serde_json::to_string(&model).unwrap();
        let back: ExecTimeModel = serde_json::from_str(&text).unwrap();
        assert_eq!(model, back);
    }
}

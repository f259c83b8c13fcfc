//! Optical turbulence along the imaging path.
//!
//! Image acquisition succeeds only when the refractive-index structure
//! parameter Cn2 over the target is at or below a threshold. Cn2 at a
//! random revisit is drawn from a climatological distribution, either a
//! lognormal fit or an empirical cumulative table, and sampled by
//! inverting the CDF so that a single uniform draw per attempt keeps
//! replications reproducible.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Acquisition threshold on Cn2, m^(-2/3).
pub const DEFAULT_CN2_THRESHOLD: f64 = 2e-14;

/// Climatological distribution of the path Cn2 seen at a random revisit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TurbulenceModel {
    Lognormal {
        /// Mean of ln Cn2.
        mu_ln: f64,
        /// Standard deviation of ln Cn2.
        sigma_ln: f64,
    },
    /// Piecewise-linear CDF through `(cn2, cdf)` points.
    Empirical { points: Vec<(f64, f64)> },
}

impl TurbulenceModel {
    /// Mid-latitude fit: median 1.1e-14 with the spread set so that 65%
    /// of revisits fall at or below the 2e-14 acquisition threshold.
    pub fn default_lognormal() -> Self {
        let mu_ln = (1.1e-14f64).ln();
        let z65 = Normal::standard().inverse_cdf(0.65);
        let sigma_ln = (DEFAULT_CN2_THRESHOLD.ln() - mu_ln) / z65;
        TurbulenceModel::Lognormal { mu_ln, sigma_ln }
    }

    /// Loads `cn2,cdf` CSV rows into an empirical table.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("turbulence csv: {e}")))?;
            if rec.len() < 2 {
                return Err(Error::Parse("turbulence csv: expected cn2,cdf".into()));
            }
            let cn2: f64 = rec[0]
                .parse()
                .map_err(|_| Error::Parse(format!("turbulence csv: bad cn2 {:?}", &rec[0])))?;
            let cdf: f64 = rec[1]
                .parse()
                .map_err(|_| Error::Parse(format!("turbulence csv: bad cdf {:?}", &rec[1])))?;
            points.push((cn2, cdf));
        }
        let m = TurbulenceModel::Empirical { points };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TurbulenceModel::Lognormal { sigma_ln, .. } => {
                if !(*sigma_ln > 0.0) {
                    return Err(Error::Config(format!(
                        "lognormal sigma_ln {sigma_ln} must be positive"
                    )));
                }
            }
            TurbulenceModel::Empirical { points } => {
                if points.len() < 2 {
                    return Err(Error::Config("empirical table needs at least 2 points".into()));
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::Config("empirical cn2 values must ascend".into()));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::Config("empirical cdf must be non-decreasing".into()));
                    }
                }
                let (first, last) = (points[0], points[points.len() - 1]);
                if !(first.0 > 0.0) {
                    return Err(Error::Config("empirical cn2 values must be positive".into()));
                }
                if first.1 < 0.0 || last.1 > 1.0 || (last.1 - 1.0).abs() > 1e-6 {
                    return Err(Error::Config(
                        "empirical cdf must stay in [0, 1] and reach 1 at the last point".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn cdf(&self, cn2: f64) -> f64 {
        match self {
            TurbulenceModel::Lognormal { mu_ln, sigma_ln } => {
                if cn2 <= 0.0 {
                    return 0.0;
                }
                Normal::standard().cdf((cn2.ln() - mu_ln) / sigma_ln)
            }
            TurbulenceModel::Empirical { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if cn2 <= first.0 {
                    return if cn2 < first.0 { 0.0 } else { first.1 };
                }
                if cn2 >= last.0 {
                    return last.1;
                }
                for w in points.windows(2) {
                    if cn2 <= w[1].0 {
                        let t = (cn2 - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + t * (w[1].1 - w[0].1);
                    }
                }
                last.1
            }
        }
    }

    /// Inverse CDF; `u` in [0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile argument {u} outside [0, 1)")));
        }
        match self {
            TurbulenceModel::Lognormal { mu_ln, sigma_ln } => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                Ok((mu_ln + sigma_ln * Normal::standard().inverse_cdf(u)).exp())
            }
            TurbulenceModel::Empirical { points } => {
                let first = points[0];
                if u <= first.1 {
                    return Ok(first.0);
                }
                for w in points.windows(2) {
                    if u <= w[1].1 {
                        // Flat segments collapse to their left edge.
                        if w[1].1 == w[0].1 {
                            continue;
                        }
                        let t = (u - w[0].1) / (w[1].1 - w[0].1);
                        return Ok(w[0].0 + t * (w[1].0 - w[0].0));
                    }
                }
                Ok(points[points.len() - 1].0)
            }
        }
    }

    /// Probability that a random revisit clears the threshold.
    pub fn success_probability(&self, threshold: f64) -> f64 {
        self.cdf(threshold)
    }
}

/// Stream of Cn2 draws over one reproducible substream.
#[derive(Debug, Clone)]
pub struct Cn2Sampler {
    pub model: TurbulenceModel,
    rng: ChaCha8Rng,
}

impl Cn2Sampler {
    pub fn new(model: TurbulenceModel, master_seed: u64, stream_index: u64) -> Result<Self> {
        model.validate()?;
        Ok(Cn2Sampler {
            model,
            rng: crate::rng::stream(master_seed, "cn2", stream_index),
        })
    }

    pub fn sample(&mut self) -> f64 {
        use rand::Rng;
        let u: f64 = self.rng.random();
        self.model.quantile(u).expect("uniform draw is in range")
    }

    /// One acquisition gate: draw Cn2, succeed when at or below threshold.
    pub fn attempt(&mut self, threshold: f64) -> (f64, bool) {
        let cn2 = self.sample();
        (cn2, cn2 <= threshold)
    }
}

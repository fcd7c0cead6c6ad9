//! Null-distribution calibration and significance testing. The tau null is
//! fit by a Gaussian, the index null by a method-of-moments Beta; both keep
//! their raw replicate samples so fits can be cross-checked empirically.

use crate::error::{CimError, Result};
use crate::scan::{compute_cim, ScanConfig};
use crate::stats::{tau_kl_hat, DimensionKind, SamplePairs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

/// Statistic a null model calibrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Statistic {
    TauKl,
    Cim,
}

/// Parametric fit of a calibrated null.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum NullFit {
    Gaussian { mean: f64, sd: f64 },
    Beta { a: f64, b: f64 },
}

/// A calibrated null distribution for one statistic at one sample size.
/// Serializes to a versioned JSON document for reuse across runs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NullModel {
    pub version: u32,
    pub statistic: Statistic,
    pub n: u64,
    pub b_replicates: u64,
    pub kinds: (DimensionKind, DimensionKind),
    pub seed: u64,
    /// Hash of the scan configuration the null was calibrated under; present
    /// for the index statistic, absent for tau.
    pub config_hash: Option<u64>,
    pub samples: Vec<f64>,
    pub fit: NullFit,
}

/// Closed-form null standard deviation of Kendall's tau at sample size `n`:
/// `sqrt(2(2n + 5) / (9 n (n - 1)))`.
pub fn tau_null_sd(n: u64) -> f64 {
    let nf = n as f64;
    (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt()
}

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// Inverse standard normal CDF by Acklam's rational approximation with one
/// Halley refinement step; absolute error well below 1e-8 on (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile level must lie in (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement against the exact CDF
    let e = standard_normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

fn draw_margin(rng: &mut ChaCha12Rng, kind: DimensionKind) -> f64 {
    match kind {
        DimensionKind::Continuous => rng.random::<f64>(),
        // 4 uniform levels mirror the discrete-margin simulation setup
        DimensionKind::Discrete => rng.random_range(0..4) as f64,
    }
}

/// Draws `b` independent datasets of `n` pairs with X independent of Y,
/// computes the statistic on each, and fits the null law: Gaussian by
/// moments for tau, Beta by method of moments for the index.
pub fn calibrate_null(
    statistic: Statistic,
    n: u64,
    b: u64,
    kinds: (DimensionKind, DimensionKind),
    seed: u64,
    cfg: &ScanConfig,
) -> Result<NullModel> {
    if n < 10 {
        return Err(CimError::InvalidConfig(format!(
            "null calibration needs n >= 10, got {n}"
        )));
    }
    if b < 100 {
        return Err(CimError::InvalidConfig(format!(
            "null calibration needs at least 100 replicates, got {b}"
        )));
    }
    cfg.validate()?;

    let samples: Result<Vec<f64>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(rep + 1);
            let xs: Vec<f64> = (0..n).map(|_| draw_margin(&mut rng, kinds.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| draw_margin(&mut rng, kinds.1)).collect();
            let pairs = SamplePairs::new(xs, ys)?;
            match statistic {
                Statistic::TauKl => Ok(tau_kl_hat(&pairs, kinds).value),
                Statistic::Cim => Ok(compute_cim(&pairs, cfg)?.value),
            }
        })
        .collect();
    let samples = samples?;

    let m = samples.iter().sum::<f64>() / b as f64;
    let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / b as f64;

    let fit = match statistic {
        Statistic::TauKl => {
            if var <= 0.0 {
                return Err(CimError::CalibrationFailed(
                    "degenerate null sample variance".into(),
                ));
            }
            NullFit::Gaussian {
                mean: m,
                sd: var.sqrt(),
            }
        }
        Statistic::Cim => {
            let scale = m * (1.0 - m) / var - 1.0;
            if !(var > 0.0 && scale > 0.0) {
                return Err(CimError::CalibrationFailed(
                    "index null moments admit no Beta fit".into(),
                ));
            }
            NullFit::Beta {
                a: m * scale,
                b: (1.0 - m) * scale,
            }
        }
    };

    Ok(NullModel {
        version: 1,
        statistic,
        n,
        b_replicates: b,
        kinds,
        seed,
        config_hash: match statistic {
            Statistic::Cim => Some(cfg.config_hash()),
            Statistic::TauKl => None,
        },
        samples,
        fit,
    })
}

/// Significance of an observed value under a calibrated null: right tail for
/// the index, two-sided on |value| for tau. When `cfg` is given for an index
/// model, the call refuses a configuration whose hash differs from the one
/// the model was calibrated under.
pub fn p_value(model: &NullModel, observed: f64, cfg: Option<&ScanConfig>) -> Result<f64> {
    match model.statistic {
        Statistic::Cim => {
            if !(0.0..=1.0).contains(&observed) {
                return Err(CimError::InvalidInput(format!(
                    "index observation {observed} outside [0, 1]"
                )));
            }
            if let (Some(cfg), Some(hash)) = (cfg, model.config_hash) {
                if cfg.config_hash() != hash {
                    return Err(CimError::InvalidConfig(
                        "null model was calibrated under a different scan configuration".into(),
                    ));
                }
            }
            let NullFit::Beta { a, b } = model.fit else {
                return Err(CimError::CalibrationFailed("index null lacks Beta fit".into()));
            };
            let beta = Beta::new(a, b)
                .map_err(|e| CimError::CalibrationFailed(format!("beta fit unusable: {e}")))?;
            Ok((1.0 - beta.cdf(observed)).clamp(0.0, 1.0))
        }
        Statistic::TauKl => {
            if !(-1.0..=1.0).contains(&observed) {
                return Err(CimError::InvalidInput(format!(
                    "tau observation {observed} outside [-1, 1]"
                )));
            }
            let NullFit::Gaussian { mean, sd } = model.fit else {
                return Err(CimError::CalibrationFailed(
                    "tau null lacks Gaussian fit".into(),
                ));
            };
            let t = observed.abs();
            let p = standard_normal_cdf((-t - mean) / sd) + 1.0
                - standard_normal_cdf((t - mean) / sd);
            Ok(p.clamp(0.0, 1.0))
        }
    }
}

/// Draws from the theoretical index null: each draw is the weighted sum of
/// folded normals `sum_i w_i |N(0, sigma_i)|` with `sigma_i` the tau null sd
/// at that region's sample count.
pub fn theoretical_cim_null_sampler(
    region_weights: &[f64],
    region_ns: &[u64],
    draws: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if region_weights.len() != region_ns.len() || region_weights.is_empty() {
        return Err(CimError::InvalidInput(
            "region weights and sizes must be matched and nonempty".into(),
        ));
    }
    if (region_weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(CimError::InvalidInput("region weights must sum to 1".into()));
    }
    if region_ns.iter().any(|&n| n < 2) {
        return Err(CimError::InvalidInput(
            "each region needs at least 2 samples".into(),
        ));
    }
    let sigmas: Vec<f64> = region_ns.iter().map(|&n| tau_null_sd(n)).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    Ok((0..draws)
        .map(|_| {
            region_weights
                .iter()
                .zip(&sigmas)
                .map(|(w, s)| w * (s * normal.sample(&mut rng)).abs())
                .sum()
        })
        .collect())
}

/// Discrete Hellinger distance between the binned empirical density of
/// `samples` (supported on [0, 1]) and a Beta(a, b) density integrated over
/// the same bins.
pub fn hellinger_distance(samples: &[f64], beta_fit: (f64, f64), bins: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(CimError::InvalidInput("no samples to bin".into()));
    }
    if bins < 10 {
        return Err(CimError::InvalidConfig(format!(
            "need at least 10 bins, got {bins}"
        )));
    }
    if samples.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(CimError::InvalidInput(
            "samples must lie in [0, 1]".into(),
        ));
    }
    let beta = Beta::new(beta_fit.0, beta_fit.1)
        .map_err(|e| CimError::InvalidConfig(format!("bad beta parameters: {e}")))?;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let k = ((x * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = samples.len() as f64;
    let mut bc = 0.0; // Bhattacharyya coefficient
    for (k, &c) in counts.iter().enumerate() {
        let p = c as f64 / total;
        let lo = k as f64 / bins as f64;
        let hi = (k + 1) as f64 / bins as f64;
        let q = (beta.cdf(hi) - beta.cdf(lo)).max(0.0);
        bc += (p * q).sqrt();
    }
    Ok((1.0 - bc).max(0.0).sqrt())
}

/// Gaussian-copula parameter implied by a tau value: `sin(pi * tau / 2)`.
pub fn tau_to_gaussian_rho(tau: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(CimError::InvalidInput(format!(
            "tau {tau} outside [-1, 1]"
        )));
    }
    Ok((std::f64::consts::PI * tau / 2.0).sin())
}

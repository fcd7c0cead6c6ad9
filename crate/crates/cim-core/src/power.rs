//! Monte-Carlo statistical power harness for the index: rejection rates of
//! the independence test across association patterns, noise levels, and
//! sample sizes.

use crate::error::Result;
use crate::inference::{calibrate_null, NullModel, Statistic};
use crate::scan::{compute_cim, ScanConfig};
use crate::stats::{DimensionKind, SamplePairs};
use crate::synth::{gen_pattern, Pattern, PatternSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// What the alternative draws from: a functional pattern or pure
/// independence (which measures the size of the test).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerPattern {
    Functional(Pattern),
    Independence,
}

impl PowerPattern {
    pub fn name(&self) -> &'static str {
        match self {
            PowerPattern::Functional(p) => p.name(),
            PowerPattern::Independence => "independence",
        }
    }

    pub fn parse(name: &str) -> Result<PowerPattern> {
        if name == "independence" {
            Ok(PowerPattern::Independence)
        } else {
            Ok(PowerPattern::Functional(Pattern::parse(name)?))
        }
    }
}

/// One cell of the power table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerCell {
    pub pattern: String,
    pub noise_sd: f64,
    pub n: u64,
    pub replicates: u64,
    /// Fraction of replicates whose index exceeded the null quantile.
    pub power: f64,
    /// The rejection threshold used (empirical null quantile).
    pub threshold: f64,
}

fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Rejection threshold at level `sig_level`: the empirical `1 - sig_level`
/// quantile of a calibrated null.
pub fn null_threshold(model: &NullModel, sig_level: f64) -> f64 {
    let mut sorted = model.samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    empirical_quantile(&sorted, 1.0 - sig_level)
}

fn draw_replicate(
    pattern: PowerPattern,
    n: u64,
    noise_sd: f64,
    seed: u64,
) -> Result<SamplePairs> {
    match pattern {
        PowerPattern::Functional(p) => gen_pattern(&PatternSpec {
            pattern: p,
            n: n as usize,
            noise_sd,
            seed,
        }),
        PowerPattern::Independence => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            SamplePairs::new(xs, ys)
        }
    }
}

/// Power of one (pattern, noise, n) cell against a fixed threshold.
pub fn power_at(
    pattern: PowerPattern,
    noise_sd: f64,
    n: u64,
    replicates: u64,
    threshold: f64,
    cfg: &ScanConfig,
    seed: u64,
) -> Result<f64> {
    let rejections: Result<Vec<bool>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(rep)
                .wrapping_add((noise_sd.to_bits() ^ n).wrapping_mul(0x2545f4914f6cdd1d));
            let data = draw_replicate(pattern, n, noise_sd, rep_seed)?;
            Ok(compute_cim(&data, cfg)?.value > threshold)
        })
        .collect();
    let rejections = rejections?;
    Ok(rejections.iter().filter(|r| **r).count() as f64 / replicates as f64)
}

/// Full power sweep. Null models are calibrated once per sample size with
/// `null_replicates` draws of continuous independent pairs.
#[allow(clippy::too_many_arguments)]
pub fn power_table(
    patterns: &[PowerPattern],
    noise_grid: &[f64],
    n_grid: &[u64],
    replicates: u64,
    sig_level: f64,
    null_replicates: u64,
    cfg: &ScanConfig,
    seed: u64,
) -> Result<Vec<PowerCell>> {
    let kinds = (DimensionKind::Continuous, DimensionKind::Continuous);
    let mut cells = Vec::new();
    for &n in n_grid {
        let null = calibrate_null(Statistic::Cim, n, null_replicates, kinds, seed, cfg)?;
        let threshold = null_threshold(&null, sig_level);
        for &pattern in patterns {
            for &noise_sd in noise_grid {
                let power = power_at(pattern, noise_sd, n, replicates, threshold, cfg, seed)?;
                cells.push(PowerCell {
                    pattern: pattern.name().to_string(),
                    noise_sd,
                    n,
                    replicates,
                    power,
                    threshold,
                });
            }
        }
    }
    Ok(cells)
}

/// For each (pattern, noise) pair, the smallest n in the table reaching the
/// target power, if any.
pub fn minimum_n_for_power(
    cells: &[PowerCell],
    target_power: f64,
) -> Vec<(String, f64, Option<u64>)> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for c in cells {
        let key = (c.pattern.clone(), c.noise_sd);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(pattern, noise)| {
            let min_n = cells
                .iter()
                .filter(|c| c.pattern == pattern && c.noise_sd == noise && c.power >= target_power)
                .map(|c| c.n)
                .min();
            (pattern, noise, min_n)
        })
        .collect()
}

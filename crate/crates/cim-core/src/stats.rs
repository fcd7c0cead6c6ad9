//! Pseudo-observations, concordance counting, and the Kendall estimator
//! family: the classic `tau`, the tie-scaled `tau_b`, the tie-corrected
//! `tau_n`, and `tau_kl` which extends `tau_n` with a hybrid
//! (continuous/discrete) correction so that perfectly monotone hybrid pairs
//! score exactly +/-1.

use crate::error::{CimError, Result};
use std::collections::HashMap;

/// Cadence constant of the closeness-to-zero-ties heuristic: a dimension of
/// `n` samples is treated as effectively tie-free while its tied-pair count
/// stays at or below `C(floor(n / OOCTZT), 2)`.
pub const OOCTZT: u64 = 100;

/// A paired bivariate sample. Lengths are equal, `n >= 2`, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePairs {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SamplePairs {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(CimError::InvalidInput(format!(
                "paired sample lengths differ: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(CimError::InvalidInput(
                "need at least 2 sample pairs".into(),
            ));
        }
        if !xs.iter().chain(ys.iter()).all(|v| v.is_finite()) {
            return Err(CimError::InvalidInput(
                "samples must be finite (no NaN or infinity)".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// The same pairs with the margins swapped.
    pub fn swapped(&self) -> SamplePairs {
        SamplePairs {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }
}

/// Rank-transformed pairs on the unit square. Each margin takes values
/// `k / n` with the max-rank convention for ties, so tied raw values map to
/// identical pseudo-observations and the largest value maps to exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations {
    pub us: Vec<f64>,
    pub vs: Vec<f64>,
}

impl PseudoObservations {
    pub fn len(&self) -> usize {
        self.us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.us.is_empty()
    }
}

/// Pairwise concordance bookkeeping over all `C(n, 2)` sample pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ConcordanceCounts {
    pub concordant: u64,
    pub discordant: u64,
    /// `u` of the tie-corrected estimator: sum of `C(m, 2)` over the
    /// multiplicities `m` of distinct x values.
    pub ties_x_pairs: u64,
    /// `v`: likewise for y.
    pub ties_y_pairs: u64,
    pub distinct_x: u64,
    pub distinct_y: u64,
    pub n_pairs: u64,
}

/// Continuity classification of one margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DimensionKind {
    Continuous,
    Discrete,
}

/// Which member of the estimator family produced a [`TauResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Estimator {
    Tau,
    TauB,
    TauN,
    TauKl,
}

/// An estimator value together with the counts that produced it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TauResult {
    pub value: f64,
    pub counts: ConcordanceCounts,
    pub estimator: Estimator,
    /// Hybrid overlap correction `K = C(u', 2) * v'`; 0 when unused.
    pub hybrid_correction_k: u64,
    /// Set when the denominator vanished and the value was reported as 0.
    pub degenerate: bool,
}

fn binom2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Canonical bit pattern used to key float values in multiplicity maps;
/// collapses -0.0 and +0.0. Inputs are validated finite upstream.
pub(crate) fn value_key(v: f64) -> u64 {
    if v == 0.0 {
        0.0f64.to_bits()
    } else {
        v.to_bits()
    }
}

fn max_rank_fractions(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // max-rank convention: every member of a tie run gets the run's end rank
        let r = (j + 1) as f64 / n as f64;
        for k in &idx[i..=j] {
            out[*k] = r;
        }
        i = j + 1;
    }
    out
}

/// Transforms a paired sample into pseudo-observations, preserving pair order.
pub fn pseudo_observations(samples: &SamplePairs) -> PseudoObservations {
    PseudoObservations {
        us: max_rank_fractions(samples.xs()),
        vs: max_rank_fractions(samples.ys()),
    }
}

fn tie_run_stats(sorted: &[f64]) -> (u64, u64) {
    // (tied pairs, distinct values) over an ascending-sorted slice
    let mut pairs = 0u64;
    let mut distinct = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        pairs += binom2((j - i + 1) as u64);
        distinct += 1;
        i = j + 1;
    }
    (pairs, distinct)
}

/// Tied-pair count of one margin: sum of `C(m, 2)` over value multiplicities.
pub fn tie_pairs(values: &[f64]) -> u64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    tie_run_stats(&sorted).0
}

/// The running closeness-to-zero-ties threshold at sample count `n`:
/// `C(floor(n / ooctzt), 2)`.
pub fn ctzt_threshold(n: u64, ooctzt: u64) -> u64 {
    binom2(n / ooctzt)
}

/// Classifies one margin as continuous or discrete: discrete when its
/// tied-pair count exceeds the ctzt threshold at the default [`OOCTZT`].
pub fn classify_dimension(values: &[f64]) -> DimensionKind {
    classify_dimension_with(values, OOCTZT)
}

/// [`classify_dimension`] with an explicit ctzt cadence constant.
pub fn classify_dimension_with(values: &[f64], ooctzt: u64) -> DimensionKind {
    if tie_pairs(values) > ctzt_threshold(values.len() as u64, ooctzt) {
        DimensionKind::Discrete
    } else {
        DimensionKind::Continuous
    }
}

/// Classifies both margins of a paired sample.
pub fn classify_pair(samples: &SamplePairs) -> (DimensionKind, DimensionKind) {
    (
        classify_dimension(samples.xs()),
        classify_dimension(samples.ys()),
    )
}

/// Counts concordant, discordant, and tied pairs over all `C(n, 2)` pairs.
///
/// Pair `(i, j)` is concordant iff `(x_i - x_j)(y_i - y_j) > 0`, discordant
/// iff `< 0`. Runs in O(n log n) via a merge sort that counts inversions.
pub fn count_concordance(samples: &SamplePairs) -> ConcordanceCounts {
    let n = samples.len();
    let xs = samples.xs();
    let ys = samples.ys();
    let n_pairs = binom2(n as u64);

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        xs[a]
            .partial_cmp(&xs[b])
            .unwrap()
            .then(ys[a].partial_cmp(&ys[b]).unwrap())
    });

    // tie accounting over the x-sorted order
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut distinct_x = 0u64;
    {
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
                j += 1;
            }
            ties_x += binom2((j - i + 1) as u64);
            distinct_x += 1;
            let mut k = i;
            while k <= j {
                let mut l = k;
                while l + 1 <= j && ys[idx[l + 1]] == ys[idx[k]] {
                    l += 1;
                }
                ties_xy += binom2((l - k + 1) as u64);
                k = l + 1;
            }
            i = j + 1;
        }
    }

    let (ties_y, distinct_y) = {
        let mut sorted_y = ys.to_vec();
        sorted_y.sort_by(|a, b| a.partial_cmp(b).unwrap());
        tie_run_stats(&sorted_y)
    };

    // discordant pairs = strict y-inversions in x-sorted order; pairs tied in
    // x were pre-sorted by y so they contribute none.
    let mut work: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let mut buf = work.clone();
    let mut swaps = 0u64;
    let mut seg = 1usize;
    while seg < n {
        let mut offset = 0usize;
        while offset < n {
            let (mut i, i_end) = (offset, (offset + seg).min(n));
            let (mut j, j_end) = (i_end, (i_end + seg).min(n));
            let mut out = offset;
            while i < i_end || j < j_end {
                if i < i_end && (j >= j_end || work[i] <= work[j]) {
                    buf[out] = work[i];
                    i += 1;
                } else {
                    buf[out] = work[j];
                    swaps += (i_end - i) as u64;
                    j += 1;
                }
                out += 1;
            }
            offset += seg * 2;
        }
        std::mem::swap(&mut work, &mut buf);
        seg *= 2;
    }

    let discordant = swaps;
    // ties_x + ties_y - ties_xy never exceeds n_pairs, so add first
    let concordant = n_pairs + ties_xy - ties_x - ties_y - discordant;

    ConcordanceCounts {
        concordant,
        discordant,
        ties_x_pairs: ties_x,
        ties_y_pairs: ties_y,
        distinct_x,
        distinct_y,
        n_pairs,
    }
}

fn numerator(counts: &ConcordanceCounts) -> i64 {
    counts.concordant as i64 - counts.discordant as i64
}

fn result_from(
    counts: ConcordanceCounts,
    estimator: Estimator,
    num: i64,
    den: f64,
    hybrid_correction_k: u64,
) -> TauResult {
    let degenerate = den == 0.0;
    let value = if degenerate { 0.0 } else { num as f64 / den };
    TauResult {
        value,
        counts,
        estimator,
        hybrid_correction_k,
        degenerate,
    }
}

/// Classic Kendall tau for tie-free data: `(C - D) / C(n, 2)`.
///
/// Errors when either margin contains ties; tie-aware callers should use
/// [`tau_n_hat`] or [`tau_kl_hat`].
pub fn tau_hat(samples: &SamplePairs) -> Result<TauResult> {
    let counts = count_concordance(samples);
    if counts.ties_x_pairs > 0 || counts.ties_y_pairs > 0 {
        return Err(CimError::InvalidInput(
            "ties present; use tau_n_hat or tau_kl_hat".into(),
        ));
    }
    let num = numerator(&counts);
    let den = counts.n_pairs as f64;
    Ok(result_from(counts, Estimator::Tau, num, den, 0))
}

/// `sqrt(n_pairs - u) * sqrt(n_pairs - v)`, computed as exactly `n_pairs`
/// when both tie counts vanish so the tie-free reduction to the classic tau
/// is bit-exact.
pub(crate) fn tie_scaled_denominator(n_pairs: u64, ties_u: u64, ties_v: u64) -> f64 {
    if ties_u == 0 && ties_v == 0 {
        n_pairs as f64
    } else {
        ((n_pairs - ties_u) as f64).sqrt() * ((n_pairs - ties_v) as f64).sqrt()
    }
}

/// Tie-scaled tau-b: `(C - D) / sqrt((n_pairs - u)(n_pairs - v))`.
pub fn tau_b_hat(samples: &SamplePairs) -> TauResult {
    let counts = count_concordance(samples);
    let num = numerator(&counts);
    let den = tie_scaled_denominator(counts.n_pairs, counts.ties_x_pairs, counts.ties_y_pairs);
    result_from(counts, Estimator::TauB, num, den, 0)
}

/// Tie-corrected tau for discrete margins:
/// `(C - D) / (sqrt(n_pairs - u) * sqrt(n_pairs - v))`.
pub fn tau_n_hat(samples: &SamplePairs) -> TauResult {
    let counts = count_concordance(samples);
    let num = numerator(&counts);
    let den = tie_scaled_denominator(counts.n_pairs, counts.ties_x_pairs, counts.ties_y_pairs);
    result_from(counts, Estimator::TauN, num, den, 0)
}

/// Hybrid overlap statistics for the `tau_kl` correction term.
///
/// Samples are grouped by their discrete value; a sample is overlapping when
/// its continuous value lies strictly inside the continuous-value range of at
/// least two distinct groups (equivalently, strictly inside a pairwise range
/// intersection). Returns `(u', v')`: the overlapping-sample count and the
/// number of distinct discrete values. For perfectly monotone hybrid data the
/// group ranges do not interleave and `u'` is 0.
pub fn overlap_counts(continuous: &[f64], discrete: &[f64]) -> (u64, u64) {
    debug_assert_eq!(continuous.len(), discrete.len());
    let mut ranges: HashMap<u64, (f64, f64)> = HashMap::new();
    for (&c, &d) in continuous.iter().zip(discrete) {
        let e = ranges.entry(value_key(d)).or_insert((c, c));
        if c < e.0 {
            e.0 = c;
        }
        if c > e.1 {
            e.1 = c;
        }
    }
    let v_prime = ranges.len() as u64;
    if v_prime < 2 {
        return (0, v_prime);
    }
    let spans: Vec<(f64, f64)> = ranges.values().copied().collect();
    let mut u_prime = 0u64;
    for &c in continuous {
        let mut inside = 0u32;
        for &(lo, hi) in &spans {
            if lo < c && c < hi {
                inside += 1;
                if inside >= 2 {
                    u_prime += 1;
                    break;
                }
            }
        }
    }
    (u_prime, v_prime)
}

/// The raw hybrid correction `K = C(u', 2) * v'`.
pub fn hybrid_correction(continuous: &[f64], discrete: &[f64]) -> u64 {
    let (u_prime, v_prime) = overlap_counts(continuous, discrete);
    binom2(u_prime) * v_prime
}

/// Shared final step of the hybrid branch: denominator grows with the raw
/// overlap correction but is capped at the tau_n denominator, so heavily
/// interleaved hybrid data falls back to the tie-corrected estimate while
/// block-structured (near-monotone) data keeps the exact `n_pairs - max(u,v)`
/// scaling.
pub(crate) fn hybrid_denominator(n_pairs: u64, ties_u: u64, ties_v: u64, k_raw: u64) -> f64 {
    let t_max = ties_u.max(ties_v);
    let base = (n_pairs - t_max) + k_raw;
    let cap = tie_scaled_denominator(n_pairs, ties_u, ties_v);
    (base as f64).min(cap)
}

/// Tau for continuous, discrete, or hybrid margins.
///
/// Branches on `kinds`: both continuous uses the classic `C(n, 2)` scaling,
/// both discrete the tie-corrected scaling, and hybrid pairs divide by
/// `n_pairs - t` with `t = max(u, v) - K` and `K` the overlap correction of
/// [`hybrid_correction`] (denominator capped as in [`hybrid_denominator`]).
pub fn tau_kl_hat(samples: &SamplePairs, kinds: (DimensionKind, DimensionKind)) -> TauResult {
    use DimensionKind::*;
    let counts = count_concordance(samples);
    let num = numerator(&counts);
    match kinds {
        (Continuous, Continuous) => {
            let den = counts.n_pairs as f64;
            result_from(counts, Estimator::TauKl, num, den, 0)
        }
        (Discrete, Discrete) => {
            let den =
                tie_scaled_denominator(counts.n_pairs, counts.ties_x_pairs, counts.ties_y_pairs);
            result_from(counts, Estimator::TauKl, num, den, 0)
        }
        (Discrete, Continuous) | (Continuous, Discrete) => {
            let (cont, disc) = if kinds.0 == Discrete {
                (samples.ys(), samples.xs())
            } else {
                (samples.xs(), samples.ys())
            };
            let k_raw = hybrid_correction(cont, disc);
            let den = hybrid_denominator(
                counts.n_pairs,
                counts.ties_x_pairs,
                counts.ties_y_pairs,
                k_raw,
            );
            result_from(counts, Estimator::TauKl, num, den, k_raw)
        }
    }
}

/// [`tau_kl_hat`] with margins classified by the ctzt heuristic.
pub fn tau_kl_hat_auto(samples: &SamplePairs) -> TauResult {
    tau_kl_hat(samples, classify_pair(samples))
}

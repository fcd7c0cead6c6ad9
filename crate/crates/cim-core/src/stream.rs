//! Incremental tau computation over a prefix stream of scan-ordered samples.
//!
//! Each consumed sample is compared against everything already processed, so
//! one consume costs O(prefix length) and a full pass over n samples costs
//! O(n^2) total. All ordering state is held in integer counters; the only
//! floating-point work is the final division. This is the kernel the
//! unit-square scan leans on: expanding a region by one scan increment means
//! consuming the newly covered samples, never recounting the old ones.

use crate::error::{CimError, Result};
use crate::stats::{ctzt_threshold, hybrid_denominator, value_key, OOCTZT};
use std::collections::HashMap;

/// Streaming tau state. Single-owner mutable; distinct streams may run in
/// parallel. Samples must arrive in nondecreasing order of the first (scan)
/// coordinate; ties in the scan coordinate are processed in input order.
#[derive(Debug, Clone)]
pub struct TauStream {
    processed: u64,
    pair_count: u64,
    numerator: i64,
    tie_pairs_u: u64,
    tie_pairs_v: u64,
    mult_u: HashMap<u64, u64>,
    mult_v: HashMap<u64, u64>,
    ctzt_groups: u64,
    ctzt: u64,
    us: Vec<f64>,
    vs: Vec<f64>,
    // continuous-value span per distinct value of the opposite dimension,
    // maintained for both dimensions since either may turn out discrete
    span_v_by_u: HashMap<u64, (f64, f64)>,
    span_u_by_v: HashMap<u64, (f64, f64)>,
    hybrid_overlap: bool,
    current: f64,
    degenerate: bool,
}

impl TauStream {
    /// Empty stream with the hybrid overlap correction enabled.
    pub fn new() -> Self {
        Self::with_overlap(true)
    }

    /// Empty stream; `hybrid_overlap` selects whether the hybrid branch
    /// applies the overlap correction K or uses the plain `max(u, v)` tie
    /// term.
    pub fn with_overlap(hybrid_overlap: bool) -> Self {
        TauStream {
            processed: 0,
            pair_count: 0,
            numerator: 0,
            tie_pairs_u: 0,
            tie_pairs_v: 0,
            mult_u: HashMap::new(),
            mult_v: HashMap::new(),
            ctzt_groups: 0,
            ctzt: 0,
            us: Vec::new(),
            vs: Vec::new(),
            span_v_by_u: HashMap::new(),
            span_u_by_v: HashMap::new(),
            hybrid_overlap,
            current: 0.0,
            degenerate: false,
        }
    }

    /// Number of samples consumed so far.
    pub fn count(&self) -> u64 {
        self.processed
    }

    /// Last computed tau; 0 with fewer than 2 samples.
    pub fn current(&self) -> f64 {
        self.current
    }

    /// Whether the last computed value hit the all-tied degenerate rule.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Clears all state back to [`TauStream::with_overlap`] of the same mode.
    pub fn reset(&mut self) {
        *self = TauStream::with_overlap(self.hybrid_overlap);
    }

    /// Consumes one sample and returns tau over everything consumed so far.
    pub fn consume(&mut self, u: f64, v: f64) -> Result<f64> {
        if !u.is_finite() || !v.is_finite() {
            return Err(CimError::InvalidInput(
                "stream samples must be finite".into(),
            ));
        }
        self.processed += 1;
        self.pair_count += self.processed - 1;

        // ordering of the new sample relative to every processed sample
        let (mut u_pos, mut u_neg, mut v_pos, mut v_neg) = (0u64, 0u64, 0u64, 0u64);
        for (&pu, &pv) in self.us.iter().zip(&self.vs) {
            let du = u - pu;
            let dv = v - pv;
            if dv != 0.0 {
                if du > 0.0 {
                    u_pos += 1;
                } else if du < 0.0 {
                    u_neg += 1;
                }
            }
            if du != 0.0 {
                if dv > 0.0 {
                    v_pos += 1;
                } else if dv < 0.0 {
                    v_neg += 1;
                }
            }
        }
        let kk = if u_pos < u_neg {
            v_neg as i64 - v_pos as i64
        } else {
            v_pos as i64 - v_neg as i64
        };
        self.numerator += kk;

        // repeat counts
        let mu = self.mult_u.entry(value_key(u)).or_insert(0);
        *mu += 1;
        self.tie_pairs_u += *mu - 1;
        let mv = self.mult_v.entry(value_key(v)).or_insert(0);
        *mv += 1;
        self.tie_pairs_v += *mv - 1;

        // closeness-to-zero-ties threshold advances every OOCTZT samples
        if self.processed % OOCTZT == 0 {
            self.ctzt_groups += 1;
            self.ctzt += self.ctzt_groups - 1;
        }
        debug_assert_eq!(self.ctzt, ctzt_threshold(self.processed, OOCTZT));

        // group spans for the overlap correction
        let sv = self.span_v_by_u.entry(value_key(u)).or_insert((v, v));
        if v < sv.0 {
            sv.0 = v;
        }
        if v > sv.1 {
            sv.1 = v;
        }
        let su = self.span_u_by_v.entry(value_key(v)).or_insert((u, u));
        if u < su.0 {
            su.0 = u;
        }
        if u > su.1 {
            su.1 = u;
        }

        self.us.push(u);
        self.vs.push(v);

        let (uu, vv) = (self.tie_pairs_u, self.tie_pairs_v);
        let uu_ctz = uu <= self.ctzt;
        let vv_ctz = vv <= self.ctzt;
        let den = if (uu_ctz && vv > 0) || (vv_ctz && uu > 0) {
            // hybrid: one dimension is effectively tie-free, the other tied
            if self.hybrid_overlap {
                let k_raw = self.overlap_correction();
                hybrid_denominator(self.pair_count, uu, vv, k_raw)
            } else {
                (self.pair_count - uu.max(vv)) as f64
            }
        } else {
            crate::stats::tie_scaled_denominator(self.pair_count, uu, vv)
        };

        if den == 0.0 {
            self.current = 0.0;
            self.degenerate = true;
        } else {
            self.current = self.numerator as f64 / den;
            self.degenerate = false;
        }
        Ok(self.current)
    }

    /// Recounts boundary-interior samples against the per-group spans of the
    /// dimension currently carrying more ties; O(prefix) per call.
    fn overlap_correction(&self) -> u64 {
        let (cont_vals, spans) = if self.tie_pairs_u > self.tie_pairs_v {
            (&self.vs, &self.span_v_by_u)
        } else {
            (&self.us, &self.span_u_by_v)
        };
        let v_prime = spans.len() as u64;
        if v_prime < 2 {
            return 0;
        }
        let spans: Vec<(f64, f64)> = spans.values().copied().collect();
        let mut u_prime = 0u64;
        for &c in cont_vals.iter() {
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
        u_prime * u_prime.saturating_sub(1) / 2 * v_prime
    }
}

impl Default for TauStream {
    fn default() -> Self {
        Self::new()
    }
}

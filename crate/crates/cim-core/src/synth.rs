//! Seed-deterministic synthetic data: noisy functional association patterns,
//! copula-coupled pairs with continuous or discretized margins, the shifted
//! parabola family used for region-detection studies, and Gaussian Markov
//! chains for data-processing-inequality and network tests.

use crate::error::{CimError, Result};
use crate::inference::inverse_normal_cdf;
use crate::network::Dataset;
use crate::stats::{DimensionKind, SamplePairs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Functional association patterns of the benchmark family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Pattern {
    Linear,
    Quadratic,
    Cubic,
    FourthRoot,
    SinusoidalLf,
    SinusoidalHf,
    Circular,
    Step,
}

impl Pattern {
    pub const ALL: [Pattern; 8] = [
        Pattern::Linear,
        Pattern::Quadratic,
        Pattern::Cubic,
        Pattern::FourthRoot,
        Pattern::SinusoidalLf,
        Pattern::SinusoidalHf,
        Pattern::Circular,
        Pattern::Step,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Pattern::Linear => "linear",
            Pattern::Quadratic => "quadratic",
            Pattern::Cubic => "cubic",
            Pattern::FourthRoot => "fourth_root",
            Pattern::SinusoidalLf => "sinusoidal_lf",
            Pattern::SinusoidalHf => "sinusoidal_hf",
            Pattern::Circular => "circular",
            Pattern::Step => "step",
        }
    }

    pub fn parse(name: &str) -> Result<Pattern> {
        Pattern::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| CimError::InvalidConfig(format!("unknown pattern '{name}'")))
    }
}

/// A noisy functional dependency: `Y = f(X) + N(0, noise_sd^2)`.
#[derive(Debug, Clone, Copy)]
pub struct PatternSpec {
    pub pattern: Pattern,
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

fn draw_open_unit(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

/// Generates pattern data with `X ~ U(0, 1)` (`U(-1, 1)` for the circular
/// pattern, which emits both branches) and independent Gaussian noise on Y.
pub fn gen_pattern(spec: &PatternSpec) -> Result<SamplePairs> {
    if spec.n < 2 {
        return Err(CimError::InvalidConfig("pattern needs n >= 2".into()));
    }
    if !spec.noise_sd.is_finite() || spec.noise_sd < 0.0 {
        return Err(CimError::InvalidConfig(format!(
            "noise sd must be finite and nonnegative, got {}",
            spec.noise_sd
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (x, f) = match spec.pattern {
            Pattern::Circular => {
                let x: f64 = rng.random_range(-1.0..1.0);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (x, sign * (1.0 - x * x).sqrt())
            }
            other => {
                let x: f64 = rng.random();
                let f = match other {
                    Pattern::Linear => x,
                    Pattern::Quadratic => 4.0 * (x - 0.5) * (x - 0.5),
                    Pattern::Cubic => {
                        let c = x - 1.0 / 3.0;
                        128.0 * c * c * c - 48.0 * c * c - 12.0 * c
                    }
                    Pattern::FourthRoot => x.powf(0.25),
                    Pattern::SinusoidalLf => (2.0 * std::f64::consts::PI * x).sin(),
                    Pattern::SinusoidalHf => (8.0 * std::f64::consts::PI * x).sin(),
                    Pattern::Step => {
                        if x > 0.5 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Pattern::Circular => unreachable!(),
                };
                (x, f)
            }
        };
        let eps: f64 = StandardNormal.sample(&mut rng);
        xs.push(x);
        ys.push(f + spec.noise_sd * eps);
    }
    SamplePairs::new(xs, ys)
}

/// The region-detection benchmark family `Y = 4 (X - r)^2 + N(0, sigma^2)`
/// with `X ~ U(0, 1)` and vertex at `r`.
pub fn gen_parabola(r: f64, noise_sd: f64, n: usize, seed: u64) -> Result<SamplePairs> {
    if !(0.0 < r && r < 1.0) {
        return Err(CimError::InvalidConfig(format!(
            "parabola vertex must lie in (0, 1), got {r}"
        )));
    }
    if n < 2 {
        return Err(CimError::InvalidConfig("parabola needs n >= 2".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random();
        let eps: f64 = StandardNormal.sample(&mut rng);
        xs.push(x);
        ys.push(4.0 * (x - r) * (x - r) + noise_sd * eps);
    }
    SamplePairs::new(xs, ys)
}

/// Copula families supported by [`sample_copula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CopulaFamily {
    Gaussian,
    Frank,
    Gumbel,
    Clayton,
}

impl CopulaFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Clayton => "clayton",
        }
    }

    pub fn parse(name: &str) -> Result<CopulaFamily> {
        [
            CopulaFamily::Gaussian,
            CopulaFamily::Frank,
            CopulaFamily::Gumbel,
            CopulaFamily::Clayton,
        ]
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| CimError::InvalidConfig(format!("unknown copula family '{name}'")))
    }
}

/// Marginal transforms applied to copula coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    ContinuousGaussian,
    /// Uniform discrete with this many levels, encoded 0..levels-1.
    DiscreteUniform(u32),
}

impl Margin {
    fn apply(&self, p: f64) -> f64 {
        match self {
            Margin::ContinuousGaussian => inverse_normal_cdf(p),
            Margin::DiscreteUniform(levels) => {
                (p * *levels as f64).floor().min(*levels as f64 - 1.0)
            }
        }
    }

    pub fn kind(&self) -> DimensionKind {
        match self {
            Margin::ContinuousGaussian => DimensionKind::Continuous,
            Margin::DiscreteUniform(_) => DimensionKind::Discrete,
        }
    }
}

/// Dependent pair draw: copula family at the parameter implied by `tau`,
/// then inverse-CDF margins.
#[derive(Debug, Clone, Copy)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    pub tau: f64,
    pub n: usize,
    pub margins: (Margin, Margin),
    pub seed: u64,
}

fn debye1(theta: f64) -> f64 {
    // (1/theta) * integral of t / (e^t - 1) over [0, theta], Simpson rule
    debug_assert!(theta > 0.0);
    let f = |t: f64| -> f64 {
        if t.abs() < 1e-12 {
            1.0 - t / 2.0
        } else {
            t / t.exp_m1()
        }
    };
    let steps = 2000usize;
    let h = theta / steps as f64;
    let mut acc = f(0.0) + f(theta);
    for i in 1..steps {
        let t = i as f64 * h;
        acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 / theta
}

fn frank_tau(theta: f64) -> f64 {
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

/// Copula parameter implied by a tau value. Gaussian uses the sine relation,
/// Clayton and Gumbel their closed forms, Frank a numeric inversion of the
/// Debye-function relation accurate to well under 1e-8 in the parameter.
pub fn tau_to_param(family: CopulaFamily, tau: f64) -> Result<f64> {
    match family {
        CopulaFamily::Gaussian => {
            if !(-1.0..=1.0).contains(&tau) {
                return Err(CimError::InvalidConfig(format!(
                    "gaussian copula requires tau in [-1, 1], got {tau}"
                )));
            }
            Ok((std::f64::consts::PI * tau / 2.0).sin())
        }
        CopulaFamily::Clayton => {
            if !(0.0..1.0).contains(&tau) {
                return Err(CimError::InvalidConfig(format!(
                    "clayton copula requires tau in [0, 1), got {tau}"
                )));
            }
            Ok(2.0 * tau / (1.0 - tau))
        }
        CopulaFamily::Gumbel => {
            if !(0.0..1.0).contains(&tau) {
                return Err(CimError::InvalidConfig(format!(
                    "gumbel copula requires tau in [0, 1), got {tau}"
                )));
            }
            Ok(1.0 / (1.0 - tau))
        }
        CopulaFamily::Frank => {
            if !(-1.0..1.0).contains(&tau) || tau.abs() == 1.0 {
                return Err(CimError::InvalidConfig(format!(
                    "frank copula requires tau in (-1, 1), got {tau}"
                )));
            }
            if tau == 0.0 {
                return Ok(0.0);
            }
            let target = tau.abs();
            let (mut lo, mut hi) = (1e-9, 700.0);
            if frank_tau(hi) < target {
                return Err(CimError::InvalidConfig(format!(
                    "frank tau {tau} out of invertible range"
                )));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if frank_tau(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-10 {
                    break;
                }
            }
            let theta = 0.5 * (lo + hi);
            Ok(if tau < 0.0 { -theta } else { theta })
        }
    }
}

fn sample_copula_uv(
    family: CopulaFamily,
    theta: f64,
    rng: &mut ChaCha12Rng,
) -> (f64, f64) {
    match family {
        CopulaFamily::Gaussian => {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            let w = theta * z1 + (1.0 - theta * theta).sqrt() * z2;
            (
                crate::inference::standard_normal_cdf(z1),
                crate::inference::standard_normal_cdf(w),
            )
        }
        CopulaFamily::Clayton => {
            if theta < 1e-10 {
                return (draw_open_unit(rng), draw_open_unit(rng));
            }
            // Marshall-Olkin frailty with Gamma(1/theta) mixing
            let gamma = rand_distr::Gamma::new(1.0 / theta, 1.0).unwrap();
            let s: f64 = gamma.sample(rng).max(f64::MIN_POSITIVE);
            let e1 = -draw_open_unit(rng).ln();
            let e2 = -draw_open_unit(rng).ln();
            (
                (1.0 + e1 / s).powf(-1.0 / theta),
                (1.0 + e2 / s).powf(-1.0 / theta),
            )
        }
        CopulaFamily::Gumbel => {
            if (theta - 1.0).abs() < 1e-10 {
                return (draw_open_unit(rng), draw_open_unit(rng));
            }
            // Marshall-Olkin frailty with a one-sided alpha-stable mixing
            // variable drawn by the Chambers-Mallows-Stuck construction
            let alpha = 1.0 / theta;
            let a = rng.random_range(0.0..std::f64::consts::PI);
            let w = -draw_open_unit(rng).ln();
            let s = ((alpha * a).sin() / a.sin().powf(1.0 / alpha))
                * (((1.0 - alpha) * a).sin() / w).powf((1.0 - alpha) / alpha);
            let e1 = -draw_open_unit(rng).ln();
            let e2 = -draw_open_unit(rng).ln();
            ((-(e1 / s).powf(alpha)).exp(), (-(e2 / s).powf(alpha)).exp())
        }
        CopulaFamily::Frank => {
            if theta.abs() < 1e-10 {
                return (draw_open_unit(rng), draw_open_unit(rng));
            }
            // conditional-distribution inversion
            let u = draw_open_unit(rng);
            let t = draw_open_unit(rng);
            let g = |x: f64| (-theta * x).exp_m1();
            let gv = t * g(1.0) / ((-theta * u).exp() - t * g(u));
            let v = -(1.0 + gv).ln() / theta;
            (u, v.clamp(f64::MIN_POSITIVE, 1.0 - 1e-16))
        }
    }
}

/// Draws `n` dependent pairs from the family at the parameter implied by
/// `tau`, then applies the margins.
pub fn sample_copula(spec: &CopulaSpec) -> Result<SamplePairs> {
    if spec.n < 2 {
        return Err(CimError::InvalidConfig("copula sample needs n >= 2".into()));
    }
    let theta = tau_to_param(spec.family, spec.tau)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (u, v) = sample_copula_uv(spec.family, theta, &mut rng);
        xs.push(spec.margins.0.apply(u));
        ys.push(spec.margins.1.apply(v));
    }
    SamplePairs::new(xs, ys)
}

/// A first-order Gaussian chain `X_1 -> X_2 -> ... -> X_k`: each link is a
/// Gaussian copula at `link_tau`, so the chain property holds by
/// construction.
pub fn gen_markov_chain(n_vars: usize, n: usize, link_tau: f64, seed: u64) -> Result<Dataset> {
    if n_vars < 3 {
        return Err(CimError::InvalidConfig(
            "markov chain needs at least 3 variables".into(),
        ));
    }
    if n < 2 {
        return Err(CimError::InvalidConfig("markov chain needs n >= 2".into()));
    }
    if !(0.0 < link_tau && link_tau < 1.0) {
        return Err(CimError::InvalidConfig(format!(
            "link tau must lie in (0, 1), got {link_tau}"
        )));
    }
    let theta = (std::f64::consts::PI * link_tau / 2.0).sin();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); n_vars];
    for _ in 0..n {
        let mut z: f64 = StandardNormal.sample(&mut rng);
        columns[0].push(z);
        for col in columns.iter_mut().skip(1) {
            let eps: f64 = StandardNormal.sample(&mut rng);
            z = theta * z + (1.0 - theta * theta).sqrt() * eps;
            col.push(z);
        }
    }
    let names: Vec<String> = (1..=n_vars).map(|i| format!("X{i}")).collect();
    let kinds = vec![DimensionKind::Continuous; n_vars];
    Dataset::new(names, columns, kinds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{count_concordance, tau_hat, tau_kl_hat};
    use approx::assert_abs_diff_eq;

    #[test]
    fn generators_are_seed_deterministic() {
        for pattern in Pattern::ALL {
            let spec = PatternSpec {
                pattern,
                n: 64,
                noise_sd: 0.3,
                seed: 5,
            };
            assert_eq!(gen_pattern(&spec).unwrap(), gen_pattern(&spec).unwrap());
        }
        let cs = CopulaSpec {
            family: CopulaFamily::Clayton,
            tau: 0.4,
            n: 64,
            margins: (Margin::ContinuousGaussian, Margin::ContinuousGaussian),
            seed: 8,
        };
        assert_eq!(sample_copula(&cs).unwrap(), sample_copula(&cs).unwrap());
        let a = gen_markov_chain(4, 50, 0.7, 3).unwrap();
        let b = gen_markov_chain(4, 50, 0.7, 3).unwrap();
        assert_eq!(a.columns(), b.columns());
    }

    #[test]
    fn linear_noiseless_is_comonotone() {
        let s = gen_pattern(&PatternSpec {
            pattern: Pattern::Linear,
            n: 200,
            noise_sd: 0.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(tau_hat(&s).unwrap().value, 1.0);
    }

    #[test]
    fn quadratic_noiseless_cancels_concordance() {
        let s = gen_pattern(&PatternSpec {
            pattern: Pattern::Quadratic,
            n: 1000,
            noise_sd: 0.0,
            seed: 2,
        })
        .unwrap();
        let t = tau_hat(&s).unwrap().value;
        assert!(t.abs() < 0.1, "tau = {t}");
        let cim = crate::scan::compute_cim(&s, &crate::scan::ScanConfig::default()).unwrap();
        assert!(cim.value > 0.97, "cim = {}", cim.value);
    }

    #[test]
    fn noiseless_patterns_are_functional() {
        for pattern in Pattern::ALL {
            if pattern == Pattern::Circular {
                continue;
            }
            let s = gen_pattern(&PatternSpec {
                pattern,
                n: 500,
                noise_sd: 0.0,
                seed: 3,
            })
            .unwrap();
            let c = count_concordance(&s);
            assert_eq!(c.ties_x_pairs, 0, "{}", pattern.name());
        }
    }

    #[test]
    fn parabola_vertex_identity() {
        let s = gen_parabola(0.5, 0.0, 500, 4).unwrap();
        let (min_idx, min_y) = s
            .ys()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, y)| (i, *y))
            .unwrap();
        assert!(min_y >= 0.0 && min_y < 1e-3);
        assert!((s.xs()[min_idx] - 0.5).abs() < 0.05);
        assert!(gen_parabola(0.0, 0.1, 50, 1).is_err());
    }

    #[test]
    fn tau_to_param_closed_forms() {
        assert_eq!(tau_to_param(CopulaFamily::Clayton, 0.5).unwrap(), 2.0);
        assert_eq!(tau_to_param(CopulaFamily::Gumbel, 0.5).unwrap(), 2.0);
        assert_abs_diff_eq!(
            tau_to_param(CopulaFamily::Gaussian, 0.5).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        let frank = tau_to_param(CopulaFamily::Frank, 0.5).unwrap();
        assert_abs_diff_eq!(frank, 5.736, epsilon = 2e-3);
        // round trip through the Debye relation
        assert_abs_diff_eq!(frank_tau(frank), 0.5, epsilon = 1e-9);
        assert!(tau_to_param(CopulaFamily::Clayton, 1.0).is_err());
        assert!(tau_to_param(CopulaFamily::Gumbel, -0.2).is_err());
    }

    #[test]
    fn copula_round_trips_recover_tau() {
        for family in [
            CopulaFamily::Gaussian,
            CopulaFamily::Frank,
            CopulaFamily::Gumbel,
            CopulaFamily::Clayton,
        ] {
            for (i, tau) in [0.2, 0.5, 0.8].into_iter().enumerate() {
                let s = sample_copula(&CopulaSpec {
                    family,
                    tau,
                    n: 5000,
                    margins: (Margin::ContinuousGaussian, Margin::ContinuousGaussian),
                    seed: 100 + i as u64,
                })
                .unwrap();
                let c = count_concordance(&s);
                let est = (c.concordant as f64 - c.discordant as f64) / c.n_pairs as f64;
                assert!(
                    (est - tau).abs() < 0.03,
                    "{} at tau {}: estimated {}",
                    family.name(),
                    tau,
                    est
                );
            }
        }
    }

    #[test]
    fn independent_gaussian_copula_stays_in_null_band() {
        let s = sample_copula(&CopulaSpec {
            family: CopulaFamily::Gaussian,
            tau: 0.0,
            n: 2000,
            margins: (Margin::ContinuousGaussian, Margin::ContinuousGaussian),
            seed: 55,
        })
        .unwrap();
        let t = tau_hat(&s).unwrap().value;
        let null_sd = crate::inference::tau_null_sd(2000);
        assert!(t.abs() < 3.0 * null_sd, "tau {t} vs 3 sd {}", 3.0 * null_sd);
    }

    #[test]
    fn discrete_margin_copula_tracks_tau() {
        let mut total = 0.0;
        let runs = 25;
        for seed in 0..runs {
            let s = sample_copula(&CopulaSpec {
                family: CopulaFamily::Gaussian,
                tau: 0.5,
                n: 1000,
                margins: (Margin::ContinuousGaussian, Margin::DiscreteUniform(4)),
                seed: 900 + seed,
            })
            .unwrap();
            total += tau_kl_hat(
                &s,
                (DimensionKind::Continuous, DimensionKind::Discrete),
            )
            .value;
        }
        let mean = total / runs as f64;
        assert!((mean - 0.5).abs() < 0.05, "mean tau_kl {mean}");
    }

    #[test]
    fn markov_chain_orders_dependence() {
        let mut wins = 0;
        let runs = 20;
        for seed in 0..runs {
            let d = gen_markov_chain(4, 400, 0.8, seed).unwrap();
            let t12 = link_tau(&d, 0, 1);
            let t13 = link_tau(&d, 0, 2);
            let t14 = link_tau(&d, 0, 3);
            if t12 > t13 && t13 > t14 {
                wins += 1;
            }
        }
        assert!(wins >= runs * 9 / 10, "ordering held in {wins}/{runs}");
        assert!(gen_markov_chain(2, 100, 0.5, 1).is_err());
        assert!(gen_markov_chain(4, 100, 1.0, 1).is_err());
    }

    fn link_tau(d: &Dataset, i: usize, j: usize) -> f64 {
        let s = SamplePairs::new(d.columns()[i].clone(), d.columns()[j].clone()).unwrap();
        tau_hat(&s).unwrap().value
    }
}

//! Seeded Monte Carlo oracles.
//!
//! Fixed-time marginals of the subordinator are drawn exactly for the two
//! cases with standard samplers: Gamma (`alpha = 0`) and Inverse Gaussian
//! (`alpha = 1/2`). The ATS marginal follows from
//! `f = -(eta + 1/2) Z + sqrt(Z) G + phi T` with `G` standard normal.
//!
//! Large runs are split into fixed-size chunks, each with its own ChaCha
//! stream, so results do not depend on the number of worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, TenorParams};
use crate::par::{self, Execution};
use crate::pricing::EuropeanOption;
use crate::subordination::TssSpec;

/// Draws per chunk of a chunked Monte Carlo run.
pub const CHUNK: usize = 1 << 15;

/// Seed and stream id of a reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    /// Generator for this (seed, stream) pair.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Generator for chunk `index` of a chunked run on this stream.
    pub fn chunk(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ splitmix64(self.stream));
        rng.set_stream(index);
        rng
    }
}

enum Subordinator {
    Gamma(Gamma<f64>),
    InverseGaussian(InverseGaussian<f64>),
}

impl Subordinator {
    /// Law of `Z_t` with mean `t sigma^2` and variance `t sigma^4 k`.
    fn new(alpha: f64, t: f64, sigma: f64, k: f64) -> Result<Self> {
        let s2 = sigma * sigma;
        let bad = |e: String| Error::InvalidParameter(format!("subordinator law: {e}"));
        if alpha == 0.0 {
            Gamma::new(t / k, s2 * k)
                .map(Subordinator::Gamma)
                .map_err(|e| bad(e.to_string()))
        } else if alpha == 0.5 {
            InverseGaussian::new(t * s2, t * t * s2 / k)
                .map(Subordinator::InverseGaussian)
                .map_err(|e| bad(e.to_string()))
        } else {
            Err(Error::UnsupportedAlpha(alpha))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Subordinator::Gamma(d) => d.sample(rng),
            Subordinator::InverseGaussian(d) => d.sample(rng),
        }
    }
}

/// Draws `n` values of the subordinator at time `t`.
pub fn sample_tss_marginal<R: Rng + ?Sized>(t: f64, spec: &TssSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let (sigma, k) = spec.at(t)?;
    let law = Subordinator::new(spec.alpha, t, sigma, k)?;
    Ok((0..n).map(|_| law.sample(rng)).collect())
}

struct AtsSampler {
    law: Subordinator,
    skew: f64,
    drift: f64,
}

impl AtsSampler {
    fn new(tenor: &TenorParams, alpha: f64) -> Result<Self> {
        tenor.validate()?;
        Ok(AtsSampler {
            law: Subordinator::new(alpha, tenor.maturity, tenor.sigma, tenor.k)?,
            skew: tenor.eta + 0.5,
            drift: tenor.phi * tenor.maturity,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z = self.law.sample(rng);
        let g: f64 = rng.sample(StandardNormal);
        -self.skew * z + z.sqrt() * g + self.drift
    }
}

/// Draws `n` values of the log-forward return `f_T` of one tenor.
pub fn sample_ats_marginal<R: Rng + ?Sized>(
    tenor: &TenorParams,
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let s = AtsSampler::new(tenor, alpha)?;
    Ok((0..n).map(|_| s.sample(rng)).collect())
}

/// Sample mean of `exp(i u X)`.
pub fn empirical_chf(samples: &[f64], u: f64) -> Complex64 {
    if samples.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let (mut re, mut im) = (0.0, 0.0);
    for &x in samples {
        let (s, c) = (u * x).sin_cos();
        re += c;
        im += s;
    }
    let n = samples.len() as f64;
    Complex64::new(re / n, im / n)
}

/// Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("KS test needs two non-empty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
    })
}

/// Monte Carlo price estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Call and put estimates at one strike from a shared set of draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McQuote {
    pub strike: f64,
    pub call: McEstimate,
    pub put: McEstimate,
}

#[derive(Clone)]
struct Moments {
    call: Vec<(f64, f64)>,
    put: Vec<(f64, f64)>,
}

/// Monte Carlo call and put prices at several strikes of one tenor.
///
/// The `n` draws are split into chunks of [`CHUNK`]; chunk `i` uses
/// `rng.chunk(i)`, so the result is identical for every [`Execution`].
#[allow(clippy::too_many_arguments)]
pub fn mc_price_strikes(
    tenor: &TenorParams,
    alpha: f64,
    forward: f64,
    discount: f64,
    strikes: &[f64],
    n: usize,
    rng: RngSpec,
    exec: Execution,
) -> Result<Vec<McQuote>> {
    if n < 2 {
        return Err(Error::InsufficientData(format!("Monte Carlo needs n >= 2, got {n}")));
    }
    if strikes.iter().any(|&k| !(k >= 0.0)) || !(forward > 0.0) || !(discount > 0.0 && discount <= 1.0) {
        return Err(Error::InvalidParameter(
            "strikes must be >= 0, forward > 0 and discount in (0, 1]".into(),
        ));
    }
    let sampler = AtsSampler::new(tenor, alpha)?;
    let kappas: Vec<f64> = strikes.iter().map(|k| k / forward).collect();
    let chunks = n.div_ceil(CHUNK);
    let partial = par::map_range(exec, chunks, |c| {
        let len = CHUNK.min(n - c * CHUNK);
        let mut g = rng.chunk(c as u64);
        let mut m = Moments {
            call: vec![(0.0, 0.0); kappas.len()],
            put: vec![(0.0, 0.0); kappas.len()],
        };
        for _ in 0..len {
            let s = sampler.sample(&mut g).exp();
            for (i, &kappa) in kappas.iter().enumerate() {
                let c = (s - kappa).max(0.0);
                let p = (kappa - s).max(0.0);
                m.call[i].0 += c;
                m.call[i].1 += c * c;
                m.put[i].0 += p;
                m.put[i].1 += p * p;
            }
        }
        m
    });
    let mut total = Moments {
        call: vec![(0.0, 0.0); kappas.len()],
        put: vec![(0.0, 0.0); kappas.len()],
    };
    for m in &partial {
        for i in 0..kappas.len() {
            total.call[i].0 += m.call[i].0;
            total.call[i].1 += m.call[i].1;
            total.put[i].0 += m.put[i].0;
            total.put[i].1 += m.put[i].1;
        }
    }
    let nf = n as f64;
    let scale = discount * forward;
    let estimate = |(s, s2): (f64, f64)| {
        let mean = s / nf;
        let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
        McEstimate {
            price: scale * mean,
            std_error: scale * (var / nf).sqrt(),
            n,
        }
    };
    Ok(strikes
        .iter()
        .enumerate()
        .map(|(i, &strike)| McQuote {
            strike,
            call: estimate(total.call[i]),
            put: estimate(total.put[i]),
        })
        .collect())
}

/// Monte Carlo price of a single European option. The option maturity must
/// match one of the model tenors exactly.
pub fn mc_price(
    opt: &EuropeanOption,
    params: &ModelParams,
    n: usize,
    rng: RngSpec,
    exec: Execution,
) -> Result<McEstimate> {
    opt.validate()?;
    let tenor = params.tenor(opt.maturity)?;
    let q = mc_price_strikes(
        tenor,
        params.alpha,
        opt.forward,
        opt.discount,
        &[opt.strike],
        n,
        rng,
        exec,
    )?;
    Ok(if opt.is_call { q[0].call } else { q[0].put })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subordination::Curve;

    fn spec(alpha: f64) -> TssSpec {
        TssSpec::new(alpha, Curve::constant(1.0), Curve::constant(1.0)).unwrap()
    }

    #[test]
    fn subordinator_moments() {
        for alpha in [0.0, 0.5] {
            let mut rng = RngSpec::new(7, 0).generator();
            let z = sample_tss_marginal(1.0, &spec(alpha), 1_000_000, &mut rng).unwrap();
            let n = z.len() as f64;
            let mean = z.iter().sum::<f64>() / n;
            let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
            let se_var = ((m4 - var * var) / n).sqrt();
            assert!((mean - 1.0).abs() < 0.004, "alpha {alpha}: mean {mean}");
            assert!((var - 1.0).abs() < 4.0 * se_var, "alpha {alpha}: var {var} se {se_var}");
            assert!(z.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn unsupported_alpha_and_empty_draws() {
        let mut rng = RngSpec::default().generator();
        assert!(matches!(
            sample_tss_marginal(1.0, &spec(0.3), 10, &mut rng),
            Err(Error::UnsupportedAlpha(_))
        ));
        assert!(sample_tss_marginal(1.0, &spec(0.0), 0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn same_spec_same_draws() {
        let tenor = TenorParams::new(0.5, 0.2, 0.3, 0.8, 0.5).unwrap();
        let a = sample_ats_marginal(&tenor, 0.5, 100, &mut RngSpec::new(3, 4).generator()).unwrap();
        let b = sample_ats_marginal(&tenor, 0.5, 100, &mut RngSpec::new(3, 4).generator()).unwrap();
        let c = sample_ats_marginal(&tenor, 0.5, 100, &mut RngSpec::new(3, 5).generator()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ks_detects_shift_only() {
        let mut g = RngSpec::new(1, 0).generator();
        let a: Vec<f64> = (0..5000).map(|_| g.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..5000).map(|_| g.sample(StandardNormal)).collect();
        let shifted: Vec<f64> = b.iter().map(|x| x + 0.2).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        assert!(ks_two_sample(&a, &shifted).unwrap().p_value < 1e-6);
    }

    #[test]
    fn chunked_prices_do_not_depend_on_execution() {
        let tenor = TenorParams::new(0.25, 0.2, 0.5, 1.0, 0.0).unwrap();
        let run = |exec| {
            mc_price_strikes(
                &tenor,
                0.0,
                100.0,
                0.99,
                &[90.0, 100.0],
                100_000,
                RngSpec::new(9, 1),
                exec,
            )
            .unwrap()
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}

//! Fractional Brownian motion by circulant embedding of fractional Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};

use super::cascade::BinomialCascade;
use super::deterministic::check_length;
use crate::error::{Error, Result};
use crate::pyramid::Signal;

/// Relative size of negative eigenvalues tolerated as rounding.
const PSD_SLACK: f64 = 1e-10;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", alpha, "must lie in (0, 1)"));
    }
    Ok(())
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(alpha: f64, k: usize) -> f64 {
    let h2 = 2.0 * alpha;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// `m` increments of fBm on the grid `i/m` of `[0, 1]`, so that
/// `E|B(x + δ) - B(x)|² = δ^{2α}`.
pub(crate) fn fgn(alpha: f64, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let size = 2 * m;
    let mut row: Vec<Complex64> = (0..size)
        .map(|i| {
            let lag = if i <= m { i } else { size - i };
            Complex64::new(fgn_autocovariance(alpha, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);

    let max = row.iter().map(|c| c.re).fold(0.0, f64::max);
    let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    if min < -PSD_SLACK * max {
        return Err(Error::EmbeddingNotPsd(min));
    }

    let scale = (m as f64).powf(-alpha);
    let mut w: Vec<Complex64> = row
        .iter()
        .map(|lambda| {
            let amp = (lambda.re.max(0.0) / size as f64).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(amp * re, amp * im)
        })
        .collect();
    fft.process(&mut w);
    Ok(w[..m].iter().map(|c| scale * c.re).collect())
}

fn cumulate(increments: &[f64], length: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(length);
    let mut acc = 0.0;
    out.push(acc);
    for x in &increments[..length - 1] {
        acc += x;
        out.push(acc);
    }
    out
}

/// fBm sampled at `k/N`, `k = 0..N`, with `B(0) = 0`.
pub fn fbm(alpha: f64, length: usize, seed: u64) -> Result<Signal> {
    check_alpha(alpha)?;
    check_length(length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inc = fgn(alpha, length, &mut rng)?;
    Signal::new(cumulate(&inc, length), Some(1.0 / length as f64), format!("fbm(alpha={alpha})"))
}

/// `B(f(k/N))` with `f` the distribution function of a binomial cascade and `B` an fBm
/// sampled on `oversampling * N` points, looked up at the nearest grid time.
pub fn fbm_multifractal_time(
    alpha: f64,
    cascade: &BinomialCascade,
    length: usize,
    oversampling: usize,
    seed: u64,
) -> Result<Signal> {
    check_alpha(alpha)?;
    check_length(length)?;
    if oversampling < 16 {
        return Err(Error::param(
            "oversampling",
            oversampling as f64,
            "must be at least 16",
        ));
    }
    let times = cascade.sample(length);
    let m = length * oversampling;
    let idx: Vec<usize> = times
        .iter()
        .map(|t| ((t * m as f64).round() as usize).min(m - 1))
        .collect();
    let collisions = idx.windows(2).filter(|w| w[0] == w[1]).count();
    let fraction = collisions as f64 / (length - 1) as f64;
    if fraction > 0.01 {
        return Err(Error::OversamplingInsufficient {
            fraction,
            oversampling,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fine = cumulate(&fgn(alpha, m, &mut rng)?, m);
    Signal::new(
        idx.iter().map(|&i| fine[i]).collect(),
        Some(1.0 / length as f64),
        format!("fbm_multifractal_time(alpha={alpha}, p={})", cascade.p()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a = fbm(0.7, 1024, 42).unwrap();
        let b = fbm(0.7, 1024, 42).unwrap();
        let c = fbm(0.7, 1024, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.samples()[0], 0.0);
    }

    #[test]
    fn parameter_domain() {
        assert!(fbm(1.0, 1024, 1).is_err());
        assert!(fbm(0.0, 1024, 1).is_err());
        assert!(fbm(0.5, 1000, 1).is_err());
    }

    #[test]
    fn covariance_at_unit_lags() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        assert!(fgn_autocovariance(0.3, 1) < 0.0 && fgn_autocovariance(0.7, 1) > 0.0);
    }

    #[test]
    fn brownian_increments_are_uncorrelated() {
        let s = fbm(0.5, 1 << 16, 5).unwrap();
        let inc: Vec<f64> = s.samples().windows(2).map(|w| w[1] - w[0]).collect();
        let mean = inc.iter().sum::<f64>() / inc.len() as f64;
        let var = inc.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let cov = inc.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
        assert!((cov / var).abs() < 0.02, "{}", cov / var);
    }

    #[test]
    fn increment_variance_follows_power_law() {
        // Averaged over 100 replicates and several lags.
        let n = 1 << 12;
        for alpha in [0.3, 0.7] {
            let lags = [1usize, 4, 16, 64];
            let mut ratio = [0.0; 4];
            for seed in 0..100 {
                let s = fbm(alpha, n, seed).unwrap();
                let x = s.samples();
                for (r, &lag) in ratio.iter_mut().zip(&lags) {
                    let delta = lag as f64 / n as f64;
                    let v = (0..n - lag).map(|i| (x[i + lag] - x[i]).powi(2)).sum::<f64>() / (n - lag) as f64;
                    *r += v / delta.powf(2.0 * alpha) / 100.0;
                }
            }
            let mean = ratio.iter().sum::<f64>() / 4.0;
            assert!((mean - 1.0).abs() < 0.1, "alpha {alpha}: {ratio:?}");
        }
    }

    #[test]
    fn degenerate_time_change_is_plain_fbm() {
        let cascade = BinomialCascade::new(0.5, 10).unwrap();
        let s = fbm_multifractal_time(0.5, &cascade, 1024, 16, 9).unwrap();
        // The lookup reads every 16th point of a 2^14-point path.
        let fine = fbm(0.5, 1 << 14, 9).unwrap();
        for k in 0..1024 {
            assert_eq!(s.samples()[k], fine.samples()[16 * k]);
        }
    }

    #[test]
    fn insufficient_oversampling_is_reported() {
        let cascade = BinomialCascade::new(0.1, 12).unwrap();
        match fbm_multifractal_time(0.3, &cascade, 1 << 12, 16, 1) {
            Err(Error::OversamplingInsufficient { fraction, .. }) => assert!(fraction > 0.01),
            other => panic!("unexpected {other:?}"),
        }
        assert!(fbm_multifractal_time(0.3, &cascade, 1 << 12, 8, 1).is_err());
    }
}

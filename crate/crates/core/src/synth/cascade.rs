//! Deterministic binomial cascade on `[0, 1]`: the left child of every dyadic interval
//! receives the fraction `p` of its mass.

use serde::{Deserialize, Serialize};

use super::deterministic::check_length;
use crate::error::{Error, Result};
use crate::pyramid::Signal;

pub const MAX_CASCADE_DEPTH: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialCascade {
    p: f64,
    depth: u32,
}

impl BinomialCascade {
    pub fn new(p: f64, depth: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", p, "must lie in (0, 1)"));
        }
        if depth == 0 || depth > MAX_CASCADE_DEPTH {
            return Err(Error::param("depth", depth as f64, "must lie in 1..=26"));
        }
        Ok(Self { p, depth })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Masses of the `2^depth` finest dyadic intervals, left to right.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        for _ in 0..self.depth {
            w = w
                .iter()
                .flat_map(|m| [self.p * m, (1.0 - self.p) * m])
                .collect();
        }
        w
    }

    /// Pairwise sum of the finest weights.
    pub fn total_mass(&self) -> f64 {
        let mut w = self.weights();
        while w.len() > 1 {
            w = w.chunks(2).map(|c| c[0] + c[1]).collect();
        }
        w[0]
    }

    /// `f(k 2^{-depth}) = μ([0, k 2^{-depth}])` for `k = 0..=2^depth`.
    pub fn distribution(&self) -> Vec<f64> {
        let mut f = vec![0.0, 1.0];
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(2 * f.len() - 1);
            for w in f.windows(2) {
                next.push(w[0]);
                next.push(w[0] + self.p * (w[1] - w[0]));
            }
            next.push(1.0);
            f = next;
        }
        f
    }

    /// `f(k/length)` for `k = 0..length`, linear between the finest dyadic points.
    pub fn sample(&self, length: usize) -> Vec<f64> {
        let f = self.distribution();
        let cells = 1usize << self.depth;
        if length <= cells {
            let stride = cells / length;
            (0..length).map(|k| f[k * stride]).collect()
        } else {
            let sub = length / cells;
            (0..length)
                .map(|k| {
                    let (i, r) = (k / sub, k % sub);
                    f[i] + (f[i + 1] - f[i]) * r as f64 / sub as f64
                })
                .collect()
        }
    }

    /// The distribution function as a signal on `[0, 1)`.
    pub fn distribution_function(&self, length: usize) -> Result<Signal> {
        check_length(length)?;
        Signal::new(
            self.sample(length),
            Some(1.0 / length as f64),
            format!("binomial_cascade(p={}, depth={})", self.p, self.depth),
        )
    }

    /// `1 - log2(p^q + (1-p)^q)`.
    pub fn scaling_exponent(&self, q: f64) -> f64 {
        1.0 - (self.p.powf(q) + (1.0 - self.p).powf(q)).log2()
    }

    /// Almost-everywhere exponent `-(log2 p + log2(1-p)) / 2`.
    pub fn c1(&self) -> f64 {
        -(self.p.log2() + (1.0 - self.p).log2()) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_and_first_split() {
        let c = BinomialCascade::new(0.25, 16).unwrap();
        assert_eq!(c.total_mass(), 1.0);
        let f = c.distribution();
        assert_eq!(f[1 << 15], 0.25);
        assert_eq!(f[f.len() - 1], 1.0);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn weights_count_turns() {
        let c = BinomialCascade::new(0.3, 5).unwrap();
        let w = c.weights();
        for (k, m) in w.iter().enumerate() {
            let right = (k as u32).count_ones() as i32;
            let expected = 0.3f64.powi(5 - right) * 0.7f64.powi(right);
            assert!((m - expected).abs() <= 1e-15 * expected);
        }
        let f = c.distribution();
        for k in 0..w.len() {
            assert!((f[k + 1] - f[k] - w[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_at_other_resolutions() {
        let c = BinomialCascade::new(0.5, 6).unwrap();
        let s = c.sample(256);
        for (k, v) in s.iter().enumerate() {
            assert!((v - k as f64 / 256.0).abs() < 1e-15);
        }
        let c = BinomialCascade::new(0.25, 8).unwrap();
        let coarse = c.sample(16);
        assert_eq!(coarse[8], 0.25);
    }

    #[test]
    fn domain() {
        assert!(BinomialCascade::new(0.0, 4).is_err());
        assert!(BinomialCascade::new(0.5, 27).is_err());
        assert!(BinomialCascade::new(0.5, 0).is_err());
    }

    #[test]
    fn closed_forms() {
        let c = BinomialCascade::new(0.25, 4).unwrap();
        assert!((c.c1() - 1.2075).abs() < 1e-4);
        assert!(c.scaling_exponent(0.0).abs() < 1e-15);
        assert!((c.scaling_exponent(1.0) - 1.0).abs() < 1e-15);
    }
}

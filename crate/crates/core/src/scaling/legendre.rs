use serde::{Deserialize, Serialize};

use super::{ScaleRange, ScalingFunction};
use crate::error::{Error, Result};
use crate::leaders::Quantity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreOptions {
    pub h_step: f64,
    /// Cells within this of the maximum count as attaining it.
    pub tie_tol: f64,
    /// Largest admissible positive second difference of ζ.
    pub concavity_tol: f64,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        Self {
            h_step: 0.02,
            tie_tol: 1e-6,
            concavity_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub quantity: Quantity,
    pub range: ScaleRange,
    pub h_step: f64,
    pub h_grid: Vec<f64>,
    /// `None` where the transform is negative (empty set).
    pub l: Vec<Option<f64>>,
    /// Transform restricted to `q >= 0`.
    pub l_positive: Vec<f64>,
    /// Transform restricted to `q <= 0`.
    pub l_negative: Vec<f64>,
    pub c1: f64,
    pub max_l: f64,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub warnings: Vec<String>,
}

impl Spectrum {
    /// Value at the grid cell nearest `h`, if `h` lies on the grid's span.
    pub fn value_at(&self, h: f64) -> Option<f64> {
        let i = self.cell_of(h)?;
        self.l[i]
    }

    pub fn cell_of(&self, h: f64) -> Option<usize> {
        let first = *self.h_grid.first()?;
        let i = ((h - first) / self.h_step).round();
        if i < 0.0 || i as usize >= self.h_grid.len() {
            return None;
        }
        let i = i as usize;
        ((self.h_grid[i] - h).abs() <= 0.5 * self.h_step + 1e-9).then_some(i)
    }

    /// `(H, L)` over the support.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.h_grid
            .iter()
            .zip(&self.l)
            .filter_map(|(h, l)| l.map(|l| (*h, l)))
            .collect()
    }
}

/// `min_q (1 + q h - ζ(q))` for each `h`.
pub fn legendre_transform(pairs: &[(f64, f64)], h_grid: &[f64]) -> Vec<f64> {
    h_grid
        .iter()
        .map(|h| {
            pairs
                .iter()
                .map(|(q, z)| 1.0 + q * h - z)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Lattice multiples of `step` covering `[lo, hi]`.
pub(crate) fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let a = (lo / step + 1e-9).floor() as i64;
    let b = (hi / step - 1e-9).ceil() as i64;
    (a..=b.max(a)).map(|i| i as f64 * step).collect()
}

/// Midpoint of the cells whose value is within `tol` of the maximum.
pub(crate) fn argmax_midpoint(grid: &[f64], values: &[f64], tol: f64) -> (f64, f64) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let attaining: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= max - tol).collect();
    let lo = grid[attaining[0]];
    let hi = grid[attaining[attaining.len() - 1]];
    (0.5 * (lo + hi), max)
}

/// Discrete Legendre spectrum of a scaling function on an `H` lattice spanning the
/// range of finite-difference slopes of ζ.
pub fn legendre_spectrum(zeta: &ScalingFunction, opts: &LegendreOptions) -> Result<Spectrum> {
    if !(opts.h_step > 0.0 && opts.h_step.is_finite()) {
        return Err(Error::param("h_step", opts.h_step, "H grid step must be positive"));
    }
    let mut pairs = zeta.finite_pairs();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !(pairs.iter().any(|p| p.0 < 0.0) && pairs.iter().any(|p| p.0 > 0.0)) {
        return Err(Error::Config(
            "Legendre transform needs finite exponents at moments of both signs".into(),
        ));
    }
    let mut warnings = Vec::new();
    if zeta.moments.iter().all(|q| *q != 0.0) {
        warnings.push("moment grid lacks q = 0; L <= 1 is not enforced".into());
    }

    let slopes: Vec<f64> = pairs
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let worst = pairs
        .windows(3)
        .zip(slopes.windows(2))
        .map(|(w, s)| (s[1] - s[0]) * 0.5 * (w[2].0 - w[0].0))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > opts.concavity_tol {
        warnings.push(format!(
            "scaling function is not concave: second difference {worst:.4} exceeds {}; \
             the spectrum reflects its concave hull",
            opts.concavity_tol
        ));
    }

    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h_grid = lattice(lo, hi, opts.h_step);
    let full = legendre_transform(&pairs, &h_grid);
    let pos: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.0 >= 0.0).collect();
    let neg: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.0 <= 0.0).collect();
    let (c1, max_l) = argmax_midpoint(&h_grid, &full, opts.tie_tol);

    Ok(Spectrum {
        quantity: zeta.quantity,
        range: zeta.range,
        h_step: opts.h_step,
        l_positive: legendre_transform(&pos, &h_grid),
        l_negative: legendre_transform(&neg, &h_grid),
        l: full.iter().map(|&v| (v >= 0.0).then_some(v)).collect(),
        h_grid,
        c1,
        max_l,
        h_min: None,
        h_max: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaders::LeaderKind;
    use crate::scaling::default_q_grid;

    fn zeta_of(f: impl Fn(f64) -> f64) -> ScalingFunction {
        let q = default_q_grid();
        let z = q.iter().map(|&q| f(q)).collect();
        ScalingFunction::from_values(
            Quantity::Leaders(LeaderKind::Holder),
            q,
            z,
            ScaleRange::new(3, 8).unwrap(),
        )
    }

    #[test]
    fn affine_scaling_gives_a_point() {
        let s = legendre_spectrum(&zeta_of(|q| 0.3 * q), &LegendreOptions::default()).unwrap();
        assert_eq!(s.h_grid.len(), 1);
        assert!((s.h_grid[0] - 0.3).abs() < 1e-12);
        assert!((s.l[0].unwrap() - 1.0).abs() < 1e-12);
        assert!((s.c1 - 0.3).abs() < 1e-12);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn binomial_closed_form() {
        let p: f64 = 0.25;
        let s = legendre_spectrum(
            &zeta_of(|q| 1.0 - (p.powf(q) + (1.0 - p).powf(q)).log2()),
            &LegendreOptions::default(),
        )
        .unwrap();
        let c1 = -(p.log2() + (1.0 - p).log2()) / 2.0;
        assert!((c1 - 1.2075).abs() < 1e-4);
        assert!((s.c1 - c1).abs() <= 0.02, "{}", s.c1);
        assert!((s.max_l - 1.0).abs() < 0.01);
        assert!(s.l.iter().flatten().all(|v| *v <= 1.0 + 1e-12));
    }

    #[test]
    fn partial_transforms_bound_the_full_one() {
        let s = legendre_spectrum(&zeta_of(|q| 0.5 * q - 0.03 * q * q), &LegendreOptions::default()).unwrap();
        for (i, l) in s.l.iter().enumerate() {
            if let Some(l) = l {
                assert!(s.l_positive[i] >= *l - 1e-12 && s.l_negative[i] >= *l - 1e-12);
            }
        }
        // Left of c1 the positive-q branch is active, right of it the negative one.
        let i = s.cell_of(0.3).unwrap();
        assert!(s.l_negative[i] > s.l_positive[i] + 0.1);
        let i = s.cell_of(0.7).unwrap();
        assert!(s.l_positive[i] > s.l_negative[i] + 0.1);
    }

    #[test]
    fn ties_resolve_to_midpoint() {
        let (c, m) = argmax_midpoint(&[0.1, 0.2, 0.3, 0.4], &[0.5, 1.0, 1.0 - 1e-8, 0.2], 1e-6);
        assert!((c - 0.25).abs() < 1e-12 && m == 1.0);
    }

    #[test]
    fn non_concave_input_warns() {
        let s = legendre_spectrum(&zeta_of(|q| 0.5 * q + 0.4 * q * q), &LegendreOptions::default()).unwrap();
        assert!(s.warnings.iter().any(|w| w.contains("not concave")));
    }

    #[test]
    fn one_sided_moments_rejected() {
        let z = ScalingFunction::from_values(
            Quantity::Coefficients,
            vec![0.5, 1.0, 2.0],
            vec![0.2, 0.4, 0.8],
            ScaleRange::new(1, 3).unwrap(),
        );
        assert!(legendre_spectrum(&z, &LegendreOptions::default()).is_err());
    }

    #[test]
    fn lattice_anchoring() {
        assert_eq!(lattice(0.3, 0.3, 0.02).len(), 1);
        let g = lattice(0.301, 0.339, 0.02);
        assert_eq!(g.len(), 3);
        assert!((g[0] - 0.30).abs() < 1e-12 && (g[2] - 0.34).abs() < 1e-12);
    }
}

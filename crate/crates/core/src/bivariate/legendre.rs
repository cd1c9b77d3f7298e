use serde::{Deserialize, Serialize};

use super::BivariateScaling;
use crate::error::{Error, Result};
use crate::leaders::Quantity;
use crate::scaling::legendre::lattice;
use crate::scaling::{legendre_transform, ScaleRange, Spectrum};

pub const UPPER_BOUND_CAVEAT: &str = "Unlike its univariate counterpart, the bivariate Legendre \
spectrum is not an upper bound for the joint multifractal spectrum in general; treat it as a \
descriptive statistic of the joint scaling.";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateLegendreOptions {
    pub h_step: f64,
    pub tie_tol: f64,
    pub concavity_tol: f64,
}

impl Default for BivariateLegendreOptions {
    fn default() -> Self {
        Self {
            h_step: 0.02,
            tie_tol: 1e-6,
            concavity_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateSpectrum {
    pub quantities: (Quantity, Quantity),
    pub range: ScaleRange,
    pub h_step: f64,
    pub h1_grid: Vec<f64>,
    pub h2_grid: Vec<f64>,
    /// `L(H1, H2)` indexed `[i1][i2]`; `None` where the transform is negative.
    pub l: Vec<Vec<Option<f64>>>,
    /// Centroid of the cells attaining the maximum.
    pub argmax: (f64, f64),
    pub max_l: f64,
    /// Univariate transforms of the axis rows of ζ on the same grids.
    pub marginal1: Option<Vec<f64>>,
    pub marginal2: Option<Vec<f64>>,
    /// Largest `|sup_{H2} L(H1, H2) - L1(H1)|` over the support of `L1`, and likewise
    /// for the second axis. The supremum runs over all real `H2`, not just the grid.
    pub projection_gap: (Option<f64>, Option<f64>),
    pub warnings: Vec<String>,
    pub caveat: String,
}

impl BivariateSpectrum {
    /// `(H1, H2, L)` over the support.
    pub fn support(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for (i1, h1) in self.h1_grid.iter().enumerate() {
            for (i2, h2) in self.h2_grid.iter().enumerate() {
                if let Some(l) = self.l[i1][i2] {
                    out.push((*h1, *h2, l));
                }
            }
        }
        out
    }
}

/// Slopes of ζ between neighbouring finite cells along one axis.
fn axis_slopes(z: &BivariateScaling, axis: usize) -> (Vec<f64>, f64) {
    let (n1, n2) = (z.r1.len(), z.r2.len());
    let mut slopes = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let lines: Vec<Vec<(f64, Option<f64>)>> = match axis {
        0 => (0..n2)
            .map(|i2| (0..n1).map(|i1| (z.r1[i1], z.zeta[i1][i2])).collect())
            .collect(),
        _ => (0..n1)
            .map(|i1| (0..n2).map(|i2| (z.r2[i2], z.zeta[i1][i2])).collect())
            .collect(),
    };
    for line in &lines {
        let s: Vec<Option<(f64, f64)>> = line
            .windows(2)
            .map(|w| match (w[0].1, w[1].1) {
                (Some(a), Some(b)) => Some((0.5 * (w[0].0 + w[1].0), (b - a) / (w[1].0 - w[0].0))),
                _ => None,
            })
            .collect();
        slopes.extend(s.iter().flatten().map(|p| p.1));
        for w in s.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                worst = worst.max((b.1 - a.1) * (b.0 - a.0));
            }
        }
    }
    (slopes, worst)
}

/// `sup_{H'} min_r (1 - ζ(r) + H·r)` with the coordinate `axis` of `H` held at `h`.
/// The objective is concave in `H'`, so a ternary search on `[lo, hi]` converges.
fn sup_along(cells: &[(f64, f64, f64)], axis: usize, h: f64, lo: f64, hi: f64) -> f64 {
    let f = |x: f64| {
        let (h1, h2) = if axis == 0 { (h, x) } else { (x, h) };
        cells
            .iter()
            .map(|&(a, b, z)| 1.0 - z + (h1 * a + h2 * b))
            .fold(f64::INFINITY, f64::min)
    };
    let (mut a, mut b) = (lo, hi);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    f(0.5 * (a + b))
}

fn sorted_mean(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Two-variable Legendre transform `L(H) = min_r (1 - ζ(r) + H·r)` on a lattice of
/// step `h_step` in each direction.
pub fn bivariate_legendre(
    zeta: &BivariateScaling,
    opts: &BivariateLegendreOptions,
) -> Result<BivariateSpectrum> {
    if !(opts.h_step > 0.0 && opts.h_step.is_finite()) {
        return Err(Error::param("h_step", opts.h_step, "H grid step must be positive"));
    }
    let cells = zeta.finite_cells();
    let signs = |f: fn(&(f64, f64, f64)) -> f64| {
        cells.iter().any(|c| f(c) < 0.0) && cells.iter().any(|c| f(c) > 0.0)
    };
    if !(signs(|c| c.0) && signs(|c| c.1)) {
        return Err(Error::Config(
            "bivariate Legendre transform needs finite exponents at moments of both signs on both axes"
                .into(),
        ));
    }

    let mut warnings = Vec::new();
    let mut grids = Vec::new();
    for axis in 0..2 {
        let (slopes, worst) = axis_slopes(zeta, axis);
        if worst > opts.concavity_tol {
            warnings.push(format!(
                "scaling function is not concave along r{}: second difference {worst:.4} exceeds {}",
                axis + 1,
                opts.concavity_tol
            ));
        }
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        grids.push(lattice(lo, hi, opts.h_step));
    }
    let (h1_grid, h2_grid) = (grids.swap_remove(0), grids.swap_remove(0));

    let raw: Vec<Vec<f64>> = h1_grid
        .iter()
        .map(|&h1| {
            h2_grid
                .iter()
                .map(|&h2| {
                    cells
                        .iter()
                        .map(|&(a, b, z)| 1.0 - z + (h1 * a + h2 * b))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();

    let max_l = raw.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut t1, mut t2) = (Vec::new(), Vec::new());
    for (i1, row) in raw.iter().enumerate() {
        for (i2, v) in row.iter().enumerate() {
            if *v >= max_l - opts.tie_tol {
                t1.push(h1_grid[i1]);
                t2.push(h2_grid[i2]);
            }
        }
    }
    let argmax = (sorted_mean(t1), sorted_mean(t2));

    let marginal1 = zeta
        .marginal(0)
        .map(|m| legendre_transform(&m.finite_pairs(), &h1_grid));
    let marginal2 = zeta
        .marginal(1)
        .map(|m| legendre_transform(&m.finite_pairs(), &h2_grid));
    let gap = |marginal: &Option<Vec<f64>>, axis: usize| -> Option<f64> {
        let m = marginal.as_ref()?;
        let (grid, other) = match axis {
            0 => (&h1_grid, &h2_grid),
            _ => (&h2_grid, &h1_grid),
        };
        let (lo, hi) = (other[0] - opts.h_step, other[other.len() - 1] + opts.h_step);
        m.iter()
            .zip(grid)
            .filter(|(v, _)| **v >= 0.0)
            .map(|(v, &h)| {
                let proj = sup_along(&cells, axis, h, lo, hi);
                (proj - v).abs()
            })
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g))))
    };
    let projection_gap = (gap(&marginal1, 0), gap(&marginal2, 1));

    Ok(BivariateSpectrum {
        quantities: zeta.quantities,
        range: zeta.range,
        h_step: opts.h_step,
        l: raw
            .iter()
            .map(|row| row.iter().map(|&v| (v >= 0.0).then_some(v)).collect())
            .collect(),
        h1_grid,
        h2_grid,
        argmax,
        max_l,
        marginal1,
        marginal2,
        projection_gap,
        warnings,
        caveat: UPPER_BOUND_CAVEAT.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub sup_norm: f64,
    pub mean_abs: f64,
    pub cells: usize,
}

impl ResidualSummary {
    fn of(field: &[Vec<Option<f64>>]) -> Option<Self> {
        let vals: Vec<f64> = field.iter().flatten().flatten().map(|v| v.abs()).collect();
        if vals.is_empty() {
            return None;
        }
        Some(Self {
            sup_norm: vals.iter().copied().fold(0.0, f64::max),
            mean_abs: vals.iter().sum::<f64>() / vals.len() as f64,
            cells: vals.len(),
        })
    }
}

/// Residuals of the bivariate spectrum against the codimension rule `L1 + L2 - 1` and
/// the large-intersection rule `min(L1, L2)`, over the cells where all three spectra
/// are positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaDiagnostics {
    /// Indexed like the bivariate spectrum; `None` off the joint support.
    pub codimension_field: Vec<Vec<Option<f64>>>,
    pub large_intersection_field: Vec<Vec<Option<f64>>>,
    pub codimension: Option<ResidualSummary>,
    pub large_intersection: Option<ResidualSummary>,
    pub empty_support: bool,
}

/// Compares the bivariate spectrum with the two rules, reading the univariate spectra at
/// their nearest grid cells.
pub fn formula_diagnostics(
    biv: &BivariateSpectrum,
    uni1: &Spectrum,
    uni2: &Spectrum,
) -> FormulaDiagnostics {
    let l1: Vec<Option<f64>> = biv.h1_grid.iter().map(|h| uni1.value_at(*h)).collect();
    let l2: Vec<Option<f64>> = biv.h2_grid.iter().map(|h| uni2.value_at(*h)).collect();
    let mut codim = vec![vec![None; biv.h2_grid.len()]; biv.h1_grid.len()];
    let mut large = codim.clone();
    for i1 in 0..biv.h1_grid.len() {
        for i2 in 0..biv.h2_grid.len() {
            if let (Some(l), Some(a), Some(b)) = (biv.l[i1][i2], l1[i1], l2[i2]) {
                if l > 0.0 && a > 0.0 && b > 0.0 {
                    codim[i1][i2] = Some(l - (a + b - 1.0));
                    large[i1][i2] = Some(l - a.min(b));
                }
            }
        }
    }
    let codimension = ResidualSummary::of(&codim);
    if codimension.is_none() {
        log::warn!("bivariate and univariate spectra share no positive cell");
    }
    FormulaDiagnostics {
        large_intersection: ResidualSummary::of(&large),
        empty_support: codimension.is_none(),
        codimension,
        codimension_field: codim,
        large_intersection_field: large,
    }
}

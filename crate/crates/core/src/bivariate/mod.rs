//! Joint analysis of two signals sampled on the same dyadic grid.

mod legendre;

pub use legendre::{
    bivariate_legendre, formula_diagnostics, BivariateLegendreOptions, BivariateSpectrum,
    FormulaDiagnostics, ResidualSummary, UPPER_BOUND_CAVEAT,
};

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leaders::Quantity;
use crate::pyramid::{CoefficientPyramid, Multiresolution, ScaleView, Signal};
use crate::scaling::regression::fit_line;
use crate::scaling::{log2_mean_exp2, moment_grid, ScaleRange, ScalingFunction, Weighting, R2_WARNING};

/// `[-5, 5]` in steps of `0.5`, used on both axes.
pub fn default_r_grid() -> Vec<f64> {
    moment_grid(-5.0, 5.0, 0.5).expect("static grid")
}

/// Truncates both signals to the largest power of two not exceeding the shorter one.
pub fn align_pair(a: &Signal, b: &Signal) -> Result<(Signal, Signal)> {
    let n = a.len().min(b.len());
    if n < 2 {
        return Err(Error::SignalTooShort(n));
    }
    let n = 1usize << n.ilog2();
    if n != a.len() || n != b.len() {
        log::info!(
            "pair truncated to {n} samples (lengths {} and {})",
            a.len(),
            b.len()
        );
    }
    let cut = |s: &Signal| Signal::new(s.samples()[..n].to_vec(), s.dt(), s.label().to_string());
    Ok((cut(a)?, cut(b)?))
}

/// The scales present in both inputs with the nodes interior to both, ascending.
fn joint_views<'a, A, B>(d1: &'a A, d2: &'a B) -> Result<Vec<(ScaleView<'a>, ScaleView<'a>, Range<usize>)>>
where
    A: Multiresolution + ?Sized,
    B: Multiresolution + ?Sized,
{
    if d1.n_samples() != d2.n_samples() {
        return Err(Error::Misaligned(format!(
            "inputs describe {} and {} samples",
            d1.n_samples(),
            d2.n_samples()
        )));
    }
    let mut out = Vec::new();
    for v1 in d1.scale_views() {
        let Some(v2) = d2.view(v1.scale) else { continue };
        if v1.values.len() != v2.values.len() {
            return Err(Error::Misaligned(format!(
                "scale {} has {} and {} nodes",
                v1.scale,
                v1.values.len(),
                v2.values.len()
            )));
        }
        let interior = v1.interior.start.max(v2.interior.start)..v1.interior.end.min(v2.interior.end);
        if !interior.is_empty() {
            out.push((v1, v2, interior));
        }
    }
    if out.is_empty() {
        return Err(Error::Misaligned("no common scale with interior nodes".into()));
    }
    out.sort_by_key(|v| v.0.scale);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTable {
    /// Ascending.
    pub scales: Vec<u32>,
    pub counts: Vec<usize>,
    pub s11: Vec<f64>,
    pub s22: Vec<f64>,
    pub s12: Vec<f64>,
    /// `None` at scales where either signal has zero energy.
    pub coherence: Vec<Option<f64>>,
    pub range: ScaleRange,
    /// Slopes of `log2 S_mn(j)` against `-j`; `None` unless `S_mn > 0` throughout the range.
    pub h11: Option<f64>,
    pub h22: Option<f64>,
    pub h12: Option<f64>,
}

impl CoherenceTable {
    /// Largest `|C(j)|` over the scales of `range` that have a coherence.
    pub fn max_abs_coherence(&self, range: ScaleRange) -> Option<f64> {
        self.scales
            .iter()
            .zip(&self.coherence)
            .filter(|(j, _)| range.contains(**j))
            .filter_map(|(_, c)| c.map(f64::abs))
            .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.max(c))))
    }
}

fn power_law_exponent(scales: &[u32], values: &[f64], range: ScaleRange) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .zip(values)
        .filter(|(j, _)| range.contains(**j))
        .map(|(j, v)| (-(*j as f64), *v))
        .unzip();
    if xs.len() != range.len() || ys.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let ys: Vec<f64> = ys.iter().map(|v| v.log2()).collect();
    fit_line(&xs, &ys, &vec![1.0; xs.len()]).map(|f| f.slope)
}

/// Per-scale second moments and coherence of two coefficient pyramids.
pub fn cross_correlation(
    p1: &CoefficientPyramid,
    p2: &CoefficientPyramid,
    range: ScaleRange,
) -> Result<CoherenceTable> {
    let views = joint_views(p1, p2)?;
    let mut t = CoherenceTable {
        scales: Vec::new(),
        counts: Vec::new(),
        s11: Vec::new(),
        s22: Vec::new(),
        s12: Vec::new(),
        coherence: Vec::new(),
        range,
        h11: None,
        h22: None,
        h12: None,
    };
    for (v1, v2, interior) in &views {
        let a = &v1.values[interior.clone()];
        let b = &v2.values[interior.clone()];
        let n = a.len() as f64;
        let s11 = a.iter().map(|x| x * x).sum::<f64>() / n;
        let s22 = b.iter().map(|x| x * x).sum::<f64>() / n;
        let s12 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n;
        let c = (s11 > 0.0 && s22 > 0.0).then(|| s12 / (s11 * s22).sqrt());
        if c.is_none() {
            log::warn!("scale {}: zero energy, coherence undefined", v1.scale);
        }
        t.scales.push(v1.scale);
        t.counts.push(a.len());
        t.s11.push(s11);
        t.s22.push(s22);
        t.s12.push(s12);
        t.coherence.push(c);
    }
    if !range.scales().all(|j| t.scales.contains(&j)) {
        return Err(Error::InvalidScaleRange {
            j1: range.j1,
            j2: range.j2,
            reason: format!("available scales are {:?}", t.scales),
        });
    }
    t.h11 = power_law_exponent(&t.scales, &t.s11, range);
    t.h22 = power_law_exponent(&t.scales, &t.s22, range);
    t.h12 = power_law_exponent(&t.scales, &t.s12, range);
    Ok(t)
}

/// `log2 S(r, j)` on the Cartesian grid `r1 × r2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateTable {
    pub quantities: (Quantity, Quantity),
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Ascending.
    pub scales: Vec<u32>,
    /// Indexed `[scale][i1][i2]`.
    pub log2_values: Vec<Vec<Vec<Option<f64>>>>,
    /// Nodes interior to both inputs, per scale.
    pub counts: Vec<usize>,
}

impl BivariateTable {
    pub fn log2(&self, scale: u32, i1: usize, i2: usize) -> Option<f64> {
        let row = self.scales.iter().position(|&j| j == scale)?;
        self.log2_values[row][i1][i2]
    }
}

fn check_moments(r: &[f64], axis: &'static str) -> Result<()> {
    if r.is_empty() {
        return Err(Error::Config(format!("empty {axis} grid")));
    }
    if let Some(v) = r.iter().find(|v| !v.is_finite()) {
        return Err(Error::param(axis, *v, "moments must be finite"));
    }
    Ok(())
}

/// `log2((1/n) Σ_k d1^{r1} d2^{r2})` from per-node logs (`-inf` for zeros). Nodes with a
/// zero under a negative exponent are excluded from the sum and from `n`.
fn joint_cell(l1: &[f64], l2: &[f64], r1: f64, r2: f64) -> Option<f64> {
    if r1 == 0.0 && r2 == 0.0 {
        return Some(0.0);
    }
    let mut n = 0usize;
    let mut terms = Vec::with_capacity(l1.len());
    for (&a, &b) in l1.iter().zip(l2) {
        let z1 = a == f64::NEG_INFINITY;
        let z2 = b == f64::NEG_INFINITY;
        if (z1 && r1 < 0.0) || (z2 && r2 < 0.0) {
            continue;
        }
        n += 1;
        if (z1 && r1 > 0.0) || (z2 && r2 > 0.0) {
            continue;
        }
        terms.push(match (r1 != 0.0, r2 != 0.0) {
            (true, true) => r1 * a + r2 * b,
            (true, false) => r1 * a,
            _ => r2 * b,
        });
    }
    log2_mean_exp2(&terms, n)
}

/// Count-normalized joint moments of two multiresolution quantities.
pub fn bivariate_structure_function<A, B>(
    d1: &A,
    d2: &B,
    r1: &[f64],
    r2: &[f64],
) -> Result<BivariateTable>
where
    A: Multiresolution + ?Sized,
    B: Multiresolution + ?Sized,
{
    check_moments(r1, "r1")?;
    check_moments(r2, "r2")?;
    let views = joint_views(d1, d2)?;
    let mut scales = Vec::with_capacity(views.len());
    let mut counts = Vec::with_capacity(views.len());
    let mut log2_values = Vec::with_capacity(views.len());
    let log = |v: &f64| if *v == 0.0 { f64::NEG_INFINITY } else { v.abs().log2() };
    for (v1, v2, interior) in &views {
        let l1: Vec<f64> = v1.values[interior.clone()].iter().map(log).collect();
        let l2: Vec<f64> = v2.values[interior.clone()].iter().map(log).collect();
        let rows: Vec<Vec<Option<f64>>> = r1
            .par_iter()
            .map(|&a| r2.iter().map(|&b| joint_cell(&l1, &l2, a, b)).collect())
            .collect();
        scales.push(v1.scale);
        counts.push(interior.len());
        log2_values.push(rows);
    }
    Ok(BivariateTable {
        quantities: (d1.quantity(), d2.quantity()),
        r1: r1.to_vec(),
        r2: r2.to_vec(),
        scales,
        log2_values,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateScaling {
    pub quantities: (Quantity, Quantity),
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// `ζ(r1, r2)` indexed `[i1][i2]`.
    pub zeta: Vec<Vec<Option<f64>>>,
    pub r2_fit: Vec<Vec<Option<f64>>>,
    pub range: ScaleRange,
    /// Number of cells fit with r² below the warning level.
    pub poor_fits: usize,
}

impl BivariateScaling {
    /// The scaling function of one input, read off the row where the other exponent is 0.
    pub fn marginal(&self, axis: usize) -> Option<ScalingFunction> {
        let (moments, zeta, r2, quantity): (Vec<f64>, Vec<Option<f64>>, Vec<Option<f64>>, Quantity) = match axis {
            0 => {
                let i2 = self.r2.iter().position(|r| *r == 0.0)?;
                (
                    self.r1.clone(),
                    self.zeta.iter().map(|row| row[i2]).collect(),
                    self.r2_fit.iter().map(|row| row[i2]).collect(),
                    self.quantities.0,
                )
            }
            1 => {
                let i1 = self.r1.iter().position(|r| *r == 0.0)?;
                (self.r2.clone(), self.zeta[i1].clone(), self.r2_fit[i1].clone(), self.quantities.1)
            }
            _ => return None,
        };
        let poor_fit = moments
            .iter()
            .zip(&r2)
            .filter(|(_, r)| matches!(r, Some(r) if *r < R2_WARNING))
            .map(|(q, _)| *q)
            .collect();
        Some(ScalingFunction {
            quantity,
            moments,
            zeta,
            intercept: vec![None; r2.len()],
            r2,
            range: self.range,
            weighting: Weighting::Uniform,
            poor_fit,
        })
    }

    /// `(r1, r2, ζ)` for every cell with a slope.
    pub fn finite_cells(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for (i1, a) in self.r1.iter().enumerate() {
            for (i2, b) in self.r2.iter().enumerate() {
                if let Some(z) = self.zeta[i1][i2] {
                    out.push((*a, *b, z));
                }
            }
        }
        out
    }
}

/// Per-cell slope of `log2 S(r, j)` against `-j`.
pub fn bivariate_scaling(table: &BivariateTable, range: ScaleRange) -> Result<BivariateScaling> {
    let rows: Vec<usize> = range
        .scales()
        .map(|j| {
            table
                .scales
                .iter()
                .position(|&s| s == j)
                .ok_or_else(|| Error::InvalidScaleRange {
                    j1: range.j1,
                    j2: range.j2,
                    reason: format!("scale {j} missing from the bivariate table"),
                })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|&r| -(table.scales[r] as f64)).collect();
    let ws = vec![1.0; xs.len()];
    let fits: Vec<Vec<Option<(f64, f64)>>> = (0..table.r1.len())
        .into_par_iter()
        .map(|i1| {
            (0..table.r2.len())
                .map(|i2| {
                    let ys: Option<Vec<f64>> =
                        rows.iter().map(|&r| table.log2_values[r][i1][i2]).collect();
                    fit_line(&xs, &ys?, &ws).map(|f| (f.slope, f.r2))
                })
                .collect()
        })
        .collect();
    let poor_fits = fits
        .iter()
        .flatten()
        .filter(|f| matches!(f, Some((_, r2)) if *r2 < R2_WARNING))
        .count();
    Ok(BivariateScaling {
        quantities: table.quantities,
        r1: table.r1.clone(),
        r2: table.r2.clone(),
        zeta: fits.iter().map(|row| row.iter().map(|f| f.map(|f| f.0)).collect()).collect(),
        r2_fit: fits.iter().map(|row| row.iter().map(|f| f.map(|f| f.1)).collect()).collect(),
        range,
        poor_fits,
    })
}

//! Structure functions, scaling functions, uniform exponents and the diagnostics built
//! on top of them.
//!
//! Structure functions are count-normalized, `S(j, q) = (1/n_j) Σ_k d_{j,k}^q`, and
//! scaling exponents are the slopes of `log2 S(j, q)` against `-j`.

mod classify;
pub(crate) mod legendre;
pub(crate) mod regression;

pub use classify::{classify, ClassifyInput, ClassifyTolerances, Diagnosis, Verdict, VerdictStatus};
pub use legendre::{legendre_spectrum, legendre_transform, LegendreOptions, Spectrum};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leaders::{LeaderPyramid, Quantity};
use crate::pyramid::Multiresolution;
use regression::fit_line;

/// Minimum number of finer levels required under a leader before its scale is used
/// by default.
pub const DEFAULT_MIN_LEADER_DEPTH: u32 = 3;

/// Fits with r² below this are flagged: the slope then tracks a liminf at best.
pub const R2_WARNING: f64 = 0.9;

/// Inclusive range of scales `j1..=j2` (finer scales have larger `j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub j1: u32,
    pub j2: u32,
}

impl ScaleRange {
    pub fn new(j1: u32, j2: u32) -> Result<Self> {
        if j2 < j1 + 2 {
            return Err(Error::InvalidScaleRange {
                j1,
                j2,
                reason: "at least 3 scales are required".into(),
            });
        }
        Ok(Self { j1, j2 })
    }

    /// Widest range over the scales of `d` minus the two coarsest and two finest,
    /// keeping only scales with at least `min_depth` levels beneath.
    pub fn default_for<M: Multiresolution + ?Sized>(d: &M, min_depth: u32) -> Result<Self> {
        let views = d.scale_views();
        let finest = views.iter().map(|v| v.scale).max().unwrap_or(0);
        let coarsest = views.iter().map(|v| v.scale).min().unwrap_or(0);
        let j1 = coarsest + 2;
        let j2 = finest
            .saturating_sub(2)
            .min(finest.saturating_sub(min_depth))
            .min(
                views
                    .iter()
                    .filter(|v| v.depth >= min_depth && !v.interior.is_empty())
                    .map(|v| v.scale)
                    .max()
                    .unwrap_or(0),
            );
        if j2 < j1 + 2 {
            return Err(Error::InsufficientScales(
                (j2 + 1).saturating_sub(j1) as usize,
            ));
        }
        Ok(Self { j1, j2 })
    }

    pub fn contains(&self, j: u32) -> bool {
        (self.j1..=self.j2).contains(&j)
    }

    pub fn len(&self) -> usize {
        (self.j2 - self.j1 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> {
        self.j1..=self.j2
    }

    pub(crate) fn check_within<M: Multiresolution + ?Sized>(&self, d: &M) -> Result<()> {
        let views = d.scale_views();
        for j in self.scales() {
            if !views.iter().any(|v| v.scale == j) {
                return Err(Error::InvalidScaleRange {
                    j1: self.j1,
                    j2: self.j2,
                    reason: format!("scale {j} is not available"),
                });
            }
        }
        Ok(())
    }
}

/// Time span covered by a scale-`j` coefficient: `2^{J - j}` samples for `N = 2^J`.
pub fn scale_duration(j: u32, n_samples: usize, dt: f64) -> f64 {
    let big_j = n_samples.trailing_zeros() as i32;
    2f64.powi(big_j - j as i32) * dt
}

/// `lo, lo + step, ..., ≤ hi`, each point computed as `lo + i * step`.
pub fn moment_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(Error::param("grid", f64::NAN, "grid bounds must be finite"));
    }
    if !(step > 0.0) {
        return Err(Error::param("step", step, "grid step must be positive"));
    }
    if hi < lo {
        return Err(Error::param("hi", hi, "grid upper bound below lower bound"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// `q ∈ [-8, 8]`, step 0.25.
pub fn default_q_grid() -> Vec<f64> {
    moment_grid(-8.0, 8.0, 0.25).expect("static grid")
}

/// `p ∈ (0, 8]`, step 0.25.
pub fn default_p_grid() -> Vec<f64> {
    moment_grid(0.25, 8.0, 0.25).expect("static grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Each scale weighted by the number of nodes summed.
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionTable {
    pub quantity: Quantity,
    pub moments: Vec<f64>,
    /// Ascending.
    pub scales: Vec<u32>,
    /// `log2 S(j, q)` indexed `[scale][moment]`; `None` when no node contributes.
    pub log2_values: Vec<Vec<Option<f64>>>,
    /// Interior nodes per scale.
    pub counts: Vec<usize>,
    /// Zero-valued nodes per scale, dropped from negative moments.
    pub zeros: Vec<usize>,
}

impl StructureFunctionTable {
    /// Table from explicit `log2 S` values (rows ascending in scale).
    pub fn from_log2_values(
        quantity: Quantity,
        moments: Vec<f64>,
        scales: Vec<u32>,
        log2_values: Vec<Vec<Option<f64>>>,
        counts: Vec<usize>,
    ) -> Result<Self> {
        if log2_values.len() != scales.len() || counts.len() != scales.len() {
            return Err(Error::Misaligned("table rows do not match scales".into()));
        }
        if log2_values.iter().any(|row| row.len() != moments.len()) {
            return Err(Error::Misaligned("table columns do not match moments".into()));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Misaligned("scales must be strictly ascending".into()));
        }
        let zeros = vec![0; scales.len()];
        Ok(Self {
            quantity,
            moments,
            scales,
            log2_values,
            counts,
            zeros,
        })
    }

    pub fn value(&self, scale: u32, moment_index: usize) -> Option<f64> {
        self.log2(scale, moment_index).map(f64::exp2)
    }

    pub fn log2(&self, scale: u32, moment_index: usize) -> Option<f64> {
        let row = self.scales.iter().position(|&j| j == scale)?;
        self.log2_values[row][moment_index]
    }

    /// Nodes contributing to cell `(row, moment_index)`.
    pub fn cell_count(&self, row: usize, moment_index: usize) -> usize {
        if self.moments[moment_index] < 0.0 {
            self.counts[row] - self.zeros[row]
        } else {
            self.counts[row]
        }
    }
}

/// `log2((1/n) Σ 2^{q l_i})` over the finite logs `l_i`, with `n` the normalizing count.
pub(crate) fn log2_mean_power(logs: &[f64], q: f64, n: usize) -> Option<f64> {
    let terms: Vec<f64> = logs.iter().map(|l| q * l).collect();
    log2_mean_exp2(&terms, n)
}

/// `log2((1/n) Σ 2^{t_i})`, shifted by the largest term.
pub(crate) fn log2_mean_exp2(terms: &[f64], n: usize) -> Option<f64> {
    if terms.is_empty() || n == 0 {
        return None;
    }
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - m).exp2()).sum();
    Some(m + sum.log2() - (n as f64).log2())
}

/// Count-normalized structure functions over the interior nodes of every scale.
pub fn structure_function<M: Multiresolution + ?Sized>(
    d: &M,
    moments: &[f64],
) -> Result<StructureFunctionTable> {
    if moments.is_empty() {
        return Err(Error::Config("empty moment grid".into()));
    }
    if let Some(q) = moments.iter().find(|q| !q.is_finite()) {
        return Err(Error::param("q", *q, "moments must be finite"));
    }
    let mut views = d.scale_views();
    views.retain(|v| !v.interior.is_empty());
    if views.is_empty() {
        return Err(Error::InsufficientScales(0));
    }
    views.sort_by_key(|v| v.scale);

    let mut scales = Vec::with_capacity(views.len());
    let mut counts = Vec::with_capacity(views.len());
    let mut zeros = Vec::with_capacity(views.len());
    let mut log2_values = Vec::with_capacity(views.len());
    for view in &views {
        let values = view.interior_values();
        let logs: Vec<f64> = values
            .iter()
            .filter(|v| **v != 0.0)
            .map(|v| v.abs().log2())
            .collect();
        let n = values.len();
        let n_zero = n - logs.len();
        let row: Vec<Option<f64>> = moments
            .par_iter()
            .map(|&q| {
                if q == 0.0 {
                    Some(0.0)
                } else if q > 0.0 {
                    log2_mean_power(&logs, q, n)
                } else {
                    log2_mean_power(&logs, q, logs.len())
                }
            })
            .collect();
        if n_zero > 0 && moments.iter().any(|q| *q < 0.0) {
            log::debug!(
                "scale {}: {} zero nodes excluded from negative moments",
                view.scale,
                n_zero
            );
        }
        scales.push(view.scale);
        counts.push(n);
        zeros.push(n_zero);
        log2_values.push(row);
    }
    Ok(StructureFunctionTable {
        quantity: d.quantity(),
        moments: moments.to_vec(),
        scales,
        log2_values,
        counts,
        zeros,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFunction {
    pub quantity: Quantity,
    pub moments: Vec<f64>,
    /// `None` where a cell inside the range was missing.
    pub zeta: Vec<Option<f64>>,
    pub intercept: Vec<Option<f64>>,
    pub r2: Vec<Option<f64>>,
    pub range: ScaleRange,
    pub weighting: Weighting,
    /// Moments whose fit fell below [`R2_WARNING`].
    pub poor_fit: Vec<f64>,
}

impl ScalingFunction {
    /// Scaling function with given exponents and perfect fits, for injected tests.
    pub fn from_values(quantity: Quantity, moments: Vec<f64>, zeta: Vec<f64>, range: ScaleRange) -> Self {
        let n = moments.len();
        Self {
            quantity,
            moments,
            zeta: zeta.into_iter().map(Some).collect(),
            intercept: vec![Some(0.0); n],
            r2: vec![Some(1.0); n],
            range,
            weighting: Weighting::Uniform,
            poor_fit: Vec::new(),
        }
    }

    pub fn index_of(&self, q: f64) -> Option<usize> {
        self.moments.iter().position(|m| (m - q).abs() <= 1e-12)
    }

    pub fn at(&self, q: f64) -> Option<f64> {
        self.index_of(q).and_then(|i| self.zeta[i])
    }

    /// `(q, ζ(q))` for every moment with a slope.
    pub fn finite_pairs(&self) -> Vec<(f64, f64)> {
        self.moments
            .iter()
            .zip(&self.zeta)
            .filter_map(|(q, z)| z.map(|z| (*q, z)))
            .collect()
    }
}

/// Per-moment slope of `log2 S(j, q)` against `-j` over `range`.
pub fn loglog_regress(
    table: &StructureFunctionTable,
    range: ScaleRange,
    weighting: Weighting,
) -> Result<ScalingFunction> {
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
                    reason: format!("scale {j} missing from the structure-function table"),
                })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|&r| -(table.scales[r] as f64)).collect();

    let fits: Vec<Option<(f64, f64, f64)>> = (0..table.moments.len())
        .into_par_iter()
        .map(|m| {
            let ys: Option<Vec<f64>> = rows.iter().map(|&r| table.log2_values[r][m]).collect();
            let ys = ys?;
            let ws: Vec<f64> = match weighting {
                Weighting::Uniform => vec![1.0; rows.len()],
                Weighting::Count => rows.iter().map(|&r| table.cell_count(r, m) as f64).collect(),
            };
            fit_line(&xs, &ys, &ws).map(|f| (f.slope, f.intercept, f.r2))
        })
        .collect();

    let poor_fit: Vec<f64> = table
        .moments
        .iter()
        .zip(&fits)
        .filter(|(_, f)| matches!(f, Some((_, _, r2)) if *r2 < R2_WARNING))
        .map(|(q, _)| *q)
        .collect();
    if !poor_fit.is_empty() {
        log::debug!("{} moments fit with r² < {R2_WARNING}", poor_fit.len());
    }
    Ok(ScalingFunction {
        quantity: table.quantity,
        moments: table.moments.clone(),
        zeta: fits.iter().map(|f| f.map(|f| f.0)).collect(),
        intercept: fits.iter().map(|f| f.map(|f| f.1)).collect(),
        r2: fits.iter().map(|f| f.map(|f| f.2)).collect(),
        range,
        weighting,
        poor_fit,
    })
}

/// Slope estimate of a uniform exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub value: f64,
    pub r2: f64,
    pub range: ScaleRange,
    /// Scales dropped because every node there is zero.
    pub excluded_scales: Vec<u32>,
}

fn extremal_exponent<M: Multiresolution + ?Sized>(
    d: &M,
    range: ScaleRange,
    pick: impl Fn(&[f64]) -> Option<f64>,
) -> Result<Exponent> {
    range.check_within(d)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for j in range.scales() {
        let view = d.view(j).expect("checked above");
        match pick(view.interior_values()) {
            Some(v) if v > 0.0 => {
                xs.push(-(j as f64));
                ys.push(v.log2());
            }
            _ => {
                log::warn!("scale {j} has no nonzero interior node; excluded");
                excluded.push(j);
            }
        }
    }
    let ws = vec![1.0; xs.len()];
    let fit = fit_line(&xs, &ys, &ws).ok_or(Error::InsufficientScales(xs.len()))?;
    Ok(Exponent {
        value: fit.slope,
        r2: fit.r2,
        range,
        excluded_scales: excluded,
    })
}

/// Uniform Hölder exponent: slope of `log2 sup_k |d_{j,k}|`.
pub fn h_min<M: Multiresolution + ?Sized>(d: &M, range: ScaleRange) -> Result<Exponent> {
    extremal_exponent(d, range, |vals| {
        vals.iter().map(|v| v.abs()).fold(None, |m: Option<f64>, v| {
            Some(m.map_or(v, |m| m.max(v)))
        })
    })
}

/// Slope of `log2 inf_k d_{j,k}` over nonzero nodes.
pub fn h_max<M: Multiresolution + ?Sized>(d: &M, range: ScaleRange) -> Result<Exponent> {
    extremal_exponent(d, range, |vals| {
        let zeros = vals.iter().filter(|v| **v == 0.0).count();
        if zeros > 0 {
            log::debug!("{zeros} zero nodes excluded from the infimum");
        }
        vals.iter()
            .map(|v| v.abs())
            .filter(|v| *v > 0.0)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseExponent {
    pub position: usize,
    /// `None` when a leader in the tower is zero.
    pub exponent: Option<f64>,
    pub r2: Option<f64>,
}

/// Regression of `log2 d_{λ_j(x)}` against `-j` along the tower of nodes containing
/// each sample position. Unstable by nature; meant for synthetic validation.
pub fn pointwise_exponent_map(
    d: &LeaderPyramid,
    positions: &[usize],
    range: ScaleRange,
) -> Result<Vec<PointwiseExponent>> {
    range.check_within(d)?;
    let n = Multiresolution::n_samples(d);
    if let Some(&x) = positions.iter().find(|&&x| x >= n) {
        return Err(Error::param("position", x as f64, "position outside the signal"));
    }
    let xs: Vec<f64> = range.scales().map(|j| -(j as f64)).collect();
    let ws = vec![1.0; xs.len()];
    Ok(positions
        .par_iter()
        .map(|&x| {
            let ys: Option<Vec<f64>> = range
                .scales()
                .map(|j| {
                    let v = d.level(j).expect("checked").values[d.node_containing(j, x)];
                    (v > 0.0).then(|| v.log2())
                })
                .collect();
            let fit = ys.and_then(|ys| fit_line(&xs, &ys, &ws));
            PointwiseExponent {
                position: x,
                exponent: fit.map(|f| f.slope),
                r2: fit.map(|f| f.r2),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpMembership {
    In,
    Out,
    Inconclusive,
}

pub const DEFAULT_LP_MARGIN: f64 = 0.05;

/// Sign test on `η(p)` with a dead zone of `margin`.
pub fn lp_membership(eta: &ScalingFunction, p: f64, margin: f64) -> Result<LpMembership> {
    let value = eta
        .at(p)
        .ok_or_else(|| Error::param("p", p, "no scaling exponent at this moment"))?;
    Ok(if value > margin {
        LpMembership::In
    } else if value < -margin {
        LpMembership::Out
    } else {
        LpMembership::Inconclusive
    })
}

/// Smallest integration order making a p-leader analysis valid, `-η(p)/p` (0 if
/// already valid).
pub fn min_integration_order(eta_p: f64, p: f64) -> f64 {
    (-eta_p / p).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaders::{LeaderKind, LeaderLevel};
    use crate::pyramid::{Boundary, CoefficientPyramid, Level};

    fn injected_leaders(f: impl Fn(u32, usize) -> f64, finest: u32) -> LeaderPyramid {
        let levels = (1..=finest)
            .rev()
            .map(|j| {
                let n = 1usize << j;
                LeaderLevel {
                    scale: j,
                    values: (0..n).map(|k| f(j, k)).collect(),
                    interior: 0..n,
                    depth: 0,
                }
            })
            .collect();
        LeaderPyramid::from_levels(levels, LeaderKind::Holder, Boundary::Periodic).unwrap()
    }

    #[test]
    fn scale_range_rules() {
        assert!(ScaleRange::new(3, 4).is_err());
        let r = ScaleRange::new(3, 5).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.contains(4) && !r.contains(6));
    }

    #[test]
    fn default_range_trims_and_respects_depth() {
        let l = injected_leaders(|_, _| 1.0, 12);
        assert_eq!(ScaleRange::default_for(&l, 0).unwrap(), ScaleRange { j1: 3, j2: 10 });
        assert_eq!(ScaleRange::default_for(&l, 3).unwrap(), ScaleRange { j1: 3, j2: 9 });
        let small = injected_leaders(|_, _| 1.0, 5);
        assert!(ScaleRange::default_for(&small, 3).is_err());
    }

    #[test]
    fn grids() {
        let q = default_q_grid();
        assert_eq!(q.len(), 65);
        assert_eq!(q[32], 0.0);
        let p = default_p_grid();
        assert_eq!((p[0], p[p.len() - 1], p.len()), (0.25, 8.0, 32));
        assert!(moment_grid(1.0, 0.0, 0.1).is_err());
        assert!(moment_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn constant_quantities_give_unit_structure_functions() {
        let l = injected_leaders(|_, _| 1.0, 8);
        let t = structure_function(&l, &default_q_grid()).unwrap();
        for row in &t.log2_values {
            assert!(row.iter().all(|v| *v == Some(0.0)));
        }
    }

    #[test]
    fn zeroth_moment_is_one() {
        let l = injected_leaders(|j, k| if k % 3 == 0 { 0.0 } else { (j + k as u32) as f64 }, 8);
        let t = structure_function(&l, &[-1.0, 0.0, 2.0]).unwrap();
        for (row, j) in t.log2_values.iter().zip(&t.scales) {
            assert_eq!(row[1], Some(0.0), "scale {j}");
        }
    }

    #[test]
    fn negative_moments_skip_zeros() {
        let l = injected_leaders(|_, k| if k == 0 { 0.0 } else { 2.0 }, 4);
        let t = structure_function(&l, &[-1.0, 1.0]).unwrap();
        let row = t.scales.iter().position(|&j| j == 2).unwrap();
        assert_eq!(t.log2_values[row][0], Some(-1.0));
        assert_eq!(t.zeros[row], 1);
        assert_eq!(t.cell_count(row, 0), 3);
        // Positive moments keep the zero in the normalization: (3 * 2) / 4.
        assert!((t.log2_values[row][1].unwrap() - 1.5f64.log2()).abs() < 1e-15);

        let all_zero = injected_leaders(|j, _| if j == 2 { 0.0 } else { 1.0 }, 4);
        let t = structure_function(&all_zero, &[-1.0, 1.0]).unwrap();
        let row = t.scales.iter().position(|&j| j == 2).unwrap();
        assert_eq!(t.log2_values[row], vec![None, None]);
    }

    #[test]
    fn extreme_moments_stay_finite() {
        let l = injected_leaders(|j, k| 2f64.powf(-40.0 * j as f64) * (1.0 + k as f64), 8);
        let t = structure_function(&l, &[-8.0, 8.0]).unwrap();
        assert!(t.log2_values.iter().flatten().all(|v| v.unwrap().is_finite()));
    }

    #[test]
    fn exact_power_law_recovered() {
        let alpha = 0.37;
        let moments = default_q_grid();
        let scales: Vec<u32> = (2..=12).collect();
        let log2_values = scales
            .iter()
            .map(|&j| moments.iter().map(|q| Some(-(j as f64) * alpha * q)).collect())
            .collect();
        let t = StructureFunctionTable::from_log2_values(
            Quantity::Leaders(LeaderKind::Holder),
            moments.clone(),
            scales.clone(),
            log2_values,
            scales.iter().map(|j| 1 << j).collect(),
        )
        .unwrap();
        for weighting in [Weighting::Uniform, Weighting::Count] {
            let z = loglog_regress(&t, ScaleRange::new(4, 10).unwrap(), weighting).unwrap();
            for (q, (zeta, r2)) in moments.iter().zip(z.zeta.iter().zip(&z.r2)) {
                assert!((zeta.unwrap() - alpha * q).abs() < 1e-12);
                assert!((r2.unwrap() - 1.0).abs() < 1e-12);
            }
            assert!(z.poor_fit.is_empty());
        }
    }

    #[test]
    fn missing_cell_only_affects_its_moment() {
        let moments = vec![-1.0, 1.0, 2.0];
        let scales: Vec<u32> = (2..=8).collect();
        let log2_values = scales
            .iter()
            .map(|&j| {
                moments
                    .iter()
                    .enumerate()
                    .map(|(m, q)| if j == 5 && m == 1 { None } else { Some(-0.5 * q * j as f64) })
                    .collect()
            })
            .collect();
        let t = StructureFunctionTable::from_log2_values(
            Quantity::Coefficients,
            moments,
            scales,
            log2_values,
            vec![1; 7],
        )
        .unwrap();
        let z = loglog_regress(&t, ScaleRange::new(3, 7).unwrap(), Weighting::Uniform).unwrap();
        assert!(z.zeta[1].is_none());
        assert!((z.zeta[0].unwrap() + 0.5).abs() < 1e-12);
        assert!((z.zeta[2].unwrap() - 1.0).abs() < 1e-12);
        // Outside the gap the moment is fine.
        let z = loglog_regress(&t, ScaleRange::new(6, 8).unwrap(), Weighting::Uniform).unwrap();
        assert!(z.zeta[1].is_some());
        assert!(loglog_regress(&t, ScaleRange::new(6, 9).unwrap(), Weighting::Uniform).is_err());
    }

    #[test]
    fn h_max_h_min_on_uniform_power_law() {
        let l = injected_leaders(|j, _| 2f64.powf(-0.3 * j as f64), 10);
        let r = ScaleRange::new(3, 8).unwrap();
        assert!((h_max(&l, r).unwrap().value - 0.3).abs() < 1e-12);
        assert!((h_min(&l, r).unwrap().value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn h_max_ignores_zero_nodes() {
        let base = |j: u32, k: usize| 2f64.powf(-0.3 * j as f64) * (1.0 + (k % 5) as f64);
        let plain = injected_leaders(base, 10);
        let holed = injected_leaders(|j, k| if k == 3 { 0.0 } else { base(j, k) }, 10);
        // Node 3 carries the factor 4, never the minimum, so removing it changes nothing.
        let r = ScaleRange::new(3, 8).unwrap();
        assert_eq!(h_max(&plain, r).unwrap().value, h_max(&holed, r).unwrap().value);
    }

    #[test]
    fn h_min_excludes_all_zero_scale() {
        let l = injected_leaders(|j, _| if j == 5 { 0.0 } else { 2f64.powf(-0.4 * j as f64) }, 10);
        let e = h_min(&l, ScaleRange::new(3, 8).unwrap()).unwrap();
        assert_eq!(e.excluded_scales, vec![5]);
        assert!((e.value - 0.4).abs() < 1e-12);
    }

    #[test]
    fn pointwise_map_on_injected_tower() {
        let l = injected_leaders(|j, k| if k == 0 { 0.0 } else { 2f64.powf(-0.8 * j as f64) }, 8);
        let out = pointwise_exponent_map(&l, &[0, 300], ScaleRange::new(2, 7).unwrap()).unwrap();
        assert!(out[0].exponent.is_none());
        assert!((out[1].exponent.unwrap() - 0.8).abs() < 1e-12);
        assert!(pointwise_exponent_map(&l, &[512], ScaleRange::new(2, 7).unwrap()).is_err());
    }

    #[test]
    fn lp_membership_rules() {
        let r = ScaleRange::new(1, 3).unwrap();
        let eta = ScalingFunction::from_values(Quantity::Coefficients, vec![1.0, 1.4, 2.0], vec![-0.4, 0.01, 1.0], r);
        assert_eq!(lp_membership(&eta, 2.0, DEFAULT_LP_MARGIN).unwrap(), LpMembership::In);
        assert_eq!(lp_membership(&eta, 1.0, DEFAULT_LP_MARGIN).unwrap(), LpMembership::Out);
        assert_eq!(lp_membership(&eta, 1.4, DEFAULT_LP_MARGIN).unwrap(), LpMembership::Inconclusive);
        assert!(lp_membership(&eta, 3.0, DEFAULT_LP_MARGIN).is_err());
        assert!((min_integration_order(-0.4, 1.0) - 0.4).abs() < 1e-15);
        assert_eq!(min_integration_order(0.3, 1.0), 0.0);
    }

    #[test]
    fn coefficient_pyramid_is_a_multiresolution_quantity() {
        let levels = (1..=6u32)
            .rev()
            .map(|j| Level {
                scale: j,
                coeffs: vec![2f64.powf(-0.5 * j as f64); 1 << j],
                interior: 1 << j,
            })
            .collect();
        let pyr = CoefficientPyramid::from_levels(levels, vec![0.0; 2], 3, Boundary::Periodic).unwrap();
        let e = h_min(&pyr, ScaleRange::new(2, 6).unwrap()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
        assert_eq!(structure_function(&pyr, &[1.0]).unwrap().quantity, Quantity::Coefficients);
    }
}

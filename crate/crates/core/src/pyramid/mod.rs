//! Dyadic coefficient pyramid built from a fast periodic (or symmetric) Daubechies
//! transform.
//!
//! Scales follow the "finer is larger" convention: a signal of `N = 2^J` samples has
//! its finest detail level at `j = J - 1`, and level `j` holds `2^j` coefficients.
//! Coefficients are L1-normalized, `c_{j,k} = 2^{j/2} d_{j,k}` where `d` is the
//! orthonormal detail output.

pub mod filters;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leaders::Quantity;

/// Uniformly sampled real-valued series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<f64>,
    dt: Option<f64>,
    label: String,
}

impl Signal {
    pub fn new(samples: Vec<f64>, dt: Option<f64>, label: impl Into<String>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::SignalTooShort(samples.len()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        if let Some(dt) = dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::param("dt", dt, "sampling period must be positive"));
            }
        }
        Ok(Self {
            samples,
            dt,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> Option<f64> {
        self.dt
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Keeps the leading `2^floor(log2 len)` samples.
    pub fn truncated_to_pow2(&self) -> Signal {
        let n = largest_pow2_at_most(self.len());
        Signal {
            samples: self.samples[..n].to_vec(),
            dt: self.dt,
            label: self.label.clone(),
        }
    }
}

pub(crate) fn largest_pow2_at_most(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

/// Signal extension used by the filter bank at the right edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Symmetric,
}

impl Boundary {
    #[inline]
    fn index(self, i: usize, len: usize) -> usize {
        match self {
            Boundary::Periodic => i % len,
            Boundary::Symmetric => {
                // Half-sample symmetric reflection with period 2*len.
                let m = i % (2 * len);
                if m < len {
                    m
                } else {
                    2 * len - 1 - m
                }
            }
        }
    }
}

/// Detail coefficients at a single scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub scale: u32,
    pub coeffs: Vec<f64>,
    /// Coefficients `0..interior` never touch the boundary extension.
    pub interior: usize,
}

impl Level {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn interior_coeffs(&self) -> &[f64] {
        &self.coeffs[..self.interior]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPyramid {
    /// Finest scale first.
    levels: Vec<Level>,
    approx: Vec<f64>,
    wavelet_order: usize,
    boundary: Boundary,
    n_samples: usize,
    /// Accumulated fractional integration order applied by coefficient rescaling.
    integration_order: f64,
}

impl CoefficientPyramid {
    /// Assembles a pyramid from explicit levels (finest first, consecutive scales).
    ///
    /// Mostly useful for injecting synthetic coefficients in tests and tools.
    pub fn from_levels(
        levels: Vec<Level>,
        approx: Vec<f64>,
        wavelet_order: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InsufficientScales(0));
        }
        for pair in levels.windows(2) {
            if pair[0].scale != pair[1].scale + 1 || pair[0].len() != 2 * pair[1].len() {
                return Err(Error::Misaligned(format!(
                    "levels {} and {} are not consecutive dyadic scales",
                    pair[0].scale, pair[1].scale
                )));
            }
        }
        for level in &levels {
            if level.len() != 1usize << level.scale {
                return Err(Error::Misaligned(format!(
                    "level {} holds {} coefficients, expected {}",
                    level.scale,
                    level.len(),
                    1usize << level.scale
                )));
            }
            if level.interior > level.len() {
                return Err(Error::Misaligned(format!(
                    "level {} interior {} exceeds length",
                    level.scale, level.interior
                )));
            }
            if let Some(i) = level.coeffs.iter().position(|c| !c.is_finite()) {
                return Err(Error::NonFiniteSample(i));
            }
        }
        let n_samples = 2 * levels[0].len();
        Ok(Self {
            levels,
            approx,
            wavelet_order,
            boundary,
            n_samples,
            integration_order: 0.0,
        })
    }

    /// Finest scale first.
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, scale: u32) -> Option<&Level> {
        let finest = self.finest_scale();
        if scale > finest {
            return None;
        }
        self.levels.get((finest - scale) as usize)
    }

    pub fn approximation(&self) -> &[f64] {
        &self.approx
    }

    pub fn finest_scale(&self) -> u32 {
        self.levels[0].scale
    }

    pub fn coarsest_scale(&self) -> u32 {
        self.levels[self.levels.len() - 1].scale
    }

    pub fn wavelet_order(&self) -> usize {
        self.wavelet_order
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn integration_order(&self) -> f64 {
        self.integration_order
    }

    /// Orthonormal (L2) detail coefficients, i.e. level `j` divided by `2^{j/2}`.
    pub fn orthonormal_level(&self, scale: u32) -> Option<Vec<f64>> {
        let level = self.level(scale)?;
        let factor = 2f64.powf(-(scale as f64) / 2.0);
        Some(level.coeffs.iter().map(|c| c * factor).collect())
    }
}

/// Read-only view of one scale of a multiresolution quantity.
#[derive(Debug, Clone)]
pub struct ScaleView<'a> {
    pub scale: u32,
    pub values: &'a [f64],
    /// Nodes free of boundary effects.
    pub interior: Range<usize>,
    /// Number of finer scales aggregated beneath each node (0 for raw coefficients).
    pub depth: u32,
}

impl ScaleView<'_> {
    pub fn interior_values(&self) -> &[f64] {
        &self.values[self.interior.clone()]
    }
}

/// Any quantity indexed by dyadic nodes: wavelet coefficients, leaders, p-leaders.
pub trait Multiresolution {
    /// Finest scale first.
    fn scale_views(&self) -> Vec<ScaleView<'_>>;

    fn n_samples(&self) -> usize;

    fn quantity(&self) -> Quantity;

    fn view(&self, scale: u32) -> Option<ScaleView<'_>> {
        self.scale_views().into_iter().find(|v| v.scale == scale)
    }
}

impl Multiresolution for CoefficientPyramid {
    fn scale_views(&self) -> Vec<ScaleView<'_>> {
        self.levels
            .iter()
            .map(|l| ScaleView {
                scale: l.scale,
                values: &l.coeffs,
                interior: 0..l.interior,
                depth: 0,
            })
            .collect()
    }

    fn n_samples(&self) -> usize {
        self.n_samples
    }

    fn quantity(&self) -> Quantity {
        Quantity::Coefficients
    }
}

/// Number of decomposition levels used when none is requested: stop once the
/// coarsest level would hold fewer than `4 * order` coefficients.
pub fn default_levels(n_samples: usize, wavelet_order: usize) -> usize {
    let total = largest_pow2_at_most(n_samples).trailing_zeros() as usize;
    let min_len = 4 * wavelet_order;
    let coarsest = (usize::BITS - (min_len - 1).leading_zeros()) as usize; // ceil(log2)
    total.saturating_sub(coarsest).max(2).min(total)
}

/// Forward discrete wavelet transform with L1-normalized detail coefficients.
///
/// Signals whose length is not a power of two are truncated to the largest power of
/// two (a warning is logged).
pub fn dwt_forward(
    signal: &Signal,
    wavelet_order: usize,
    max_levels: usize,
) -> Result<CoefficientPyramid> {
    dwt_forward_with(signal, wavelet_order, max_levels, Boundary::Periodic)
}

pub fn dwt_forward_with(
    signal: &Signal,
    wavelet_order: usize,
    max_levels: usize,
    boundary: Boundary,
) -> Result<CoefficientPyramid> {
    let h = filters::scaling_filter(wavelet_order)?;
    let g = filters::wavelet_filter(wavelet_order)?;
    let len = signal.len();
    let feasible = largest_pow2_at_most(len).trailing_zeros() as usize;
    if max_levels < 2 || max_levels > feasible {
        return Err(Error::TooManyLevels {
            len,
            requested: max_levels,
            max_levels: feasible,
        });
    }
    let n = largest_pow2_at_most(len);
    if n != len {
        log::warn!(
            "signal `{}` has {} samples; truncated to {} for the dyadic transform",
            signal.label(),
            len,
            n
        );
    }

    let taps = h.len();
    let mut approx: Vec<f64> = signal.samples()[..n].to_vec();
    let mut clean = n;
    let mut scale = feasible as u32;
    let mut levels = Vec::with_capacity(max_levels);
    for _ in 0..max_levels {
        scale -= 1;
        let m = approx.len();
        let half = m / 2;
        let mut next = vec![0.0; half];
        let mut detail = vec![0.0; half];
        for k in 0..half {
            let (mut a, mut d) = (0.0, 0.0);
            for t in 0..taps {
                let x = approx[boundary.index(2 * k + t, m)];
                a += h[t] * x;
                d += g[t] * x;
            }
            next[k] = a;
            detail[k] = d;
        }
        clean = if clean >= taps {
            ((clean - taps) / 2 + 1).min(half)
        } else {
            0
        };
        let l1 = 2f64.powf(scale as f64 / 2.0);
        detail.iter_mut().for_each(|c| *c *= l1);
        levels.push(Level {
            scale,
            coeffs: detail,
            interior: clean,
        });
        approx = next;
    }

    Ok(CoefficientPyramid {
        levels,
        approx,
        wavelet_order,
        boundary,
        n_samples: n,
        integration_order: 0.0,
    })
}

/// Fractional integration of order `s` (differentiation for `s < 0`): scale-`j`
/// coefficients are multiplied by `2^{-s j}`.
pub fn fractional_integrate(pyr: &CoefficientPyramid, s: f64) -> Result<CoefficientPyramid> {
    if !s.is_finite() {
        return Err(Error::param("s", s, "integration order must be finite"));
    }
    let levels = pyr
        .levels
        .iter()
        .map(|level| {
            let factor = 2f64.powf(-s * level.scale as f64);
            Level {
                scale: level.scale,
                coeffs: level.coeffs.iter().map(|c| c * factor).collect(),
                interior: level.interior,
            }
        })
        .collect();
    Ok(CoefficientPyramid {
        levels,
        approx: pyr.approx.clone(),
        wavelet_order: pyr.wavelet_order,
        boundary: pyr.boundary,
        n_samples: pyr.n_samples,
        integration_order: pyr.integration_order + s,
    })
}

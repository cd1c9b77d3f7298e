//! Wavelet leaders and p-leaders.
//!
//! Both are computed with one bottom-up pass over the coefficient tree, followed by a
//! combination of the three neighbouring subtrees that make up `3λ`.

use std::ops::{Range, RangeInclusive};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pyramid::{Boundary, CoefficientPyramid, Multiresolution, ScaleView};

/// Levels below this size are combined sequentially.
const PAR_MIN_LEN: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderKind {
    /// Classical leaders, `p = ∞`.
    Holder,
    P(f64),
}

impl LeaderKind {
    pub fn from_exponent(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(LeaderKind::Holder)
        } else if p.is_finite() && p > 0.0 {
            Ok(LeaderKind::P(p))
        } else {
            Err(Error::param("p", p, "leader exponent must be positive"))
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            LeaderKind::Holder => f64::INFINITY,
            LeaderKind::P(p) => p,
        }
    }
}

/// What a multiresolution quantity holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Coefficients,
    Leaders(LeaderKind),
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Coefficients => write!(f, "wavelet"),
            Quantity::Leaders(LeaderKind::Holder) => write!(f, "leader"),
            Quantity::Leaders(kind) => write!(f, "p-leader({kind})"),
        }
    }
}

impl std::fmt::Display for LeaderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LeaderKind::Holder => write!(f, "p=inf"),
            LeaderKind::P(p) => write!(f, "p={p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderLevel {
    pub scale: u32,
    pub values: Vec<f64>,
    /// Nodes whose whole neighbourhood cone avoids boundary-affected coefficients.
    pub interior: Range<usize>,
    /// Finer levels aggregated beneath each node.
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderPyramid {
    /// Finest scale first.
    levels: Vec<LeaderLevel>,
    kind: LeaderKind,
    boundary: Boundary,
    n_samples: usize,
    integration_order: f64,
}

impl LeaderPyramid {
    /// Builds a pyramid from explicit values (finest first, consecutive scales).
    pub fn from_levels(levels: Vec<LeaderLevel>, kind: LeaderKind, boundary: Boundary) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InsufficientScales(0));
        }
        let finest = levels[0].scale;
        for (i, level) in levels.iter().enumerate() {
            if level.scale + i as u32 != finest {
                return Err(Error::Misaligned(format!(
                    "leader level {} out of sequence",
                    level.scale
                )));
            }
            if level.values.len() != 1usize << level.scale {
                return Err(Error::Misaligned(format!(
                    "leader level {} holds {} values, expected {}",
                    level.scale,
                    level.values.len(),
                    1usize << level.scale
                )));
            }
            if level.interior.start > level.interior.end || level.interior.end > level.values.len() {
                return Err(Error::Misaligned(format!(
                    "leader level {} has invalid interior {:?}",
                    level.scale, level.interior
                )));
            }
            if let Some(i) = level.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::NonFiniteSample(i));
            }
        }
        let levels = levels
            .into_iter()
            .map(|l| LeaderLevel {
                depth: finest - l.scale,
                ..l
            })
            .collect();
        Ok(Self {
            levels,
            kind,
            boundary,
            n_samples: 2usize << finest,
            integration_order: 0.0,
        })
    }

    pub fn levels(&self) -> &[LeaderLevel] {
        &self.levels
    }

    pub fn level(&self, scale: u32) -> Option<&LeaderLevel> {
        let finest = self.finest_scale();
        if scale > finest {
            return None;
        }
        self.levels.get((finest - scale) as usize)
    }

    pub fn kind(&self) -> LeaderKind {
        self.kind
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn finest_scale(&self) -> u32 {
        self.levels[0].scale
    }

    pub fn coarsest_scale(&self) -> u32 {
        self.levels[self.levels.len() - 1].scale
    }

    pub fn integration_order(&self) -> f64 {
        self.integration_order
    }

    /// Coefficient scales summed into the leaders at `scale`.
    pub fn source_levels(&self, scale: u32) -> RangeInclusive<u32> {
        scale..=self.finest_scale()
    }

    /// Scales with at least `min_depth` finer levels beneath them, finest first.
    pub fn scales_with_depth(&self, min_depth: u32) -> Vec<u32> {
        self.levels
            .iter()
            .filter(|l| l.depth >= min_depth)
            .map(|l| l.scale)
            .collect()
    }

    /// Index of the node at `scale` whose dyadic interval contains sample `position`.
    pub fn node_containing(&self, scale: u32, position: usize) -> usize {
        let shift = self.n_samples.trailing_zeros() - scale;
        position >> shift
    }
}

impl Multiresolution for LeaderPyramid {
    fn scale_views(&self) -> Vec<ScaleView<'_>> {
        self.levels
            .iter()
            .map(|l| ScaleView {
                scale: l.scale,
                values: &l.values,
                interior: l.interior.clone(),
                depth: l.depth,
            })
            .collect()
    }

    fn n_samples(&self) -> usize {
        self.n_samples
    }

    fn quantity(&self) -> Quantity {
        Quantity::Leaders(self.kind)
    }
}

/// Classical wavelet leaders: `sup |c_λ'|` over `λ' ⊆ 3λ`.
pub fn wavelet_leaders(pyr: &CoefficientPyramid) -> LeaderPyramid {
    build(pyr, LeaderKind::Holder)
}

/// p-leaders: `(Σ_{λ' ⊆ 3λ} |c_λ'|^p 2^{j - j'})^{1/p}`.
pub fn p_leaders(pyr: &CoefficientPyramid, p: f64) -> Result<LeaderPyramid> {
    match LeaderKind::from_exponent(p)? {
        LeaderKind::Holder => Ok(build(pyr, LeaderKind::Holder)),
        kind => Ok(build(pyr, kind)),
    }
}

pub fn leaders(pyr: &CoefficientPyramid, kind: LeaderKind) -> Result<LeaderPyramid> {
    match kind {
        LeaderKind::Holder => Ok(wavelet_leaders(pyr)),
        LeaderKind::P(p) => p_leaders(pyr, p),
    }
}

fn build(pyr: &CoefficientPyramid, kind: LeaderKind) -> LeaderPyramid {
    let levels = pyr.levels();
    // Powers are taken on coefficients divided by the global maximum so that large
    // exponents neither overflow nor flush every term to zero.
    let norm = levels
        .iter()
        .flat_map(|l| l.coeffs.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let norm = if norm > 0.0 { norm } else { 1.0 };

    let own = |c: f64| -> f64 {
        match kind {
            LeaderKind::Holder => c.abs(),
            LeaderKind::P(p) => (c.abs() / norm).powf(p),
        }
    };

    // Subtree aggregates, finest first: sup or weighted p-th power sums.
    let mut subtree: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
    for (i, level) in levels.iter().enumerate() {
        let mut local: Vec<f64> = level.coeffs.iter().map(|&c| own(c)).collect();
        if i > 0 {
            let finer = &subtree[i - 1];
            let merge = |(k, v): (usize, &mut f64)| {
                let (a, b) = (finer[2 * k], finer[2 * k + 1]);
                *v = match kind {
                    LeaderKind::Holder => v.max(a).max(b),
                    LeaderKind::P(_) => *v + 0.5 * (a + b),
                };
            };
            if local.len() >= PAR_MIN_LEN {
                local.par_iter_mut().enumerate().for_each(merge);
            } else {
                local.iter_mut().enumerate().for_each(merge);
            }
        }
        subtree.push(local);
    }

    let boundary = pyr.boundary();
    let interiors: Vec<usize> = levels.iter().map(|l| l.interior).collect();
    let out = levels
        .par_iter()
        .enumerate()
        .map(|(i, level)| {
            let local = &subtree[i];
            let n = local.len();
            let combine = |k: usize| -> f64 {
                let mut acc = local[k];
                let neighbours = [k.checked_sub(1), Some(k + 1)];
                for nb in neighbours {
                    let idx = match (nb, boundary) {
                        (Some(m), _) if m < n => Some(m),
                        (_, Boundary::Periodic) if n > 1 => Some(if nb.is_none() { n - 1 } else { 0 }),
                        _ => None,
                    };
                    if let Some(m) = idx {
                        if m == k {
                            continue;
                        }
                        acc = match kind {
                            LeaderKind::Holder => acc.max(local[m]),
                            LeaderKind::P(_) => acc + local[m],
                        };
                    }
                }
                match kind {
                    LeaderKind::Holder => acc,
                    LeaderKind::P(p) => norm * acc.powf(1.0 / p),
                }
            };
            let values: Vec<f64> = if n >= PAR_MIN_LEN {
                (0..n).into_par_iter().map(combine).collect()
            } else {
                (0..n).map(combine).collect()
            };
            LeaderLevel {
                scale: level.scale,
                values,
                interior: leader_interior(&interiors[..=i], n, boundary),
                depth: i as u32,
            }
        })
        .collect();

    LeaderPyramid {
        levels: out,
        kind,
        boundary,
        n_samples: pyr.n_samples(),
        integration_order: pyr.integration_order(),
    }
}

/// Nodes at the level whose coefficient interiors are `interiors[i]` (index 0 finest,
/// last entry the level itself) whose `3λ` cone stays clear of the boundary.
fn leader_interior(interiors: &[usize], n: usize, boundary: Boundary) -> Range<usize> {
    let start = match boundary {
        Boundary::Periodic => 1,
        Boundary::Symmetric => 0,
    };
    // The right neighbour k + 1 spans [(k+1) 2^d, (k+2) 2^d) at d levels below.
    let mut end = n.saturating_sub(1);
    for (d, &clean) in interiors.iter().rev().enumerate() {
        end = end.min((clean >> d).saturating_sub(1));
    }
    start..end.max(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pyramid::Level;

    fn pyramid_from(levels: Vec<Vec<f64>>) -> CoefficientPyramid {
        // `levels` given finest first.
        let levels = levels
            .into_iter()
            .map(|coeffs| {
                let scale = coeffs.len().trailing_zeros();
                let interior = coeffs.len();
                Level {
                    scale,
                    coeffs,
                    interior,
                }
            })
            .collect();
        CoefficientPyramid::from_levels(levels, vec![0.0], 3, Boundary::Periodic).unwrap()
    }

    fn toy(finest: u32, f: impl Fn(u32, usize) -> f64) -> CoefficientPyramid {
        pyramid_from(
            (0..=finest - 1)
                .rev()
                .map(|j| (0..1usize << (j + 1)).map(|k| f(j + 1, k)).collect())
                .collect(),
        )
    }

    /// Direct evaluation over the dyadic tree, independent of the bottom-up pass.
    fn brute_force(pyr: &CoefficientPyramid, p: f64, scale: u32, k: usize) -> f64 {
        let n = 1usize << scale;
        let finest = pyr.finest_scale();
        let mut sup: f64 = 0.0;
        let mut sum = 0.0;
        for offset in [-1i64, 0, 1] {
            let m = (k as i64 + offset).rem_euclid(n as i64) as usize;
            if offset != 0 && m == k {
                continue;
            }
            for jp in scale..=finest {
                let d = jp - scale;
                let level = pyr.level(jp).unwrap();
                for kp in (m << d)..((m + 1) << d) {
                    let c = level.coeffs[kp].abs();
                    sup = sup.max(c);
                    sum += c.powf(p) * 2f64.powi(-(d as i32));
                }
            }
        }
        if p.is_infinite() {
            sup
        } else {
            sum.powf(1.0 / p)
        }
    }

    #[test]
    fn constant_coefficients() {
        let pyr = toy(6, |_, _| 0.7);
        let l = wavelet_leaders(&pyr);
        for level in l.levels() {
            assert!(level.values.iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn single_spike_matches_exhaustive_sup() {
        // 4-level toy pyramid (scales 1..=4), one unit coefficient at the finest scale.
        for spike in 0..16 {
            let pyr = toy(4, |j, k| if j == 4 && k == spike { 1.0 } else { 0.0 });
            let l = wavelet_leaders(&pyr);
            for level in l.levels() {
                for (k, &v) in level.values.iter().enumerate() {
                    let expected = brute_force(&pyr, f64::INFINITY, level.scale, k);
                    assert!(expected == 0.0 || expected == 1.0);
                    assert_eq!(v, expected, "spike {spike} scale {} node {k}", level.scale);
                }
            }
        }
    }

    #[test]
    fn p_leaders_match_defining_sum() {
        let pyr = toy(6, |j, k| (j as f64 * 1.3 + k as f64 * 0.77).sin() * 3.0);
        for p in [0.5, 1.0, 2.0, 3.7] {
            let l = p_leaders(&pyr, p).unwrap();
            for level in l.levels() {
                for (k, &v) in level.values.iter().enumerate() {
                    let expected = brute_force(&pyr, p, level.scale, k);
                    assert!((v - expected).abs() <= 1e-12 * expected, "p {p}: {v} vs {expected}");
                }
            }
        }
    }

    #[test]
    fn lone_coefficient_gives_itself() {
        let pyr = toy(5, |j, k| if j == 3 && k == 4 { -2.5 } else { 0.0 });
        for p in [0.3, 1.0, 2.0, 10.0] {
            let l = p_leaders(&pyr, p).unwrap();
            let v = l.level(3).unwrap().values[4];
            assert!((v - 2.5).abs() < 1e-14, "p {p}: {v}");
        }
    }

    #[test]
    fn two_children_p2() {
        // Own coefficient 0, the two children inside 3λ equal to 1.
        let pyr = toy(5, |j, k| if j == 4 && (k == 10 || k == 11) { 1.0 } else { 0.0 });
        let l = p_leaders(&pyr, 2.0).unwrap();
        let v = l.level(3).unwrap().values[5];
        assert!((v - 1.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn large_p_approaches_sup() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let coeffs: Vec<Vec<f64>> = (1..=6u32)
            .rev()
            .map(|j| (0..1usize << j).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let pyr = pyramid_from(coeffs);
        let sup = wavelet_leaders(&pyr);
        let p64 = p_leaders(&pyr, 64.0).unwrap();
        for (a, b) in sup.levels().iter().zip(p64.levels()) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((y - x).abs() <= 0.05 * x, "{y} vs sup {x}");
            }
        }
    }

    #[test]
    fn nonpositive_p_rejected() {
        let pyr = toy(4, |_, _| 1.0);
        assert!(p_leaders(&pyr, 0.0).is_err());
        assert!(p_leaders(&pyr, -1.0).is_err());
        assert!(p_leaders(&pyr, f64::NAN).is_err());
        assert_eq!(p_leaders(&pyr, f64::INFINITY).unwrap().kind(), LeaderKind::Holder);
    }

    #[test]
    fn interior_excludes_wrapped_and_contaminated_nodes() {
        // Finest level 16 coefficients with the last 2 contaminated, coarser level 8 with 1.
        let levels = vec![
            Level { scale: 4, coeffs: vec![1.0; 16], interior: 14 },
            Level { scale: 3, coeffs: vec![1.0; 8], interior: 7 },
        ];
        let pyr = CoefficientPyramid::from_levels(levels, vec![0.0; 8], 2, Boundary::Periodic).unwrap();
        let l = wavelet_leaders(&pyr);
        assert_eq!(l.level(4).unwrap().interior, 1..13);
        // Node k at scale 3 needs (k + 2) * 2 <= 14 and k + 1 < 7.
        assert_eq!(l.level(3).unwrap().interior, 1..6);
        assert_eq!(l.level(3).unwrap().depth, 1);
        assert_eq!(l.source_levels(3), 3..=4);
    }

    #[test]
    fn symmetric_mode_drops_missing_neighbours() {
        let levels = vec![
            Level { scale: 2, coeffs: vec![0.0, 0.0, 0.0, 5.0], interior: 4 },
            Level { scale: 1, coeffs: vec![0.0, 0.0], interior: 2 },
        ];
        let sym = CoefficientPyramid::from_levels(levels.clone(), vec![0.0; 2], 2, Boundary::Symmetric).unwrap();
        let per = CoefficientPyramid::from_levels(levels, vec![0.0; 2], 2, Boundary::Periodic).unwrap();
        assert_eq!(wavelet_leaders(&sym).level(2).unwrap().values, vec![0.0, 0.0, 5.0, 5.0]);
        assert_eq!(wavelet_leaders(&per).level(2).unwrap().values, vec![5.0, 0.0, 5.0, 5.0]);
    }

    #[test]
    fn node_lookup() {
        let pyr = toy(5, |_, _| 1.0);
        let l = wavelet_leaders(&pyr);
        assert_eq!(l.node_containing(5, 63), 31);
        assert_eq!(l.node_containing(3, 33), 4);
    }
}

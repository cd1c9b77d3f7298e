use serde::{Deserialize, Serialize};

use super::{ScalingFunction, Spectrum};
use crate::leaders::LeaderKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyTolerances {
    /// Allowed `|ζ(q)/q - H0|`.
    pub monofractal: f64,
    /// Moments `0 < |q| <= monofractal_max_q` enter the affinity test.
    pub monofractal_max_q: f64,
    pub lacunarity: f64,
    pub canonical: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            monofractal: 0.05,
            monofractal_max_q: 4.0,
            lacunarity: 0.05,
            canonical: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// Measured discrepancy the tolerance was applied to.
    pub gap: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    fn from_gap(gap: f64, tolerance: f64, detail: String) -> Self {
        let status = if gap.abs() <= tolerance {
            VerdictStatus::Holds
        } else {
            VerdictStatus::Fails
        };
        Self {
            status,
            gap: Some(gap),
            tolerance,
            detail,
        }
    }

    fn inconclusive(tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            status: VerdictStatus::Inconclusive,
            gap: None,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub monofractal: Verdict,
    /// Slope of the affine fit `ζ(q) ≈ H0 q`.
    pub h0: Option<f64>,
    /// `c1` independent of `p`: no lacunary singularities almost everywhere.
    pub no_lacunary: Verdict,
    /// `c1` shifted by exactly the integration order: canonical singularities a.e.
    pub canonical: Verdict,
}

/// One analysed leader kind.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyInput<'a> {
    pub kind: LeaderKind,
    pub zeta: &'a ScalingFunction,
    pub spectrum: &'a Spectrum,
}

/// `analyses[0]` drives the monofractal test. `integrated` is the spectrum of the
/// integrated signal with its leader kind and integration order.
pub fn classify(
    analyses: &[ClassifyInput<'_>],
    integrated: Option<(LeaderKind, f64, &Spectrum)>,
    tol: &ClassifyTolerances,
) -> Diagnosis {
    let (monofractal, h0) = match analyses.first() {
        Some(a) => monofractal_test(a.zeta, tol),
        None => (Verdict::inconclusive(tol.monofractal, "no analysis supplied"), None),
    };

    let no_lacunary = if analyses.len() < 2 {
        Verdict::inconclusive(tol.lacunarity, "needs at least two values of p")
    } else {
        let c1s: Vec<f64> = analyses.iter().map(|a| a.spectrum.c1).collect();
        let lo = c1s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c1s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let detail = analyses
            .iter()
            .map(|a| format!("c1({}) = {:.4}", a.kind, a.spectrum.c1))
            .collect::<Vec<_>>()
            .join(", ");
        Verdict::from_gap(hi - lo, tol.lacunarity, detail)
    };

    let canonical = match integrated {
        None => Verdict::inconclusive(tol.canonical, "no integrated analysis supplied"),
        Some((kind, order, spec)) => match analyses.iter().find(|a| a.kind == kind) {
            None => Verdict::inconclusive(
                tol.canonical,
                format!("integrated analysis uses {kind}, which was not analysed directly"),
            ),
            Some(a) => Verdict::from_gap(
                spec.c1 - a.spectrum.c1 - order,
                tol.canonical,
                format!(
                    "c1 shift under integration of order {order}: {:.4} -> {:.4}",
                    a.spectrum.c1, spec.c1
                ),
            ),
        },
    };

    Diagnosis {
        monofractal,
        h0,
        no_lacunary,
        canonical,
    }
}

fn monofractal_test(zeta: &ScalingFunction, tol: &ClassifyTolerances) -> (Verdict, Option<f64>) {
    let pts: Vec<(f64, f64)> = zeta
        .finite_pairs()
        .into_iter()
        .filter(|(q, _)| *q != 0.0 && q.abs() <= tol.monofractal_max_q)
        .collect();
    if pts.len() < 2 {
        return (
            Verdict::inconclusive(tol.monofractal, "too few finite exponents in the test window"),
            None,
        );
    }
    let h0 = pts.iter().map(|(q, z)| q * z).sum::<f64>() / pts.iter().map(|(q, _)| q * q).sum::<f64>();
    let gap = pts
        .iter()
        .map(|(q, z)| (z / q - h0).abs())
        .fold(0.0, f64::max);
    (
        Verdict::from_gap(
            gap,
            tol.monofractal,
            format!("H0 = {h0:.4}, max |ζ(q)/q - H0| = {gap:.4} for 0 < |q| <= {}", tol.monofractal_max_q),
        ),
        Some(h0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaders::Quantity;
    use crate::scaling::{default_q_grid, legendre_spectrum, LegendreOptions, ScaleRange};

    fn analysis(kind: LeaderKind, f: impl Fn(f64) -> f64) -> (ScalingFunction, Spectrum) {
        let q = default_q_grid();
        let z = ScalingFunction::from_values(
            Quantity::Leaders(kind),
            q.clone(),
            q.iter().map(|&q| f(q)).collect(),
            ScaleRange::new(3, 8).unwrap(),
        );
        let s = legendre_spectrum(&z, &LegendreOptions::default()).unwrap();
        (z, s)
    }

    #[test]
    fn affine_is_monofractal() {
        let (z, s) = analysis(LeaderKind::Holder, |q| 0.3 * q);
        let d = classify(
            &[ClassifyInput { kind: LeaderKind::Holder, zeta: &z, spectrum: &s }],
            None,
            &ClassifyTolerances::default(),
        );
        assert_eq!(d.monofractal.status, VerdictStatus::Holds);
        assert!((d.h0.unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(d.no_lacunary.status, VerdictStatus::Inconclusive);
        assert_eq!(d.canonical.status, VerdictStatus::Inconclusive);
    }

    #[test]
    fn curved_is_not_monofractal() {
        let (z, s) = analysis(LeaderKind::Holder, |q| 0.5 * q - 0.05 * q * q);
        let d = classify(
            &[ClassifyInput { kind: LeaderKind::Holder, zeta: &z, spectrum: &s }],
            None,
            &ClassifyTolerances::default(),
        );
        assert_eq!(d.monofractal.status, VerdictStatus::Fails);
    }

    #[test]
    fn lacunarity_verdict_withheld_on_gap() {
        let (z1, s1) = analysis(LeaderKind::P(1.0), |q| 0.4 * q);
        let (z2, s2) = analysis(LeaderKind::P(1.4), |q| 0.7 * q);
        let d = classify(
            &[
                ClassifyInput { kind: LeaderKind::P(1.0), zeta: &z1, spectrum: &s1 },
                ClassifyInput { kind: LeaderKind::P(1.4), zeta: &z2, spectrum: &s2 },
            ],
            None,
            &ClassifyTolerances::default(),
        );
        assert_eq!(d.no_lacunary.status, VerdictStatus::Fails);
        assert!((d.no_lacunary.gap.unwrap() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn canonical_shift() {
        let (z, s) = analysis(LeaderKind::P(1.0), |q| 0.4 * q);
        let (_, si) = analysis(LeaderKind::P(1.0), |q| 1.4 * q);
        let (z2, s2) = analysis(LeaderKind::P(1.4), |q| 0.4 * q);
        let inputs = [
            ClassifyInput { kind: LeaderKind::P(1.0), zeta: &z, spectrum: &s },
            ClassifyInput { kind: LeaderKind::P(1.4), zeta: &z2, spectrum: &s2 },
        ];
        let d = classify(&inputs, Some((LeaderKind::P(1.0), 1.0, &si)), &ClassifyTolerances::default());
        assert_eq!(d.canonical.status, VerdictStatus::Holds);
        assert_eq!(d.no_lacunary.status, VerdictStatus::Holds);
        let (_, osc) = analysis(LeaderKind::P(1.0), |q| 1.9 * q);
        let d = classify(&inputs, Some((LeaderKind::P(1.0), 1.0, &osc)), &ClassifyTolerances::default());
        assert_eq!(d.canonical.status, VerdictStatus::Fails);
        assert!((d.canonical.gap.unwrap() - 0.5).abs() < 1e-9);
    }
}

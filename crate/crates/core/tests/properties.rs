//! Randomized invariants of leaders, scaling functions and spectra.

use mfa_core::bivariate::{bivariate_structure_function, cross_correlation, default_r_grid};
use mfa_core::leaders::{leaders, wavelet_leaders, LeaderKind, LeaderPyramid};
use mfa_core::pyramid::default_levels;
use mfa_core::scaling::{
    default_q_grid, legendre_spectrum, loglog_regress, structure_function, LegendreOptions,
    ScaleRange, Weighting,
};
use mfa_core::synth::fbm;
use mfa_core::{dwt_forward, CoefficientPyramid, Signal};
use proptest::prelude::*;

/// Signals of length `2^k`, `k ∈ [lo, hi]`, about half of the samples exactly zero.
fn signal(lo: u32, hi: u32) -> impl Strategy<Value = Vec<f64>> {
    (lo..=hi).prop_flat_map(|k| {
        prop::collection::vec(
            prop_oneof![Just(0.0), -10.0..10.0f64, -1e-3..1e-3f64],
            1usize << k,
        )
    })
}

fn pyramid(x: Vec<f64>, order: usize) -> CoefficientPyramid {
    let n = x.len();
    let s = Signal::new(x, None, "prop").unwrap();
    dwt_forward(&s, order, default_levels(n, order)).unwrap()
}

fn all_scales(d: &LeaderPyramid) -> ScaleRange {
    ScaleRange::new(d.coarsest_scale(), d.finest_scale()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leaders_dominate_their_children(x in signal(6, 11), order in 2usize..=4) {
        let d = wavelet_leaders(&pyramid(x, order));
        let levels = d.levels();
        for w in levels.windows(2) {
            let (fine, coarse) = (&w[0], &w[1]);
            prop_assert_eq!(fine.values.len(), 2 * coarse.values.len());
            for (k, v) in coarse.values.iter().enumerate() {
                prop_assert!(*v >= fine.values[2 * k]);
                prop_assert!(*v >= fine.values[2 * k + 1]);
            }
        }
    }

    #[test]
    fn p_leaders_dominate_own_coefficient(x in signal(6, 11), p in 0.25..6.0f64) {
        let pyr = pyramid(x, 3);
        let d = leaders(&pyr, LeaderKind::P(p)).unwrap();
        for (lc, ll) in pyr.levels().iter().zip(d.levels()) {
            prop_assert_eq!(lc.scale, ll.scale);
            for (c, l) in lc.coeffs.iter().zip(&ll.values) {
                prop_assert!(*l >= c.abs() * (1.0 - 1e-12), "{} < |{}|", l, c);
            }
        }
    }

    #[test]
    fn coherence_is_bounded(x in signal(7, 11), seed in 0u64..1000, mix in -1.0..1.0f64) {
        let n = x.len();
        let other: Vec<f64> = fbm(0.5, n, seed)
            .unwrap()
            .samples()
            .iter()
            .zip(&x)
            .map(|(a, b)| a + mix * b)
            .collect();
        let p1 = pyramid(x, 3);
        let p2 = pyramid(other, 3);
        let range = ScaleRange::new(p1.coarsest_scale(), p1.finest_scale()).unwrap();
        let t = cross_correlation(&p1, &p2, range).unwrap();
        for c in t.coherence.iter().flatten() {
            prop_assert!(c.abs() <= 1.0 + 1e-12, "|C| = {}", c);
        }
    }

    #[test]
    fn zeroth_moment_vanishes(x in signal(8, 12), p in prop_oneof![Just(f64::INFINITY), 0.5..4.0f64]) {
        let d = leaders(&pyramid(x, 3), LeaderKind::from_exponent(p).unwrap()).unwrap();
        let q = default_q_grid();
        let z = loglog_regress(&structure_function(&d, &q).unwrap(), all_scales(&d), Weighting::Uniform)
            .unwrap();
        prop_assert!(z.at(0.0).unwrap().abs() <= 0.02);
    }

    #[test]
    fn legendre_spectrum_is_concave_and_bounded(x in signal(8, 12), p in prop_oneof![Just(f64::INFINITY), 0.5..4.0f64]) {
        let d = leaders(&pyramid(x, 3), LeaderKind::from_exponent(p).unwrap()).unwrap();
        let z = loglog_regress(
            &structure_function(&d, &default_q_grid()).unwrap(),
            all_scales(&d),
            Weighting::Uniform,
        )
        .unwrap();
        let Ok(s) = legendre_spectrum(&z, &LegendreOptions::default()) else {
            // Moments of one sign missing (all-zero scales): nothing to transform.
            return Ok(());
        };
        for l in s.l.iter().flatten() {
            prop_assert!(*l <= 1.0 + 1e-12);
        }
        let support: Vec<f64> = s.l.iter().flatten().copied().collect();
        for w in support.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9, "convex kink {:?}", w);
        }
        let i = s.cell_of(s.c1).unwrap();
        let max = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.l[i].is_some_and(|l| l >= max - 1e-6), "c1 = {} off the maximum", s.c1);
        prop_assert!((s.max_l - max).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bivariate_reduces_exactly_at_zero_moment(a in signal(7, 10), seed in 0u64..1000, p in prop_oneof![Just(f64::INFINITY), 0.5..3.0f64]) {
        let n = a.len();
        let b = fbm(0.4, n, seed).unwrap().into_samples();
        let kind = LeaderKind::from_exponent(p).unwrap();
        let d1 = leaders(&pyramid(a, 3), kind).unwrap();
        let d2 = wavelet_leaders(&pyramid(b, 3));
        let r = default_r_grid();
        let t = bivariate_structure_function(&d1, &d2, &r, &r).unwrap();
        let u1 = structure_function(&d1, &r).unwrap();
        let u2 = structure_function(&d2, &r).unwrap();
        let zero = r.iter().position(|v| *v == 0.0).unwrap();
        for &j in &t.scales {
            for i in 0..r.len() {
                prop_assert_eq!(t.log2(j, i, zero), u1.log2(j, i));
                prop_assert_eq!(t.log2(j, zero, i), u2.log2(j, i));
            }
        }
    }

    #[test]
    fn bivariate_swap_is_exact(a in signal(7, 10), b_seed in 0u64..1000, r1 in -4.0..4.0f64, r2 in -4.0..4.0f64) {
        let n = a.len();
        let b = fbm(0.6, n, b_seed).unwrap().into_samples();
        let d1 = wavelet_leaders(&pyramid(a, 3));
        let d2 = leaders(&pyramid(b, 3), LeaderKind::P(1.5)).unwrap();
        let ra = [r1, 0.0, -1.0];
        let rb = [r2, 2.0];
        let x = bivariate_structure_function(&d1, &d2, &ra, &rb).unwrap();
        let y = bivariate_structure_function(&d2, &d1, &rb, &ra).unwrap();
        for &j in &x.scales {
            for i1 in 0..ra.len() {
                for i2 in 0..rb.len() {
                    let (u, v) = (x.log2(j, i1, i2), y.log2(j, i2, i1));
                    prop_assert_eq!(u.map(f64::to_bits), v.map(f64::to_bits));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn p_spectrum_bound(alpha in 0.2..0.9f64, seed in 0u64..10_000, p in 0.5..3.0f64) {
        let n = 1usize << 13;
        let x = fbm(alpha, n, seed).unwrap().into_samples();
        let d = leaders(&pyramid(x, 3), LeaderKind::P(p)).unwrap();
        let range = ScaleRange::default_for(&d, 3).unwrap();
        let z = loglog_regress(&structure_function(&d, &default_q_grid()).unwrap(), range, Weighting::Uniform)
            .unwrap();
        let s = legendre_spectrum(&z, &LegendreOptions::default()).unwrap();
        for (h, l) in s.h_grid.iter().zip(&s.l) {
            if let Some(l) = l {
                prop_assert!(*l <= 1.0 + h * p + 0.05, "L({}) = {} with p = {}", h, l, p);
            }
        }
    }
}

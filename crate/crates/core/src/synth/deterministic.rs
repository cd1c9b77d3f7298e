//! Closed-form singularity models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pyramid::Signal;

/// Tail bound used to size truncated Weierstrass series.
pub const WEIERSTRASS_TAIL: f64 = 1e-12;

/// `Σ_{n ≥ T} a^{-ωn}`.
pub fn weierstrass_tail_bound(a: f64, omega: f64, terms: usize) -> f64 {
    let r = a.powf(-omega);
    r.powi(terms as i32) / (1.0 - r)
}

/// Smallest number of terms whose geometric tail is below [`WEIERSTRASS_TAIL`].
pub fn weierstrass_terms(a: f64, omega: f64) -> usize {
    let r = a.powf(-omega);
    let t = ((WEIERSTRASS_TAIL * (1.0 - r)).ln() / r.ln()).ceil().max(1.0) as usize;
    // Guard against rounding at the boundary.
    if weierstrass_tail_bound(a, omega, t) < WEIERSTRASS_TAIL {
        t
    } else {
        t + 1
    }
}

fn check_weierstrass(a: f64, omega: f64) -> Result<()> {
    if !(a.is_finite() && a > 1.0) {
        return Err(Error::param("a", a, "must satisfy a > 1"));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::param("omega", omega, "must lie in (0, 1)"));
    }
    Ok(())
}

/// `Σ_{n<T} sin(a^n x) / a^{ωn}` sampled at `x_k = 2πk/N`.
///
/// For integer `a` the phases `a^n k mod N` are computed exactly.
pub fn weierstrass(a: f64, omega: f64, length: usize, terms: Option<usize>) -> Result<Signal> {
    check_weierstrass(a, omega)?;
    check_length(length)?;
    let terms = terms.unwrap_or_else(|| weierstrass_terms(a, omega));
    let n = length as u128;
    let mut out = vec![0.0; length];
    if a.fract() == 0.0 && a < 2f64.powi(32) {
        let a_int = a as u128;
        let mut freq: u128 = 1; // a^n mod N
        for t in 0..terms {
            let amp = a.powf(-omega * t as f64);
            for (k, v) in out.iter_mut().enumerate() {
                let phase = (freq * k as u128) % n;
                *v += amp * (2.0 * PI * phase as f64 / length as f64).sin();
            }
            freq = (freq * a_int) % n;
        }
    } else {
        for t in 0..terms {
            let amp = a.powf(-omega * t as f64);
            let freq = a.powi(t as i32);
            for (k, v) in out.iter_mut().enumerate() {
                let x = 2.0 * PI * k as f64 / length as f64;
                *v += amp * (freq * x).rem_euclid(2.0 * PI).sin();
            }
        }
    }
    Signal::new(out, None, format!("weierstrass(a={a}, omega={omega})"))
}

/// `Σ_{n > T} n^{-s} ≤ T^{1-s} / (s - 1)`; unbounded for `s ≤ 1`.
pub fn riemann_tail_bound(s: f64, terms: usize) -> Option<f64> {
    (s > 1.0).then(|| (terms as f64).powf(1.0 - s) / (s - 1.0))
}

/// Default truncation: the frequencies `n²` stay at or below the Nyquist index.
pub fn riemann_default_terms(length: usize) -> usize {
    ((length / 2) as f64).sqrt().floor().max(1.0) as usize
}

/// `Σ_{n=1}^{T} sin(n² x) / n^s` sampled at `x_k = 2πk/N`, phases computed exactly.
pub fn riemann(s: f64, length: usize, terms: Option<usize>) -> Result<Signal> {
    if !(s.is_finite() && s > 0.5) {
        return Err(Error::param("s", s, "must satisfy s > 1/2"));
    }
    check_length(length)?;
    let terms = terms.unwrap_or_else(|| riemann_default_terms(length));
    let n = length as u128;
    let mut out = vec![0.0; length];
    for m in 1..=terms as u128 {
        let amp = (m as f64).powf(-s);
        let freq = (m * m) % n;
        for (k, v) in out.iter_mut().enumerate() {
            let phase = (freq * k as u128) % n;
            *v += amp * (2.0 * PI * phase as f64 / length as f64).sin();
        }
    }
    Signal::new(out, None, format!("riemann(s={s})"))
}

/// Sample index nearest to `x0` on the grid `x_k = -1 + 2k/N`.
pub fn snap_to_grid(x0: f64, length: usize) -> Result<usize> {
    if !(x0 >= -1.0 && x0 < 1.0) {
        return Err(Error::param("x0", x0, "must lie in [-1, 1)"));
    }
    let k = ((x0 + 1.0) * length as f64 / 2.0).round() as usize;
    Ok(k.min(length - 1))
}

fn centred(length: usize, k0: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = 2.0 / length as f64;
    (0..length)
        .map(|k| f(((k as i64 - k0 as i64) as f64 * h).abs()))
        .collect()
}

/// `|x - x0|^α` on `[-1, 1)`, `x0` snapped to a sample.
pub fn cusp(alpha: f64, x0: f64, length: usize) -> Result<Signal> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", alpha, "must be positive"));
    }
    if alpha % 2.0 == 0.0 {
        return Err(Error::param("alpha", alpha, "must not be an even integer"));
    }
    check_length(length)?;
    let k0 = snap_to_grid(x0, length)?;
    Signal::new(
        centred(length, k0, |r| r.powf(alpha)),
        None,
        format!("cusp(alpha={alpha})"),
    )
}

/// `|x - x0|^α cos(|x - x0|^{-β})` on `[-1, 1)`, zero at `x0`.
pub fn chirp(alpha: f64, beta: f64, x0: f64, length: usize) -> Result<Signal> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", alpha, "must be positive"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::param("beta", beta, "must be positive"));
    }
    check_length(length)?;
    let k0 = snap_to_grid(x0, length)?;
    Signal::new(
        centred(length, k0, |r| {
            if r == 0.0 {
                0.0
            } else {
                r.powf(alpha) * r.powf(-beta).cos()
            }
        }),
        None,
        format!("chirp(alpha={alpha}, beta={beta})"),
    )
}

/// One indicator pulse of the comb, as a half-open sample index range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub j: u32,
    pub height: f64,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombLayout {
    pub pulses: Vec<Pulse>,
    /// Index of the singular point `x = 0`.
    pub origin: usize,
    pub clipped: Vec<u32>,
    /// First `j` whose pulse was narrower than one sample.
    pub first_dropped: u32,
}

/// Pulses `2^{-αj} 1[2^{-ωj}, 2^{-ωj} + 2^{-γj}]` on the grid `x_k = -1 + 2k/N`,
/// kept while they are at least one sample wide.
pub fn lacunary_comb_layout(alpha: f64, omega: f64, gamma: f64, length: usize) -> Result<CombLayout> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param("omega", omega, "must be positive"));
    }
    if !(gamma.is_finite() && gamma > omega) {
        return Err(Error::param("gamma", gamma, "must exceed omega"));
    }
    if !(alpha.is_finite() && alpha > -gamma) {
        return Err(Error::param("alpha", alpha, "must exceed -gamma"));
    }
    check_length(length)?;
    let h = 2.0 / length as f64;
    let origin = length / 2;
    let mut pulses = Vec::new();
    let mut clipped = Vec::new();
    let mut j = 1u32;
    loop {
        let width = 2f64.powf(-gamma * j as f64);
        if width < h {
            break;
        }
        let left = 2f64.powf(-omega * j as f64);
        let right = left + width;
        if let Some(prev) = pulses.last().map(|p: &Pulse| p.j) {
            let prev_left = 2f64.powf(-omega * prev as f64);
            if right >= prev_left {
                return Err(Error::param(
                    "gamma",
                    gamma,
                    "comb pulses overlap; increase gamma relative to omega",
                ));
            }
        }
        let start = ((left + 1.0) / h).ceil() as usize;
        let mut end = ((right + 1.0) / h).floor() as usize + 1;
        if end > length {
            clipped.push(j);
            end = length;
        }
        if start < end {
            pulses.push(Pulse {
                j,
                height: 2f64.powf(-alpha * j as f64),
                start,
                end,
            });
        }
        j += 1;
    }
    Ok(CombLayout {
        pulses,
        origin,
        clipped,
        first_dropped: j,
    })
}

/// Lacunary comb on `[-1, 1)` with its singularity at `x = 0` (sample `N/2`).
pub fn lacunary_comb(alpha: f64, omega: f64, gamma: f64, length: usize) -> Result<Signal> {
    let layout = lacunary_comb_layout(alpha, omega, gamma, length)?;
    if !layout.clipped.is_empty() {
        log::warn!("comb pulses {:?} clipped at the domain edge", layout.clipped);
    }
    log::warn!(
        "comb pulses from j = {} on are narrower than one sample and were dropped",
        layout.first_dropped
    );
    let mut out = vec![0.0; length];
    for p in &layout.pulses {
        out[p.start..p.end].iter_mut().for_each(|v| *v += p.height);
    }
    Signal::new(
        out,
        None,
        format!("lacunary_comb(alpha={alpha}, omega={omega}, gamma={gamma})"),
    )
}

pub(crate) fn check_length(length: usize) -> Result<()> {
    if length < 4 || !length.is_power_of_two() {
        return Err(Error::param(
            "length",
            length as f64,
            "must be a power of two, at least 4",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weierstrass_tail_is_below_bound() {
        for (a, omega) in [(2.0, 0.5), (3.0, 0.2), (1.5, 0.9)] {
            let t = weierstrass_terms(a, omega);
            assert!(weierstrass_tail_bound(a, omega, t) < WEIERSTRASS_TAIL);
            assert!(weierstrass_tail_bound(a, omega, t - 1) >= WEIERSTRASS_TAIL);
            // Direct partial sum of the tail agrees with the closed form.
            let direct: f64 = (t..t + 4000).map(|n| a.powf(-omega * n as f64)).sum();
            assert!(direct <= weierstrass_tail_bound(a, omega, t));
        }
    }

    #[test]
    fn weierstrass_exact_phases_match_direct_sum_for_small_terms() {
        let s = weierstrass(2.0, 0.5, 64, Some(5)).unwrap();
        for (k, v) in s.samples().iter().enumerate() {
            let x = 2.0 * PI * k as f64 / 64.0;
            let direct: f64 = (0..5).map(|n| (2f64.powi(n) * x).sin() / 2f64.powf(0.5 * n as f64)).sum();
            assert!((v - direct).abs() < 1e-12);
        }
        // Non-integer branch.
        let s = weierstrass(2.5, 0.5, 64, Some(4)).unwrap();
        let x = 2.0 * PI * 7.0 / 64.0;
        let direct: f64 = (0..4).map(|n| (2.5f64.powi(n) * x).sin() / 2.5f64.powf(0.5 * n as f64)).sum();
        assert!((s.samples()[7] - direct).abs() < 1e-12);
    }

    #[test]
    fn weierstrass_domain() {
        assert!(weierstrass(2.0, 1.5, 64, None).is_err());
        assert!(weierstrass(1.0, 0.5, 64, None).is_err());
        assert!(weierstrass(2.0, 0.5, 100, None).is_err());
    }

    #[test]
    fn riemann_tail_bound_holds() {
        let s = 1.5;
        let t = 100;
        let direct: f64 = (t + 1..200_000).map(|n| (n as f64).powf(-s)).sum();
        assert!(direct <= riemann_tail_bound(s, t).unwrap());
        assert!(riemann_tail_bound(0.8, t).is_none());
        assert!(riemann(0.5, 64, None).is_err());
        let r = riemann(2.0, 64, Some(3)).unwrap();
        let x = 2.0 * PI * 5.0 / 64.0;
        let direct: f64 = (1..=3).map(|n| ((n * n) as f64 * x).sin() / (n * n) as f64).sum();
        assert!((r.samples()[5] - direct).abs() < 1e-12);
    }

    #[test]
    fn cusp_is_symmetric() {
        let s = cusp(0.6, 0.0, 256).unwrap();
        let k0 = 128;
        assert_eq!(s.samples()[k0], 0.0);
        for d in 1..128 {
            assert_eq!(s.samples()[k0 + d], s.samples()[k0 - d]);
        }
        assert!(cusp(2.0, 0.0, 256).is_err());
        assert!(cusp(0.6, 1.0, 256).is_err());
    }

    #[test]
    fn chirp_vanishes_at_singularity() {
        let s = chirp(0.6, 1.0, 0.25, 256).unwrap();
        let k0 = snap_to_grid(0.25, 256).unwrap();
        assert_eq!(k0, 160);
        assert_eq!(s.samples()[k0], 0.0);
        let r: f64 = 2.0 * 3.0 / 256.0;
        assert!((s.samples()[k0 + 3] - r.powf(0.6) * (1.0 / r).cos()).abs() < 1e-15);
    }

    #[test]
    fn comb_pulses_are_disjoint_and_sized() {
        let layout = lacunary_comb_layout(0.5, 1.0, 2.0, 1 << 12).unwrap();
        for w in layout.pulses.windows(2) {
            assert!(w[1].end <= w[0].start, "{:?}", w);
        }
        // Widths 2^{-2j} ≥ 2/N holds for j ≤ 5 at N = 2^12.
        assert_eq!(layout.pulses.len(), 5);
        assert_eq!(layout.first_dropped, 6);
        let s = lacunary_comb(0.5, 1.0, 2.0, 1 << 12).unwrap();
        let p = &layout.pulses[0];
        assert!(s.samples()[p.start..p.end].iter().all(|v| (*v - 2f64.powf(-0.5)).abs() < 1e-15));
        assert_eq!(s.samples()[layout.origin], 0.0);
    }

    #[test]
    fn comb_domain() {
        assert!(lacunary_comb_layout(0.5, 1.0, 1.0, 256).is_err());
        assert!(lacunary_comb_layout(-3.0, 1.0, 2.0, 256).is_err());
        // Slow positional decay makes neighbouring pulses collide.
        assert!(lacunary_comb_layout(0.5, 0.1, 0.2, 1 << 16).is_err());
    }
}

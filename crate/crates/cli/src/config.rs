use mfa_core::bivariate::default_r_grid;
use mfa_core::leaders::LeaderKind;
use mfa_core::pyramid::default_levels;
use mfa_core::scaling::{default_q_grid, moment_grid, ScaleRange};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "s", rename_all = "snake_case")]
pub enum Integration {
    None,
    Fixed(f64),
    /// Smallest multiple of [`AUTO_STEP`] making every requested leader kind valid.
    Auto,
}

pub const AUTO_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub wavelet_order: usize,
    /// `None` selects the default range of the signal.
    pub scales: Option<ScaleRange>,
    /// Leader kinds to analyse; the first drives the monofractal and canonical tests.
    pub kinds: Vec<LeaderKind>,
    pub q_grid: Vec<f64>,
    /// Moments of the bivariate structure functions (both axes).
    pub r_grid: Vec<f64>,
    pub h_step: f64,
    pub integration: Integration,
    /// Margin of the `L^p` sign test and of the auto-integration target.
    pub lp_margin: f64,
    pub preset: Option<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            wavelet_order: 3,
            scales: None,
            kinds: vec![LeaderKind::Holder, LeaderKind::P(1.0), LeaderKind::P(2.0)],
            q_grid: default_q_grid(),
            r_grid: default_r_grid(),
            h_step: 0.02,
            integration: Integration::None,
            lp_margin: mfa_core::scaling::DEFAULT_LP_MARGIN,
            preset: None,
        }
    }
}

impl AnalysisConfig {
    /// Scales 8..=11, `p ∈ {1, 1.4}`, order 3.
    pub fn physio() -> Self {
        Self {
            wavelet_order: 3,
            scales: Some(ScaleRange { j1: 8, j2: 11 }),
            kinds: vec![LeaderKind::P(1.0), LeaderKind::P(1.4)],
            preset: Some("physio".into()),
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> CliResult<Self> {
        match name {
            "physio" => Ok(Self::physio()),
            other => Err(CliError::Config(format!("unknown preset `{other}` (available: physio)"))),
        }
    }

    /// Checks that do not depend on the signal.
    pub fn validate(&self) -> CliResult<()> {
        if !(2..=8).contains(&self.wavelet_order) {
            return Err(CliError::Config(format!(
                "wavelet order {} outside 2..=8",
                self.wavelet_order
            )));
        }
        if self.kinds.is_empty() {
            return Err(CliError::Config("at least one value of p is required".into()));
        }
        for k in &self.kinds {
            LeaderKind::from_exponent(k.exponent())?;
        }
        for (name, grid) in [("q grid", &self.q_grid), ("r grid", &self.r_grid)] {
            if !(grid.iter().any(|q| *q < 0.0) && grid.iter().any(|q| *q > 0.0)) {
                return Err(CliError::Config(format!("{name} must contain moments of both signs")));
            }
        }
        if !(self.h_step > 0.0 && self.h_step.is_finite()) {
            return Err(CliError::Config(format!("H step {} must be positive", self.h_step)));
        }
        if let Integration::Fixed(s) = self.integration {
            if !s.is_finite() {
                return Err(CliError::Config("integration order must be finite".into()));
            }
        }
        Ok(())
    }

    /// Checks against a signal of `n` samples (after truncation to a power of two).
    pub fn validate_for_length(&self, n: usize) -> CliResult<()> {
        self.validate()?;
        let levels = default_levels(n, self.wavelet_order) as u32;
        let finest = n.trailing_zeros().saturating_sub(1);
        let coarsest = (finest + 1).saturating_sub(levels);
        if let Some(r) = self.scales {
            if r.j1 < coarsest || r.j2 > finest {
                return Err(CliError::Config(format!(
                    "scales {}:{} unavailable for {n} samples (available {coarsest}:{finest})",
                    r.j1, r.j2
                )));
            }
        }
        Ok(())
    }
}

/// `j1:j2`.
pub fn parse_scales(s: &str) -> CliResult<ScaleRange> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("scales `{s}` must be j1:j2")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| CliError::Config(format!("scale `{t}` is not a non-negative integer")))
    };
    Ok(ScaleRange::new(parse(a)?, parse(b)?)?)
}

/// `lo:hi:step`.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("grid `{s}` must be lo:hi:step")));
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("grid bound `{t}` is not a number")))
        })
        .collect::<CliResult<_>>()?;
    Ok(moment_grid(v[0], v[1], v[2])?)
}

/// Comma-separated exponents; `inf` selects classical leaders.
pub fn parse_p_list(s: &str) -> CliResult<Vec<LeaderKind>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let p = match t {
                "inf" | "infinity" | "∞" => f64::INFINITY,
                _ => t
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("p value `{t}` is not a number")))?,
            };
            Ok(LeaderKind::from_exponent(p)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physio_preset() {
        let c = AnalysisConfig::preset("physio").unwrap();
        assert_eq!(c.scales, Some(ScaleRange { j1: 8, j2: 11 }));
        assert_eq!(c.kinds, vec![LeaderKind::P(1.0), LeaderKind::P(1.4)]);
        assert_eq!(c.wavelet_order, 3);
        assert!(AnalysisConfig::preset("marathon").is_err());
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_scales("3:7").unwrap(), ScaleRange { j1: 3, j2: 7 });
        assert!(parse_scales("7:3").is_err());
        assert!(parse_scales("3-7").is_err());
        assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(parse_grid("1:2").is_err());
        assert_eq!(
            parse_p_list("inf, 1,1.4").unwrap(),
            vec![LeaderKind::Holder, LeaderKind::P(1.0), LeaderKind::P(1.4)]
        );
        assert!(parse_p_list("0").is_err());
        assert!(parse_p_list("a").is_err());
    }

    #[test]
    fn length_checks() {
        let c = AnalysisConfig::physio();
        assert!(c.validate_for_length(1 << 15).is_ok());
        assert!(c.validate_for_length(1 << 11).is_err());
        let c = AnalysisConfig {
            q_grid: vec![0.5, 1.0],
            ..AnalysisConfig::default()
        };
        assert!(c.validate().is_err());
    }
}

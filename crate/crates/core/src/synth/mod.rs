//! Synthetic signals with known regularity.

mod cascade;
mod deterministic;
mod fbm;

pub use cascade::{BinomialCascade, MAX_CASCADE_DEPTH};
pub use deterministic::{
    chirp, cusp, lacunary_comb, lacunary_comb_layout, riemann, riemann_default_terms,
    riemann_tail_bound, snap_to_grid, weierstrass, weierstrass_tail_bound, weierstrass_terms,
    CombLayout, Pulse, WEIERSTRASS_TAIL,
};
pub use fbm::{fbm, fbm_multifractal_time, fgn_autocovariance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pyramid::Signal;

/// Default lookup oversampling for fBm in multifractal time.
pub const DEFAULT_OVERSAMPLING: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Weierstrass {
        a: f64,
        omega: f64,
        #[serde(default)]
        terms: Option<usize>,
    },
    Cusp {
        alpha: f64,
        #[serde(default)]
        x0: f64,
    },
    Chirp {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        x0: f64,
    },
    LacunaryComb {
        alpha: f64,
        omega: f64,
        gamma: f64,
    },
    Riemann {
        s: f64,
        #[serde(default)]
        terms: Option<usize>,
    },
    Fbm {
        alpha: f64,
    },
    BinomialCascade {
        p: f64,
        #[serde(default)]
        depth: Option<u32>,
    },
    FbmMultifractalTime {
        alpha: f64,
        p: f64,
        #[serde(default)]
        depth: Option<u32>,
        #[serde(default)]
        oversampling: Option<usize>,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Weierstrass { .. } => "weierstrass",
            Generator::Cusp { .. } => "cusp",
            Generator::Chirp { .. } => "chirp",
            Generator::LacunaryComb { .. } => "lacunary_comb",
            Generator::Riemann { .. } => "riemann",
            Generator::Fbm { .. } => "fbm",
            Generator::BinomialCascade { .. } => "binomial_cascade",
            Generator::FbmMultifractalTime { .. } => "fbm_multifractal_time",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Generator::Fbm { .. } | Generator::FbmMultifractalTime { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub generator: Generator,
    pub length: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Pointwise behaviour of an isolated singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Singularity {
    Cusp { alpha: f64 },
    Chirp { alpha: f64, beta: f64 },
    LacunaryComb { alpha: f64, omega: f64, gamma: f64 },
}

impl Singularity {
    pub fn holder(&self) -> f64 {
        match *self {
            Singularity::Cusp { alpha } | Singularity::Chirp { alpha, .. } => alpha,
            Singularity::LacunaryComb { alpha, omega, .. } => alpha / omega,
        }
    }

    /// Hölder exponent after integrating `t` times. Known for any `t > 0` except for
    /// the comb, where only `t = 1` has a closed form.
    pub fn holder_after_integration(&self, t: f64) -> Option<f64> {
        match *self {
            Singularity::Cusp { alpha } => Some(alpha + t),
            Singularity::Chirp { alpha, beta } => Some(alpha + (1.0 + beta) * t),
            Singularity::LacunaryComb { alpha, omega, gamma } => {
                (t == 1.0).then_some((alpha + gamma) / omega)
            }
        }
    }

    /// p-exponent at the singular point (`p ≥ 1`).
    pub fn p_exponent(&self, p: f64) -> f64 {
        match *self {
            Singularity::Cusp { alpha } | Singularity::Chirp { alpha, .. } => alpha,
            Singularity::LacunaryComb { alpha, omega, gamma } => alpha + (gamma / omega - 1.0) / p,
        }
    }
}

/// What theory predicts for a generated signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Theory {
    /// Same Hölder exponent everywhere: `ζ(q) = h q`, spectrum the point `h`.
    Monoholder { h: f64 },
    /// `ζ(q) = 1 - log2(p^{αq} + (1-p)^{αq})`; `α = 1` for the cascade itself.
    Cascade { p: f64, alpha: f64 },
    /// Isolated singularity at a sample index.
    Isolated { position: usize, singularity: Singularity },
    /// Riemann series; only the uniform exponent `(s - 1)/2` is recorded.
    Riemann { h_min: f64 },
}

impl Theory {
    pub fn zeta(&self, q: f64) -> Option<f64> {
        match *self {
            Theory::Monoholder { h } => Some(h * q),
            Theory::Cascade { p, alpha } => {
                Some(1.0 - (p.powf(alpha * q) + (1.0 - p).powf(alpha * q)).log2())
            }
            _ => None,
        }
    }

    pub fn c1(&self) -> Option<f64> {
        match *self {
            Theory::Monoholder { h } => Some(h),
            Theory::Cascade { p, alpha } => Some(-alpha * (p.log2() + (1.0 - p).log2()) / 2.0),
            _ => None,
        }
    }

    pub fn h_min(&self) -> Option<f64> {
        match *self {
            Theory::Monoholder { h } => Some(h),
            Theory::Cascade { p, alpha } => Some(-alpha * p.max(1.0 - p).log2()),
            Theory::Riemann { h_min } => Some(h_min),
            Theory::Isolated { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub signal: Signal,
    pub theory: Theory,
    pub warnings: Vec<String>,
}

impl GeneratorSpec {
    pub fn new(generator: Generator, length: usize, seed: u64) -> Self {
        Self {
            generator,
            length,
            seed,
        }
    }

    fn cascade_depth(&self, depth: Option<u32>) -> u32 {
        depth.unwrap_or(self.length.trailing_zeros().min(MAX_CASCADE_DEPTH))
    }

    pub fn theory(&self) -> Result<Theory> {
        Ok(match self.generator {
            Generator::Weierstrass { omega, .. } => Theory::Monoholder { h: omega },
            Generator::Fbm { alpha } => Theory::Monoholder { h: alpha },
            Generator::Riemann { s, .. } => Theory::Riemann { h_min: (s - 1.0) / 2.0 },
            Generator::BinomialCascade { p, .. } => Theory::Cascade { p, alpha: 1.0 },
            Generator::FbmMultifractalTime { alpha, p, .. } => Theory::Cascade { p, alpha },
            Generator::Cusp { alpha, x0 } => Theory::Isolated {
                position: snap_to_grid(x0, self.length)?,
                singularity: Singularity::Cusp { alpha },
            },
            Generator::Chirp { alpha, beta, x0 } => Theory::Isolated {
                position: snap_to_grid(x0, self.length)?,
                singularity: Singularity::Chirp { alpha, beta },
            },
            Generator::LacunaryComb { alpha, omega, gamma } => Theory::Isolated {
                position: self.length / 2,
                singularity: Singularity::LacunaryComb { alpha, omega, gamma },
            },
        })
    }

    pub fn generate(&self) -> Result<Synthesized> {
        let n = self.length;
        let mut warnings = Vec::new();
        let signal = match self.generator {
            Generator::Weierstrass { a, omega, terms } => weierstrass(a, omega, n, terms)?,
            Generator::Cusp { alpha, x0 } => cusp(alpha, x0, n)?,
            Generator::Chirp { alpha, beta, x0 } => chirp(alpha, beta, x0, n)?,
            Generator::LacunaryComb { alpha, omega, gamma } => {
                let layout = lacunary_comb_layout(alpha, omega, gamma, n)?;
                if !layout.clipped.is_empty() {
                    warnings.push(format!("pulses {:?} clipped at the domain edge", layout.clipped));
                }
                warnings.push(format!(
                    "pulses j >= {} are narrower than one sample and were dropped",
                    layout.first_dropped
                ));
                lacunary_comb(alpha, omega, gamma, n)?
            }
            Generator::Riemann { s, terms } => {
                let t = terms.unwrap_or_else(|| riemann_default_terms(n));
                match riemann_tail_bound(s, t) {
                    Some(b) => warnings.push(format!("series truncated at {t} terms, tail bound {b:.3e}")),
                    None => warnings.push(format!(
                        "series truncated at {t} terms; no absolute tail bound for s <= 1"
                    )),
                }
                riemann(s, n, Some(t))?
            }
            Generator::Fbm { alpha } => fbm(alpha, n, self.seed)?,
            Generator::BinomialCascade { p, depth } => {
                BinomialCascade::new(p, self.cascade_depth(depth))?.distribution_function(n)?
            }
            Generator::FbmMultifractalTime {
                alpha,
                p,
                depth,
                oversampling,
            } => {
                let cascade = BinomialCascade::new(p, self.cascade_depth(depth))?;
                fbm_multifractal_time(
                    alpha,
                    &cascade,
                    n,
                    oversampling.unwrap_or(DEFAULT_OVERSAMPLING),
                    self.seed,
                )?
            }
        };
        Ok(Synthesized {
            signal,
            theory: self.theory()?,
            warnings,
        })
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    /// Parses `kind:key=value,key=value`, e.g. `fbm:alpha=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|i| !i.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("parameter `{k}` is not a number: `{v}`")))?;
            params.insert(k.trim().to_string(), v);
        }
        let mut take = |name: &str| params.remove(name);
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("generator `{kind}` requires `{name}`")))
        };
        let generator = match kind.trim() {
            "weierstrass" => Generator::Weierstrass {
                a: need(take("a"), "a")?,
                omega: need(take("omega"), "omega")?,
                terms: take("terms").map(|t| t as usize),
            },
            "cusp" => Generator::Cusp {
                alpha: need(take("alpha"), "alpha")?,
                x0: take("x0").unwrap_or(0.0),
            },
            "chirp" => Generator::Chirp {
                alpha: need(take("alpha"), "alpha")?,
                beta: need(take("beta"), "beta")?,
                x0: take("x0").unwrap_or(0.0),
            },
            "lacunary_comb" => Generator::LacunaryComb {
                alpha: need(take("alpha"), "alpha")?,
                omega: need(take("omega"), "omega")?,
                gamma: need(take("gamma"), "gamma")?,
            },
            "riemann" => Generator::Riemann {
                s: need(take("s"), "s")?,
                terms: take("terms").map(|t| t as usize),
            },
            "fbm" => Generator::Fbm {
                alpha: need(take("alpha"), "alpha")?,
            },
            "binomial_cascade" => Generator::BinomialCascade {
                p: need(take("p"), "p")?,
                depth: take("depth").map(|d| d as u32),
            },
            "fbm_multifractal_time" => Generator::FbmMultifractalTime {
                alpha: need(take("alpha"), "alpha")?,
                p: need(take("p"), "p")?,
                depth: take("depth").map(|d| d as u32),
                oversampling: take("oversampling").map(|o| o as usize),
            },
            other => return Err(Error::Config(format!("unknown generator `{other}`"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(Error::Config(format!("unknown parameter `{extra}` for `{kind}`")));
        }
        Ok(generator)
    }
}

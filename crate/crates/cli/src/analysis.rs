use mfa_core::bivariate::{
    align_pair, bivariate_legendre, bivariate_scaling, bivariate_structure_function,
    cross_correlation, formula_diagnostics, BivariateLegendreOptions, BivariateScaling,
    BivariateSpectrum, CoherenceTable, FormulaDiagnostics, UPPER_BOUND_CAVEAT,
};
use mfa_core::leaders::{leaders, wavelet_leaders, LeaderKind, LeaderPyramid};
use mfa_core::pyramid::default_levels;
use mfa_core::scaling::{
    classify, default_p_grid, h_min, legendre_spectrum, loglog_regress, lp_membership,
    structure_function, ClassifyInput, ClassifyTolerances, Diagnosis, Exponent,
    LegendreOptions, LpMembership, ScaleRange, ScalingFunction, Spectrum,
    StructureFunctionTable, Weighting, DEFAULT_MIN_LEADER_DEPTH,
};
use mfa_core::{dwt_forward, fractional_integrate, CoefficientPyramid, Signal};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AnalysisConfig, Integration, AUTO_STEP};
use crate::error::{CliError, CliResult};
use crate::ingest::sha256_hex;

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub label: String,
    pub len: usize,
    /// Length before truncation to a power of two, when different.
    pub truncated_from: Option<usize>,
    pub dt: Option<f64>,
    pub sha256: String,
}

/// Validity of one leader kind before and after integration.
#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub kind: LeaderKind,
    /// `h_min` for classical leaders, `η(p)` for p-leaders.
    pub exponent: Option<f64>,
    pub membership: Option<LpMembership>,
    /// Smallest integration order that clears the margin.
    pub required_s: Option<f64>,
    pub exponent_after: Option<f64>,
    pub admissible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrationReport {
    pub mode: Integration,
    pub s: f64,
    pub h_min_after: Exponent,
    pub eta_after: ScalingFunction,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindAnalysis {
    pub kind: LeaderKind,
    /// Total integration order of the analysed coefficients.
    pub integration_order: f64,
    pub structure_functions: StructureFunctionTable,
    pub zeta: ScalingFunction,
    pub spectrum: Spectrum,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub config: AnalysisConfig,
    pub input: InputSummary,
    pub range: ScaleRange,
    pub h_min: Exponent,
    /// Wavelet scaling function `η(p)` of the raw coefficients.
    pub eta: ScalingFunction,
    pub admissibility: Vec<Admissibility>,
    pub integration: IntegrationReport,
    pub analyses: Vec<KindAnalysis>,
    /// First kind, one further order of integration.
    pub integrated: Option<KindAnalysis>,
    pub diagnosis: Diagnosis,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn analysis(&self, kind: LeaderKind) -> Option<&KindAnalysis> {
        self.analyses.iter().find(|a| a.kind == kind)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BivariateReport {
    pub kinds: (LeaderKind, LeaderKind),
    pub range: ScaleRange,
    pub scaling: BivariateScaling,
    pub spectrum: BivariateSpectrum,
    /// Univariate spectra on the bivariate moment grid, used by the diagnostics.
    pub marginal_spectra: (Spectrum, Spectrum),
    pub diagnostics: FormulaDiagnostics,
    pub caveat: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub version: &'static str,
    pub first: Report,
    pub second: Report,
    pub coherence: CoherenceTable,
    pub max_abs_coherence: Option<f64>,
    pub bivariate: BivariateReport,
    pub warnings: Vec<String>,
}

/// Everything computed before the integration order is fixed.
struct Prepared {
    input: InputSummary,
    pyramid: CoefficientPyramid,
    range: ScaleRange,
    h_min: Exponent,
    eta: ScalingFunction,
    warnings: Vec<String>,
}

/// Output of [`finish`], with the leader pyramids kept for pair analysis.
struct Finished {
    report: Report,
    pyramid: CoefficientPyramid,
    leaders: Vec<LeaderPyramid>,
}

fn p_grid(cfg: &AnalysisConfig) -> Vec<f64> {
    let mut g = default_p_grid();
    g.extend(cfg.kinds.iter().map(|k| k.exponent()).filter(|p| p.is_finite()));
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    g
}

fn prepare(signal: &Signal, cfg: &AnalysisConfig) -> CliResult<Prepared> {
    let mut warnings = Vec::new();
    let truncated = signal.truncated_to_pow2();
    if truncated.len() < 2 {
        return Err(CliError::Data(format!("signal `{}` is too short", signal.label())));
    }
    let truncated_from = (truncated.len() != signal.len()).then_some(signal.len());
    if let Some(n) = truncated_from {
        warnings.push(format!("{n} samples truncated to {}", truncated.len()));
    }
    cfg.validate_for_length(truncated.len())?;

    let n = truncated.len();
    let pyramid = dwt_forward(&truncated, cfg.wavelet_order, default_levels(n, cfg.wavelet_order))?;
    let range = match cfg.scales {
        Some(r) => r,
        None => ScaleRange::default_for(&wavelet_leaders(&pyramid), DEFAULT_MIN_LEADER_DEPTH)?,
    };
    let h_min = h_min(&pyramid, range)?;
    let eta = loglog_regress(&structure_function(&pyramid, &p_grid(cfg))?, range, Weighting::Uniform)?;
    Ok(Prepared {
        input: InputSummary {
            label: signal.label().to_string(),
            len: n,
            truncated_from,
            dt: signal.dt(),
            sha256: sha256_hex(truncated.samples()),
        },
        pyramid,
        range,
        h_min,
        eta,
        warnings,
    })
}

/// `h_min` or `η(p)` and the order needed to lift it above `margin`.
fn requirement(
    h_min: &Exponent,
    eta: &ScalingFunction,
    kind: LeaderKind,
    margin: f64,
) -> (Option<f64>, Option<f64>) {
    match kind {
        LeaderKind::Holder => (Some(h_min.value), Some(margin - h_min.value)),
        LeaderKind::P(p) => {
            let eta = eta.at(p);
            (eta, eta.map(|e| (margin - e) / p))
        }
    }
}

/// Smallest multiple of [`AUTO_STEP`] strictly above the largest requirement, or 0.
fn auto_order(preps: &[&Prepared], cfg: &AnalysisConfig) -> f64 {
    let need = preps
        .iter()
        .flat_map(|prep| cfg.kinds.iter().filter_map(|k| requirement(&prep.h_min, &prep.eta, *k, cfg.lp_margin).1))
        .fold(f64::NEG_INFINITY, f64::max);
    if need < 0.0 {
        0.0
    } else {
        ((need / AUTO_STEP).floor() + 1.0) * AUTO_STEP
    }
}

fn analyse_kind(
    pyramid: &CoefficientPyramid,
    kind: LeaderKind,
    range: ScaleRange,
    cfg: &AnalysisConfig,
) -> CliResult<(KindAnalysis, LeaderPyramid)> {
    let d = leaders(pyramid, kind)?;
    let table = structure_function(&d, &cfg.q_grid)?;
    let zeta = loglog_regress(&table, range, Weighting::Uniform)?;
    let spectrum = legendre_spectrum(
        &zeta,
        &LegendreOptions {
            h_step: cfg.h_step,
            ..LegendreOptions::default()
        },
    )?;
    Ok((
        KindAnalysis {
            kind,
            integration_order: pyramid.integration_order(),
            structure_functions: table,
            zeta,
            spectrum,
        },
        d,
    ))
}

fn finish(prep: Prepared, s: f64, cfg: &AnalysisConfig) -> CliResult<Finished> {
    let Prepared {
        input,
        pyramid,
        range,
        h_min: hm,
        eta,
        mut warnings,
    } = prep;
    let integrated = fractional_integrate(&pyramid, s)?;
    let h_min_after = h_min(&integrated, range)?;
    let eta_after = loglog_regress(
        &structure_function(&integrated, &eta.moments)?,
        range,
        Weighting::Uniform,
    )?;

    let admissibility: Vec<Admissibility> = cfg
        .kinds
        .iter()
        .map(|&kind| {
            let (exponent, need) = requirement(&hm, &eta, kind, cfg.lp_margin);
            let (membership, exponent_after) = match kind {
                LeaderKind::Holder => (None, Some(h_min_after.value)),
                LeaderKind::P(p) => (lp_membership(&eta, p, cfg.lp_margin).ok(), eta_after.at(p)),
            };
            Admissibility {
                kind,
                exponent,
                membership,
                required_s: need.map(|x| x.max(0.0)),
                exponent_after,
                admissible: exponent_after.is_some_and(|e| e > cfg.lp_margin),
            }
        })
        .collect();

    let kinds: Vec<LeaderKind> = admissibility.iter().filter(|a| a.admissible).map(|a| a.kind).collect();
    for a in admissibility.iter().filter(|a| !a.admissible) {
        warnings.push(format!(
            "{} skipped: exponent {} after integration of order {s} does not exceed {}",
            a.kind,
            a.exponent_after.map_or("undefined".into(), |e| format!("{e:.4}")),
            cfg.lp_margin
        ));
    }
    if kinds.is_empty() {
        let values: Vec<String> = admissibility
            .iter()
            .map(|a| {
                let name = match a.kind {
                    LeaderKind::Holder => "h_min".to_string(),
                    LeaderKind::P(p) => format!("eta({p})"),
                };
                format!(
                    "{name} = {} (after s = {s}: {})",
                    a.exponent.map_or("undefined".into(), |e| format!("{e:.4}")),
                    a.exponent_after.map_or("undefined".into(), |e| format!("{e:.4}"))
                )
            })
            .collect();
        return Err(CliError::NoAdmissible(format!(
            "{}; fractional integration is required (use --integrate or --auto-integrate)",
            values.join(", ")
        )));
    }

    let mut results: Vec<CliResult<(KindAnalysis, LeaderPyramid)>> = kinds
        .par_iter()
        .map(|&k| analyse_kind(&integrated, k, range, cfg))
        .collect();
    let once_more = fractional_integrate(&integrated, 1.0)?;
    let extra = analyse_kind(&once_more, kinds[0], range, cfg);
    let mut analyses = Vec::with_capacity(kinds.len());
    let mut leader_pyrs = Vec::with_capacity(kinds.len());
    for r in results.drain(..) {
        let (a, d) = r?;
        warnings.extend(a.spectrum.warnings.iter().map(|w| format!("{}: {w}", a.kind)));
        if !a.zeta.poor_fit.is_empty() {
            warnings.push(format!(
                "{}: {} moments fit with r² below {}",
                a.kind,
                a.zeta.poor_fit.len(),
                mfa_core::scaling::R2_WARNING
            ));
        }
        analyses.push(a);
        leader_pyrs.push(d);
    }
    let integrated_analysis = match extra {
        Ok((a, _)) => Some(a),
        Err(e) => {
            warnings.push(format!("integrated analysis failed: {e}"));
            None
        }
    };

    let inputs: Vec<ClassifyInput<'_>> = analyses
        .iter()
        .map(|a| ClassifyInput {
            kind: a.kind,
            zeta: &a.zeta,
            spectrum: &a.spectrum,
        })
        .collect();
    let diagnosis = classify(
        &inputs,
        integrated_analysis.as_ref().map(|a| (a.kind, 1.0, &a.spectrum)),
        &ClassifyTolerances::default(),
    );

    let report = Report {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        input,
        range,
        h_min: hm,
        eta,
        admissibility,
        integration: IntegrationReport {
            mode: cfg.integration,
            s,
            h_min_after,
            eta_after,
        },
        analyses,
        integrated: integrated_analysis,
        diagnosis,
        warnings,
    };
    Ok(Finished {
        report,
        pyramid: integrated,
        leaders: leader_pyrs,
    })
}

fn order_for(preps: &[&Prepared], cfg: &AnalysisConfig) -> f64 {
    match cfg.integration {
        Integration::None => 0.0,
        Integration::Fixed(s) => s,
        Integration::Auto => auto_order(preps, cfg),
    }
}

/// Univariate pipeline: `h_min`, `η`, admissibility and integration order, then
/// leader analyses per kind and the classification.
pub fn analyze(signal: &Signal, cfg: &AnalysisConfig) -> CliResult<Report> {
    cfg.validate()?;
    let prep = prepare(signal, cfg)?;
    let s = order_for(&[&prep], cfg);
    if s != 0.0 {
        log::info!("integrating `{}` by s = {s}", signal.label());
    }
    Ok(finish(prep, s, cfg)?.report)
}

/// Both univariate pipelines with a common integration order, then coherence,
/// bivariate scaling, bivariate spectrum and formula diagnostics on the first leader
/// kind admissible for both signals.
pub fn analyze_pair(a: &Signal, b: &Signal, cfg: &AnalysisConfig) -> CliResult<PairReport> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    if a.len() != b.len() {
        warnings.push(format!("lengths {} and {} aligned to a common power of two", a.len(), b.len()));
    }
    let (a, b) = align_pair(a, b)?;
    let (pa, pb) = rayon::join(|| prepare(&a, cfg), || prepare(&b, cfg));
    let (pa, pb) = (pa?, pb?);
    let s = order_for(&[&pa, &pb], cfg);
    let (fa, fb) = rayon::join(|| finish(pa, s, cfg), || finish(pb, s, cfg));
    let (fa, fb) = (fa?, fb?);

    let pick = fa
        .report
        .analyses
        .iter()
        .enumerate()
        .find_map(|(i, x)| {
            fb.report
                .analyses
                .iter()
                .position(|y| y.kind == x.kind)
                .map(|j| (i, j))
        })
        .ok_or_else(|| {
            CliError::NoAdmissible("no leader kind is admissible for both signals".into())
        })?;
    let (l1, l2) = (&fa.leaders[pick.0], &fb.leaders[pick.1]);
    let range = fa.report.range;

    let coh_range = match cfg.scales {
        Some(r) => r,
        None => ScaleRange::default_for(&fa.pyramid, 0)?,
    };
    let coherence = cross_correlation(&fa.pyramid, &fb.pyramid, coh_range)?;
    let max_abs_coherence = coherence.max_abs_coherence(coh_range);

    let table = bivariate_structure_function(l1, l2, &cfg.r_grid, &cfg.r_grid)?;
    let scaling = bivariate_scaling(&table, range)?;
    let spectrum = bivariate_legendre(
        &scaling,
        &BivariateLegendreOptions {
            h_step: cfg.h_step,
            ..BivariateLegendreOptions::default()
        },
    )?;
    let uni = |d: &LeaderPyramid| -> CliResult<Spectrum> {
        let z = loglog_regress(&structure_function(d, &cfg.r_grid)?, range, Weighting::Uniform)?;
        Ok(legendre_spectrum(
            &z,
            &LegendreOptions {
                h_step: cfg.h_step,
                ..LegendreOptions::default()
            },
        )?)
    };
    let (u1, u2) = (uni(l1)?, uni(l2)?);
    let diagnostics = formula_diagnostics(&spectrum, &u1, &u2);
    warnings.extend(spectrum.warnings.iter().cloned());
    if diagnostics.empty_support {
        warnings.push("joint support of the spectra is empty".into());
    }

    Ok(PairReport {
        version: env!("CARGO_PKG_VERSION"),
        bivariate: BivariateReport {
            kinds: (fa.report.analyses[pick.0].kind, fb.report.analyses[pick.1].kind),
            range,
            scaling,
            spectrum,
            marginal_spectra: (u1, u2),
            diagnostics,
            caveat: UPPER_BOUND_CAVEAT,
        },
        first: fa.report,
        second: fb.report,
        coherence,
        max_abs_coherence,
        warnings,
    })
}

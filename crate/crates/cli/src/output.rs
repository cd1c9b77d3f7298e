use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mfa_core::leaders::LeaderKind;
use mfa_core::scaling::{ScalingFunction, Spectrum, StructureFunctionTable};
use serde::Serialize;

use crate::analysis::{KindAnalysis, PairReport, Report};
use crate::error::{CliError, CliResult};

/// File-name tag of a leader kind: `leader`, `p1`, `p1.4`.
pub fn kind_tag(kind: LeaderKind) -> String {
    match kind {
        LeaderKind::Holder => "leader".into(),
        LeaderKind::P(p) => format!("p{p}"),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn create(dir: &Path, name: &str) -> CliResult<csv::Writer<BufWriter<File>>> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let f = File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Long format: one row per (scale, moment).
fn write_structure_functions(dir: &Path, name: &str, t: &StructureFunctionTable) -> CliResult<()> {
    let mut w = create(dir, name)?;
    w.write_record(["j", "q", "log2_s", "count"])?;
    for (row, j) in t.scales.iter().enumerate() {
        for (m, q) in t.moments.iter().enumerate() {
            w.write_record([
                j.to_string(),
                q.to_string(),
                cell(t.log2_values[row][m]),
                t.cell_count(row, m).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_scaling(dir: &Path, name: &str, z: &ScalingFunction) -> CliResult<()> {
    let mut w = create(dir, name)?;
    w.write_record(["q", "zeta", "intercept", "r2"])?;
    for (i, q) in z.moments.iter().enumerate() {
        w.write_record([q.to_string(), cell(z.zeta[i]), cell(z.intercept[i]), cell(z.r2[i])])?;
    }
    w.flush()?;
    Ok(())
}

fn write_spectrum(dir: &Path, name: &str, s: &Spectrum) -> CliResult<()> {
    let mut w = create(dir, name)?;
    w.write_record(["h", "l", "l_positive", "l_negative"])?;
    for (i, h) in s.h_grid.iter().enumerate() {
        w.write_record([
            h.to_string(),
            cell(s.l[i]),
            s.l_positive[i].to_string(),
            s.l_negative[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_kind(dir: &Path, prefix: &str, a: &KindAnalysis) -> CliResult<()> {
    let tag = kind_tag(a.kind);
    write_structure_functions(dir, &format!("{prefix}sf_{tag}.csv"), &a.structure_functions)?;
    write_scaling(dir, &format!("{prefix}zeta_{tag}.csv"), &a.zeta)?;
    write_spectrum(dir, &format!("{prefix}spectrum_{tag}.csv"), &a.spectrum)
}

fn write_tables(dir: &Path, prefix: &str, r: &Report) -> CliResult<()> {
    write_scaling(dir, &format!("{prefix}eta.csv"), &r.eta)?;
    for a in &r.analyses {
        write_kind(dir, prefix, a)?;
    }
    if let Some(a) = &r.integrated {
        write_kind(dir, &format!("{prefix}integrated_"), a)?;
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

/// `report.json` plus per-table CSV files. Returns the written report path.
pub fn write_report(dir: &Path, r: &Report) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join("report.json");
    write_json(&path, r)?;
    write_tables(dir, "", r)?;
    Ok(path)
}

pub fn write_pair_report(dir: &Path, r: &PairReport) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join("report.json");
    write_json(&path, r)?;
    write_tables(dir, "first_", &r.first)?;
    write_tables(dir, "second_", &r.second)?;

    let c = &r.coherence;
    let mut w = create(dir, "coherence.csv")?;
    w.write_record(["j", "count", "s11", "s22", "s12", "coherence"])?;
    for i in 0..c.scales.len() {
        w.write_record([
            c.scales[i].to_string(),
            c.counts[i].to_string(),
            c.s11[i].to_string(),
            c.s22[i].to_string(),
            c.s12[i].to_string(),
            cell(c.coherence[i]),
        ])?;
    }
    w.flush()?;

    let z = &r.bivariate.scaling;
    let mut w = create(dir, "bivariate_zeta.csv")?;
    w.write_record(["r1", "r2", "zeta", "r2_fit"])?;
    for (i1, a) in z.r1.iter().enumerate() {
        for (i2, b) in z.r2.iter().enumerate() {
            w.write_record([a.to_string(), b.to_string(), cell(z.zeta[i1][i2]), cell(z.r2_fit[i1][i2])])?;
        }
    }
    w.flush()?;

    let s = &r.bivariate.spectrum;
    let d = &r.bivariate.diagnostics;
    let mut w = create(dir, "bivariate_spectrum.csv")?;
    w.write_record(["h1", "h2", "l", "codimension_residual", "large_intersection_residual"])?;
    for (i1, h1) in s.h1_grid.iter().enumerate() {
        for (i2, h2) in s.h2_grid.iter().enumerate() {
            w.write_record([
                h1.to_string(),
                h2.to_string(),
                cell(s.l[i1][i2]),
                cell(d.codimension_field[i1][i2]),
                cell(d.large_intersection_field[i1][i2]),
            ])?;
        }
    }
    w.flush()?;
    Ok(path)
}

use std::path::Path;

use mfa_core::Signal;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Header names treated as a timestamp column and skipped when picking a default.
const TIME_COLUMNS: [&str; 6] = ["t", "time", "timestamp", "date", "datetime", "index"];

/// Half-open row range `[start, end)` over data rows (header excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub path: String,
    pub column: String,
    pub rows: usize,
    pub segments: Vec<Segment>,
    /// Constant added to each segment so that it starts where the previous one ended.
    pub offsets: Vec<f64>,
    pub stitched_len: usize,
    pub len: usize,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub signal: Signal,
    pub provenance: Provenance,
}

/// Hex SHA-256 of the little-endian bytes of `samples`.
pub fn sha256_hex(samples: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in samples {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// One `start,end` pair per line; blank lines and `#` comments are skipped.
pub fn read_segments(path: &Path) -> CliResult<Vec<Segment>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || CliError::Config(format!("segments line {}: expected `start,end`, got `{line}`", i + 1));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        out.push(Segment { start, end });
    }
    Ok(out)
}

fn check_segments(segments: &[Segment], rows: usize) -> CliResult<()> {
    for s in segments {
        if s.start >= s.end {
            return Err(CliError::Config(format!("segment [{}, {}) is empty", s.start, s.end)));
        }
        if s.end > rows {
            return Err(CliError::Config(format!(
                "segment [{}, {}) exceeds the {rows} data rows",
                s.start, s.end
            )));
        }
    }
    if let Some(w) = segments.windows(2).find(|w| w[1].start < w[0].end) {
        return Err(CliError::Config(format!(
            "segments [{}, {}) and [{}, {}) overlap or are out of order",
            w[0].start, w[0].end, w[1].start, w[1].end
        )));
    }
    Ok(())
}

/// Concatenates the segments, shifting each so that its first value equals the last
/// value of the stitched series so far. Returns the series and the applied offsets.
pub fn stitch(values: &[f64], segments: &[Segment]) -> (Vec<f64>, Vec<f64>) {
    let mut out: Vec<f64> = Vec::new();
    let mut offsets = Vec::with_capacity(segments.len());
    for s in segments {
        let seg = &values[s.start..s.end];
        let offset = out.last().map_or(0.0, |last| last - seg[0]);
        offsets.push(offset);
        out.extend(seg.iter().map(|x| x + offset));
    }
    (out, offsets)
}

fn pick_column(headers: &csv::StringRecord, column: Option<&str>) -> CliResult<usize> {
    if let Some(name) = column {
        return headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "column `{name}` not found (columns: {})",
                    headers.iter().collect::<Vec<_>>().join(", ")
                ))
            });
    }
    let candidates: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !TIME_COLUMNS.contains(&h.trim().to_ascii_lowercase().as_str()))
        .map(|(i, _)| i)
        .collect();
    match candidates.as_slice() {
        [i] => Ok(*i),
        _ => Err(CliError::Config(format!(
            "cannot choose a data column among [{}]; pass --column",
            headers.iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Reads one numeric column of a headed CSV file, stitches the selected segments and
/// truncates to the largest power of two. Lines starting with `#` are comments.
pub fn ingest(path: &Path, column: Option<&str>, segments: Option<&[Segment]>) -> CliResult<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = pick_column(&headers, column)?;

    let cells: Vec<String> = rdr
        .records()
        .map(|r| r.map(|r| r.get(col).unwrap_or("").to_string()))
        .collect::<Result<_, _>>()?;
    let rows = cells.len();
    let segments: Vec<Segment> = match segments {
        Some(s) => s.to_vec(),
        None => vec![Segment { start: 0, end: rows }],
    };
    if rows == 0 || segments.is_empty() {
        return Err(CliError::Data(format!("{}: empty selection", path.display())));
    }
    check_segments(&segments, rows)?;

    let mut values = vec![f64::NAN; rows];
    let mut bad = Vec::new();
    for s in &segments {
        for i in s.start..s.end {
            match cells[i].parse::<f64>() {
                Ok(v) if v.is_finite() => values[i] = v,
                _ => bad.push(i),
            }
        }
    }
    if !bad.is_empty() {
        let shown: Vec<String> = bad.iter().take(20).map(|i| i.to_string()).collect();
        return Err(CliError::Data(format!(
            "{}: {} non-numeric cells in column `{}` at data rows {}{}",
            path.display(),
            bad.len(),
            &headers[col],
            shown.join(", "),
            if bad.len() > 20 { ", ..." } else { "" }
        )));
    }

    let (stitched, offsets) = stitch(&values, &segments);
    let stitched_len = stitched.len();
    let signal = Signal::new(stitched, None, format!("{}:{}", path.display(), &headers[col]))?;
    let signal = signal.truncated_to_pow2();
    if signal.len() != stitched_len {
        log::warn!(
            "{}: {stitched_len} samples truncated to {}",
            path.display(),
            signal.len()
        );
    }
    let provenance = Provenance {
        path: path.display().to_string(),
        column: headers[col].to_string(),
        rows,
        segments,
        offsets,
        stitched_len,
        len: signal.len(),
        sha256: sha256_hex(signal.samples()),
    };
    log::info!(
        "ingested {} rows of `{}` from {}: {} segments, {} samples kept",
        provenance.rows,
        provenance.column,
        provenance.path,
        provenance.segments.len(),
        provenance.len
    );
    Ok(Ingested { signal, provenance })
}

//! CSV and sidecar files.
//!
//! Curves are written with 12 significant digits. Traces and estimates use
//! the shortest text that parses back to the same `f64`, so a written trace
//! reads back bit-for-bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::KeyValues;
use crate::elastica::ForceDisplacementCurve;
use crate::error::{Error, Result};
use crate::estimator::StiffnessEstimate;
use crate::trials::{ExposedLength, ForwardModel, TraceSample, TrialTrace};

pub const CURVE_HEADER: [&str; 6] = ["kappa", "slope0", "t_end", "P_N", "R_N", "end_shortening_m"];
pub const ESTIMATE_HEADER: [&str; 7] = ["trace_id", "E_t_Pa", "delta_i_m", "P_N", "contact_idx", "buckling_idx", "outlier"];

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e15)`.
pub fn fmt_exact(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Twelve significant digits in the style of C's `%.12g`.
pub fn fmt_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp) as usize;
    strip_zeros(&format!("{v:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, reason: reason.into() }
}

pub fn curve_csv(curve: &ForceDisplacementCurve) -> String {
    let mut out = CURVE_HEADER.join(",");
    out.push('\n');
    for p in &curve.points {
        let row = [p.kappa, p.slope0, p.t_end, p.p, p.r, p.end_shortening].map(fmt_sig12);
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_curve(path: &Path, curve: &ForceDisplacementCurve) -> Result<()> {
    write_file(path, &curve_csv(curve))
}

/// Per-peak average strain and wavelength shift along the branch.
///
/// Skips the bifurcation knot, which has no solved shape.
pub fn strain_csv(model: &ForwardModel) -> String {
    let n = model.layout.len();
    let mut header = vec!["kappa".to_string(), "end_shortening_m".into(), "P_N".into()];
    header.extend((1..=n).map(|i| format!("eps{i}")));
    header.extend((1..=n).map(|i| format!("dl{i}_pm")));
    let mut out = header.join(",");
    out.push('\n');
    for k in model.knots.iter().filter(|k| k.kappa.is_finite()) {
        let mut row = vec![k.kappa, k.end_shortening, k.p];
        row.extend(&k.strains);
        row.extend(k.strains.iter().map(|e| crate::fbg::wavelength_shift(*e, 0.0, &model.layout)));
        let row: Vec<String> = row.into_iter().map(fmt_sig12).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Reads a curve CSV written by [`write_curve`].
pub fn read_curve(path: &Path, ei: f64, length: f64) -> Result<ForceDisplacementCurve> {
    let mut rdr = open_csv(path)?;
    check_header(path, &mut rdr, &CURVE_HEADER)?;
    let mut points = Vec::new();
    for rec in rdr.records() {
        let (rec, line) = record(path, rec)?;
        let v = floats(path, line, &rec, CURVE_HEADER.len())?;
        points.push(crate::elastica::CurvePoint {
            kappa: v[0],
            slope0: v[1],
            t_end: v[2],
            p: v[3],
            r: v[4],
            end_shortening: v[5],
        });
    }
    Ok(ForceDisplacementCurve { ei, length, points, failures: vec![] })
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => parse_err(path, line.max(1), format!("{kind:?}")),
    }
}

fn check_header<R: std::io::Read>(path: &Path, rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_err(path, e))?;
    if header.is_empty() {
        return Err(parse_err(path, 1, "empty file, expected a header row"));
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(path, 1, format!("expected header `{}`", expected.join(","))));
    }
    Ok(())
}

fn record(path: &Path, rec: csv::Result<csv::StringRecord>) -> Result<(csv::StringRecord, u64)> {
    let rec = rec.map_err(|e| csv_err(path, e))?;
    let line = rec.position().map_or(0, |p| p.line());
    Ok((rec, line))
}

fn floats(path: &Path, line: u64, rec: &csv::StringRecord, n: usize) -> Result<Vec<f64>> {
    if rec.len() != n {
        return Err(parse_err(path, line, format!("expected {n} fields, found {}", rec.len())));
    }
    rec.iter().map(|f| number(path, line, f)).collect()
}

fn number(path: &Path, line: u64, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(path, line, format!("`{field}` is not a finite number"))),
    }
}

/// Sidecar path for a trace: `trial.csv` → `trial.meta`.
pub fn meta_path(trace: &Path) -> PathBuf {
    trace.with_extension("meta")
}

pub fn trace_csv(trace: &TrialTrace) -> String {
    let n = trace.samples.first().map_or(3, |s| s.d_lambda.len());
    let mut header = vec!["index".to_string(), "encoder_m".into()];
    header.extend((1..=n).map(|i| format!("dl{i}_pm")));
    header.push("force_N".into());
    let mut out = header.join(",");
    out.push('\n');
    for s in &trace.samples {
        let _ = write!(out, "{},{}", s.index, fmt_exact(s.encoder));
        for dl in &s.d_lambda {
            let _ = write!(out, ",{}", fmt_exact(*dl));
        }
        let _ = writeln!(out, ",{}", s.force.map(fmt_exact).unwrap_or_default());
    }
    out
}

/// Writes the trace CSV and its `.meta` sidecar.
pub fn write_trace(path: &Path, trace: &TrialTrace) -> Result<()> {
    write_file(path, &trace_csv(trace))?;
    write_file(&meta_path(path), &trace.meta.to_text())
}

/// Reads a trace and, when present, its sidecar.
///
/// The exposed length comes from the sidecar (`trace.length_mode`,
/// `trace.length_m`) or else from `fallback_length`.
pub fn read_trace(path: &Path, fallback_length: Option<f64>) -> Result<TrialTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let samples = parse_trace(path, &text)?;
    let mp = meta_path(path);
    let meta = if mp.exists() { KeyValues::load(&mp)? } else { KeyValues::default() };
    let length = match (meta.get("trace.length_mode"), meta.get("trace.length_m")) {
        (Some(mode), Some(_)) => {
            let l = meta.get_f64("trace.length_m")?;
            match mode {
                "fixed" => ExposedLength::Fixed(l),
                "advancing" => ExposedLength::Advancing { initial: l },
                other => return Err(Error::config("trace.length_mode", format!("unknown mode `{other}`"))),
            }
        }
        _ => ExposedLength::Fixed(fallback_length.ok_or_else(|| {
            Error::invalid(format!("{}: no beam length in sidecar and none configured", path.display()))
        })?),
    };
    Ok(TrialTrace { samples, length, meta })
}

/// Parses trace CSV text; errors name the offending line.
pub fn parse_trace(path: &Path, text: &str) -> Result<Vec<TraceSample>> {
    if text.trim().is_empty() {
        return Err(parse_err(path, 1, "empty file, expected a header row"));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let n = cols.len().saturating_sub(3);
    let expected: Vec<String> = ["index".to_string(), "encoder_m".into()]
        .into_iter()
        .chain((1..=n).map(|i| format!("dl{i}_pm")))
        .chain(["force_N".to_string()])
        .collect();
    if n == 0 || cols != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(parse_err(path, 1, "expected header `index,encoder_m,dl1_pm,...,dlN_pm,force_N`"));
    }
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let (rec, line) = record(path, rec)?;
        if rec.len() != n + 3 {
            return Err(parse_err(path, line, format!("expected {} fields, found {}", n + 3, rec.len())));
        }
        let index: usize =
            rec[0].parse().map_err(|_| parse_err(path, line, format!("`{}` is not a sample index", &rec[0])))?;
        let encoder = number(path, line, &rec[1])?;
        let d_lambda = (0..n).map(|i| number(path, line, &rec[2 + i])).collect::<Result<Vec<_>>>()?;
        let force = match &rec[n + 2] {
            "" => None,
            f => Some(number(path, line, f)?),
        };
        samples.push(TraceSample { index, encoder, d_lambda, force });
    }
    if samples.is_empty() {
        return Err(parse_err(path, 2, "trace has a header but no samples"));
    }
    Ok(samples)
}

pub fn estimates_csv(rows: &[(String, Result<StiffnessEstimate>)]) -> String {
    let mut out = ESTIMATE_HEADER.join(",");
    out.push('\n');
    for (id, est) in rows {
        if let Ok(e) = est {
            let _ = writeln!(
                out,
                "{id},{},{},{},{},{},{}",
                fmt_exact(e.e_t),
                fmt_exact(e.delta_i),
                fmt_exact(e.p),
                e.contact_index,
                e.buckling_index,
                e.outlier
            );
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text)
}

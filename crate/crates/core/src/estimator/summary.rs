//! Per-sample statistics over repeated trials.

use std::fmt::Write as _;

use super::StiffnessEstimate;

/// Root-mean-square error of `values` against `actual`.
pub fn rmse(values: &[f64], actual: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let ss: f64 = values.iter().map(|v| (v - actual).powi(2)).sum();
    Some((ss / values.len() as f64).sqrt())
}

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| quantile(&sorted(values), 0.5))
}

/// Interquartile range `Q3 − Q1`.
pub fn iqr(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let s = sorted(values);
    Some(quantile(&s, 0.75) - quantile(&s, 0.25))
}

/// Statistics of one tissue sample over its trials, outliers excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub label: String,
    /// Median of the retained estimates (Pa).
    pub estimated: Option<f64>,
    pub actual: Option<f64>,
    pub rmse: Option<f64>,
    pub iqr: Option<f64>,
    pub used: usize,
    pub outliers: usize,
}

pub fn summarize(label: &str, estimates: &[StiffnessEstimate], actual: Option<f64>) -> SampleSummary {
    let kept: Vec<f64> = estimates.iter().filter(|e| !e.outlier).map(|e| e.e_t).collect();
    SampleSummary {
        label: label.to_string(),
        estimated: median(&kept),
        actual,
        rmse: actual.and_then(|a| rmse(&kept, a)),
        iqr: iqr(&kept),
        used: kept.len(),
        outliers: estimates.len() - kept.len(),
    }
}

fn kpa(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{:.2}", x / 1e3))
}

/// Plain-text table in kPa, one row per sample, followed by the mean RMSE.
pub fn format_summary(rows: &[SampleSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>16} {:>16} {:>12} {:>12} {:>5} {:>8}",
        "Sample", "E_t est. (KPa)", "E_t actual (KPa)", "RMSE (KPa)", "IQR (KPa)", "n", "outliers"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} {:>16} {:>16} {:>12} {:>12} {:>5} {:>8}",
            r.label,
            kpa(r.estimated),
            kpa(r.actual),
            kpa(r.rmse),
            kpa(r.iqr),
            r.used,
            r.outliers
        );
    }
    let rmses: Vec<f64> = rows.iter().filter_map(|r| r.rmse).collect();
    if !rmses.is_empty() {
        let mean = rmses.iter().sum::<f64>() / rmses.len() as f64;
        let _ = writeln!(out, "mean RMSE (KPa): {:.2}", mean / 1e3);
    }
    out
}

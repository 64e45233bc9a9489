//! Report files: one JSON document per chain evaluation, a flat CSV of all
//! rows and the console summary of a report directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{ChainId, ChainReport, Side};

/// Column order of the CSV output.
pub const CSV_COLUMNS: [&str; 24] = [
    "chain",
    "function",
    "n",
    "alpha",
    "dilation",
    "resolution",
    "left",
    "left_error",
    "middle",
    "middle_error",
    "right",
    "right_error",
    "slack_1",
    "slack_2",
    "tolerance_1",
    "tolerance_2",
    "residual_1",
    "residual_2",
    "expected_equality",
    "equality_threshold",
    "equality_residual",
    "diverging",
    "pass",
    "notes",
];

/// `<chain>__<function>__<a{α}|d{c}>`
pub fn report_stem(r: &ChainReport) -> String {
    let param = match r.alpha {
        Some(a) => format!("a{a}"),
        None => format!("d{}", r.dilation),
    };
    format!("{}__{}__{}", r.chain.name(), r.function, param)
}

pub fn write_json(dir: &Path, r: &ChainReport) -> Result<PathBuf> {
    let path = dir.join(format!("{}.json", report_stem(r)));
    let mut text = serde_json::to_string_pretty(r)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn nth(v: &[f64], i: usize) -> String {
    opt(v.get(i).copied())
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
        Side::Both => "both",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row(r: &ChainReport) -> String {
    let fields = [
        r.chain.name().to_string(),
        csv_field(&r.function),
        r.n.to_string(),
        opt(r.alpha),
        r.dilation.to_string(),
        r.resolution.to_string(),
        r.left.value.to_string(),
        r.left.error.to_string(),
        opt(r.middle.map(|t| t.value)),
        opt(r.middle.map(|t| t.error)),
        r.right.value.to_string(),
        r.right.error.to_string(),
        nth(&r.slacks, 0),
        nth(&r.slacks, 1),
        nth(&r.tolerances, 0),
        nth(&r.tolerances, 1),
        nth(&r.residuals, 0),
        nth(&r.residuals, 1),
        r.expected_equality
            .map(|e| side_name(e.side))
            .unwrap_or("")
            .to_string(),
        opt(r.expected_equality.map(|e| e.threshold)),
        opt(r.equality_residual()),
        r.diverging.to_string(),
        r.pass.to_string(),
        csv_field(&r.notes.join("; ")),
    ];
    fields.join(",")
}

/// Rows sorted by (chain, function, α, dilation), so the file depends only on the values.
pub fn csv_document(reports: &[ChainReport]) -> String {
    let mut sorted: Vec<&ChainReport> = reports.iter().collect();
    sorted.sort_by(|a, b| {
        (a.chain, &a.function)
            .cmp(&(b.chain, &b.function))
            .then(a.alpha.unwrap_or(0.0).total_cmp(&b.alpha.unwrap_or(0.0)))
            .then(a.dilation.total_cmp(&b.dilation))
    });
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in sorted {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, reports: &[ChainReport]) -> Result<()> {
    fs::write(path, csv_document(reports)).map_err(|e| Error::io(path, e))
}

/// Reports found in a directory, plus the files that could not be read.
#[derive(Debug, Default)]
pub struct Loaded {
    pub reports: Vec<(PathBuf, ChainReport)>,
    pub errors: Vec<(PathBuf, String)>,
}

/// Reads every `*.json` file in `dir` as a ChainReport.
pub fn load_reports(dir: &Path) -> Result<Loaded> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Loaded::default();
    for p in paths {
        let parsed = fs::read_to_string(&p)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str::<ChainReport>(&s).map_err(|e| e.to_string()));
        match parsed {
            Ok(r) => out.reports.push((p, r)),
            Err(e) => out.errors.push((p, e)),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub chain: ChainId,
    pub total: usize,
    pub passed: usize,
    pub diverging: usize,
    /// Smallest slack over all steps and reports.
    pub worst_slack: f64,
    /// Largest residual among steps expected to be equalities.
    pub max_equality_residual: Option<f64>,
}

pub fn summarize<'a>(reports: impl IntoIterator<Item = &'a ChainReport>) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<ChainId, SummaryRow> = BTreeMap::new();
    for r in reports {
        let row = rows.entry(r.chain).or_insert(SummaryRow {
            chain: r.chain,
            total: 0,
            passed: 0,
            diverging: 0,
            worst_slack: f64::INFINITY,
            max_equality_residual: None,
        });
        row.total += 1;
        row.passed += r.pass as usize;
        row.diverging += r.diverging as usize;
        row.worst_slack = r.slacks.iter().copied().fold(row.worst_slack, f64::min);
        if let Some(e) = r.equality_residual() {
            row.max_equality_residual =
                Some(row.max_equality_residual.map_or(e, |m: f64| m.max(e)));
        }
    }
    rows.into_values().collect()
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>6} {:>6} {:>9} {:>13} {:>13}",
        "chain", "total", "pass", "diverging", "worst slack", "max eq. res."
    );
    for r in rows {
        let res = r
            .max_equality_residual
            .map_or("-".to_string(), |v| format!("{v:.3e}"));
        let _ = writeln!(
            s,
            "{:<20} {:>6} {:>6} {:>9} {:>13.3e} {:>13}",
            r.chain.name(),
            r.total,
            r.passed,
            r.diverging,
            r.worst_slack,
            res
        );
    }
    s
}

//! Structured probe reports and their JSON/markdown emission.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::metrics::MetricsRow;

pub const REPORT_SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    /// Answer-location accuracy of the random baseline and the factored
    /// probes, per dataset.
    AnswerLocation,
    /// No-context candidate scoring.
    NoContext,
    /// Multiple-choice accuracy of the full models (and Span2MC).
    MultipleChoice,
    /// Span EM/F1 of the full models.
    Span,
    /// Accuracy versus option count.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSection {
    pub kind: SectionKind,
    pub title: String,
    pub rows: Vec<MetricsRow>,
}

/// The full probe-suite result. Reports with the same seed and
/// configuration are identical except for `created_at`, which the suite
/// leaves unset and the CLI fills at write time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema_version: u64,
    pub seed: u64,
    pub config_hash: String,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
    pub sections: Vec<ReportSection>,
    /// Per-cell failures that did not stop the suite.
    #[serde(default)]
    pub failures: Vec<String>,
}

impl ProbeReport {
    pub fn section(&self, kind: SectionKind) -> Option<&ReportSection> {
        self.sections.iter().find(|s| s.kind == kind)
    }
}

/// Writes `report.json` and `report.md` into `dir`.
pub fn emit_report(report: &ProbeReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join("report.json");
    let payload = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Data(format!("report serialization: {e}")))?;
    std::fs::write(&json_path, payload).map_err(|e| Error::io(&json_path, e))?;

    let md_path = dir.join("report.md");
    std::fs::write(&md_path, render_markdown(report)).map_err(|e| Error::io(&md_path, e))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ProbeReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: ProbeReport =
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("bad report: {e}")))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: report.schema_version,
            expected: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(report)
}

/// Markdown rendering: the answer-location section pivots to a
/// model × dataset grid; other sections are flat tables. Values are
/// printed with four decimals.
pub fn render_markdown(report: &ProbeReport) -> String {
    let mut out = String::new();
    out.push_str("# Probe report\n\n");
    out.push_str(&format!(
        "- seed: {}\n- config hash: `{}`\n- mode: {}\n",
        report.seed, report.config_hash, report.mode
    ));
    if let Some(ts) = &report.created_at {
        out.push_str(&format!("- created: {ts}\n"));
    }
    out.push('\n');

    for section in &report.sections {
        out.push_str(&format!("## {}\n\n", section.title));
        match section.kind {
            SectionKind::AnswerLocation => render_pivot(&mut out, &section.rows),
            _ => render_flat(&mut out, &section.rows),
        }
        out.push('\n');
    }
    if !report.failures.is_empty() {
        out.push_str("## Failures\n\n");
        for f in &report.failures {
            out.push_str(&format!("- {f}\n"));
        }
    }
    out
}

fn fmt_value(v: f64) -> String {
    format!("{v:.4}")
}

fn render_pivot(out: &mut String, rows: &[MetricsRow]) {
    let datasets: BTreeSet<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    let models: Vec<&str> = {
        let mut seen = Vec::new();
        for r in rows {
            if !seen.contains(&r.model.as_str()) {
                seen.push(r.model.as_str());
            }
        }
        seen
    };
    out.push_str("| Model |");
    for d in &datasets {
        out.push_str(&format!(" {d} |"));
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in &datasets {
        out.push_str("---|");
    }
    out.push('\n');
    for m in models {
        out.push_str(&format!("| {m} |"));
        for d in &datasets {
            let cell = rows
                .iter()
                .find(|r| r.model == m && r.dataset == *d && r.metric == "accuracy")
                .map(|r| fmt_value(r.value))
                .unwrap_or_else(|| "—".to_string());
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
}

fn render_flat(out: &mut String, rows: &[MetricsRow]) {
    out.push_str("| Model | Dataset | Split | Metric | Value | Evaluated | Skipped |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for r in rows {
        let skipped: usize = r.skipped.values().sum();
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.model,
            r.dataset,
            r.split,
            r.metric,
            fmt_value(r.value),
            r.evaluated,
            skipped
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ProbeReport {
        ProbeReport {
            schema_version: REPORT_SCHEMA_VERSION,
            seed: 7,
            config_hash: "abc123".into(),
            mode: "desk".into(),
            created_at: None,
            sections: vec![ReportSection {
                kind: SectionKind::Sweep,
                title: "Accuracy vs option count".into(),
                rows: vec![MetricsRow::new("nocontext", "synth-mc10", "dev", "accuracy", 0.59375)],
            }],
            failures: vec![],
        }
    }

    #[test]
    fn empty_report_renders_and_round_trips() {
        let report = ProbeReport {
            schema_version: REPORT_SCHEMA_VERSION,
            seed: 0,
            config_hash: "0".into(),
            mode: "desk".into(),
            created_at: None,
            sections: vec![],
            failures: vec![],
        };
        let json = serde_json::to_string(&report).unwrap();
        let back: ProbeReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
        assert!(render_markdown(&report).contains("# Probe report"));
    }

    #[test]
    fn json_round_trip_preserves_rows() {
        let report = sample_report();
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: ProbeReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn markdown_cells_match_json_values_to_two_decimals() {
        let report = sample_report();
        let md = render_markdown(&report);
        let value = report.sections[0].rows[0].value;
        // find the rendered number and compare
        let rendered: f64 = md
            .lines()
            .find(|l| l.contains("nocontext"))
            .and_then(|l| l.split('|').nth(5))
            .and_then(|c| c.trim().parse().ok())
            .expect("value cell present");
        assert!((rendered - value).abs() < 0.005);
    }
}

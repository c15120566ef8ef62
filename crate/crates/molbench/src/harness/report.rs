//! Report emission: JSON (round-trippable), CSV and a markdown table in the
//! Training / Validation / Test layout.

use super::{BenchmarkReport, HarnessError, MeanStd, Stage};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format '{other}'")),
        }
    }
}

fn fmt_mean_std(ms: &Option<MeanStd>) -> String {
    match ms {
        Some(ms) => format!("{:.4} ± {:.4}", ms.mean, ms.std),
        None => "—".to_string(),
    }
}

/// Render the JSON form (stable field order via serde struct order).
pub fn render_json(report: &BenchmarkReport) -> Result<String, HarnessError> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| HarnessError::Stage {
            stage: Stage::Report,
            message: e.to_string(),
        })
}

/// Rows: one per (subset, repeat) plus three summary rows.
pub fn render_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("subset,repeat,seed,metric,value,std\n");
    for (i, rep) in report.repeats.iter().enumerate() {
        for (subset, value) in [
            ("train", &rep.train),
            ("valid", &rep.valid),
            ("test", &rep.test),
        ] {
            let v = value
                .as_ref()
                .map(|m| format!("{}", m.mean))
                .unwrap_or_default();
            out.push_str(&format!(
                "{subset},{i},{},{},{v},\n",
                rep.seed, report.metric
            ));
        }
    }
    for (subset, ms) in [
        ("train", &report.summary.train),
        ("valid", &report.summary.valid),
        ("test", &report.summary.test),
    ] {
        let (mean, std) = ms
            .as_ref()
            .map(|m| (format!("{}", m.mean), format!("{}", m.std)))
            .unwrap_or_default();
        out.push_str(&format!(
            "{subset},summary,,{},{mean},{std}\n",
            report.metric
        ));
    }
    out
}

/// Markdown table mirroring the paper-style Training/Validation/Test
/// columns.
pub fn render_markdown(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "### {} — {} ({} split, {} repeats)\n\n",
        report.dataset, report.model, report.split, report.n_repeats
    ));
    out.push_str("| Model | Metric | Training | Validation | Test |\n");
    out.push_str("|---|---|---|---|---|\n");
    out.push_str(&format!(
        "| {} ({}) | {} | {} | {} | {} |\n",
        report.model,
        report.featurizer,
        report.metric,
        fmt_mean_std(&report.summary.train),
        fmt_mean_std(&report.summary.valid),
        fmt_mean_std(&report.summary.test),
    ));
    out
}

/// Write a report to `path` in the requested format.
pub fn emit_report(
    report: &BenchmarkReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), HarnessError> {
    let text = match format {
        ReportFormat::Json => render_json(report)?,
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    };
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::Stage {
        stage: Stage::Report,
        message: format!("{}: {e}", path.display()),
    })?;
    f.write_all(text.as_bytes()).map_err(|e| HarnessError::Stage {
        stage: Stage::Report,
        message: e.to_string(),
    })
}

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{BenchReport, BenchRow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Markdown,
    Csv,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [
        ReportFormat::Json,
        ReportFormat::Markdown,
        ReportFormat::Csv,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Json => "report.json",
            ReportFormat::Markdown => "report.md",
            ReportFormat::Csv => "report.csv",
        }
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn dash_if_empty(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Performance grid, dominance and spurious grid, then the top interactions of
/// every model.
pub fn render_markdown(report: &BenchReport) -> String {
    let mut md = String::from("# Benchmark report\n\n## Performance\n\n");
    md.push_str("| Dataset | Pipeline | # Feat | F1 | Accuracy | Time (sec) |\n");
    md.push_str("|---|---|---:|---:|---:|---:|\n");
    for row in &report.rows {
        match &row.outcome {
            Some(o) => writeln!(
                md,
                "| {} | {} | {} | {} | {} | {:.2} |",
                row.dataset,
                row.pipeline,
                o.eval.n_features,
                pct(o.eval.f1),
                pct(o.eval.accuracy),
                o.eval.fit_seconds
            ),
            None => writeln!(
                md,
                "| {} | {} | failed | - | - | - |",
                row.dataset, row.pipeline
            ),
        }
        .expect("writing to a String cannot fail");
    }

    md.push_str("\n## Feature dominance and spurious interactions\n\n");
    md.push_str("| Dataset | Pipeline | Feature Dominance | Spurious Interactions |\n");
    md.push_str("|---|---|---|---:|\n");
    for row in &report.rows {
        let (dom, spur) = match &row.outcome {
            Some(o) => (
                dash_if_empty(&o.dominance.summary).to_string(),
                if o.spurious.count == 0 {
                    "-".to_string()
                } else {
                    o.spurious.count.to_string()
                },
            ),
            None => ("failed".into(), "-".into()),
        };
        writeln!(
            md,
            "| {} | {} | {} | {} |",
            row.dataset, row.pipeline, dom, spur
        )
        .expect("writing to a String cannot fail");
    }

    md.push_str("\n## Top interactions\n");
    for row in report.rows.iter().filter(|r| r.succeeded()) {
        let o = row.outcome.as_ref().expect("filtered on success");
        writeln!(md, "\n### {} / {}\n", row.dataset, row.pipeline).expect("infallible");
        if o.dominance.top_pairs.is_empty() {
            md.push_str("No interaction terms.\n");
            continue;
        }
        md.push_str("| Interaction | Importance |\n|---|---:|\n");
        for p in &o.dominance.top_pairs {
            writeln!(md, "| {} | {} |", escape_cell(&p.name), p.importance).expect("infallible");
        }
    }

    let failed: Vec<&BenchRow> = report.rows.iter().filter(|r| !r.succeeded()).collect();
    if !failed.is_empty() {
        md.push_str("\n## Failed rows\n\n");
        for r in failed {
            writeln!(
                md,
                "- {} / {}: {}",
                r.dataset,
                r.pipeline,
                r.error.as_deref().unwrap_or("unknown error")
            )
            .expect("infallible");
        }
    }
    md
}

pub fn render_csv(report: &BenchReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "pipeline",
        "status",
        "n_features",
        "f1",
        "accuracy",
        "fit_seconds",
        "tp",
        "fp",
        "tn",
        "fn",
        "dominance",
        "spurious_count",
        "error",
    ])?;
    for row in &report.rows {
        let record: Vec<String> = match &row.outcome {
            Some(o) => {
                let c = &o.eval.confusion;
                vec![
                    row.dataset.clone(),
                    row.pipeline.clone(),
                    "ok".into(),
                    o.eval.n_features.to_string(),
                    o.eval.f1.to_string(),
                    o.eval.accuracy.to_string(),
                    o.eval.fit_seconds.to_string(),
                    c.tp.to_string(),
                    c.fp.to_string(),
                    c.tn.to_string(),
                    c.fn_.to_string(),
                    o.dominance.summary.clone(),
                    o.spurious.count.to_string(),
                    String::new(),
                ]
            }
            None => {
                let mut v = vec![row.dataset.clone(), row.pipeline.clone(), "failed".into()];
                v.extend(std::iter::repeat_n(String::new(), 10));
                v.push(row.error.clone().unwrap_or_default());
                v
            }
        };
        w.write_record(&record)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Write the requested report files plus one `model_<dataset>__<pipeline>.json`
/// importance dump per successful row. Returns the paths written.
pub fn emit_report(
    report: &BenchReport,
    formats: &[ReportFormat],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(Error::invalid("report has no rows"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for &format in formats {
        let contents = match format {
            ReportFormat::Json => report.to_json()? + "\n",
            ReportFormat::Markdown => render_markdown(report),
            ReportFormat::Csv => render_csv(report)?,
        };
        written.push(write(out_dir.join(format.file_name()), &contents)?);
    }
    for row in &report.rows {
        if let Some(o) = &row.outcome {
            let path = out_dir.join(format!("model_{}.json", row.label()));
            written.push(write(
                path,
                &(serde_json::to_string_pretty(&o.importance)? + "\n"),
            )?);
        }
    }
    Ok(written)
}

//! Leaderboards from several reports on the same benchmark.

use std::fmt::Write as _;
use std::path::Path;

use darijakit_core::textnorm::NormalizationConfig;
use serde::{Deserialize, Serialize};

use crate::run::BenchReport;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub model_id: String,
    pub micro_cer: Option<f64>,
    pub micro_wer: Option<f64>,
    pub macro_cer: Option<f64>,
    pub macro_wer: Option<f64>,
    pub scored: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub benchmark_id: String,
    pub manifest_digest: String,
    /// Ranking metric; lower is better.
    pub metric: String,
    pub normalization: NormalizationConfig,
    pub rows: Vec<LeaderboardRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub label: String,
    pub value: f64,
}

/// Bar-plot description consumed by [`render_svg`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub bars: Vec<Bar>,
}

/// Ranks reports by micro CER, ascending; ties break on model id. Reports
/// with nothing scored go last.
pub fn compare(reports: &[BenchReport]) -> Result<Leaderboard, BenchError> {
    let first = reports.first().ok_or(BenchError::NoReports)?;
    for r in &reports[1..] {
        if r.benchmark.manifest_digest != first.benchmark.manifest_digest {
            return Err(BenchError::MismatchedBenchmark {
                expected: first.benchmark.manifest_digest.clone(),
                found: r.benchmark.manifest_digest.clone(),
                model_id: r.model_id.clone(),
            });
        }
        if r.normalization != first.normalization {
            return Err(BenchError::MismatchedNormalization { model_id: r.model_id.clone() });
        }
    }
    let mut rows: Vec<LeaderboardRow> = reports
        .iter()
        .map(|r| LeaderboardRow {
            rank: 0,
            model_id: r.model_id.clone(),
            micro_cer: r.aggregate.as_ref().map(|a| a.micro_cer),
            micro_wer: r.aggregate.as_ref().map(|a| a.micro_wer),
            macro_cer: r.aggregate.as_ref().map(|a| a.macro_cer),
            macro_wer: r.aggregate.as_ref().map(|a| a.macro_wer),
            scored: r.cards.len(),
            excluded: r.excluded.len(),
        })
        .collect();
    rows.sort_by(|a, b| match (a.micro_cer, b.micro_cer) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.model_id.cmp(&b.model_id)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.model_id.cmp(&b.model_id),
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(Leaderboard {
        benchmark_id: first.benchmark.id.clone(),
        manifest_digest: first.benchmark.manifest_digest.clone(),
        metric: "micro_cer".into(),
        normalization: first.normalization.clone(),
        rows,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl Leaderboard {
    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("leaderboard serializes");
        v.push(b'\n');
        v
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "model_id", "micro_cer", "micro_wer", "macro_cer", "macro_wer", "scored", "excluded"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.rank.to_string(),
                r.model_id.clone(),
                cell(r.micro_cer),
                cell(r.micro_wer),
                cell(r.macro_cer),
                cell(r.macro_wer),
                r.scored.to_string(),
                r.excluded.to_string(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("## {} (lower CER is better)\n\n", self.benchmark_id);
        s.push_str("| Rank | Model | CER | WER | Macro CER | Macro WER | Scored | Excluded |\n");
        s.push_str("|---:|---|---:|---:|---:|---:|---:|---:|\n");
        let pct = |v: Option<f64>| v.map(|x| format!("{:.2}%", x * 100.0)).unwrap_or_else(|| "n/a".into());
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                r.rank,
                r.model_id.replace('|', "\\|"),
                pct(r.micro_cer),
                pct(r.micro_wer),
                pct(r.macro_cer),
                pct(r.macro_wer),
                r.scored,
                r.excluded
            );
        }
        let _ = writeln!(s, "\nManifest digest `{}`.", self.manifest_digest);
        s
    }

    pub fn plot(&self) -> PlotSpec {
        PlotSpec {
            kind: "bar".into(),
            title: format!("{}: character error rate", self.benchmark_id),
            x_label: "CER (%)".into(),
            y_label: "model".into(),
            bars: self
                .rows
                .iter()
                .filter_map(|r| r.micro_cer.map(|v| Bar { label: r.model_id.clone(), value: v * 100.0 }))
                .collect(),
        }
    }

    /// Picks the format from the extension: csv, json, md or svg.
    pub fn write(&self, path: &Path) -> Result<(), BenchError> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let bytes = match ext.as_str() {
            "csv" => self.to_csv(),
            "json" => self.to_json(),
            "md" => self.to_markdown().into_bytes(),
            "svg" => render_svg(&self.plot()).into_bytes(),
            other => return Err(BenchError::InvalidConfig(format!("unknown leaderboard format `.{other}` (csv, json, md, svg)"))),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| BenchError::Io { path: parent.to_path_buf(), source })?;
        }
        darijakit_core::dataset::write_atomic(path, &bytes)?;
        Ok(())
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Horizontal bar chart, one bar per entry in order.
pub fn render_svg(plot: &PlotSpec) -> String {
    const ROW: f64 = 28.0;
    const LABEL_W: f64 = 260.0;
    const BAR_W: f64 = 420.0;
    let top = 48.0;
    let height = top + ROW * plot.bars.len() as f64 + 40.0;
    let width = LABEL_W + BAR_W + 90.0;
    let max = plot.bars.iter().map(|b| b.value).fold(0.0_f64, f64::max).max(1e-9);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, width / 2.0, esc(&plot.title));
    for (i, b) in plot.bars.iter().enumerate() {
        let y = top + ROW * i as f64;
        let w = (b.value / max * BAR_W).max(0.5);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LABEL_W - 8.0, y + ROW * 0.62, esc(&b.label));
        let _ = writeln!(s, r##"<rect x="{LABEL_W}" y="{}" width="{w:.2}" height="{}" fill="#4a78a8"/>"##, y + 4.0, ROW - 8.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}">{:.2}</text>"#, LABEL_W + w + 6.0, y + ROW * 0.62, b.value);
    }
    let axis_y = top + ROW * plot.bars.len() as f64 + 4.0;
    let _ = writeln!(s, r#"<line x1="{LABEL_W}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#, LABEL_W + BAR_W);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LABEL_W + BAR_W / 2.0, axis_y + 24.0, esc(&plot.x_label));
    s.push_str("</svg>\n");
    s
}

//! 80-column text histograms.

use std::fmt::Write;

use eraser_sim::{Histogram, RunResult};

pub const COLUMNS: usize = 80;

/// One line per bin: centre, count, and a bar scaled to the fullest bin.
pub fn render_histogram(hist: &Histogram) -> String {
    let max = hist.counts.iter().copied().max().unwrap_or(0).max(1);
    let mut out = String::new();
    for (i, &c) in hist.counts.iter().enumerate() {
        let label = format!("{:>+11.4e} {:>9} |", hist.bin_center(i), c);
        let room = COLUMNS.saturating_sub(label.len());
        let bar = ((c as f64 / max as f64) * room as f64).round() as usize;
        out.push_str(&label);
        out.push_str(&"#".repeat(bar.min(room)));
        out.push('\n');
    }
    out
}

/// All subset histograms of a run, or `None` if nothing was sampled.
pub fn render_run(name: &str, result: &RunResult) -> Option<String> {
    let mut out = String::new();
    for (subset, s) in &result.subsets {
        let Some(hist) = &s.histogram else { continue };
        let verdict = s
            .classification
            .map(|c| format!("{:?} (llr {:.1})", c.verdict, c.log_likelihood_ratio))
            .unwrap_or_else(|| "-".into());
        let vis = s
            .visibility
            .map(|v| format!("{v:.3}"))
            .unwrap_or_else(|| "-".into());
        let mut head = format!(
            "== {name} / {subset}: n={} verdict={verdict} visibility={vis}",
            s.count
        );
        head.truncate(COLUMNS);
        let _ = writeln!(out, "{head}");
        out.push_str(&render_histogram(hist));
        out.push('\n');
    }
    (!out.is_empty()).then_some(out)
}

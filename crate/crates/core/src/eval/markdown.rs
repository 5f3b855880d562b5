use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Bucket, EvalReport};

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

fn bucket_table(out: &mut String, title: &str, map: &BTreeMap<usize, Bucket>) {
    let _ = writeln!(out, "| {title} | samples | EM |\n|---:|---:|---:|");
    for (k, b) in map {
        let _ = writeln!(out, "| {k} | {} | {:.3} |", b.count, b.em);
    }
    out.push('\n');
}

/// Summary, breakdown, error and timing tables for a report.
pub fn report_markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    let score = match (report.score_mean, report.score_std) {
        (Some(m), Some(s)) => format!("{m:.3} ± {s:.4}"),
        _ => "n/a".into(),
    };
    let _ = writeln!(
        out,
        "## Accuracy\n\n| samples | EM | valid output | score | score (non-EM) |\n|---:|---:|---:|---:|---:|\n| {} | {} | {} | {} | {} |\n",
        report.count,
        opt(report.em_accuracy, 3),
        opt(report.valid_output_rate, 3),
        score,
        opt(report.non_em_score_mean, 3),
    );
    out.push_str("## Breakdown\n\n");
    bucket_table(
        &mut out,
        "hotel constraints",
        &report.breakdowns.by_hotel_constraints,
    );
    bucket_table(
        &mut out,
        "airline constraints",
        &report.breakdowns.by_airline_constraints,
    );
    bucket_table(&mut out, "cities", &report.breakdowns.by_cities);

    out.push_str("## Mismatched fields\n\n");
    if report.error_histogram.is_empty() {
        out.push_str("none\n\n");
    } else {
        let mut rows: Vec<_> = report.error_histogram.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        out.push_str("| field | count |\n|---|---:|\n");
        for (f, c) in rows {
            let _ = writeln!(out, "| {f} | {c} |");
        }
        out.push('\n');
    }
    if let Some(t) = &report.timings {
        let _ = writeln!(
            out,
            "## Timing ({} runs, ms)\n\n| phase | mean | std |\n|---|---:|---:|",
            t.repetitions
        );
        for (name, s) in [
            ("translate", &t.translate),
            ("load constraints", &t.load),
            ("solve", &t.solve),
            ("total (load + solve)", &t.total),
        ] {
            let _ = writeln!(out, "| {name} | {:.3} | {:.3} |", s.mean_ms, s.std_ms);
        }
    }
    out
}

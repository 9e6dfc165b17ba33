//! `report`: render any JSON report as human-readable text.
//!
//! Accepts the envelope any other subcommand emits and falls back to shape
//! detection for bare documents, so saved result objects render too. The
//! experiment view is a strategy-by-metric table with mean and standard
//! deviation over folds.

use std::path::PathBuf;

use clap::Args;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report produced by any splitgate subcommand
    pub file: PathBuf,
    /// Text output path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for a single value.
fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

fn render_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut line = String::from(" ");
    for (h, w) in header.iter().zip(&widths) {
        line.push_str(&format!(" {h:<w$}"));
    }
    out.push_str(line.trim_end());
    out.push('\n');
    for row in rows {
        let mut line = String::from(" ");
        for (cell, w) in row.iter().zip(&widths) {
            line.push_str(&format!(" {cell:<w$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn floats(value: &Value, key: &str) -> Option<Vec<f64>> {
    Some(
        value
            .get(key)?
            .as_array()?
            .iter()
            .filter_map(Value::as_f64)
            .collect(),
    )
}

fn strategy_row(name: &str, mccs: &[f64]) -> Vec<String> {
    let min = mccs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = mccs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    vec![
        name.to_string(),
        format!("{} ± {}", fmt(mean(mccs)), fmt(std_dev(mccs))),
        fmt(min),
        fmt(max),
    ]
}

fn render_experiment(result: &Value) -> Option<String> {
    let per_image = floats(result, "mcc_per_image")?;
    let per_group = floats(result, "mcc_per_group")?;
    if per_image.is_empty() || per_group.is_empty() {
        return None;
    }
    let mut out = String::new();
    let folds = result.pointer("/cv/folds").and_then(Value::as_u64);
    let repeats = result.pointer("/cv/repeats").and_then(Value::as_u64);
    let knn_k = result.get("knn_k").and_then(Value::as_u64);
    out.push_str("split-strategy comparison");
    if let (Some(f), Some(r)) = (folds, repeats) {
        out.push_str(&format!(" ({f}-fold x {r} repeats"));
        if let Some(k) = knn_k {
            out.push_str(&format!(", knn k={k}"));
        }
        out.push(')');
    }
    out.push_str("\n\n");
    render_table(
        &mut out,
        &["strategy", "mcc mean ± std", "min", "max"],
        &[
            strategy_row("per-image", &per_image),
            strategy_row("per-volume", &per_group),
        ],
    );
    let gap = result
        .get("mean_gap")
        .and_then(Value::as_f64)
        .unwrap_or(mean(&per_image) - mean(&per_group));
    out.push_str(&format!("\n  mean gap (per-image - per-volume): {}\n", fmt(gap)));
    if let Some(params) = result.get("params") {
        let grab = |k: &str| params.get(k).and_then(Value::as_u64);
        if let (Some(c), Some(v), Some(s)) = (
            grab("k_classes"),
            grab("volumes_per_class"),
            grab("slices_per_volume"),
        ) {
            let seed = params.get("seed").and_then(Value::as_u64).unwrap_or(0);
            out.push_str(&format!(
                "  corpus: {c} classes x {v} volumes x {s} slices, seed {seed}\n"
            ));
        }
    }
    Some(out)
}

fn render_overlap(result: &Value) -> Option<String> {
    let fraction = result.get("fraction").and_then(Value::as_f64)?;
    let overlap = result.get("overlap_count").and_then(Value::as_u64)?;
    let test = result.get("test_count").and_then(Value::as_u64)?;
    let mut out = String::new();
    let key = result
        .get("group_key")
        .and_then(Value::as_str)
        .unwrap_or("group");
    out.push_str(&format!("overlap audit on {key}\n\n"));
    out.push_str(&format!(
        "  {overlap} of {test} test images share a {key} with the training side\n"
    ));
    out.push_str(&format!("  overlap fraction: {}\n", fmt(fraction)));
    if let Some(groups) = result.get("shared_groups").and_then(Value::as_array) {
        out.push_str(&format!("  shared groups: {}\n", groups.len()));
    }
    if let Some(ungrouped) = result.get("ungrouped_test").and_then(Value::as_u64) {
        if ungrouped > 0 {
            out.push_str(&format!("  test images without a {key}: {ungrouped}\n"));
        }
    }
    Some(out)
}

fn render_dups(result: &Value) -> Option<String> {
    let exact = result.get("exact")?.as_array()?;
    let near = result.get("near")?.as_array()?;
    let mut out = String::new();
    out.push_str("duplicate audit\n\n");
    out.push_str(&format!("  exact byte-identical pairs: {}\n", exact.len()));
    out.push_str(&format!("  near-duplicate pairs:       {}\n", near.len()));
    if let Some(pairs) = result.get("pair_count").and_then(Value::as_u64) {
        out.push_str(&format!("  cross pairs considered:     {pairs}\n"));
    }
    if result.get("approximate").and_then(Value::as_bool) == Some(true) {
        out.push_str("  note: banded scan, recall not guaranteed above distance 3\n");
    }
    for pair in near.iter().take(5) {
        if let (Some(a), Some(b), Some(d)) = (
            pair.get("train_id").and_then(Value::as_str),
            pair.get("test_id").and_then(Value::as_str),
            pair.get("distance").and_then(Value::as_u64),
        ) {
            out.push_str(&format!("    {a} ~ {b} (distance {d})\n"));
        }
    }
    if near.len() > 5 {
        out.push_str(&format!("    ... {} more\n", near.len() - 5));
    }
    Some(out)
}

fn render_metrics(result: &Value) -> Option<String> {
    let metrics = result.get("metrics").unwrap_or(result);
    let mcc = metrics.get("mcc").and_then(Value::as_f64)?;
    let accuracy = metrics.get("accuracy").and_then(Value::as_f64)?;
    let mut out = String::new();
    out.push_str("evaluation\n\n");
    if let Some(samples) = result.get("samples").and_then(Value::as_u64) {
        out.push_str(&format!("  samples: {samples}\n"));
    }
    out.push_str(&format!("  mcc:              {}\n", fmt(mcc)));
    out.push_str(&format!("  accuracy:         {}\n", fmt(accuracy)));
    if let Some(avg) = metrics.get("average_accuracy").and_then(Value::as_f64) {
        out.push_str(&format!("  average accuracy: {}\n", fmt(avg)));
    }
    if let Some(auc) = metrics.get("macro_auc").and_then(Value::as_f64) {
        out.push_str(&format!("  macro auc:        {}\n", fmt(auc)));
    }
    if let Some(per_class) = metrics.get("per_class").and_then(Value::as_array) {
        out.push('\n');
        let names: Vec<String> = match result.get("class_names").and_then(Value::as_array) {
            Some(names) => names
                .iter()
                .map(|n| n.as_str().unwrap_or("?").to_string())
                .collect(),
            None => (0..per_class.len()).map(|i| format!("class {i}")).collect(),
        };
        let rows: Vec<Vec<String>> = per_class
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let cell = |k: &str| {
                    c.get(k)
                        .and_then(Value::as_f64)
                        .map(fmt)
                        .unwrap_or_else(|| "-".to_string())
                };
                vec![
                    names.get(i).cloned().unwrap_or_else(|| format!("class {i}")),
                    cell("precision"),
                    cell("recall"),
                    cell("f1"),
                    cell("accuracy"),
                ]
            })
            .collect();
        render_table(
            &mut out,
            &["class", "precision", "recall", "f1", "accuracy"],
            &rows,
        );
    }
    Some(out)
}

fn render_probe(result: &Value) -> Option<String> {
    let probe = result.get("probe").unwrap_or(result);
    let wilcoxon = probe.get("wilcoxon_p").and_then(Value::as_f64)?;
    let empirical = probe.get("empirical_p").and_then(Value::as_f64)?;
    let mut out = String::new();
    out.push_str("leakage probe\n\n");
    if let Some(observed) = probe.get("observed_mcc").and_then(Value::as_f64) {
        out.push_str(&format!("  observed mcc: {}\n", fmt(observed)));
    }
    out.push_str(&format!("  wilcoxon p:   {wilcoxon:.6}\n"));
    out.push_str(&format!("  empirical p:  {empirical:.6}\n"));
    if let Some(alpha) = probe.get("alpha").and_then(Value::as_f64) {
        out.push_str(&format!("  alpha:        {alpha}\n"));
    }
    match probe.get("flagged").and_then(Value::as_bool) {
        Some(true) => out.push_str("  verdict:      FLAGGED as leakage-suspect\n"),
        Some(false) => out.push_str("  verdict:      not flagged\n"),
        None => {}
    }
    Some(out)
}

fn render_null(result: &Value) -> Option<String> {
    let iters = result.get("iters").and_then(Value::as_u64)?;
    let samples = floats(result, "samples")?;
    if samples.is_empty() {
        return None;
    }
    let mut out = String::new();
    out.push_str("random-label null distribution\n\n");
    let n_test = result.get("n_test").and_then(Value::as_u64).unwrap_or(0);
    out.push_str(&format!("  iterations: {iters}, test size {n_test}\n"));
    out.push_str(&format!("  mean mcc: {}\n", fmt(mean(&samples))));
    out.push_str(&format!("  std:      {}\n", fmt(std_dev(&samples))));
    if let Some(summary) = result.get("summary") {
        if let Some(p99) = summary.get("abs_p99").and_then(Value::as_f64) {
            out.push_str(&format!("  |mcc| p99: {}\n", fmt(p99)));
        }
    }
    Some(out)
}

fn render_split(result: &Value) -> Option<String> {
    let plan = result.get("plan").unwrap_or(result);
    let train = plan.get("train_ids")?.as_array()?;
    let test = plan.get("test_ids")?.as_array()?;
    let mut out = String::new();
    out.push_str("split plan\n\n");
    out.push_str(&format!(
        "  train {} / test {} images, seed {}\n",
        train.len(),
        test.len(),
        plan.get("seed").and_then(Value::as_u64).unwrap_or(0)
    ));
    if let Some(per_class) = plan.get("per_class").and_then(Value::as_object) {
        let rows: Vec<Vec<String>> = per_class
            .iter()
            .map(|(class, counts)| {
                let cell = |k: &str| {
                    counts
                        .get(k)
                        .and_then(Value::as_u64)
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "-".to_string())
                };
                vec![
                    class.clone(),
                    cell("total"),
                    cell("test_target"),
                    cell("test_actual"),
                ]
            })
            .collect();
        render_table(
            &mut out,
            &["class", "total", "test target", "test actual"],
            &rows,
        );
    }
    if let Some(audit) = result.get("audit") {
        if let Some(fraction) = audit.get("fraction").and_then(Value::as_f64) {
            out.push_str(&format!("\n  audited overlap fraction: {}\n", fmt(fraction)));
        }
    }
    Some(out)
}

fn render_cv(result: &Value) -> Option<String> {
    let assignments = result.get("assignments")?.as_array()?;
    let folds = result.get("folds").and_then(Value::as_u64)?;
    let repeats = result.get("repeats").and_then(Value::as_u64).unwrap_or(1);
    let mut out = String::new();
    out.push_str("cross-validation plan\n\n");
    out.push_str(&format!(
        "  {folds} folds x {repeats} repeats = {} held-out sets\n",
        assignments.len()
    ));
    let sizes: Vec<usize> = assignments
        .iter()
        .filter_map(|a| Some(a.get("test_ids")?.as_array()?.len()))
        .collect();
    if let (Some(min), Some(max)) = (sizes.iter().min(), sizes.iter().max()) {
        out.push_str(&format!("  fold sizes: {min}..{max} images\n"));
    }
    Some(out)
}

fn render_scan(result: &Value) -> Option<String> {
    let records = result.get("records").and_then(Value::as_u64)?;
    let mut out = String::new();
    out.push_str("dataset scan\n\n");
    out.push_str(&format!("  records: {records}\n"));
    if let Some(classes) = result.get("classes").and_then(Value::as_array) {
        let names: Vec<&str> = classes.iter().filter_map(Value::as_str).collect();
        out.push_str(&format!("  classes: {}\n", names.join(", ")));
    }
    if let Some(skipped) = result.get("skipped").and_then(Value::as_array) {
        if !skipped.is_empty() {
            out.push_str(&format!("  skipped files: {}\n", skipped.len()));
        }
    }
    if let Some(violations) = result.get("violations").and_then(Value::as_array) {
        for v in violations.iter().take(10) {
            if let Some(text) = v.as_str() {
                out.push_str(&format!("  violation: {text}\n"));
            }
        }
    }
    Some(out)
}

fn render_synth(result: &Value) -> Option<String> {
    let images = result.get("images").and_then(Value::as_u64)?;
    let params = result.get("params")?;
    let mut out = String::new();
    out.push_str("synthetic corpus\n\n");
    let grab = |k: &str| params.get(k).and_then(Value::as_u64).unwrap_or(0);
    out.push_str(&format!(
        "  {images} images: {} classes x {} volumes x {} slices\n",
        grab("k_classes"),
        grab("volumes_per_class"),
        grab("slices_per_volume")
    ));
    if let Some(path) = result.get("manifest_path").and_then(Value::as_str) {
        out.push_str(&format!("  manifest: {path}\n"));
    }
    Some(out)
}

/// Render by declared subcommand first, then by shape.
fn render(value: &Value) -> String {
    let result = value.get("result").unwrap_or(value);
    let declared = value.get("subcommand").and_then(Value::as_str);
    let rendered = match declared {
        Some("experiment") => render_experiment(result),
        Some("audit-overlap") => render_overlap(result),
        Some("audit-dups") => render_dups(result),
        Some("evaluate") => render_metrics(result),
        Some("probe") => render_probe(result),
        Some("null-test") => render_null(result),
        Some("split") => render_split(result),
        Some("cv-plan") => render_cv(result),
        Some("scan") => render_scan(result),
        Some("synth") => render_synth(result),
        _ => None,
    };
    let rendered = rendered
        .or_else(|| render_experiment(result))
        .or_else(|| render_probe(result))
        .or_else(|| render_null(result))
        .or_else(|| render_dups(result))
        .or_else(|| render_overlap(result))
        .or_else(|| render_split(result))
        .or_else(|| render_cv(result))
        .or_else(|| render_metrics(result))
        .or_else(|| render_synth(result))
        .or_else(|| render_scan(result));
    match rendered {
        Some(text) => text,
        None => format!(
            "unrecognized report shape; raw document:\n{}",
            serde_json::to_string_pretty(value).unwrap_or_default()
        ),
    }
}

pub fn run(args: &ReportArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.file).map_err(|e| {
        CliError::new("io", format!("reading {} failed: {e}", args.file.display()))
    })?;
    let value: Value = serde_json::from_str(&text)?;
    let mut rendered = render(&value);
    if !rendered.ends_with('\n') {
        rendered.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, rendered).map_err(|e| {
            CliError::new("io", format!("writing {} failed: {e}", path.display()))
        })?,
        None => print!("{rendered}"),
    }
    Ok(())
}

//! `evaluate`: score a predictions CSV into the full metric report.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::metrics::{evaluate, read_predictions, LabelMap};

use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions CSV: image_id,true_label,pred_label[,score_0..]
    #[arg(long)]
    pub predictions: PathBuf,
    /// Sidecar JSON mapping class names to label indices
    #[arg(long)]
    pub label_map: Option<PathBuf>,
    /// Class count; inferred from labels and score width when omitted
    #[arg(long)]
    pub classes: Option<usize>,
    /// Report path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> Result<(), CliError> {
    let predictions = read_predictions(&args.predictions)?;
    let inferred = predictions.label_count();
    let k = match args.classes {
        Some(k) if k < inferred => {
            return Err(CliError::new(
                "bad_flag",
                format!("--classes {k} is smaller than the {inferred} classes present"),
            ))
        }
        Some(k) => k,
        None => inferred,
    };
    let label_map = match &args.label_map {
        Some(path) => {
            let map = LabelMap::read_json(path)?;
            if map.classes.len() < k {
                return Err(CliError::new(
                    "bad_label_map",
                    format!(
                        "label map names {} classes but the evaluation has {k}",
                        map.classes.len()
                    ),
                ));
            }
            Some(map)
        }
        None => None,
    };

    let truth = predictions.truth();
    let pred = predictions.pred();
    let scores = predictions.scores();
    let report = evaluate(&truth, &pred, scores.as_deref(), k)?;

    let flags = flags_object(vec![
        (
            "predictions",
            json!(args.predictions.display().to_string()),
        ),
        (
            "label_map",
            json!(args.label_map.as_ref().map(|p| p.display().to_string())),
        ),
        ("classes", json!(k)),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    let result = json!({
        "samples": truth.len(),
        "classes": k,
        "class_names": label_map.map(|m| m.classes),
        "metrics": report,
    });
    write_document(args.out.as_deref(), &envelope("evaluate", flags, result))
}

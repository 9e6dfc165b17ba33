//! Resolving the train/test sides that audits compare.
//!
//! A side assignment comes either from a split plan JSON written by the
//! `split` subcommand (a bare plan or the full envelope both work) or from
//! `presplit` fields a scan picked up from train/val/test folders. In the
//! presplit case validation images count as training data, since the model
//! was tuned on them.

use std::path::Path;

use serde_json::{json, Value};
use splitgate_core::ingest::{Manifest, Split};

use crate::error::CliError;

pub struct Sides {
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Where the assignment came from, for the report.
    pub source: String,
}

fn ids_field(value: &Value, field: &str) -> Option<Vec<String>> {
    let items = value.get(field)?.as_array()?;
    let mut ids = Vec::with_capacity(items.len());
    for item in items {
        ids.push(item.as_str()?.to_string());
    }
    Some(ids)
}

fn plan_sides(value: &Value) -> Option<Sides> {
    let train_ids = ids_field(value, "train_ids")?;
    let test_ids = ids_field(value, "test_ids")?;
    Some(Sides {
        train_ids,
        test_ids,
        source: String::new(),
    })
}

/// Load train/test ids from a plan document.
pub fn load_plan_sides(path: &Path) -> Result<Sides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("reading {} failed: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)?;
    // accept a bare SplitPlan, an envelope, or an envelope's result object
    let found = plan_sides(&value)
        .or_else(|| plan_sides(value.get("result")?.get("plan")?))
        .or_else(|| plan_sides(value.get("result")?))
        .or_else(|| plan_sides(value.get("plan")?));
    match found {
        Some(mut sides) => {
            sides.source = format!("plan:{}", path.display());
            Ok(sides)
        }
        None => Err(CliError::new(
            "bad_plan",
            format!(
                "{} holds no train_ids/test_ids lists at a known location",
                path.display()
            ),
        )),
    }
}

/// Derive sides from presplit folder assignments in the manifest.
pub fn presplit_sides(manifest: &Manifest) -> Result<Sides, CliError> {
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    let mut unsplit = 0usize;
    for rec in manifest.records() {
        match rec.presplit {
            Some(Split::Train) | Some(Split::Val) => train_ids.push(rec.id.clone()),
            Some(Split::Test) => test_ids.push(rec.id.clone()),
            None => unsplit += 1,
        }
    }
    if train_ids.is_empty() || test_ids.is_empty() {
        return Err(CliError::new(
            "no_presplit",
            "the manifest does not assign records to both a train and a test side",
        )
        .with_context(json!({
            "train": train_ids.len(),
            "test": test_ids.len(),
            "unsplit": unsplit,
        })));
    }
    Ok(Sides {
        train_ids,
        test_ids,
        source: "presplit".to_string(),
    })
}

/// Pick the side source the flags ask for.
pub fn resolve_sides(
    manifest: &Manifest,
    plan: Option<&Path>,
    use_presplit: bool,
) -> Result<Sides, CliError> {
    match (plan, use_presplit) {
        (Some(path), false) => load_plan_sides(path),
        (None, true) => presplit_sides(manifest),
        _ => Err(CliError::new(
            "bad_flag",
            "exactly one of --plan and --use-presplit must be given",
        )),
    }
}

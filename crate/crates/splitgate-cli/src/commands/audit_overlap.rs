//! `audit-overlap`: measure group leakage between train and test sides.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::ingest::Manifest;
use splitgate_core::splitter::audit_overlap;

use crate::args::GroupKeyArg;
use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;
use crate::sides::resolve_sides;

#[derive(Debug, Args)]
pub struct AuditOverlapArgs {
    /// Manifest JSONL describing every image
    #[arg(long)]
    pub manifest: PathBuf,
    /// Split plan JSON naming the train and test ids
    #[arg(long, conflicts_with = "use_presplit")]
    pub plan: Option<PathBuf>,
    /// Take sides from presplit folders instead; val counts as train
    #[arg(long)]
    pub use_presplit: bool,
    /// Group identity to audit
    #[arg(long, value_enum)]
    pub group_key: GroupKeyArg,
    /// Exit 1 when the overlap fraction exceeds this bound
    #[arg(long)]
    pub fail_above: Option<f64>,
    /// Report path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &AuditOverlapArgs) -> Result<(), CliError> {
    let manifest = Manifest::read_jsonl(&args.manifest)?;
    let sides = resolve_sides(&manifest, args.plan.as_deref(), args.use_presplit)?;
    let report = audit_overlap(
        &manifest,
        &sides.train_ids,
        &sides.test_ids,
        args.group_key.to_core(),
    )?;

    let flags = flags_object(vec![
        ("manifest", json!(args.manifest.display().to_string())),
        (
            "plan",
            json!(args.plan.as_ref().map(|p| p.display().to_string())),
        ),
        ("use_presplit", json!(args.use_presplit)),
        ("group_key", json!(args.group_key.as_str())),
        ("fail_above", json!(args.fail_above)),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    let mut result = serde_json::to_value(&report)?;
    result["sides_from"] = json!(sides.source);
    result["train_count"] = json!(sides.train_ids.len());
    write_document(args.out.as_deref(), &envelope("audit-overlap", flags, result))?;

    if let Some(bound) = args.fail_above {
        if report.fraction > bound {
            return Err(CliError::new(
                "overlap_above_threshold",
                format!(
                    "overlap fraction {} exceeds the allowed {bound}",
                    report.fraction
                ),
            )
            .with_context(json!({
                "fraction": report.fraction,
                "fail_above": bound,
                "overlap_count": report.overlap_count,
            })));
        }
    }
    Ok(())
}

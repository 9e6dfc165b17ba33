//! `scan`: walk a dataset tree into a manifest JSONL file.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::ingest::{
    scan_dataset, validate_manifest, LayoutConfig, NamePattern, Violation,
};

use crate::args::{GroupKeyArg, LayoutArg, ModeArg, SourceArg};
use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Dataset root directory
    #[arg(long)]
    pub root: PathBuf,
    /// Directory layout under the root
    #[arg(long, value_enum, default_value = "class-subject")]
    pub layout: LayoutArg,
    /// Filename template such as "{class}-{subject}-{slice}"
    #[arg(long)]
    pub pattern: Option<String>,
    /// Where the class label comes from
    #[arg(long, value_enum, default_value = "folder")]
    pub class_from: SourceArg,
    /// Where the subject id comes from
    #[arg(long, value_enum, default_value = "folder")]
    pub subject_from: SourceArg,
    /// Comma-separated extension allow-list, overriding the default
    #[arg(long)]
    pub extensions: Option<String>,
    /// What to do with files that do not fit the layout
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    /// Record a violation for every image missing this group field
    #[arg(long, value_enum)]
    pub require_group: Option<GroupKeyArg>,
    /// Manifest JSONL output path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ScanArgs) -> Result<(), CliError> {
    let mut config = LayoutConfig::new(args.layout.to_core());
    if let Some(template) = &args.pattern {
        let pattern = NamePattern::parse(template)
            .map_err(|e| CliError::new("pattern", e.to_string()))?;
        config = config.with_pattern(pattern);
    }
    config.class_from = args.class_from.to_core();
    config.subject_from = args.subject_from.to_core();
    if let Some(list) = &args.extensions {
        config.extensions = list
            .split(',')
            .map(|e| e.trim().trim_start_matches('.').to_string())
            .filter(|e| !e.is_empty())
            .collect();
    }

    let outcome = scan_dataset(&args.root, &config, args.mode.to_core())?;
    let violations: Vec<String> =
        validate_manifest(&outcome.manifest, args.require_group.map(|g| g.to_core()), false)
            .iter()
            .map(Violation::to_string)
            .collect();
    outcome.manifest.write_jsonl(&args.out)?;

    let classes = outcome.manifest.classes();
    let flags = flags_object(vec![
        ("root", json!(args.root.display().to_string())),
        ("layout", json!(args.layout.as_str())),
        ("pattern", json!(args.pattern)),
        ("class_from", json!(args.class_from.as_str())),
        ("subject_from", json!(args.subject_from.as_str())),
        ("extensions", json!(config.extensions)),
        ("mode", json!(args.mode.as_str())),
        (
            "require_group",
            json!(args.require_group.map(|g| g.as_str())),
        ),
        ("out", json!(args.out.display().to_string())),
    ]);
    let result = json!({
        "records": outcome.manifest.len(),
        "classes": classes,
        "skipped": outcome.skipped,
        "ignored_extensions": outcome.ignored_extensions,
        "violations": violations,
        "manifest_path": args.out.display().to_string(),
    });
    write_document(None, &envelope("scan", flags, result))
}

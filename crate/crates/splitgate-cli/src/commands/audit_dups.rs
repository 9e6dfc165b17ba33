//! `audit-dups`: find exact and near-duplicate images across split sides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde_json::json;
use splitgate_core::hashdup::{audit_duplicates, hash_file, DupConfig, ImageHashes};
use splitgate_core::ingest::{ImageRecord, Manifest};

use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;
use crate::sides::resolve_sides;

#[derive(Debug, Args)]
pub struct AuditDupsArgs {
    /// Manifest JSONL describing every image
    #[arg(long)]
    pub manifest: PathBuf,
    /// Split plan JSON naming the train and test ids
    #[arg(long, conflicts_with = "use_presplit")]
    pub plan: Option<PathBuf>,
    /// Take sides from presplit folders instead; val counts as train
    #[arg(long)]
    pub use_presplit: bool,
    /// Base directory for relative image paths; defaults to trying them
    /// as-is, then relative to the manifest's directory
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// Hamming distance bound for near-duplicate pairs
    #[arg(long, default_value_t = 10)]
    pub threshold: u32,
    /// Skip matching against horizontally mirrored images
    #[arg(long)]
    pub no_flips: bool,
    /// Exit 1 when any exact or near pair is found
    #[arg(long)]
    pub fail_on_found: bool,
    /// Report path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn resolve_path(record: &ImageRecord, root: Option<&Path>, manifest_dir: &Path) -> PathBuf {
    let raw = Path::new(&record.path);
    if raw.is_absolute() {
        return raw.to_path_buf();
    }
    if let Some(root) = root {
        return root.join(raw);
    }
    if raw.exists() {
        raw.to_path_buf()
    } else {
        manifest_dir.join(raw)
    }
}

fn hash_side(
    manifest: &Manifest,
    ids: &[String],
    root: Option<&Path>,
    manifest_dir: &Path,
) -> Result<Vec<ImageHashes>, CliError> {
    let records: Vec<&ImageRecord> = ids
        .iter()
        .map(|id| {
            manifest
                .get(id)
                .ok_or_else(|| CliError::new("unknown_id", format!("id {id} is not in the manifest")))
        })
        .collect::<Result<_, _>>()?;
    let hashes = records
        .par_iter()
        .map(|rec| hash_file(&rec.id, &resolve_path(rec, root, manifest_dir)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(hashes)
}

pub fn run(args: &AuditDupsArgs) -> Result<(), CliError> {
    let manifest = Manifest::read_jsonl(&args.manifest)?;
    let sides = resolve_sides(&manifest, args.plan.as_deref(), args.use_presplit)?;
    let manifest_dir = args
        .manifest
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();

    let train = hash_side(&manifest, &sides.train_ids, args.root.as_deref(), &manifest_dir)?;
    let test = hash_side(&manifest, &sides.test_ids, args.root.as_deref(), &manifest_dir)?;
    let config = DupConfig {
        threshold: args.threshold,
        check_flips: !args.no_flips,
        ..DupConfig::default()
    };
    let report = audit_duplicates(&train, &test, &config);

    let flags = flags_object(vec![
        ("manifest", json!(args.manifest.display().to_string())),
        (
            "plan",
            json!(args.plan.as_ref().map(|p| p.display().to_string())),
        ),
        ("use_presplit", json!(args.use_presplit)),
        (
            "root",
            json!(args.root.as_ref().map(|p| p.display().to_string())),
        ),
        ("threshold", json!(args.threshold)),
        ("no_flips", json!(args.no_flips)),
        ("fail_on_found", json!(args.fail_on_found)),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    let mut result = serde_json::to_value(&report)?;
    let summary: BTreeMap<&str, usize> = BTreeMap::from([
        ("exact_pairs", report.exact.len()),
        ("near_pairs", report.near.len()),
        ("train_images", train.len()),
        ("test_images", test.len()),
    ]);
    result["summary"] = json!(summary);
    result["sides_from"] = json!(sides.source);
    write_document(args.out.as_deref(), &envelope("audit-dups", flags, result))?;

    if args.fail_on_found && (!report.exact.is_empty() || !report.near.is_empty()) {
        return Err(CliError::new(
            "duplicates_found",
            format!(
                "{} exact and {} near duplicate pairs cross the split",
                report.exact.len(),
                report.near.len()
            ),
        )
        .with_context(json!({
            "exact_pairs": report.exact.len(),
            "near_pairs": report.near.len(),
        })));
    }
    Ok(())
}

//! `split`: draw a leakage-aware train/test split from a manifest.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::ingest::Manifest;
use splitgate_core::splitter::{audit_overlap, make_split, SplitConfig};

use crate::args::{GroupKeyArg, StrategyArg};
use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;
use crate::presets::PresetArg;

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Manifest JSONL describing every image
    #[arg(long)]
    pub manifest: PathBuf,
    /// How images are assigned to sides
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Group identity for per-group splitting and for the audit
    #[arg(long, value_enum)]
    pub group_key: Option<GroupKeyArg>,
    /// Images drawn into the test side from every class
    #[arg(long)]
    pub test_per_class: Option<usize>,
    /// Named default for --test-per-class
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Split seed
    #[arg(long)]
    pub seed: u64,
    /// Plan path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SplitArgs) -> Result<(), CliError> {
    let test_per_class = match (args.test_per_class, args.preset) {
        (Some(count), _) => count,
        (None, Some(preset)) => preset.resolve().test_per_class,
        (None, None) => {
            return Err(CliError::new(
                "bad_flag",
                "one of --test-per-class and --preset is required",
            ))
        }
    };
    let strategy = args.strategy.to_core(args.group_key)?;

    let manifest = Manifest::read_jsonl(&args.manifest)?;
    let config = SplitConfig {
        strategy,
        test_per_class,
        seed: args.seed,
    };
    let plan = make_split(&manifest, &config)?;
    // a grouped plan must audit clean; a per-image plan shows its leakage
    let audit = match args.group_key {
        Some(key) => Some(audit_overlap(
            &manifest,
            &plan.train_ids,
            &plan.test_ids,
            key.to_core(),
        )?),
        None => None,
    };

    let flags = flags_object(vec![
        ("manifest", json!(args.manifest.display().to_string())),
        ("strategy", json!(args.strategy.as_str())),
        ("group_key", json!(args.group_key.map(|k| k.as_str()))),
        ("test_per_class", json!(test_per_class)),
        ("preset", json!(args.preset.map(|p| p.as_str()))),
        ("seed", json!(args.seed)),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    let result = json!({
        "plan": plan,
        "audit": audit,
    });
    write_document(args.out.as_deref(), &envelope("split", flags, result))
}

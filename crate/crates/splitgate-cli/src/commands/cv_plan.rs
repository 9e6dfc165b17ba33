//! `cv-plan`: build a repeated stratified cross-validation plan.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::ingest::Manifest;
use splitgate_core::splitter::{make_cv_plan, CvConfig};

use crate::args::{GroupKeyArg, StrategyArg};
use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct CvPlanArgs {
    /// Manifest JSONL describing every image
    #[arg(long)]
    pub manifest: PathBuf,
    /// How images are dealt into folds
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Group identity for per-group folds
    #[arg(long, value_enum)]
    pub group_key: Option<GroupKeyArg>,
    /// Fold count
    #[arg(long)]
    pub folds: u32,
    /// Independent reshuffled repeats
    #[arg(long, default_value_t = 1)]
    pub repeats: u32,
    /// Plan seed
    #[arg(long)]
    pub seed: u64,
    /// Plan path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &CvPlanArgs) -> Result<(), CliError> {
    let strategy = args.strategy.to_core(args.group_key)?;
    let manifest = Manifest::read_jsonl(&args.manifest)?;
    let plan = make_cv_plan(
        &manifest,
        &CvConfig {
            strategy,
            folds: args.folds,
            repeats: args.repeats,
            seed: args.seed,
        },
    )?;

    let flags = flags_object(vec![
        ("manifest", json!(args.manifest.display().to_string())),
        ("strategy", json!(args.strategy.as_str())),
        ("group_key", json!(args.group_key.map(|k| k.as_str()))),
        ("folds", json!(args.folds)),
        ("repeats", json!(args.repeats)),
        ("seed", json!(args.seed)),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    write_document(
        args.out.as_deref(),
        &envelope("cv-plan", flags, serde_json::to_value(&plan)?),
    )
}

//! `experiment`: reproduce the split-strategy inflation effect end to end.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::synthbench::run_inflation_experiment;

use crate::commands::synth::SynthOverrides;
use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;
use crate::presets::PresetArg;

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Corpus shape and cross-validation preset
    #[arg(long, value_enum, default_value = "default")]
    pub preset: PresetArg,
    #[command(flatten)]
    pub overrides: SynthOverrides,
    /// Fold count; preset value when omitted
    #[arg(long)]
    pub folds: Option<u32>,
    /// Repeat count; preset value when omitted
    #[arg(long)]
    pub repeats: Option<u32>,
    /// Nearest-neighbor count; preset value when omitted
    #[arg(long)]
    pub knn_k: Option<usize>,
    /// Seed for both corpus generation and fold assignment
    #[arg(long)]
    pub seed: u64,
    /// Report path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &ExperimentArgs) -> Result<(), CliError> {
    let preset = args.preset.resolve();
    let params = args.overrides.apply(args.preset.synth_params(args.seed));
    let folds = args.folds.unwrap_or(preset.cv_folds);
    let repeats = args.repeats.unwrap_or(preset.cv_repeats);
    let knn_k = args.knn_k.unwrap_or(preset.knn_k);

    let report = run_inflation_experiment(&params, folds, repeats, knn_k, args.seed)?;

    let flags = flags_object(vec![
        ("preset", json!(args.preset.as_str())),
        ("k_classes", json!(params.k_classes)),
        ("volumes_per_class", json!(params.volumes_per_class)),
        ("slices_per_volume", json!(params.slices_per_volume)),
        ("width", json!(params.width)),
        ("height", json!(params.height)),
        ("class_signal", json!(params.class_signal)),
        ("volume_signal", json!(params.volume_signal)),
        ("slice_noise", json!(params.slice_noise)),
        ("slice_drift", json!(params.slice_drift)),
        ("folds", json!(folds)),
        ("repeats", json!(repeats)),
        ("knn_k", json!(knn_k)),
        ("seed", json!(args.seed)),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    write_document(
        args.out.as_deref(),
        &envelope("experiment", flags, serde_json::to_value(&report)?),
    )
}

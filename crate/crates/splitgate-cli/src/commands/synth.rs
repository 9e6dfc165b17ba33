//! `synth`: generate a synthetic volumetric corpus on disk.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use splitgate_core::synthbench::generate_synth;

use crate::envelope::{envelope, flags_object, write_document};
use crate::error::CliError;
use crate::presets::PresetArg;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Corpus shape preset
    #[arg(long, value_enum, default_value = "default")]
    pub preset: PresetArg,
    #[command(flatten)]
    pub overrides: SynthOverrides,
    /// Generation seed
    #[arg(long)]
    pub seed: u64,
    /// Directory that receives the PGM files and manifest.jsonl
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Summary path; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Field-level overrides applied on top of the preset.
#[derive(Debug, Args)]
pub struct SynthOverrides {
    #[arg(long)]
    pub k_classes: Option<usize>,
    #[arg(long)]
    pub volumes_per_class: Option<usize>,
    #[arg(long)]
    pub slices_per_volume: Option<usize>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long)]
    pub class_signal: Option<f64>,
    #[arg(long)]
    pub volume_signal: Option<f64>,
    #[arg(long)]
    pub slice_noise: Option<f64>,
    #[arg(long)]
    pub slice_drift: Option<f64>,
}

impl SynthOverrides {
    pub fn apply(
        &self,
        mut params: splitgate_core::synthbench::SynthParams,
    ) -> splitgate_core::synthbench::SynthParams {
        if let Some(v) = self.k_classes {
            params.k_classes = v;
        }
        if let Some(v) = self.volumes_per_class {
            params.volumes_per_class = v;
        }
        if let Some(v) = self.slices_per_volume {
            params.slices_per_volume = v;
        }
        if let Some(v) = self.width {
            params.width = v;
        }
        if let Some(v) = self.height {
            params.height = v;
        }
        if let Some(v) = self.class_signal {
            params.class_signal = v;
        }
        if let Some(v) = self.volume_signal {
            params.volume_signal = v;
        }
        if let Some(v) = self.slice_noise {
            params.slice_noise = v;
        }
        if let Some(v) = self.slice_drift {
            params.slice_drift = v;
        }
        params
    }
}

pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    let params = args.overrides.apply(args.preset.synth_params(args.seed));
    let manifest = generate_synth(&params, &args.out_dir)?;

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
        ("seed", json!(args.seed)),
        ("out_dir", json!(args.out_dir.display().to_string())),
        (
            "out",
            json!(args.out.as_ref().map(|p| p.display().to_string())),
        ),
    ]);
    let result = json!({
        "params": params,
        "images": manifest.len(),
        "classes": manifest.classes(),
        "manifest_path": args.out_dir.join("manifest.jsonl").display().to_string(),
    });
    write_document(args.out.as_deref(), &envelope("synth", flags, result))
}

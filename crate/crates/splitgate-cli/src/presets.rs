//! Named configurations shaped like the published dataset setups.

use clap::ValueEnum;
use splitgate_core::synthbench::SynthParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    /// 2 classes, 10 volumes of 50 slices each, test 250/class
    Default,
    /// 4 classes, test 1000/class
    KermanyLike,
    /// 3 classes, test 250/class
    SrinivasanLike,
    /// 2 classes, test 1000/class
    AiimsLike,
}

/// Everything a preset pins down; explicit flags override any field.
pub struct Preset {
    pub k_classes: usize,
    pub volumes_per_class: usize,
    pub slices_per_volume: usize,
    pub test_per_class: usize,
    pub cv_folds: u32,
    pub cv_repeats: u32,
    pub knn_k: usize,
}

impl PresetArg {
    pub fn resolve(self) -> Preset {
        let base = Preset {
            k_classes: 2,
            volumes_per_class: 10,
            slices_per_volume: 50,
            test_per_class: 250,
            cv_folds: 5,
            cv_repeats: 3,
            knn_k: 5,
        };
        match self {
            PresetArg::Default => base,
            PresetArg::KermanyLike => Preset {
                k_classes: 4,
                test_per_class: 1000,
                ..base
            },
            PresetArg::SrinivasanLike => Preset {
                k_classes: 3,
                test_per_class: 250,
                ..base
            },
            PresetArg::AiimsLike => Preset {
                k_classes: 2,
                test_per_class: 1000,
                ..base
            },
        }
    }

    /// Synthesis parameters for the preset with the amplitude defaults.
    pub fn synth_params(self, seed: u64) -> SynthParams {
        let preset = self.resolve();
        SynthParams {
            k_classes: preset.k_classes,
            volumes_per_class: preset.volumes_per_class,
            slices_per_volume: preset.slices_per_volume,
            seed,
            ..SynthParams::default()
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PresetArg::Default => "default",
            PresetArg::KermanyLike => "kermany-like",
            PresetArg::SrinivasanLike => "srinivasan-like",
            PresetArg::AiimsLike => "aiims-like",
        }
    }
}

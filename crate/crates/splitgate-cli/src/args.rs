//! Shared flag vocabularies and their mappings onto core types.

use clap::ValueEnum;
use splitgate_core::ingest::{FieldSource, GroupKey, LayoutKind, ScanMode};
use splitgate_core::leakstats::ProbeMode;
use splitgate_core::splitter::SplitStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    /// class folder containing per-subject folders
    ClassSubject,
    /// train/val/test folders containing class folders
    Presplit,
    /// all images in one folder, identity from filenames
    Flat,
}

impl LayoutArg {
    pub fn to_core(self) -> LayoutKind {
        match self {
            LayoutArg::ClassSubject => LayoutKind::ClassSubjectFolders,
            LayoutArg::Presplit => LayoutKind::PresplitFolders,
            LayoutArg::Flat => LayoutKind::Flat,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayoutArg::ClassSubject => "class-subject",
            LayoutArg::Presplit => "presplit",
            LayoutArg::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Folder,
    Filename,
}

impl SourceArg {
    pub fn to_core(self) -> FieldSource {
        match self {
            SourceArg::Folder => FieldSource::Folder,
            SourceArg::Filename => FieldSource::Filename,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceArg::Folder => "folder",
            SourceArg::Filename => "filename",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// abort on the first file that does not fit the layout
    Strict,
    /// skip non-matching files and list them in the summary
    Lenient,
}

impl ModeArg {
    pub fn to_core(self) -> ScanMode {
        match self {
            ModeArg::Strict => ScanMode::Strict,
            ModeArg::Lenient => ScanMode::Lenient,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeArg::Strict => "strict",
            ModeArg::Lenient => "lenient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupKeyArg {
    Subject,
    Volume,
}

impl GroupKeyArg {
    pub fn to_core(self) -> GroupKey {
        match self {
            GroupKeyArg::Subject => GroupKey::Subject,
            GroupKeyArg::Volume => GroupKey::Volume,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupKeyArg::Subject => "subject",
            GroupKeyArg::Volume => "volume",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// draw individual images regardless of their volume or subject
    PerImage,
    /// keep whole groups on one side; requires --group-key
    PerGroup,
}

impl StrategyArg {
    /// Combine the strategy flag with the optional group key, rejecting a
    /// grouped strategy without a key.
    pub fn to_core(
        self,
        key: Option<GroupKeyArg>,
    ) -> Result<SplitStrategy, crate::error::CliError> {
        match self {
            StrategyArg::PerImage => Ok(SplitStrategy::PerImage),
            StrategyArg::PerGroup => match key {
                Some(key) => Ok(SplitStrategy::PerGroup { key: key.to_core() }),
                None => Err(crate::error::CliError::new(
                    "bad_flag",
                    "--strategy per-group requires --group-key",
                )),
            },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyArg::PerImage => "per-image",
            StrategyArg::PerGroup => "per-group",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeModeArg {
    /// the probe run randomized training labels only
    TrainOnly,
    /// labels were randomized before splitting
    BeforeSplit,
}

impl ProbeModeArg {
    pub fn to_core(self) -> ProbeMode {
        match self {
            ProbeModeArg::TrainOnly => ProbeMode::RandomizeTrainOnly,
            ProbeModeArg::BeforeSplit => ProbeMode::RandomizeBeforeSplit,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProbeModeArg::TrainOnly => "train-only",
            ProbeModeArg::BeforeSplit => "before-split",
        }
    }
}

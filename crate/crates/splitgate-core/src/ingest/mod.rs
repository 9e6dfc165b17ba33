//! Dataset ingestion.
//!
//! Walks an on-disk image tree and produces a [`Manifest`] whose records
//! carry class, subject, volume and slice identity. Identity comes from the
//! folder layout, from a filename [`NamePattern`], or both, as described by
//! a [`LayoutConfig`].

mod manifest;
mod pattern;

pub use manifest::{
    validate_manifest, GroupKey, ImageRecord, Manifest, ManifestIoError, Split, Violation,
};
pub use pattern::{
    NameField, NameParseError, NamePattern, ParsedName, PatternError, RenderError,
};

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How the directory tree encodes identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    /// `root/CLASS/SUBJECT/image` with optional deeper nesting.
    ClassSubjectFolders,
    /// `root/{train,val,test}/CLASS/image`; the top folder becomes the
    /// record's presplit side.
    PresplitFolders,
    /// No folder meaning; all identity comes from filenames.
    Flat,
}

/// Where a field's value is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    Folder,
    Filename,
}

fn default_extensions() -> Vec<String> {
    ["pgm", "bmp", "tiff", "jpeg", "png"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn default_class_from() -> FieldSource {
    FieldSource::Folder
}

fn default_subject_from() -> FieldSource {
    FieldSource::Folder
}

/// Declarative description of a dataset layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub layout_kind: LayoutKind,
    /// Filename template applied to each file stem, when identity lives in
    /// filenames.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<NamePattern>,
    #[serde(default = "default_class_from")]
    pub class_from: FieldSource,
    #[serde(default = "default_subject_from")]
    pub subject_from: FieldSource,
    /// Lowercase file extensions to ingest; others are skipped silently.
    #[serde(default = "default_extensions")]
    pub extensions: Vec<String>,
}

impl LayoutConfig {
    /// A config with layout-appropriate field sources and default
    /// extensions.
    pub fn new(layout_kind: LayoutKind) -> Self {
        let folder_based = !matches!(layout_kind, LayoutKind::Flat);
        LayoutConfig {
            layout_kind,
            pattern: None,
            class_from: if folder_based {
                FieldSource::Folder
            } else {
                FieldSource::Filename
            },
            subject_from: if folder_based {
                FieldSource::Folder
            } else {
                FieldSource::Filename
            },
            extensions: default_extensions(),
        }
    }

    pub fn with_pattern(mut self, pattern: NamePattern) -> Self {
        self.pattern = Some(pattern);
        self
    }

    pub fn with_subject_from(mut self, source: FieldSource) -> Self {
        self.subject_from = source;
        self
    }

    fn validate(&self) -> Result<(), IngestError> {
        let invalid = |reason: &str| IngestError::InvalidConfig {
            reason: reason.to_string(),
        };
        if matches!(self.layout_kind, LayoutKind::Flat) {
            if self.class_from == FieldSource::Folder {
                return Err(invalid("flat layout has no class folders"));
            }
            if self.subject_from == FieldSource::Folder {
                return Err(invalid("flat layout has no subject folders"));
            }
        }
        match &self.pattern {
            Some(pattern) => {
                if self.class_from == FieldSource::Filename && !pattern.captures(NameField::Class) {
                    return Err(invalid("class_from is filename but pattern lacks {class}"));
                }
            }
            None => {
                if self.class_from == FieldSource::Filename {
                    return Err(invalid("class_from is filename but no pattern is set"));
                }
                if self.subject_from == FieldSource::Filename {
                    return Err(invalid("subject_from is filename but no pattern is set"));
                }
            }
        }
        Ok(())
    }
}

/// Scan behaviour when a file does not fit the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// Abort on the first file that does not match.
    Strict,
    /// Skip non-matching files and report them in the outcome.
    Lenient,
}

/// Result of scanning a dataset root.
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub manifest: Manifest,
    /// Root-relative paths skipped under [`ScanMode::Lenient`], sorted.
    pub skipped: Vec<String>,
    /// Files ignored because their extension is not in the allow-list.
    pub ignored_extensions: usize,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("dataset root {path} does not exist or is not a directory")]
    RootNotFound { path: String },
    #[error("dataset root contains no images")]
    EmptyDataset,
    #[error("file {path} does not match the layout: {reason}")]
    LayoutMismatch { path: String, reason: String },
    #[error("invalid layout config: {reason}")]
    InvalidConfig { reason: String },
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Walk `root` and build a manifest. Records are ordered by their
/// root-relative path; ids are that path with `/` separators.
pub fn scan_dataset(
    root: &Path,
    config: &LayoutConfig,
    mode: ScanMode,
) -> Result<ScanOutcome, IngestError> {
    config.validate()?;
    if !root.is_dir() {
        return Err(IngestError::RootNotFound {
            path: root.display().to_string(),
        });
    }

    let extensions: BTreeSet<String> =
        config.extensions.iter().map(|e| e.to_lowercase()).collect();

    let mut rel_paths = Vec::new();
    let mut ignored_extensions = 0usize;
    for entry in walkdir::WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(|e| {
            let path = e
                .path()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| root.display().to_string());
            IngestError::Io {
                path,
                source: e
                    .into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("walk failed")),
            }
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walked path is under root");
        let ext = rel
            .extension()
            .map(|e| e.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if !extensions.contains(&ext) {
            ignored_extensions += 1;
            continue;
        }
        let components: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        rel_paths.push(components);
    }
    rel_paths.sort();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for components in &rel_paths {
        let rel_id = components.join("/");
        match build_record(root, components, &rel_id, config) {
            Ok(record) => records.push(record),
            Err(reason) => match mode {
                ScanMode::Strict => {
                    return Err(IngestError::LayoutMismatch {
                        path: rel_id,
                        reason,
                    })
                }
                ScanMode::Lenient => skipped.push(rel_id),
            },
        }
    }

    if records.is_empty() {
        return Err(IngestError::EmptyDataset);
    }
    Ok(ScanOutcome {
        manifest: Manifest::from_records(records),
        skipped,
        ignored_extensions,
    })
}

fn build_record(
    root: &Path,
    components: &[String],
    rel_id: &str,
    config: &LayoutConfig,
) -> Result<ImageRecord, String> {
    let file_name = components.last().expect("file has a name");
    let folders = &components[..components.len() - 1];

    let (presplit, identity_folders) = match config.layout_kind {
        LayoutKind::PresplitFolders => {
            let side = folders.first().ok_or("file is not under a split folder")?;
            let split = match side.as_str() {
                "train" => Split::Train,
                "val" => Split::Val,
                "test" => Split::Test,
                other => return Err(format!("top folder {other:?} is not train, val or test")),
            };
            (Some(split), &folders[1..])
        }
        LayoutKind::ClassSubjectFolders => (None, folders),
        LayoutKind::Flat => (None, [].as_slice()),
    };

    let parsed = match &config.pattern {
        Some(pattern) => {
            let stem = file_name
                .rsplit_once('.')
                .map(|(stem, _)| stem)
                .unwrap_or(file_name);
            Some(pattern.parse_filename(stem).map_err(|e| e.to_string())?)
        }
        None => None,
    };
    let parsed = parsed.unwrap_or_default();

    let class_label = match config.class_from {
        FieldSource::Folder => identity_folders
            .first()
            .cloned()
            .ok_or("file is not under a class folder")?,
        FieldSource::Filename => parsed.class.clone().ok_or("pattern captured no class")?,
    };
    let subject = match config.subject_from {
        FieldSource::Folder => identity_folders.get(1).cloned(),
        FieldSource::Filename => parsed.subject.clone(),
    };

    let path: std::path::PathBuf = root.join(components.join("/"));
    Ok(ImageRecord {
        id: rel_id.to_string(),
        path: path.display().to_string(),
        class_label,
        subject,
        volume: parsed.volume,
        slice_index: parsed.slice,
        content_hash: None,
        dhash: None,
        presplit,
    })
}

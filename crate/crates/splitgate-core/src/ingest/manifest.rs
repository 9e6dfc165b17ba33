//! Image manifests.
//!
//! A manifest is the flat record of every image in a dataset together with
//! the identity fields that drive splitting and auditing. Manifests persist
//! as JSON Lines, one record per line, with a fixed key order so that equal
//! manifests are byte-identical on disk.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which identity field defines the unit that must stay on one side of a
/// split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Subject,
    Volume,
}

impl GroupKey {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupKey::Subject => "subject",
            GroupKey::Volume => "volume",
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A split side recorded by an upstream dataset layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// One image in a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    /// Stable identifier, the root-relative path with `/` separators.
    pub id: String,
    /// Filesystem path of the image.
    pub path: String,
    pub class_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_index: Option<u64>,
    /// Lowercase hex SHA-256 of the raw file bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_hash: Option<String>,
    /// Lowercase hex 64-bit perceptual hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dhash: Option<String>,
    /// Split side implied by the dataset layout, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presplit: Option<Split>,
}

impl ImageRecord {
    /// The record's value for a grouping key.
    pub fn group_value(&self, key: GroupKey) -> Option<&str> {
        match key {
            GroupKey::Subject => self.subject.as_deref(),
            GroupKey::Volume => self.volume.as_deref(),
        }
    }
}

/// An ordered collection of image records with id lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<ImageRecord>,
    by_id: BTreeMap<String, usize>,
}

impl Manifest {
    /// Wrap records as-is. Duplicate ids are representable; lookups resolve
    /// to the first occurrence and [`validate_manifest`] reports the rest.
    pub fn from_records(records: Vec<ImageRecord>) -> Self {
        let mut by_id = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            by_id.entry(rec.id.clone()).or_insert(i);
        }
        Manifest { records, by_id }
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ImageRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    /// Distinct class labels in sorted order.
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.records.iter().map(|r| r.class_label.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), ManifestIoError> {
        let io_err = |source| ManifestIoError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        for rec in &self.records {
            let line = serde_json::to_string(rec).expect("record serializes");
            out.write_all(line.as_bytes()).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn read_jsonl(path: &Path) -> Result<Self, ManifestIoError> {
        let file = File::open(path).map_err(|source| ManifestIoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let reader = BufReader::new(file);
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| ManifestIoError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = serde_json::from_str(&line).map_err(|source| ManifestIoError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                source,
            })?;
            records.push(rec);
        }
        Ok(Manifest::from_records(records))
    }
}

#[derive(Debug, Error)]
pub enum ManifestIoError {
    #[error("manifest io failed for {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path} line {line} is not a valid record")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// A consistency problem found in a manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId { id: String },
    MissingFile { id: String, path: String },
    MissingGroupKey { id: String, key: GroupKey },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate id {id:?}"),
            Violation::MissingFile { id, path } => {
                write!(f, "file {path:?} for id {id:?} does not exist")
            }
            Violation::MissingGroupKey { id, key } => {
                write!(f, "record {id:?} lacks the {key} field")
            }
        }
    }
}

/// Check a manifest for duplicate ids, missing files, and, when a grouping
/// key is required downstream, records lacking that key. Violations are
/// reported in record order.
pub fn validate_manifest(
    manifest: &Manifest,
    require_group: Option<GroupKey>,
    check_files: bool,
) -> Vec<Violation> {
    let mut seen = BTreeSet::new();
    let mut violations = Vec::new();
    for rec in manifest.records() {
        if !seen.insert(rec.id.as_str()) {
            violations.push(Violation::DuplicateId { id: rec.id.clone() });
        }
        if check_files && !Path::new(&rec.path).is_file() {
            violations.push(Violation::MissingFile {
                id: rec.id.clone(),
                path: rec.path.clone(),
            });
        }
        if let Some(key) = require_group {
            if rec.group_value(key).is_none() {
                violations.push(Violation::MissingGroupKey {
                    id: rec.id.clone(),
                    key,
                });
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, class: &str) -> ImageRecord {
        ImageRecord {
            id: id.to_string(),
            path: format!("/data/{id}"),
            class_label: class.to_string(),
            subject: None,
            volume: None,
            slice_index: None,
            content_hash: None,
            dhash: None,
            presplit: None,
        }
    }

    #[test]
    fn serializes_with_fixed_key_order_and_no_null_fields() {
        let mut rec = record("a/x.pgm", "CNV");
        rec.subject = Some("s1".into());
        rec.slice_index = Some(3);
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            json,
            "{\"id\":\"a/x.pgm\",\"path\":\"/data/a/x.pgm\",\"class_label\":\"CNV\",\
             \"subject\":\"s1\",\"slice_index\":3}"
        );
    }

    #[test]
    fn split_serializes_lowercase() {
        assert_eq!(serde_json::to_string(&Split::Train).unwrap(), "\"train\"");
        assert_eq!(serde_json::to_string(&Split::Val).unwrap(), "\"val\"");
        assert_eq!(serde_json::to_string(&Split::Test).unwrap(), "\"test\"");
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let mut rec2 = record("b.pgm", "DME");
        rec2.presplit = Some(Split::Test);
        let manifest = Manifest::from_records(vec![record("a.pgm", "CNV"), rec2]);
        manifest.write_jsonl(&path).unwrap();
        let reread = Manifest::read_jsonl(&path).unwrap();
        assert_eq!(reread, manifest);

        let bytes1 = std::fs::read(&path).unwrap();
        reread.write_jsonl(&path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes1);
    }

    #[test]
    fn read_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"id\":\"a\",\"path\":\"p\",\"class_label\":\"c\"}\nnot json\n")
            .unwrap();
        match Manifest::read_jsonl(&path) {
            Err(ManifestIoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn lookup_and_classes() {
        let manifest = Manifest::from_records(vec![
            record("a.pgm", "DME"),
            record("b.pgm", "CNV"),
            record("c.pgm", "DME"),
        ]);
        assert_eq!(manifest.get("b.pgm").unwrap().class_label, "CNV");
        assert!(manifest.get("missing").is_none());
        assert_eq!(manifest.classes(), vec!["CNV".to_string(), "DME".to_string()]);
    }

    #[test]
    fn validate_finds_duplicates_and_missing_groups() {
        let mut with_subject = record("a.pgm", "CNV");
        with_subject.subject = Some("s".into());
        let manifest = Manifest::from_records(vec![
            with_subject,
            record("b.pgm", "CNV"),
            record("b.pgm", "CNV"),
        ]);
        let violations = validate_manifest(&manifest, Some(GroupKey::Subject), false);
        assert_eq!(
            violations,
            vec![
                Violation::MissingGroupKey {
                    id: "b.pgm".into(),
                    key: GroupKey::Subject
                },
                Violation::DuplicateId { id: "b.pgm".into() },
                Violation::MissingGroupKey {
                    id: "b.pgm".into(),
                    key: GroupKey::Subject
                },
            ]
        );
        assert!(validate_manifest(&manifest, None, false)
            .iter()
            .all(|v| matches!(v, Violation::DuplicateId { .. })));
    }

    #[test]
    fn validate_checks_files_when_asked() {
        let dir = tempfile::tempdir().unwrap();
        let present = dir.path().join("here.pgm");
        std::fs::write(&present, b"x").unwrap();
        let mut ok = record("here.pgm", "CNV");
        ok.path = present.display().to_string();
        let mut gone = record("gone.pgm", "CNV");
        gone.path = dir.path().join("gone.pgm").display().to_string();
        let manifest = Manifest::from_records(vec![ok, gone]);
        let violations = validate_manifest(&manifest, None, true);
        assert_eq!(violations.len(), 1);
        assert!(matches!(
            &violations[0],
            Violation::MissingFile { id, .. } if id == "gone.pgm"
        ));
    }
}

//! Prediction files.
//!
//! Predictions travel as CSV with the header
//! `image_id,true_label,pred_label[,score_0..score_{k-1}]`. Labels are
//! class indices; a sidecar JSON label map carries the index-to-name
//! correspondence. Score columns are optional as a block: every row has
//! them or none does.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub image_id: String,
    pub truth: usize,
    pub pred: usize,
    pub scores: Option<Vec<f64>>,
}

/// A loaded prediction set.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub rows: Vec<PredictionRow>,
    /// Width of the score block, when present.
    pub score_classes: Option<usize>,
}

impl Predictions {
    pub fn new(rows: Vec<PredictionRow>) -> Result<Self, PredictionError> {
        let score_classes = rows.first().and_then(|r| r.scores.as_ref()).map(Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.scores.as_ref().map(Vec::len) != score_classes {
                return Err(PredictionError::InconsistentScores { row: i + 1 });
            }
        }
        Ok(Predictions {
            rows,
            score_classes,
        })
    }

    pub fn truth(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.truth).collect()
    }

    pub fn pred(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pred).collect()
    }

    pub fn scores(&self) -> Option<Vec<Vec<f64>>> {
        self.score_classes?;
        Some(
            self.rows
                .iter()
                .map(|r| r.scores.clone().expect("validated in new"))
                .collect(),
        )
    }

    /// Class count implied by the data: the score width when present,
    /// widened to cover every label.
    pub fn label_count(&self) -> usize {
        let max_label = self
            .rows
            .iter()
            .map(|r| r.truth.max(r.pred) + 1)
            .max()
            .unwrap_or(0);
        max_label.max(self.score_classes.unwrap_or(0))
    }
}

#[derive(Debug, Error)]
pub enum PredictionError {
    #[error("failed to access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("header {found:?} does not start with image_id,true_label,pred_label")]
    BadHeader { found: String },
    #[error("row {row}: {field} value {value:?} is not valid")]
    BadField {
        row: usize,
        field: &'static str,
        value: String,
    },
    #[error("row {row} breaks the all-or-none score column rule")]
    InconsistentScores { row: usize },
    #[error("label map error in {path}: {reason}")]
    BadLabelMap { path: String, reason: String },
}

pub fn write_predictions(path: &Path, predictions: &Predictions) -> Result<(), PredictionError> {
    let io_err = |source| PredictionError::Io {
        path: path.display().to_string(),
        source,
    };
    let csv_err = |source| PredictionError::Csv {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header = vec![
        "image_id".to_string(),
        "true_label".to_string(),
        "pred_label".to_string(),
    ];
    if let Some(k) = predictions.score_classes {
        header.extend((0..k).map(|i| format!("score_{i}")));
    }
    writer.write_record(&header).map_err(csv_err)?;
    for row in &predictions.rows {
        let mut record = vec![
            row.image_id.clone(),
            row.truth.to_string(),
            row.pred.to_string(),
        ];
        if let Some(scores) = &row.scores {
            record.extend(scores.iter().map(|s| s.to_string()));
        }
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)
}

pub fn read_predictions(path: &Path) -> Result<Predictions, PredictionError> {
    let csv_err = |source| PredictionError::Csv {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(|source| PredictionError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(csv_err)?.clone();
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 3 || fields[..3] != ["image_id", "true_label", "pred_label"] {
        return Err(PredictionError::BadHeader {
            found: fields.join(","),
        });
    }
    let score_columns = fields.len() - 3;
    for (i, field) in fields.iter().skip(3).enumerate() {
        if *field != format!("score_{i}") {
            return Err(PredictionError::BadHeader {
                found: fields.join(","),
            });
        }
    }

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row_no = idx + 1;
        let parse_label = |field: &'static str, value: &str| -> Result<usize, PredictionError> {
            value.parse().map_err(|_| PredictionError::BadField {
                row: row_no,
                field,
                value: value.to_string(),
            })
        };
        let scores = if score_columns == 0 {
            None
        } else {
            let mut block = Vec::with_capacity(score_columns);
            for value in record.iter().skip(3) {
                let parsed: f64 = value.parse().map_err(|_| PredictionError::BadField {
                    row: row_no,
                    field: "score",
                    value: value.to_string(),
                })?;
                if !parsed.is_finite() {
                    return Err(PredictionError::BadField {
                        row: row_no,
                        field: "score",
                        value: value.to_string(),
                    });
                }
                block.push(parsed);
            }
            Some(block)
        };
        rows.push(PredictionRow {
            image_id: record.get(0).unwrap_or_default().to_string(),
            truth: parse_label("true_label", record.get(1).unwrap_or_default())?,
            pred: parse_label("pred_label", record.get(2).unwrap_or_default())?,
            scores,
        });
    }
    Predictions::new(rows)
}

/// Class name per index, the sidecar for prediction files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub classes: Vec<String>,
}

impl LabelMap {
    pub fn new(classes: Vec<String>) -> Self {
        LabelMap { classes }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn name_of(&self, index: usize) -> Option<&str> {
        self.classes.get(index).map(String::as_str)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), PredictionError> {
        let json = serde_json::to_string_pretty(self).expect("label map serializes");
        std::fs::write(path, json + "\n").map_err(|source| PredictionError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_json(path: &Path) -> Result<Self, PredictionError> {
        let bytes = std::fs::read(path).map_err(|source| PredictionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_slice(&bytes).map_err(|e| PredictionError::BadLabelMap {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows(with_scores: bool) -> Vec<PredictionRow> {
        (0..4)
            .map(|i| PredictionRow {
                image_id: format!("img{i}.pgm"),
                truth: i % 2,
                pred: (i + 1) % 2,
                scores: with_scores.then(|| vec![0.25 * i as f64, 1.0 - 0.25 * i as f64]),
            })
            .collect()
    }

    #[test]
    fn round_trip_with_scores() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.csv");
        let predictions = Predictions::new(sample_rows(true)).unwrap();
        write_predictions(&path, &predictions).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("image_id,true_label,pred_label,score_0,score_1\n"));
        let reread = read_predictions(&path).unwrap();
        assert_eq!(reread, predictions);
        assert_eq!(reread.score_classes, Some(2));
        assert_eq!(reread.label_count(), 2);
    }

    #[test]
    fn round_trip_without_scores() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.csv");
        let predictions = Predictions::new(sample_rows(false)).unwrap();
        write_predictions(&path, &predictions).unwrap();
        let reread = read_predictions(&path).unwrap();
        assert_eq!(reread.score_classes, None);
        assert_eq!(reread.scores(), None);
        assert_eq!(reread.rows, predictions.rows);
    }

    #[test]
    fn rejects_bad_headers_and_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "id,truth,pred\nx,0,1\n").unwrap();
        assert!(matches!(
            read_predictions(&path),
            Err(PredictionError::BadHeader { .. })
        ));

        std::fs::write(&path, "image_id,true_label,pred_label\nx,zero,1\n").unwrap();
        match read_predictions(&path) {
            Err(PredictionError::BadField { row, field, .. }) => {
                assert_eq!((row, field), (1, "true_label"));
            }
            other => panic!("expected bad field, got {other:?}"),
        }

        std::fs::write(
            &path,
            "image_id,true_label,pred_label,score_0\nx,0,1,inf\n",
        )
        .unwrap();
        assert!(matches!(
            read_predictions(&path),
            Err(PredictionError::BadField { field: "score", .. })
        ));
    }

    #[test]
    fn rejects_mixed_score_presence() {
        let mut rows = sample_rows(true);
        rows[2].scores = None;
        assert!(matches!(
            Predictions::new(rows),
            Err(PredictionError::InconsistentScores { row: 3 })
        ));
    }

    #[test]
    fn label_map_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.json");
        let map = LabelMap::new(vec!["CNV".into(), "DME".into(), "NORMAL".into()]);
        map.write_json(&path).unwrap();
        let reread = LabelMap::read_json(&path).unwrap();
        assert_eq!(reread, map);
        assert_eq!(reread.index_of("DME"), Some(1));
        assert_eq!(reread.name_of(2), Some("NORMAL"));
        assert_eq!(reread.index_of("missing"), None);
    }
}

//! Deterministic k-nearest-neighbor surrogate classifier.
//!
//! Works on 16×16 block-mean feature vectors. Every tie has a written
//! rule, so predictions depend only on the inputs: equal distances prefer
//! the lexicographically lower train id, and vote ties prefer the smallest
//! class index.

use rayon::prelude::*;
use thiserror::Error;

/// An unlabeled feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVec {
    pub id: String,
    pub features: Vec<u8>,
}

/// A labeled training point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainPoint {
    pub id: String,
    pub label: usize,
    pub features: Vec<u8>,
}

/// Predicted label with per-class neighbor fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnPrediction {
    pub id: String,
    pub label: usize,
    pub scores: Vec<f64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnnError {
    #[error("the training set is empty")]
    EmptyTrain,
    #[error("k={k} exceeds the training size {train}")]
    KTooLarge { k: usize, train: usize },
    #[error("train id {id} has label {label}, outside the {num_classes} classes")]
    LabelOutOfRange {
        id: String,
        label: usize,
        num_classes: usize,
    },
}

fn squared_distance(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x as i64 - *y as i64;
            (d * d) as u64
        })
        .sum()
}

/// Classify each test vector by majority vote over its `k` nearest
/// training points under squared Euclidean distance.
pub fn knn_predict(
    train: &[TrainPoint],
    test: &[FeatureVec],
    num_classes: usize,
    k: usize,
) -> Result<Vec<KnnPrediction>, KnnError> {
    if train.is_empty() {
        return Err(KnnError::EmptyTrain);
    }
    if k == 0 || k > train.len() {
        return Err(KnnError::KTooLarge {
            k,
            train: train.len(),
        });
    }
    for point in train {
        if point.label >= num_classes {
            return Err(KnnError::LabelOutOfRange {
                id: point.id.clone(),
                label: point.label,
                num_classes,
            });
        }
    }

    Ok(test
        .par_iter()
        .map(|probe| {
            let mut ranked: Vec<(u64, &str, usize)> = train
                .iter()
                .map(|p| (squared_distance(&p.features, &probe.features), p.id.as_str(), p.label))
                .collect();
            ranked.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            let mut votes = vec![0usize; num_classes];
            for (_, _, label) in &ranked[..k] {
                votes[*label] += 1;
            }
            let best = votes.iter().max().copied().unwrap_or(0);
            let label = votes
                .iter()
                .position(|v| *v == best)
                .expect("k >= 1 guarantees a vote");
            let scores = votes.iter().map(|v| *v as f64 / k as f64).collect();
            KnnPrediction {
                id: probe.id.clone(),
                label,
                scores,
            }
        })
        .collect())
}

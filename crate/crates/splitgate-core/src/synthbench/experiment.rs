//! End-to-end split-strategy inflation experiment.
//!
//! One synthetic corpus is evaluated under two cross-validation plans that
//! share a seed: per-image stratified folds and grouped per-volume folds.
//! The k-nearest-neighbor surrogate is refit for every fold; the gap
//! between the two mean MCCs measures how much the per-image strategy
//! inflates apparent performance.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{GroupKey, Manifest};
use crate::metrics::{confusion_matrix, mcc_multiclass};
use crate::splitter::{audit_overlap, make_cv_plan, CvConfig, CvPlan, SplitStrategy};

use super::knn::{knn_predict, FeatureVec, TrainPoint};
use super::{corpus_manifest, generate_corpus, slice_features, SynthError, SynthImage, SynthParams};

/// Fold count and repeat count of both cross-validation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvShape {
    pub folds: u32,
    pub repeats: u32,
}

/// Per-fold MCC under each strategy, in repeat-major fold order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mcc_per_image: Vec<f64>,
    pub mcc_per_group: Vec<f64>,
    /// mean(mcc_per_image) − mean(mcc_per_group).
    pub mean_gap: f64,
    pub params: SynthParams,
    pub cv: CvShape,
    pub knn_k: usize,
}

struct FeatureTable {
    by_id: BTreeMap<String, usize>,
    labels: Vec<usize>,
    features: Vec<Vec<u8>>,
}

fn feature_table(images: &[SynthImage]) -> FeatureTable {
    let features: Vec<Vec<u8>> = images
        .par_iter()
        .map(|img| slice_features(&img.image))
        .collect();
    let mut by_id = BTreeMap::new();
    let mut labels = Vec::with_capacity(images.len());
    for (i, img) in images.iter().enumerate() {
        by_id.insert(img.id.clone(), i);
        labels.push(img.class_index);
    }
    FeatureTable {
        by_id,
        labels,
        features,
    }
}

fn evaluate_plan(
    plan: &CvPlan,
    manifest: &Manifest,
    table: &FeatureTable,
    k_classes: usize,
    knn_k: usize,
    audit_key: Option<GroupKey>,
) -> Result<Vec<f64>, SynthError> {
    (0..plan.assignments.len())
        .into_par_iter()
        .map(|fold| {
            let test_ids = &plan.assignments[fold].test_ids;
            let train_ids = plan.train_ids(manifest, fold);
            if let Some(key) = audit_key {
                let audit = audit_overlap(manifest, &train_ids, test_ids, key)?;
                assert!(
                    audit.fraction == 0.0,
                    "grouped fold {fold} leaked groups {:?}",
                    audit.shared_groups
                );
            }
            let train: Vec<TrainPoint> = train_ids
                .iter()
                .map(|id| {
                    let idx = table.by_id[id];
                    TrainPoint {
                        id: id.clone(),
                        label: table.labels[idx],
                        features: table.features[idx].clone(),
                    }
                })
                .collect();
            let test: Vec<FeatureVec> = test_ids
                .iter()
                .map(|id| FeatureVec {
                    id: id.clone(),
                    features: table.features[table.by_id[id]].clone(),
                })
                .collect();
            let truth: Vec<usize> = test_ids.iter().map(|id| table.labels[table.by_id[id]]).collect();
            let preds = knn_predict(&train, &test, k_classes, knn_k)?;
            let pred: Vec<usize> = preds.iter().map(|p| p.label).collect();
            let cm = confusion_matrix(&truth, &pred, k_classes).expect("labels fit the matrix");
            Ok(mcc_multiclass(&cm).expect("folds are never empty"))
        })
        .collect()
}

/// Generate one corpus and score it under per-image and per-volume
/// cross-validation with identical fold seeds.
///
/// Every grouped fold is audited for volume overlap before scoring; a
/// nonzero fraction is a planning bug and panics.
pub fn run_inflation_experiment(
    params: &SynthParams,
    cv_folds: u32,
    repeats: u32,
    knn_k: usize,
    seed: u64,
) -> Result<ExperimentReport, SynthError> {
    let images = generate_corpus(params)?;
    let manifest = corpus_manifest(&images);
    let table = feature_table(&images);

    let image_plan = make_cv_plan(
        &manifest,
        &CvConfig {
            strategy: SplitStrategy::PerImage,
            folds: cv_folds,
            repeats,
            seed,
        },
    )?;
    let group_plan = make_cv_plan(
        &manifest,
        &CvConfig {
            strategy: SplitStrategy::PerGroup {
                key: GroupKey::Volume,
            },
            folds: cv_folds,
            repeats,
            seed,
        },
    )?;

    let mcc_per_image = evaluate_plan(&image_plan, &manifest, &table, params.k_classes, knn_k, None)?;
    let mcc_per_group = evaluate_plan(
        &group_plan,
        &manifest,
        &table,
        params.k_classes,
        knn_k,
        Some(GroupKey::Volume),
    )?;

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_gap = mean(&mcc_per_image) - mean(&mcc_per_group);
    Ok(ExperimentReport {
        mcc_per_image,
        mcc_per_group,
        mean_gap,
        params: params.clone(),
        cv: CvShape {
            folds: cv_folds,
            repeats,
        },
        knn_k,
    })
}

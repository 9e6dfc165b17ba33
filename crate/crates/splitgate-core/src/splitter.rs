//! Split generation and overlap auditing.
//!
//! Two strategies are supported. `PerImage` draws a stratified test set
//! image by image, which is the leak-prone convention this toolkit exists
//! to expose. `PerGroup` keeps every subject or volume whole on one side,
//! so no test image shares its group with any training image. The same
//! strategies drive one-shot splits and repeated k-fold cross-validation
//! plans. All outputs are deterministic functions of the manifest, the
//! configuration and the seed.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{GroupKey, Manifest};
use crate::rng::{derive_seed, shuffle, SplitRng};

/// How images are assigned to split sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitStrategy {
    /// Draw individual images, ignoring grouping.
    PerImage,
    /// Assign whole groups, keeping each subject or volume on one side.
    PerGroup { key: GroupKey },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub strategy: SplitStrategy,
    /// Images drawn into the test side from every class.
    pub test_per_class: usize,
    pub seed: u64,
}

/// Per-class accounting for a generated split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub total: usize,
    pub test_target: usize,
    /// Actual test count; group atomicity can overshoot the target.
    pub test_actual: usize,
}

/// A concrete train/test assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub strategy: SplitStrategy,
    pub test_per_class: usize,
    pub seed: u64,
    /// Sorted image ids on each side.
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub per_class: BTreeMap<String, ClassCounts>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("cross-validation needs at least 2 folds, got {folds}")]
    InvalidFolds { folds: u32 },
    #[error("cross-validation needs at least 1 repeat")]
    InvalidRepeats,
    #[error("class {class} has {count} images, fewer than the requested {requested}")]
    InsufficientImages {
        class: String,
        count: usize,
        requested: usize,
    },
    #[error("record {id} lacks the {key} field required for grouped splitting")]
    MissingGroupKey { id: String, key: GroupKey },
    #[error("whole {key} groups cannot reach the test target for class {class} without emptying its training side")]
    SingleGroupClass { class: String, key: GroupKey },
    #[error("class {class} has {groups} {key} groups, fewer than {folds} folds")]
    TooFewGroups {
        class: String,
        key: GroupKey,
        groups: usize,
        folds: u32,
    },
    #[error("class {class} has {count} images, fewer than {folds} folds")]
    TooFewImages {
        class: String,
        count: usize,
        folds: u32,
    },
    #[error("id {id} is not in the manifest")]
    UnknownId { id: String },
    #[error("the test side is empty")]
    EmptyTest,
}

/// Ids of each class in sorted order, keyed by class label.
fn ids_by_class(manifest: &Manifest) -> BTreeMap<&str, Vec<&str>> {
    let mut by_class: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for rec in manifest.records() {
        by_class
            .entry(rec.class_label.as_str())
            .or_default()
            .push(rec.id.as_str());
    }
    for ids in by_class.values_mut() {
        ids.sort_unstable();
    }
    by_class
}

type GroupTables<'m> = (BTreeMap<&'m str, Vec<&'m str>>, BTreeMap<&'m str, Vec<&'m str>>);

/// Group membership tables: ids per group value, and the sorted group
/// values touching each class. Fails on records without the key.
fn groups_by_class(manifest: &Manifest, key: GroupKey) -> Result<GroupTables<'_>, SplitError> {
    let mut group_members: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut class_groups: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for rec in manifest.records() {
        let group = rec
            .group_value(key)
            .ok_or_else(|| SplitError::MissingGroupKey {
                id: rec.id.clone(),
                key,
            })?;
        group_members.entry(group).or_default().push(rec.id.as_str());
        class_groups
            .entry(rec.class_label.as_str())
            .or_default()
            .insert(group);
    }
    let class_groups = class_groups
        .into_iter()
        .map(|(class, groups)| (class, groups.into_iter().collect()))
        .collect();
    Ok((group_members, class_groups))
}

/// Generate a train/test split drawing `test_per_class` images of every
/// class.
///
/// Per image, the draw is exact. Per group, whole groups are added in
/// shuffled order until the class's test count reaches the target, so the
/// actual count may overshoot; it is reported, never truncated.
pub fn make_split(manifest: &Manifest, config: &SplitConfig) -> Result<SplitPlan, SplitError> {
    let by_class = ids_by_class(manifest);
    for (class, ids) in &by_class {
        if ids.len() < config.test_per_class {
            return Err(SplitError::InsufficientImages {
                class: class.to_string(),
                count: ids.len(),
                requested: config.test_per_class,
            });
        }
    }

    let mut test_ids: BTreeSet<&str> = BTreeSet::new();
    let mut per_class = BTreeMap::new();
    match config.strategy {
        SplitStrategy::PerImage => {
            for (class_idx, (class, ids)) in by_class.iter().enumerate() {
                let mut shuffled = ids.clone();
                let mut rng = SplitRng::from_seed(derive_seed(config.seed, class_idx as u64));
                shuffle(&mut shuffled, &mut rng);
                test_ids.extend(shuffled[..config.test_per_class].iter().copied());
                per_class.insert(
                    class.to_string(),
                    ClassCounts {
                        total: ids.len(),
                        test_target: config.test_per_class,
                        test_actual: config.test_per_class,
                    },
                );
            }
        }
        SplitStrategy::PerGroup { key } => {
            let (group_members, class_groups) = groups_by_class(manifest, key)?;

            // images of each class per group, for target accounting
            let mut class_count_in_group: BTreeMap<(&str, &str), usize> = BTreeMap::new();
            for rec in manifest.records() {
                let group = rec.group_value(key).expect("checked above");
                *class_count_in_group
                    .entry((rec.class_label.as_str(), group))
                    .or_default() += 1;
            }

            let mut assigned: BTreeSet<&str> = BTreeSet::new();
            let mut test_count: BTreeMap<&str, usize> = BTreeMap::new();
            for (class_idx, (class, groups)) in class_groups.iter().enumerate() {
                let mut order = groups.clone();
                let mut rng = SplitRng::from_seed(derive_seed(config.seed, class_idx as u64));
                shuffle(&mut order, &mut rng);
                for group in order {
                    if test_count.get(class).copied().unwrap_or(0) >= config.test_per_class {
                        break;
                    }
                    if !assigned.insert(group) {
                        continue;
                    }
                    for ((member_class, _), member_count) in class_count_in_group
                        .iter()
                        .filter(|((_, g), _)| *g == group)
                    {
                        *test_count.entry(member_class).or_default() += member_count;
                    }
                    test_ids.extend(group_members[group].iter().copied());
                }
            }

            for (class, ids) in &by_class {
                let actual = test_count.get(class).copied().unwrap_or(0);
                if actual >= ids.len() {
                    return Err(SplitError::SingleGroupClass {
                        class: class.to_string(),
                        key,
                    });
                }
                per_class.insert(
                    class.to_string(),
                    ClassCounts {
                        total: ids.len(),
                        test_target: config.test_per_class,
                        test_actual: actual,
                    },
                );
            }
        }
    }

    let mut train_ids = Vec::new();
    let mut test_sorted = Vec::new();
    for rec in manifest.records() {
        if test_ids.contains(rec.id.as_str()) {
            test_sorted.push(rec.id.clone());
        } else {
            train_ids.push(rec.id.clone());
        }
    }
    train_ids.sort_unstable();
    test_sorted.sort_unstable();
    Ok(SplitPlan {
        strategy: config.strategy,
        test_per_class: config.test_per_class,
        seed: config.seed,
        train_ids,
        test_ids: test_sorted,
        per_class,
    })
}

/// How much of the test side shares its group with the training side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub group_key: GroupKey,
    pub test_count: usize,
    /// Test records with no group value; excluded from the fraction.
    pub ungrouped_test: usize,
    /// Test records whose group also appears in the training side.
    pub overlap_count: usize,
    /// `overlap_count` over the keyed test records, 0.0 when none are
    /// keyed.
    pub fraction: f64,
    pub shared_groups: Vec<String>,
    pub overlapping_test_ids: Vec<String>,
}

/// Measure group overlap between a train and a test id list.
pub fn audit_overlap(
    manifest: &Manifest,
    train_ids: &[String],
    test_ids: &[String],
    key: GroupKey,
) -> Result<OverlapReport, SplitError> {
    if test_ids.is_empty() {
        return Err(SplitError::EmptyTest);
    }
    let lookup = |id: &String| {
        manifest.get(id).ok_or_else(|| SplitError::UnknownId {
            id: id.clone(),
        })
    };
    let mut train_groups: BTreeSet<&str> = BTreeSet::new();
    for id in train_ids {
        if let Some(group) = lookup(id)?.group_value(key) {
            train_groups.insert(group);
        }
    }

    let mut ungrouped_test = 0usize;
    let mut overlapping_test_ids = Vec::new();
    let mut shared_groups = BTreeSet::new();
    for id in test_ids {
        match lookup(id)?.group_value(key) {
            None => ungrouped_test += 1,
            Some(group) => {
                if train_groups.contains(group) {
                    overlapping_test_ids.push(id.clone());
                    shared_groups.insert(group.to_string());
                }
            }
        }
    }
    overlapping_test_ids.sort_unstable();
    let keyed = test_ids.len() - ungrouped_test;
    let fraction = if keyed == 0 {
        0.0
    } else {
        overlapping_test_ids.len() as f64 / keyed as f64
    };
    Ok(OverlapReport {
        group_key: key,
        test_count: test_ids.len(),
        ungrouped_test,
        overlap_count: overlapping_test_ids.len(),
        fraction,
        shared_groups: shared_groups.into_iter().collect(),
        overlapping_test_ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub strategy: SplitStrategy,
    pub folds: u32,
    pub repeats: u32,
    pub seed: u64,
}

/// One held-out fold. Training ids are the complement of `test_ids` within
/// the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvFold {
    pub repeat: u32,
    pub fold: u32,
    pub test_ids: Vec<String>,
}

/// A repeated stratified cross-validation plan, folds in repeat-major
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub strategy: SplitStrategy,
    pub folds: u32,
    pub repeats: u32,
    pub seed: u64,
    pub assignments: Vec<CvFold>,
}

impl CvPlan {
    /// Sorted training ids for one fold: every manifest id not held out.
    pub fn train_ids(&self, manifest: &Manifest, fold_index: usize) -> Vec<String> {
        let held_out: BTreeSet<&str> = self.assignments[fold_index]
            .test_ids
            .iter()
            .map(String::as_str)
            .collect();
        let mut ids: Vec<String> = manifest
            .records()
            .iter()
            .filter(|r| !held_out.contains(r.id.as_str()))
            .map(|r| r.id.clone())
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Generate a repeated stratified k-fold plan.
///
/// Each repeat reshuffles with an independent seed derived from the plan
/// seed, so a repeat's folds do not depend on how many repeats are
/// requested. Within a repeat, each class's images (or groups) are dealt
/// round-robin across folds, keeping per-class fold sizes within one of
/// each other.
pub fn make_cv_plan(manifest: &Manifest, config: &CvConfig) -> Result<CvPlan, SplitError> {
    if config.folds < 2 {
        return Err(SplitError::InvalidFolds {
            folds: config.folds,
        });
    }
    if config.repeats == 0 {
        return Err(SplitError::InvalidRepeats);
    }
    let by_class = ids_by_class(manifest);
    let grouped = match config.strategy {
        SplitStrategy::PerGroup { key } => {
            let tables = groups_by_class(manifest, key)?;
            for (class, groups) in &tables.1 {
                if (groups.len() as u32) < config.folds {
                    return Err(SplitError::TooFewGroups {
                        class: class.to_string(),
                        key,
                        groups: groups.len(),
                        folds: config.folds,
                    });
                }
            }
            Some(tables)
        }
        SplitStrategy::PerImage => {
            for (class, ids) in &by_class {
                if (ids.len() as u32) < config.folds {
                    return Err(SplitError::TooFewImages {
                        class: class.to_string(),
                        count: ids.len(),
                        folds: config.folds,
                    });
                }
            }
            None
        }
    };

    let k = config.folds as usize;
    let mut assignments = Vec::with_capacity(k * config.repeats as usize);
    for repeat in 0..config.repeats {
        let mut fold_test: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); k];
        match &grouped {
            None => {
                for (class_idx, ids) in by_class.values().enumerate() {
                    let mut order = ids.clone();
                    let stream = repeat as u64 * by_class.len() as u64 + class_idx as u64;
                    let mut rng = SplitRng::from_seed(derive_seed(config.seed, stream));
                    shuffle(&mut order, &mut rng);
                    for (i, id) in order.into_iter().enumerate() {
                        fold_test[i % k].insert(id);
                    }
                }
            }
            Some((group_members, class_groups)) => {
                let mut assigned: BTreeSet<&str> = BTreeSet::new();
                for (class_idx, groups) in class_groups.values().enumerate() {
                    let mut order = groups.clone();
                    let stream = repeat as u64 * class_groups.len() as u64 + class_idx as u64;
                    let mut rng = SplitRng::from_seed(derive_seed(config.seed, stream));
                    shuffle(&mut order, &mut rng);
                    let mut next = 0usize;
                    for group in order {
                        if !assigned.insert(group) {
                            continue;
                        }
                        fold_test[next % k].extend(group_members[group].iter().copied());
                        next += 1;
                    }
                }
            }
        }
        for (fold, test) in fold_test.into_iter().enumerate() {
            assignments.push(CvFold {
                repeat,
                fold: fold as u32,
                test_ids: test.into_iter().map(str::to_string).collect(),
            });
        }
    }
    Ok(CvPlan {
        strategy: config.strategy,
        folds: config.folds,
        repeats: config.repeats,
        seed: config.seed,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ImageRecord;
    use proptest::prelude::*;

    fn record(id: &str, class: &str, subject: Option<&str>) -> ImageRecord {
        ImageRecord {
            id: id.to_string(),
            path: format!("/data/{id}"),
            class_label: class.to_string(),
            subject: subject.map(str::to_string),
            volume: None,
            slice_index: None,
            content_hash: None,
            dhash: None,
            presplit: None,
        }
    }

    /// `shape`: per class, a list of (subject, image count).
    fn grouped_manifest(shape: &[(&str, &[(&str, usize)])]) -> Manifest {
        let mut records = Vec::new();
        for (class, subjects) in shape {
            for (subject, count) in subjects.iter() {
                for i in 0..*count {
                    records.push(record(
                        &format!("{class}/{subject}/{i:03}.pgm"),
                        class,
                        Some(subject),
                    ));
                }
            }
        }
        Manifest::from_records(records)
    }

    fn flat_manifest(per_class: &[(&str, usize)]) -> Manifest {
        let mut records = Vec::new();
        for (class, count) in per_class {
            for i in 0..*count {
                records.push(record(&format!("{class}/{i:03}.pgm"), class, None));
            }
        }
        Manifest::from_records(records)
    }

    #[test]
    fn per_image_split_draws_exactly_the_target_per_class() {
        let manifest = flat_manifest(&[("a", 10), ("b", 7), ("c", 4)]);
        let config = SplitConfig {
            strategy: SplitStrategy::PerImage,
            test_per_class: 3,
            seed: 11,
        };
        let plan = make_split(&manifest, &config).unwrap();
        assert_eq!(plan.test_ids.len(), 9);
        assert_eq!(plan.train_ids.len() + plan.test_ids.len(), 21);
        let train: BTreeSet<_> = plan.train_ids.iter().collect();
        assert!(plan.test_ids.iter().all(|id| !train.contains(id)));
        for (class, counts) in &plan.per_class {
            assert_eq!(counts.test_actual, 3);
            let observed = plan
                .test_ids
                .iter()
                .filter(|id| manifest.get(id).unwrap().class_label == *class)
                .count();
            assert_eq!(observed, counts.test_actual, "class {class}");
        }
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let manifest = flat_manifest(&[("a", 40), ("b", 40)]);
        let config = SplitConfig {
            strategy: SplitStrategy::PerImage,
            test_per_class: 12,
            seed: 5,
        };
        let first = make_split(&manifest, &config).unwrap();
        let second = make_split(&manifest, &config).unwrap();
        assert_eq!(first, second);
        let other_seed = make_split(&manifest, &SplitConfig { seed: 6, ..config }).unwrap();
        assert_ne!(first.test_ids, other_seed.test_ids);
    }

    #[test]
    fn per_group_split_keeps_groups_whole_and_reports_overshoot() {
        let manifest = grouped_manifest(&[
            ("a", &[("s1", 5), ("s2", 5), ("s3", 5), ("s4", 5)]),
            ("b", &[("t1", 6), ("t2", 6), ("t3", 6)]),
        ]);
        let config = SplitConfig {
            strategy: SplitStrategy::PerGroup {
                key: GroupKey::Subject,
            },
            test_per_class: 5,
            seed: 3,
        };
        let plan = make_split(&manifest, &config).unwrap();
        let report = audit_overlap(&manifest, &plan.train_ids, &plan.test_ids, GroupKey::Subject)
            .unwrap();
        assert_eq!(report.fraction, 0.0);
        assert_eq!(report.overlap_count, 0);
        // groups of five land exactly; a whole group of six overshoots
        assert_eq!(plan.per_class["a"].test_actual, 5);
        assert_eq!(plan.per_class["b"].test_target, 5);
        assert_eq!(plan.per_class["b"].test_actual, 6);
    }

    #[test]
    fn per_group_split_errors_rather_than_emptying_a_class() {
        let manifest = grouped_manifest(&[("a", &[("big", 9), ("small", 1)])]);
        let config = |seed| SplitConfig {
            strategy: SplitStrategy::PerGroup {
                key: GroupKey::Subject,
            },
            test_per_class: 5,
            seed,
        };
        let mut succeeded = false;
        let mut errored = false;
        for seed in 0..20 {
            match make_split(&manifest, &config(seed)) {
                // shuffle put the big group first: 9 >= 5, train keeps 1
                Ok(plan) => {
                    assert_eq!(plan.per_class["a"].test_actual, 9);
                    assert_eq!(plan.train_ids.len(), 1);
                    succeeded = true;
                }
                // small group first: reaching 5 consumes every image
                Err(SplitError::SingleGroupClass { class, .. }) => {
                    assert_eq!(class, "a");
                    errored = true;
                }
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert!(succeeded && errored);
    }

    #[test]
    fn cross_class_groups_stay_atomic() {
        let mut records = Vec::new();
        // subject "shared" has images in both classes
        for i in 0..4 {
            records.push(record(&format!("a/shared/{i}.pgm"), "a", Some("shared")));
            records.push(record(&format!("b/shared/{i}.pgm"), "b", Some("shared")));
        }
        for s in ["s1", "s2"] {
            for i in 0..4 {
                records.push(record(&format!("a/{s}/{i}.pgm"), "a", Some(s)));
                records.push(record(&format!("b/{s}x/{i}.pgm"), "b", Some(&format!("{s}x"))));
            }
        }
        let manifest = Manifest::from_records(records);
        let config = SplitConfig {
            strategy: SplitStrategy::PerGroup {
                key: GroupKey::Subject,
            },
            test_per_class: 4,
            seed: 1,
        };
        let plan = make_split(&manifest, &config).unwrap();
        let test: BTreeSet<_> = plan.test_ids.iter().map(String::as_str).collect();
        let shared_in_test = manifest
            .records()
            .iter()
            .filter(|r| r.subject.as_deref() == Some("shared"))
            .filter(|r| test.contains(r.id.as_str()))
            .count();
        assert!(shared_in_test == 0 || shared_in_test == 8);
    }

    #[test]
    fn split_errors() {
        let single = flat_manifest(&[("a", 1), ("b", 4)]);
        let config = SplitConfig {
            strategy: SplitStrategy::PerImage,
            test_per_class: 2,
            seed: 0,
        };
        assert_eq!(
            make_split(&single, &config),
            Err(SplitError::InsufficientImages {
                class: "a".into(),
                count: 1,
                requested: 2
            })
        );

        let ungrouped = flat_manifest(&[("a", 4)]);
        let grouped = SplitConfig {
            strategy: SplitStrategy::PerGroup {
                key: GroupKey::Subject,
            },
            test_per_class: 2,
            seed: 0,
        };
        assert!(matches!(
            make_split(&ungrouped, &grouped),
            Err(SplitError::MissingGroupKey { .. })
        ));

        let one_group = grouped_manifest(&[("a", &[("only", 6)])]);
        assert_eq!(
            make_split(&one_group, &grouped),
            Err(SplitError::SingleGroupClass {
                class: "a".into(),
                key: GroupKey::Subject
            })
        );
    }

    #[test]
    fn audit_overlap_counts_shared_groups() {
        let manifest = grouped_manifest(&[("a", &[("s1", 2), ("s2", 2), ("s3", 2)])]);
        let ids = |needle: &str| -> Vec<String> {
            manifest
                .records()
                .iter()
                .map(|r| r.id.clone())
                .filter(|id| id.contains(needle))
                .collect()
        };
        // s2 straddles the boundary
        let train: Vec<String> = ids("s1")
            .into_iter()
            .chain(ids("s2").into_iter().take(1))
            .collect();
        let test: Vec<String> = ids("s3")
            .into_iter()
            .chain(ids("s2").into_iter().skip(1))
            .collect();
        let report = audit_overlap(&manifest, &train, &test, GroupKey::Subject).unwrap();
        assert_eq!(report.test_count, 3);
        assert_eq!(report.overlap_count, 1);
        assert_eq!(report.fraction, 1.0 / 3.0);
        assert_eq!(report.shared_groups, vec!["s2".to_string()]);
        assert_eq!(report.ungrouped_test, 0);
    }

    #[test]
    fn audit_overlap_extremes() {
        let manifest = grouped_manifest(&[("a", &[("s1", 2), ("s2", 2)])]);
        let s1: Vec<String> = manifest
            .records()
            .iter()
            .filter(|r| r.subject.as_deref() == Some("s1"))
            .map(|r| r.id.clone())
            .collect();
        let s2: Vec<String> = manifest
            .records()
            .iter()
            .filter(|r| r.subject.as_deref() == Some("s2"))
            .map(|r| r.id.clone())
            .collect();
        let disjoint = audit_overlap(&manifest, &s1, &s2, GroupKey::Subject).unwrap();
        assert_eq!(disjoint.fraction, 0.0);
        let full = audit_overlap(&manifest, &s1, &s1, GroupKey::Subject).unwrap();
        assert_eq!(full.fraction, 1.0);
    }

    #[test]
    fn audit_overlap_ignores_ungrouped_records_in_fraction() {
        let records = vec![
            record("a/x0.pgm", "a", Some("s1")),
            record("a/x1.pgm", "a", Some("s1")),
            record("a/x2.pgm", "a", None),
            record("a/x3.pgm", "a", Some("s2")),
        ];
        let manifest = Manifest::from_records(records);
        let train = vec!["a/x0.pgm".to_string()];
        let test = vec![
            "a/x1.pgm".to_string(),
            "a/x2.pgm".to_string(),
            "a/x3.pgm".to_string(),
        ];
        let report = audit_overlap(&manifest, &train, &test, GroupKey::Subject).unwrap();
        assert_eq!(report.ungrouped_test, 1);
        assert_eq!(report.overlap_count, 1);
        assert_eq!(report.fraction, 0.5);
    }

    #[test]
    fn audit_overlap_errors() {
        let manifest = flat_manifest(&[("a", 2)]);
        assert_eq!(
            audit_overlap(&manifest, &[], &[], GroupKey::Subject),
            Err(SplitError::EmptyTest)
        );
        assert_eq!(
            audit_overlap(
                &manifest,
                &["a/000.pgm".to_string()],
                &["missing".to_string()],
                GroupKey::Subject
            ),
            Err(SplitError::UnknownId {
                id: "missing".into()
            })
        );
    }

    #[test]
    fn cv_plan_per_image_partitions_each_repeat() {
        let manifest = flat_manifest(&[("a", 11), ("b", 8)]);
        let config = CvConfig {
            strategy: SplitStrategy::PerImage,
            folds: 4,
            repeats: 3,
            seed: 21,
        };
        let plan = make_cv_plan(&manifest, &config).unwrap();
        assert_eq!(plan.assignments.len(), 12);
        for repeat in 0..3u32 {
            let folds: Vec<_> = plan
                .assignments
                .iter()
                .filter(|f| f.repeat == repeat)
                .collect();
            assert_eq!(
                folds.iter().map(|f| f.fold).collect::<Vec<_>>(),
                vec![0, 1, 2, 3]
            );
            let mut seen = BTreeSet::new();
            for fold in &folds {
                for id in &fold.test_ids {
                    assert!(seen.insert(id.clone()), "id {id} held out twice");
                }
            }
            assert_eq!(seen.len(), manifest.len());

            for class in ["a", "b"] {
                let sizes: Vec<usize> = folds
                    .iter()
                    .map(|f| {
                        f.test_ids
                            .iter()
                            .filter(|id| manifest.get(id).unwrap().class_label == class)
                            .count()
                    })
                    .collect();
                let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
                assert!(spread <= 1, "class {class} fold sizes {sizes:?}");
            }
        }
    }

    #[test]
    fn cv_plan_grouped_keeps_groups_in_one_fold() {
        let manifest = grouped_manifest(&[(
            "a",
            &[("s1", 3), ("s2", 4), ("s3", 2), ("s4", 5), ("s5", 3)],
        )]);
        let config = CvConfig {
            strategy: SplitStrategy::PerGroup {
                key: GroupKey::Subject,
            },
            folds: 3,
            repeats: 2,
            seed: 9,
        };
        let plan = make_cv_plan(&manifest, &config).unwrap();
        for (i, fold) in plan.assignments.iter().enumerate() {
            let train = plan.train_ids(&manifest, i);
            let report =
                audit_overlap(&manifest, &train, &fold.test_ids, GroupKey::Subject).unwrap();
            assert_eq!(report.fraction, 0.0, "repeat {} fold {}", fold.repeat, fold.fold);
        }
    }

    #[test]
    fn cv_repeats_do_not_depend_on_repeat_count() {
        let manifest = flat_manifest(&[("a", 12), ("b", 9)]);
        let base = CvConfig {
            strategy: SplitStrategy::PerImage,
            folds: 3,
            repeats: 2,
            seed: 77,
        };
        let short = make_cv_plan(&manifest, &base).unwrap();
        let long = make_cv_plan(&manifest, &CvConfig { repeats: 5, ..base }).unwrap();
        assert_eq!(short.assignments[..], long.assignments[..6]);
    }

    #[test]
    fn cv_plan_errors() {
        let manifest = flat_manifest(&[("a", 3)]);
        assert!(matches!(
            make_cv_plan(
                &manifest,
                &CvConfig {
                    strategy: SplitStrategy::PerImage,
                    folds: 1,
                    repeats: 1,
                    seed: 0
                }
            ),
            Err(SplitError::InvalidFolds { .. })
        ));
        assert!(matches!(
            make_cv_plan(
                &manifest,
                &CvConfig {
                    strategy: SplitStrategy::PerImage,
                    folds: 2,
                    repeats: 0,
                    seed: 0
                }
            ),
            Err(SplitError::InvalidRepeats)
        ));
        assert_eq!(
            make_cv_plan(
                &manifest,
                &CvConfig {
                    strategy: SplitStrategy::PerImage,
                    folds: 5,
                    repeats: 1,
                    seed: 0
                }
            ),
            Err(SplitError::TooFewImages {
                class: "a".into(),
                count: 3,
                folds: 5
            })
        );

        let grouped = grouped_manifest(&[("a", &[("s1", 4), ("s2", 4)])]);
        assert_eq!(
            make_cv_plan(
                &grouped,
                &CvConfig {
                    strategy: SplitStrategy::PerGroup {
                        key: GroupKey::Subject
                    },
                    folds: 3,
                    repeats: 1,
                    seed: 0
                }
            ),
            Err(SplitError::TooFewGroups {
                class: "a".into(),
                key: GroupKey::Subject,
                groups: 2,
                folds: 3
            })
        );
    }

    proptest! {
        #[test]
        fn per_image_split_partitions(
            sizes in proptest::collection::vec(2usize..30, 1..4),
            seed in any::<u64>(),
        ) {
            let shape: Vec<(String, usize)> = sizes
                .iter()
                .enumerate()
                .map(|(i, n)| (format!("class{i}"), *n))
                .collect();
            let borrowed: Vec<(&str, usize)> =
                shape.iter().map(|(c, n)| (c.as_str(), *n)).collect();
            let manifest = flat_manifest(&borrowed);
            let target = *sizes.iter().min().unwrap() / 2 + 1;
            let plan = make_split(
                &manifest,
                &SplitConfig {
                    strategy: SplitStrategy::PerImage,
                    test_per_class: target,
                    seed,
                },
            )
            .unwrap();
            let mut all: Vec<&String> = plan.train_ids.iter().chain(&plan.test_ids).collect();
            all.sort_unstable();
            let mut expected: Vec<&String> =
                manifest.records().iter().map(|r| &r.id).collect();
            expected.sort_unstable();
            prop_assert_eq!(all, expected);
            for counts in plan.per_class.values() {
                prop_assert_eq!(counts.test_actual, target);
            }
        }

        #[test]
        fn per_group_split_never_leaks(
            group_sizes in proptest::collection::vec(1usize..6, 2..8),
            target in 1usize..8,
            seed in any::<u64>(),
        ) {
            let subjects: Vec<(String, usize)> = group_sizes
                .iter()
                .enumerate()
                .map(|(i, n)| (format!("s{i}"), *n))
                .collect();
            let borrowed: Vec<(&str, usize)> =
                subjects.iter().map(|(s, n)| (s.as_str(), *n)).collect();
            let manifest = grouped_manifest(&[("a", &borrowed)]);
            let total: usize = group_sizes.iter().sum();
            prop_assume!(target <= total);
            match make_split(
                &manifest,
                &SplitConfig {
                    strategy: SplitStrategy::PerGroup { key: GroupKey::Subject },
                    test_per_class: target,
                    seed,
                },
            ) {
                Ok(plan) => {
                    let report = audit_overlap(
                        &manifest,
                        &plan.train_ids,
                        &plan.test_ids,
                        GroupKey::Subject,
                    )
                    .unwrap();
                    prop_assert_eq!(report.fraction, 0.0);
                    prop_assert!(!plan.train_ids.is_empty());
                    prop_assert!(plan.test_ids.len() >= target);
                }
                Err(SplitError::SingleGroupClass { .. }) => {}
                Err(other) => return Err(TestCaseError::fail(format!("{other:?}"))),
            }
        }
    }
}

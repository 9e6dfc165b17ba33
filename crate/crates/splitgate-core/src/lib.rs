//! Dataset-split auditing and generation for sliced volumetric image data.
//!
//! Volumetric scans are stored as many near-identical 2D slices. Splitting
//! such a dataset at the image level puts slices of one volume on both
//! sides of the train/test boundary, and any model that memorizes volume
//! texture scores far above its real generalization. This crate detects
//! that failure mode and produces splits that avoid it:
//!
//! - [`ingest`] scans directory layouts into a canonical manifest,
//!   parsing filename conventions into class, subject, volume, and slice
//!   identity.
//! - [`hashdup`] finds exact byte duplicates and near-duplicate images
//!   across split sides with SHA-256 and difference hashes.
//! - [`splitter`] builds per-image or grouped train/test splits and
//!   cross-validation plans, and audits any split for group overlap.
//! - [`metrics`] computes the multiclass Matthews correlation
//!   coefficient, per-class precision, recall, F1 and accuracy, and
//!   one-vs-rest ROC AUC.
//! - [`leakstats`] samples a random-label null distribution of the MCC
//!   and tests observed scores against it with a Wilcoxon signed-rank
//!   test and an empirical percentile.
//! - [`synthbench`] generates synthetic volumetric corpora with
//!   controllable inter-slice correlation and reproduces the
//!   split-strategy inflation effect with a nearest-neighbor surrogate.
//!
//! Everything randomized takes an explicit seed and is deterministic
//! across runs, platforms, and thread counts.

pub mod gray;
pub mod hashdup;
pub mod ingest;
pub mod leakstats;
pub mod metrics;
pub mod pgm;
pub mod rng;
pub mod splitter;
pub mod synthbench;

pub use gray::GrayImage;
pub use hashdup::{audit_duplicates, hash_records, DupConfig, DuplicateReport};
pub use ingest::{scan_dataset, GroupKey, ImageRecord, LayoutConfig, Manifest, NamePattern};
pub use leakstats::{leakage_probe, sample_null_mcc, wilcoxon_one_sample, NullDistribution, ProbeReport};
pub use metrics::{evaluate, mcc_multiclass, ConfusionMatrix, MetricReport};
pub use splitter::{audit_overlap, make_cv_plan, make_split, CvPlan, OverlapReport, SplitPlan};
pub use synthbench::{generate_synth, run_inflation_experiment, ExperimentReport, SynthParams};

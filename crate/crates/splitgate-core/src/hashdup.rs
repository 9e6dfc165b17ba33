//! Exact and near-duplicate detection across split boundaries.
//!
//! Exact duplicates are byte-identical files found through SHA-256 of the
//! raw file contents. Near duplicates are found through a 64-bit difference
//! hash: the image is reduced to an 8 row by 9 column grid of block means
//! and each bit records whether a cell is strictly brighter than its left
//! neighbour. Visually similar images land within a small Hamming distance
//! of each other; horizontally mirrored copies are caught by also hashing
//! the flipped image.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gray::{load_gray, DecodeError, GrayImage};
use crate::ingest::ImageRecord;

/// Grid used by the difference hash: `DHASH_ROWS` rows of `DHASH_COLS`
/// block means, giving eight horizontal comparisons per row.
pub const DHASH_ROWS: u32 = 8;
pub const DHASH_COLS: u32 = 9;

/// Default Hamming distance at or below which two hashes count as near
/// duplicates.
pub const DEFAULT_NEAR_THRESHOLD: u32 = 10;

/// Pair budget above which the audit switches from the exhaustive scan to
/// banded candidate generation.
pub const FULL_SCAN_PAIR_LIMIT: u64 = 400_000_000;

/// 64-bit difference hash of an image, or `None` when the image is smaller
/// than the hash grid.
///
/// Bits are packed row-major with the comparison at grid position (0, 0) in
/// the most significant bit.
pub fn compute_dhash(image: &GrayImage) -> Option<u64> {
    let cells = image.block_means(DHASH_ROWS, DHASH_COLS)?;
    let cols = DHASH_COLS as usize;
    let mut hash = 0u64;
    for r in 0..DHASH_ROWS as usize {
        for c in 0..cols - 1 {
            hash <<= 1;
            if cells[r * cols + c + 1] > cells[r * cols + c] {
                hash |= 1;
            }
        }
    }
    Some(hash)
}

/// Number of differing bits between two hashes.
pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// Hashes of one image used by the duplicate audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageHashes {
    pub id: String,
    /// Lowercase hex SHA-256 of the raw file bytes.
    pub content_hash: String,
    pub dhash: Option<u64>,
    /// Difference hash of the horizontally mirrored image.
    pub dhash_flipped: Option<u64>,
}

#[derive(Debug, Error)]
pub enum HashError {
    #[error("failed to read {path} for {id}")]
    Io {
        id: String,
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to decode image for {id}")]
    Decode {
        id: String,
        #[source]
        source: DecodeError,
    },
}

/// Hash one image file: SHA-256 of its bytes plus difference hashes of the
/// decoded pixels and their mirror.
pub fn hash_file(id: &str, path: &Path) -> Result<ImageHashes, HashError> {
    let bytes = std::fs::read(path).map_err(|source| HashError::Io {
        id: id.to_string(),
        path: path.display().to_string(),
        source,
    })?;
    let content_hash = hex::encode(Sha256::digest(&bytes));
    let image = load_gray(path).map_err(|source| HashError::Decode {
        id: id.to_string(),
        source,
    })?;
    let dhash = compute_dhash(&image);
    let dhash_flipped = compute_dhash(&image.flipped_horizontal());
    Ok(ImageHashes {
        id: id.to_string(),
        content_hash,
        dhash,
        dhash_flipped,
    })
}

/// Hash every record's file in parallel, preserving record order.
pub fn hash_records(records: &[ImageRecord]) -> Result<Vec<ImageHashes>, HashError> {
    records
        .par_iter()
        .map(|rec| hash_file(&rec.id, Path::new(&rec.path)))
        .collect()
}

/// Knobs for [`audit_duplicates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DupConfig {
    pub threshold: u32,
    /// Also match horizontally mirrored copies.
    pub check_flips: bool,
    pub full_scan_pair_limit: u64,
}

impl Default for DupConfig {
    fn default() -> Self {
        DupConfig {
            threshold: DEFAULT_NEAR_THRESHOLD,
            check_flips: true,
            full_scan_pair_limit: FULL_SCAN_PAIR_LIMIT,
        }
    }
}

/// A byte-identical train/test file pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPair {
    pub train_id: String,
    pub test_id: String,
    pub content_hash: String,
}

/// A perceptually similar train/test pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearPair {
    pub train_id: String,
    pub test_id: String,
    pub distance: u32,
    /// True when the mirrored test hash was the closer match.
    pub flipped: bool,
}

/// Outcome of a cross-split duplicate audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateReport {
    pub exact: Vec<ExactPair>,
    pub near: Vec<NearPair>,
    /// Train ids times test ids, before any candidate pruning.
    pub pair_count: u64,
    /// Ids whose image was too small to hash, sorted.
    pub unhashed: Vec<String>,
    /// True when banded candidate generation may have missed pairs. The
    /// bands guarantee recall only up to distance 3.
    pub approximate: bool,
}

/// Find exact and near duplicates between the train and test sides.
///
/// Exact pairs are matched on content hash and excluded from the near list.
/// Near pairs are those within `config.threshold` Hamming distance, taking
/// the smaller of the direct and mirrored distances when flip checking is
/// on. Up to `config.full_scan_pair_limit` pairs every combination is
/// compared; beyond that, candidates are generated by bucketing each hash
/// into four 16-bit bands, which finds every pair at distance 3 or less and
/// marks the report approximate for larger thresholds.
pub fn audit_duplicates(
    train: &[ImageHashes],
    test: &[ImageHashes],
    config: &DupConfig,
) -> DuplicateReport {
    let pair_count = train.len() as u64 * test.len() as u64;

    let mut by_content: BTreeMap<&str, (Vec<&str>, Vec<&str>)> = BTreeMap::new();
    for t in train {
        by_content.entry(&t.content_hash).or_default().0.push(&t.id);
    }
    for t in test {
        by_content.entry(&t.content_hash).or_default().1.push(&t.id);
    }
    let mut exact = Vec::new();
    let mut exact_ids = BTreeSet::new();
    for (hash, (train_ids, test_ids)) in &by_content {
        for &train_id in train_ids {
            for &test_id in test_ids {
                exact.push(ExactPair {
                    train_id: train_id.to_string(),
                    test_id: test_id.to_string(),
                    content_hash: hash.to_string(),
                });
                exact_ids.insert((train_id, test_id));
            }
        }
    }
    exact.sort_by(|a, b| (&a.train_id, &a.test_id).cmp(&(&b.train_id, &b.test_id)));

    let mut unhashed: Vec<String> = train
        .iter()
        .chain(test.iter())
        .filter(|h| h.dhash.is_none())
        .map(|h| h.id.clone())
        .collect();
    unhashed.sort();
    unhashed.dedup();

    let banded = pair_count > config.full_scan_pair_limit;
    let mut near = if banded {
        banded_near_pairs(train, test, config, &exact_ids)
    } else {
        full_near_pairs(train, test, config, &exact_ids)
    };
    near.sort_by(|a, b| (&a.train_id, &a.test_id).cmp(&(&b.train_id, &b.test_id)));

    DuplicateReport {
        exact,
        near,
        pair_count,
        unhashed,
        approximate: banded && config.threshold > 3,
    }
}

fn near_pair(
    train: &ImageHashes,
    test: &ImageHashes,
    config: &DupConfig,
    exact_ids: &BTreeSet<(&str, &str)>,
) -> Option<NearPair> {
    if exact_ids.contains(&(train.id.as_str(), test.id.as_str())) {
        return None;
    }
    let train_hash = train.dhash?;
    let direct = hamming(train_hash, test.dhash?);
    let via_flip = match (config.check_flips, test.dhash_flipped) {
        (true, Some(flipped)) => hamming(train_hash, flipped),
        _ => u32::MAX,
    };
    let flipped = via_flip < direct;
    let distance = direct.min(via_flip);
    (distance <= config.threshold).then(|| NearPair {
        train_id: train.id.clone(),
        test_id: test.id.clone(),
        distance,
        flipped,
    })
}

fn full_near_pairs(
    train: &[ImageHashes],
    test: &[ImageHashes],
    config: &DupConfig,
    exact_ids: &BTreeSet<(&str, &str)>,
) -> Vec<NearPair> {
    test.par_iter()
        .flat_map_iter(|te| {
            train
                .iter()
                .filter_map(move |tr| near_pair(tr, te, config, exact_ids))
        })
        .collect()
}

fn bands(hash: u64) -> [u16; 4] {
    [
        (hash >> 48) as u16,
        (hash >> 32) as u16,
        (hash >> 16) as u16,
        hash as u16,
    ]
}

fn banded_near_pairs(
    train: &[ImageHashes],
    test: &[ImageHashes],
    config: &DupConfig,
    exact_ids: &BTreeSet<(&str, &str)>,
) -> Vec<NearPair> {
    let mut buckets: BTreeMap<(u8, u16), Vec<usize>> = BTreeMap::new();
    for (i, tr) in train.iter().enumerate() {
        if let Some(hash) = tr.dhash {
            for (b, value) in bands(hash).into_iter().enumerate() {
                buckets.entry((b as u8, value)).or_default().push(i);
            }
        }
    }

    test.par_iter()
        .flat_map_iter(|te| {
            let mut candidates = BTreeSet::new();
            let mut probe = |hash: u64| {
                for (b, value) in bands(hash).into_iter().enumerate() {
                    if let Some(indices) = buckets.get(&(b as u8, value)) {
                        candidates.extend(indices.iter().copied());
                    }
                }
            };
            if let Some(hash) = te.dhash {
                probe(hash);
            }
            if config.check_flips {
                if let Some(hash) = te.dhash_flipped {
                    probe(hash);
                }
            }
            candidates
                .into_iter()
                .filter_map(|i| near_pair(&train[i], te, config, exact_ids))
                .collect::<Vec<_>>()
        })
        .collect()
}

//! Benchmark-only crate; see `benches/pipeline.rs`. Fixture builders live
//! here so the bench target stays a flat list of measurements.

use splitgate_core::ingest::{ImageRecord, Manifest};
use splitgate_core::rng::SplitRng;
use splitgate_core::GrayImage;

/// A deterministic pseudo-random grayscale image.
pub fn noise_image(seed: u64, width: u32, height: u32) -> GrayImage {
    let mut rng = SplitRng::from_seed(seed);
    let pixels = (0..width * height)
        .map(|_| rng.next_below(256) as u8)
        .collect();
    GrayImage::new(width, height, pixels).expect("valid dimensions")
}

/// A grouped manifest: `classes` x `groups_per_class` x `images_per_group`
/// records with subject identity.
pub fn grouped_manifest(
    classes: usize,
    groups_per_class: usize,
    images_per_group: usize,
) -> Manifest {
    let mut records = Vec::new();
    for c in 0..classes {
        for g in 0..groups_per_class {
            for i in 0..images_per_group {
                records.push(ImageRecord {
                    id: format!("c{c}-g{g:03}-{i:03}"),
                    path: String::new(),
                    class_label: format!("c{c}"),
                    subject: Some(format!("c{c}-g{g:03}")),
                    volume: None,
                    slice_index: Some(i as u64),
                    content_hash: None,
                    dhash: None,
                    presplit: None,
                });
            }
        }
    }
    Manifest::from_records(records)
}

//! Synthetic volumetric corpora with controllable inter-slice correlation.
//!
//! Images are built from three additive layers on a mid-gray base: a fixed
//! per-class grating, a smoothed per-volume random field, and per-slice
//! noise. Consecutive slices of one volume share the class and volume
//! layers and differ only in noise and a slow vertical drift, which gives
//! them the high mutual similarity that makes per-image splits leak.

mod experiment;
mod knn;

pub use experiment::{run_inflation_experiment, CvShape, ExperimentReport};
pub use knn::{knn_predict, FeatureVec, KnnPrediction, TrainPoint};

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gray::GrayImage;
use crate::ingest::{ImageRecord, Manifest};
use crate::pgm::write_pgm;
use crate::rng::{derive_seed, SplitRng};

/// Shape and signal amplitudes of a generated corpus.
///
/// Amplitudes are in pixel units around the mid-gray level 128;
/// `slice_drift` is the vertical shift in pixels per slice index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub k_classes: usize,
    pub volumes_per_class: usize,
    pub slices_per_volume: usize,
    pub width: u32,
    pub height: u32,
    pub class_signal: f64,
    pub volume_signal: f64,
    pub slice_noise: f64,
    pub slice_drift: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            k_classes: 2,
            volumes_per_class: 10,
            slices_per_volume: 50,
            width: 64,
            height: 64,
            class_signal: 25.0,
            volume_signal: 45.0,
            slice_noise: 10.0,
            slice_drift: 0.5,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn volume_count(&self) -> usize {
        self.k_classes * self.volumes_per_class
    }

    pub fn image_count(&self) -> usize {
        self.volume_count() * self.slices_per_volume
    }

    fn validate(&self) -> Result<(), SynthError> {
        let shape_ok = self.k_classes >= 2
            && self.volumes_per_class >= 1
            && self.slices_per_volume >= 1
            && self.width > 0
            && self.height > 0;
        let signal_ok = self.class_signal >= 0.0
            && self.volume_signal >= 0.0
            && self.slice_noise >= 0.0
            && self.slice_drift.is_finite();
        if shape_ok && signal_ok {
            Ok(())
        } else {
            Err(SynthError::BadParams)
        }
    }
}

/// One generated slice with its identity fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthImage {
    /// File name, also the manifest id.
    pub id: String,
    pub class_index: usize,
    pub class_label: String,
    /// Globally unique volume label; doubles as the subject.
    pub volume: String,
    pub slice_index: u64,
    pub image: GrayImage,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need k_classes >= 2, positive shape fields, and non-negative amplitudes")]
    BadParams,
    #[error("writing corpus failed: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("writing the manifest failed: {0}")]
    Manifest(#[from] crate::ingest::ManifestIoError),
    #[error(transparent)]
    Split(#[from] crate::splitter::SplitError),
    #[error("k must be between 1 and the training size")]
    KnnConfig(#[from] knn::KnnError),
}

/// Unit-amplitude class grating: frequency 2 + c cycles across the image,
/// orientation c·π/k, so no two classes share a pattern.
fn class_pattern(class: usize, k_classes: usize, width: u32, height: u32) -> Vec<f64> {
    let freq = (2 + class) as f64;
    let theta = class as f64 * std::f64::consts::PI / k_classes as f64;
    let (dir_x, dir_y) = (theta.cos(), theta.sin());
    let mut field = Vec::with_capacity((width * height) as usize);
    for y in 0..height {
        for x in 0..width {
            let u = x as f64 / width as f64;
            let v = y as f64 / height as f64;
            let phase = 2.0 * std::f64::consts::PI * freq * (u * dir_x + v * dir_y);
            field.push(phase.sin());
        }
    }
    field
}

/// Box blur with wrap-around borders, one axis at a time.
fn box_blur_wrap(field: &[f64], width: usize, height: usize, radius: usize) -> Vec<f64> {
    let span = (2 * radius + 1) as f64;
    let mut rows = vec![0.0; field.len()];
    for y in 0..height {
        for x in 0..width {
            let mut sum = 0.0;
            for dx in 0..=2 * radius {
                let sx = (x + width + dx - radius) % width;
                sum += field[y * width + sx];
            }
            rows[y * width + x] = sum / span;
        }
    }
    let mut out = vec![0.0; field.len()];
    for y in 0..height {
        for x in 0..width {
            let mut sum = 0.0;
            for dy in 0..=2 * radius {
                let sy = (y + height + dy - radius) % height;
                sum += rows[sy * width + x];
            }
            out[y * width + x] = sum / span;
        }
    }
    out
}

/// Volume field: seeded integer noise, box-blurred at radius 4, then
/// normalized to unit RMS so `volume_signal` is the field's pixel RMS.
fn volume_field(seed: u64, width: u32, height: u32) -> Vec<f64> {
    let mut rng = SplitRng::from_seed(seed);
    let raw: Vec<f64> = (0..(width * height) as usize)
        .map(|_| rng.next_below(256) as f64 - 127.5)
        .collect();
    let blurred = box_blur_wrap(&raw, width as usize, height as usize, 4);
    let rms = (blurred.iter().map(|v| v * v).sum::<f64>() / blurred.len() as f64).sqrt();
    if rms == 0.0 {
        blurred
    } else {
        blurred.iter().map(|v| v / rms).collect()
    }
}

fn render_slice(
    params: &SynthParams,
    class_field: &[f64],
    vol_field: &[f64],
    slice_seed: u64,
    slice: usize,
) -> GrayImage {
    let (w, h) = (params.width as usize, params.height as usize);
    let shift = (params.slice_drift * slice as f64).round() as i64;
    let mut rng = SplitRng::from_seed(slice_seed);
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        // the structural field wraps; noise is drawn fresh per pixel
        let sy = (y as i64 - shift).rem_euclid(h as i64) as usize;
        for x in 0..w {
            let structure = params.class_signal * class_field[sy * w + x]
                + params.volume_signal * vol_field[sy * w + x];
            let eta = (rng.next_below(256) as f64 - 127.5) / 128.0;
            let value = 128.0 + structure + params.slice_noise * eta;
            pixels.push(value.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(params.width, params.height, pixels).expect("matching pixel count")
}

/// Generate the whole corpus in memory, ordered by class, volume, slice.
///
/// Seed streams are partitioned: volume fields use streams `[0, CV)`,
/// slice noise uses `[CV, CV + CVS)`, so every unit is independent of
/// generation order.
pub fn generate_corpus(params: &SynthParams) -> Result<Vec<SynthImage>, SynthError> {
    params.validate()?;
    let class_fields: Vec<Vec<f64>> = (0..params.k_classes)
        .map(|c| class_pattern(c, params.k_classes, params.width, params.height))
        .collect();
    let volumes = params.volume_count();
    let vol_fields: Vec<Vec<f64>> = (0..volumes)
        .into_par_iter()
        .map(|v| volume_field(derive_seed(params.seed, v as u64), params.width, params.height))
        .collect();

    let images = (0..params.image_count())
        .into_par_iter()
        .map(|i| {
            let slice = i % params.slices_per_volume;
            let vol_global = i / params.slices_per_volume;
            let class = vol_global / params.volumes_per_class;
            let vol_in_class = vol_global % params.volumes_per_class;
            let slice_seed =
                derive_seed(params.seed, (volumes + i) as u64);
            let image = render_slice(
                params,
                &class_fields[class],
                &vol_fields[vol_global],
                slice_seed,
                slice,
            );
            let class_label = format!("c{class}");
            let volume = format!("c{class}v{vol_in_class:03}");
            SynthImage {
                id: format!("{class_label}-{volume}-{slice:03}.pgm"),
                class_index: class,
                class_label,
                volume,
                slice_index: slice as u64,
                image,
            }
        })
        .collect();
    Ok(images)
}

/// Manifest records for a generated corpus; the subject is the volume.
pub fn corpus_manifest(images: &[SynthImage]) -> Manifest {
    let records = images
        .iter()
        .map(|img| ImageRecord {
            id: img.id.clone(),
            path: img.id.clone(),
            class_label: img.class_label.clone(),
            subject: Some(img.volume.clone()),
            volume: Some(img.volume.clone()),
            slice_index: Some(img.slice_index),
            content_hash: None,
            dhash: None,
            presplit: None,
        })
        .collect();
    Manifest::from_records(records)
}

/// Write the corpus as PGM files plus `manifest.jsonl` under `out_dir`.
pub fn generate_synth(params: &SynthParams, out_dir: &Path) -> Result<Manifest, SynthError> {
    let images = generate_corpus(params)?;
    std::fs::create_dir_all(out_dir)?;
    for img in &images {
        std::fs::write(out_dir.join(&img.id), write_pgm(&img.image))?;
    }
    let manifest = corpus_manifest(&images);
    manifest.write_jsonl(&out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}

/// 16×16 block-mean feature vector of one slice.
pub fn slice_features(image: &GrayImage) -> Vec<u8> {
    image
        .block_means(16, 16)
        .expect("corpus images are at least 16x16")
}

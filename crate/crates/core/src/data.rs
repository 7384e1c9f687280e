//! Dataset generation, ingestion, splitting, and parametric corruption.
//!
//! Features are held as `f64` in memory. The content digest is computed over
//! the f32-quantized interchange encoding (the same bytes the cache format
//! stores), so a dataset and its cached round-trip identify as the same
//! content.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
// Inherent float methods shadow these under std; libm backs them under no_std.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::digest::{Digest, DigestBuilder};
use crate::error::{CoreError, Result};
use crate::net::Batch;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    pub fn get(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generator { name: String, params: String },
    File { path: String },
    Derived { base: Digest, description: String },
}

/// An immutable labelled dataset with disjoint train/val/test splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    examples: usize,
    dim: usize,
    labels: Vec<u32>,
    classes: usize,
    splits: Splits,
    digest: Digest,
    provenance: Provenance,
}

/// Owned row-major feature block gathered from a dataset, carrying the
/// digest that identifies the gathered example set.
#[derive(Debug, Clone)]
pub struct GatheredBatch {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub digest: Digest,
}

impl GatheredBatch {
    pub fn view(&self) -> Batch<'_> {
        Batch::with_digest(&self.data, self.rows, self.cols, self.digest)
            .expect("gathered batch is size-consistent")
    }
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        examples: usize,
        dim: usize,
        labels: Vec<u32>,
        classes: usize,
        splits: Splits,
        provenance: Provenance,
    ) -> Result<Self> {
        if features.len() != examples * dim {
            return Err(CoreError::Shape {
                context: "dataset features",
                expected: examples * dim,
                got: features.len(),
            });
        }
        if labels.len() != examples {
            return Err(CoreError::Shape {
                context: "dataset labels",
                expected: examples,
                got: labels.len(),
            });
        }
        if classes < 2 {
            return Err(CoreError::invalid("a dataset needs at least 2 classes"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(CoreError::invalid(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("dataset features must be finite"));
        }
        let mut seen = vec![false; examples];
        for &i in splits
            .train
            .iter()
            .chain(splits.val.iter())
            .chain(splits.test.iter())
        {
            if i >= examples {
                return Err(CoreError::invalid(format!("split index {i} out of range")));
            }
            if seen[i] {
                return Err(CoreError::invalid(format!("split index {i} appears twice")));
            }
            seen[i] = true;
        }
        let mut train_class_count = vec![0usize; classes];
        for &i in &splits.train {
            train_class_count[labels[i] as usize] += 1;
        }
        if train_class_count.iter().any(|&c| c == 0) {
            return Err(CoreError::invalid(
                "every class needs at least one training example",
            ));
        }
        let digest = content_digest(&features, examples, dim, &labels, classes, &splits);
        Ok(Dataset {
            features,
            examples,
            dim,
            labels,
            classes,
            splits,
            digest,
            provenance,
        })
    }

    pub fn examples(&self) -> usize {
        self.examples
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn splits(&self) -> &Splits {
        &self.splits
    }

    pub fn digest(&self) -> Digest {
        self.digest
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Gathers arbitrary example indices into an owned batch.
    pub fn gather(&self, indices: &[usize]) -> (GatheredBatch, Vec<u32>) {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.feature_row(i));
            labels.push(self.labels[i]);
        }
        let mut idx_bytes = Vec::with_capacity(indices.len() * 8);
        for &i in indices {
            idx_bytes.extend_from_slice(&(i as u64).to_le_bytes());
        }
        let digest = DigestBuilder::new("gather")
            .bytes(&self.digest.0)
            .bytes(&idx_bytes)
            .finish();
        (
            GatheredBatch {
                data,
                rows: indices.len(),
                cols: self.dim,
                digest,
            },
            labels,
        )
    }

    /// Features and labels of one split.
    pub fn split_data(&self, split: Split) -> (GatheredBatch, Vec<u32>) {
        self.gather(self.splits.get(split))
    }

    /// A fixed seeded subsample of a split, capped at `cap` examples, used
    /// where full-split evaluation would dominate runtime (landscape grids,
    /// prediction flattening).
    pub fn subsample(&self, split: Split, cap: usize, seed: u64) -> (GatheredBatch, Vec<u32>) {
        let idx = self.splits.get(split);
        if idx.len() <= cap {
            return self.gather(idx);
        }
        let mut pool: Vec<usize> = idx.to_vec();
        let mut r = rng::stream(seed, rng::domain::DATA);
        rng::shuffle(&mut r, &mut pool);
        pool.truncate(cap);
        pool.sort_unstable();
        self.gather(&pool)
    }

    /// The f32 little-endian interchange encoding of the feature block.
    pub fn features_f32_le(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.features.len() * 4);
        for &v in &self.features {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        buf
    }
}

fn content_digest(
    features: &[f64],
    examples: usize,
    dim: usize,
    labels: &[u32],
    classes: usize,
    splits: &Splits,
) -> Digest {
    let quantized: Vec<f32> = features.iter().map(|&v| v as f32).collect();
    let split_words = |idx: &[usize]| -> Vec<u32> { idx.iter().map(|&i| i as u32).collect() };
    DigestBuilder::new("dataset")
        .u64(examples as u64)
        .u64(dim as u64)
        .u64(classes as u64)
        .f32s(&quantized)
        .u32s(labels)
        .u32s(&split_words(&splits.train))
        .u32s(&split_words(&splits.val))
        .u32s(&split_words(&splits.test))
        .finish()
}

/// Stratified 70/15/15 split; each class keeps at least one training
/// example.
pub fn stratified_splits(labels: &[u32], classes: usize, seed: u64) -> Splits {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    let mut r = rng::stream(seed, rng::domain::SPLIT);
    let mut splits = Splits {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for idx in by_class.iter_mut() {
        rng::shuffle(&mut r, idx);
        let n = idx.len();
        if n == 0 {
            continue;
        }
        let n_train = ((n as f64 * 0.7).round() as usize).clamp(1, n);
        let n_val = ((n as f64 * 0.15).round() as usize).min(n - n_train);
        splits.train.extend_from_slice(&idx[..n_train]);
        splits.val.extend_from_slice(&idx[n_train..n_train + n_val]);
        splits.test.extend_from_slice(&idx[n_train + n_val..]);
    }
    splits.train.sort_unstable();
    splits.val.sort_unstable();
    splits.test.sort_unstable();
    splits
}

/// Splits `n` into `classes` counts differing by at most one.
fn balanced_counts(n: usize, classes: usize) -> Vec<usize> {
    let base = n / classes;
    let extra = n % classes;
    (0..classes)
        .map(|c| base + usize::from(c < extra))
        .collect()
}

/// Two interleaved half-circles: class 0 on the upper unit arc centered at
/// the origin, class 1 on the lower unit arc centered at (1, 0.5). With
/// `noise_sigma == 0` every point lies exactly on its arc.
pub fn make_two_moons(n: usize, noise_sigma: f64, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(CoreError::invalid("two moons needs n >= 4"));
    }
    let counts = balanced_counts(n, 2);
    let mut r = rng::stream(seed, rng::domain::DATA);
    let mut features = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for class in 0..2u32 {
        for _ in 0..counts[class as usize] {
            let t = rng::uniform_in(&mut r, 0.0, core::f64::consts::PI);
            let (mut x, mut y) = if class == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            if noise_sigma > 0.0 {
                x += noise_sigma * rng::standard_normal(&mut r);
                y += noise_sigma * rng::standard_normal(&mut r);
            }
            features.push(x);
            features.push(y);
            labels.push(class);
        }
    }
    let splits = stratified_splits(&labels, 2, seed);
    Dataset::new(
        features,
        n,
        2,
        labels,
        2,
        splits,
        Provenance::Generator {
            name: String::from("two_moons"),
            params: format!("n={n},noise={noise_sigma},seed={seed}"),
        },
    )
}

/// Isotropic Gaussian blobs with centers evenly placed on a circle of
/// radius 3.
pub fn make_blobs(n: usize, classes: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 {
        return Err(CoreError::invalid("blobs need at least 2 classes"));
    }
    if n < 2 * classes {
        return Err(CoreError::invalid("blobs need n >= 2 per class"));
    }
    let counts = balanced_counts(n, classes);
    let mut r = rng::stream(seed, rng::domain::DATA);
    let mut features = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for class in 0..classes {
        let angle = core::f64::consts::TAU * class as f64 / classes as f64;
        let (cx, cy) = (3.0 * angle.cos(), 3.0 * angle.sin());
        for _ in 0..counts[class] {
            features.push(cx + spread * rng::standard_normal(&mut r));
            features.push(cy + spread * rng::standard_normal(&mut r));
            labels.push(class as u32);
        }
    }
    let splits = stratified_splits(&labels, classes, seed);
    Dataset::new(
        features,
        n,
        2,
        labels,
        classes,
        splits,
        Provenance::Generator {
            name: String::from("blobs"),
            params: format!("n={n},classes={classes},spread={spread},seed={seed}"),
        },
    )
}

/// Interleaved spiral arms, one per class, radius up to 2.
pub fn make_spirals(n: usize, classes: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 {
        return Err(CoreError::invalid("spirals need at least 2 classes"));
    }
    if n < 2 * classes {
        return Err(CoreError::invalid("spirals need n >= 2 per class"));
    }
    let counts = balanced_counts(n, classes);
    let mut r = rng::stream(seed, rng::domain::DATA);
    let mut features = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for class in 0..classes {
        let arm_offset = core::f64::consts::TAU * class as f64 / classes as f64;
        for _ in 0..counts[class] {
            let t = rng::uniform_in(&mut r, 0.1, 1.0);
            let radius = 2.0 * t;
            let angle = 3.0 * core::f64::consts::PI * t + arm_offset;
            let x = radius * angle.cos() + noise * rng::standard_normal(&mut r);
            let y = radius * angle.sin() + noise * rng::standard_normal(&mut r);
            features.push(x);
            features.push(y);
            labels.push(class as u32);
        }
    }
    let splits = stratified_splits(&labels, classes, seed);
    Dataset::new(
        features,
        n,
        2,
        labels,
        classes,
        splits,
        Provenance::Generator {
            name: String::from("spirals"),
            params: format!("n={n},classes={classes},noise={noise},seed={seed}"),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    GaussNoise,
    FeatureShift,
    FeatureScale,
    LabelPreservingRotation,
}

/// Parametric input perturbation standing in for dataset shift, with
/// severity levels 0 (identity) through 5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub intensity: u8,
    /// Per-intensity-unit magnitude; 0.06 degrades two-moons visibly at
    /// intensity 5 without collapsing to chance.
    pub base_scale: f64,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, intensity: u8) -> Result<Self> {
        if intensity > 5 {
            return Err(CoreError::invalid("corruption intensity must be in 0..=5"));
        }
        Ok(CorruptionSpec {
            kind,
            intensity,
            base_scale: 0.06,
        })
    }

    fn magnitude(&self) -> f64 {
        self.base_scale * f64::from(self.intensity)
    }
}

/// Applies a corruption to every feature row. Labels and split membership
/// are untouched; intensity 0 returns the dataset unchanged (same digest).
pub fn corrupt(ds: &Dataset, spec: &CorruptionSpec, seed: u64) -> Result<Dataset> {
    if spec.intensity > 5 {
        return Err(CoreError::invalid("corruption intensity must be in 0..=5"));
    }
    if spec.intensity == 0 {
        return Ok(ds.clone());
    }
    let scale = spec.magnitude();
    let mut features = ds.features.clone();
    match spec.kind {
        CorruptionKind::GaussNoise => {
            let mut r = rng::stream(seed, rng::domain::CORRUPT);
            for v in features.iter_mut() {
                *v += scale * rng::standard_normal(&mut r);
            }
        }
        CorruptionKind::FeatureShift => {
            for v in features.iter_mut() {
                *v += scale;
            }
        }
        CorruptionKind::FeatureScale => {
            for v in features.iter_mut() {
                *v *= 1.0 + scale;
            }
        }
        CorruptionKind::LabelPreservingRotation => {
            // Rotate consecutive feature pairs about the origin; a trailing
            // odd dimension is left as is.
            let angle = scale * core::f64::consts::FRAC_PI_2;
            let (sin, cos) = (angle.sin(), angle.cos());
            for row in 0..ds.examples {
                let base = row * ds.dim;
                let mut d = 0;
                while d + 1 < ds.dim {
                    let x = features[base + d];
                    let y = features[base + d + 1];
                    features[base + d] = cos * x - sin * y;
                    features[base + d + 1] = sin * x + cos * y;
                    d += 2;
                }
            }
        }
    }
    Dataset::new(
        features,
        ds.examples,
        ds.dim,
        ds.labels.clone(),
        ds.classes,
        ds.splits.clone(),
        Provenance::Derived {
            base: ds.digest,
            description: format!("{:?} intensity {}", spec.kind, spec.intensity),
        },
    )
}

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(CoreError::Truncated {
            needed: end,
            got: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parses an IDX image payload into `(count, rows, cols, pixels in [0,1])`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<f64>)> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(CoreError::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            got: magic,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let needed = 16 + count * rows * cols;
    if bytes.len() < needed {
        return Err(CoreError::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    let pixels = bytes[16..needed]
        .iter()
        .map(|&b| f64::from(b) / 255.0)
        .collect();
    Ok((count, rows, cols, pixels))
}

/// Parses an IDX label payload.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u32>> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(CoreError::BadMagic {
            expected: IDX_LABELS_MAGIC,
            got: magic,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(CoreError::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    Ok(bytes[8..needed].iter().map(|&b| u32::from(b)).collect())
}

/// Builds a dataset from IDX image and label payloads. Pixels are scaled to
/// `[0, 1]` and `D = rows * cols`; the stratified split is seeded from the
/// image content so identical files always split identically.
pub fn from_idx_bytes(images: &[u8], labels_bytes: &[u8], path: &str) -> Result<Dataset> {
    let (count, rows, cols, pixels) = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels_bytes)?;
    if labels.len() != count {
        return Err(CoreError::CountMismatch {
            images: count,
            labels: labels.len(),
        });
    }
    let classes = labels
        .iter()
        .copied()
        .max()
        .map_or(0, |m| m as usize + 1)
        .max(2);
    let split_seed_bytes = Digest::of_bytes(images).0;
    let split_seed = u64::from_le_bytes(split_seed_bytes[..8].try_into().unwrap());
    let splits = stratified_splits(&labels, classes, split_seed);
    Dataset::new(
        pixels,
        count,
        rows * cols,
        labels,
        classes,
        splits,
        Provenance::File {
            path: String::from(path),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_moons_points_lie_on_arcs_without_noise() {
        let ds = make_two_moons(200, 0.0, 9).unwrap();
        for i in 0..ds.examples() {
            let row = ds.feature_row(i);
            let (cx, cy) = if ds.labels()[i] == 0 {
                (0.0, 0.0)
            } else {
                (1.0, 0.5)
            };
            let r2 = (row[0] - cx).powi(2) + (row[1] - cy).powi(2);
            assert!((r2 - 1.0).abs() < 1e-9, "residual {} at {i}", (r2 - 1.0).abs());
        }
    }

    #[test]
    fn generators_balance_classes_within_one() {
        for ds in [
            make_two_moons(201, 0.1, 4).unwrap(),
            make_blobs(77, 3, 0.5, 4).unwrap(),
            make_spirals(50, 4, 0.05, 4).unwrap(),
        ] {
            let mut counts = vec![0usize; ds.classes()];
            for &l in ds.labels() {
                counts[l as usize] += 1;
            }
            let (min, max) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(max - min <= 1, "counts {counts:?}");
        }
    }

    #[test]
    fn same_seed_same_digest() {
        let a = make_two_moons(120, 0.15, 7).unwrap();
        let b = make_two_moons(120, 0.15, 7).unwrap();
        let c = make_two_moons(120, 0.15, 8).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn splits_are_disjoint_and_cover() {
        let ds = make_spirals(100, 3, 0.1, 2).unwrap();
        let s = ds.splits();
        let total = s.train.len() + s.val.len() + s.test.len();
        assert_eq!(total, ds.examples());
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), ds.examples());
        // Roughly stratified 70/15/15.
        assert!((s.train.len() as f64 / total as f64 - 0.7).abs() < 0.05);
    }

    #[test]
    fn corrupt_intensity_zero_is_identity() {
        let ds = make_two_moons(60, 0.1, 3).unwrap();
        let spec = CorruptionSpec::new(CorruptionKind::GaussNoise, 0).unwrap();
        let out = corrupt(&ds, &spec, 99).unwrap();
        assert_eq!(out.features(), ds.features());
        assert_eq!(out.digest(), ds.digest());
    }

    #[test]
    fn corrupt_preserves_labels_and_splits() {
        let ds = make_two_moons(60, 0.1, 3).unwrap();
        for kind in [
            CorruptionKind::GaussNoise,
            CorruptionKind::FeatureShift,
            CorruptionKind::FeatureScale,
            CorruptionKind::LabelPreservingRotation,
        ] {
            let spec = CorruptionSpec::new(kind, 4).unwrap();
            let out = corrupt(&ds, &spec, 11).unwrap();
            assert_eq!(out.labels(), ds.labels());
            assert_eq!(out.splits(), ds.splits());
            assert_ne!(out.features(), ds.features());
            assert_ne!(out.digest(), ds.digest());
        }
    }

    #[test]
    fn corrupt_is_deterministic_under_seed() {
        let ds = make_two_moons(60, 0.1, 3).unwrap();
        let spec = CorruptionSpec::new(CorruptionKind::GaussNoise, 2).unwrap();
        let a = corrupt(&ds, &spec, 5).unwrap();
        let b = corrupt(&ds, &spec, 5).unwrap();
        let c = corrupt(&ds, &spec, 6).unwrap();
        assert_eq!(a.features(), b.features());
        assert_ne!(a.features(), c.features());
    }

    fn idx_image_fixture() -> (Vec<u8>, Vec<u8>) {
        // Two 2x2 images written by hand.
        let mut images = Vec::new();
        images.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&[0, 255, 128, 64, 255, 0, 0, 255]);
        let mut labels = Vec::new();
        labels.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        labels.extend_from_slice(&2u32.to_be_bytes());
        labels.extend_from_slice(&[1, 0]);
        (images, labels)
    }

    #[test]
    fn idx_fixture_round_trips() {
        let (images, labels) = idx_image_fixture();
        let ds = from_idx_bytes(&images, &labels, "fixture").unwrap();
        assert_eq!(ds.examples(), 2);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.feature_row(0)[0], 0.0);
        assert_eq!(ds.feature_row(0)[1], 1.0);
        assert!((ds.feature_row(0)[2] - 128.0 / 255.0).abs() < 1e-12);
        assert_eq!(ds.feature_row(1)[0], 1.0);
    }

    #[test]
    fn idx_rejects_bad_magic_and_truncation() {
        let (mut images, labels) = idx_image_fixture();
        images[3] = 0x01;
        assert!(matches!(
            from_idx_bytes(&images, &labels, "x"),
            Err(CoreError::BadMagic { .. })
        ));
        let (images, labels) = idx_image_fixture();
        let _ = labels;
        assert!(matches!(
            parse_idx_images(&images[..20]),
            Err(CoreError::Truncated { .. })
        ));
        let (images, mut labels_short) = idx_image_fixture();
        labels_short[7] = 3; // declares 3 labels, payload has 2
        assert!(matches!(
            from_idx_bytes(&images, &labels_short, "x"),
            Err(CoreError::Truncated { .. })
        ));
    }

    #[test]
    fn idx_count_mismatch_is_reported() {
        let (images, _) = idx_image_fixture();
        let mut labels = Vec::new();
        labels.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        labels.extend_from_slice(&3u32.to_be_bytes());
        labels.extend_from_slice(&[1, 0, 1]);
        assert!(matches!(
            from_idx_bytes(&images, &labels, "x"),
            Err(CoreError::CountMismatch { images: 2, labels: 3 })
        ));
    }

    #[test]
    fn subsample_is_deterministic_and_capped() {
        let ds = make_blobs(300, 3, 0.6, 1).unwrap();
        let (a, la) = ds.subsample(Split::Train, 32, 5);
        let (b, lb) = ds.subsample(Split::Train, 32, 5);
        assert_eq!(a.rows, 32);
        assert_eq!(a.data, b.data);
        assert_eq!(la, lb);
        let (c, _) = ds.subsample(Split::Train, 32, 6);
        assert_ne!(a.data, c.data);
    }
}

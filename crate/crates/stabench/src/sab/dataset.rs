//! Scene sample assembly: texture + patterns + target + ground truth.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::parallel;
use crate::sab::attribution::{gt_attribution_mask, AttributionFunction};
use crate::sab::image::ImageGrid;
use crate::sab::patterns::{place_patterns, NUM_PATTERN_KINDS};
use crate::sab::texture::{generate_texture, TextureSpec};
use crate::seeding::{self, salt, subseed};

/// Background intensity range after toning; foreground is 1.0.
const BACKGROUND_LO: f64 = 0.1;
const BACKGROUND_HI_CONTINUOUS: f64 = 0.6;
const BACKGROUND_HI_QUANTIZED: f64 = 0.4;

/// Whole-sample regeneration attempts when pattern placement jams.
const SAMPLE_RETRIES: u64 = 8;

/// Shape of one dataset: image dimensions, per-kind count ceiling, texture
/// family, and background tone quantization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub width: usize,
    pub height: usize,
    /// Per-kind pattern counts are drawn uniformly from `0..=max_count`.
    pub max_count: u32,
    pub texture: TextureSpec,
    /// Number of discrete background tones; `0` keeps the texture continuous
    /// (clamped to `[0.1, 0.6]`). The default of 2 tones `{0.1, 0.4}` keeps
    /// every pixel value at least 0.15 away from any midpoint of two distinct
    /// pixel values, so decision-path routing is immune to perturbations
    /// smaller than that margin.
    pub background_levels: u32,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            width: 16,
            height: 16,
            max_count: 3,
            texture: TextureSpec::default(),
            background_levels: 2,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::Config(format!(
                "image dimensions {}x{} too small; patterns need at least 8x8",
                self.width, self.height
            )));
        }
        if self.max_count == 0 {
            return Err(Error::Config("max_count must be at least 1".into()));
        }
        if self.background_levels == 1 {
            return Err(Error::Config(
                "background_levels must be 0 (continuous) or >= 2".into(),
            ));
        }
        self.texture.validate()
    }
}

/// One generated scene with everything needed downstream: the image, the
/// pattern counts that define the target, and the exact attribution mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSample {
    pub image: ImageGrid,
    pub counts: [u32; NUM_PATTERN_KINDS],
    pub normalized_counts: [f64; NUM_PATTERN_KINDS],
    pub target: f64,
    pub gt_attribution: Vec<f64>,
}

/// Tones a raw texture down to background range. Quantized mode snaps to
/// evenly spaced levels in `[0.1, 0.4]`; continuous mode clamps to `[0.1, 0.6]`.
/// Either way each pixel is rounded through f32 so that in-memory values
/// survive dataset serialization bit-for-bit.
fn prepare_background(texture: &ImageGrid, levels: u32) -> ImageGrid {
    let pixels = texture
        .pixels()
        .iter()
        .map(|v| {
            let toned = if levels == 0 {
                v.clamp(BACKGROUND_LO, BACKGROUND_HI_CONTINUOUS)
            } else {
                let step = ((v * levels as f64).floor() as u32).min(levels - 1);
                let spread = (BACKGROUND_HI_QUANTIZED - BACKGROUND_LO) / (levels - 1) as f64;
                BACKGROUND_LO + step as f64 * spread
            };
            toned as f32 as f64
        })
        .collect();
    ImageGrid::from_pixels(texture.width(), texture.height(), pixels)
        .expect("toning preserves shape and range")
}

/// The background shared by every sample of a dataset: one texture drawn from
/// the master seed, toned down. Keeping the background fixed across samples
/// concentrates all between-sample variation in the patterns themselves,
/// which a tree trained on a few thousand samples can actually exploit.
fn dataset_background(spec: &DatasetSpec, master_seed: u64) -> Result<ImageGrid> {
    let texture_seed = subseed(master_seed, 0, salt::TEXTURE);
    let texture = generate_texture(spec.width, spec.height, &spec.texture, texture_seed)?;
    Ok(prepare_background(&texture, spec.background_levels))
}

fn generate_sample(
    index: u64,
    spec: &DatasetSpec,
    function: &AttributionFunction,
    background: &ImageGrid,
    master_seed: u64,
) -> Result<SceneSample> {
    // Each attempt redraws the counts: a request can exceed the image's slot
    // capacity for count ceilings larger than the default, and retrying the
    // same overfull request could never succeed.
    let mut last_err = None;
    for attempt in 0..SAMPLE_RETRIES {
        let stream = attempt << 32;
        let mut counts_rng = seeding::item_rng(master_seed, index, salt::COUNTS + stream);
        let mut counts = [0u32; NUM_PATTERN_KINDS];
        for slot in &mut counts {
            *slot = rand::Rng::random_range(&mut counts_rng, 0..=spec.max_count);
        }
        let mut rng = seeding::item_rng(master_seed, index, salt::PLACEMENT + stream);
        match place_patterns(background, counts, &mut rng) {
            Ok((image, mask)) => {
                let normalized = counts.map(|c| c as f64 / spec.max_count as f64);
                let target = function.value(&normalized)?;
                let gt_attribution = gt_attribution_mask(&mask, &normalized, function)?;
                return Ok(SceneSample {
                    image,
                    counts,
                    normalized_counts: normalized,
                    target,
                    gt_attribution,
                });
            }
            Err(e @ Error::Generation(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("retry loop ran at least once"))
}

/// Generates samples with global indices `start .. start + count`. Each index
/// owns its sub-seeds, so any contiguous range of the same master sequence is
/// reproducible in isolation (train and validation splits share one stream).
pub fn generate_dataset_range(
    start: u64,
    count: usize,
    spec: &DatasetSpec,
    function: &AttributionFunction,
    master_seed: u64,
) -> Result<Vec<SceneSample>> {
    spec.validate()?;
    let background = dataset_background(spec, master_seed)?;
    parallel::try_map_indexed(count, |i| {
        generate_sample(start + i as u64, spec, function, &background, master_seed)
    })
}

/// Generates `n_samples` scenes (indices `0..n_samples`).
pub fn generate_dataset(
    n_samples: usize,
    spec: &DatasetSpec,
    function: &AttributionFunction,
    master_seed: u64,
) -> Result<Vec<SceneSample>> {
    generate_dataset_range(0, n_samples, spec, function, master_seed)
}

/// Sequential twin of [`generate_dataset`]; used by benchmarks and the
/// parallel-equality tests.
pub fn generate_dataset_seq(
    n_samples: usize,
    spec: &DatasetSpec,
    function: &AttributionFunction,
    master_seed: u64,
) -> Result<Vec<SceneSample>> {
    spec.validate()?;
    let background = dataset_background(spec, master_seed)?;
    parallel::try_map_indexed_seq(n_samples, |i| {
        generate_sample(i as u64, spec, function, &background, master_seed)
    })
}

/// Flattens sample images into a row-major feature matrix.
pub fn feature_matrix(samples: &[SceneSample]) -> Result<FeatureMatrix> {
    if samples.is_empty() {
        return Err(Error::Domain(
            "cannot build a feature matrix from zero samples".into(),
        ));
    }
    let n_cols = samples[0].image.width() * samples[0].image.height();
    let mut values = Vec::with_capacity(samples.len() * n_cols);
    for s in samples {
        values.extend_from_slice(s.image.pixels());
    }
    FeatureMatrix::new(values, samples.len(), n_cols)
}

/// Extracts the target vector.
pub fn targets(samples: &[SceneSample]) -> Vec<f64> {
    samples.iter().map(|s| s.target).collect()
}

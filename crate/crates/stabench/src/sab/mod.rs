//! Synthetic attribution benchmark.
//!
//! Grayscale scenes are procedurally textured, seeded with a random number of
//! geometric patterns (squares, crosses, circles), and labeled by a monotone
//! function of the normalized pattern counts. Because the target depends on
//! the counts alone, an exact per-pixel ground-truth attribution exists: each
//! pattern kind's contribution is divided uniformly over its pixels.

mod attribution;
mod dataset;
mod image;
mod io;
mod patterns;
mod texture;

pub use attribution::{gt_attribution_mask, ssin, AttributionFunction, SSIN_WEIGHTS};
pub use dataset::{
    feature_matrix, generate_dataset, generate_dataset_range, generate_dataset_seq, targets,
    DatasetSpec, SceneSample,
};
pub use image::{write_heatmap_png, write_image_png, ImageGrid};
pub use io::{read_dataset, write_dataset, DatasetManifest, SampleRecord, SAB_MAGIC};
pub use patterns::{place_patterns, KindMask, PatternKind, PixelKind, NUM_PATTERN_KINDS};
pub use texture::{generate_texture, TextureSpec};

//! Dataset serialization: a little-endian binary tensor file plus a JSON
//! sidecar manifest.
//!
//! Binary layout: magic `SAB1`, `u32` sample count, `u32` width, `u32`
//! height, then three f32 tensors back to back: images `[n, h, w]`, targets
//! `[n]`, attribution masks `[n, h, w]`. The manifest records the generator
//! settings and per-sample pattern counts, which makes targets exactly
//! recomputable on load (the binary stores them only in f32).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sab::attribution::AttributionFunction;
use crate::sab::dataset::{DatasetSpec, SceneSample};
use crate::sab::image::ImageGrid;
use crate::sab::patterns::NUM_PATTERN_KINDS;

/// Magic bytes opening every dataset binary.
pub const SAB_MAGIC: [u8; 4] = *b"SAB1";

const MANIFEST_VERSION: u32 = 1;

/// Per-sample provenance: the global generator index and the drawn counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub counts: [u32; NUM_PATTERN_KINDS],
    pub target: f64,
}

/// JSON sidecar describing how a dataset binary was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: u64,
    pub start_index: u64,
    pub spec: DatasetSpec,
    pub attribution: AttributionFunction,
    pub samples: Vec<SampleRecord>,
}

impl DatasetManifest {
    pub fn new(
        spec: DatasetSpec,
        attribution: AttributionFunction,
        seed: u64,
        start_index: u64,
        samples: &[SceneSample],
    ) -> Self {
        let records = samples
            .iter()
            .enumerate()
            .map(|(i, s)| SampleRecord {
                index: start_index + i as u64,
                counts: s.counts,
                target: s.target,
            })
            .collect();
        Self {
            format_version: MANIFEST_VERSION,
            seed,
            start_index,
            spec,
            attribution,
            samples: records,
        }
    }
}

fn push_f32(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&(v as f32).to_le_bytes());
}

/// Writes the binary tensor file and its JSON manifest.
pub fn write_dataset(
    samples: &[SceneSample],
    manifest: &DatasetManifest,
    bin_path: &Path,
    manifest_path: &Path,
) -> Result<()> {
    if samples.len() != manifest.samples.len() {
        return Err(Error::Inconsistency(format!(
            "manifest lists {} samples, got {}",
            manifest.samples.len(),
            samples.len()
        )));
    }
    if samples.is_empty() {
        return Err(Error::Domain("refusing to write an empty dataset".into()));
    }
    let (w, h) = (samples[0].image.width(), samples[0].image.height());
    let mut buf =
        Vec::with_capacity(16 + samples.len() * (2 * w * h + 1) * std::mem::size_of::<f32>());
    buf.extend_from_slice(&SAB_MAGIC);
    buf.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(w as u32).to_le_bytes());
    buf.extend_from_slice(&(h as u32).to_le_bytes());
    for s in samples {
        for v in s.image.pixels() {
            push_f32(&mut buf, *v);
        }
    }
    for s in samples {
        push_f32(&mut buf, s.target);
    }
    for s in samples {
        for v in &s.gt_attribution {
            push_f32(&mut buf, *v);
        }
    }
    fs::write(bin_path, buf)?;
    fs::write(manifest_path, serde_json::to_vec_pretty(manifest)?)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "dataset binary truncated at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(4 * n)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect())
    }
}

/// Reads a dataset back. Images and attribution masks come from the binary;
/// targets are recomputed in f64 from the manifest counts and cross-checked
/// against the stored f32 values.
pub fn read_dataset(
    bin_path: &Path,
    manifest_path: &Path,
) -> Result<(Vec<SceneSample>, DatasetManifest)> {
    let manifest: DatasetManifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    if manifest.format_version != MANIFEST_VERSION {
        return Err(Error::Format(format!(
            "unsupported manifest version {} (expected {MANIFEST_VERSION})",
            manifest.format_version
        )));
    }
    let bytes = fs::read(bin_path)?;
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 0,
    };
    if cur.take(4)? != SAB_MAGIC {
        return Err(Error::Format("bad magic; not a SAB1 dataset file".into()));
    }
    let n = cur.u32()? as usize;
    let w = cur.u32()? as usize;
    let h = cur.u32()? as usize;
    if n != manifest.samples.len() {
        return Err(Error::Format(format!(
            "binary holds {n} samples but manifest lists {}",
            manifest.samples.len()
        )));
    }
    if (w, h) != (manifest.spec.width, manifest.spec.height) {
        return Err(Error::Format(format!(
            "binary is {w}x{h} but manifest spec says {}x{}",
            manifest.spec.width, manifest.spec.height
        )));
    }
    let mut images = Vec::with_capacity(n);
    for _ in 0..n {
        images.push(cur.f32_vec(w * h)?);
    }
    let stored_targets = cur.f32_vec(n)?;
    let mut masks = Vec::with_capacity(n);
    for _ in 0..n {
        masks.push(cur.f32_vec(w * h)?);
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last tensor",
            bytes.len() - cur.pos
        )));
    }

    let mut samples = Vec::with_capacity(n);
    for (i, ((pixels, mask), record)) in images
        .into_iter()
        .zip(masks)
        .zip(&manifest.samples)
        .enumerate()
    {
        let normalized = record
            .counts
            .map(|c| c as f64 / manifest.spec.max_count as f64);
        let target = manifest.attribution.value(&normalized)?;
        if (target - stored_targets[i]).abs() > 1e-6 {
            return Err(Error::Format(format!(
                "sample {i}: stored target {} disagrees with manifest counts (expected {target})",
                stored_targets[i]
            )));
        }
        samples.push(SceneSample {
            image: ImageGrid::from_pixels(w, h, pixels)?,
            counts: record.counts,
            normalized_counts: normalized,
            target,
            gt_attribution: mask,
        });
    }
    Ok((samples, manifest))
}

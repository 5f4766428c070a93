//! Procedural background textures.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sab::image::ImageGrid;
use crate::seeding;

/// Background texture family. Parses from / renders to a compact string
/// (`checker:4`, `grating:8`, `value-noise:4`, `dir:/path`) so it can live in
/// config files and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TextureSpec {
    /// Alternating blocks of 0.25 / 0.75 with the given block size in pixels.
    Checker { period: usize },
    /// Sinusoidal grating with the given wavelength in pixels; orientation
    /// and phase are drawn from the seed.
    Grating { period: f64 },
    /// Smooth value noise: random lattice values, bilinearly interpolated.
    ValueNoise { scale: usize },
    /// Grayscale images loaded from a directory; the seed picks the file.
    Directory { path: PathBuf },
}

impl Default for TextureSpec {
    fn default() -> Self {
        TextureSpec::ValueNoise { scale: 4 }
    }
}

impl TextureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TextureSpec::Checker { period } | TextureSpec::ValueNoise { scale: period } => {
                if *period == 0 {
                    return Err(Error::Config("texture period must be positive".into()));
                }
            }
            TextureSpec::Grating { period } => {
                if !period.is_finite() || *period <= 0.0 {
                    return Err(Error::Config("grating period must be positive".into()));
                }
            }
            TextureSpec::Directory { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for TextureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextureSpec::Checker { period } => write!(f, "checker:{period}"),
            TextureSpec::Grating { period } => write!(f, "grating:{period}"),
            TextureSpec::ValueNoise { scale } => write!(f, "value-noise:{scale}"),
            TextureSpec::Directory { path } => write!(f, "dir:{}", path.display()),
        }
    }
}

impl FromStr for TextureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, arg) = match s.split_once(':') {
            Some((f, a)) => (f, Some(a)),
            None => (s, None),
        };
        let parsed = match family {
            "checker" => TextureSpec::Checker {
                period: parse_arg(arg, 4, "checker period")?,
            },
            "grating" => TextureSpec::Grating {
                period: parse_arg(arg, 8.0, "grating period")?,
            },
            "value-noise" => TextureSpec::ValueNoise {
                scale: parse_arg(arg, 4, "value-noise scale")?,
            },
            "dir" => {
                let path = arg.ok_or_else(|| {
                    Error::Config("texture family 'dir' requires a path, e.g. dir:/textures".into())
                })?;
                TextureSpec::Directory { path: PathBuf::from(path) }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown texture family '{other}'; expected one of: checker, grating, value-noise, dir"
                )))
            }
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

fn parse_arg<T: FromStr>(arg: Option<&str>, default: T, what: &str) -> Result<T> {
    match arg {
        None => Ok(default),
        Some(a) => a
            .parse()
            .map_err(|_| Error::Config(format!("invalid {what} '{a}'"))),
    }
}

impl TryFrom<String> for TextureSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TextureSpec> for String {
    fn from(t: TextureSpec) -> String {
        t.to_string()
    }
}

/// Generates a `width` x `height` texture, deterministic in `(spec, seed)`.
/// Raw values span `[0, 1]`; dataset assembly tones them down afterwards.
pub fn generate_texture(
    width: usize,
    height: usize,
    spec: &TextureSpec,
    seed: u64,
) -> Result<ImageGrid> {
    if width == 0 || height == 0 {
        return Err(Error::Config("texture dimensions must be positive".into()));
    }
    spec.validate()?;
    let mut rng = seeding::item_rng(seed, 0, seeding::salt::TEXTURE);
    let pixels = match spec {
        TextureSpec::Checker { period } => checker(width, height, *period),
        TextureSpec::Grating { period } => {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            grating(width, height, *period, angle, phase)
        }
        TextureSpec::ValueNoise { scale } => value_noise(width, height, *scale, &mut rng),
        TextureSpec::Directory { path } => return from_directory(width, height, path, &mut rng),
    };
    ImageGrid::from_pixels(width, height, pixels)
}

fn checker(width: usize, height: usize, period: usize) -> Vec<f64> {
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let dark = (x / period + y / period).is_multiple_of(2);
            pixels.push(if dark { 0.25 } else { 0.75 });
        }
    }
    pixels
}

fn grating(width: usize, height: usize, period: f64, angle: f64, phase: f64) -> Vec<f64> {
    let (dx, dy) = (angle.cos(), angle.sin());
    let k = std::f64::consts::TAU / period;
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let t = k * (x as f64 * dx + y as f64 * dy) + phase;
            pixels.push(0.5 + 0.5 * t.sin());
        }
    }
    pixels
}

fn value_noise(width: usize, height: usize, scale: usize, rng: &mut impl Rng) -> Vec<f64> {
    let nx = width.div_ceil(scale) + 1;
    let ny = height.div_ceil(scale) + 1;
    let lattice: Vec<f64> = (0..nx * ny).map(|_| rng.random::<f64>()).collect();
    let at = |gx: usize, gy: usize| lattice[gy * nx + gx];
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let fx = x as f64 / scale as f64;
            let fy = y as f64 / scale as f64;
            let (gx, gy) = (fx.floor() as usize, fy.floor() as usize);
            let (tx, ty) = (fx - gx as f64, fy - gy as f64);
            let top = at(gx, gy) * (1.0 - tx) + at(gx + 1, gy) * tx;
            let bottom = at(gx, gy + 1) * (1.0 - tx) + at(gx + 1, gy + 1) * tx;
            pixels.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    pixels
}

fn from_directory(
    width: usize,
    height: usize,
    dir: &std::path::Path,
    rng: &mut impl Rng,
) -> Result<ImageGrid> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("png" | "jpg" | "jpeg" | "bmp" | "tiff")
            )
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!(
            "texture directory {} contains no image files",
            dir.display()
        )));
    }
    let pick = &files[rng.random_range(0..files.len())];
    let img = image::open(pick)?.to_luma8();
    let resized = image::imageops::resize(
        &img,
        width as u32,
        height as u32,
        image::imageops::FilterType::Triangle,
    );
    let pixels = resized.pixels().map(|p| p.0[0] as f64 / 255.0).collect();
    ImageGrid::from_pixels(width, height, pixels)
}

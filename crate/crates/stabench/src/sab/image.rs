//! Grayscale image grid and PNG export.

use std::path::Path;

use crate::error::{Error, Result};

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_pixels(width, height, vec![value; width * height])
    }

    /// Wraps a row-major pixel buffer, validating shape and range.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Domain(format!(
                "pixel buffer has {} values, expected {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!(
                "pixel intensity {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.pixels[y * self.width + x] = value;
    }

    /// Row-major pixel view; `pixels[y * width + x]`.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Flattens to a feature vector (row-major). The inverse of
    /// [`ImageGrid::from_pixels`] with the same dimensions.
    pub fn as_features(&self) -> Vec<f64> {
        self.pixels.clone()
    }
}

fn to_gray(width: usize, height: usize, values: impl Iterator<Item = f64>) -> image::GrayImage {
    let bytes: Vec<u8> = values
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    image::GrayImage::from_raw(width as u32, height as u32, bytes)
        .expect("pixel buffer matches dimensions")
}

/// Writes an image as 8-bit grayscale PNG, mapping `[0, 1]` linearly to `0..=255`.
pub fn write_image_png(grid: &ImageGrid, path: &Path) -> Result<()> {
    to_gray(grid.width, grid.height, grid.pixels.iter().copied())
        .save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Writes a heatmap (e.g. an attribution or explanation vector reshaped to
/// image dimensions) as 8-bit grayscale PNG. Values are scaled by the maximum
/// absolute entry so the hottest pixel renders white; an all-zero map renders
/// black.
pub fn write_heatmap_png(values: &[f64], width: usize, height: usize, path: &Path) -> Result<()> {
    if values.len() != width * height {
        return Err(Error::Domain(format!(
            "heatmap has {} values, expected {}x{}",
            values.len(),
            width,
            height
        )));
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    to_gray(width, height, values.iter().map(|v| v.abs() * scale))
        .save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pixels_validates_shape_and_range() {
        assert!(ImageGrid::from_pixels(2, 2, vec![0.0; 3]).is_err());
        assert!(ImageGrid::from_pixels(2, 2, vec![0.0, 0.5, 1.0, 1.5]).is_err());
        assert!(ImageGrid::from_pixels(0, 2, vec![]).is_err());
        assert!(ImageGrid::from_pixels(2, 2, vec![0.0, 0.5, 1.0, 0.25]).is_ok());
    }

    #[test]
    fn flatten_round_trips() {
        let grid = ImageGrid::from_pixels(3, 2, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let feats = grid.as_features();
        let back = ImageGrid::from_pixels(3, 2, feats).unwrap();
        assert_eq!(grid, back);
        assert_eq!(grid.get(2, 1), 0.5);
    }

    #[test]
    fn png_export_uses_linear_eight_bit_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let grid = ImageGrid::from_pixels(2, 1, vec![0.0, 0.5]).unwrap();
        write_image_png(&grid, &path).unwrap();
        let back = image::open(&path).unwrap().to_luma8();
        assert_eq!(back.get_pixel(0, 0).0[0], 0);
        assert_eq!(back.get_pixel(1, 0).0[0], 128); // round(0.5 * 255)
    }

    #[test]
    fn heatmap_is_max_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("heat.png");
        write_heatmap_png(&[0.0, 0.02, 0.04, 0.0], 2, 2, &path).unwrap();
        let back = image::open(&path).unwrap().to_luma8();
        assert_eq!(back.get_pixel(0, 1).0[0], 255); // 0.04 is the max
        assert_eq!(back.get_pixel(1, 0).0[0], 128);
        assert_eq!(back.get_pixel(0, 0).0[0], 0);
    }
}

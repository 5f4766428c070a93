//! Geometric pattern rasterization and placement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sab::image::ImageGrid;

/// Number of distinct pattern kinds.
pub const NUM_PATTERN_KINDS: usize = 3;

/// Pattern intensity; backgrounds are toned down so foreground pixels are
/// unambiguous.
pub const FOREGROUND: f64 = 1.0;

const SQUARE_SIDE: usize = 4;
const CIRCLE_RADIUS: i32 = 2;
const CROSS_ARM: usize = 4;

/// Side length of one placement slot: the largest pattern bounding box (the
/// circle's diameter). Placing every shape centered in its own slot keeps the
/// set of pixels a given (slot, kind) pair can light fixed, which is what
/// makes the counting task learnable by axis-aligned trees at small sample
/// sizes.
pub const SLOT_SIDE: usize = 2 * CIRCLE_RADIUS as usize + 1;

/// The three pattern kinds, in weight order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Square,
    Cross,
    Circle,
}

impl PatternKind {
    pub const ALL: [PatternKind; NUM_PATTERN_KINDS] =
        [PatternKind::Square, PatternKind::Cross, PatternKind::Circle];

    /// Index into count / weight arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Pixel offsets of the shape within its bounding box, plus the box size.
    fn footprint(self) -> (Vec<(usize, usize)>, usize, usize) {
        match self {
            PatternKind::Square => {
                let mut px = Vec::with_capacity(SQUARE_SIDE * SQUARE_SIDE);
                for y in 0..SQUARE_SIDE {
                    for x in 0..SQUARE_SIDE {
                        px.push((x, y));
                    }
                }
                (px, SQUARE_SIDE, SQUARE_SIDE)
            }
            PatternKind::Cross => {
                // Two ARM-length bars crossing inside an ARM x ARM box; with
                // an even arm there is no exact center, so the horizontal bar
                // sits one row above the vertical bar's column.
                let mut px = Vec::new();
                let row = CROSS_ARM / 2 - 1;
                let col = CROSS_ARM / 2;
                for x in 0..CROSS_ARM {
                    px.push((x, row));
                }
                for y in 0..CROSS_ARM {
                    if y != row {
                        px.push((col, y));
                    }
                }
                (px, CROSS_ARM, CROSS_ARM)
            }
            PatternKind::Circle => {
                let r = CIRCLE_RADIUS;
                let side = (2 * r + 1) as usize;
                let mut px = Vec::new();
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx * dx + dy * dy <= r * r {
                            px.push(((dx + r) as usize, (dy + r) as usize));
                        }
                    }
                }
                (px, side, side)
            }
        }
    }
}

/// What each pixel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelKind {
    Background,
    Pattern(PatternKind),
}

/// Per-pixel pattern ownership, same shape as the image.
#[derive(Debug, Clone, PartialEq)]
pub struct KindMask {
    width: usize,
    height: usize,
    cells: Vec<PixelKind>,
}

impl KindMask {
    pub fn background(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![PixelKind::Background; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> PixelKind {
        self.cells[y * self.width + x]
    }

    pub fn cells(&self) -> &[PixelKind] {
        &self.cells
    }

    /// Number of pixels owned by `kind`.
    pub fn count(&self, kind: PatternKind) -> usize {
        self.cells
            .iter()
            .filter(|c| **c == PixelKind::Pattern(kind))
            .count()
    }
}

/// Non-overlapping placement slots for an image: a centered grid of
/// [`SLOT_SIDE`]-sized cells.
fn slot_origins(width: usize, height: usize) -> Vec<(usize, usize)> {
    let cols = width / SLOT_SIDE;
    let rows = height / SLOT_SIDE;
    let off_x = (width - cols * SLOT_SIDE) / 2;
    let off_y = (height - rows * SLOT_SIDE) / 2;
    let mut origins = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            origins.push((off_x + c * SLOT_SIDE, off_y + r * SLOT_SIDE));
        }
    }
    origins
}

/// Stamps the requested number of each pattern kind onto `base`, without
/// overlap. Each shape occupies one cell of a fixed slot grid, centered; the
/// occupied cells are drawn uniformly without replacement. Returns the
/// stamped image and the per-pixel ownership mask. Fails with a generation
/// error when more shapes are requested than the grid holds (the caller may
/// resample the counts).
pub fn place_patterns(
    base: &ImageGrid,
    requested: [u32; NUM_PATTERN_KINDS],
    rng: &mut impl Rng,
) -> Result<(ImageGrid, KindMask)> {
    let (w, h) = (base.width(), base.height());
    let mut image = base.clone();
    let mut mask = KindMask::background(w, h);
    let slots = slot_origins(w, h);
    let total: u32 = requested.iter().sum();
    if total as usize > slots.len() {
        return Err(Error::Generation(format!(
            "requested {total} patterns but a {w}x{h} image holds at most {} \
             non-overlapping {SLOT_SIDE}x{SLOT_SIDE} slots",
            slots.len()
        )));
    }
    let chosen = rand::seq::index::sample(rng, slots.len(), total as usize);
    let mut chosen = chosen.iter();
    for kind in PatternKind::ALL {
        let (offsets, bw, bh) = kind.footprint();
        for _ in 0..requested[kind.index()] {
            let (sx, sy) = slots[chosen.next().expect("one slot per requested shape")];
            let ox = sx + (SLOT_SIDE - bw) / 2;
            let oy = sy + (SLOT_SIDE - bh) / 2;
            for &(dx, dy) in &offsets {
                image.set(ox + dx, oy + dy, FOREGROUND);
                mask.cells[(oy + dy) * w + (ox + dx)] = PixelKind::Pattern(kind);
            }
        }
    }
    Ok((image, mask))
}

//! Embedded glyph atlas: 36 reference bitmaps, one per symbol in A..Z 0..9.
//!
//! Each glyph is authored on an 8x12 grid (one byte per row, bit 7 =
//! leftmost column), tight-cropped to its ink and normalized to 16x24 by
//! nearest-neighbor scaling. The same bitmaps drive plate rendering and
//! template classification, which is what makes the render/recognize loop
//! exact on clean input.
//!
//! Design constraints on the grid data: every glyph is a single
//! 4-connected ink component (diagonal steps overlap by one column, or
//! segmentation would split it) and no two glyphs share a normalized
//! bitmap (9 and 0 carry distinguishing marks against 6/G and O).

use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::imaging::{read_netpbm, write_netpbm_gray, GrayImage, Netpbm};

/// Normalized glyph width in pixels.
pub const GLYPH_W: usize = 16;
/// Normalized glyph height in pixels.
pub const GLYPH_H: usize = 24;

/// Classification symbols in atlas order.
pub const SYMBOLS: [char; 36] = [
    'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'O', 'P', 'Q', 'R',
    'S', 'T', 'U', 'V', 'W', 'X', 'Y', 'Z', '0', '1', '2', '3', '4', '5', '6', '7', '8', '9',
];

#[rustfmt::skip]
const GLYPH_ROWS: [[u8; 12]; 36] = [
    // A
    [0x3C, 0x66, 0xC3, 0xC3, 0xC3, 0xFF, 0xFF, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3],
    // B
    [0xFC, 0xC6, 0xC6, 0xC6, 0xFC, 0xFC, 0xC6, 0xC3, 0xC3, 0xC3, 0xC6, 0xFC],
    // C
    [0x3C, 0x7E, 0xC3, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC3, 0x7E, 0x3C],
    // D
    [0xFC, 0xCE, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xCE, 0xFC],
    // E
    [0xFF, 0xFF, 0xC0, 0xC0, 0xC0, 0xFC, 0xFC, 0xC0, 0xC0, 0xC0, 0xFF, 0xFF],
    // F
    [0xFF, 0xFF, 0xC0, 0xC0, 0xC0, 0xFC, 0xFC, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0],
    // G
    [0x3C, 0x7E, 0xC3, 0xC0, 0xC0, 0xC0, 0xCF, 0xCF, 0xC3, 0xC3, 0x7E, 0x3C],
    // H
    [0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xFF, 0xFF, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3],
    // I
    [0xFF, 0xFF, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0xFF, 0xFF],
    // J
    [0xFF, 0xFF, 0x06, 0x06, 0x06, 0x06, 0x06, 0x06, 0xC6, 0xC6, 0x7C, 0x38],
    // K
    [0xC3, 0xC6, 0xCC, 0xD8, 0xF0, 0xE0, 0xF0, 0xD8, 0xCC, 0xC6, 0xC3, 0xC3],
    // L
    [0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xFF, 0xFF],
    // M
    [0xC3, 0xE7, 0xFF, 0xDB, 0xDB, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3],
    // N
    [0xC3, 0xE3, 0xF3, 0xF3, 0xDB, 0xDB, 0xCF, 0xCF, 0xC7, 0xC3, 0xC3, 0xC3],
    // O
    [0x3C, 0x7E, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0x7E, 0x3C],
    // P
    [0xFC, 0xC6, 0xC3, 0xC3, 0xC6, 0xFC, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0, 0xC0],
    // Q
    [0x3C, 0x7E, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xDB, 0xDF, 0x7E, 0x3F, 0x03],
    // R
    [0xFC, 0xC6, 0xC3, 0xC3, 0xC6, 0xFC, 0xD8, 0xCC, 0xCC, 0xC6, 0xC6, 0xC3],
    // S
    [0x7E, 0xFF, 0xC3, 0xC0, 0xE0, 0x7C, 0x1E, 0x07, 0x03, 0xC3, 0xFF, 0x7E],
    // T
    [0xFF, 0xFF, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18],
    // U
    [0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0x7E, 0x3C],
    // V
    [0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0x66, 0x66, 0x66, 0x66, 0x3C, 0x3C, 0x18],
    // W
    [0xC3, 0xC3, 0xC3, 0xC3, 0xC3, 0xDB, 0xDB, 0xDB, 0xDB, 0xFF, 0xE7, 0xC3],
    // X
    [0xC3, 0xC3, 0x66, 0x66, 0x3C, 0x18, 0x18, 0x3C, 0x66, 0x66, 0xC3, 0xC3],
    // Y
    [0xC3, 0xC3, 0x66, 0x66, 0x3C, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18],
    // Z
    [0xFF, 0xFF, 0x03, 0x06, 0x0C, 0x18, 0x30, 0x60, 0xC0, 0xC0, 0xFF, 0xFF],
    // 0 (inner slash distinguishes it from O)
    [0x3C, 0x7E, 0xC3, 0xC7, 0xCF, 0xDB, 0xDB, 0xF3, 0xE3, 0xC3, 0x7E, 0x3C],
    // 1
    [0x18, 0x38, 0x78, 0xF8, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0xFF, 0xFF],
    // 2
    [0x7E, 0xFF, 0xC3, 0x03, 0x03, 0x07, 0x0E, 0x1C, 0x38, 0x70, 0xFF, 0xFF],
    // 3
    [0x7E, 0xFF, 0xC3, 0x03, 0x03, 0x1E, 0x1E, 0x03, 0x03, 0xC3, 0xFF, 0x7E],
    // 4
    [0x06, 0x0E, 0x1E, 0x36, 0x66, 0xC6, 0xFF, 0xFF, 0x06, 0x06, 0x06, 0x06],
    // 5
    [0xFF, 0xFF, 0xC0, 0xC0, 0xFC, 0xFE, 0x03, 0x03, 0x03, 0xC3, 0xFF, 0x7E],
    // 6
    [0x3C, 0x7E, 0xC3, 0xC0, 0xC0, 0xFC, 0xFE, 0xC3, 0xC3, 0xC3, 0x7E, 0x3C],
    // 7
    [0xFF, 0xFF, 0x03, 0x07, 0x06, 0x0E, 0x0C, 0x1C, 0x18, 0x38, 0x30, 0x30],
    // 8
    [0x7E, 0xFF, 0xC3, 0xC3, 0x7E, 0x7E, 0xC3, 0xC3, 0xC3, 0xC3, 0xFF, 0x7E],
    // 9
    [0x3C, 0x7E, 0xC3, 0xC3, 0xC3, 0x7F, 0x3F, 0x03, 0x03, 0xC3, 0x7E, 0x3C],
];

/// Expands one 8x12 row table into a normalized 16x24 binary bitmap
/// (ink = 255, background = 0).
fn expand_glyph(rows: &[u8; 12]) -> GrayImage {
    // Tight ink bounds on the 8x12 grid.
    let (mut x0, mut y0, mut x1, mut y1) = (8usize, 12usize, 0usize, 0usize);
    for (y, row) in rows.iter().enumerate() {
        for x in 0..8 {
            if row & (0x80 >> x) != 0 {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    assert!(x1 > x0 && y1 > y0, "glyph grid has no ink");
    let (sw, sh) = (x1 - x0, y1 - y0);
    let mut img = GrayImage::filled(GLYPH_W, GLYPH_H, 0);
    for y in 0..GLYPH_H {
        let sy = y0 + y * sh / GLYPH_H;
        for x in 0..GLYPH_W {
            let sx = x0 + x * sw / GLYPH_W;
            if rows[sy] & (0x80 >> sx) != 0 {
                img.set(x, y, 255);
            }
        }
    }
    img
}

/// The 36-entry reference bitmap set used for both rendering and
/// template classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphAtlas {
    entries: Vec<GrayImage>,
}

static BUILTIN: LazyLock<GlyphAtlas> = LazyLock::new(|| {
    let entries: Vec<GrayImage> = GLYPH_ROWS.iter().map(expand_glyph).collect();
    let atlas = GlyphAtlas { entries };
    debug_assert!(atlas.check_invariants().is_ok());
    atlas
});

impl GlyphAtlas {
    /// The embedded atlas.
    pub fn builtin() -> &'static GlyphAtlas {
        &BUILTIN
    }

    /// Index of a symbol in atlas order.
    pub fn index_of(symbol: char) -> Option<usize> {
        SYMBOLS.iter().position(|&s| s == symbol)
    }

    /// Bitmap for one symbol.
    pub fn glyph(&self, symbol: char) -> Option<&GrayImage> {
        Self::index_of(symbol).map(|i| &self.entries[i])
    }

    /// `(symbol, bitmap)` pairs in atlas order.
    pub fn entries(&self) -> impl Iterator<Item = (char, &GrayImage)> {
        SYMBOLS.iter().copied().zip(self.entries.iter())
    }

    /// Serializes as 36 concatenated canonical P5 images in symbol order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend_from_slice(&write_netpbm_gray(e));
        }
        out
    }

    /// Parses the concatenated-P5 form produced by [`GlyphAtlas::to_bytes`].
    pub fn from_bytes(mut bytes: &[u8]) -> Result<GlyphAtlas> {
        let mut entries = Vec::with_capacity(36);
        for _ in 0..36 {
            let img = match read_netpbm(bytes)? {
                Netpbm::Gray(g) => g,
                Netpbm::Rgb(_) => return Err(Error::BadMagic),
            };
            if img.width() != GLYPH_W || img.height() != GLYPH_H {
                return Err(Error::TruncatedData);
            }
            let consumed = write_netpbm_gray(&img).len();
            bytes = &bytes[consumed..];
            entries.push(img);
        }
        let atlas = GlyphAtlas { entries };
        atlas.check_invariants()?;
        Ok(atlas)
    }

    fn check_invariants(&self) -> Result<()> {
        if self.entries.len() != 36 {
            return Err(Error::TruncatedData);
        }
        for e in &self.entries {
            let ink = e.pixels().iter().filter(|&&v| v > 0).count();
            if ink * 10 < GLYPH_W * GLYPH_H {
                return Err(Error::BlankGlyph);
            }
        }
        Ok(())
    }
}

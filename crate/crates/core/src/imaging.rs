//! Raster primitives and file I/O shared by every pipeline stage.
//!
//! Images are 8-bit, row-major, unpadded. The only on-disk raster format is
//! binary netpbm (P5 grayscale / P6 color, maxval 255): it is bit-exact,
//! trivially seekable and needs no codec. A "video" is a directory of P5
//! frames plus a manifest.
//!
//! All neighborhood operations use edge-replicate padding so that filtering
//! never injects artificial dark borders around a plate crop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-channel 8-bit image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    /// Wraps raw row-major bytes. Panics if `data.len() != width * height`
    /// or either dimension is zero.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(data.len(), width * height, "pixel buffer size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    /// A width x height image filled with a constant intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_raw(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with coordinates clamped onto the image (edge replication).
    #[inline]
    fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// Bilinear sample at floating-point coordinates; out-of-range
    /// coordinates replicate the nearest edge pixel.
    fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, self.width as f64 - 1.0);
        let y = y.clamp(0.0, self.height as f64 - 1.0);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let a = self.get(x0, y0) as f64;
        let b = self.get(x1, y0) as f64;
        let c = self.get(x0, y1) as f64;
        let d = self.get(x1, y1) as f64;
        a * (1.0 - fx) * (1.0 - fy) + b * fx * (1.0 - fy) + c * (1.0 - fx) * fy + d * fx * fy
    }
}

/// Three-channel 8-bit image, row-major RGB triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// Wraps raw row-major RGB bytes. Panics if `data.len() != 3 * width *
    /// height` or either dimension is zero.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(data.len(), 3 * width * height, "pixel buffer size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let i = 3 * (y * self.width + x);
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }
}

/// Axis-aligned pixel rectangle: top-left corner plus extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl BBox {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        assert!(w >= 1 && h >= 1, "box extent must be >= 1");
        Self { x, y, w, h }
    }

    /// One past the rightmost column.
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// One past the bottom row.
    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &BBox) -> bool {
        self.x <= other.x
            && self.y <= other.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// True when the box fits inside a width x height frame.
    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    /// Intersection-over-union of two boxes; 0.0 when disjoint.
    pub fn iou(&self, other: &BBox) -> f64 {
        let ix0 = self.x.max(other.x);
        let iy0 = self.y.max(other.y);
        let ix1 = self.right().min(other.right());
        let iy1 = self.bottom().min(other.bottom());
        if ix1 <= ix0 || iy1 <= iy0 {
            return 0.0;
        }
        let inter = ((ix1 - ix0) * (iy1 - iy0)) as f64;
        let union = (self.area() + other.area()) as f64 - inter;
        inter / union
    }
}

/// Either flavor of a decoded netpbm file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Netpbm {
    Gray(GrayImage),
    Rgb(RgbImage),
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_uint(&mut self) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut value: u64 = 0;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value * 10 + u64::from(self.bytes[self.pos] - b'0');
            if value > u64::from(u32::MAX) {
                return Err(Error::TruncatedData);
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::TruncatedData);
        }
        Ok(value as u32)
    }
}

/// Decodes a binary netpbm image (P5 grayscale or P6 color, maxval 255).
///
/// Header comments introduced by `#` are skipped. Exactly one whitespace
/// byte separates the header from the pixel payload.
pub fn read_netpbm(bytes: &[u8]) -> Result<Netpbm> {
    if bytes.len() < 2 {
        return Err(Error::BadMagic);
    }
    let color = match &bytes[..2] {
        b"P5" => false,
        b"P6" => true,
        _ => return Err(Error::BadMagic),
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.read_uint()? as usize;
    let height = cur.read_uint()? as usize;
    let maxval = cur.read_uint()?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::TruncatedData);
    }
    // Single whitespace byte before the raster.
    match bytes.get(cur.pos) {
        Some(b' ' | b'\t' | b'\r' | b'\n') => cur.pos += 1,
        _ => return Err(Error::TruncatedData),
    }
    let channels = if color { 3 } else { 1 };
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or(Error::TruncatedData)?;
    let raster = bytes.get(cur.pos..cur.pos + need).ok_or(Error::TruncatedData)?;
    if color {
        Ok(Netpbm::Rgb(RgbImage::from_raw(width, height, raster.to_vec())))
    } else {
        Ok(Netpbm::Gray(GrayImage::from_raw(width, height, raster.to_vec())))
    }
}

/// Encodes a grayscale image with the canonical header `P5\n<w> <h>\n255\n`.
pub fn write_netpbm_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Encodes a color image with the canonical header `P6\n<w> <h>\n255\n`.
pub fn write_netpbm_rgb(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Reads a netpbm file from disk as grayscale, converting P6 via [`to_gray`].
pub fn read_gray_file(path: &std::path::Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match read_netpbm(&bytes)? {
        Netpbm::Gray(g) => Ok(g),
        Netpbm::Rgb(c) => Ok(to_gray(&c)),
    }
}

/// Writes a grayscale image to disk in canonical P5 form.
pub fn write_gray_file(path: &std::path::Path, img: &GrayImage) -> Result<()> {
    std::fs::write(path, write_netpbm_gray(img)).map_err(|e| Error::io(path, e))
}

/// BT.601 luma conversion: `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.width * img.height);
    for px in img.data.chunks_exact(3) {
        let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
        data.push(y.round().clamp(0.0, 255.0) as u8);
    }
    GrayImage::from_raw(img.width, img.height, data)
}

/// Median filter over a k x k window (k odd), edge-replicate.
pub fn median_filter(img: &GrayImage, k: usize) -> GrayImage {
    assert!(k % 2 == 1 && k >= 1, "median window must be odd");
    if k == 1 {
        return img.clone();
    }
    let r = (k / 2) as isize;
    let mut out = Vec::with_capacity(img.data.len());
    let mut window = Vec::with_capacity(k * k);
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            window.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    window.push(img.get_clamped(x + dx, y + dy));
                }
            }
            window.sort_unstable();
            out.push(window[window.len() / 2]);
        }
    }
    GrayImage::from_raw(img.width, img.height, out)
}

/// 3x3 median filter, the denoising step of the enhancement chain.
pub fn median3x3(img: &GrayImage) -> GrayImage {
    median_filter(img, 3)
}

/// Intensity percentile by the nearest-rank rule on the sorted pixel
/// multiset. `pct` in 0..=100.
fn percentile(sorted: &[u8], pct: u8) -> u8 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((pct as usize * n).div_ceil(100)).max(1);
    sorted[rank - 1]
}

/// Linear contrast stretch mapping the `lo_pct` percentile to 0 and the
/// `hi_pct` percentile to 255, clamping outside values. Returns a plain
/// copy when the two percentiles coincide.
pub fn contrast_stretch(img: &GrayImage, lo_pct: u8, hi_pct: u8) -> GrayImage {
    assert!(lo_pct < hi_pct && hi_pct <= 100, "need 0 <= lo < hi <= 100");
    let mut sorted = img.data.clone();
    sorted.sort_unstable();
    let a = percentile(&sorted, lo_pct);
    let b = percentile(&sorted, hi_pct);
    if a == b {
        return img.clone();
    }
    let span = (b - a) as f64;
    let lut: Vec<u8> = (0..=255u16)
        .map(|v| {
            let scaled = 255.0 * (v as f64 - a as f64) / span;
            scaled.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let data = img.data.iter().map(|&v| lut[v as usize]).collect();
    GrayImage::from_raw(img.width, img.height, data)
}

/// Bilinear resize with the half-pixel-center convention. A same-size
/// request returns a pixel-identical copy.
pub fn resize_bilinear(img: &GrayImage, new_w: usize, new_h: usize) -> GrayImage {
    assert!(new_w >= 1 && new_h >= 1, "target dimensions must be >= 1");
    if new_w == img.width && new_h == img.height {
        return img.clone();
    }
    let sx = img.width as f64 / new_w as f64;
    let sy = img.height as f64 / new_h as f64;
    let mut data = Vec::with_capacity(new_w * new_h);
    for y in 0..new_h {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..new_w {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            data.push(img.sample_bilinear(src_x, src_y).round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::from_raw(new_w, new_h, data)
}

/// Rotates about the image center by `degrees` (positive = counter-clockwise
/// in pixel coordinates), inverse-mapping with bilinear sampling. Output
/// dimensions equal input dimensions; samples falling outside the source
/// replicate the nearest edge pixel. Zero degrees returns an exact copy.
pub fn rotate(img: &GrayImage, degrees: f64) -> GrayImage {
    if degrees == 0.0 {
        return img.clone();
    }
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cx = (img.width as f64 - 1.0) * 0.5;
    let cy = (img.height as f64 - 1.0) * 0.5;
    let mut data = Vec::with_capacity(img.data.len());
    for y in 0..img.height {
        let dy = y as f64 - cy;
        for x in 0..img.width {
            let dx = x as f64 - cx;
            let src_x = cos * dx + sin * dy + cx;
            let src_y = -sin * dx + cos * dy + cy;
            data.push(img.sample_bilinear(src_x, src_y).round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::from_raw(img.width, img.height, data)
}

/// Extracts the sub-image covered by `bx`.
pub fn crop(img: &GrayImage, bx: &BBox) -> Result<GrayImage> {
    if !bx.fits_in(img.width, img.height) {
        return Err(Error::OutOfBounds);
    }
    let mut data = Vec::with_capacity(bx.w * bx.h);
    for y in bx.y..bx.bottom() {
        let row = y * img.width;
        data.extend_from_slice(&img.data[row + bx.x..row + bx.right()]);
    }
    Ok(GrayImage::from_raw(bx.w, bx.h, data))
}

/// Crops `px` pixels from all four sides.
pub fn shrink_border(img: &GrayImage, px: usize) -> Result<GrayImage> {
    if px == 0 {
        return Ok(img.clone());
    }
    if 2 * px >= img.width || 2 * px >= img.height {
        return Err(Error::TooSmall);
    }
    crop(
        img,
        &BBox::new(px, px, img.width - 2 * px, img.height - 2 * px),
    )
}

/// Separable Gaussian blur, kernel radius `ceil(3 sigma)`, edge-replicate,
/// kernel normalized to sum 1.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for i in -radius..=radius {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }

    let w = img.width as isize;
    let h = img.height as isize;
    // Horizontal pass into floats, vertical pass back to bytes.
    let mut tmp = vec![0.0f64; img.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sx = (x + ki as isize - radius).clamp(0, w - 1);
                acc += kv * img.data[(y * w + sx) as usize] as f64;
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    let mut data = Vec::with_capacity(img.data.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sy = (y + ki as isize - radius).clamp(0, h - 1);
                acc += kv * tmp[(sy * w + x) as usize];
            }
            data.push(acc.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::from_raw(img.width, img.height, data)
}

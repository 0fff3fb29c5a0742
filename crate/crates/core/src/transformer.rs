//! The fixed twenty-variant rotation/crop sweep applied to every enhanced
//! plate before recognition.
//!
//! A plate photographed at an angle reads badly; sweeping small counter
//! rotations and border crops produces at least one near-horizontal
//! sub-image, and the recognizer's confidence picks the winner. The sweep
//! is a 5 x 4 grid: rotations at 6-degree pitch across +/-12 degrees
//! crossed with four border-crop levels spanning 0..=25 pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{rotate, shrink_border, GrayImage};

/// Rotation levels in degrees, the outer loop of the grid.
pub const ROTATIONS_DEG: [f64; 5] = [-12.0, -6.0, 0.0, 6.0, 12.0];

/// Border-crop levels in pixels, the inner loop of the grid.
pub const CROP_LEVELS_PX: [u32; 4] = [0, 8, 17, 25];

/// One member of the transform sweep: rotate, then crop the border.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformVariant {
    /// Rotation in degrees, within [-12, 12].
    pub rotation_deg: f64,
    /// Border crop in pixels, within [0, 25].
    pub crop_px: u32,
}

/// The twenty variants in row-major grid order (rotation outer, crop
/// inner). The list always contains the identity `(0, 0)`.
pub fn variant_set() -> Vec<TransformVariant> {
    let mut out = Vec::with_capacity(20);
    for &rotation_deg in &ROTATIONS_DEG {
        for &crop_px in &CROP_LEVELS_PX {
            out.push(TransformVariant {
                rotation_deg,
                crop_px,
            });
        }
    }
    out
}

/// Crop amount actually applied to a `w x h` plate: the nominal level,
/// scaled down so small crops survive — capped at a quarter of the short
/// side and at whatever leaves at least 8x4 pixels.
fn effective_crop(v: &TransformVariant, w: usize, h: usize) -> usize {
    let quarter = w.min(h) / 4;
    let keep_w = (w - 8) / 2;
    let keep_h = (h - 4) / 2;
    (v.crop_px as usize).min(quarter).min(keep_w).min(keep_h)
}

/// Applies one variant: rotate about the center, then shrink the border by
/// the effective crop. The identity variant returns a pixel-identical copy.
pub fn apply(plate: &GrayImage, v: &TransformVariant) -> Result<GrayImage> {
    if plate.width() < 8 || plate.height() < 4 {
        return Err(Error::TooSmall);
    }
    let crop_eff = effective_crop(v, plate.width(), plate.height());
    shrink_border(&rotate(plate, v.rotation_deg), crop_eff)
}

/// Applies every member of [`variant_set`] in order; always yields twenty
/// pairs for any plate of at least 8x4 pixels.
pub fn expand(plate: &GrayImage) -> Result<Vec<(TransformVariant, GrayImage)>> {
    variant_set()
        .into_iter()
        .map(|v| apply(plate, &v).map(|img| (v, img)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_variants_in_grid_order() {
        let set = variant_set();
        assert_eq!(set.len(), 20);
        assert_eq!(set[0], TransformVariant { rotation_deg: -12.0, crop_px: 0 });
        assert!(set.contains(&TransformVariant { rotation_deg: 0.0, crop_px: 0 }));
        let max_rot = set.iter().map(|v| v.rotation_deg.abs()).fold(0.0, f64::max);
        let max_crop = set.iter().map(|v| v.crop_px).max().unwrap();
        assert_eq!(max_rot, 12.0);
        assert_eq!(max_crop, 25);
        assert!(set.iter().all(|v| v.rotation_deg.abs() <= 12.0 && v.crop_px <= 25));
    }

    #[test]
    fn identity_variant_is_bit_exact() {
        let img = GrayImage::from_raw(16, 8, (0..128).collect());
        let v = TransformVariant { rotation_deg: 0.0, crop_px: 0 };
        assert_eq!(apply(&img, &v).unwrap(), img);
    }

    #[test]
    fn crop_scales_down_on_small_plates() {
        let img = GrayImage::filled(200, 64, 100);
        let v = TransformVariant { rotation_deg: 6.0, crop_px: 25 };
        let out = apply(&img, &v).unwrap();
        // quarter of the short side: min(25, 16) = 16
        assert_eq!((out.width(), out.height()), (168, 32));
    }

    #[test]
    fn constant_image_stays_constant_under_any_variant() {
        let img = GrayImage::filled(100, 40, 160);
        for (_, out) in expand(&img).unwrap() {
            assert!(out.pixels().iter().all(|&v| v == 160));
        }
    }

    #[test]
    fn expand_always_returns_twenty_pairs() {
        for (w, h) in [(8, 4), (9, 6), (50, 20), (300, 90)] {
            let img = GrayImage::filled(w, h, 10);
            let pairs = expand(&img).unwrap();
            assert_eq!(pairs.len(), 20, "size {w}x{h}");
            for (_, out) in &pairs {
                assert!(out.width() >= 8 && out.height() >= 4);
            }
        }
    }

    #[test]
    fn expand_rejects_tiny_plates() {
        let img = GrayImage::filled(7, 4, 10);
        assert!(matches!(expand(&img), Err(Error::TooSmall)));
    }

    #[test]
    fn output_dims_depend_only_on_input_dims() {
        let a = GrayImage::filled(60, 24, 0);
        let b = GrayImage::from_raw(60, 24, (0..60 * 24).map(|i| (i % 251) as u8).collect());
        let dims = |img: &GrayImage| -> Vec<(usize, usize)> {
            expand(img)
                .unwrap()
                .iter()
                .map(|(_, o)| (o.width(), o.height()))
                .collect()
        };
        assert_eq!(dims(&a), dims(&b));
    }
}

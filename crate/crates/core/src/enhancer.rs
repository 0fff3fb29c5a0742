//! Plate quality enhancement and its test-side counterpart, controlled
//! degradation.
//!
//! The enhancement stage is a contract: anything mapping a grayscale plate
//! crop to a cleaner grayscale plate crop can fill the slot. The built-in
//! [`ClassicEnhancer`] is a classical chain — median denoise, percentile
//! contrast stretch, height normalization — with no trained weights.
//! [`degrade`] is its adversary: a seeded recipe of contrast compression,
//! blur and Gaussian noise used by the synthetic corpus.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::{contrast_stretch, gaussian_blur, median3x3, median_filter, resize_bilinear, GrayImage};

/// Height every enhanced plate is normalized to.
pub const ENHANCED_HEIGHT: usize = 64;

/// Blur component of a degradation recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Blur {
    None,
    /// Gaussian blur with the given sigma (> 0).
    Gaussian(f64),
    /// Median blur with the given odd window size (>= 3).
    Median(u32),
}

/// A seeded degradation recipe: contrast compression toward mid-gray,
/// optional blur, and additive Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradeSpec {
    /// Standard deviation of the additive noise, >= 0.
    pub noise_sigma: f64,
    pub blur: Blur,
    /// Contrast retention factor in (0, 1]; 1.0 keeps contrast intact.
    pub contrast_scale: f64,
    /// Seed for the noise generator; fixes the output bytes.
    pub seed: u64,
}

impl DegradeSpec {
    /// A recipe that leaves the image untouched.
    pub fn neutral() -> Self {
        DegradeSpec {
            noise_sigma: 0.0,
            blur: Blur::None,
            contrast_scale: 1.0,
            seed: 0,
        }
    }

    /// Field-level validity: nonnegative noise, contrast in (0, 1], blur
    /// parameters in range.
    pub fn is_valid(&self) -> bool {
        let blur_ok = match self.blur {
            Blur::Gaussian(s) => s > 0.0,
            Blur::Median(k) => k >= 3 && k % 2 == 1,
            Blur::None => true,
        };
        self.noise_sigma >= 0.0
            && self.contrast_scale > 0.0
            && self.contrast_scale <= 1.0
            && blur_ok
    }
}

/// The enhancement contract: a drop-in slot for any quality-improvement
/// component, learned or classical.
pub trait Enhancer {
    fn enhance(&self, plate: &GrayImage) -> Result<GrayImage>;
}

/// Built-in enhancement chain: 3x3 median filter, 2-98 percentile contrast
/// stretch, bilinear resize to height 64 preserving aspect ratio.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicEnhancer;

impl Enhancer for ClassicEnhancer {
    fn enhance(&self, plate: &GrayImage) -> Result<GrayImage> {
        enhance(plate)
    }
}

/// Pass-through enhancer, for measuring what the stage buys.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoEnhancer;

impl Enhancer for NoEnhancer {
    fn enhance(&self, plate: &GrayImage) -> Result<GrayImage> {
        if plate.width() < 8 || plate.height() < 4 {
            return Err(Error::TooSmall);
        }
        Ok(plate.clone())
    }
}

/// The built-in enhancement chain as a plain function.
pub fn enhance(plate: &GrayImage) -> Result<GrayImage> {
    if plate.width() < 8 || plate.height() < 4 {
        return Err(Error::TooSmall);
    }
    let denoised = median3x3(plate);
    let stretched = contrast_stretch(&denoised, 2, 98);
    if stretched.height() == ENHANCED_HEIGHT {
        return Ok(stretched);
    }
    let scale = ENHANCED_HEIGHT as f64 / stretched.height() as f64;
    let new_w = ((stretched.width() as f64 * scale).round() as usize).max(8);
    Ok(resize_bilinear(&stretched, new_w, ENHANCED_HEIGHT))
}

/// Draws standard normal deviates from a seeded generator via the
/// Box-Muller transform.
struct GaussianSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSampler {
    fn new(seed: u64) -> Self {
        GaussianSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let mut u1: f64 = self.rng.random();
        while u1 <= f64::MIN_POSITIVE {
            u1 = self.rng.random();
        }
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Applies a degradation recipe: contrast compression toward 128, blur,
/// then seeded Gaussian noise, each stage skipped when neutral. The
/// neutral spec is the identity.
pub fn degrade(img: &GrayImage, spec: &DegradeSpec) -> GrayImage {
    assert!(spec.is_valid(), "degrade spec out of range: {spec:?}");
    let mut out = if spec.contrast_scale < 1.0 {
        let data = img
            .pixels()
            .iter()
            .map(|&v| {
                let c = 128.0 + (v as f64 - 128.0) * spec.contrast_scale;
                c.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        GrayImage::from_raw(img.width(), img.height(), data)
    } else {
        img.clone()
    };
    out = match spec.blur {
        Blur::None => out,
        Blur::Gaussian(sigma) => gaussian_blur(&out, sigma),
        Blur::Median(k) => median_filter(&out, k as usize),
    };
    if spec.noise_sigma > 0.0 {
        let mut sampler = GaussianSampler::new(spec.seed);
        let data = out
            .pixels()
            .iter()
            .map(|&v| {
                let noisy = v as f64 + sampler.next() * spec.noise_sigma;
                noisy.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        out = GrayImage::from_raw(out.width(), out.height(), data);
    }
    out
}
